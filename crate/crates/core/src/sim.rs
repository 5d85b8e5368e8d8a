//! Reference community dynamics producing fact indicators per policy.
//!
//! Agents hold an income; a tax funds a renewable-energy subsidy and a
//! social service. After `steps` rounds the community reports an economic
//! (mean disposable income), environmental (renewable share of energy) and
//! social (mean connection strength) indicator.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const BUDGET_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DynamicsConfig {
    pub agents: usize,
    pub steps: usize,
    pub seed: u64,
    #[serde(default)]
    pub income_spread: f64,
    /// Renewable uptake per unit of subsidy spending.
    pub kappa_rho: f64,
    /// Connection growth per unit of service share.
    pub kappa_c: f64,
    /// Connection decay per step.
    pub decay: f64,
}

impl DynamicsConfig {
    pub fn validate(&self) -> Result<()> {
        if self.agents == 0 {
            return Err(Error::invalid("dynamics.agents", "must be >= 1"));
        }
        if self.steps == 0 {
            return Err(Error::invalid("dynamics.steps", "must be >= 1"));
        }
        for (name, v) in [
            ("dynamics.income_spread", self.income_spread),
            ("dynamics.kappa_rho", self.kappa_rho),
            ("dynamics.kappa_c", self.kappa_c),
            ("dynamics.decay", self.decay),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::invalid(
                    name,
                    format!("must be finite and >= 0, got {v}"),
                ));
            }
        }
        Ok(())
    }

    /// Initial incomes `max(0, 1 + spread·u)` with `u` uniform on `[-1, 1)`.
    pub fn incomes(&self) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        (0..self.agents)
            .map(|_| {
                let u: f64 = rng.gen_range(-1.0..1.0);
                (1.0 + self.income_spread * u).max(0.0)
            })
            .collect()
    }
}

/// Subsidy share `s`, tax rate `t`, service share `v`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolicyKnobs {
    pub s: f64,
    pub t: f64,
    pub v: f64,
}

impl PolicyKnobs {
    pub fn new(s: f64, t: f64, v: f64) -> Result<Self> {
        let k = Self { s, t, v };
        k.validate()?;
        Ok(k)
    }

    pub fn validate(&self) -> Result<()> {
        self.check_ranges()?;
        if !self.within_budget() {
            return Err(Error::invalid(
                "knobs",
                format!("s + v must be <= 1, got {}", self.s + self.v),
            ));
        }
        Ok(())
    }

    fn check_ranges(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.s) {
            return Err(Error::invalid(
                "knobs.s",
                format!("{} outside [0, 1]", self.s),
            ));
        }
        if !(0.0..=0.5).contains(&self.t) {
            return Err(Error::invalid(
                "knobs.t",
                format!("{} outside [0, 0.5]", self.t),
            ));
        }
        if !(0.0..=1.0).contains(&self.v) {
            return Err(Error::invalid(
                "knobs.v",
                format!("{} outside [0, 1]", self.v),
            ));
        }
        Ok(())
    }

    pub fn within_budget(&self) -> bool {
        self.s + self.v <= 1.0 + BUDGET_TOL
    }
}

/// Fact indicators in `(economic, environmental, social)` order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Indicators {
    pub economic: f64,
    pub environmental: f64,
    pub social: f64,
}

impl Indicators {
    pub const NAMES: [&'static str; 3] = ["economic", "environmental", "social"];

    pub fn to_vec(self) -> Vec<f64> {
        vec![self.economic, self.environmental, self.social]
    }
}

pub fn run_policy(cfg: &DynamicsConfig, knobs: &PolicyKnobs) -> Result<Indicators> {
    cfg.validate()?;
    knobs.validate()?;
    let PolicyKnobs { s, t, v } = *knobs;
    let incomes = cfg.incomes();
    let n = cfg.agents as f64;
    let total_income: f64 = incomes.iter().sum();

    let mut renewable = 0.0f64;
    let mut disposable = vec![0.0; cfg.agents];
    let mut connection = vec![0.0f64; cfg.agents];
    for _ in 0..cfg.steps {
        let revenue = t * total_income;
        renewable = (renewable + cfg.kappa_rho * s * revenue / n).min(1.0);
        for ((d, c), y) in disposable
            .iter_mut()
            .zip(connection.iter_mut())
            .zip(&incomes)
        {
            *d = y * (1.0 - t) + v * revenue / n;
            *c = (*c + cfg.kappa_c * v - cfg.decay).max(0.0);
        }
    }
    // every agent consumes one unit of energy in the reference dynamics
    let mean_energy = 1.0;
    Ok(Indicators {
        economic: disposable.iter().sum::<f64>() / n,
        environmental: 1.0 - mean_energy * (1.0 - renewable),
        social: connection.iter().sum::<f64>() / n,
    })
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SweepGrid {
    pub s: Vec<f64>,
    pub t: Vec<f64>,
    pub v: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub policy_id: usize,
    pub knobs: PolicyKnobs,
    pub indicators: Indicators,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    pub fn from_indicators(rows: Vec<(PolicyKnobs, Indicators)>) -> Self {
        Self {
            rows: rows
                .into_iter()
                .enumerate()
                .map(|(policy_id, (knobs, indicators))| SweepRow {
                    policy_id,
                    knobs,
                    indicators,
                })
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SkippedCombination {
    pub s: f64,
    pub t: f64,
    pub v: f64,
    pub reason: &'static str,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepOutcome {
    pub table: SweepTable,
    pub skipped: Vec<SkippedCombination>,
}

/// Cartesian sweep, `s` outer, `t` middle, `v` inner. Every row reuses the
/// configured seed, so a row depends only on its own knobs.
pub fn run_sweep(cfg: &DynamicsConfig, grid: &SweepGrid) -> Result<SweepOutcome> {
    cfg.validate()?;
    if grid.s.is_empty() || grid.t.is_empty() || grid.v.is_empty() {
        return Err(Error::Empty("sweep grid".into()));
    }
    let mut admissible = Vec::new();
    let mut skipped = Vec::new();
    for &s in &grid.s {
        for &t in &grid.t {
            for &v in &grid.v {
                let k = PolicyKnobs { s, t, v };
                k.check_ranges()?;
                if k.within_budget() {
                    admissible.push(k);
                } else {
                    skipped.push(SkippedCombination {
                        s,
                        t,
                        v,
                        reason: "s + v exceeds budget",
                    });
                }
            }
        }
    }
    let indicators = admissible
        .par_iter()
        .map(|k| run_policy(cfg, k))
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepOutcome {
        table: SweepTable::from_indicators(admissible.into_iter().zip(indicators).collect()),
        skipped,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TernaryRow {
    pub policy_id: usize,
    pub p_econ: f64,
    pub p_env: f64,
    pub p_soc: f64,
}

/// Min-max normalize each indicator over the table, then project each row
/// onto the unit simplex. Rows that normalize to all zeros map to the
/// centroid.
pub fn normalize_ternary(table: &SweepTable) -> Vec<TernaryRow> {
    let column = |f: fn(&Indicators) -> f64| -> (f64, f64) {
        table
            .rows
            .iter()
            .map(|r| f(&r.indicators))
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
                (lo.min(v), hi.max(v))
            })
    };
    let ranges = [
        column(|i| i.economic),
        column(|i| i.environmental),
        column(|i| i.social),
    ];
    let scale = |v: f64, (lo, hi): (f64, f64)| if hi > lo { (v - lo) / (hi - lo) } else { 0.0 };
    table
        .rows
        .iter()
        .map(|r| {
            let raw = [
                scale(r.indicators.economic, ranges[0]),
                scale(r.indicators.environmental, ranges[1]),
                scale(r.indicators.social, ranges[2]),
            ];
            let sum: f64 = raw.iter().sum();
            let [p_econ, p_env, p_soc] = if sum > 0.0 {
                raw.map(|x| x / sum)
            } else {
                [1.0 / 3.0; 3]
            };
            TernaryRow {
                policy_id: r.policy_id,
                p_econ,
                p_env,
                p_soc,
            }
        })
        .collect()
}
