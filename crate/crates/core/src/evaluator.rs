//! Policy ranking: couple each sweep row's facts into the agreed baseline,
//! score it with the fitted target, and pick the maximizer.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coupling::{apply_fact_coupling, FactCoupling};
use crate::error::{Error, Result};
use crate::sim::SweepTable;
use crate::survey::{predict, RegressionModel};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightingProfile {
    pub name: String,
    pub coupling: FactCoupling,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankedRow {
    pub policy_id: usize,
    pub x_w_prime: Vec<f64>,
    #[serde(rename = "W_prime")]
    pub w_prime: f64,
    pub perturbation_warned: bool,
}

/// Rows sorted by `W'` descending, then policy id ascending.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankedPolicies {
    pub profile: String,
    pub rows: Vec<RankedRow>,
}

impl RankedPolicies {
    pub fn order(&self) -> Vec<usize> {
        self.rows.iter().map(|r| r.policy_id).collect()
    }

    pub fn warnings(&self) -> usize {
        self.rows.iter().filter(|r| r.perturbation_warned).count()
    }
}

fn rank_order(a: &RankedRow, b: &RankedRow) -> Ordering {
    b.w_prime
        .total_cmp(&a.w_prime)
        .then(a.policy_id.cmp(&b.policy_id))
}

pub fn evaluate_policies(
    target: &RegressionModel,
    baseline: &[f64],
    profile: &WeightingProfile,
    sweep: &SweepTable,
) -> Result<RankedPolicies> {
    if sweep.is_empty() {
        return Err(Error::Empty("sweep table".into()));
    }
    if baseline.len() != target.coefficients.len() {
        return Err(Error::dimension(
            "baseline x_w",
            target.coefficients.len(),
            baseline.len(),
        ));
    }
    let mut rows = sweep
        .rows
        .par_iter()
        .map(|row| {
            let coupled =
                apply_fact_coupling(&profile.coupling, baseline, &row.indicators.to_vec())?;
            let w_prime = predict(target, &coupled.x_w_prime)?;
            if !w_prime.is_finite() {
                return Err(Error::NonFinite(format!("W' of policy {}", row.policy_id)));
            }
            Ok(RankedRow {
                policy_id: row.policy_id,
                x_w_prime: coupled.x_w_prime,
                w_prime,
                perturbation_warned: coupled.warned,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    rows.sort_by(rank_order);
    Ok(RankedPolicies {
        profile: profile.name.clone(),
        rows,
    })
}

pub fn select_best(ranked: &RankedPolicies) -> Result<usize> {
    ranked
        .rows
        .first()
        .map(|r| r.policy_id)
        .ok_or_else(|| Error::Empty("ranked policies".into()))
}

pub fn compare_profiles(
    target: &RegressionModel,
    baseline: &[f64],
    profiles: &[WeightingProfile],
    sweep: &SweepTable,
) -> Result<BTreeMap<String, usize>> {
    if profiles.is_empty() {
        return Err(Error::Empty("weighting profiles".into()));
    }
    let mut names = BTreeSet::new();
    let mut out = BTreeMap::new();
    for p in profiles {
        if !names.insert(p.name.as_str()) {
            return Err(Error::invalid(
                "weighting_profiles",
                format!("duplicate profile {:?}", p.name),
            ));
        }
        let ranked = evaluate_policies(target, baseline, p, sweep)?;
        out.insert(p.name.clone(), select_best(&ranked)?);
    }
    Ok(out)
}
