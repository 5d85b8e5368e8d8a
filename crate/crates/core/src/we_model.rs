//! Weighted aggregation of well-being across nested "WE" scopes.
//!
//! A [`WellbeingModel`] is an ordered list of scope layers, each carrying a
//! value function and a normalization weight. Two layers with weights `r` and
//! `1 - r` give the narrow/wide model; more layers give the polynomial
//! extension.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::valuefn::LayerFunction;

/// Tolerance on `|Σ weights - 1|`.
pub const WEIGHT_SUM_TOL: f64 = 1e-12;

/// Conventional gradation from the individual to the whole world.
pub const GRADATION: [&str; 6] = [
    "I",
    "family",
    "community",
    "municipality",
    "nation",
    "world",
];

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct WeScope(String);

impl WeScope {
    pub fn new(label: impl Into<String>) -> Result<Self> {
        let label = label.into();
        if label.trim().is_empty() {
            return Err(Error::invalid("scope", "label must be non-empty"));
        }
        Ok(Self(label))
    }

    pub fn label(&self) -> &str {
        &self.0
    }

    /// Position in the I-to-world gradation, if the label is one of them.
    pub fn gradation_rank(&self) -> Option<usize> {
        GRADATION.iter().position(|g| *g == self.0)
    }
}

impl std::fmt::Display for WeScope {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeLayer {
    pub scope: WeScope,
    pub function: LayerFunction,
    pub weight: f64,
    /// Element weights reducing a vector of scope elements to the scalar
    /// argument of `function`. `None` means the layer is scalar-only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub aggregator: Option<Vec<f64>>,
}

impl WeLayer {
    pub fn new(scope: &str, function: LayerFunction, weight: f64) -> Result<Self> {
        Ok(Self {
            scope: WeScope::new(scope)?,
            function,
            weight,
            aggregator: None,
        })
    }

    pub fn with_aggregator(mut self, aggregator: Vec<f64>) -> Self {
        self.aggregator = Some(aggregator);
        self
    }

    pub fn evaluate(&self, x: f64) -> Result<f64> {
        self.function.evaluate(x)
    }

    /// Reduce an element vector to a scalar with the aggregator, then apply
    /// the value function.
    pub fn evaluate_vector(&self, elements: &[f64]) -> Result<f64> {
        let x = match &self.aggregator {
            Some(agg) => {
                if agg.len() != elements.len() {
                    return Err(Error::dimension(
                        format!("aggregator of layer {}", self.scope),
                        agg.len(),
                        elements.len(),
                    ));
                }
                agg.iter().zip(elements).map(|(a, e)| a * e).sum()
            }
            None => {
                if elements.len() != 1 {
                    return Err(Error::dimension(
                        format!("scalar layer {}", self.scope),
                        1,
                        elements.len(),
                    ));
                }
                elements[0]
            }
        };
        self.function.evaluate(x)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WellbeingModel {
    layers: Vec<WeLayer>,
}

impl WellbeingModel {
    pub fn new(layers: Vec<WeLayer>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::invalid("layers", "at least one layer is required"));
        }
        let mut seen = BTreeSet::new();
        for layer in &layers {
            if !seen.insert(layer.scope.label()) {
                return Err(Error::invalid(
                    "layers",
                    format!("duplicate scope label {:?}", layer.scope.label()),
                ));
            }
            if !(layer.weight >= 0.0 && layer.weight.is_finite()) {
                return Err(Error::invalid(
                    "layers",
                    format!("weight of {} must be finite and >= 0", layer.scope),
                ));
            }
            layer.function.validate()?;
        }
        let total: f64 = layers.iter().map(|l| l.weight).sum();
        if (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::invalid(
                "layers",
                format!("weights must sum to 1, got {total}"),
            ));
        }
        Ok(Self { layers })
    }

    /// Narrow/wide model with weights `r` and `1 - r`.
    pub fn two_scope(r: f64, narrow: LayerFunction, wide: LayerFunction) -> Result<Self> {
        if !(0.0..=1.0).contains(&r) {
            return Err(Error::invalid("r", format!("must lie in [0, 1], got {r}")));
        }
        Self::new(vec![
            WeLayer::new("narrow", narrow, r)?,
            WeLayer::new("wide", wide, 1.0 - r)?,
        ])
    }

    pub fn layers(&self) -> &[WeLayer] {
        &self.layers
    }

    pub fn aggregate(&self, assignment: &BTreeMap<String, f64>) -> Result<f64> {
        let missing: Vec<String> = self
            .layers
            .iter()
            .filter(|l| !assignment.contains_key(l.scope.label()))
            .map(|l| l.scope.label().to_string())
            .collect();
        if !missing.is_empty() {
            return Err(Error::MissingScope(missing));
        }
        let mut total = 0.0;
        for layer in &self.layers {
            total += layer.weight * layer.evaluate(assignment[layer.scope.label()])?;
        }
        Ok(total)
    }

    /// Aggregate with arguments given positionally, in layer order.
    pub fn aggregate_values(&self, xs: &[f64]) -> Result<f64> {
        if xs.len() != self.layers.len() {
            return Err(Error::dimension(
                "layer arguments",
                self.layers.len(),
                xs.len(),
            ));
        }
        let mut total = 0.0;
        for (layer, &x) in self.layers.iter().zip(xs) {
            total += layer.weight * layer.evaluate(x)?;
        }
        Ok(total)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SurfacePoint {
    pub x_n: f64,
    pub x_w: f64,
    #[serde(rename = "W")]
    pub w: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvePoint {
    pub x: f64,
    #[serde(rename = "W")]
    pub w: f64,
}

/// Evaluate a two-layer model on the rectangular grid `x_n × x_w`,
/// `x_n` outer.
pub fn sample_surface(
    model: &WellbeingModel,
    x_n: &[f64],
    x_w: &[f64],
) -> Result<Vec<SurfacePoint>> {
    if model.layers().len() != 2 {
        return Err(Error::invalid(
            "layers",
            format!(
                "surface sampling needs exactly 2 layers, model has {}",
                model.layers().len()
            ),
        ));
    }
    if x_n.is_empty() || x_w.is_empty() {
        return Err(Error::Empty("surface grid".into()));
    }
    let mut out = Vec::with_capacity(x_n.len() * x_w.len());
    for &a in x_n {
        for &b in x_w {
            out.push(SurfacePoint {
                x_n: a,
                x_w: b,
                w: model.aggregate_values(&[a, b])?,
            });
        }
    }
    Ok(out)
}

/// Well-being along the shared function of a consensus, where narrow and
/// wide scopes coincide and the weights drop out.
pub fn consensus_curve(layer: &WeLayer, grid: &[f64]) -> Result<Vec<CurvePoint>> {
    if grid.is_empty() {
        return Err(Error::Empty("curve grid".into()));
    }
    grid.iter()
        .map(|&x| {
            Ok(CurvePoint {
                x,
                w: layer.evaluate(x)?,
            })
        })
        .collect()
}

/// `steps` evenly spaced points from `start` to `end` inclusive.
pub fn linspace(start: f64, end: f64, steps: usize) -> Vec<f64> {
    match steps {
        0 => Vec::new(),
        1 => vec![start],
        _ => {
            let span = end - start;
            let last = (steps - 1) as f64;
            (0..steps)
                .map(|i| {
                    if i == steps - 1 {
                        end
                    } else {
                        start + span * i as f64 / last
                    }
                })
                .collect()
        }
    }
}
