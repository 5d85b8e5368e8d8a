//! Well-being value functions.
//!
//! Three shapes are supported: the classic one-sided families (linear,
//! logarithmic, power, quadratic, exponential, linear-plus-exponential), the
//! loss-averse asymmetric exponential, and the signed power form whose
//! exponent decides between a discounted and an inflated response.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One-sided value-function family, defined for `x >= 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Linear,
    Logarithmic,
    Power,
    Quadratic,
    Exponential,
    LinExp,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Linear => "linear",
            Family::Logarithmic => "logarithmic",
            Family::Power => "power",
            Family::Quadratic => "quadratic",
            Family::Exponential => "exponential",
            Family::LinExp => "lin_exp",
        }
    }
}

/// A family together with its coefficients `a` and `b`.
///
/// `b` is only read by [`Family::LinExp`]; `a` is ignored by
/// [`Family::Linear`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValueFunctionSpec {
    pub family: Family,
    #[serde(default)]
    pub a: f64,
    #[serde(default)]
    pub b: f64,
}

impl ValueFunctionSpec {
    pub fn new(family: Family, a: f64, b: f64) -> Result<Self> {
        let spec = Self { family, a, b };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.a.is_finite() || !self.b.is_finite() {
            return Err(Error::invalid("coefficients", "a and b must be finite"));
        }
        match self.family {
            Family::Logarithmic | Family::Power | Family::Exponential if self.a <= 0.0 => Err(
                Error::invalid("a", format!("{} family requires a > 0", self.family.name())),
            ),
            _ => Ok(()),
        }
    }

    /// Location past which the quadratic family turns downward.
    pub fn quadratic_peak(&self) -> Option<f64> {
        (self.family == Family::Quadratic).then(|| self.a / 2.0)
    }
}

pub fn evaluate_family(spec: &ValueFunctionSpec, x: f64) -> Result<f64> {
    if x.is_nan() || x < 0.0 {
        return Err(Error::Domain(format!(
            "{} family is defined for x >= 0, got {x}",
            spec.family.name()
        )));
    }
    let (a, b) = (spec.a, spec.b);
    let value = match spec.family {
        Family::Linear => x,
        Family::Logarithmic => {
            let arg = a + x;
            if arg <= 0.0 {
                return Err(Error::Domain(format!("logarithm argument {arg} <= 0")));
            }
            arg.ln()
        }
        Family::Power => x.powf(a),
        Family::Quadratic => a * x - x * x,
        Family::Exponential => 1.0 - (-a * x).exp(),
        Family::LinExp => b * x - (-a * x).exp(),
    };
    Ok(value)
}

/// Loss-averse asymmetric exponential value function.
///
/// Gains saturate towards 1 with rate `gain_alpha`; losses saturate towards
/// `-loss_lambda` with rate `loss_beta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AsymmetricSpec {
    #[serde(alias = "alpha")]
    pub gain_alpha: f64,
    #[serde(alias = "beta")]
    pub loss_beta: f64,
    #[serde(alias = "lambda")]
    pub loss_lambda: f64,
}

impl Default for AsymmetricSpec {
    fn default() -> Self {
        Self {
            gain_alpha: 1.0,
            loss_beta: 1.0,
            loss_lambda: 2.0,
        }
    }
}

impl AsymmetricSpec {
    pub fn new(gain_alpha: f64, loss_beta: f64, loss_lambda: f64) -> Result<Self> {
        let spec = Self {
            gain_alpha,
            loss_beta,
            loss_lambda,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gain_alpha > 0.0 && self.gain_alpha.is_finite()) {
            return Err(Error::invalid("gain_alpha", "must be finite and > 0"));
        }
        if !(self.loss_beta > 0.0 && self.loss_beta.is_finite()) {
            return Err(Error::invalid("loss_beta", "must be finite and > 0"));
        }
        if !(self.loss_lambda >= 1.0 && self.loss_lambda.is_finite()) {
            return Err(Error::invalid("loss_lambda", "must be finite and >= 1"));
        }
        Ok(())
    }

    pub fn derivative(&self, x: f64) -> f64 {
        if x >= 0.0 {
            self.gain_alpha * (-self.gain_alpha * x).exp()
        } else {
            self.loss_lambda * self.loss_beta * (self.loss_beta * x).exp()
        }
    }
}

pub fn evaluate_asymmetric(spec: &AsymmetricSpec, x: f64) -> f64 {
    if x >= 0.0 {
        -(-spec.gain_alpha * x).exp_m1()
    } else {
        spec.loss_lambda * (spec.loss_beta * x).exp_m1()
    }
}

/// Signed power form with an achievement-conditioned exponent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SarchSpec {
    pub exponent: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SarchRegime {
    Discounted,
    Neutral,
    Inflated,
}

impl SarchSpec {
    pub fn new(exponent: f64) -> Result<Self> {
        let spec = Self { exponent };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.exponent > 0.0 && self.exponent.is_finite()) {
            return Err(Error::invalid("exponent", "must be finite and > 0"));
        }
        Ok(())
    }
}

pub fn evaluate_sarch(spec: &SarchSpec, x: f64) -> f64 {
    let magnitude = x.abs().powf(spec.exponent);
    if x < 0.0 {
        -magnitude
    } else {
        magnitude
    }
}

pub fn sarch_regime(spec: &SarchSpec) -> SarchRegime {
    if spec.exponent < 1.0 {
        SarchRegime::Discounted
    } else if spec.exponent > 1.0 {
        SarchRegime::Inflated
    } else {
        SarchRegime::Neutral
    }
}

/// A one-sided family extended to negative arguments as `-λ·family(-x)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MirroredFamily {
    #[serde(flatten)]
    pub spec: ValueFunctionSpec,
    #[serde(default = "default_lambda", alias = "lambda")]
    pub loss_lambda: f64,
}

fn default_lambda() -> f64 {
    2.0
}

impl MirroredFamily {
    pub fn evaluate(&self, x: f64) -> Result<f64> {
        if x >= 0.0 {
            evaluate_family(&self.spec, x)
        } else {
            Ok(-self.loss_lambda * evaluate_family(&self.spec, -x)?)
        }
    }
}

/// Any value function usable as a scope layer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LayerFunction {
    Asymmetric(AsymmetricSpec),
    Family(MirroredFamily),
    Sarch(SarchSpec),
}

impl Default for LayerFunction {
    fn default() -> Self {
        LayerFunction::Asymmetric(AsymmetricSpec::default())
    }
}

impl LayerFunction {
    pub fn validate(&self) -> Result<()> {
        match self {
            LayerFunction::Asymmetric(s) => s.validate(),
            LayerFunction::Family(m) => {
                m.spec.validate()?;
                if !(m.loss_lambda >= 1.0 && m.loss_lambda.is_finite()) {
                    return Err(Error::invalid("loss_lambda", "must be finite and >= 1"));
                }
                Ok(())
            }
            LayerFunction::Sarch(s) => s.validate(),
        }
    }

    pub fn evaluate(&self, x: f64) -> Result<f64> {
        match self {
            LayerFunction::Asymmetric(s) => Ok(evaluate_asymmetric(s, x)),
            LayerFunction::Family(m) => m.evaluate(x),
            LayerFunction::Sarch(s) => Ok(evaluate_sarch(s, x)),
        }
    }

    /// Upper bound on `|W|` for losses, when one exists.
    pub fn loss_bound(&self) -> Option<f64> {
        match self {
            LayerFunction::Asymmetric(s) => Some(s.loss_lambda),
            _ => None,
        }
    }

    pub fn quadratic_peak(&self) -> Option<f64> {
        match self {
            LayerFunction::Family(m) => m.spec.quadratic_peak(),
            _ => None,
        }
    }
}
