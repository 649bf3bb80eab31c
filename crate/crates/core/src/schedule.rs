//! Convex-combination weights θ ∈ Δ_T and step-size schedules.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeightKind {
    Uniform,
    Increasing,
    Custom,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightSchedule {
    pub kind: WeightKind,
    values: Vec<f64>,
}

impl WeightSchedule {
    /// Uniform θ_t = 1/T or increasing θ_t = 2t/(T(T+1)).
    pub fn new(kind: WeightKind, horizon: usize) -> Result<Self> {
        if horizon == 0 {
            return Err(Error::InvalidParameter("horizon must be at least 1".into()));
        }
        let tf = horizon as f64;
        let values = match kind {
            WeightKind::Uniform => vec![1.0 / tf; horizon],
            WeightKind::Increasing => (1..=horizon).map(|t| 2.0 * t as f64 / (tf * (tf + 1.0))).collect(),
            WeightKind::Custom => {
                return Err(Error::InvalidParameter("custom weights need explicit values".into()))
            }
        };
        Ok(WeightSchedule { kind, values })
    }

    pub fn uniform(horizon: usize) -> Self {
        Self::new(WeightKind::Uniform, horizon).expect("horizon ≥ 1")
    }

    pub fn increasing(horizon: usize) -> Self {
        Self::new(WeightKind::Increasing, horizon).expect("horizon ≥ 1")
    }

    pub fn custom(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() || values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidParameter("custom weights must be finite and nonnegative".into()));
        }
        let s: f64 = values.iter().sum();
        if (s - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!("custom weights sum to {s}, not 1")));
        }
        Ok(WeightSchedule { kind: WeightKind::Custom, values })
    }

    pub fn horizon(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// θ_t with 1-based t.
    pub fn theta(&self, t: usize) -> f64 {
        self.values[t - 1]
    }

    pub fn sup(&self) -> f64 {
        self.values.iter().cloned().fold(0.0, f64::max)
    }

    /// Weights of the first `t` steps renormalized to sum to one.
    pub fn prefix(&self, t: usize) -> Vec<f64> {
        let s: f64 = self.values[..t].iter().sum();
        self.values[..t].iter().map(|v| v / s).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StepKind {
    /// γ = √(2Ω/(sup θ_t² G² T)).
    ConstantNonsmooth,
    /// γ_t = 2/(α(t+1)).
    InverseLinear,
    /// γ = 1/(L sup θ_t).
    ConstantSmooth,
    /// Explicit values.
    Custom,
}

/// Structure constants a step rule may need.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StepParams {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l: Option<f64>,
}

impl StepParams {
    pub fn nonsmooth(omega: f64, g: f64) -> Self {
        StepParams { omega: Some(omega), g: Some(g), ..Default::default() }
    }

    pub fn strongly_convex(alpha: f64) -> Self {
        StepParams { alpha: Some(alpha), ..Default::default() }
    }

    pub fn smooth(l: f64) -> Self {
        StepParams { l: Some(l), ..Default::default() }
    }
}

pub(crate) fn positive(v: Option<f64>, name: &'static str, ctx: &str) -> Result<f64> {
    let v = v.ok_or_else(|| Error::missing(name, ctx))?;
    if !(v.is_finite() && v > 0.0) {
        return Err(Error::InvalidParameter(format!("{name} must be positive and finite for {ctx}, got {v}")));
    }
    Ok(v)
}

/// Step sizes γ_1..γ_T together with the weights they were built for.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepSchedule {
    pub kind: StepKind,
    pub params: StepParams,
    pub weights: WeightSchedule,
    gammas: Vec<f64>,
}

impl StepSchedule {
    pub fn new(kind: StepKind, params: StepParams, weights: &WeightSchedule) -> Result<Self> {
        let horizon = weights.horizon();
        let sup = weights.sup();
        let gammas = match kind {
            StepKind::ConstantNonsmooth => {
                let omega = positive(params.omega, "omega", "constant-nonsmooth steps")?;
                let g = positive(params.g, "G", "constant-nonsmooth steps")?;
                let gamma = (2.0 * omega / (sup * sup * g * g * horizon as f64)).sqrt();
                vec![gamma; horizon]
            }
            StepKind::InverseLinear => {
                let alpha = positive(params.alpha, "alpha", "inverse-linear steps")?;
                (1..=horizon).map(|t| 2.0 / (alpha * (t as f64 + 1.0))).collect()
            }
            StepKind::ConstantSmooth => {
                let l = positive(params.l, "L", "constant-smooth steps")?;
                vec![1.0 / (l * sup); horizon]
            }
            StepKind::Custom => {
                return Err(Error::InvalidParameter("custom steps need explicit values".into()))
            }
        };
        Ok(StepSchedule { kind, params, weights: weights.clone(), gammas })
    }

    pub fn custom(gammas: Vec<f64>, weights: &WeightSchedule) -> Result<Self> {
        if gammas.len() != weights.horizon() {
            return Err(Error::Dimension { expected: weights.horizon(), got: gammas.len() });
        }
        if gammas.iter().any(|g| !(g.is_finite() && *g > 0.0)) {
            return Err(Error::InvalidParameter("step sizes must be positive and finite".into()));
        }
        Ok(StepSchedule { kind: StepKind::Custom, params: StepParams::default(), weights: weights.clone(), gammas })
    }

    pub fn horizon(&self) -> usize {
        self.gammas.len()
    }

    /// γ_t with 1-based t.
    pub fn gamma(&self, t: usize) -> f64 {
        self.gammas[t - 1]
    }

    pub fn theta(&self, t: usize) -> f64 {
        self.weights.theta(t)
    }

    pub fn gammas(&self) -> &[f64] {
        &self.gammas
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn weight_examples() {
        assert_eq!(WeightSchedule::uniform(4).values(), &[0.25; 4]);
        let inc = WeightSchedule::increasing(3);
        for (a, b) in inc.values().iter().zip([2.0 / 12.0, 4.0 / 12.0, 6.0 / 12.0]) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-16);
        }
        assert!(WeightSchedule::new(WeightKind::Uniform, 0).is_err());
        assert!(WeightSchedule::custom(vec![0.5, 0.6]).is_err());
    }

    #[test]
    fn step_examples() {
        let u = WeightSchedule::uniform(100);
        let s = StepSchedule::new(StepKind::ConstantNonsmooth, StepParams::nonsmooth(2f64.ln(), 1.0), &u).unwrap();
        // (1/T)² T = 1/T, so γ = √(2ΩT)/G.
        assert_abs_diff_eq!(s.gamma(1), (2.0 * 2f64.ln() * 100.0).sqrt(), epsilon = 1e-12);

        let s = StepSchedule::new(StepKind::InverseLinear, StepParams::strongly_convex(2.0), &u).unwrap();
        assert_eq!(s.gamma(1), 0.5);

        let s = StepSchedule::new(StepKind::ConstantSmooth, StepParams::smooth(10.0), &WeightSchedule::uniform(10)).unwrap();
        assert_abs_diff_eq!(s.gamma(7), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn missing_parameter_is_reported() {
        let u = WeightSchedule::uniform(5);
        let e = StepSchedule::new(StepKind::ConstantSmooth, StepParams::nonsmooth(1.0, 1.0), &u).unwrap_err();
        assert!(matches!(e, Error::MissingParameter { name: "L", .. }));
        assert!(StepSchedule::new(StepKind::InverseLinear, StepParams::strongly_convex(-1.0), &u).is_err());
    }
}
