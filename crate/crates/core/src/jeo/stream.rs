use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::linalg::{dist2, norm2};

/// How the data estimates u_1, u_2, ... are produced.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum StreamSpec {
    /// Gradient descent on g(u) = ½ Σ h_i (u_i − center_i)² from u0.
    /// `step` defaults to 2/(min h + max h).
    FromG {
        h: Vec<f64>,
        center: Vec<f64>,
        u0: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        step: Option<f64>,
    },
    /// u_t = target + c β^t d, d a unit direction.
    LinearDecay { target: Vec<f64>, c: f64, beta: f64, direction: Vec<f64> },
    Constant { u: Vec<f64> },
    /// Explicit values u_1..u_K; asking for more is an error.
    Given { values: Vec<Vec<f64>> },
}

/// Declared decay ‖u_t − u*‖ ≤ c β^t.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Decay {
    pub c: f64,
    pub beta: f64,
}

/// A stepped estimator. `next()` advances one step.
#[derive(Clone, Debug)]
pub struct Estimator {
    spec: StreamSpec,
    t: usize,
    u: Vec<f64>,
    step: f64,
    last_dist: Option<f64>,
}

impl Estimator {
    pub fn new(spec: StreamSpec) -> Result<Self> {
        let (u, step) = match &spec {
            StreamSpec::FromG { h, center, u0, step } => {
                check_dim(h.len(), center.len())?;
                check_dim(h.len(), u0.len())?;
                if h.is_empty() || h.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
                    return Err(Error::Stream("g must have positive finite curvatures".into()));
                }
                let lo = h.iter().cloned().fold(f64::INFINITY, f64::min);
                let hi = h.iter().cloned().fold(0.0, f64::max);
                let s = step.unwrap_or(2.0 / (lo + hi));
                if !(s.is_finite() && s > 0.0) {
                    return Err(Error::Stream(format!("step must be positive, got {s}")));
                }
                (u0.clone(), s)
            }
            StreamSpec::LinearDecay { target, c, beta, direction } => {
                check_dim(target.len(), direction.len())?;
                if !(0.0..1.0).contains(beta) || !(c.is_finite() && *c >= 0.0) {
                    return Err(Error::Stream(format!("linear decay needs 0 ≤ β < 1 and c ≥ 0 (β = {beta}, c = {c})")));
                }
                if (norm2(direction) - 1.0).abs() > 1e-9 {
                    return Err(Error::Stream("linear-decay direction must be a unit vector".into()));
                }
                (target.clone(), 0.0)
            }
            StreamSpec::Constant { u } => (u.clone(), 0.0),
            StreamSpec::Given { values } => {
                let d = values.first().map_or(0, |v| v.len());
                if let Some(i) = values.iter().position(|v| v.len() != d || v.iter().any(|x| !x.is_finite())) {
                    return Err(Error::Stream(format!("values[{i}] has the wrong length or a non-finite entry")));
                }
                (vec![0.0; d], 0.0)
            }
        };
        let est = Estimator { spec, t: 0, u, step, last_dist: None };
        est.contraction()?;
        Ok(est)
    }

    pub fn spec(&self) -> &StreamSpec {
        &self.spec
    }

    /// Declared contraction factor of the iteration, if any.
    pub fn contraction(&self) -> Result<Option<f64>> {
        match &self.spec {
            StreamSpec::FromG { h, .. } => {
                let beta = h.iter().map(|hi| (1.0 - self.step * hi).abs()).fold(0.0, f64::max);
                if beta >= 1.0 {
                    return Err(Error::Stream(format!("estimator is not contractive: β = {beta} ≥ 1")));
                }
                Ok(Some(beta))
            }
            StreamSpec::LinearDecay { beta, .. } => Ok(Some(*beta)),
            StreamSpec::Constant { .. } => Ok(Some(0.0)),
            StreamSpec::Given { .. } => Ok(None),
        }
    }

    /// Declared decay relative to the stream's own limit, when one is known.
    pub fn decay(&self) -> Result<Option<Decay>> {
        Ok(match &self.spec {
            StreamSpec::FromG { center, u0, .. } => self.contraction()?.map(|beta| Decay { c: dist2(u0, center), beta }),
            StreamSpec::LinearDecay { c, beta, .. } => Some(Decay { c: *c, beta: *beta }),
            StreamSpec::Constant { .. } | StreamSpec::Given { .. } => None,
        })
    }

    /// 1-based index of the last estimate handed out.
    pub fn t(&self) -> usize {
        self.t
    }

    /// Advances one step and returns u_t.
    pub fn next(&mut self) -> Result<&[f64]> {
        self.t += 1;
        let t = self.t;
        match &self.spec {
            StreamSpec::FromG { h, center, .. } => {
                for i in 0..h.len() {
                    self.u[i] -= self.step * h[i] * (self.u[i] - center[i]);
                }
                let d = dist2(&self.u, center);
                if let Some(prev) = self.last_dist {
                    if d > prev * (1.0 + 1e-12) + 1e-15 {
                        return Err(Error::Stream(format!("estimator moved away from its target at step {t}")));
                    }
                }
                self.last_dist = Some(d);
            }
            StreamSpec::LinearDecay { target, c, beta, direction } => {
                let s = c * beta.powi(t as i32);
                for i in 0..target.len() {
                    self.u[i] = target[i] + s * direction[i];
                }
            }
            StreamSpec::Constant { .. } => {}
            StreamSpec::Given { values } => {
                let v = values.get(t - 1).ok_or_else(|| Error::Stream(format!("stream exhausted after {} estimates", values.len())))?;
                self.u.clone_from(v);
            }
        }
        Ok(&self.u)
    }
}

/// Σ θ_t d_t.
pub fn weighted_decay_sum(theta: &[f64], dists: &[f64]) -> f64 {
    theta.iter().zip(dists).map(|(a, b)| a * b).sum()
}

/// Σ_{t=1}^T t β^t in closed form.
pub fn sum_t_beta_t(beta: f64, horizon: usize) -> f64 {
    let t = horizon as f64;
    beta * (1.0 - (t + 1.0) * beta.powi(horizon as i32) + t * beta.powi(horizon as i32 + 1)) / (1.0 - beta).powi(2)
}

/// Constant C'' with Σ θ_t c β^t ≤ C''/T² under increasing weights.
pub fn increasing_decay_constant(d: Decay) -> f64 {
    2.0 * d.c * d.beta / (1.0 - d.beta).powi(2)
}

/// Constant C' with Σ θ_t c β^t ≤ C'/T under uniform weights.
pub fn uniform_decay_constant(d: Decay) -> f64 {
    d.c * d.beta / (1.0 - d.beta)
}
