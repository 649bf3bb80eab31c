use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::linalg::{dot, norm2, sub};
use crate::model::{Affine, PwQuadratic};
use crate::oracle::{Certified, OfflineOracle};
use crate::prox::{Domain, ProximalSetup};

/// Affine piece whose offset depends on the data: ⟨a, x⟩ + b + ⟨c, u⟩.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataPiece {
    pub a: Vec<f64>,
    pub b: f64,
    pub c: Vec<f64>,
}

/// f(x, u), convex in x for every u.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum JeoObjective {
    /// ½ Σ h_i (x_i − u_i)².
    SquaredDistance { h: Vec<f64> },
    /// ‖x − u‖₁.
    L1Distance { dim: usize },
    /// ½α‖x‖² + max_j (⟨a_j, x⟩ + b_j + ⟨c_j, u⟩).
    MaxAffineStrong { alpha: f64, pieces: Vec<DataPiece> },
}

impl JeoObjective {
    pub fn dim_x(&self) -> usize {
        match self {
            JeoObjective::SquaredDistance { h } => h.len(),
            JeoObjective::L1Distance { dim } => *dim,
            JeoObjective::MaxAffineStrong { pieces, .. } => pieces.first().map_or(0, |p| p.a.len()),
        }
    }

    pub fn dim_u(&self) -> usize {
        match self {
            JeoObjective::MaxAffineStrong { pieces, .. } => pieces.first().map_or(0, |p| p.c.len()),
            _ => self.dim_x(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            JeoObjective::SquaredDistance { h } => {
                if h.is_empty() || h.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
                    return Err(Error::Config("squared-distance weights must be nonnegative and finite".into()));
                }
            }
            JeoObjective::L1Distance { dim } => {
                if *dim == 0 {
                    return Err(Error::Config("l1-distance needs dim ≥ 1".into()));
                }
            }
            JeoObjective::MaxAffineStrong { alpha, pieces } => {
                if !(alpha.is_finite() && *alpha >= 0.0) {
                    return Err(Error::Config("alpha must be nonnegative".into()));
                }
                if pieces.is_empty() {
                    return Err(Error::Config("max-affine-strong needs at least one piece".into()));
                }
                let (n, d) = (self.dim_x(), self.dim_u());
                for (j, p) in pieces.iter().enumerate() {
                    if p.a.len() != n || p.c.len() != d {
                        return Err(Error::Config(format!("pieces[{j}] has inconsistent dimensions")));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn value(&self, x: &[f64], u: &[f64]) -> f64 {
        match self {
            JeoObjective::SquaredDistance { h } => 0.5 * (0..h.len()).map(|i| h[i] * (x[i] - u[i]).powi(2)).sum::<f64>(),
            JeoObjective::L1Distance { .. } => x.iter().zip(u).map(|(a, b)| (a - b).abs()).sum(),
            JeoObjective::MaxAffineStrong { alpha, pieces } => {
                0.5 * alpha * dot(x, x) + pieces.iter().map(|p| dot(&p.a, x) + p.b + dot(&p.c, u)).fold(f64::NEG_INFINITY, f64::max)
            }
        }
    }

    /// A subgradient in x (first maximizing piece; sign(0) = 0).
    pub fn grad_x(&self, x: &[f64], u: &[f64]) -> Vec<f64> {
        match self {
            JeoObjective::SquaredDistance { h } => (0..h.len()).map(|i| h[i] * (x[i] - u[i])).collect(),
            JeoObjective::L1Distance { .. } => x.iter().zip(u).map(|(a, b)| sign(a - b)).collect(),
            JeoObjective::MaxAffineStrong { alpha, pieces } => {
                let vals: Vec<f64> = pieces.iter().map(|p| dot(&p.a, x) + p.b + dot(&p.c, u)).collect();
                let j = crate::linalg::argmax(&vals);
                x.iter().zip(&pieces[j].a).map(|(xi, ai)| alpha * xi + ai).collect()
            }
        }
    }

    /// f(·, u) as a structured function of x.
    pub fn section(&self, u: &[f64]) -> PwQuadratic {
        match self {
            JeoObjective::SquaredDistance { h } => PwQuadratic::separable_distance(h.clone(), u),
            JeoObjective::L1Distance { dim } => {
                let mut f = PwQuadratic::zero(*dim);
                for i in 0..*dim {
                    let mut e = vec![0.0; *dim];
                    e[i] = 1.0;
                    let neg: Vec<f64> = e.iter().map(|v| -v).collect();
                    f.max_terms.push(vec![Affine::new(e, -u[i]), Affine::new(neg, u[i])]);
                }
                f
            }
            JeoObjective::MaxAffineStrong { alpha, pieces } => {
                let n = self.dim_x();
                let mut f = PwQuadratic::zero(n);
                f.hess_diag = vec![*alpha; n];
                f.max_terms.push(pieces.iter().map(|p| Affine::new(p.a.clone(), p.b + dot(&p.c, u))).collect());
                f
            }
        }
    }
}

fn sign(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Declared constants (all relative to the setup's norm).
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JeoConstants {
    #[serde(rename = "G_fX")]
    pub g_fx: f64,
    #[serde(rename = "alpha_fX", default, skip_serializing_if = "Option::is_none")]
    pub alpha_fx: Option<f64>,
    #[serde(rename = "L_fX", default, skip_serializing_if = "Option::is_none")]
    pub l_fx: Option<f64>,
    #[serde(rename = "G_fU", default, skip_serializing_if = "Option::is_none")]
    pub g_fu: Option<f64>,
    #[serde(rename = "L_fU", default, skip_serializing_if = "Option::is_none")]
    pub l_fu: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JeoInstance {
    pub setup: ProximalSetup,
    /// Where the data lives; defaults to the decision setup.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub data_setup: Option<ProximalSetup>,
    pub objective: JeoObjective,
    /// True data, known only in test mode.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u_star: Option<Vec<f64>>,
    pub constants: JeoConstants,
}

impl JeoInstance {
    pub fn data_domain(&self) -> &ProximalSetup {
        self.data_setup.as_ref().unwrap_or(&self.setup)
    }

    /// D ≥ max ‖x − x'‖ over X.
    pub fn diameter(&self) -> f64 {
        self.setup.diameter()
    }

    pub fn validate(&self) -> Result<()> {
        self.objective.validate()?;
        if self.objective.dim_x() != self.setup.dim() {
            return Err(Error::Config(format!(
                "objective has dim {}, setup has {}",
                self.objective.dim_x(),
                self.setup.dim()
            )));
        }
        check_dim(self.objective.dim_u(), self.data_domain().dim()).map_err(|e| Error::Config(format!("data_setup: {e}")))?;
        if let Some(u) = &self.u_star {
            check_dim(self.objective.dim_u(), u.len()).map_err(|e| Error::Config(format!("u_star: {e}")))?;
        }
        self.spot_check(0x1e0, 64)
    }

    /// Checks the declared constants on seeded samples.
    pub fn spot_check(&self, seed: u64, samples: usize) -> Result<()> {
        let k = &self.constants;
        let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
        let (xs, us) = (&self.setup, self.data_domain());
        let tol = 1e-9;
        let f = &self.objective;
        for _ in 0..samples {
            let (x, x2) = (xs.sample(&mut rng), xs.sample(&mut rng));
            let (u, u2) = (us.sample(&mut rng), us.sample(&mut rng));
            let g = xs.dual_norm(&f.grad_x(&x, &u));
            if g > k.g_fx * (1.0 + tol) {
                return Err(Error::Config(format!("‖∇_x f‖_* = {g} exceeds G_fX = {}", k.g_fx)));
            }
            if let Some(a) = k.alpha_fx {
                // f(x2) ≥ f(x) + ⟨∇f(x), x2 − x⟩ + α V_x(x2)
                let lhs = f.value(&x2, &u);
                let rhs = f.value(&x, &u) + dot(&f.grad_x(&x, &u), &sub(&x2, &x)) + a * xs.bregman(&x, &x2)?;
                if lhs < rhs - tol * (1.0 + rhs.abs()) {
                    return Err(Error::Config(format!("f is not alpha_fX = {a} strongly convex on a sampled pair")));
                }
            }
            if let Some(l) = k.l_fx {
                let d = xs.dual_norm(&sub(&f.grad_x(&x, &u), &f.grad_x(&x2, &u)));
                if d > l * xs.norm(&sub(&x, &x2)) * (1.0 + tol) + tol {
                    return Err(Error::Config(format!("∇_x f is not L_fX = {l} Lipschitz on a sampled pair")));
                }
            }
            let du = us.norm(&sub(&u, &u2));
            if let Some(gu) = k.g_fu {
                let d = (f.value(&x, &u) - f.value(&x, &u2)).abs();
                if d > gu * du * (1.0 + tol) + tol {
                    return Err(Error::Config(format!("|f(x,u) − f(x,u')| exceeds G_fU = {gu} times the distance")));
                }
            }
            if let Some(l) = k.l_fu {
                let d = xs.dual_norm(&sub(&f.grad_x(&x, &u), &f.grad_x(&x, &u2)));
                if d > l * du * (1.0 + tol) + tol {
                    return Err(Error::Config(format!("∇_x f is not L_fU = {l} Lipschitz in u on a sampled pair")));
                }
            }
        }
        Ok(())
    }

    /// min_x f(x, u), certified.
    pub fn minimize_at(&self, u: &[f64], oracle: &OfflineOracle) -> Result<Certified> {
        oracle.minimize_structured(&self.objective.section(u), &self.setup)
    }
}

/// f(x, u) = ½ Σ h_i (x_i − u_i)², h ∈ [α, 2α], on the ball of radius r; u* in the ball of radius r/2.
pub fn squared_distance_instance<R: Rng + ?Sized>(rng: &mut R, n: usize, alpha: f64, r: f64) -> JeoInstance {
    let h: Vec<f64> = (0..n).map(|_| alpha * (1.0 + rng.random::<f64>())).collect();
    let u_star = Domain::ball(n, 0.5 * r).sample(rng);
    JeoInstance {
        setup: ProximalSetup::euclidean_ball(n, r),
        data_setup: None,
        objective: JeoObjective::SquaredDistance { h },
        u_star: Some(u_star),
        // ‖h ∘ (x − u)‖ ≤ 2α · 2r for x, u in the ball.
        constants: JeoConstants {
            g_fx: 4.0 * alpha * r,
            alpha_fx: Some(alpha),
            l_fx: Some(2.0 * alpha),
            g_fu: Some(4.0 * alpha * r),
            l_fu: Some(2.0 * alpha),
        },
    }
}

/// f(x, u) = ‖x − u‖₁ on the ball of radius r.
pub fn l1_instance<R: Rng + ?Sized>(rng: &mut R, n: usize, r: f64) -> JeoInstance {
    let u_star = Domain::ball(n, 0.5 * r).sample(rng);
    let s = (n as f64).sqrt();
    JeoInstance {
        setup: ProximalSetup::euclidean_ball(n, r),
        data_setup: None,
        objective: JeoObjective::L1Distance { dim: n },
        u_star: Some(u_star),
        constants: JeoConstants { g_fx: s, alpha_fx: None, l_fx: None, g_fu: Some(s), l_fu: None },
    }
}

/// ½α‖x‖² + max_j(⟨a_j, x⟩ + b_j + ⟨c_j, u⟩) on the ball of radius r, with data in the ball of radius r.
pub fn max_affine_strong_instance<R: Rng + ?Sized>(rng: &mut R, n: usize, pieces: usize, alpha: f64, r: f64) -> JeoInstance {
    let mut unif = |s: f64| s * (2.0 * rng.random::<f64>() - 1.0);
    let pieces: Vec<DataPiece> = (0..pieces)
        .map(|_| DataPiece {
            a: (0..n).map(|_| unif(1.0)).collect(),
            b: unif(0.2),
            c: (0..n).map(|_| unif(0.5)).collect(),
        })
        .collect();
    let amax = pieces.iter().map(|p| norm2(&p.a)).fold(0.0, f64::max);
    let cmax = pieces.iter().map(|p| norm2(&p.c)).fold(0.0, f64::max);
    let u_star = Domain::ball(n, 0.5 * r).sample(rng);
    JeoInstance {
        setup: ProximalSetup::euclidean_ball(n, r),
        data_setup: None,
        objective: JeoObjective::MaxAffineStrong { alpha, pieces },
        u_star: Some(u_star),
        constants: JeoConstants { g_fx: alpha * r + amax, alpha_fx: Some(alpha), l_fx: None, g_fu: Some(cmax), l_fu: None },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generated_instances_validate() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(9);
        squared_distance_instance(&mut rng, 4, 1.0, 1.0).validate().unwrap();
        l1_instance(&mut rng, 4, 1.0).validate().unwrap();
        max_affine_strong_instance(&mut rng, 4, 5, 0.5, 1.0).validate().unwrap();
    }

    #[test]
    fn sections_agree_with_values() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(10);
        for inst in [
            squared_distance_instance(&mut rng, 3, 1.0, 1.0),
            l1_instance(&mut rng, 3, 1.0),
            max_affine_strong_instance(&mut rng, 3, 4, 0.5, 1.0),
        ] {
            let u = inst.setup.sample(&mut rng);
            let s = inst.objective.section(&u);
            for _ in 0..20 {
                let x = inst.setup.sample(&mut rng);
                assert!((s.value(&x) - inst.objective.value(&x, &u)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn overstated_strong_convexity_is_rejected() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(11);
        let mut inst = squared_distance_instance(&mut rng, 3, 1.0, 1.0);
        inst.constants.alpha_fx = Some(5.0);
        assert!(inst.validate().is_err());
    }
}
