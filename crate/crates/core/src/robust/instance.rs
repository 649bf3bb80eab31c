use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, check_finite, Error, Result};
use crate::linalg::{axpy, dist2, dot, matvec, matvec_t, norm2};
use crate::model::{Affine, Bilinear, PwQuadratic};
use crate::oracle::OfflineOracle;
use crate::prox::{Domain, ProximalSetup};

/// f(x, u) = ⟨u, A x⟩ + ½α_x‖x‖² − ½α_u‖u − c‖² + b + max_j(⟨a_j, x⟩ + b_j).
///
/// The max term is omitted when `pieces` is empty.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Constraint {
    #[serde(default = "default_kind")]
    pub kind: String,
    /// dim u × n, row-major.
    pub a: Vec<Vec<f64>>,
    pub c: Vec<f64>,
    #[serde(default)]
    pub b: f64,
    #[serde(default)]
    pub alpha_x: f64,
    #[serde(default)]
    pub alpha_u: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub pieces: Vec<Affine>,
}

fn default_kind() -> String {
    "bilinear-quadratic".into()
}

impl Constraint {
    fn piece_max(&self, x: &[f64]) -> (f64, Option<usize>) {
        if self.pieces.is_empty() {
            return (0.0, None);
        }
        let vals: Vec<f64> = self.pieces.iter().map(|p| p.eval(x)).collect();
        let j = crate::linalg::argmax(&vals);
        (vals[j], Some(j))
    }

    pub fn value(&self, x: &[f64], u: &[f64]) -> f64 {
        let ax = matvec(&self.a, x);
        let du: f64 = u.iter().zip(&self.c).map(|(a, b)| (a - b) * (a - b)).sum();
        dot(u, &ax) + 0.5 * self.alpha_x * dot(x, x) - 0.5 * self.alpha_u * du + self.b + self.piece_max(x).0
    }

    pub fn grad_x(&self, x: &[f64], u: &[f64]) -> Vec<f64> {
        let mut g = matvec_t(&self.a, u);
        axpy(&mut g, self.alpha_x, x);
        if let (_, Some(j)) = self.piece_max(x) {
            axpy(&mut g, 1.0, &self.pieces[j].a);
        }
        g
    }

    pub fn grad_u(&self, x: &[f64], u: &[f64]) -> Vec<f64> {
        let mut g = matvec(&self.a, x);
        for i in 0..g.len() {
            g[i] -= self.alpha_u * (u[i] - self.c[i]);
        }
        g
    }

    /// Pieces of f(·, u) as affine functions of x, excluding ½α_x‖x‖².
    pub(crate) fn x_pieces(&self, u: &[f64]) -> Vec<Affine> {
        let base = Affine::new(
            matvec_t(&self.a, u),
            self.b - 0.5 * self.alpha_u * u.iter().zip(&self.c).map(|(a, b)| (a - b) * (a - b)).sum::<f64>(),
        );
        if self.pieces.is_empty() {
            return vec![base];
        }
        self.pieces
            .iter()
            .map(|p| {
                let mut a = base.a.clone();
                axpy(&mut a, 1.0, &p.a);
                Affine::new(a, base.b + p.b)
            })
            .collect()
    }

    /// f(·, u) as a structured function of x.
    pub fn x_section(&self, u: &[f64]) -> PwQuadratic {
        let n = self.a.first().map_or(0, Vec::len);
        let mut f = PwQuadratic::zero(n);
        f.hess_diag = vec![self.alpha_x; n];
        f.max_terms.push(self.x_pieces(u));
        f
    }

    /// −f(x, ·) as a structured (convex) function of u.
    pub fn neg_u_section(&self, x: &[f64]) -> PwQuadratic {
        let ax = matvec(&self.a, x);
        let lin = ax.iter().zip(&self.c).map(|(v, c)| -v - self.alpha_u * c).collect();
        PwQuadratic {
            hess_diag: vec![self.alpha_u; self.c.len()],
            lin,
            constant: 0.5 * self.alpha_u * dot(&self.c, &self.c) - 0.5 * self.alpha_x * dot(x, x) - self.b - self.piece_max(x).0,
            max_terms: Vec::new(),
        }
    }
}

/// Declared structure constants.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RobustConstants {
    #[serde(rename = "G_X")]
    pub g_x: f64,
    #[serde(rename = "G_U")]
    pub g_u: f64,
    #[serde(rename = "alpha_X", default, skip_serializing_if = "Option::is_none")]
    pub alpha_x: Option<f64>,
    #[serde(rename = "alpha_U", default, skip_serializing_if = "Option::is_none")]
    pub alpha_u: Option<f64>,
    #[serde(rename = "L_X", default, skip_serializing_if = "Option::is_none")]
    pub l_x: Option<f64>,
    #[serde(rename = "L_U", default, skip_serializing_if = "Option::is_none")]
    pub l_u: Option<f64>,
}

/// Robust feasibility problem: find x ∈ X with f^i(x, u) ≤ 0 for all u ∈ U^i, i ∈ [m].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RobustInstance {
    pub m: usize,
    pub n: usize,
    pub x_domain: ProximalSetup,
    pub u_domains: Vec<ProximalSetup>,
    pub constraints: Vec<Constraint>,
    pub constants: RobustConstants,
}

impl RobustInstance {
    /// Shape checks plus seeded spot checks of the declared constants.
    pub fn validate(&self) -> Result<()> {
        let cfg = |s: String| Err(Error::Config(s));
        if self.m == 0 || self.constraints.len() != self.m || self.u_domains.len() != self.m {
            return cfg(format!(
                "m = {} but {} constraints and {} uncertainty sets",
                self.m,
                self.constraints.len(),
                self.u_domains.len()
            ));
        }
        if self.x_domain.dim() != self.n {
            return cfg(format!("x_domain has dim {}, n = {}", self.x_domain.dim(), self.n));
        }
        let ax = self.constraints[0].alpha_x;
        for (i, c) in self.constraints.iter().enumerate() {
            let du = self.u_domains[i].dim();
            let ctx = |e: Error| Error::Config(format!("constraints[{i}]: {e}"));
            check_dim(du, c.a.len()).map_err(ctx)?;
            check_dim(du, c.c.len()).map_err(ctx)?;
            for row in &c.a {
                check_dim(self.n, row.len()).map_err(ctx)?;
                check_finite("A", row).map_err(ctx)?;
            }
            for p in &c.pieces {
                check_dim(self.n, p.a.len()).map_err(ctx)?;
            }
            if c.kind != "bilinear-quadratic" {
                return cfg(format!("constraints[{i}]: unknown kind `{}`", c.kind));
            }
            if c.alpha_x < 0.0 || c.alpha_u < 0.0 {
                return cfg(format!("constraints[{i}]: curvatures must be nonnegative"));
            }
            if c.alpha_x != ax {
                return cfg("all constraints must share alpha_x".into());
            }
        }
        self.spot_check(0x5eed, 64)
    }

    /// Checks the declared bounds on sampled points and segments.
    pub fn spot_check(&self, seed: u64, samples: usize) -> Result<()> {
        let k = &self.constants;
        let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
        let tol = 1e-9;
        for (i, c) in self.constraints.iter().enumerate() {
            let us = &self.u_domains[i];
            for _ in 0..samples {
                let (x, x2) = (self.x_domain.sample(&mut rng), self.x_domain.sample(&mut rng));
                let (u, u2) = (us.sample(&mut rng), us.sample(&mut rng));
                let gx = self.x_domain.dual_norm(&c.grad_x(&x, &u));
                if gx > k.g_x * (1.0 + tol) {
                    return Err(Error::Config(format!("constraint {i}: ‖∇_x f‖_* = {gx} exceeds G_X = {}", k.g_x)));
                }
                let gu = us.dual_norm(&c.grad_u(&x, &u));
                if gu > k.g_u * (1.0 + tol) {
                    return Err(Error::Config(format!("constraint {i}: ‖∇_u f‖_* = {gu} exceeds G_U = {}", k.g_u)));
                }
                let xm: Vec<f64> = x.iter().zip(&x2).map(|(a, b)| 0.5 * (a + b)).collect();
                let um: Vec<f64> = u.iter().zip(&u2).map(|(a, b)| 0.5 * (a + b)).collect();
                let ax = k.alpha_x.unwrap_or(0.0);
                let dx = dist2(&x, &x2);
                let lhs = c.value(&xm, &u);
                let rhs = 0.5 * (c.value(&x, &u) + c.value(&x2, &u)) - ax * dx * dx / 8.0;
                if lhs > rhs + tol * (1.0 + rhs.abs()) {
                    return Err(Error::Config(format!("constraint {i}: convexity in x (modulus {ax}) fails on a sampled segment")));
                }
                let au = k.alpha_u.unwrap_or(0.0);
                let du = dist2(&u, &u2);
                let lhs = c.value(&x, &um);
                let rhs = 0.5 * (c.value(&x, &u) + c.value(&x, &u2)) + au * du * du / 8.0;
                if lhs < rhs - tol * (1.0 + rhs.abs()) {
                    return Err(Error::Config(format!("constraint {i}: concavity in u (modulus {au}) fails on a sampled segment")));
                }
                if let Some(l) = k.l_x {
                    let d = self.x_domain.dual_norm(&crate::linalg::sub(&c.grad_x(&x, &u), &c.grad_x(&x2, &u)));
                    if d > l * self.x_domain.norm(&crate::linalg::sub(&x, &x2)) * (1.0 + tol) + tol {
                        return Err(Error::Config(format!("constraint {i}: ∇_x f is not L_X = {l} Lipschitz")));
                    }
                }
                if let Some(l) = k.l_u {
                    let d = us.dual_norm(&crate::linalg::sub(&c.grad_u(&x, &u), &c.grad_u(&x, &u2)));
                    if d > l * us.norm(&crate::linalg::sub(&u, &u2)) * (1.0 + tol) + tol {
                        return Err(Error::Config(format!("constraint {i}: ∇_u f is not L_U = {l} Lipschitz")));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn value(&self, i: usize, x: &[f64], u: &[f64]) -> f64 {
        self.constraints[i].value(x, u)
    }

    /// sup_{u ∈ U^i} f^i(x, u) for every i (certified; exact for the shipped family).
    pub fn robust_values(&self, x: &[f64], oracle: &OfflineOracle) -> Result<Vec<f64>> {
        self.constraints
            .iter()
            .zip(&self.u_domains)
            .map(|(c, us)| Ok(oracle.maximize_concave(&c.neg_u_section(x), us)?.bound))
            .collect()
    }

    /// max_i sup_u f^i(x, u): x is ε-feasible iff this is ≤ ε.
    pub fn robust_violation(&self, x: &[f64], oracle: &OfflineOracle) -> Result<f64> {
        Ok(self.robust_values(x, oracle)?.into_iter().fold(f64::NEG_INFINITY, f64::max))
    }

    pub fn omega_x(&self) -> f64 {
        self.x_domain.set_width()
    }

    pub fn omega_u(&self) -> f64 {
        self.u_domains.iter().map(|s| s.set_width()).fold(0.0, f64::max)
    }
}

/// Lowest index attaining max_i values[i].
pub fn argmax_constraint(instance: &RobustInstance, x: &[f64], us: &[Vec<f64>]) -> usize {
    let vals: Vec<f64> = (0..instance.m).map(|i| instance.value(i, x, &us[i])).collect();
    crate::linalg::argmax(&vals)
}

/// Shape of generated test instances.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilyParams {
    pub m: usize,
    pub n: usize,
    pub dim_u: usize,
    pub radius_x: f64,
    pub radius_u: f64,
    pub alpha_x: f64,
    pub alpha_u: f64,
    /// Entries of A_i are uniform in [−scale, scale].
    pub scale: f64,
    /// Number of extra max-affine pieces in x (0 keeps f smooth in x).
    pub pieces: usize,
}

impl Default for FamilyParams {
    fn default() -> Self {
        FamilyParams { m: 3, n: 5, dim_u: 5, radius_x: 1.0, radius_u: 0.5, alpha_x: 1.0, alpha_u: 1.0, scale: 0.3, pieces: 0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Planted {
    Feasible,
    Infeasible,
}

/// Random instance of the shipped family with valid declared constants,
/// shifted so that its robust status is known.
///
/// Feasible: every constraint's robust value at a random x° equals −margin.
/// Infeasible: with u fixed at c_i and uniform multipliers,
/// min_x (1/m) Σ_i f^i(x, c_i) = margin, so max_i sup_u f^i(x, u) ≥ margin for all x.
pub fn planted_instance<R: Rng + ?Sized>(rng: &mut R, p: &FamilyParams, status: Planted, margin: f64) -> Result<RobustInstance> {
    let x_domain = ProximalSetup::euclidean_ball(p.n, p.radius_x);
    let u_dom = ProximalSetup::euclidean_ball(p.dim_u, p.radius_u);
    let mut constraints = Vec::with_capacity(p.m);
    let (mut op, mut cmax, mut pmax) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..p.m {
        let a: Vec<Vec<f64>> = (0..p.dim_u).map(|_| (0..p.n).map(|_| p.scale * (2.0 * rng.random::<f64>() - 1.0)).collect()).collect();
        op = op.max(Bilinear::new(a.clone()).spectral_norm());
        let c = Domain::ball(p.dim_u, 0.5 * p.radius_u).sample(rng);
        cmax = cmax.max(norm2(&c));
        let pieces: Vec<Affine> = (0..p.pieces)
            .map(|_| Affine::new((0..p.n).map(|_| 0.3 * (2.0 * rng.random::<f64>() - 1.0)).collect(), 0.1 * rng.random::<f64>()))
            .collect();
        pmax = pieces.iter().fold(pmax, |m, q| m.max(norm2(&q.a)));
        constraints.push(Constraint { kind: default_kind(), a, c, b: 0.0, alpha_x: p.alpha_x, alpha_u: p.alpha_u, pieces });
    }
    let smooth_x = p.pieces == 0;
    let constants = RobustConstants {
        g_x: op * p.radius_u + p.alpha_x * p.radius_x + pmax,
        g_u: op * p.radius_x + p.alpha_u * (p.radius_u + cmax),
        alpha_x: (p.alpha_x > 0.0).then_some(p.alpha_x),
        alpha_u: (p.alpha_u > 0.0).then_some(p.alpha_u),
        l_x: smooth_x.then_some(p.alpha_x.max(f64::MIN_POSITIVE)),
        l_u: Some(p.alpha_u.max(f64::MIN_POSITIVE)),
    };
    let mut inst = RobustInstance {
        m: p.m,
        n: p.n,
        x_domain: x_domain.clone(),
        u_domains: vec![u_dom; p.m],
        constraints,
        constants,
    };
    let oracle = OfflineOracle::default();
    match status {
        Planted::Feasible => {
            let x0 = Domain::ball(p.n, 0.5 * p.radius_x).sample(rng);
            let r = inst.robust_values(&x0, &oracle)?;
            for (c, ri) in inst.constraints.iter_mut().zip(r) {
                c.b = -margin - ri;
            }
        }
        Planted::Infeasible => {
            let w = 1.0 / p.m as f64;
            let mut agg = PwQuadratic::zero(p.n);
            for c in &inst.constraints {
                agg.add_scaled(w, &c.x_section(&c.c));
            }
            let q = oracle.minimize_structured(&agg, &x_domain)?;
            if !q.certified {
                return Err(Error::Solver(format!("planted lower bound not certified (gap {:e})", q.gap)));
            }
            for c in inst.constraints.iter_mut() {
                c.b = margin - q.bound;
            }
        }
    }
    Ok(inst)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn planted_statuses_hold() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(4);
        let o = OfflineOracle::default();
        for pieces in [0, 2] {
            let p = FamilyParams { pieces, ..Default::default() };
            let f = planted_instance(&mut rng, &p, Planted::Feasible, 0.1).unwrap();
            f.validate().unwrap();
            let inf = planted_instance(&mut rng, &p, Planted::Infeasible, 0.1).unwrap();
            inf.validate().unwrap();
            for _ in 0..200 {
                let x = inf.x_domain.sample(&mut rng);
                assert!(inf.robust_violation(&x, &o).unwrap() >= 0.1 - 1e-9);
            }
        }
    }

    #[test]
    fn argmax_tie_break() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(5);
        let mut inst = planted_instance(&mut rng, &FamilyParams::default(), Planted::Feasible, 0.1).unwrap();
        let x = vec![0.0; 5];
        let us: Vec<Vec<f64>> = inst.constraints.iter().map(|c| c.c.clone()).collect();
        // Values f^i(0, c_i) = b_i; set them to (0, 3, 3).
        for (c, b) in inst.constraints.iter_mut().zip([0.0, 3.0, 3.0]) {
            c.b = b;
        }
        assert_eq!(argmax_constraint(&inst, &x, &us), 1);
        for c in inst.constraints.iter_mut() {
            c.b = 1.0;
        }
        assert_eq!(argmax_constraint(&inst, &x, &us), 0);
    }

    #[test]
    fn understated_constant_is_rejected() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(6);
        let mut inst = planted_instance(&mut rng, &FamilyParams::default(), Planted::Feasible, 0.1).unwrap();
        inst.constants.g_x *= 0.01;
        assert!(matches!(inst.validate(), Err(Error::Config(_))));
    }
}
