//! Offline reference solvers with certified optimality gaps.
//!
//! Structured objectives ([`PwQuadratic`]) are handled exactly when smooth
//! and through a conic reformulation otherwise. The conic solver only
//! proposes candidates: the reported gap is always recomputed here from a
//! feasible primal point and a Lagrangian lower bound, so a wrong or
//! inaccurate solve can only make the certificate weaker, never invalid.

mod conic;
mod grid;
mod reference;
mod subgradient;

use serde::Serialize;

pub use grid::grid_minimize;
pub use reference::{reference_prox, ReferenceProx};

use crate::engine::LossOracle;
use crate::error::{check_dim, Error, Result};
use crate::model::{Affine, Bilinear, PwQuadratic};
use crate::prox::{Domain, ProximalSetup};
use crate::prox::bisect as bisect_root;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum OracleMethod {
    ClosedForm,
    Conic,
    SubgradientAveraging,
    GridRefine,
}

/// Result of a certified solve. For minimization `bound ≤ opt ≤ value`;
/// for maximization `value ≤ opt ≤ bound`. `gap = |value − bound|`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Certified {
    pub point: Vec<f64>,
    pub value: f64,
    pub bound: f64,
    pub gap: f64,
    pub method: OracleMethod,
    pub certified: bool,
}

/// A convex objective for the offline oracle.
pub trait Objective {
    fn dim(&self) -> usize;
    fn value(&self, x: &[f64]) -> f64;
    fn subgradient(&self, x: &[f64]) -> Vec<f64>;
    fn structure(&self) -> Option<PwQuadratic> {
        None
    }
}

impl Objective for PwQuadratic {
    fn dim(&self) -> usize {
        PwQuadratic::dim(self)
    }
    fn value(&self, x: &[f64]) -> f64 {
        PwQuadratic::value(self, x)
    }
    fn subgradient(&self, x: &[f64]) -> Vec<f64> {
        PwQuadratic::subgradient(self, x)
    }
    fn structure(&self) -> Option<PwQuadratic> {
        Some(self.clone())
    }
}

/// Objective from closures, without structure.
pub struct FnObjective<V, G> {
    pub dim: usize,
    pub value: V,
    pub subgradient: G,
}

impl<V: Fn(&[f64]) -> f64, G: Fn(&[f64]) -> Vec<f64>> Objective for FnObjective<V, G> {
    fn dim(&self) -> usize {
        self.dim
    }
    fn value(&self, x: &[f64]) -> f64 {
        (self.value)(x)
    }
    fn subgradient(&self, x: &[f64]) -> Vec<f64> {
        (self.subgradient)(x)
    }
}

/// Σ_t θ_t f_t for a loss oracle.
pub struct WeightedSum<'a> {
    pub oracle: &'a dyn LossOracle,
    pub weights: &'a [f64],
}

impl Objective for WeightedSum<'_> {
    fn dim(&self) -> usize {
        self.oracle.dim()
    }
    fn value(&self, x: &[f64]) -> f64 {
        self.weights.iter().enumerate().map(|(i, w)| w * self.oracle.value(i + 1, x)).sum()
    }
    fn subgradient(&self, x: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; x.len()];
        for (i, w) in self.weights.iter().enumerate() {
            crate::linalg::axpy(&mut g, *w, &self.oracle.subgradient(i + 1, x));
        }
        g
    }
    fn structure(&self) -> Option<PwQuadratic> {
        let mut acc = PwQuadratic::zero(self.dim());
        for (i, w) in self.weights.iter().enumerate() {
            if *w != 0.0 {
                acc.add_scaled(*w, &self.oracle.structure(i + 1)?);
            }
        }
        Some(acc)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SaddleSolution {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub value: f64,
    /// ε_sad(x, y) = max_y' φ(x, y') − min_x' φ(x', y), computed exactly.
    pub gap: f64,
    pub certified: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OfflineOracle {
    pub accuracy: f64,
    pub max_iter: usize,
}

impl Default for OfflineOracle {
    fn default() -> Self {
        OfflineOracle { accuracy: 1e-9, max_iter: 20_000 }
    }
}

impl OfflineOracle {
    pub fn with_accuracy(accuracy: f64) -> Self {
        OfflineOracle { accuracy, ..Default::default() }
    }

    /// min_{x ∈ X} f(x) with a certified gap.
    pub fn minimize(&self, f: &dyn Objective, setup: &ProximalSetup) -> Result<Certified> {
        check_dim(setup.dim(), f.dim())?;
        match f.structure() {
            Some(s) => self.minimize_structured(&s, setup),
            None => Ok(self.finish(subgradient::minimize(f, setup, self.max_iter))),
        }
    }

    /// inf_{x ∈ X} Σ_t θ_t f_t(x).
    pub fn minimize_weighted_sum(&self, fs: &dyn LossOracle, weights: &[f64], setup: &ProximalSetup) -> Result<Certified> {
        self.minimize(&WeightedSum { oracle: fs, weights }, setup)
    }

    /// sup_{u ∈ U} g(u) for concave g, given as the convex objective `neg_g = −g`.
    pub fn maximize_concave(&self, neg_g: &dyn Objective, setup: &ProximalSetup) -> Result<Certified> {
        let c = self.minimize(neg_g, setup)?;
        Ok(Certified { value: -c.value, bound: -c.bound, ..c })
    }

    pub fn minimize_structured(&self, f: &PwQuadratic, setup: &ProximalSetup) -> Result<Certified> {
        check_dim(setup.dim(), f.dim())?;
        f.validate()?;
        let mut f = f.clone();
        // Fold single-piece terms into the linear part.
        let terms = std::mem::take(&mut f.max_terms);
        for t in terms {
            if t.len() == 1 {
                crate::linalg::axpy(&mut f.lin, 1.0, &t[0].a);
                f.constant += t[0].b;
            } else {
                f.max_terms.push(t);
            }
        }
        if f.max_terms.is_empty() {
            let x = min_diag_quadratic(setup, &f.hess_diag, &f.lin);
            let v = f.value(&x);
            return Ok(self.finish(Certified { point: x, value: v, bound: v, gap: 0.0, method: OracleMethod::ClosedForm, certified: true }));
        }
        let res = match conic::minimize(&f, setup, self.accuracy) {
            Ok(c) => c,
            Err(_) => subgradient::minimize(&f, setup, self.max_iter),
        };
        Ok(self.finish(res))
    }

    fn finish(&self, mut c: Certified) -> Certified {
        c.gap = (c.value - c.bound).abs();
        c.certified = c.gap <= self.accuracy;
        c
    }

    /// Saddle point of a bilinear game over simplex / box domains.
    pub fn solve_saddle(&self, game: &Bilinear, sx: &ProximalSetup, sy: &ProximalSetup) -> Result<SaddleSolution> {
        game.validate()?;
        let (nx, ny) = game.dims();
        check_dim(sx.dim(), nx)?;
        check_dim(sy.dim(), ny)?;
        // max_y φ(x, y) = ⟨b_x, x⟩ + σ_Y(Aᵀx + b_y).
        let cols: Vec<Affine> = (0..ny)
            .map(|j| Affine::new(game.a.iter().map(|r| r[j]).collect(), game.by[j]))
            .collect();
        let mut fx = PwQuadratic::linear(game.bx.clone(), 0.0);
        fx.max_terms = support_terms(sy, &cols)?;
        let cx = self.minimize_structured(&fx, sx)?;
        // −min_x φ(x, y) = −⟨b_y, y⟩ + σ_X(−(A y + b_x)).
        let rows: Vec<Affine> = (0..nx)
            .map(|i| Affine::new(game.a[i].iter().map(|v| -v).collect(), -game.bx[i]))
            .collect();
        let mut fy = PwQuadratic::linear(game.by.iter().map(|v| -v).collect(), 0.0);
        fy.max_terms = support_terms(sx, &rows)?;
        let cy = self.minimize_structured(&fy, sy)?;
        let (x, y) = (cx.point, cy.point);
        let gap = saddle_gap(game, &x, &y, sx, sy);
        Ok(SaddleSolution { value: game.value(&x, &y), certified: gap <= self.accuracy, x, y, gap })
    }
}

/// ε_sad(x, y) for a bilinear game, exact via linear optimization.
pub fn saddle_gap(game: &Bilinear, x: &[f64], y: &[f64], sx: &ProximalSetup, sy: &ProximalSetup) -> f64 {
    let sup_y = sy.linear_max(&game.grad_y(x)).0 + crate::linalg::dot(&game.bx, x);
    let inf_x = sx.linear_min(&game.grad_x(y)).0 + crate::linalg::dot(&game.by, y);
    sup_y - inf_x
}

/// Support function σ_Z(w(·)) of a simplex/box (product) domain, written as
/// max-affine terms in the variable that `rows` (w_j as affine maps) depend on.
fn support_terms(setup: &ProximalSetup, rows: &[Affine]) -> Result<Vec<Vec<Affine>>> {
    let mut terms = Vec::new();
    for (off, d) in setup.blocks() {
        match d {
            Domain::Simplex { dim } => terms.push(rows[off..off + dim].to_vec()),
            Domain::Box { lower, upper } => {
                for j in 0..d.dim() {
                    let r = &rows[off + j];
                    let piece = |s: f64| Affine::new(r.a.iter().map(|v| v * s).collect(), r.b * s);
                    if lower[j] == upper[j] {
                        terms.push(vec![piece(lower[j])]);
                    } else {
                        terms.push(vec![piece(lower[j]), piece(upper[j])]);
                    }
                }
            }
            Domain::Ball { .. } => {
                return Err(Error::Unsupported("saddle solves over Euclidean balls".into()))
            }
        }
    }
    Ok(terms)
}

/// Exact argmin of ½Σ h_i x_i² + ⟨w, x⟩ over a (product) domain.
pub fn min_diag_quadratic(setup: &ProximalSetup, h: &[f64], w: &[f64]) -> Vec<f64> {
    let mut x = vec![0.0; setup.dim()];
    for (off, d) in setup.blocks() {
        let r = off..off + d.dim();
        x[r.clone()].copy_from_slice(&d.min_diag_quadratic(&h[r.clone()], &w[r]));
    }
    x
}

/// Lagrangian lower bound of a structured objective for max-term
/// multipliers `lambda[k]` (each a probability vector over the pieces of
/// term k), together with the inner minimizer.
pub(crate) fn lagrangian_bound(f: &PwQuadratic, setup: &ProximalSetup, lambda: &[Vec<f64>]) -> (f64, Vec<f64>) {
    let mut w = f.lin.clone();
    let mut c = f.constant;
    for (term, lam) in f.max_terms.iter().zip(lambda) {
        for (p, l) in term.iter().zip(lam) {
            if *l != 0.0 {
                crate::linalg::axpy(&mut w, *l, &p.a);
                c += l * p.b;
            }
        }
    }
    let x = min_diag_quadratic(setup, &f.hess_diag, &w);
    let v = c + crate::linalg::dot(&w, &x) + 0.5 * f.hess_diag.iter().zip(&x).map(|(h, xi)| h * xi * xi).sum::<f64>();
    (v, x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn quadratic_with_interior_center_is_closed_form() {
        let s = ProximalSetup::euclidean_ball(3, 2.0);
        let c = [0.3, -0.4, 0.1];
        let r = OfflineOracle::default().minimize(&PwQuadratic::separable_distance(vec![1.0; 3], &c), &s).unwrap();
        assert_eq!(r.method, OracleMethod::ClosedForm);
        assert_eq!(r.gap, 0.0);
        for i in 0..3 {
            assert!((r.point[i] - c[i]).abs() < 1e-15);
        }
    }

    #[test]
    fn linear_over_simplex_picks_vertex() {
        let s = ProximalSetup::entropy_simplex(4);
        let r = OfflineOracle::default().minimize(&PwQuadratic::linear(vec![0.3, -0.2, 0.5, -0.1], 0.0), &s).unwrap();
        assert_eq!(r.point, vec![0.0, 1.0, 0.0, 0.0]);
        assert_eq!(r.value, -0.2);
    }

    #[test]
    fn conic_path_certifies_max_affine_on_simplex() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(7);
        let s = ProximalSetup::entropy_simplex(10);
        let o = OfflineOracle::default();
        for _ in 0..5 {
            let mut f = PwQuadratic::zero(10);
            for _ in 0..40 {
                let pieces = (0..4)
                    .map(|_| Affine::new((0..10).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect(), rng.random::<f64>() - 0.5))
                    .collect();
                f.add_scaled(1.0 / 40.0, &PwQuadratic::max_affine(pieces));
            }
            let r = o.minimize(&f, &s).unwrap();
            assert!(r.certified, "gap {}", r.gap);
            assert_eq!(r.method, OracleMethod::Conic);
            for _ in 0..100 {
                let z = s.sample(&mut rng);
                assert!(f.value(&z) >= r.value - r.gap - 1e-12);
            }
        }
    }

    #[test]
    fn ball_and_box_conic_paths() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(11);
        let o = OfflineOracle::default();
        let setups = [
            ProximalSetup::euclidean_ball(5, 1.5),
            ProximalSetup::euclidean(Domain::Box { lower: vec![-1.0; 5], upper: vec![0.5; 5] }),
        ];
        for s in &setups {
            let mut f = PwQuadratic::separable_distance((0..5).map(|_| rng.random::<f64>()).collect(), &[0.4; 5]);
            for _ in 0..10 {
                let pieces = (0..3)
                    .map(|_| Affine::new((0..5).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect(), rng.random::<f64>()))
                    .collect();
                f.add_scaled(0.1, &PwQuadratic::max_affine(pieces));
            }
            let r = o.minimize(&f, s).unwrap();
            assert!(r.certified, "gap {}", r.gap);
            assert!(s.contains(&r.point, 1e-12));
        }
    }

    #[test]
    fn concave_max_over_ball_is_radial() {
        let s = ProximalSetup::euclidean_ball(3, 2.0);
        let xi = [1.0, -2.0, 2.0];
        let r = OfflineOracle::default()
            .maximize_concave(&PwQuadratic::linear(xi.iter().map(|v| -v).collect(), 0.0), &s)
            .unwrap();
        for i in 0..3 {
            assert!((r.point[i] - 2.0 * xi[i] / 3.0).abs() < 1e-15);
        }
        assert!((r.value - 6.0).abs() < 1e-14);
    }

    #[test]
    fn saddle_examples() {
        let o = OfflineOracle::default();
        let pennies = Bilinear::new(vec![vec![1.0, -1.0], vec![-1.0, 1.0]]);
        let s2 = ProximalSetup::entropy_simplex(2);
        let r = o.solve_saddle(&pennies, &s2, &s2).unwrap();
        assert!(r.certified && r.value.abs() < 1e-9);
        assert!((r.x[0] - 0.5).abs() < 1e-8 && (r.y[0] - 0.5).abs() < 1e-8);

        let sq = ProximalSetup::euclidean(Domain::Box { lower: vec![-1.0], upper: vec![1.0] });
        let r = o.solve_saddle(&Bilinear::new(vec![vec![1.0]]), &sq, &sq).unwrap();
        assert!(r.certified && r.x[0].abs() < 1e-9 && r.y[0].abs() < 1e-9);
    }
}
