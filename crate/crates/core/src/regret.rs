//! Weighted regret, weighted online saddle-point gap, and the theoretical
//! bounds they are compared against.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::engine::{LossOracle, SaddleOracle};
use crate::error::{check_dim, Error, Result};
use crate::model::PwQuadratic;
use crate::oracle::{Certified, FnObjective, OfflineOracle};
use crate::prox::ProximalSetup;
use crate::schedule::{positive, StepParams, WeightSchedule};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    /// Lipschitz losses, constant steps: √(2Ω sup θ_t² G² T).
    Nonsmooth,
    /// α-strongly convex losses, γ_t = 2/(α(t+1)), increasing weights: 2G²/(α(T+1)).
    StronglyConvex,
    /// L-smooth losses with one lookahead: Ω L sup θ_t.
    Smooth,
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Regime::Nonsmooth => "nonsmooth",
            Regime::StronglyConvex => "strongly-convex",
            Regime::Smooth => "smooth",
        })
    }
}

impl std::str::FromStr for Regime {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "nonsmooth" => Ok(Regime::Nonsmooth),
            "strongly-convex" => Ok(Regime::StronglyConvex),
            "smooth" => Ok(Regime::Smooth),
            _ => Err(Error::Config(format!("unknown regime `{s}` (nonsmooth | strongly-convex | smooth)"))),
        }
    }
}

pub fn theoretical_bound(regime: Regime, params: &StepParams, weights: &WeightSchedule) -> Result<f64> {
    let t = weights.horizon() as f64;
    let sup = weights.sup();
    Ok(match regime {
        Regime::Nonsmooth => {
            let omega = positive(params.omega, "omega", "the nonsmooth bound")?;
            let g = positive(params.g, "G", "the nonsmooth bound")?;
            (2.0 * omega * sup * sup * g * g * t).sqrt()
        }
        Regime::StronglyConvex => {
            let g = positive(params.g, "G", "the strongly convex bound")?;
            let alpha = positive(params.alpha, "alpha", "the strongly convex bound")?;
            2.0 * g * g / (alpha * (t + 1.0))
        }
        Regime::Smooth => {
            let omega = positive(params.omega, "omega", "the smooth bound")?;
            let l = positive(params.l, "L", "the smooth bound")?;
            omega * l * sup
        }
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpComponents {
    pub x_regret: f64,
    pub y_regret: f64,
    pub x_comparator: Vec<f64>,
    pub y_comparator: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RegretReport {
    /// Weighted regret (or SP gap) against the returned comparator.
    pub realized: f64,
    pub bound: Option<f64>,
    pub comparator: Vec<f64>,
    pub components: Option<SpComponents>,
    /// Certified suboptimality of the comparator; the true regret lies in
    /// [realized, realized + oracle_gap].
    pub oracle_gap: f64,
    pub certified: bool,
}

impl RegretReport {
    pub fn with_bound(mut self, bound: f64) -> Self {
        self.bound = Some(bound);
        self
    }

    pub fn slack(&self) -> Option<f64> {
        self.bound.map(|b| b - self.realized)
    }

    /// Conservative (largest possible) true regret.
    pub fn upper(&self) -> f64 {
        self.realized + self.oracle_gap
    }

    pub fn comparator_hash(&self) -> String {
        let mut h = Sha256::new();
        for v in &self.comparator {
            h.update(v.to_le_bytes());
        }
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }

    /// `{realized, bound, slack, comparator_hash}`.
    pub fn summary_json(&self) -> serde_json::Value {
        serde_json::json!({
            "realized": self.realized,
            "bound": self.bound,
            "slack": self.slack(),
            "comparator_hash": self.comparator_hash(),
        })
    }
}

/// Σ θ_t f_t(x_t) − inf_x Σ θ_t f_t(x).
pub fn weighted_regret(
    oracle: &dyn LossOracle,
    points: &[Vec<f64>],
    weights: &WeightSchedule,
    setup: &ProximalSetup,
    solver: &OfflineOracle,
) -> Result<RegretReport> {
    check_dim(weights.horizon(), points.len())?;
    let w = weights.values();
    let played: f64 = points.iter().enumerate().map(|(i, x)| w[i] * oracle.value(i + 1, x)).sum();
    let c = solver.minimize_weighted_sum(oracle, w, setup)?;
    Ok(RegretReport {
        realized: played - c.value,
        bound: None,
        comparator: c.point,
        components: None,
        oracle_gap: c.gap,
        certified: c.certified,
    })
}

fn sum_sections(
    n: usize,
    w: &[f64],
    mut section: impl FnMut(usize) -> Option<PwQuadratic>,
) -> Option<PwQuadratic> {
    let mut acc = PwQuadratic::zero(n);
    for (i, wt) in w.iter().enumerate() {
        if *wt != 0.0 {
            acc.add_scaled(*wt, &section(i + 1)?);
        }
    }
    Some(acc)
}

/// sup_y Σ θ_t φ_t(x_t, y) − inf_x Σ θ_t φ_t(x, y_t), split into the two
/// players' weighted regrets.
pub fn online_sp_gap(
    oracle: &dyn SaddleOracle,
    xs: &[Vec<f64>],
    ys: &[Vec<f64>],
    weights: &WeightSchedule,
    setup_x: &ProximalSetup,
    setup_y: &ProximalSetup,
    solver: &OfflineOracle,
) -> Result<RegretReport> {
    check_dim(weights.horizon(), xs.len())?;
    check_dim(weights.horizon(), ys.len())?;
    let (nx, ny) = oracle.dims();
    let w = weights.values();
    let played: f64 = (0..xs.len()).map(|i| w[i] * oracle.value(i + 1, &xs[i], &ys[i])).sum();

    let inf_x: Certified = match sum_sections(nx, w, |t| oracle.x_section(t, &ys[t - 1])) {
        Some(f) => solver.minimize_structured(&f, setup_x)?,
        None => {
            let value = |x: &[f64]| (0..ys.len()).map(|i| w[i] * oracle.value(i + 1, x, &ys[i])).sum::<f64>();
            let grad = |x: &[f64]| {
                let mut g = vec![0.0; nx];
                for i in 0..ys.len() {
                    crate::linalg::axpy(&mut g, w[i], &oracle.operator(i + 1, x, &ys[i])[..nx]);
                }
                g
            };
            solver.minimize(&FnObjective { dim: nx, value, subgradient: grad }, setup_x)?
        }
    };
    let sup_y: Certified = match sum_sections(ny, w, |t| oracle.neg_y_section(t, &xs[t - 1])) {
        Some(f) => solver.maximize_concave(&f, setup_y)?,
        None => {
            let value = |y: &[f64]| -(0..xs.len()).map(|i| w[i] * oracle.value(i + 1, &xs[i], y)).sum::<f64>();
            let grad = |y: &[f64]| {
                let mut g = vec![0.0; ny];
                for i in 0..xs.len() {
                    // −∇_y φ is the second block of F.
                    crate::linalg::axpy(&mut g, w[i], &oracle.operator(i + 1, &xs[i], y)[nx..]);
                }
                g
            };
            solver.maximize_concave(&FnObjective { dim: ny, value, subgradient: grad }, setup_y)?
        }
    };
    let x_regret = played - inf_x.value;
    let y_regret = sup_y.value - played;
    let mut comparator = inf_x.point.clone();
    comparator.extend(&sup_y.point);
    Ok(RegretReport {
        realized: sup_y.value - inf_x.value,
        bound: None,
        comparator,
        components: Some(SpComponents { x_regret, y_regret, x_comparator: inf_x.point, y_comparator: sup_y.point }),
        oracle_gap: inf_x.gap + sup_y.gap,
        certified: inf_x.certified && sup_y.certified,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Bilinear;
    use crate::streams::{FunctionStream, GameStream};

    #[test]
    fn bound_examples() {
        let p = StepParams { g: Some(1.0), alpha: Some(1.0), ..Default::default() };
        assert!((theoretical_bound(Regime::StronglyConvex, &p, &WeightSchedule::increasing(99)).unwrap() - 0.02).abs() < 1e-15);
        let p = StepParams { omega: Some(1.0), l: Some(5.0), ..Default::default() };
        assert!((theoretical_bound(Regime::Smooth, &p, &WeightSchedule::uniform(10)).unwrap() - 0.5).abs() < 1e-15);
        let p = StepParams::nonsmooth(2f64.ln(), 2.0);
        let b = theoretical_bound(Regime::Nonsmooth, &p, &WeightSchedule::uniform(100)).unwrap();
        // √(2Ω G² T)/T with T = 100.
        assert!((b - (2.0 * 2f64.ln() * 4.0 * 100.0).sqrt() / 100.0).abs() < 1e-15);
        assert!(theoretical_bound(Regime::Smooth, &StepParams::default(), &WeightSchedule::uniform(3)).is_err());
    }

    #[test]
    fn zero_regret_at_common_minimizer() {
        let f = PwQuadratic::separable_distance(vec![1.0, 1.0], &[0.2, 0.1]);
        let s = FunctionStream { functions: vec![f] };
        let setup = ProximalSetup::euclidean_ball(2, 1.0);
        let r = weighted_regret(&s, &vec![vec![0.2, 0.1]; 5], &WeightSchedule::uniform(5), &setup, &OfflineOracle::default()).unwrap();
        assert!(r.realized.abs() < 1e-15);
    }

    #[test]
    fn single_linear_step_on_simplex() {
        let c = vec![0.4, -0.3, 0.9];
        let s = FunctionStream { functions: vec![PwQuadratic::linear(c.clone(), 0.0)] };
        let setup = ProximalSetup::entropy_simplex(3);
        let x1 = setup.omega_center();
        let r = weighted_regret(&s, &[x1.clone()], &WeightSchedule::uniform(1), &setup, &OfflineOracle::default()).unwrap();
        let expect = crate::linalg::dot(&c, &x1) + 0.3;
        assert!((r.realized - expect).abs() < 1e-15);
    }

    #[test]
    fn sp_examples() {
        let a = vec![vec![1.0, -2.0], vec![0.5, 3.0], vec![-1.0, 0.0]];
        let g = GameStream { games: vec![Bilinear::new(a.clone())] };
        let sx = ProximalSetup::entropy_simplex(3);
        let sy = ProximalSetup::entropy_simplex(2);
        let (x1, y1) = (vec![0.2, 0.5, 0.3], vec![0.6, 0.4]);
        let r = online_sp_gap(&g, &[x1.clone()], &[y1.clone()], &WeightSchedule::uniform(1), &sx, &sy, &OfflineOracle::default())
            .unwrap();
        let xa = crate::linalg::matvec_t(&a, &x1);
        let ay = crate::linalg::matvec(&a, &y1);
        let expect = xa.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - ay.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!((r.realized - expect).abs() < 1e-14);
        let c = r.components.unwrap();
        assert!((c.x_regret + c.y_regret - r.realized).abs() < 1e-14);
    }

    #[test]
    fn comparator_hash_is_stable_hex() {
        let r = RegretReport { realized: 0.0, bound: Some(1.0), comparator: vec![0.5, 0.5], components: None, oracle_gap: 0.0, certified: true };
        let h = r.comparator_hash();
        assert_eq!(h.len(), 64);
        assert_eq!(h, r.comparator_hash());
        assert_eq!(r.summary_json()["slack"], 1.0);
    }
}
