//! Generalized mirror descent and mirror prox.
//!
//! Feeds return ξ_t (and η_t) already multiplied by whatever weight the
//! regime prescribes; the engine never rescales them. Each step records the
//! worst-case residual of its one-step inequality over the whole domain. The
//! inequality is affine in the comparator, so the worst case is attained at a
//! linear maximizer and is computed exactly.

use std::fmt::Write as _;

use crate::error::{check_dim, Error, Result};
use crate::linalg::{dot, sub};
use crate::model::PwQuadratic;
use crate::prox::ProximalSetup;
use crate::schedule::StepSchedule;

/// First-order access to a loss sequence f_1, f_2, ... (t is 1-based).
pub trait LossOracle {
    fn dim(&self) -> usize;
    fn value(&self, t: usize, x: &[f64]) -> f64;
    fn subgradient(&self, t: usize, x: &[f64]) -> Vec<f64>;
    /// Closed structural form of f_t when available; lets the offline
    /// oracle certify comparators exactly.
    fn structure(&self, _t: usize) -> Option<PwQuadratic> {
        None
    }
}

/// First-order access to a convex-concave sequence φ_1, φ_2, ...
pub trait SaddleOracle {
    fn dims(&self) -> (usize, usize);
    fn value(&self, t: usize, x: &[f64], y: &[f64]) -> f64;
    /// F_t(x, y) = [∇_x φ_t; −∇_y φ_t].
    fn operator(&self, t: usize, x: &[f64], y: &[f64]) -> Vec<f64>;
    /// φ_t(·, y) in structural form.
    fn x_section(&self, _t: usize, _y: &[f64]) -> Option<PwQuadratic> {
        None
    }
    /// −φ_t(x, ·) in structural form.
    fn neg_y_section(&self, _t: usize, _x: &[f64]) -> Option<PwQuadratic> {
        None
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    MirrorDescent,
    MirrorProx,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StepRecord {
    pub t: usize,
    pub gamma: f64,
    pub theta: f64,
    /// The point played at step t (z_t).
    pub point: Vec<f64>,
    /// Prox center v_t (mirror prox only).
    pub center: Option<Vec<f64>>,
    pub xi_dual_norm: f64,
    /// Scaled worst-case violation of the one-step inequality; ≤ 0 up to rounding.
    pub residual: f64,
    /// γ²‖ξ − η‖_*² − ‖z − v‖² (mirror prox only).
    pub cancellation: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunTrace {
    pub method: Method,
    pub records: Vec<StepRecord>,
    /// z_{T+1} for mirror descent, v_{T+1} for mirror prox.
    pub last: Vec<f64>,
}

impl RunTrace {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn points(&self) -> Vec<Vec<f64>> {
        self.records.iter().map(|r| r.point.clone()).collect()
    }

    pub fn max_residual(&self) -> f64 {
        self.records.iter().map(|r| r.residual).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn max_cancellation(&self) -> Option<f64> {
        self.records.iter().filter_map(|r| r.cancellation).reduce(f64::max)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,gamma,theta,xi_dual_norm,step_residual\n");
        for r in &self.records {
            let _ = writeln!(s, "{},{},{},{},{}", r.t, r.gamma, r.theta, r.xi_dual_norm, r.residual);
        }
        s
    }

    /// Iterate dump: one row per point, `t,role,coords...`.
    pub fn iterates_csv(&self) -> String {
        let mut s = String::from("t,role,coords\n");
        let row = |s: &mut String, t: usize, role: &str, p: &[f64]| {
            let coords: Vec<String> = p.iter().map(|v| v.to_string()).collect();
            let _ = writeln!(s, "{t},{role},{}", coords.join(","));
        };
        for r in &self.records {
            row(&mut s, r.t, "z", &r.point);
            if let Some(v) = &r.center {
                row(&mut s, r.t, "v", v);
            }
        }
        row(&mut s, self.records.len() + 1, if self.method == Method::MirrorProx { "v" } else { "z" }, &self.last);
        s
    }
}

fn scaled(lhs: f64, terms: &[f64]) -> f64 {
    let rhs: f64 = terms.iter().sum();
    let scale = terms.iter().fold(lhs.abs().max(1.0), |m, v| m.max(v.abs()));
    (lhs - rhs) / scale
}

/// Scaled violation of γ⟨ξ, z − u⟩ ≤ V_z(u) − V_{z⁺}(u) + ½γ²‖ξ‖_*² at comparator u.
pub fn md_inequality(setup: &ProximalSetup, z: &[f64], z_next: &[f64], gamma: f64, xi: &[f64], u: &[f64]) -> Result<f64> {
    let lhs = gamma * dot(xi, &sub(z, u));
    let d = setup.dual_norm(xi);
    Ok(scaled(lhs, &[setup.bregman(z, u)?, -setup.bregman(z_next, u)?, 0.5 * gamma * gamma * d * d]))
}

/// Scaled violation of
/// γ⟨ξ, z − u⟩ ≤ V_v(u) − V_{v⁺}(u) + ½(γ²‖ξ − η‖_*² − ‖z − v‖²) at comparator u.
#[allow(clippy::too_many_arguments)]
pub fn mp_inequality(
    setup: &ProximalSetup,
    v: &[f64],
    z: &[f64],
    v_next: &[f64],
    gamma: f64,
    eta: &[f64],
    xi: &[f64],
    u: &[f64],
) -> Result<f64> {
    let lhs = gamma * dot(xi, &sub(z, u));
    let c = cancellation(setup, v, z, gamma, eta, xi);
    Ok(scaled(lhs, &[setup.bregman(v, u)?, -setup.bregman(v_next, u)?, 0.5 * c]))
}

fn cancellation(setup: &ProximalSetup, v: &[f64], z: &[f64], gamma: f64, eta: &[f64], xi: &[f64]) -> f64 {
    let d = setup.dual_norm(&sub(xi, eta));
    let n = setup.norm(&sub(z, v));
    gamma * gamma * d * d - n * n
}

/// Comparator maximizing the affine-in-u violation: gradient −γξ + ∇ω(c) − ∇ω(c⁺).
fn worst_comparator(setup: &ProximalSetup, c: &[f64], c_next: &[f64], gamma: f64, xi: &[f64]) -> Result<Vec<f64>> {
    let g0 = setup.grad_omega(c)?;
    let g1 = setup.grad_omega(c_next)?;
    let g: Vec<f64> = (0..xi.len()).map(|i| -gamma * xi[i] + g0[i] - g1[i]).collect();
    Ok(setup.linear_max(&g).1)
}

fn check_xi(setup: &ProximalSetup, t: usize, name: &str, xi: &[f64]) -> Result<()> {
    check_dim(setup.dim(), xi.len())?;
    if let Some(i) = xi.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite(format!("{name}_{t}[{i}] = {} returned by the feed", xi[i])));
    }
    Ok(())
}

/// Incremental mirror descent: z_1 = ω-center, z_{t+1} = Prox_{z_t}(γ_t ξ_t).
pub struct MirrorDescent<'a> {
    setup: &'a ProximalSetup,
    z: Vec<f64>,
    records: Vec<StepRecord>,
}

impl<'a> MirrorDescent<'a> {
    pub fn new(setup: &'a ProximalSetup) -> Self {
        MirrorDescent { setup, z: setup.omega_center(), records: Vec::new() }
    }

    /// Current point z_t.
    pub fn point(&self) -> &[f64] {
        &self.z
    }

    /// 1-based index of the current point.
    pub fn t(&self) -> usize {
        self.records.len() + 1
    }

    pub fn step(&mut self, gamma: f64, theta: f64, xi: &[f64]) -> Result<()> {
        let t = self.t();
        check_xi(self.setup, t, "ξ", xi)?;
        let gx: Vec<f64> = xi.iter().map(|v| gamma * v).collect();
        let next = self.setup.prox(&self.z, &gx)?;
        let u = worst_comparator(self.setup, &self.z, &next, gamma, xi)?;
        let residual = md_inequality(self.setup, &self.z, &next, gamma, xi, &u)?;
        let z = std::mem::replace(&mut self.z, next);
        self.records.push(StepRecord {
            t,
            gamma,
            theta,
            point: z,
            center: None,
            xi_dual_norm: self.setup.dual_norm(xi),
            residual,
            cancellation: None,
        });
        Ok(())
    }

    pub fn finish(self) -> RunTrace {
        RunTrace { method: Method::MirrorDescent, records: self.records, last: self.z }
    }
}

/// Incremental mirror prox: z_t = Prox_{v_t}(γ_t η_t), v_{t+1} = Prox_{v_t}(γ_t ξ_t).
pub struct MirrorProx<'a> {
    setup: &'a ProximalSetup,
    v: Vec<f64>,
    pending: Option<(f64, f64, Vec<f64>, Vec<f64>)>,
    records: Vec<StepRecord>,
}

impl<'a> MirrorProx<'a> {
    pub fn new(setup: &'a ProximalSetup) -> Self {
        MirrorProx { setup, v: setup.omega_center(), pending: None, records: Vec::new() }
    }

    /// Current prox center v_t.
    pub fn center(&self) -> &[f64] {
        &self.v
    }

    pub fn t(&self) -> usize {
        self.records.len() + 1
    }

    /// Lookahead z_t from η_t (evaluated at v_t).
    pub fn lookahead(&mut self, gamma: f64, theta: f64, eta: &[f64]) -> Result<&[f64]> {
        let t = self.t();
        if self.pending.is_some() {
            return Err(Error::InformationFlow(format!("second lookahead at step {t} before the update")));
        }
        check_xi(self.setup, t, "η", eta)?;
        let ge: Vec<f64> = eta.iter().map(|v| gamma * v).collect();
        let z = self.setup.prox(&self.v, &ge)?;
        self.pending = Some((gamma, theta, eta.to_vec(), z));
        Ok(&self.pending.as_ref().unwrap().3)
    }

    /// The point z_t produced by the last lookahead.
    pub fn point(&self) -> Option<&[f64]> {
        self.pending.as_ref().map(|p| p.3.as_slice())
    }

    /// v_{t+1} from ξ_t (evaluated at z_t).
    pub fn update(&mut self, xi: &[f64]) -> Result<()> {
        let t = self.t();
        let (gamma, theta, eta, z) = self
            .pending
            .take()
            .ok_or_else(|| Error::InformationFlow(format!("update at step {t} without a lookahead")))?;
        check_xi(self.setup, t, "ξ", xi)?;
        let gx: Vec<f64> = xi.iter().map(|v| gamma * v).collect();
        let next = self.setup.prox(&self.v, &gx)?;
        let u = worst_comparator(self.setup, &self.v, &next, gamma, xi)?;
        let residual = mp_inequality(self.setup, &self.v, &z, &next, gamma, &eta, xi, &u)?;
        let canc = cancellation(self.setup, &self.v, &z, gamma, &eta, xi);
        let v = std::mem::replace(&mut self.v, next);
        self.records.push(StepRecord {
            t,
            gamma,
            theta,
            point: z,
            center: Some(v),
            xi_dual_norm: self.setup.dual_norm(xi),
            residual,
            cancellation: Some(canc),
        });
        Ok(())
    }

    pub fn finish(self) -> RunTrace {
        RunTrace { method: Method::MirrorProx, records: self.records, last: self.v }
    }
}

/// Runs mirror descent for the schedule's horizon. `feed(t, z_t)` returns ξ_t.
pub fn mirror_descent<F>(setup: &ProximalSetup, steps: &StepSchedule, mut feed: F) -> Result<RunTrace>
where
    F: FnMut(usize, &[f64]) -> Result<Vec<f64>>,
{
    let mut md = MirrorDescent::new(setup);
    for t in 1..=steps.horizon() {
        let xi = feed(t, md.point())?;
        md.step(steps.gamma(t), steps.theta(t), &xi)?;
    }
    Ok(md.finish())
}

/// Runs mirror prox. `feed_eta(t, v_t)` is queried before z_t exists;
/// `feed_xi(t, z_t)` afterwards.
pub fn mirror_prox<E, X>(setup: &ProximalSetup, steps: &StepSchedule, mut feed_eta: E, mut feed_xi: X) -> Result<RunTrace>
where
    E: FnMut(usize, &[f64]) -> Result<Vec<f64>>,
    X: FnMut(usize, &[f64]) -> Result<Vec<f64>>,
{
    let mut mp = MirrorProx::new(setup);
    for t in 1..=steps.horizon() {
        let eta = feed_eta(t, mp.center())?;
        let z = mp.lookahead(steps.gamma(t), steps.theta(t), &eta)?.to_vec();
        let xi = feed_xi(t, &z)?;
        mp.update(&xi)?;
    }
    Ok(mp.finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schedule::{StepKind, StepParams, WeightSchedule};

    #[test]
    fn zero_feed_stays_at_center() {
        let s = ProximalSetup::entropy_simplex(4);
        let steps = StepSchedule::custom(vec![0.3; 10], &WeightSchedule::uniform(10)).unwrap();
        let tr = mirror_descent(&s, &steps, |_, _| Ok(vec![0.0; 4])).unwrap();
        assert!(tr.records.iter().all(|r| r.point == s.omega_center()));
        let tr = mirror_prox(&s, &steps, |_, _| Ok(vec![0.0; 4]), |_, _| Ok(vec![0.0; 4])).unwrap();
        assert!(tr.records.iter().all(|r| r.point == s.omega_center() && r.center.as_deref() == Some(&s.omega_center()[..])));
    }

    #[test]
    fn euclidean_md_is_projected_gradient_descent() {
        let s = ProximalSetup::euclidean_ball(3, 1.0);
        let c = [2.0, -0.5, 0.3];
        let steps = StepSchedule::custom(vec![0.4; 25], &WeightSchedule::uniform(25)).unwrap();
        let tr = mirror_descent(&s, &steps, |_, x| Ok(sub(x, &c))).unwrap();
        let mut x = vec![0.0; 3];
        for r in &tr.records {
            assert!(crate::linalg::dist2(&r.point, &x) < 1e-15);
            let y: Vec<f64> = (0..3).map(|i| x[i] - 0.4 * (x[i] - c[i])).collect();
            let n = crate::linalg::norm2(&y);
            x = if n > 1.0 { y.iter().map(|v| v / n).collect() } else { y };
        }
    }

    #[test]
    fn non_finite_feed_aborts() {
        let s = ProximalSetup::euclidean_ball(2, 1.0);
        let steps = StepSchedule::custom(vec![0.1; 5], &WeightSchedule::uniform(5)).unwrap();
        let e = mirror_descent(&s, &steps, |t, _| Ok(if t == 3 { vec![f64::INFINITY, 0.0] } else { vec![1.0, 0.0] }))
            .unwrap_err();
        assert!(matches!(e, Error::NonFinite(ref m) if m.contains("ξ_3")));
    }

    #[test]
    fn mp_on_static_quadratic_converges_at_one_over_t() {
        // f(x) = ½ Σ h_i (x_i − c_i)², minimum 0 inside the ball.
        let h = [1.0, 4.0];
        let c = [0.3, -0.2];
        let s = ProximalSetup::euclidean_ball(2, 1.0);
        let grad = |x: &[f64]| vec![h[0] * (x[0] - c[0]), h[1] * (x[1] - c[1])];
        let f = |x: &[f64]| 0.5 * (h[0] * (x[0] - c[0]).powi(2) + h[1] * (x[1] - c[1]).powi(2));
        let mut gaps = Vec::new();
        for horizon in [50, 100] {
            let w = WeightSchedule::uniform(horizon);
            let steps = StepSchedule::new(StepKind::ConstantSmooth, StepParams::smooth(4.0), &w).unwrap();
            // Unweighted gradients with γ = 1/L: scale the schedule back by θ.
            let steps = StepSchedule::custom(steps.gammas().iter().map(|g| g / horizon as f64).collect(), &w).unwrap();
            let tr = mirror_prox(&s, &steps, |_, v| Ok(grad(v)), |_, z| Ok(grad(z))).unwrap();
            let avg = crate::linalg::weighted_average(&tr.points(), w.values());
            gaps.push(f(&avg));
            // Bound Ω L / T with Ω the distance term from the start.
            assert!(f(&avg) <= 0.5 * crate::linalg::dot(&c, &c) * 4.0 / horizon as f64 + 1e-12);
        }
        assert!(gaps[1] <= gaps[0]);
    }
}
