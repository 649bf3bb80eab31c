//! Joint estimation-optimization: minimize f(·, u*) while u* is only seen
//! through an estimator stream u_1, u_2, ... advanced in lockstep.

mod objective;
mod stream;

use serde::Serialize;

pub use objective::{l1_instance, max_affine_strong_instance, squared_distance_instance, DataPiece, JeoConstants, JeoInstance, JeoObjective};
pub use stream::{increasing_decay_constant, sum_t_beta_t, uniform_decay_constant, weighted_decay_sum, Decay, Estimator, StreamSpec};

use crate::engine::{MirrorDescent, MirrorProx, RunTrace};
use crate::error::{check_dim, Error, Result};
use crate::linalg::{dist2, dot, sub, weighted_average};
use crate::oracle::OfflineOracle;
use crate::prox::ProximalSetup;
use crate::regret::{theoretical_bound, Regime};
use crate::schedule::{StepKind, StepParams, StepSchedule, WeightSchedule};

/// One row of the per-step trace.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct JeoRow {
    pub t: usize,
    pub u_dist: Option<f64>,
    pub gap_partial: Option<f64>,
    pub regret_partial: f64,
}

/// Terms of the gap bound: gap ≤ regret + eval_penalty + data_penalty.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GapDecomposition {
    /// min f(·, u*) (certified upper value).
    pub opt: f64,
    pub opt_gap: f64,
    /// |f(x̄, u_T) − min f(·, u*)|, worst case over the certified interval.
    pub gap: f64,
    pub regret: f64,
    /// |f(x̄, u_T) − f(x̄, u*)|.
    pub eval_penalty: f64,
    /// D Σθ_t ‖∇_x f(x_t, u_t) − ∇_x f(x_t, u*)‖_*.
    pub data_penalty: f64,
    /// Σθ_t ‖u_t − u*‖.
    pub decay_sum: f64,
    /// regret + penalties − gap.
    pub slack: f64,
    /// G_fU ‖u_T − u*‖ when G_fU is declared.
    pub eval_penalty_bound: Option<f64>,
    /// D L_fU Σθ_t ‖u_t − u*‖ when L_fU is declared.
    pub data_penalty_bound: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct JeoRun {
    pub regime: Regime,
    pub horizon: usize,
    pub weights: WeightSchedule,
    pub xs: Vec<Vec<f64>>,
    pub us: Vec<Vec<f64>>,
    pub x_bar: Vec<f64>,
    /// f(x̄, u_T), the value the method reports.
    pub value: f64,
    /// Weighted regret of the surrogates q_t(x) = ⟨∇_x f(x_t, u_t), x⟩ + α V_{x_t}(x).
    pub regret: f64,
    pub regret_bound: f64,
    pub rows: Vec<JeoRow>,
    pub decomposition: Option<GapDecomposition>,
    #[serde(skip)]
    pub trace: RunTrace,
}

impl JeoRun {
    /// CSV with columns t,u_dist,gap_partial,regret_partial (empty cells when u* is unknown).
    pub fn trace_csv(&self) -> String {
        let opt = |v: Option<f64>| v.map(|x| format!("{x:.12e}")).unwrap_or_default();
        let mut s = String::from("t,u_dist,gap_partial,regret_partial\n");
        for r in &self.rows {
            s.push_str(&format!("{},{},{},{:.12e}\n", r.t, opt(r.u_dist), opt(r.gap_partial), r.regret_partial));
        }
        s
    }
}

/// Running sums that give the exact prefix regret of the q_t in O(n) per step.
struct QAccumulator {
    alpha: f64,
    mass: f64,
    lin: Vec<f64>,
    constant: f64,
    played: f64,
}

impl QAccumulator {
    fn new(n: usize, alpha: f64) -> Self {
        QAccumulator { alpha, mass: 0.0, lin: vec![0.0; n], constant: 0.0, played: 0.0 }
    }

    fn push(&mut self, setup: &ProximalSetup, theta: f64, x: &[f64], g: &[f64]) -> Result<()> {
        // θ q_t(x) = θ⟨g, x⟩ + θα(ω(x) − ω(x_t) − ⟨∇ω(x_t), x − x_t⟩)
        self.mass += theta;
        self.played += theta * dot(g, x);
        for i in 0..x.len() {
            self.lin[i] += theta * g[i];
        }
        if self.alpha > 0.0 {
            let gw = setup.grad_omega(x)?;
            for i in 0..x.len() {
                self.lin[i] -= theta * self.alpha * gw[i];
            }
            self.constant += theta * self.alpha * (dot(&gw, x) - setup.omega(x));
        }
        Ok(())
    }

    /// (Σθ q_s(x_s) − min_x Σθ q_s(x)) / Σθ over the steps pushed so far.
    fn regret(&self, setup: &ProximalSetup) -> Result<f64> {
        let inf = if self.alpha > 0.0 {
            let a = self.alpha * self.mass;
            let w: Vec<f64> = self.lin.iter().map(|v| v / a).collect();
            let x = setup.mirror_argmin(&w)?;
            dot(&self.lin, &x) + a * setup.omega(&x) + self.constant
        } else {
            setup.linear_min(&self.lin).0 + self.constant
        };
        Ok((self.played - inf) / self.mass)
    }
}

fn weights_for(regime: Regime, horizon: usize) -> Result<WeightSchedule> {
    match regime {
        Regime::StronglyConvex => WeightSchedule::new(crate::schedule::WeightKind::Increasing, horizon),
        _ => WeightSchedule::new(crate::schedule::WeightKind::Uniform, horizon),
    }
}

/// Runs the chosen regime for `horizon` steps, pulling one estimate per step.
pub fn run_jeo(inst: &JeoInstance, est: &mut Estimator, regime: Regime, horizon: usize, oracle: &OfflineOracle) -> Result<JeoRun> {
    inst.validate()?;
    let setup = &inst.setup;
    let k = inst.constants;
    let w = weights_for(regime, horizon)?;
    let omega = setup.set_width();
    let (params, kind, alpha) = match regime {
        Regime::Nonsmooth => (StepParams::nonsmooth(omega, k.g_fx), StepKind::ConstantNonsmooth, 0.0),
        Regime::Smooth => {
            let l = k.l_fx.ok_or_else(|| Error::missing("L_fX", "the smooth JEO regime"))?;
            (StepParams { omega: Some(omega), ..StepParams::smooth(l) }, StepKind::ConstantSmooth, 0.0)
        }
        Regime::StronglyConvex => {
            let a = k.alpha_fx.ok_or_else(|| Error::missing("alpha_fX", "the strongly convex JEO regime"))?;
            (StepParams { g: Some(k.g_fx), ..StepParams::strongly_convex(a) }, StepKind::InverseLinear, a)
        }
    };
    let steps = StepSchedule::new(kind, params, &w)?;
    let regret_bound = theoretical_bound(regime, &params, &w)?;

    let f = &inst.objective;
    let n = setup.dim();
    let mut xs = Vec::with_capacity(horizon);
    let mut us = Vec::with_capacity(horizon);
    let mut grads = Vec::with_capacity(horizon);
    let mut md = MirrorDescent::new(setup);
    let mut mp = MirrorProx::new(setup);
    for t in 1..=horizon {
        let (gamma, theta) = (steps.gamma(t), steps.theta(t));
        let u = est.next()?.to_vec();
        check_dim(f.dim_u(), u.len()).map_err(|e| Error::Stream(format!("u_{t}: {e}")))?;
        let (x, g) = match regime {
            Regime::Nonsmooth | Regime::StronglyConvex => {
                let x = md.point().to_vec();
                let g = f.grad_x(&x, &u);
                let xi: Vec<f64> = if regime == Regime::Nonsmooth { g.iter().map(|v| theta * v).collect() } else { g.clone() };
                md.step(gamma, theta, &xi)?;
                (x, g)
            }
            Regime::Smooth => {
                let eta: Vec<f64> = f.grad_x(mp.center(), &u).iter().map(|v| theta * v).collect();
                let z = mp.lookahead(gamma, theta, &eta)?.to_vec();
                let g = f.grad_x(&z, &u);
                mp.update(&g.iter().map(|v| theta * v).collect::<Vec<_>>())?;
                (z, g)
            }
        };
        xs.push(x);
        us.push(u);
        grads.push(g);
    }
    let trace = if regime == Regime::Smooth { mp.finish() } else { md.finish() };

    let opt = match &inst.u_star {
        Some(us_) => Some(inst.minimize_at(us_, oracle)?),
        None => None,
    };
    let th = w.values();
    let mut acc = QAccumulator::new(n, alpha);
    let mut xsum = vec![0.0; n];
    let mut rows = Vec::with_capacity(horizon);
    for t in 0..horizon {
        acc.push(setup, th[t], &xs[t], &grads[t])?;
        for i in 0..n {
            xsum[i] += th[t] * xs[t][i];
        }
        let (u_dist, gap_partial) = match (&inst.u_star, &opt) {
            (Some(ustar), Some(c)) => {
                let xb: Vec<f64> = xsum.iter().map(|v| v / acc.mass).collect();
                let fv = f.value(&xb, &us[t]);
                (Some(dist2(&us[t], ustar)), Some((fv - c.value).abs().max((fv - c.bound).abs())))
            }
            _ => (None, None),
        };
        rows.push(JeoRow { t: t + 1, u_dist, gap_partial, regret_partial: acc.regret(setup)? });
    }
    let regret = rows.last().map_or(0.0, |r| r.regret_partial);
    let x_bar = weighted_average(&xs, th);
    let value = f.value(&x_bar, &us[horizon - 1]);

    let decomposition = match (&inst.u_star, opt) {
        (Some(ustar), Some(c)) => {
            let d = inst.diameter();
            let eval_penalty = (value - f.value(&x_bar, ustar)).abs();
            let data_penalty = d * (0..horizon)
                .map(|t| th[t] * setup.dual_norm(&sub(&grads[t], &f.grad_x(&xs[t], ustar))))
                .sum::<f64>();
            let dists: Vec<f64> = us.iter().map(|u| dist2(u, ustar)).collect();
            let decay_sum = weighted_decay_sum(th, &dists);
            let gap = (value - c.value).abs().max((value - c.bound).abs());
            let dd = inst.data_domain();
            let u_last = dd.norm(&sub(&us[horizon - 1], ustar));
            let data_norm_sum: f64 = (0..horizon).map(|t| th[t] * dd.norm(&sub(&us[t], ustar))).sum();
            Some(GapDecomposition {
                opt: c.value,
                opt_gap: c.gap,
                gap,
                regret,
                eval_penalty,
                data_penalty,
                decay_sum,
                slack: regret + eval_penalty + data_penalty - gap,
                eval_penalty_bound: k.g_fu.map(|g| g * u_last),
                data_penalty_bound: k.l_fu.map(|l| d * l * data_norm_sum),
            })
        }
        _ => None,
    };

    Ok(JeoRun { regime, horizon, weights: w, xs, us, x_bar, value, regret, regret_bound, rows, decomposition, trace })
}

/// Two-stage baseline: estimate for K steps, then solve min f(·, u_K) once.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SequentialBaseline {
    pub k: usize,
    pub x_hat: Vec<f64>,
    /// f(x̂, u*) − min f(·, u*) (upper estimate).
    pub gap: f64,
}

pub fn sequential_baseline(inst: &JeoInstance, est: &mut Estimator, k: usize, oracle: &OfflineOracle) -> Result<SequentialBaseline> {
    inst.validate()?;
    let ustar = inst.u_star.as_ref().ok_or_else(|| Error::missing("u_star", "the sequential baseline"))?;
    if k == 0 {
        return Err(Error::InvalidParameter("the baseline needs at least one estimate".into()));
    }
    let mut u = Vec::new();
    for _ in 0..k {
        u = est.next()?.to_vec();
    }
    let x_hat = inst.minimize_at(&u, oracle)?.point;
    let opt = inst.minimize_at(ustar, oracle)?;
    Ok(SequentialBaseline { k, gap: inst.objective.value(&x_hat, ustar) - opt.bound, x_hat })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn gd_stream(inst: &JeoInstance, seed: u64) -> Estimator {
        let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
        let n = inst.objective.dim_u();
        let center = inst.u_star.clone().unwrap();
        let u0 = inst.setup.sample(&mut rng);
        Estimator::new(StreamSpec::FromG { h: (1..=n).map(|i| i as f64).collect(), center, u0, step: None }).unwrap()
    }

    #[test]
    fn constant_stream_has_no_penalties() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(1);
        let inst = squared_distance_instance(&mut rng, 3, 1.0, 1.0);
        let mut est = Estimator::new(StreamSpec::Constant { u: inst.u_star.clone().unwrap() }).unwrap();
        let run = run_jeo(&inst, &mut est, Regime::StronglyConvex, 50, &OfflineOracle::default()).unwrap();
        let d = run.decomposition.unwrap();
        assert_eq!(d.eval_penalty, 0.0);
        assert_eq!(d.data_penalty, 0.0);
        assert!(d.slack >= -1e-9);
    }

    #[test]
    fn single_step_regret_by_hand() {
        // X = [−1, 1] ball, f = ½(x − u)², u = 1, one nonsmooth step from x_1 = 0.
        let inst = JeoInstance {
            setup: ProximalSetup::euclidean_ball(1, 1.0),
            data_setup: None,
            objective: JeoObjective::SquaredDistance { h: vec![1.0] },
            u_star: Some(vec![1.0]),
            constants: JeoConstants { g_fx: 2.0, ..Default::default() },
        };
        let mut est = Estimator::new(StreamSpec::Constant { u: vec![1.0] }).unwrap();
        let run = run_jeo(&inst, &mut est, Regime::Nonsmooth, 1, &OfflineOracle::default()).unwrap();
        // gradient −1 at 0, linear regret 0 − (−1) = 1.
        assert!((run.regret - 1.0).abs() < 1e-15);
        assert!((run.regret_bound - 2.0f64.sqrt() * 0.5f64.sqrt() * 2.0).abs() < 1e-12);
    }

    #[test]
    fn strongly_convex_surrogate_regret_by_hand() {
        // Two steps with increasing weights θ = (1/3, 2/3) on f = ½(x − u)², α = 1, X = [−1, 1].
        let inst = JeoInstance {
            setup: ProximalSetup::euclidean_ball(1, 1.0),
            data_setup: None,
            objective: JeoObjective::SquaredDistance { h: vec![1.0] },
            u_star: Some(vec![0.5]),
            constants: JeoConstants { g_fx: 2.0, alpha_fx: Some(1.0), ..Default::default() },
        };
        let mut est = Estimator::new(StreamSpec::Constant { u: vec![0.5] }).unwrap();
        let run = run_jeo(&inst, &mut est, Regime::StronglyConvex, 2, &OfflineOracle::default()).unwrap();
        // x_1 = 0, g_1 = −½; x_2 = 0 − 1·(−½) = ½, g_2 = 0.
        // Σθ q_t(x) = −x/6 + x²/6 + (x − ½)²/3, minimized at ½ with value −1/24; played value 0.
        assert!((run.xs[1][0] - 0.5).abs() < 1e-15);
        assert!((run.regret - 1.0 / 24.0).abs() < 1e-12, "{}", run.regret);
        assert!((run.regret_bound - 8.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn gap_decomposition_holds_across_regimes() {
        let oracle = OfflineOracle::default();
        for seed in 0..4 {
            let mut rng = rand::rngs::StdRng::seed_from_u64(100 + seed);
            let cases = [
                (squared_distance_instance(&mut rng, 4, 1.0, 1.0), Regime::StronglyConvex),
                (squared_distance_instance(&mut rng, 4, 1.0, 1.0), Regime::Smooth),
                (l1_instance(&mut rng, 4, 1.0), Regime::Nonsmooth),
                (max_affine_strong_instance(&mut rng, 4, 5, 0.5, 1.0), Regime::StronglyConvex),
            ];
            for (inst, regime) in cases {
                let mut est = gd_stream(&inst, seed);
                let run = run_jeo(&inst, &mut est, regime, 200, &oracle).unwrap();
                let d = run.decomposition.as_ref().unwrap();
                assert!(d.slack >= -2.0 * oracle.accuracy, "{regime:?}: slack {}", d.slack);
                assert!(run.regret <= run.regret_bound + 1e-6, "{regime:?}: {} > {}", run.regret, run.regret_bound);
                if let Some(b) = d.data_penalty_bound {
                    assert!(d.data_penalty <= b * (1.0 + 1e-9) + 1e-12);
                }
                if let Some(b) = d.eval_penalty_bound {
                    assert!(d.eval_penalty <= b * (1.0 + 1e-9) + 1e-12);
                }
            }
        }
    }

    #[test]
    fn decay_sum_under_increasing_weights() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(7);
        let inst = squared_distance_instance(&mut rng, 3, 1.0, 1.0);
        let dir = vec![1.0, 0.0, 0.0];
        let spec = StreamSpec::LinearDecay { target: inst.u_star.clone().unwrap(), c: 0.5, beta: 0.9, direction: dir };
        for t in [10usize, 100, 400] {
            let mut est = Estimator::new(spec.clone()).unwrap();
            let cpp = increasing_decay_constant(est.decay().unwrap().unwrap());
            let run = run_jeo(&inst, &mut est, Regime::StronglyConvex, t, &OfflineOracle::default()).unwrap();
            let d = run.decomposition.unwrap();
            assert!(d.decay_sum <= cpp / (t * t) as f64);
        }
    }

    #[test]
    fn joint_beats_sequential_with_short_estimation() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(8);
        let inst = squared_distance_instance(&mut rng, 3, 1.0, 1.0);
        let oracle = OfflineOracle::default();
        let mut est = gd_stream(&inst, 1);
        let base = sequential_baseline(&inst, &mut est, 2, &oracle).unwrap();
        let mut est = gd_stream(&inst, 1);
        let run = run_jeo(&inst, &mut est, Regime::StronglyConvex, 400, &oracle).unwrap();
        let joint = inst.objective.value(&run.x_bar, inst.u_star.as_ref().unwrap()) - run.decomposition.unwrap().opt;
        assert!(joint < base.gap, "{joint} vs {}", base.gap);
    }

    #[test]
    fn trace_has_expected_columns() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(9);
        let mut inst = l1_instance(&mut rng, 2, 1.0);
        let mut est = gd_stream(&inst, 2);
        let csv = run_jeo(&inst, &mut est, Regime::Nonsmooth, 5, &OfflineOracle::default()).unwrap().trace_csv();
        assert!(csv.starts_with("t,u_dist,gap_partial,regret_partial\n"));
        assert_eq!(csv.lines().count(), 6);
        inst.u_star = None;
        let mut est = Estimator::new(StreamSpec::Constant { u: vec![0.0, 0.0] }).unwrap();
        let run = run_jeo(&inst, &mut est, Regime::Nonsmooth, 3, &OfflineOracle::default()).unwrap();
        assert!(run.decomposition.is_none());
        assert!(run.trace_csv().lines().nth(1).unwrap().starts_with("1,,,"));
    }
}
