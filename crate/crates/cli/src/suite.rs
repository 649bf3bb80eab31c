//! The invariant suite behind `verify` and the acceptance target.

use std::fmt::Write as _;
use std::time::Instant;

use ocokit::engine::{md_inequality, mp_inequality, MirrorDescent, MirrorProx};
use ocokit::experiment::{run_oco, OcoRegime};
use ocokit::jeo::{self, Estimator, StreamSpec};
use ocokit::oracle::reference_prox;
use ocokit::regret::Regime;
use ocokit::robust::{self, FamilyParams, FeasibilityConfig, Outcome, Planted, Scheme};
use ocokit::streams::{self, OcoInstance};
use ocokit::{LossOracle, OfflineOracle, ProximalSetup};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub id: usize,
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
    pub seconds: f64,
    pub limit_seconds: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub seed: u64,
    pub checks: Vec<Check>,
    pub trace_hash: String,
}

impl SuiteReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

/// Accumulates everything the runs produce into one digest.
pub struct TraceHasher(Sha256);

impl TraceHasher {
    fn new() -> Self {
        TraceHasher(Sha256::new())
    }
    fn str(&mut self, s: &str) {
        self.0.update(s.as_bytes());
    }
    fn nums(&mut self, v: &[f64]) {
        for x in v {
            self.0.update(x.to_le_bytes());
        }
    }
    fn finish(self) -> String {
        self.0.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }
}

type CheckResult = anyhow::Result<(bool, String)>;

struct Criterion {
    id: usize,
    name: &'static str,
    limit: Option<f64>,
    run: fn(u64, &mut TraceHasher) -> CheckResult,
}

const CRITERIA: [Criterion; 10] = [
    Criterion { id: 1, name: "per-step mirror descent inequality", limit: Some(10.0), run: md_steps },
    Criterion { id: 2, name: "per-step mirror prox inequality", limit: Some(10.0), run: mp_steps },
    Criterion { id: 3, name: "nonsmooth regret bound and rate", limit: Some(30.0), run: nonsmooth_rate },
    Criterion { id: 4, name: "strongly convex regret bound and rate", limit: Some(30.0), run: strongly_convex_rate },
    Criterion { id: 5, name: "smooth / saddle bounds with one lookahead", limit: Some(30.0), run: smooth_bounds },
    Criterion { id: 6, name: "online saddle-point gap identity", limit: None, run: sp_identity },
    Criterion { id: 7, name: "robust verdict soundness", limit: Some(120.0), run: robust_soundness },
    Criterion { id: 8, name: "robust certificate rate", limit: None, run: robust_rate },
    Criterion { id: 9, name: "joint estimation-optimization bounds", limit: Some(60.0), run: jeo_bounds },
    Criterion { id: 10, name: "prox against reference solver", limit: None, run: prox_reference },
];

pub fn criterion_names() -> Vec<(usize, &'static str)> {
    CRITERIA.iter().map(|c| (c.id, c.name)).collect()
}

/// Runs every check; `on_check` sees each result as it finishes.
pub fn run_suite(seed: u64, mut on_check: impl FnMut(&Check)) -> SuiteReport {
    let mut h = TraceHasher::new();
    let mut checks = Vec::new();
    for c in &CRITERIA {
        let start = Instant::now();
        let res = (c.run)(seed, &mut h);
        let seconds = start.elapsed().as_secs_f64();
        let (mut pass, mut detail) = match res {
            Ok(v) => v,
            Err(e) => (false, format!("error: {e:#}")),
        };
        if let Some(l) = c.limit {
            if seconds > l {
                pass = false;
                let _ = write!(detail, "; took {seconds:.1}s, limit {l}s");
            }
        }
        let check = Check { id: c.id, name: c.name, pass, detail, seconds, limit_seconds: c.limit };
        on_check(&check);
        checks.push(check);
    }
    SuiteReport { seed, checks, trace_hash: h.finish() }
}

fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

fn domains() -> [ProximalSetup; 2] {
    [ProximalSetup::entropy_simplex(10), ProximalSetup::euclidean_ball(10, 1.0)]
}

fn md_steps(seed: u64, h: &mut TraceHasher) -> CheckResult {
    let mut worst = f64::NEG_INFINITY;
    for run in 0..20u64 {
        let mut r = rng(seed, 100 + run);
        let setup = &domains()[(run % 2) as usize];
        let inst = if run % 2 == 0 { streams::max_affine_simplex(&mut r, 10, 4, 200) } else { streams::strongly_convex_quadratics(&mut r, 10, 200, 1.0, 1.0) };
        let stream = inst.stream().unwrap();
        let gamma = r.random_range(0.05..1.0);
        let mut md = MirrorDescent::new(setup);
        for t in 1..=200 {
            let z = md.point().to_vec();
            let xi = stream.subgradient(t, &z);
            md.step(gamma, 1.0 / 200.0, &xi)?;
            for _ in 0..20 {
                let u = setup.sample(&mut r);
                worst = worst.max(md_inequality(setup, &z, md.point(), gamma, &xi, &u)?);
            }
        }
        let tr = md.finish();
        worst = worst.max(tr.max_residual());
        h.str(&tr.to_csv());
    }
    Ok((worst <= 1e-8, format!("max scaled residual {worst:.3e} over 20 runs × 200 steps")))
}

fn mp_steps(seed: u64, h: &mut TraceHasher) -> CheckResult {
    let mut worst = f64::NEG_INFINITY;
    for run in 0..20u64 {
        let mut r = rng(seed, 200 + run);
        let setup = &domains()[(run % 2) as usize];
        let inst = if run % 2 == 0 { streams::max_affine_simplex(&mut r, 10, 4, 200) } else { streams::smooth_quadratics(&mut r, 10, 200, 2.0, 1.0) };
        let stream = inst.stream().unwrap();
        let gamma = r.random_range(0.05..1.0);
        let mut mp = MirrorProx::new(setup);
        for t in 1..=200 {
            let v = mp.center().to_vec();
            let eta = stream.subgradient(t, &v);
            let z = mp.lookahead(gamma, 1.0 / 200.0, &eta)?.to_vec();
            let xi = stream.subgradient(t, &z);
            mp.update(&xi)?;
            for _ in 0..20 {
                let u = setup.sample(&mut r);
                worst = worst.max(mp_inequality(setup, &v, &z, mp.center(), gamma, &eta, &xi, &u)?);
            }
        }
        let tr = mp.finish();
        worst = worst.max(tr.max_residual());
        h.str(&tr.to_csv());
    }
    Ok((worst <= 1e-8, format!("max scaled residual {worst:.3e} over 20 runs × 200 steps")))
}

/// Realized regret and bound per horizon, plus the mean ratio between consecutive horizons.
fn rate_runs(
    seed: u64,
    stream_id: u64,
    h: &mut TraceHasher,
    regime: OcoRegime,
    horizons: &[usize],
    seeds: u64,
    make: impl Fn(&mut ChaCha8Rng, usize) -> OcoInstance,
) -> anyhow::Result<(bool, Vec<f64>, f64)> {
    let o = OfflineOracle::default();
    let mut all_within = true;
    let mut ratios = vec![0.0; horizons.len() - 1];
    let mut worst_slack = f64::INFINITY;
    for s in 0..seeds {
        let mut r = rng(seed, stream_id + s);
        let inst = make(&mut r, *horizons.last().unwrap());
        let mut prev = None;
        for (k, &t) in horizons.iter().enumerate() {
            let run = run_oco(&inst, regime, t, None, &o)?;
            all_within &= run.within_bound(1e-6);
            worst_slack = worst_slack.min(run.bound() - run.report.realized);
            h.str(&run.trace.to_csv());
            h.nums(&[run.report.realized]);
            if let Some(p) = prev {
                ratios[k - 1] += run.report.realized / p / seeds as f64;
            }
            prev = Some(run.report.realized);
        }
    }
    Ok((all_within, ratios, worst_slack))
}

fn nonsmooth_rate(seed: u64, h: &mut TraceHasher) -> CheckResult {
    let (ok, ratios, slack) = rate_runs(seed, 300, h, OcoRegime::Nonsmooth, &[64, 256, 1024], 5, |r, t| streams::max_affine_simplex(r, 10, 5, t))?;
    let pass = ok && ratios.iter().all(|q| *q <= 0.75);
    Ok((pass, format!("all within bound: {ok} (min slack {slack:.3e}); mean regret(4T)/regret(T) = {ratios:.3?}")))
}

fn strongly_convex_rate(seed: u64, h: &mut TraceHasher) -> CheckResult {
    let (ok, ratios, slack) =
        rate_runs(seed, 400, h, OcoRegime::StronglyConvex, &[64, 128, 256, 512], 5, |r, t| streams::strongly_convex_quadratics(r, 5, t, 1.0, 1.0))?;
    let pass = ok && ratios.iter().all(|q| *q <= 0.75);
    Ok((pass, format!("all within bound: {ok} (min slack {slack:.3e}); mean regret(2T)/regret(T) = {ratios:.3?}")))
}

fn smooth_bounds(seed: u64, h: &mut TraceHasher) -> CheckResult {
    let o = OfflineOracle::default();
    let (mut within, mut canc, mut slack) = (true, f64::NEG_INFINITY, f64::INFINITY);
    for k in 0..10u64 {
        let mut r = rng(seed, 500 + k);
        let (inst, regime) = if k % 2 == 0 {
            (streams::smooth_quadratics(&mut r, 6, 256, 2.0, 1.0), OcoRegime::Smooth)
        } else {
            (streams::sign_games(&mut r, 4, 5, 256), OcoRegime::SaddleSmooth)
        };
        for t in [64, 256] {
            let run = run_oco(&inst, regime, t, None, &o)?;
            within &= run.within_bound(1e-6);
            slack = slack.min(run.bound() - run.report.realized);
            canc = canc.max(run.trace.max_cancellation().unwrap_or(f64::NEG_INFINITY));
            h.str(&run.trace.to_csv());
        }
    }
    Ok((within && canc <= 1e-8, format!("all within ΩL·supθ: {within} (min slack {slack:.3e}); max cancellation term {canc:.3e}")))
}

fn sp_identity(seed: u64, h: &mut TraceHasher) -> CheckResult {
    let o = OfflineOracle::default();
    let mut worst = 0.0f64;
    for k in 0..20u64 {
        let mut r = rng(seed, 600 + k);
        let inst = streams::sign_games(&mut r, 3 + (k % 3) as usize, 4, 50);
        let regime = if k % 2 == 0 { OcoRegime::SaddleNonsmooth } else { OcoRegime::SaddleSmooth };
        let run = run_oco(&inst, regime, 100, None, &o)?;
        let c = run.report.components.as_ref().expect("saddle components");
        worst = worst.max((run.report.realized - (c.x_regret + c.y_regret)).abs());
        h.nums(&[run.report.realized, c.x_regret, c.y_regret]);
    }
    Ok((worst <= 1e-10, format!("max |gap − (x-regret + y-regret)| = {worst:.3e} over 20 games")))
}

/// Robust runs use ε = 0.1 and a planted margin of 1.5ε.
const RO_EPS: f64 = 0.1;
const RO_SCHEMES: [Scheme; 3] = [Scheme::StrongStrong, Scheme::StrongUSmoothX, Scheme::SmoothUStrongX];

fn robust_soundness(seed: u64, h: &mut TraceHasher) -> CheckResult {
    let o = OfflineOracle::default();
    let (mut wrong, mut inconclusive, mut nonconforming, mut runs) = (0, 0, 0, 0);
    let mut worst_excess = f64::NEG_INFINITY;
    for (status, want, stream) in [(Planted::Feasible, Outcome::Feasible, 700), (Planted::Infeasible, Outcome::Infeasible, 800)] {
        for k in 0..50u64 {
            let mut r = rng(seed, stream + k);
            let inst = robust::planted_instance(&mut r, &FamilyParams::default(), status, 1.5 * RO_EPS)?;
            for scheme in RO_SCHEMES {
                let cfg = FeasibilityConfig { eps: RO_EPS, tau: 0.5, scheme, double_on_inconclusive: false, ..Default::default() };
                let run = robust::run_scheme(&inst, &cfg, &o)?.run;
                runs += 1;
                match run.verdict.outcome {
                    got if got == want => {}
                    Outcome::Inconclusive => inconclusive += 1,
                    _ => wrong += 1,
                }
                let excess = (run.circ.value - run.bounds.circ).max(run.bullet.value - run.bullet_bound());
                worst_excess = worst_excess.max(excess);
                if excess > 1e-6 {
                    nonconforming += 1;
                }
                h.nums(&[run.horizon as f64, run.circ.value, run.bullet.value, run.max_term]);
            }
        }
    }
    let pass = wrong == 0 && nonconforming == 0;
    Ok((
        pass,
        format!(
            "{runs} runs: {wrong} wrong, {inconclusive} inconclusive, {nonconforming} certificates above bound (max excess {worst_excess:.3e})"
        ),
    ))
}

fn robust_rate(seed: u64, h: &mut TraceHasher) -> CheckResult {
    let o = OfflineOracle::default();
    let mean = |scheme: Scheme, h: &mut TraceHasher| -> anyhow::Result<f64> {
        let mut sum = 0.0;
        for k in 0..10u64 {
            let mut r = rng(seed, 900 + k);
            let inst = robust::planted_instance(&mut r, &FamilyParams::default(), Planted::Infeasible, RO_EPS)?;
            let cfg = FeasibilityConfig { eps: RO_EPS, scheme, ..Default::default() };
            let a = robust::run_once(&inst, &cfg, 200, &o)?.certificate_sum();
            let b = robust::run_once(&inst, &cfg, 400, &o)?.certificate_sum();
            h.nums(&[a, b]);
            sum += b / a;
        }
        Ok(sum / 10.0)
    };
    let strong = mean(Scheme::StrongStrong, h)?;
    let base = mean(Scheme::BaselineNonsmooth, h)?;
    Ok(((0.4..=0.6).contains(&strong), format!("mean (ε∘+ε•)(2T)/(ε∘+ε•)(T): strong-strong {strong:.3}, baseline {base:.3}")))
}

fn jeo_bounds(seed: u64, h: &mut TraceHasher) -> CheckResult {
    let o = OfflineOracle::default();
    let mut min_slack = f64::INFINITY;
    let mut sc_ok = true;
    let mut runs = 0;
    for k in 0..6u64 {
        let mut r = rng(seed, 1000 + k);
        let cases = [
            (jeo::squared_distance_instance(&mut r, 5, 1.0, 1.0), Regime::StronglyConvex),
            (jeo::squared_distance_instance(&mut r, 5, 1.0, 1.0), Regime::Smooth),
            (jeo::l1_instance(&mut r, 5, 1.0), Regime::Nonsmooth),
            (jeo::max_affine_strong_instance(&mut r, 5, 6, 0.5, 1.0), Regime::StronglyConvex),
        ];
        for (inst, regime) in cases {
            let n = inst.objective.dim_u();
            let spec = StreamSpec::FromG {
                h: (0..n).map(|i| 1.0 + 9.0 * i as f64 / (n - 1) as f64).collect(),
                center: inst.u_star.clone().unwrap(),
                u0: inst.data_domain().sample(&mut r),
                step: None,
            };
            let run = jeo::run_jeo(&inst, &mut Estimator::new(spec)?, regime, 300, &o)?;
            let d = run.decomposition.as_ref().unwrap();
            min_slack = min_slack.min(d.slack);
            if regime == Regime::StronglyConvex {
                sc_ok &= run.regret <= run.regret_bound + 1e-6;
            }
            runs += 1;
            h.str(&run.trace_csv());
        }
    }
    let mut decay_ok = true;
    let mut worst_ratio = 0.0f64;
    for t in [50usize, 100, 200, 400] {
        let mut r = rng(seed, 1100 + t as u64);
        let inst = jeo::squared_distance_instance(&mut r, 5, 1.0, 1.0);
        let mut dir = vec![0.0; 5];
        dir[0] = 1.0;
        let mut est = Estimator::new(StreamSpec::LinearDecay { target: inst.u_star.clone().unwrap(), c: 1.0, beta: 0.9, direction: dir })?;
        let cpp = jeo::increasing_decay_constant(est.decay()?.unwrap());
        let run = jeo::run_jeo(&inst, &mut est, Regime::StronglyConvex, t, &o)?;
        let s = run.decomposition.as_ref().unwrap().decay_sum;
        worst_ratio = worst_ratio.max(s * (t * t) as f64 / cpp);
        decay_ok &= s <= cpp / (t * t) as f64;
        sc_ok &= run.regret <= run.regret_bound + 1e-6;
        h.str(&run.trace_csv());
    }
    let slack_ok = min_slack >= -2.0 * o.accuracy;
    Ok((
        slack_ok && sc_ok && decay_ok,
        format!(
            "{runs} runs, min gap-bound slack {min_slack:.3e}; surrogate regret within 2G²/(α(T+1)): {sc_ok}; max penalty-sum·T²/C'' = {worst_ratio:.3}"
        ),
    ))
}

fn prox_reference(seed: u64, h: &mut TraceHasher) -> CheckResult {
    let mut worst = [0.0f64; 2];
    for (k, setup) in [ProximalSetup::entropy_simplex(8), ProximalSetup::euclidean_ball(8, 1.0)].iter().enumerate() {
        let mut r = rng(seed, 1200 + k as u64);
        for _ in 0..200 {
            let xi0: Vec<f64> = (0..8).map(|_| r.random_range(-3.0..3.0)).collect();
            let z = setup.prox(&setup.omega_center(), &xi0)?;
            let scale = 10f64.powf(r.random_range(-2.0..1.0));
            let xi: Vec<f64> = (0..8).map(|_| scale * r.random_range(-1.0..1.0)).collect();
            let p = setup.prox(&z, &xi)?;
            let rf = reference_prox(setup, &z, &xi)?;
            let d = p.iter().zip(&rf.point).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max) + rf.dist_bound;
            worst[k] = worst[k].max(d);
            h.nums(&p);
        }
    }
    Ok((
        worst.iter().all(|w| *w <= 1e-8),
        format!("max ℓ∞ distance to the certified argmin: entropy {:.3e}, euclidean {:.3e}", worst[0], worst[1]),
    ))
}
