use serde::Serialize;

use super::certificates::{eps_bullet, eps_bullet_y, eps_circ, max_term, BulletCertificate, CircCertificate};
use super::instance::{argmax_constraint, RobustInstance};
use super::{verdict, FeasibilityConfig, Outcome, Scheme, Verdict};
use crate::engine::{MirrorDescent, MirrorProx, RunTrace};
use crate::error::{Error, Result};
use crate::linalg::{axpy, weighted_average};
use crate::oracle::OfflineOracle;
use crate::prox::ProximalSetup;
use crate::schedule::WeightSchedule;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Player {
    X,
    U,
}

/// Records which iterate each player may see while producing its own.
///
/// A read is described by the reader, the 1-based index of the iterate it
/// is producing, the source player and the timestamp of the data read.
#[derive(Clone, Debug)]
pub struct InfoFlow {
    scheme: Scheme,
    published: [usize; 2],
    pub reads: usize,
}

impl InfoFlow {
    pub fn new(scheme: Scheme) -> Self {
        InfoFlow { scheme, published: [0, 0], reads: 0 }
    }

    fn slot(p: Player) -> usize {
        match p {
            Player::X => 0,
            Player::U => 1,
        }
    }

    pub fn publish(&mut self, p: Player, t: usize) {
        self.published[Self::slot(p)] = t;
    }

    /// Latest stamp of `source` that `reader` may use while producing iterate `target`.
    pub fn allowed(&self, reader: Player, target: usize, source: Player) -> usize {
        use Player::*;
        match (self.scheme, reader, source) {
            (Scheme::StrongUSmoothX, X, U) | (Scheme::SmoothUStrongX, U, X) => target,
            _ => target - 1,
        }
    }

    pub fn read(&mut self, reader: Player, target: usize, source: Player, stamp: usize) -> Result<()> {
        self.reads += 1;
        if stamp > self.published[Self::slot(source)] {
            return Err(Error::InformationFlow(format!(
                "{reader:?}_{target} read {source:?}_{stamp} before it was produced"
            )));
        }
        let allowed = self.allowed(reader, target, source);
        if stamp > allowed {
            return Err(Error::InformationFlow(format!(
                "{reader:?}_{target} read {source:?}_{stamp} but the {} scheme allows stamps ≤ {allowed}",
                self.scheme
            )));
        }
        Ok(())
    }
}

/// Step-size constants derived from the declared structure.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SchemeBounds {
    pub circ: f64,
    pub bullet: f64,
    /// For the smoothX scheme: the x bound with the published smoothness formula.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bullet_stated: Option<f64>,
}

/// Joint smoothness of φ(x, y) = Σ_i y_i f^i(x, u^i) in the hybrid X × Δ_m norm.
///
/// Largest eigenvalue of [[2Ω_X L_X, 2G_X√(Ω_X ln m)], [2G_X√(Ω_X ln m), 0]].
pub fn hybrid_smoothness(omega_x: f64, l_x: f64, g_x: f64, m: usize) -> f64 {
    let c = omega_x * l_x;
    c + (c * c + 4.0 * g_x * g_x * omega_x * (m as f64).ln()).sqrt()
}

/// The stated (smaller) formula L_X Ω_X + 2G_X√(Ω_X ln m).
pub fn hybrid_smoothness_stated(omega_x: f64, l_x: f64, g_x: f64, m: usize) -> f64 {
    l_x * omega_x + 2.0 * g_x * (omega_x * (m as f64).ln()).sqrt()
}

fn need(v: Option<f64>, name: &'static str, scheme: Scheme) -> Result<f64> {
    match v {
        Some(x) if x > 0.0 && x.is_finite() => Ok(x),
        Some(x) => Err(Error::Config(format!("{name} = {x} must be positive for the {scheme} scheme"))),
        None => Err(Error::Config(format!("the {scheme} scheme needs the structure constant {name}"))),
    }
}

pub(crate) fn weights_for(scheme: Scheme, horizon: usize) -> WeightSchedule {
    match scheme {
        Scheme::BaselineNonsmooth => WeightSchedule::uniform(horizon),
        _ => WeightSchedule::increasing(horizon),
    }
}

/// Theoretical bounds on (ε∘, ε•) for a horizon.
pub fn scheme_bounds(inst: &RobustInstance, scheme: Scheme, horizon: usize) -> Result<SchemeBounds> {
    let k = &inst.constants;
    let t = horizon as f64;
    let w = weights_for(scheme, horizon);
    let sup = w.sup();
    let (ox, ou) = (inst.omega_x(), inst.omega_u());
    let strong = |g: f64, a: f64| 2.0 * g * g / (a * (t + 1.0));
    let nonsmooth = |o: f64, g: f64| (2.0 * o * sup * sup * g * g * t).sqrt();
    Ok(match scheme {
        Scheme::StrongStrong => SchemeBounds {
            circ: strong(k.g_u, need(k.alpha_u, "alpha_U", scheme)?),
            bullet: strong(k.g_x, need(k.alpha_x, "alpha_X", scheme)?),
            bullet_stated: None,
        },
        Scheme::StrongUSmoothX => {
            let lx = need(k.l_x, "L_X", scheme)?;
            SchemeBounds {
                circ: strong(k.g_u, need(k.alpha_u, "alpha_U", scheme)?),
                bullet: hybrid_smoothness(ox, lx, k.g_x, inst.m) * sup,
                bullet_stated: Some(hybrid_smoothness_stated(ox, lx, k.g_x, inst.m) * sup),
            }
        }
        Scheme::SmoothUStrongX => SchemeBounds {
            circ: ou * need(k.l_u, "L_U", scheme)? * sup,
            bullet: strong(k.g_x, need(k.alpha_x, "alpha_X", scheme)?),
            bullet_stated: None,
        },
        Scheme::BaselineNonsmooth => SchemeBounds { circ: nonsmooth(ou, k.g_u), bullet: nonsmooth(ox, k.g_x), bullet_stated: None },
        Scheme::SmoothUSmoothX => return Err(forbidden()),
    })
}

fn forbidden() -> Error {
    Error::Config(
        "mirror prox on both players is not allowed: each player's lookahead would need the other's current iterate".into(),
    )
}

/// Rejects bad parameters, the forbidden pairing and missing constants.
pub fn validate_config(inst: &RobustInstance, cfg: &FeasibilityConfig) -> Result<()> {
    if !(cfg.eps > 0.0 && cfg.eps.is_finite()) {
        return Err(Error::Config(format!("eps = {} must be positive", cfg.eps)));
    }
    if !(cfg.tau > 0.0 && cfg.tau < 1.0) {
        return Err(Error::Config(format!("tau = {} must lie in (0, 1)", cfg.tau)));
    }
    if cfg.horizon == Some(0) {
        return Err(Error::Config("horizon must be positive".into()));
    }
    if cfg.scheme == Scheme::SmoothUSmoothX {
        return Err(forbidden());
    }
    if cfg.scheme == Scheme::StrongUSmoothX && inst.m < 2 {
        return Err(Error::Config("the strongU-smoothX scheme needs m ≥ 2 constraints".into()));
    }
    scheme_bounds(inst, cfg.scheme, 1).map(|_| ())
}

/// Smallest T whose bounds fit the budgets τε (ε∘) and (1 − τ)ε (ε•).
pub fn required_horizon(inst: &RobustInstance, cfg: &FeasibilityConfig) -> Result<usize> {
    validate_config(inst, cfg)?;
    let ok = |t: usize| -> Result<bool> {
        let b = scheme_bounds(inst, cfg.scheme, t)?;
        Ok(b.circ <= cfg.tau * cfg.eps && b.bullet <= (1.0 - cfg.tau) * cfg.eps)
    };
    let cap = cfg.max_total_iterations;
    let mut hi = 1usize;
    while !ok(hi)? {
        if hi >= cap {
            return Err(Error::Config(format!("no horizon ≤ {cap} meets eps = {} with the declared constants", cfg.eps)));
        }
        hi = (hi * 2).min(cap);
    }
    let mut lo = hi / 2;
    // ok(lo) is false (or lo = 0).
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if ok(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// One run of a scheme at a fixed horizon.
#[derive(Clone, Debug, Serialize)]
pub struct SchemeRun {
    pub scheme: Scheme,
    pub horizon: usize,
    #[serde(skip)]
    pub weights: WeightSchedule,
    #[serde(skip)]
    pub xs: Vec<Vec<f64>>,
    /// us[t][i] = u_{t+1}^i.
    #[serde(skip)]
    pub us: Vec<Vec<Vec<f64>>>,
    #[serde(skip)]
    pub ys: Option<Vec<Vec<f64>>>,
    #[serde(skip)]
    pub x_trace: RunTrace,
    #[serde(skip)]
    pub u_traces: Vec<RunTrace>,
    pub circ: CircCertificate,
    pub bullet: BulletCertificate,
    pub max_term: f64,
    pub bounds: SchemeBounds,
    pub verdict: Verdict,
    pub flow_reads: usize,
}

impl SchemeRun {
    /// ε∘ + ε• as realized.
    pub fn certificate_sum(&self) -> f64 {
        self.circ.value + self.bullet.value
    }

    /// The x bound checked for conformance (the stated formula where it differs).
    pub fn bullet_bound(&self) -> f64 {
        self.bounds.bullet_stated.unwrap_or(self.bounds.bullet)
    }
}

/// Runs the scheme for `horizon` iterations and evaluates its certificates.
pub fn run_once(inst: &RobustInstance, cfg: &FeasibilityConfig, horizon: usize, oracle: &OfflineOracle) -> Result<SchemeRun> {
    validate_config(inst, cfg)?;
    let scheme = cfg.scheme;
    let w = weights_for(scheme, horizon);
    let k = inst.constants;
    let mut flow = InfoFlow::new(scheme);
    let (mut xs, mut us, mut ys) = (Vec::with_capacity(horizon), Vec::with_capacity(horizon), Vec::new());
    let m = inst.m;
    let sup = w.sup();
    let (x_trace, u_traces) = match scheme {
        Scheme::StrongStrong | Scheme::BaselineNonsmooth => {
            let (gx, gu, scale): (Box<dyn Fn(usize) -> f64>, Box<dyn Fn(usize) -> f64>, bool) = if scheme == Scheme::StrongStrong {
                let (ax, au) = (k.alpha_x.unwrap(), k.alpha_u.unwrap());
                (Box::new(move |t| 2.0 / (ax * (t as f64 + 1.0))), Box::new(move |t| 2.0 / (au * (t as f64 + 1.0))), false)
            } else {
                let n = horizon as f64;
                let gx = (2.0 * inst.omega_x() / (sup * sup * k.g_x * k.g_x * n)).sqrt();
                let gu = (2.0 * inst.omega_u() / (sup * sup * k.g_u * k.g_u * n)).sqrt();
                (Box::new(move |_| gx), Box::new(move |_| gu), true)
            };
            let mut xmd = MirrorDescent::new(&inst.x_domain);
            let mut umd: Vec<MirrorDescent> = inst.u_domains.iter().map(MirrorDescent::new).collect();
            for t in 1..=horizon {
                let th = w.theta(t);
                let s = if scale { th } else { 1.0 };
                let x = xmd.point().to_vec();
                flow.publish(Player::X, t);
                let u: Vec<Vec<f64>> = umd.iter().map(|d| d.point().to_vec()).collect();
                flow.publish(Player::U, t);
                flow.read(Player::X, t + 1, Player::U, t)?;
                let i = argmax_constraint(inst, &x, &u);
                let mut xi = inst.constraints[i].grad_x(&x, &u[i]);
                xi.iter_mut().for_each(|v| *v *= s);
                xmd.step(gx(t), th, &xi)?;
                flow.read(Player::U, t + 1, Player::X, t)?;
                for (j, d) in umd.iter_mut().enumerate() {
                    let xi: Vec<f64> = inst.constraints[j].grad_u(&x, &u[j]).iter().map(|v| -s * v).collect();
                    d.step(gu(t), th, &xi)?;
                }
                xs.push(x);
                us.push(u);
            }
            (xmd.finish(), umd.into_iter().map(MirrorDescent::finish).collect::<Vec<_>>())
        }
        Scheme::StrongUSmoothX => {
            let hybrid = ProximalSetup::hybrid(inst.x_domain.clone(), m)?;
            let lxy = hybrid_smoothness(inst.omega_x(), k.l_x.unwrap(), k.g_x, m);
            let gamma = 1.0 / (lxy * sup);
            let au = k.alpha_u.unwrap();
            let mut mp = MirrorProx::new(&hybrid);
            let mut umd: Vec<MirrorDescent> = inst.u_domains.iter().map(MirrorDescent::new).collect();
            let n = inst.n;
            let operator = |z: &[f64], u: &[Vec<f64>], th: f64| -> Vec<f64> {
                let (x, y) = z.split_at(n);
                let mut gx = vec![0.0; n];
                let mut gy = vec![0.0; m];
                for (i, c) in inst.constraints.iter().enumerate() {
                    axpy(&mut gx, th * y[i], &c.grad_x(x, &u[i]));
                    gy[i] = -th * c.value(x, &u[i]);
                }
                gx.extend(gy);
                gx
            };
            for t in 1..=horizon {
                let th = w.theta(t);
                let u: Vec<Vec<f64>> = umd.iter().map(|d| d.point().to_vec()).collect();
                flow.publish(Player::U, t);
                flow.read(Player::X, t, Player::U, t)?;
                let eta = operator(mp.center(), &u, th);
                let z = mp.lookahead(gamma, th, &eta)?.to_vec();
                flow.publish(Player::X, t);
                let xi = operator(&z, &u, th);
                mp.update(&xi)?;
                let (x, y) = z.split_at(n);
                flow.read(Player::U, t + 1, Player::X, t)?;
                for (j, d) in umd.iter_mut().enumerate() {
                    let xi: Vec<f64> = inst.constraints[j].grad_u(x, &u[j]).iter().map(|v| -v).collect();
                    d.step(2.0 / (au * (t as f64 + 1.0)), th, &xi)?;
                }
                xs.push(x.to_vec());
                ys.push(y.to_vec());
                us.push(u);
            }
            (mp.finish(), umd.into_iter().map(MirrorDescent::finish).collect())
        }
        Scheme::SmoothUStrongX => {
            let ax = k.alpha_x.unwrap();
            let gamma_u = 1.0 / (k.l_u.unwrap() * sup);
            let mut xmd = MirrorDescent::new(&inst.x_domain);
            let mut ump: Vec<MirrorProx> = inst.u_domains.iter().map(MirrorProx::new).collect();
            for t in 1..=horizon {
                let th = w.theta(t);
                let x = xmd.point().to_vec();
                flow.publish(Player::X, t);
                flow.read(Player::U, t, Player::X, t)?;
                let mut u = Vec::with_capacity(m);
                for (j, p) in ump.iter_mut().enumerate() {
                    let c = &inst.constraints[j];
                    let eta: Vec<f64> = c.grad_u(&x, p.center()).iter().map(|v| -th * v).collect();
                    let uj = p.lookahead(gamma_u, th, &eta)?.to_vec();
                    let xi: Vec<f64> = c.grad_u(&x, &uj).iter().map(|v| -th * v).collect();
                    p.update(&xi)?;
                    u.push(uj);
                }
                flow.publish(Player::U, t);
                flow.read(Player::X, t + 1, Player::U, t)?;
                let i = argmax_constraint(inst, &x, &u);
                xmd.step(2.0 / (ax * (t as f64 + 1.0)), th, &inst.constraints[i].grad_x(&x, &u[i]))?;
                xs.push(x);
                us.push(u);
            }
            (xmd.finish(), ump.into_iter().map(MirrorProx::finish).collect())
        }
        Scheme::SmoothUSmoothX => unreachable!("rejected by validate_config"),
    };

    let circ = eps_circ(inst, &xs, &us, &w, oracle)?;
    let bullet = if scheme == Scheme::StrongUSmoothX {
        eps_bullet_y(inst, &xs, &us, &ys, &w, oracle)?
    } else {
        eps_bullet(inst, &xs, &us, &w, oracle)?
    };
    let mt = max_term(inst, &xs, &us, &w);
    let x_bar = weighted_average(&xs, w.values());
    let verdict = verdict(cfg, &circ, &bullet, mt, x_bar);
    Ok(SchemeRun {
        scheme,
        horizon,
        bounds: scheme_bounds(inst, scheme, horizon)?,
        weights: w,
        xs,
        us,
        ys: (scheme == Scheme::StrongUSmoothX).then_some(ys),
        x_trace,
        u_traces,
        circ,
        bullet,
        max_term: mt,
        verdict,
        flow_reads: flow.reads,
    })
}

/// Full solve: horizon from the bounds (unless fixed), doubled on inconclusive
/// outcomes while the total iteration budget allows.
#[derive(Clone, Debug, Serialize)]
pub struct RobustSolve {
    pub attempts: Vec<usize>,
    pub total_iterations: usize,
    pub run: SchemeRun,
}

pub fn run_scheme(inst: &RobustInstance, cfg: &FeasibilityConfig, oracle: &OfflineOracle) -> Result<RobustSolve> {
    validate_config(inst, cfg)?;
    let mut horizon = match cfg.horizon {
        Some(t) => t,
        None => required_horizon(inst, cfg)?,
    };
    let mut attempts = Vec::new();
    let mut total = 0usize;
    loop {
        let run = run_once(inst, cfg, horizon, oracle)?;
        attempts.push(horizon);
        total += horizon;
        let retry = run.verdict.outcome == Outcome::Inconclusive && cfg.double_on_inconclusive && total + 2 * horizon <= cfg.max_total_iterations;
        if !retry {
            return Ok(RobustSolve { attempts, total_iterations: total, run });
        }
        horizon *= 2;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::robust::instance::{planted_instance, FamilyParams, Planted};
    use rand::SeedableRng;

    fn cfg(scheme: Scheme) -> FeasibilityConfig {
        FeasibilityConfig { eps: 0.1, scheme, ..Default::default() }
    }

    #[test]
    fn forbidden_pairing_and_missing_constants() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(1);
        let mut inst = planted_instance(&mut rng, &FamilyParams::default(), Planted::Feasible, 0.1).unwrap();
        assert!(matches!(validate_config(&inst, &cfg(Scheme::SmoothUSmoothX)), Err(Error::Config(_))));
        inst.constants.alpha_u = None;
        let e = validate_config(&inst, &cfg(Scheme::StrongStrong)).unwrap_err();
        assert!(e.to_string().contains("alpha_U"), "{e}");
        assert!(validate_config(&inst, &FeasibilityConfig { tau: 1.0, ..cfg(Scheme::SmoothUStrongX) }).is_err());
    }

    #[test]
    fn info_flow_contracts() {
        let mut f = InfoFlow::new(Scheme::StrongStrong);
        f.publish(Player::X, 3);
        f.publish(Player::U, 3);
        assert!(f.read(Player::X, 4, Player::U, 3).is_ok());
        assert!(matches!(f.read(Player::X, 3, Player::U, 3), Err(Error::InformationFlow(_))));
        let mut f = InfoFlow::new(Scheme::StrongUSmoothX);
        f.publish(Player::U, 3);
        assert!(f.read(Player::X, 3, Player::U, 3).is_ok());
        assert!(f.read(Player::X, 3, Player::U, 4).is_err());
        let mut f = InfoFlow::new(Scheme::SmoothUStrongX);
        f.publish(Player::X, 3);
        f.publish(Player::U, 2);
        assert!(f.read(Player::U, 3, Player::X, 3).is_ok());
        assert!(f.read(Player::X, 3, Player::U, 3).is_err());
    }

    #[test]
    fn required_horizon_is_minimal() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(2);
        let inst = planted_instance(&mut rng, &FamilyParams::default(), Planted::Feasible, 0.1).unwrap();
        for s in [Scheme::StrongStrong, Scheme::StrongUSmoothX, Scheme::SmoothUStrongX, Scheme::BaselineNonsmooth] {
            let c = cfg(s);
            let t = required_horizon(&inst, &c).unwrap();
            let b = scheme_bounds(&inst, s, t).unwrap();
            assert!(b.circ <= 0.05 && b.bullet <= 0.05);
            if t > 1 {
                let b = scheme_bounds(&inst, s, t - 1).unwrap();
                assert!(b.circ > 0.05 || b.bullet > 0.05);
            }
        }
    }

    #[test]
    fn planted_verdicts_and_bounds() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(3);
        let o = OfflineOracle::default();
        for s in [Scheme::StrongStrong, Scheme::StrongUSmoothX, Scheme::SmoothUStrongX] {
            for (status, want) in [(Planted::Feasible, Outcome::Feasible), (Planted::Infeasible, Outcome::Infeasible)] {
                let inst = planted_instance(&mut rng, &FamilyParams::default(), status, 0.15).unwrap();
                let r = run_scheme(&inst, &cfg(s), &o).unwrap().run;
                assert_eq!(r.verdict.outcome, want, "{s}");
                assert!(r.circ.value <= r.bounds.circ + 1e-6);
                assert!(r.bullet.value <= r.bullet_bound() + 1e-6);
                assert!(r.flow_reads >= 2 * r.horizon);
                if want == Outcome::Feasible {
                    let xb = r.verdict.x_bar.as_ref().unwrap();
                    assert!(inst.robust_violation(xb, &o).unwrap() <= 0.1);
                }
            }
        }
    }

    fn mean_ratio(scheme: Scheme, status: Planted) -> f64 {
        let o = OfflineOracle::default();
        let mut sum = 0.0;
        for seed in 0..10 {
            let mut rng = rand::rngs::StdRng::seed_from_u64(100 + seed);
            let inst = planted_instance(&mut rng, &FamilyParams::default(), status, 0.1).unwrap();
            let c = cfg(scheme);
            let a = run_once(&inst, &c, 200, &o).unwrap().certificate_sum();
            let b = run_once(&inst, &c, 400, &o).unwrap().certificate_sum();
            sum += b / a;
        }
        sum / 10.0
    }

    #[test]
    fn doubling_rate_signature() {
        let strong = mean_ratio(Scheme::StrongStrong, Planted::Infeasible);
        assert!((0.4..=0.6).contains(&strong), "{strong}");
        let base = mean_ratio(Scheme::BaselineNonsmooth, Planted::Infeasible);
        assert!((base - 0.5f64.sqrt()).abs() < 0.05, "{base}");
    }

    #[test]
    fn smoothness_constants() {
        // m = 1 removes the coupling term.
        assert_eq!(hybrid_smoothness(0.5, 2.0, 1.0, 1), 2.0);
        for m in [2, 3, 50] {
            assert!(hybrid_smoothness(0.5, 1.0, 1.3, m) >= hybrid_smoothness_stated(0.5, 1.0, 1.3, m));
        }
    }
}
