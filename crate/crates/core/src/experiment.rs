//! End-to-end OCO runs on an instance: engine, regret, bound.

use serde::{Deserialize, Serialize};

use crate::engine::{mirror_descent, mirror_prox, LossOracle, RunTrace, SaddleOracle};
use crate::error::{Error, Result};
use crate::oracle::OfflineOracle;
use crate::prox::ProximalSetup;
use crate::regret::{online_sp_gap, theoretical_bound, weighted_regret, Regime, RegretReport};
use crate::schedule::{StepKind, StepParams, StepSchedule, WeightKind, WeightSchedule};
use crate::streams::OcoInstance;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OcoRegime {
    Nonsmooth,
    StronglyConvex,
    Smooth,
    /// Mirror descent on a game stream.
    SaddleNonsmooth,
    /// Mirror prox on a game stream.
    SaddleSmooth,
}

impl OcoRegime {
    pub const ALL: [OcoRegime; 5] =
        [OcoRegime::Nonsmooth, OcoRegime::StronglyConvex, OcoRegime::Smooth, OcoRegime::SaddleNonsmooth, OcoRegime::SaddleSmooth];

    pub fn name(self) -> &'static str {
        match self {
            OcoRegime::Nonsmooth => "nonsmooth",
            OcoRegime::StronglyConvex => "strongly-convex",
            OcoRegime::Smooth => "smooth",
            OcoRegime::SaddleNonsmooth => "saddle-nonsmooth",
            OcoRegime::SaddleSmooth => "saddle-smooth",
        }
    }

    fn bound_regime(self) -> Regime {
        match self {
            OcoRegime::Nonsmooth | OcoRegime::SaddleNonsmooth => Regime::Nonsmooth,
            OcoRegime::StronglyConvex => Regime::StronglyConvex,
            OcoRegime::Smooth | OcoRegime::SaddleSmooth => Regime::Smooth,
        }
    }

    pub fn is_saddle(self) -> bool {
        matches!(self, OcoRegime::SaddleNonsmooth | OcoRegime::SaddleSmooth)
    }

    /// Weights the regime runs with unless overridden.
    pub fn default_weights(self) -> WeightKind {
        if self == OcoRegime::StronglyConvex {
            WeightKind::Increasing
        } else {
            WeightKind::Uniform
        }
    }
}

impl std::fmt::Display for OcoRegime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for OcoRegime {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        OcoRegime::ALL.into_iter().find(|r| r.name() == s).ok_or_else(|| {
            Error::Config(format!(
                "unknown regime `{s}` (nonsmooth | strongly-convex | smooth | saddle-nonsmooth | saddle-smooth)"
            ))
        })
    }
}

#[derive(Clone, Debug)]
pub struct OcoRun {
    pub regime: OcoRegime,
    pub weights: WeightSchedule,
    pub steps: StepSchedule,
    pub trace: RunTrace,
    /// Regret (or online SP gap) with its bound attached.
    pub report: RegretReport,
}

impl OcoRun {
    pub fn bound(&self) -> f64 {
        self.report.bound.unwrap_or(f64::INFINITY)
    }

    pub fn within_bound(&self, tol: f64) -> bool {
        self.report.realized <= self.bound() + tol
    }
}

fn need(v: Option<f64>, name: &'static str, regime: OcoRegime) -> Result<f64> {
    v.ok_or_else(|| Error::missing(name, format!("the {regime} regime")))
}

/// Joint setup of a game instance: unit-weight product of the two setups.
pub fn game_setup(inst: &OcoInstance) -> Result<ProximalSetup> {
    match inst {
        OcoInstance::Games { setup_x, setup_y, .. } => ProximalSetup::product(setup_x.clone(), setup_y.clone(), 1.0, 1.0),
        _ => Err(Error::Config("expected a game instance".into())),
    }
}

pub fn run_oco(inst: &OcoInstance, regime: OcoRegime, horizon: usize, weights: Option<WeightKind>, solver: &OfflineOracle) -> Result<OcoRun> {
    inst.validate()?;
    let k = inst.constants();
    let kind = weights.unwrap_or(regime.default_weights());
    if regime == OcoRegime::StronglyConvex && kind != WeightKind::Increasing {
        return Err(Error::Config("the strongly convex regime runs with increasing weights".into()));
    }
    let w = WeightSchedule::new(kind, horizon)?;
    let setup = match (inst, regime.is_saddle()) {
        (OcoInstance::Functions { setup, .. }, false) => setup.clone(),
        (OcoInstance::Games { .. }, true) => game_setup(inst)?,
        _ => {
            return Err(Error::Config(format!(
                "regime {regime} does not match the instance kind ({})",
                if regime.is_saddle() { "needs games" } else { "needs functions" }
            )))
        }
    };
    let omega = setup.set_width();
    let (params, step_kind) = match regime {
        OcoRegime::Nonsmooth | OcoRegime::SaddleNonsmooth => {
            (StepParams::nonsmooth(omega, need(k.g, "G", regime)?), StepKind::ConstantNonsmooth)
        }
        OcoRegime::StronglyConvex => (
            StepParams { g: Some(need(k.g, "G", regime)?), ..StepParams::strongly_convex(need(k.alpha, "alpha", regime)?) },
            StepKind::InverseLinear,
        ),
        OcoRegime::Smooth | OcoRegime::SaddleSmooth => {
            (StepParams { omega: Some(omega), ..StepParams::smooth(need(k.l, "L", regime)?) }, StepKind::ConstantSmooth)
        }
    };
    let steps = StepSchedule::new(step_kind, params, &w)?;
    let bound = theoretical_bound(regime.bound_regime(), &params, &w)?;
    let scaled = |t: usize, g: Vec<f64>| -> Vec<f64> {
        let th = w.theta(t);
        g.into_iter().map(|v| th * v).collect()
    };

    let (trace, report) = if let Some(stream) = inst.stream() {
        let trace = match regime {
            OcoRegime::Nonsmooth => mirror_descent(&setup, &steps, |t, x| Ok(scaled(t, stream.subgradient(t, x))))?,
            OcoRegime::StronglyConvex => mirror_descent(&setup, &steps, |t, x| Ok(stream.subgradient(t, x)))?,
            _ => mirror_prox(
                &setup,
                &steps,
                |t, v| Ok(scaled(t, stream.subgradient(t, v))),
                |t, z| Ok(scaled(t, stream.subgradient(t, z))),
            )?,
        };
        let report = weighted_regret(&stream, &trace.points(), &w, &setup, solver)?;
        (trace, report)
    } else {
        let games = inst.games().expect("game instance");
        let (nx, _) = games.dims();
        let op = |t: usize, z: &[f64]| games.operator(t, &z[..nx], &z[nx..]);
        let trace = match regime {
            OcoRegime::SaddleNonsmooth => mirror_descent(&setup, &steps, |t, z| Ok(scaled(t, op(t, z))))?,
            _ => mirror_prox(&setup, &steps, |t, v| Ok(scaled(t, op(t, v))), |t, z| Ok(scaled(t, op(t, z))))?,
        };
        let pts = trace.points();
        let xs: Vec<Vec<f64>> = pts.iter().map(|z| z[..nx].to_vec()).collect();
        let ys: Vec<Vec<f64>> = pts.iter().map(|z| z[nx..].to_vec()).collect();
        let (sx, sy) = match inst {
            OcoInstance::Games { setup_x, setup_y, .. } => (setup_x, setup_y),
            _ => unreachable!(),
        };
        (trace, online_sp_gap(&games, &xs, &ys, &w, sx, sy, solver)?)
    };
    Ok(OcoRun { regime, weights: w, steps, trace, report: report.with_bound(bound) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::streams::{max_affine_simplex, sign_games, smooth_quadratics, strongly_convex_quadratics};
    use rand::SeedableRng;

    #[test]
    fn every_regime_stays_within_its_bound() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(4);
        let o = OfflineOracle::default();
        let cases = [
            (max_affine_simplex(&mut rng, 6, 4, 50), OcoRegime::Nonsmooth),
            (strongly_convex_quadratics(&mut rng, 4, 50, 1.0, 1.0), OcoRegime::StronglyConvex),
            (smooth_quadratics(&mut rng, 4, 50, 2.0, 1.0), OcoRegime::Smooth),
            (sign_games(&mut rng, 3, 4, 50), OcoRegime::SaddleNonsmooth),
            (sign_games(&mut rng, 3, 4, 50), OcoRegime::SaddleSmooth),
        ];
        for (inst, regime) in cases {
            let r = run_oco(&inst, regime, 100, None, &o).unwrap();
            assert!(r.within_bound(1e-6), "{regime}: {} > {}", r.report.realized, r.bound());
            assert!(r.trace.max_residual() <= 1e-8);
        }
    }

    #[test]
    fn mismatched_regime_is_rejected() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(5);
        let inst = sign_games(&mut rng, 2, 2, 3);
        assert!(run_oco(&inst, OcoRegime::Smooth, 10, None, &OfflineOracle::default()).is_err());
        let inst = max_affine_simplex(&mut rng, 3, 2, 3);
        assert!(matches!(run_oco(&inst, OcoRegime::StronglyConvex, 10, None, &OfflineOracle::default()), Err(Error::MissingParameter { .. })));
    }
}
