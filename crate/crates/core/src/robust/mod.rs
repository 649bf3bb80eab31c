//! Robust feasibility: find x ∈ X with f^i(x, u) ≤ 0 for all u ∈ U^i, via
//! two coupled online players and the ε∘ / ε• certificates.

mod certificates;
mod instance;
mod scheme;

use serde::{Deserialize, Serialize};

pub use certificates::{eps_bullet, eps_bullet_y, eps_circ, max_term, BulletCertificate, BulletForm, CircCertificate};
pub use instance::{argmax_constraint, planted_instance, Constraint, FamilyParams, Planted, RobustConstants, RobustInstance};
pub use scheme::{
    hybrid_smoothness, hybrid_smoothness_stated, required_horizon, run_once, run_scheme, scheme_bounds, validate_config,
    InfoFlow, Player, RobustSolve, SchemeBounds, SchemeRun,
};

use crate::error::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Scheme {
    /// Mirror descent for both players.
    #[serde(rename = "strong-strong")]
    StrongStrong,
    /// Mirror descent on u, mirror prox on [x; y] over X × Δ_m.
    #[serde(rename = "strongU-smoothX")]
    StrongUSmoothX,
    /// Mirror prox on u, mirror descent on x.
    #[serde(rename = "smoothU-strongX")]
    SmoothUStrongX,
    /// Uniform weights and constant steps for both players.
    #[serde(rename = "baseline-nonsmooth")]
    BaselineNonsmooth,
    /// Parsed so that it can be rejected with a clear message.
    #[serde(rename = "smoothU-smoothX")]
    SmoothUSmoothX,
}

impl Scheme {
    pub const ALL: [Scheme; 5] =
        [Scheme::StrongStrong, Scheme::StrongUSmoothX, Scheme::SmoothUStrongX, Scheme::BaselineNonsmooth, Scheme::SmoothUSmoothX];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::StrongStrong => "strong-strong",
            Scheme::StrongUSmoothX => "strongU-smoothX",
            Scheme::SmoothUStrongX => "smoothU-strongX",
            Scheme::BaselineNonsmooth => "baseline-nonsmooth",
            Scheme::SmoothUSmoothX => "smoothU-smoothX",
        }
    }
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Scheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Error> {
        Scheme::ALL.into_iter().find(|k| k.name().eq_ignore_ascii_case(s)).ok_or_else(|| {
            Error::Config(format!(
                "unknown scheme `{s}` (strong-strong | strongU-smoothX | smoothU-strongX | baseline-nonsmooth)"
            ))
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FeasibilityConfig {
    pub eps: f64,
    pub tau: f64,
    /// Fixed horizon; chosen from the bounds when absent.
    pub horizon: Option<usize>,
    pub scheme: Scheme,
    pub double_on_inconclusive: bool,
    pub max_total_iterations: usize,
}

impl Default for FeasibilityConfig {
    fn default() -> Self {
        FeasibilityConfig {
            eps: 1e-2,
            tau: 0.5,
            horizon: None,
            scheme: Scheme::StrongStrong,
            double_on_inconclusive: true,
            max_total_iterations: 1 << 20,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Outcome {
    Feasible,
    Infeasible,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Verdict {
    pub outcome: Outcome,
    /// Upper estimates (realized value plus oracle gap) used in the test.
    pub eps_circ: f64,
    pub eps_bullet: f64,
    pub max_term: f64,
    /// x̄ = Σθ_t x_t, reported when the outcome is feasible.
    pub x_bar: Option<Vec<f64>>,
}

/// Case analysis on the certificate values.
///
/// feasible: ε∘ ≤ τε and max term ≤ (1 − τ)ε.
/// infeasible: ε• ≤ (1 − τ)ε and max term > (1 − τ)ε.
pub fn decide(eps: f64, tau: f64, eps_circ: f64, eps_bullet: f64, max_term: f64) -> Outcome {
    let budget = (1.0 - tau) * eps;
    if eps_circ <= tau * eps && max_term <= budget {
        Outcome::Feasible
    } else if eps_bullet <= budget && max_term > budget {
        Outcome::Infeasible
    } else {
        Outcome::Inconclusive
    }
}

pub fn verdict(cfg: &FeasibilityConfig, circ: &CircCertificate, bullet: &BulletCertificate, max_term: f64, x_bar: Vec<f64>) -> Verdict {
    let (ec, eb) = (circ.value + circ.gap, bullet.value + bullet.gap);
    let outcome = decide(cfg.eps, cfg.tau, ec, eb, max_term);
    Verdict { outcome, eps_circ: ec, eps_bullet: eb, max_term, x_bar: (outcome == Outcome::Feasible).then_some(x_bar) }
}
