//! Weighted-regret online convex optimization.
//!
//! Proximal setups ([`prox`]), the mirror descent / mirror prox engines
//! ([`engine`], [`schedule`]), regret measurement ([`regret`]) against
//! certified offline solvers ([`oracle`]), and the two applications built on
//! top: robust feasibility ([`robust`]) and joint estimation-optimization
//! ([`jeo`]).

pub mod engine;
pub mod experiment;
pub mod error;
pub mod linalg;
pub mod model;
pub mod oracle;
pub mod prox;
pub mod regret;
pub mod robust;
pub mod jeo;
pub mod schedule;
pub mod streams;

pub use engine::{mirror_descent, mirror_prox, LossOracle, MirrorDescent, MirrorProx, RunTrace, SaddleOracle, StepRecord};
pub use error::{Error, Result};
pub use model::{Affine, Bilinear, PwQuadratic};
pub use oracle::{Certified, OfflineOracle};
pub use prox::{Dgf, Domain, ProximalSetup};
pub use schedule::{StepKind, StepSchedule, WeightKind, WeightSchedule};
