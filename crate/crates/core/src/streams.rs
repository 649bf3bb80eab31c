//! Loss and game streams, their instance-file format, and seeded generators.

use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::engine::{LossOracle, SaddleOracle};
use crate::error::{Error, Result};
use crate::linalg::{dot, sub};
use crate::model::{Affine, Bilinear, PwQuadratic};
use crate::prox::{Domain, ProximalSetup};

/// f_t = fns[(t − 1) mod len].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FunctionStream {
    pub functions: Vec<PwQuadratic>,
}

impl FunctionStream {
    fn get(&self, t: usize) -> &PwQuadratic {
        &self.functions[(t - 1) % self.functions.len()]
    }
}

impl LossOracle for FunctionStream {
    fn dim(&self) -> usize {
        self.functions[0].dim()
    }
    fn value(&self, t: usize, x: &[f64]) -> f64 {
        self.get(t).value(x)
    }
    fn subgradient(&self, t: usize, x: &[f64]) -> Vec<f64> {
        self.get(t).subgradient(x)
    }
    fn structure(&self, t: usize) -> Option<PwQuadratic> {
        Some(self.get(t).clone())
    }
}

/// φ_t = games[(t − 1) mod len].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GameStream {
    pub games: Vec<Bilinear>,
}

impl GameStream {
    pub fn get(&self, t: usize) -> &Bilinear {
        &self.games[(t - 1) % self.games.len()]
    }
}

impl SaddleOracle for GameStream {
    fn dims(&self) -> (usize, usize) {
        self.games[0].dims()
    }
    fn value(&self, t: usize, x: &[f64], y: &[f64]) -> f64 {
        self.get(t).value(x, y)
    }
    fn operator(&self, t: usize, x: &[f64], y: &[f64]) -> Vec<f64> {
        self.get(t).operator(x, y)
    }
    fn x_section(&self, t: usize, y: &[f64]) -> Option<PwQuadratic> {
        let g = self.get(t);
        Some(PwQuadratic::linear(g.grad_x(y), dot(&g.by, y)))
    }
    fn neg_y_section(&self, t: usize, x: &[f64]) -> Option<PwQuadratic> {
        let g = self.get(t);
        Some(PwQuadratic::linear(g.grad_y(x).iter().map(|v| -v).collect(), -dot(&g.bx, x)))
    }
}

/// Declared structure constants of a stream.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StreamConstants {
    /// Dual-norm bound on (sub)gradients or on the game operator.
    #[serde(rename = "G", default, skip_serializing_if = "Option::is_none")]
    pub g: Option<f64>,
    /// Strong-convexity modulus relative to the setup's d.g.f.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    /// Lipschitz constant of gradients / of the operator.
    #[serde(rename = "L", default, skip_serializing_if = "Option::is_none")]
    pub l: Option<f64>,
}

/// An online convex optimization instance file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum OcoInstance {
    Functions {
        setup: ProximalSetup,
        functions: Vec<PwQuadratic>,
        constants: StreamConstants,
    },
    Games {
        setup_x: ProximalSetup,
        setup_y: ProximalSetup,
        games: Vec<Bilinear>,
        constants: StreamConstants,
    },
}

impl OcoInstance {
    pub fn validate(&self) -> Result<()> {
        match self {
            OcoInstance::Functions { setup, functions, .. } => {
                if functions.is_empty() {
                    return Err(Error::Config("function stream is empty".into()));
                }
                for (i, f) in functions.iter().enumerate() {
                    f.validate().map_err(|e| Error::Config(format!("functions[{i}]: {e}")))?;
                    if f.dim() != setup.dim() {
                        return Err(Error::Config(format!("functions[{i}] has dim {}, setup has {}", f.dim(), setup.dim())));
                    }
                }
            }
            OcoInstance::Games { setup_x, setup_y, games, .. } => {
                if games.is_empty() {
                    return Err(Error::Config("game stream is empty".into()));
                }
                for (i, g) in games.iter().enumerate() {
                    g.validate().map_err(|e| Error::Config(format!("games[{i}]: {e}")))?;
                    if g.dims() != (setup_x.dim(), setup_y.dim()) {
                        return Err(Error::Config(format!("games[{i}] has dims {:?}", g.dims())));
                    }
                }
            }
        }
        self.spot_check(0x5eed, 4)
    }

    /// Checks the declared G, alpha and L on `per_item` sampled pairs for every
    /// function or game. Games are checked on the unit-weight product setup.
    pub fn spot_check(&self, seed: u64, per_item: usize) -> Result<()> {
        let k = self.constants();
        let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
        let tol = 1e-9;
        let lipschitz = |s: &ProximalSetup, g1: &[f64], g2: &[f64], z1: &[f64], z2: &[f64], l: f64, what: &str| {
            let d = s.dual_norm(&sub(g1, g2));
            if d > l * s.norm(&sub(z1, z2)) * (1.0 + tol) + tol {
                return Err(Error::Config(format!("{what} is not L = {l} Lipschitz on a sampled pair")));
            }
            Ok(())
        };
        match self {
            OcoInstance::Functions { setup, functions, .. } => {
                for (i, f) in functions.iter().enumerate() {
                    for _ in 0..per_item {
                        let (x, x2) = (setup.sample(&mut rng), setup.sample(&mut rng));
                        let g = f.subgradient(&x);
                        if let Some(gmax) = k.g {
                            let n = setup.dual_norm(&g);
                            if n > gmax * (1.0 + tol) {
                                return Err(Error::Config(format!("functions[{i}]: ‖∇f‖_* = {n} exceeds G = {gmax}")));
                            }
                        }
                        if let Some(a) = k.alpha {
                            // f(x2) ≥ f(x) + ⟨∇f(x), x2 − x⟩ + α V_x(x2)
                            let rhs = f.value(&x) + dot(&g, &sub(&x2, &x)) + a * setup.bregman(&x, &x2)?;
                            if f.value(&x2) < rhs - tol * (1.0 + rhs.abs()) {
                                return Err(Error::Config(format!("functions[{i}] is not alpha = {a} strongly convex on a sampled pair")));
                            }
                        }
                        if let Some(l) = k.l {
                            lipschitz(setup, &g, &f.subgradient(&x2), &x, &x2, l, &format!("functions[{i}] gradient"))?;
                        }
                    }
                }
            }
            OcoInstance::Games { setup_x, setup_y, games, .. } => {
                let p = ProximalSetup::product(setup_x.clone(), setup_y.clone(), 1.0, 1.0)?;
                let nx = games[0].dims().0;
                for (i, g) in games.iter().enumerate() {
                    for _ in 0..per_item {
                        let (z, z2) = (p.sample(&mut rng), p.sample(&mut rng));
                        let f = g.operator(&z[..nx], &z[nx..]);
                        if let Some(gmax) = k.g {
                            let n = p.dual_norm(&f);
                            if n > gmax * (1.0 + tol) {
                                return Err(Error::Config(format!("games[{i}]: operator norm {n} exceeds G = {gmax}")));
                            }
                        }
                        if let Some(l) = k.l {
                            lipschitz(&p, &f, &g.operator(&z2[..nx], &z2[nx..]), &z, &z2, l, &format!("games[{i}] operator"))?;
                        }
                    }
                }
            }
        }
        Ok(())
    }

    pub fn constants(&self) -> StreamConstants {
        match self {
            OcoInstance::Functions { constants, .. } | OcoInstance::Games { constants, .. } => *constants,
        }
    }

    pub fn stream(&self) -> Option<FunctionStream> {
        match self {
            OcoInstance::Functions { functions, .. } => Some(FunctionStream { functions: functions.clone() }),
            _ => None,
        }
    }

    pub fn games(&self) -> Option<GameStream> {
        match self {
            OcoInstance::Games { games, .. } => Some(GameStream { games: games.clone() }),
            _ => None,
        }
    }
}

fn uniform<R: Rng + ?Sized>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.random::<f64>()
}

/// Max-of-affine losses on the entropy simplex Δ_n with slopes in [−1, 1]:
/// every subgradient has ℓ∞ norm ≤ 1, so G = 1.
pub fn max_affine_simplex<R: Rng + ?Sized>(rng: &mut R, n: usize, pieces: usize, count: usize) -> OcoInstance {
    let functions = (0..count)
        .map(|_| {
            PwQuadratic::max_affine(
                (0..pieces)
                    .map(|_| Affine::new((0..n).map(|_| uniform(rng, -1.0, 1.0)).collect(), uniform(rng, -0.5, 0.5)))
                    .collect(),
            )
        })
        .collect();
    OcoInstance::Functions {
        setup: ProximalSetup::entropy_simplex(n),
        functions,
        constants: StreamConstants { g: Some(1.0), ..Default::default() },
    }
}

/// f_t(x) = ½ Σ h_ti (x_i − c_ti)² with h_ti ∈ [α, 2α] on the Euclidean
/// ball of radius r; centers drawn from the ball of radius 2r.
pub fn strongly_convex_quadratics<R: Rng + ?Sized>(rng: &mut R, n: usize, count: usize, alpha: f64, r: f64) -> OcoInstance {
    let centers = Domain::ball(n, 2.0 * r);
    let functions = (0..count)
        .map(|_| {
            let h = (0..n).map(|_| uniform(rng, alpha, 2.0 * alpha)).collect();
            PwQuadratic::separable_distance(h, &centers.sample(rng))
        })
        .collect();
    OcoInstance::Functions {
        setup: ProximalSetup::euclidean_ball(n, r),
        functions,
        // ‖h ∘ (x − c)‖ ≤ 2α (r + 2r).
        constants: StreamConstants { g: Some(6.0 * alpha * r), alpha: Some(alpha), l: Some(2.0 * alpha) },
    }
}

/// Smooth convex quadratics with curvature in [0, l] plus random linear
/// terms on the Euclidean ball.
pub fn smooth_quadratics<R: Rng + ?Sized>(rng: &mut R, n: usize, count: usize, l: f64, r: f64) -> OcoInstance {
    let functions = (0..count)
        .map(|_| PwQuadratic {
            hess_diag: (0..n).map(|_| uniform(rng, 0.0, l)).collect(),
            lin: (0..n).map(|_| uniform(rng, -1.0, 1.0)).collect(),
            constant: 0.0,
            max_terms: Vec::new(),
        })
        .collect();
    OcoInstance::Functions {
        setup: ProximalSetup::euclidean_ball(n, r),
        functions,
        constants: StreamConstants { g: Some(l * r + (n as f64).sqrt()), alpha: None, l: Some(l) },
    }
}

/// Random ±1 matrix games on Δ_nx × Δ_ny with entropy setups.
///
/// With the unit-weight product setup the operator is L-Lipschitz for
/// L = max |a_ij| = 1 and bounded by G = √2 in the dual norm.
pub fn sign_games<R: Rng + ?Sized>(rng: &mut R, nx: usize, ny: usize, count: usize) -> OcoInstance {
    let games = (0..count)
        .map(|_| {
            Bilinear::new(
                (0..nx).map(|_| (0..ny).map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 }).collect()).collect(),
            )
        })
        .collect();
    OcoInstance::Games {
        setup_x: ProximalSetup::entropy_simplex(nx),
        setup_y: ProximalSetup::entropy_simplex(ny),
        games,
        constants: StreamConstants { g: Some(2f64.sqrt()), alpha: None, l: Some(1.0) },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn declared_constants_hold_on_samples() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(1);
        let inst = strongly_convex_quadratics(&mut rng, 4, 20, 0.5, 1.5);
        let OcoInstance::Functions { setup, functions, constants } = &inst else { unreachable!() };
        for f in functions {
            for _ in 0..50 {
                let x = setup.sample(&mut rng);
                assert!(setup.dual_norm(&f.subgradient(&x)) <= constants.g.unwrap());
            }
        }
        let games = sign_games(&mut rng, 3, 4, 5);
        let OcoInstance::Games { setup_x, setup_y, constants, .. } = &games else { unreachable!() };
        let p = ProximalSetup::product(setup_x.clone(), setup_y.clone(), 1.0, 1.0).unwrap();
        let gs = games.games().unwrap();
        for _ in 0..50 {
            let z = p.sample(&mut rng);
            let (x, y) = p.split(&z);
            assert!(p.dual_norm(&gs.operator(1, x, y)) <= constants.g.unwrap() + 1e-15);
        }
    }

    #[test]
    fn instance_round_trip() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(2);
        let inst = max_affine_simplex(&mut rng, 3, 2, 2);
        let text = serde_json::to_string(&inst).unwrap();
        let back: OcoInstance = serde_json::from_str(&text).unwrap();
        assert_eq!(inst, back);
        back.validate().unwrap();
    }

    #[test]
    fn understated_constants_are_rejected() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(9);
        for (inst, bad) in [
            (strongly_convex_quadratics(&mut rng, 3, 10, 1.0, 1.0), StreamConstants { g: Some(1e-3), ..Default::default() }),
            (strongly_convex_quadratics(&mut rng, 3, 10, 1.0, 1.0), StreamConstants { alpha: Some(50.0), ..Default::default() }),
            (smooth_quadratics(&mut rng, 3, 10, 2.0, 1.0), StreamConstants { l: Some(0.1), ..Default::default() }),
            (sign_games(&mut rng, 3, 3, 10), StreamConstants { l: Some(1e-3), ..Default::default() }),
        ] {
            let inst = match inst {
                OcoInstance::Functions { setup, functions, .. } => OcoInstance::Functions { setup, functions, constants: bad },
                OcoInstance::Games { setup_x, setup_y, games, .. } => OcoInstance::Games { setup_x, setup_y, games, constants: bad },
            };
            assert!(matches!(inst.validate(), Err(Error::Config(_))), "{bad:?}");
        }
    }
}
