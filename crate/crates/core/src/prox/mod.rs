//! Proximal setups: a domain with a norm and a 1-strongly convex
//! distance-generating function ω, plus the Bregman / prox primitives.
//!
//! Supported setups:
//! - Euclidean ω(z) = ½‖z‖₂² on a ball, box or simplex (ℓ₂ norm, self-dual).
//! - Entropy ω(z) = Σ z_i ln z_i on the simplex (ℓ₁ norm, ℓ∞ dual).
//! - Products with ω(x, y) = β_x ω_x(x) + β_y ω_y(y). The product norm is
//!   ‖(x, y)‖ = √(β_x‖x‖² + β_y‖y‖²), with dual norm
//!   ‖(ξ, η)‖_* = √(‖ξ‖_*²/β_x + ‖η‖_*²/β_y), which keeps ω 1-strongly convex.
//!
//! All prox-type maps go through one primitive, `mirror_argmin(w) =
//! argmin_z ⟨w, z⟩ + ω(z)`, so Prox_z(ξ) = mirror_argmin(ξ − ∇ω(z)).

mod domain;
mod spec;

use rand::Rng;

pub use domain::Domain;
pub(crate) use domain::bisect;
pub use spec::SetupSpec;

use crate::error::{check_dim, check_finite, Error, Result};
use crate::linalg::{dot, norm1, norm2, norm_inf};

/// Entropy logs clamp coordinates from below at this value.
pub const ENTROPY_FLOOR: f64 = 1e-15;

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Dgf {
    Euclidean,
    Entropy,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ProximalSetup {
    Basic { domain: Domain, dgf: Dgf },
    Product { x: Box<ProximalSetup>, y: Box<ProximalSetup>, beta_x: f64, beta_y: f64 },
}

impl ProximalSetup {
    pub fn new(domain: Domain, dgf: Dgf) -> Result<Self> {
        if dgf == Dgf::Entropy && !matches!(domain, Domain::Simplex { .. }) {
            return Err(Error::Config("the entropy d.g.f. is only supported on the simplex".into()));
        }
        match &domain {
            Domain::Simplex { dim } if *dim == 0 => {
                return Err(Error::Config("simplex dimension must be positive".into()))
            }
            Domain::Ball { center, radius } => {
                if center.is_empty() || !(radius.is_finite() && *radius > 0.0) {
                    return Err(Error::Config(format!("invalid ball: dim {}, radius {radius}", center.len())));
                }
                check_finite("ball center", center)?;
            }
            Domain::Box { lower, upper } => {
                check_dim(lower.len(), upper.len())?;
                check_finite("box lower", lower)?;
                check_finite("box upper", upper)?;
                if lower.is_empty() || lower.iter().zip(upper).any(|(l, u)| l > u) {
                    return Err(Error::Config("box bounds must be nonempty with lower ≤ upper".into()));
                }
            }
            _ => {}
        }
        Ok(ProximalSetup::Basic { domain, dgf })
    }

    pub fn entropy_simplex(n: usize) -> Self {
        ProximalSetup::Basic { domain: Domain::simplex(n), dgf: Dgf::Entropy }
    }

    pub fn euclidean_ball(n: usize, radius: f64) -> Self {
        ProximalSetup::Basic { domain: Domain::ball(n, radius), dgf: Dgf::Euclidean }
    }

    pub fn euclidean(domain: Domain) -> Self {
        ProximalSetup::Basic { domain, dgf: Dgf::Euclidean }
    }

    pub fn product(x: ProximalSetup, y: ProximalSetup, beta_x: f64, beta_y: f64) -> Result<Self> {
        if !(beta_x.is_finite() && beta_x > 0.0 && beta_y.is_finite() && beta_y > 0.0) {
            return Err(Error::InvalidParameter(format!("product weights must be positive, got β_x={beta_x}, β_y={beta_y}")));
        }
        Ok(ProximalSetup::Product { x: Box::new(x), y: Box::new(y), beta_x, beta_y })
    }

    /// X × Δ_m with β_x = 1/(2Ω_X), β_y = 1/(2 ln m): total set width 1.
    pub fn hybrid(x: ProximalSetup, m: usize) -> Result<Self> {
        if m < 2 {
            return Err(Error::Config("the hybrid X × Δ_m setup needs m ≥ 2".into()));
        }
        let ox = x.set_width();
        if ox <= 0.0 {
            return Err(Error::Config("the hybrid setup needs a decision domain of positive width".into()));
        }
        let y = ProximalSetup::entropy_simplex(m);
        Self::product(x, y, 1.0 / (2.0 * ox), 1.0 / (2.0 * (m as f64).ln()))
    }

    pub fn dim(&self) -> usize {
        match self {
            ProximalSetup::Basic { domain, .. } => domain.dim(),
            ProximalSetup::Product { x, y, .. } => x.dim() + y.dim(),
        }
    }

    /// Splits a product-space vector into its blocks.
    pub fn split<'a>(&self, z: &'a [f64]) -> (&'a [f64], &'a [f64]) {
        match self {
            ProximalSetup::Product { x, .. } => z.split_at(x.dim()),
            ProximalSetup::Basic { .. } => (z, &[]),
        }
    }

    /// Flattened list of (offset, domain) blocks.
    pub fn blocks(&self) -> Vec<(usize, &Domain)> {
        let mut out = Vec::new();
        self.collect_blocks(0, &mut out);
        out
    }

    fn collect_blocks<'a>(&'a self, offset: usize, out: &mut Vec<(usize, &'a Domain)>) {
        match self {
            ProximalSetup::Basic { domain, .. } => out.push((offset, domain)),
            ProximalSetup::Product { x, y, .. } => {
                x.collect_blocks(offset, out);
                y.collect_blocks(offset + x.dim(), out);
            }
        }
    }

    pub fn omega(&self, z: &[f64]) -> f64 {
        match self {
            ProximalSetup::Basic { dgf: Dgf::Euclidean, .. } => 0.5 * dot(z, z),
            ProximalSetup::Basic { dgf: Dgf::Entropy, .. } => {
                z.iter().filter(|v| **v > 0.0).map(|v| v * v.ln()).sum()
            }
            ProximalSetup::Product { x, y, beta_x, beta_y } => {
                let (a, b) = self.split(z);
                beta_x * x.omega(a) + beta_y * y.omega(b)
            }
        }
    }

    /// ∇ω(z). Fails for entropy when a coordinate is not strictly positive.
    pub fn grad_omega(&self, z: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dim(), z.len())?;
        check_finite("prox center", z)?;
        match self {
            ProximalSetup::Basic { dgf: Dgf::Euclidean, .. } => Ok(z.to_vec()),
            ProximalSetup::Basic { dgf: Dgf::Entropy, .. } => {
                if let Some(i) = z.iter().position(|v| *v <= 0.0) {
                    return Err(Error::DomainBoundary { index: i, value: z[i] });
                }
                Ok(z.iter().map(|v| 1.0 + v.max(ENTROPY_FLOOR).ln()).collect())
            }
            ProximalSetup::Product { x, y, beta_x, beta_y } => {
                let (a, b) = self.split(z);
                let mut g: Vec<f64> = x.grad_omega(a)?.into_iter().map(|v| beta_x * v).collect();
                g.extend(y.grad_omega(b)?.into_iter().map(|v| beta_y * v));
                Ok(g)
            }
        }
    }

    /// V_z(z') = ω(z') − ω(z) − ⟨∇ω(z), z' − z⟩.
    pub fn bregman(&self, z: &[f64], zp: &[f64]) -> Result<f64> {
        check_dim(self.dim(), z.len())?;
        check_dim(self.dim(), zp.len())?;
        match self {
            ProximalSetup::Basic { dgf: Dgf::Euclidean, .. } => {
                Ok(0.5 * z.iter().zip(zp).map(|(a, b)| (a - b) * (a - b)).sum::<f64>())
            }
            ProximalSetup::Basic { dgf: Dgf::Entropy, .. } => {
                if let Some(i) = z.iter().position(|v| *v <= 0.0) {
                    return Err(Error::DomainBoundary { index: i, value: z[i] });
                }
                // Generalized KL; exact on the simplex and nonnegative off it.
                let mut v = 0.0;
                for (a, b) in z.iter().zip(zp) {
                    let la = a.max(ENTROPY_FLOOR).ln();
                    if *b > 0.0 {
                        v += b * (b.ln() - la);
                    }
                    v += a - b;
                }
                Ok(v.max(0.0))
            }
            ProximalSetup::Product { x, y, beta_x, beta_y } => {
                let (a, b) = self.split(z);
                let (ap, bp) = self.split(zp);
                Ok(beta_x * x.bregman(a, ap)? + beta_y * y.bregman(b, bp)?)
            }
        }
    }

    /// argmin_{z ∈ Z} ⟨w, z⟩ + ω(z).
    pub fn mirror_argmin(&self, w: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dim(), w.len())?;
        check_finite("dual vector", w)?;
        Ok(self.mirror_argmin_unchecked(w))
    }

    fn mirror_argmin_unchecked(&self, w: &[f64]) -> Vec<f64> {
        match self {
            ProximalSetup::Basic { domain, dgf: Dgf::Euclidean } => {
                let neg: Vec<f64> = w.iter().map(|v| -v).collect();
                domain.project(&neg)
            }
            ProximalSetup::Basic { dgf: Dgf::Entropy, .. } => softmax_neg(w),
            ProximalSetup::Product { x, y, beta_x, beta_y } => {
                let (a, b) = self.split(w);
                let a: Vec<f64> = a.iter().map(|v| v / beta_x).collect();
                let b: Vec<f64> = b.iter().map(|v| v / beta_y).collect();
                let mut z = x.mirror_argmin_unchecked(&a);
                z.extend(y.mirror_argmin_unchecked(&b));
                z
            }
        }
    }

    /// Prox_z(ξ) = argmin_{z' ∈ Z} ⟨ξ, z'⟩ + V_z(z').
    pub fn prox(&self, z: &[f64], xi: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dim(), xi.len())?;
        check_finite("ξ", xi)?;
        if let ProximalSetup::Product { x, y, beta_x, beta_y } = self {
            check_dim(self.dim(), z.len())?;
            let (zx, zy) = self.split(z);
            let (ax, ay) = self.split(xi);
            let mut out = x.prox(zx, &ax.iter().map(|v| v / beta_x).collect::<Vec<_>>())?;
            out.extend(y.prox(zy, &ay.iter().map(|v| v / beta_y).collect::<Vec<_>>())?);
            return Ok(out);
        }
        let g = self.grad_omega(z)?;
        let w: Vec<f64> = xi.iter().zip(&g).map(|(a, b)| a - b).collect();
        check_finite("prox argument", &w)?;
        Ok(self.mirror_argmin_unchecked(&w))
    }

    pub fn omega_center(&self) -> Vec<f64> {
        self.mirror_argmin_unchecked(&vec![0.0; self.dim()])
    }

    /// Ω ≥ max_z V_{z_ω}(z), exact for every supported setup.
    pub fn set_width(&self) -> f64 {
        match self {
            ProximalSetup::Basic { domain, dgf: Dgf::Entropy } => (domain.dim() as f64).ln(),
            ProximalSetup::Basic { domain, dgf: Dgf::Euclidean } => {
                let c = self.omega_center();
                match domain {
                    Domain::Simplex { dim } => 0.5 * (1.0 - 1.0 / *dim as f64),
                    Domain::Ball { center, radius } => {
                        0.5 * (crate::linalg::dist2(center, &c) + radius).powi(2)
                    }
                    Domain::Box { lower, upper } => 0.5
                        * (0..c.len())
                            .map(|i| (lower[i] - c[i]).powi(2).max((upper[i] - c[i]).powi(2)))
                            .sum::<f64>(),
                }
            }
            ProximalSetup::Product { x, y, beta_x, beta_y } => {
                beta_x * x.set_width() + beta_y * y.set_width()
            }
        }
    }

    pub fn norm(&self, z: &[f64]) -> f64 {
        match self {
            ProximalSetup::Basic { dgf: Dgf::Euclidean, .. } => norm2(z),
            ProximalSetup::Basic { dgf: Dgf::Entropy, .. } => norm1(z),
            ProximalSetup::Product { x, y, beta_x, beta_y } => {
                let (a, b) = self.split(z);
                (beta_x * x.norm(a).powi(2) + beta_y * y.norm(b).powi(2)).sqrt()
            }
        }
    }

    pub fn dual_norm(&self, xi: &[f64]) -> f64 {
        match self {
            ProximalSetup::Basic { dgf: Dgf::Euclidean, .. } => norm2(xi),
            ProximalSetup::Basic { dgf: Dgf::Entropy, .. } => norm_inf(xi),
            ProximalSetup::Product { x, y, beta_x, beta_y } => {
                let (a, b) = self.split(xi);
                (x.dual_norm(a).powi(2) / beta_x + y.dual_norm(b).powi(2) / beta_y).sqrt()
            }
        }
    }

    /// Upper bound on max ‖z − z'‖ over the domain in the setup's norm.
    pub fn diameter(&self) -> f64 {
        match self {
            ProximalSetup::Basic { domain, dgf } => match (domain, dgf) {
                (Domain::Simplex { .. }, Dgf::Entropy) => 2.0,
                (Domain::Simplex { dim }, Dgf::Euclidean) => if *dim > 1 { 2f64.sqrt() } else { 0.0 },
                (Domain::Ball { radius, .. }, _) => 2.0 * radius,
                (Domain::Box { lower, upper }, _) => crate::linalg::dist2(lower, upper),
            },
            ProximalSetup::Product { x, y, beta_x, beta_y } => {
                (beta_x * x.diameter().powi(2) + beta_y * y.diameter().powi(2)).sqrt()
            }
        }
    }

    /// Maximizer and value of ⟨g, z⟩ over the whole (product) domain.
    pub fn linear_max(&self, g: &[f64]) -> (f64, Vec<f64>) {
        let mut z = vec![0.0; self.dim()];
        let mut val = 0.0;
        for (off, d) in self.blocks() {
            let (v, p) = d.linear_max(&g[off..off + d.dim()]);
            val += v;
            z[off..off + d.dim()].copy_from_slice(&p);
        }
        (val, z)
    }

    pub fn linear_min(&self, g: &[f64]) -> (f64, Vec<f64>) {
        let neg: Vec<f64> = g.iter().map(|v| -v).collect();
        let (v, z) = self.linear_max(&neg);
        (-v, z)
    }

    /// Euclidean projection onto the (product) domain.
    pub fn project(&self, z: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        for (off, d) in self.blocks() {
            out[off..off + d.dim()].copy_from_slice(&d.project(&z[off..off + d.dim()]));
        }
        out
    }

    pub fn contains(&self, z: &[f64], tol: f64) -> bool {
        z.len() == self.dim()
            && self.blocks().iter().all(|(off, d)| d.contains(&z[*off..off + d.dim()], tol))
    }

    /// Random domain point, in the relative interior for entropy blocks.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.dim());
        for (_, d) in self.blocks() {
            out.extend(d.sample(rng));
        }
        out
    }
}

/// argmin over the simplex of ⟨w, z⟩ + Σ z ln z: softmax(−w), floored so
/// every coordinate stays strictly positive.
fn softmax_neg(w: &[f64]) -> Vec<f64> {
    let m = w.iter().cloned().fold(f64::INFINITY, f64::min);
    let e: Vec<f64> = w.iter().map(|v| (m - v).exp()).collect();
    let s: f64 = e.iter().sum();
    e.iter().map(|v| (v / s).max(f64::MIN_POSITIVE)).collect()
}
