//! Reference prox solver, coded independently of `prox`, with a distance
//! certificate.
//!
//! If x̂ ∈ X exactly minimizes F − ⟨r, ·⟩ over X and F is μ-strongly convex,
//! then ‖x̂ − x*‖ ≤ ‖r‖_*/μ. We build r from the KKT conditions at x̂ using
//! the best normal-cone element, so the bound is linear in the residual.

use super::bisect_root;
use crate::error::{check_dim, check_finite, Result};
use crate::linalg::{dist2, dot, norm2};
use crate::prox::{Dgf, Domain, ProximalSetup};

#[derive(Clone, Debug, PartialEq)]
pub struct ReferenceProx {
    pub point: Vec<f64>,
    /// Upper bound on ‖point − Prox_z(ξ)‖_∞.
    pub dist_bound: f64,
}

pub fn reference_prox(setup: &ProximalSetup, z: &[f64], xi: &[f64]) -> Result<ReferenceProx> {
    check_dim(setup.dim(), z.len())?;
    check_dim(setup.dim(), xi.len())?;
    check_finite("ξ", xi)?;
    match setup {
        ProximalSetup::Basic { domain, dgf: Dgf::Entropy } => Ok(entropy(domain.dim(), z, xi)),
        ProximalSetup::Basic { domain, dgf: Dgf::Euclidean } => Ok(euclidean(domain, z, xi)),
        ProximalSetup::Product { x, y, beta_x, beta_y } => {
            let (zx, zy) = setup.split(z);
            let (gx, gy) = setup.split(xi);
            let gx: Vec<f64> = gx.iter().map(|v| v / beta_x).collect();
            let gy: Vec<f64> = gy.iter().map(|v| v / beta_y).collect();
            let a = reference_prox(x, zx, &gx)?;
            let b = reference_prox(y, zy, &gy)?;
            let mut point = a.point;
            point.extend(b.point);
            Ok(ReferenceProx { point, dist_bound: a.dist_bound.max(b.dist_bound) })
        }
    }
}

fn entropy(n: usize, z: &[f64], xi: &[f64]) -> ReferenceProx {
    // x_i = exp(a_i − ν) with ν solving Σ exp(a_i − ν) = 1.
    let a: Vec<f64> = (0..n).map(|i| z[i].ln() - xi[i]).collect();
    let amax = a.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mass = |nu: f64| a.iter().map(|ai| (ai - nu).exp()).sum::<f64>();
    let nu = bisect_root(amax, amax + (n as f64).ln() + 1.0, |nu| mass(nu) <= 1.0);
    let x: Vec<f64> = a.iter().map(|ai| (ai - nu).exp()).collect();
    let s: f64 = x.iter().sum();
    // Residual of ∇F = ξ + ln x − ln z against the best constant shift.
    let r: Vec<f64> = (0..n).map(|i| xi[i] + x[i].ln() - z[i].ln()).collect();
    let (lo, hi) = r.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), v| (l.min(*v), h.max(*v)));
    // μ = 1 w.r.t. ℓ₁, and ‖·‖_∞ ≤ ‖·‖₁.
    let dist_bound = 0.5 * (hi - lo) + (s - 1.0).abs() + 4.0 * f64::EPSILON;
    ReferenceProx { point: x, dist_bound }
}

fn euclidean(domain: &Domain, z: &[f64], xi: &[f64]) -> ReferenceProx {
    let n = z.len();
    let y: Vec<f64> = (0..n).map(|i| z[i] - xi[i]).collect();
    let (x, r, infeas) = match domain {
        Domain::Box { lower, upper } => {
            let x: Vec<f64> = (0..n).map(|i| y[i].max(lower[i]).min(upper[i])).collect();
            let r = (0..n)
                .map(|i| {
                    let g = xi[i] + x[i] - z[i];
                    let at_up = x[i] >= upper[i];
                    let at_lo = x[i] <= lower[i];
                    if (at_up && g < 0.0) || (at_lo && g > 0.0) {
                        0.0
                    } else {
                        g
                    }
                })
                .collect::<Vec<f64>>();
            (x, r, 0.0)
        }
        Domain::Ball { center, radius } => {
            let d = dist2(&y, center);
            let x: Vec<f64> = if d <= *radius {
                y.clone()
            } else {
                (0..n).map(|i| center[i] + (y[i] - center[i]) * (radius / d)).collect()
            };
            let g: Vec<f64> = (0..n).map(|i| xi[i] + x[i] - z[i]).collect();
            let dv: Vec<f64> = (0..n).map(|i| x[i] - center[i]).collect();
            let dn = norm2(&dv);
            let r = if dn >= radius * (1.0 - 1e-12) && dn > 0.0 {
                let lam = (-dot(&g, &dv) / (dn * dn)).max(0.0);
                (0..n).map(|i| g[i] + lam * dv[i]).collect()
            } else {
                g
            };
            (x, r, (dn - radius).max(0.0))
        }
        Domain::Simplex { .. } => {
            // Sort-based projection of y.
            let mut s = y.clone();
            s.sort_by(|a, b| b.total_cmp(a));
            let (mut cum, mut tau) = (0.0, 0.0);
            for (k, v) in s.iter().enumerate() {
                cum += v;
                let t = (cum - 1.0) / (k as f64 + 1.0);
                if v - t > 0.0 {
                    tau = t;
                }
            }
            let x: Vec<f64> = y.iter().map(|v| (v - tau).max(0.0)).collect();
            let g: Vec<f64> = (0..n).map(|i| xi[i] + x[i] - z[i]).collect();
            let sup: Vec<f64> = (0..n).filter(|&i| x[i] > 0.0).map(|i| g[i]).collect();
            let (lo, hi) = sup.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), v| (l.min(*v), h.max(*v)));
            let nu = -0.5 * (lo + hi);
            let r = (0..n).map(|i| if x[i] > 0.0 { g[i] + nu } else { (g[i] + nu).min(0.0) }).collect();
            let infeas = (x.iter().sum::<f64>() - 1.0).abs();
            (x, r, infeas)
        }
    };
    let scale = 1.0 + crate::linalg::norm_inf(z).max(crate::linalg::norm_inf(xi));
    ReferenceProx { dist_bound: norm2(&r) + infeas + 8.0 * f64::EPSILON * scale, point: x }
}
