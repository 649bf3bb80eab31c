use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

use crate::linalg::{dist2, dot, norm2};

/// Compact convex domains with closed-form projections and linear oracles.
#[derive(Clone, Debug, PartialEq)]
pub enum Domain {
    /// Probability simplex in R^dim.
    Simplex { dim: usize },
    /// Euclidean ball ‖z − center‖₂ ≤ radius.
    Ball { center: Vec<f64>, radius: f64 },
    /// Axis-aligned box lower ≤ z ≤ upper.
    Box { lower: Vec<f64>, upper: Vec<f64> },
}

impl Domain {
    pub fn simplex(dim: usize) -> Self {
        Domain::Simplex { dim }
    }

    pub fn ball(dim: usize, radius: f64) -> Self {
        Domain::Ball { center: vec![0.0; dim], radius }
    }

    pub fn dim(&self) -> usize {
        match self {
            Domain::Simplex { dim } => *dim,
            Domain::Ball { center, .. } => center.len(),
            Domain::Box { lower, .. } => lower.len(),
        }
    }

    pub fn contains(&self, z: &[f64], tol: f64) -> bool {
        if z.len() != self.dim() || z.iter().any(|v| !v.is_finite()) {
            return false;
        }
        match self {
            Domain::Simplex { .. } => {
                z.iter().all(|&v| v >= -tol) && (z.iter().sum::<f64>() - 1.0).abs() <= tol
            }
            Domain::Ball { center, radius } => dist2(z, center) <= radius + tol,
            Domain::Box { lower, upper } => {
                z.iter().zip(lower.iter().zip(upper)).all(|(v, (l, u))| *v >= l - tol && *v <= u + tol)
            }
        }
    }

    /// Euclidean projection.
    pub fn project(&self, z: &[f64]) -> Vec<f64> {
        match self {
            Domain::Simplex { dim } => {
                let w: Vec<f64> = z.iter().map(|v| -v).collect();
                self.min_diag_quadratic(&vec![1.0; *dim], &w)
            }
            Domain::Ball { center, radius } => {
                let d = dist2(z, center);
                if d <= *radius {
                    z.to_vec()
                } else {
                    let s = radius / d;
                    z.iter().zip(center).map(|(v, c)| c + s * (v - c)).collect()
                }
            }
            Domain::Box { lower, upper } => {
                z.iter().zip(lower.iter().zip(upper)).map(|(v, (l, u))| v.clamp(*l, *u)).collect()
            }
        }
    }

    /// Maximizer and value of ⟨g, z⟩ over the domain.
    pub fn linear_max(&self, g: &[f64]) -> (f64, Vec<f64>) {
        let z = match self {
            Domain::Simplex { dim } => {
                let i = crate::linalg::argmax(g);
                let mut e = vec![0.0; *dim];
                e[i] = 1.0;
                e
            }
            Domain::Ball { center, radius } => {
                let n = norm2(g);
                if n == 0.0 {
                    center.clone()
                } else {
                    center.iter().zip(g).map(|(c, gi)| c + radius * gi / n).collect()
                }
            }
            Domain::Box { lower, upper } => g
                .iter()
                .zip(lower.iter().zip(upper))
                .map(|(gi, (l, u))| if *gi > 0.0 { *u } else { *l })
                .collect(),
        };
        (dot(g, &z), z)
    }

    /// Minimizer and value of ⟨g, z⟩ over the domain.
    pub fn linear_min(&self, g: &[f64]) -> (f64, Vec<f64>) {
        let neg: Vec<f64> = g.iter().map(|v| -v).collect();
        let (v, z) = self.linear_max(&neg);
        (-v, z)
    }

    /// Exact minimizer of ½Σ h_i z_i² + ⟨w, z⟩ over the domain, h ≥ 0.
    pub fn min_diag_quadratic(&self, h: &[f64], w: &[f64]) -> Vec<f64> {
        debug_assert!(h.iter().all(|v| *v >= 0.0));
        match self {
            Domain::Box { lower, upper } => (0..w.len())
                .map(|i| {
                    if h[i] > 0.0 {
                        (-w[i] / h[i]).clamp(lower[i], upper[i])
                    } else if w[i] > 0.0 {
                        lower[i]
                    } else if w[i] < 0.0 {
                        upper[i]
                    } else {
                        0.0_f64.clamp(lower[i], upper[i])
                    }
                })
                .collect(),
            Domain::Ball { center, radius } => ball_diag_quadratic(center, *radius, h, w),
            Domain::Simplex { .. } => simplex_diag_quadratic(h, w),
        }
    }

    /// A random point; strictly positive on the simplex.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        match self {
            Domain::Simplex { dim } => {
                let e: Vec<f64> = (0..*dim).map(|_| Exp1.sample(rng)).collect::<Vec<f64>>();
                let e: Vec<f64> = e.iter().map(|v: &f64| v.max(1e-12)).collect();
                let s: f64 = e.iter().sum();
                e.iter().map(|v| v / s).collect()
            }
            Domain::Ball { center, radius } => {
                let n = center.len();
                let g: Vec<f64> = (0..n).map(|_| StandardNormal.sample(rng)).collect();
                let gn = norm2(&g).max(1e-300);
                let r = radius * rng.random::<f64>().powf(1.0 / n as f64);
                center.iter().zip(&g).map(|(c, gi)| c + r * gi / gn).collect()
            }
            Domain::Box { lower, upper } => lower
                .iter()
                .zip(upper)
                .map(|(l, u)| l + (u - l) * rng.random::<f64>())
                .collect(),
        }
    }
}

/// Bisection to machine precision on a monotone predicate: returns the
/// boundary point of `[lo, hi]` where `pred` switches from false to true.
pub(crate) fn bisect(mut lo: f64, mut hi: f64, pred: impl Fn(f64) -> bool) -> f64 {
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if pred(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

fn ball_diag_quadratic(c: &[f64], r: f64, h: &[f64], w: &[f64]) -> Vec<f64> {
    let n = c.len();
    // Stationarity h z + w + μ (z − c) = 0, so z(μ) − c = −(w + h c)/(h + μ).
    let q: Vec<f64> = (0..n).map(|i| w[i] + h[i] * c[i]).collect();
    let unbounded = (0..n).any(|i| h[i] == 0.0 && q[i] != 0.0);
    if !unbounded {
        let z: Vec<f64> = (0..n).map(|i| if h[i] > 0.0 { -w[i] / h[i] } else { c[i] }).collect();
        if dist2(&z, c) <= r {
            return z;
        }
    }
    let radius_at = |mu: f64| -> f64 {
        (0..n).map(|i| (q[i] / (h[i] + mu)).powi(2)).sum::<f64>().sqrt()
    };
    let hi = norm2(&q) / r * (1.0 + 1e-12) + f64::MIN_POSITIVE;
    let mu = bisect(0.0, hi, |mu| radius_at(mu) <= r);
    let d: Vec<f64> = (0..n).map(|i| -q[i] / (h[i] + mu)).collect();
    let dn = norm2(&d);
    let s = if dn > r { r / dn } else { 1.0 };
    (0..n).map(|i| c[i] + s * d[i]).collect()
}

fn simplex_diag_quadratic(h: &[f64], w: &[f64]) -> Vec<f64> {
    let n = w.len();
    let mut z = vec![0.0; n];
    // KKT: z_i = max(0, (ν − w_i)/h_i) where h_i > 0; zero-curvature
    // coordinates may be positive only when w_i = ν = min over them.
    let flat = (0..n).filter(|&i| h[i] == 0.0).min_by(|&a, &b| w[a].total_cmp(&w[b]));
    let w_flat = flat.map_or(f64::INFINITY, |i| w[i]);
    let mut curved: Vec<usize> = (0..n).filter(|&i| h[i] > 0.0).collect();
    curved.sort_by(|&a, &b| w[a].total_cmp(&w[b]));

    // S(ν) = Σ_{i active} (ν − w_i)/h_i is piecewise linear; walk the breakpoints.
    let mut nu = f64::INFINITY;
    let (mut a, mut b) = (0.0, 0.0);
    for (k, &i) in curved.iter().enumerate() {
        a += 1.0 / h[i];
        b += w[i] / h[i];
        let cand = (1.0 + b) / a;
        let next = curved.get(k + 1).map_or(f64::INFINITY, |&j| w[j]);
        if cand <= next {
            nu = cand;
            break;
        }
    }
    if nu > w_flat {
        nu = w_flat;
    }
    let mut mass = 0.0;
    for &i in &curved {
        z[i] = ((nu - w[i]) / h[i]).max(0.0);
        mass += z[i];
    }
    if let Some(j) = flat {
        if nu == w_flat {
            z[j] = (1.0 - mass).max(0.0);
        }
    }
    // Remove rounding drift so the output sums to one.
    let s: f64 = z.iter().sum();
    if s > 0.0 {
        for v in &mut z {
            *v /= s;
        }
    }
    z
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn simplex_projection_matches_sort_based_formula() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(3);
        let d = Domain::simplex(6);
        for _ in 0..200 {
            let y: Vec<f64> = (0..6).map(|_| rng.random::<f64>() * 4.0 - 2.0).collect();
            let p = d.project(&y);
            let mut s = y.clone();
            s.sort_by(|a, b| b.total_cmp(a));
            let mut cum = 0.0;
            let mut tau = 0.0;
            for (k, v) in s.iter().enumerate() {
                cum += v;
                let t = (cum - 1.0) / (k as f64 + 1.0);
                if v - t > 0.0 {
                    tau = t;
                }
            }
            for i in 0..6 {
                assert!((p[i] - (y[i] - tau).max(0.0)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn ball_quadratic_lands_on_boundary_when_needed() {
        let d = Domain::ball(2, 1.0);
        let z = d.min_diag_quadratic(&[1.0, 4.0], &[-3.0, -8.0]);
        assert!((norm2(&z) - 1.0).abs() < 1e-12);
        // KKT: gradient is a nonpositive multiple of z.
        let g = [z[0] - 3.0, 4.0 * z[1] - 8.0];
        let cross = g[0] * z[1] - g[1] * z[0];
        assert!(cross.abs() < 1e-9 && dot(&g, &z) < 0.0);
    }

    #[test]
    fn zero_curvature_simplex_goes_to_best_vertex() {
        let d = Domain::simplex(3);
        let z = d.min_diag_quadratic(&[0.0, 0.0, 0.0], &[0.3, -1.0, 0.2]);
        assert_eq!(z, vec![0.0, 1.0, 0.0]);
        let z = d.min_diag_quadratic(&[1.0, 0.0, 1.0], &[0.0, 0.5, 0.0]);
        assert!((z[0] - 0.5).abs() < 1e-15 && (z[2] - 0.5).abs() < 1e-15 && z[1] == 0.0);
    }
}
