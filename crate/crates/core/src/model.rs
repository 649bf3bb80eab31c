//! Structured convex functions shared by the streams, instances and the
//! offline oracle.

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, check_finite, Error, Result};
use crate::linalg::{axpy, dot, matvec, matvec_t};

/// Affine piece ⟨a, x⟩ + b.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Affine {
    pub a: Vec<f64>,
    pub b: f64,
}

impl Affine {
    pub fn new(a: Vec<f64>, b: f64) -> Self {
        Affine { a, b }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        dot(&self.a, x) + self.b
    }

    pub fn scaled(&self, s: f64) -> Self {
        Affine { a: self.a.iter().map(|v| s * v).collect(), b: s * self.b }
    }
}

/// f(x) = ½ Σ h_i x_i² + ⟨g, x⟩ + c + Σ_k max_j (⟨a_kj, x⟩ + b_kj), with h ≥ 0.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PwQuadratic {
    pub hess_diag: Vec<f64>,
    pub lin: Vec<f64>,
    #[serde(default)]
    pub constant: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub max_terms: Vec<Vec<Affine>>,
}

impl PwQuadratic {
    pub fn zero(n: usize) -> Self {
        PwQuadratic { hess_diag: vec![0.0; n], lin: vec![0.0; n], constant: 0.0, max_terms: Vec::new() }
    }

    pub fn linear(lin: Vec<f64>, constant: f64) -> Self {
        let n = lin.len();
        PwQuadratic { hess_diag: vec![0.0; n], lin, constant, max_terms: Vec::new() }
    }

    /// ½ Σ h_i (x_i − c_i)².
    pub fn separable_distance(h: Vec<f64>, center: &[f64]) -> Self {
        let lin = h.iter().zip(center).map(|(hi, ci)| -hi * ci).collect();
        let constant = 0.5 * h.iter().zip(center).map(|(hi, ci)| hi * ci * ci).sum::<f64>();
        PwQuadratic { hess_diag: h, lin, constant, max_terms: Vec::new() }
    }

    /// max_j ⟨a_j, x⟩ + b_j.
    pub fn max_affine(pieces: Vec<Affine>) -> Self {
        let n = pieces.first().map_or(0, |p| p.a.len());
        let mut f = Self::zero(n);
        f.max_terms.push(pieces);
        f
    }

    pub fn dim(&self) -> usize {
        self.lin.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.dim();
        check_dim(n, self.hess_diag.len())?;
        check_finite("hess_diag", &self.hess_diag)?;
        check_finite("lin", &self.lin)?;
        if self.hess_diag.iter().any(|h| *h < 0.0) {
            return Err(Error::InvalidParameter("diagonal curvature must be nonnegative".into()));
        }
        for term in &self.max_terms {
            if term.is_empty() {
                return Err(Error::InvalidParameter("empty max term".into()));
            }
            for p in term {
                check_dim(n, p.a.len())?;
                check_finite("max-term slope", &p.a)?;
            }
        }
        Ok(())
    }

    pub fn is_smooth(&self) -> bool {
        self.max_terms.iter().all(|t| t.len() <= 1)
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        let mut v = self.constant + dot(&self.lin, x);
        v += 0.5 * self.hess_diag.iter().zip(x).map(|(h, xi)| h * xi * xi).sum::<f64>();
        for term in &self.max_terms {
            v += term.iter().map(|p| p.eval(x)).fold(f64::NEG_INFINITY, f64::max);
        }
        v
    }

    /// A subgradient; ties in a max term go to the first maximizing piece.
    pub fn subgradient(&self, x: &[f64]) -> Vec<f64> {
        let mut g: Vec<f64> = (0..x.len()).map(|i| self.hess_diag[i] * x[i] + self.lin[i]).collect();
        for term in &self.max_terms {
            let vals: Vec<f64> = term.iter().map(|p| p.eval(x)).collect();
            axpy(&mut g, 1.0, &term[crate::linalg::argmax(&vals)].a);
        }
        g
    }

    pub fn scaled(&self, s: f64) -> Self {
        debug_assert!(s >= 0.0);
        PwQuadratic {
            hess_diag: self.hess_diag.iter().map(|v| v * s).collect(),
            lin: self.lin.iter().map(|v| v * s).collect(),
            constant: self.constant * s,
            max_terms: self
                .max_terms
                .iter()
                .map(|t| t.iter().map(|p| Affine { a: p.a.iter().map(|v| v * s).collect(), b: p.b * s }).collect())
                .collect(),
        }
    }

    /// self += s · other.
    pub fn add_scaled(&mut self, s: f64, other: &PwQuadratic) {
        axpy(&mut self.hess_diag, s, &other.hess_diag);
        axpy(&mut self.lin, s, &other.lin);
        self.constant += s * other.constant;
        // Single-piece max terms are affine and fold into the linear part.
        for term in &other.max_terms {
            if term.len() == 1 {
                axpy(&mut self.lin, s, &term[0].a);
                self.constant += s * term[0].b;
            } else {
                self.max_terms.push(
                    term.iter().map(|p| Affine { a: p.a.iter().map(|v| v * s).collect(), b: p.b * s }).collect(),
                );
            }
        }
    }

    /// Σ_t w_t f_t.
    pub fn weighted_sum<'a>(fs: impl IntoIterator<Item = (f64, &'a PwQuadratic)>, n: usize) -> Self {
        let mut acc = PwQuadratic::zero(n);
        for (w, f) in fs {
            if w != 0.0 {
                acc.add_scaled(w, f);
            }
        }
        acc
    }

    pub fn min_curvature(&self) -> f64 {
        self.hess_diag.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn max_curvature(&self) -> f64 {
        self.hess_diag.iter().cloned().fold(0.0, f64::max)
    }
}

/// φ(x, y) = ⟨x, A y⟩ + ⟨b_x, x⟩ + ⟨b_y, y⟩, with A stored row-major (dim x × dim y).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bilinear {
    pub a: Vec<Vec<f64>>,
    #[serde(default)]
    pub bx: Vec<f64>,
    #[serde(default)]
    pub by: Vec<f64>,
}

impl Bilinear {
    pub fn new(a: Vec<Vec<f64>>) -> Self {
        let (nx, ny) = (a.len(), a.first().map_or(0, Vec::len));
        Bilinear { a, bx: vec![0.0; nx], by: vec![0.0; ny] }
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.a.len(), self.a.first().map_or(0, Vec::len))
    }

    pub fn validate(&self) -> Result<()> {
        let (nx, ny) = self.dims();
        for row in &self.a {
            check_dim(ny, row.len())?;
            check_finite("game matrix", row)?;
        }
        check_dim(nx, self.bx.len())?;
        check_dim(ny, self.by.len())?;
        Ok(())
    }

    pub fn value(&self, x: &[f64], y: &[f64]) -> f64 {
        dot(x, &matvec(&self.a, y)) + dot(&self.bx, x) + dot(&self.by, y)
    }

    /// ∇_x φ = A y + b_x.
    pub fn grad_x(&self, y: &[f64]) -> Vec<f64> {
        let mut g = matvec(&self.a, y);
        axpy(&mut g, 1.0, &self.bx);
        g
    }

    /// ∇_y φ = Aᵀ x + b_y.
    pub fn grad_y(&self, x: &[f64]) -> Vec<f64> {
        let mut g = matvec_t(&self.a, x);
        axpy(&mut g, 1.0, &self.by);
        g
    }

    /// F(x, y) = [A y + b_x; −(Aᵀ x + b_y)].
    pub fn operator(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        let mut f = self.grad_x(y);
        f.extend(self.grad_y(x).into_iter().map(|v| -v));
        f
    }

    /// Largest singular value via power iteration on AᵀA (upper-rounded).
    pub fn spectral_norm(&self) -> f64 {
        let (_, ny) = self.dims();
        if ny == 0 {
            return 0.0;
        }
        let mut v = vec![1.0 / (ny as f64).sqrt(); ny];
        let mut s = 0.0;
        for _ in 0..500 {
            let w = matvec_t(&self.a, &matvec(&self.a, &v));
            let n = crate::linalg::norm2(&w);
            if n == 0.0 {
                return 0.0;
            }
            s = n.sqrt();
            v = w.iter().map(|x| x / n).collect();
        }
        s * (1.0 + 1e-9)
    }

    /// Largest |a_ij|: the Lipschitz constant of F in the ℓ₁/ℓ∞ geometry.
    pub fn max_abs(&self) -> f64 {
        self.a.iter().flatten().fold(0.0, |m, v| m.max(v.abs()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subgradient_inequality_on_samples() {
        let f = PwQuadratic {
            hess_diag: vec![1.0, 0.0],
            lin: vec![0.5, -1.0],
            constant: 0.2,
            max_terms: vec![vec![Affine::new(vec![1.0, 2.0], 0.0), Affine::new(vec![-1.0, 0.5], 0.3)]],
        };
        let pts = [[0.0, 0.0], [1.0, -1.0], [-0.3, 0.7], [2.0, 2.0]];
        for x in &pts {
            let g = f.subgradient(x);
            for y in &pts {
                let lin = f.value(x) + dot(&g, &crate::linalg::sub(y, x));
                assert!(f.value(y) >= lin - 1e-12);
            }
        }
    }

    #[test]
    fn weighted_sum_matches_pointwise() {
        let f = PwQuadratic::separable_distance(vec![1.0, 2.0], &[0.5, -0.5]);
        let g = PwQuadratic::max_affine(vec![Affine::new(vec![1.0, 0.0], 0.0), Affine::new(vec![0.0, 1.0], 0.1)]);
        let s = PwQuadratic::weighted_sum([(0.3, &f), (0.7, &g)], 2);
        let x = [0.2, 0.9];
        assert!((s.value(&x) - (0.3 * f.value(&x) + 0.7 * g.value(&x))).abs() < 1e-15);
    }
}
