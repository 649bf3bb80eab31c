//! Epigraph reformulation of a structured objective solved by Clarabel.
//!
//! min ½xᵀHx + gᵀx + Σ_k s_k  s.t.  ⟨a_kj, x⟩ + b_kj ≤ s_k,  x ∈ X.

use clarabel::algebra::CscMatrix;
use clarabel::solver::{DefaultSettingsBuilder, DefaultSolver, IPSolver, SupportedConeT};

use super::{lagrangian_bound, Certified, OracleMethod};
use crate::error::{Error, Result};
use crate::model::PwQuadratic;
use crate::prox::{Domain, ProximalSetup};

#[derive(Default)]
struct Rows {
    i: Vec<usize>,
    j: Vec<usize>,
    v: Vec<f64>,
    b: Vec<f64>,
}

impl Rows {
    fn push(&mut self, entries: impl IntoIterator<Item = (usize, f64)>, rhs: f64) {
        let r = self.b.len();
        for (col, val) in entries {
            if val != 0.0 {
                self.i.push(r);
                self.j.push(col);
                self.v.push(val);
            }
        }
        self.b.push(rhs);
    }

    fn append(&mut self, other: Rows) {
        let off = self.b.len();
        self.i.extend(other.i.iter().map(|r| r + off));
        self.j.extend(other.j);
        self.v.extend(other.v);
        self.b.extend(other.b);
    }
}

pub(super) fn minimize(f: &PwQuadratic, setup: &ProximalSetup, accuracy: f64) -> Result<Certified> {
    let n = f.dim();
    let k = f.max_terms.len();
    let nv = n + k;

    let mut zero = Rows::default();
    let mut nonneg = Rows::default();
    let mut socs: Vec<Rows> = Vec::new();

    // Epigraph rows first so their duals are easy to find.
    for (t, term) in f.max_terms.iter().enumerate() {
        for p in term {
            nonneg.push(p.a.iter().cloned().enumerate().chain([(n + t, -1.0)]), -p.b);
        }
    }
    let n_epi = nonneg.b.len();
    for (off, d) in setup.blocks() {
        match d {
            Domain::Simplex { dim } => {
                zero.push((off..off + dim).map(|c| (c, 1.0)), 1.0);
                for c in off..off + dim {
                    nonneg.push([(c, -1.0)], 0.0);
                }
            }
            Domain::Box { lower, upper } => {
                for (i, (l, u)) in lower.iter().zip(upper).enumerate() {
                    nonneg.push([(off + i, 1.0)], *u);
                    nonneg.push([(off + i, -1.0)], -l);
                }
            }
            Domain::Ball { center, radius } => {
                let mut r = Rows::default();
                r.push([], *radius);
                for (i, c) in center.iter().enumerate() {
                    r.push([(off + i, -1.0)], -c);
                }
                socs.push(r);
            }
        }
    }

    let mut cones = Vec::new();
    let mut rows = Rows::default();
    if !zero.b.is_empty() {
        cones.push(SupportedConeT::ZeroConeT(zero.b.len()));
        rows.append(zero);
    }
    let epi_start = rows.b.len();
    cones.push(SupportedConeT::NonnegativeConeT(nonneg.b.len()));
    rows.append(nonneg);
    for s in socs {
        cones.push(SupportedConeT::SecondOrderConeT(s.b.len()));
        rows.append(s);
    }

    let (pi, pv): (Vec<usize>, Vec<f64>) = f.hess_diag.iter().cloned().enumerate().filter(|(_, h)| *h != 0.0).unzip();
    let p = CscMatrix::new_from_triplets(nv, nv, pi.clone(), pi, pv);
    let mut q = f.lin.clone();
    q.extend(std::iter::repeat_n(1.0, k));
    let a = CscMatrix::new_from_triplets(rows.b.len(), nv, rows.i, rows.j, rows.v);

    let settings = DefaultSettingsBuilder::default()
        .verbose(false)
        .max_iter(400)
        .tol_gap_abs(1e-13)
        .tol_gap_rel(1e-13)
        .tol_feas(1e-12)
        .tol_ktratio(1e-10)
        .presolve_enable(false)
        .build()
        .map_err(|e| Error::Solver(format!("{e:?}")))?;
    let mut solver = DefaultSolver::new(&p, &q, &a, &rows.b, &cones, settings).map_err(|e| Error::Solver(format!("{e:?}")))?;
    solver.solve();
    let sol = &solver.solution;
    if sol.x.iter().take(n).any(|v| !v.is_finite()) {
        return Err(Error::Solver(format!("conic solve returned non-finite point ({:?})", sol.status)));
    }

    // Normalized multipliers of the epigraph rows.
    let mut lambda = Vec::with_capacity(k);
    let mut r = epi_start;
    for term in &f.max_terms {
        let raw: Vec<f64> = sol.z[r..r + term.len()].iter().map(|v| if v.is_finite() { v.max(0.0) } else { 0.0 }).collect();
        r += term.len();
        let s: f64 = raw.iter().sum();
        lambda.push(if s > 0.0 { raw.iter().map(|v| v / s).collect() } else { vec![1.0 / term.len() as f64; term.len()] });
    }
    debug_assert_eq!(r - epi_start, n_epi);

    let (bound, x_dual) = lagrangian_bound(f, setup, &lambda);
    let x_primal = setup.project(&sol.x[..n]);
    let (vp, vd) = (f.value(&x_primal), f.value(&x_dual));
    let (point, value) = if vd < vp { (x_dual, vd) } else { (x_primal, vp) };
    Ok(Certified { point, value, bound, gap: value - bound, method: OracleMethod::Conic, certified: value - bound <= accuracy })
}
