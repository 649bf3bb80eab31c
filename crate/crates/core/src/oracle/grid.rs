//! Grid refinement for low-dimensional cross-checks (≤ 3 free coordinates).
//!
//! The reported gap assumes the minimizer stays inside the shrinking search
//! window, which holds for convex objectives with a Lipschitz constant `lip`
//! once the grid resolves the level sets; use only for cross-validation.

use super::{Certified, OracleMethod};
use crate::error::{Error, Result};
use crate::prox::Domain;

const POINTS: usize = 40;

pub fn grid_minimize(f: &dyn Fn(&[f64]) -> f64, domain: &Domain, lip: f64, accuracy: f64) -> Result<Certified> {
    // Free coordinates: the box itself, or the first n − 1 simplex weights.
    let (mut lo, mut hi, to_point): (Vec<f64>, Vec<f64>, Box<dyn Fn(&[f64]) -> Vec<f64>>) = match domain {
        Domain::Box { lower, upper } if lower.len() <= 3 => {
            let d = domain.clone();
            (lower.clone(), upper.clone(), Box::new(move |p: &[f64]| d.project(p)))
        }
        Domain::Simplex { dim } if *dim >= 2 && *dim <= 4 => {
            let d = domain.clone();
            (vec![0.0; dim - 1], vec![1.0; dim - 1], Box::new(move |p: &[f64]| {
                let mut z = p.to_vec();
                z.push(1.0 - p.iter().sum::<f64>());
                d.project(&z)
            }))
        }
        _ => return Err(Error::Unsupported("grid refinement needs a box of dim ≤ 3 or a simplex of dim ≤ 4".into())),
    };
    let (blo, bhi) = (lo.clone(), hi.clone());
    let nd = lo.len();
    let mut best = (f64::INFINITY, Vec::new(), Vec::new());
    loop {
        let h: Vec<f64> = (0..nd).map(|i| (hi[i] - lo[i]) / POINTS as f64).collect();
        let mut idx = vec![0usize; nd];
        loop {
            let p: Vec<f64> = (0..nd).map(|i| lo[i] + h[i] * idx[i] as f64).collect();
            let z = to_point(&p);
            let v = f(&z);
            if v < best.0 {
                best = (v, p, z);
            }
            let mut i = 0;
            while i < nd {
                idx[i] += 1;
                if idx[i] <= POINTS {
                    break;
                }
                idx[i] = 0;
                i += 1;
            }
            if i == nd {
                break;
            }
        }
        let hmax = h.iter().cloned().fold(0.0, f64::max);
        let err = lip * hmax * (nd as f64 + 1.0);
        if err <= accuracy || hmax < 1e-15 {
            return Ok(Certified {
                point: best.2.clone(),
                value: best.0,
                bound: best.0 - err,
                gap: err,
                method: OracleMethod::GridRefine,
                certified: err <= accuracy,
            });
        }
        for i in 0..nd {
            lo[i] = (best.1[i] - 2.0 * h[i]).max(blo[i]);
            hi[i] = (best.1[i] + 2.0 * h[i]).min(bhi[i]);
        }
    }
}
