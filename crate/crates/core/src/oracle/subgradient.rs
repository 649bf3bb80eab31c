//! Projected subgradient method with a cutting-plane certificate.
//!
//! Every subgradient g_k at x_k gives the global under-estimator
//! F(x_k) + ⟨g_k, z − x_k⟩. Any convex combination of these cuts, minimized
//! exactly over the domain, is a valid lower bound on the optimum; we use
//! the step-weighted aggregate and the best single cut.

use super::{Certified, Objective, OracleMethod};
use crate::linalg::{axpy, dot, norm2};
use crate::prox::{Domain, ProximalSetup};

fn euclidean_diameter(setup: &ProximalSetup) -> f64 {
    setup
        .blocks()
        .iter()
        .map(|(_, d)| match d {
            Domain::Simplex { .. } => 2.0,
            Domain::Ball { radius, .. } => 4.0 * radius * radius,
            Domain::Box { lower, upper } => crate::linalg::dist2(lower, upper).powi(2),
        })
        .sum::<f64>()
        .sqrt()
}

pub(super) fn minimize(f: &dyn Objective, setup: &ProximalSetup, iters: usize) -> Certified {
    let r = euclidean_diameter(setup).max(f64::MIN_POSITIVE);
    let mut x = setup.project(&setup.omega_center());
    let mut best = (f.value(&x), x.clone());
    let mut agg_g = vec![0.0; x.len()];
    let mut agg_c = 0.0;
    let mut wsum = 0.0;
    let mut best_cut = f64::NEG_INFINITY;
    for k in 0..iters.max(1) {
        let fx = f.value(&x);
        let g = f.subgradient(&x);
        if fx < best.0 {
            best = (fx, x.clone());
        }
        let gn = norm2(&g);
        let cut = fx - dot(&g, &x) + setup.linear_min(&g).0;
        best_cut = best_cut.max(cut);
        if gn == 0.0 {
            break;
        }
        let step = r / (gn * ((k + 1) as f64).sqrt());
        axpy(&mut agg_g, step, &g);
        agg_c += step * (fx - dot(&g, &x));
        wsum += step;
        let y: Vec<f64> = x.iter().zip(&g).map(|(a, b)| a - step * b).collect();
        x = setup.project(&y);
    }
    let agg = if wsum > 0.0 {
        let gbar: Vec<f64> = agg_g.iter().map(|v| v / wsum).collect();
        agg_c / wsum + setup.linear_min(&gbar).0
    } else {
        f64::NEG_INFINITY
    };
    let bound = agg.max(best_cut);
    Certified {
        point: best.1,
        value: best.0,
        bound,
        gap: best.0 - bound,
        method: OracleMethod::SubgradientAveraging,
        certified: false,
    }
}
