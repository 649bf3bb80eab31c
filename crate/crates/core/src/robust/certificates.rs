use serde::Serialize;

use super::instance::RobustInstance;
use crate::error::{check_dim, Result};
use crate::model::PwQuadratic;
use crate::oracle::OfflineOracle;
use crate::schedule::WeightSchedule;

/// Per-constraint u-regret: sup_u Σθ_t f^i(x_t, u) − Σθ_t f^i(x_t, u_t^i).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CircCertificate {
    pub value: f64,
    pub per_constraint: Vec<f64>,
    /// The true value lies in [value, value + gap].
    pub gap: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BulletForm {
    /// Regret of the x-sequence on h_t = max_i f^i(·, u_t^i).
    Max,
    /// Online saddle-point gap of φ_t(x, y) = Σ_i y_i f^i(x, u_t^i) over X × Δ_m.
    Y,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BulletCertificate {
    pub value: f64,
    pub form: BulletForm,
    pub gap: f64,
}

fn check_lengths(inst: &RobustInstance, xs: &[Vec<f64>], us: &[Vec<Vec<f64>>], w: &WeightSchedule) -> Result<()> {
    check_dim(w.horizon(), xs.len())?;
    check_dim(w.horizon(), us.len())?;
    for u in us {
        check_dim(inst.m, u.len())?;
    }
    Ok(())
}

/// max_i Σθ_t f^i(x_t, u_t^i).
pub fn max_term(inst: &RobustInstance, xs: &[Vec<f64>], us: &[Vec<Vec<f64>>], w: &WeightSchedule) -> f64 {
    (0..inst.m)
        .map(|i| played(inst, i, xs, us, w))
        .fold(f64::NEG_INFINITY, f64::max)
}

fn played(inst: &RobustInstance, i: usize, xs: &[Vec<f64>], us: &[Vec<Vec<f64>>], w: &WeightSchedule) -> f64 {
    let th = w.values();
    (0..xs.len()).map(|t| th[t] * inst.value(i, &xs[t], &us[t][i])).sum()
}

pub fn eps_circ(
    inst: &RobustInstance,
    xs: &[Vec<f64>],
    us: &[Vec<Vec<f64>>],
    w: &WeightSchedule,
    oracle: &OfflineOracle,
) -> Result<CircCertificate> {
    check_lengths(inst, xs, us, w)?;
    let th = w.values();
    let mut per = Vec::with_capacity(inst.m);
    let mut gap = 0.0f64;
    for (i, c) in inst.constraints.iter().enumerate() {
        let mut neg = PwQuadratic::zero(inst.u_domains[i].dim());
        for (t, x) in xs.iter().enumerate() {
            if th[t] != 0.0 {
                neg.add_scaled(th[t], &c.neg_u_section(x));
            }
        }
        let sup = oracle
            .maximize_concave(&neg, &inst.u_domains[i])
            .map_err(|e| crate::Error::Solver(format!("constraint {i}: {e}")))?;
        per.push(sup.value - played(inst, i, xs, us, w));
        gap = gap.max(sup.gap);
    }
    let value = per.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Ok(CircCertificate { value, per_constraint: per, gap })
}

/// Max-form x certificate.
pub fn eps_bullet(
    inst: &RobustInstance,
    xs: &[Vec<f64>],
    us: &[Vec<Vec<f64>>],
    w: &WeightSchedule,
    oracle: &OfflineOracle,
) -> Result<BulletCertificate> {
    check_lengths(inst, xs, us, w)?;
    let th = w.values();
    let n = inst.n;
    let mut agg = PwQuadratic::zero(n);
    agg.hess_diag = vec![inst.constraints[0].alpha_x; n];
    let mut played = 0.0;
    for t in 0..xs.len() {
        let pieces: Vec<_> = inst.constraints.iter().enumerate().flat_map(|(i, c)| c.x_pieces(&us[t][i])).collect();
        let h_t = PwQuadratic { hess_diag: agg.hess_diag.clone(), lin: vec![0.0; n], constant: 0.0, max_terms: vec![pieces] };
        played += th[t] * h_t.value(&xs[t]);
        if th[t] != 0.0 {
            agg.max_terms.push(h_t.max_terms[0].iter().map(|p| p.scaled(th[t])).collect());
        }
    }
    let inf = oracle.minimize_structured(&agg, &inst.x_domain).map_err(|e| crate::Error::Solver(format!("ε• (max form): {e}")))?;
    Ok(BulletCertificate { value: played - inf.value, form: BulletForm::Max, gap: inf.gap })
}

/// y-form x certificate: sup_y Σθ_t φ_t(x_t, y) − inf_x Σθ_t φ_t(x, y_t).
pub fn eps_bullet_y(
    inst: &RobustInstance,
    xs: &[Vec<f64>],
    us: &[Vec<Vec<f64>>],
    ys: &[Vec<f64>],
    w: &WeightSchedule,
    oracle: &OfflineOracle,
) -> Result<BulletCertificate> {
    check_lengths(inst, xs, us, w)?;
    check_dim(w.horizon(), ys.len())?;
    let th = w.values();
    let mut agg = PwQuadratic::zero(inst.n);
    for t in 0..xs.len() {
        check_dim(inst.m, ys[t].len())?;
        for (i, c) in inst.constraints.iter().enumerate() {
            let s = th[t] * ys[t][i];
            if s != 0.0 {
                agg.add_scaled(s, &c.x_section(&us[t][i]));
            }
        }
    }
    // sup over the simplex of a linear function of y.
    let sup = max_term(inst, xs, us, w);
    let inf = oracle.minimize_structured(&agg, &inst.x_domain).map_err(|e| crate::Error::Solver(format!("ε• (y form): {e}")))?;
    Ok(BulletCertificate { value: sup - inf.value, form: BulletForm::Y, gap: inf.gap })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prox::ProximalSetup;
    use crate::robust::instance::{Constraint, RobustConstants};

    fn bilinear_unit(n: usize) -> RobustInstance {
        let a = (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
        RobustInstance {
            m: 1,
            n,
            x_domain: ProximalSetup::euclidean_ball(n, 2.0),
            u_domains: vec![ProximalSetup::euclidean_ball(n, 1.0)],
            constraints: vec![Constraint {
                kind: "bilinear-quadratic".into(),
                a,
                c: vec![0.0; n],
                b: 0.0,
                alpha_x: 0.0,
                alpha_u: 0.0,
                pieces: vec![],
            }],
            constants: RobustConstants { g_x: 1.0, g_u: 2.0, ..Default::default() },
        }
    }

    #[test]
    fn circ_linear_over_ball() {
        let inst = bilinear_unit(3);
        let x = vec![0.3, -1.2, 0.4];
        let c = eps_circ(&inst, &[x.clone()], &[vec![vec![0.0; 3]]], &WeightSchedule::uniform(1), &OfflineOracle::default()).unwrap();
        assert!((c.value - crate::linalg::norm2(&x)).abs() < 1e-12);
    }

    #[test]
    fn circ_zero_at_best_response() {
        let inst = bilinear_unit(2);
        let x = vec![0.6, 0.8];
        let u = vec![vec![0.6, 0.8]];
        let c = eps_circ(&inst, &[x.clone(), x], &[u.clone(), u], &WeightSchedule::uniform(2), &OfflineOracle::default()).unwrap();
        assert!(c.value.abs() < 1e-12);
    }

    #[test]
    fn bullet_single_function_gap() {
        let mut inst = bilinear_unit(2);
        inst.constraints[0].alpha_x = 1.0;
        let u = vec![0.5, -0.5];
        let x = vec![1.0, 1.0];
        let b = eps_bullet(&inst, &[x.clone()], &[vec![u.clone()]], &WeightSchedule::uniform(1), &OfflineOracle::default()).unwrap();
        // f(x, u) = ⟨u, x⟩ + ½‖x‖², minimized at x = −u.
        let expect = inst.value(0, &x, &u) - inst.value(0, &[-0.5, 0.5], &u);
        assert!((b.value - expect).abs() < 1e-12);
        let y = eps_bullet_y(&inst, &[x], &[vec![u]], &[vec![1.0]], &WeightSchedule::uniform(1), &OfflineOracle::default()).unwrap();
        assert!((y.value - expect).abs() < 1e-12);
    }

    #[test]
    fn bullet_zero_at_minimizer() {
        let mut inst = bilinear_unit(2);
        inst.constraints[0].alpha_x = 2.0;
        let u = vec![vec![0.4, 0.2]];
        let xstar = vec![-0.2, -0.1];
        let b = eps_bullet(&inst, &[xstar.clone(), xstar], &[u.clone(), u], &WeightSchedule::increasing(2), &OfflineOracle::default()).unwrap();
        assert!(b.value.abs() < 1e-12);
    }
}
