use ocokit::engine::mirror_descent;
use ocokit::jeo::{Estimator, StreamSpec};
use ocokit::linalg::{dot, norm2, sub};
use ocokit::model::{Affine, PwQuadratic};
use ocokit::schedule::{StepKind, StepParams, StepSchedule, WeightSchedule};
use ocokit::{Domain, OfflineOracle, ProximalSetup};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn setups() -> impl Strategy<Value = ProximalSetup> {
    prop_oneof![
        (2usize..8).prop_map(ProximalSetup::entropy_simplex),
        (1usize..6, 0.5f64..3.0).prop_map(|(n, r)| ProximalSetup::euclidean_ball(n, r)),
        (1usize..5).prop_map(|n| ProximalSetup::euclidean(Domain::Box { lower: vec![-1.0; n], upper: vec![0.5; n] })),
        (2usize..5, 2usize..5).prop_map(|(n, m)| ProximalSetup::hybrid(ProximalSetup::euclidean_ball(n, 1.0), m).unwrap()),
    ]
}

/// An interior point: a prox step from the ω-center, so entropy coordinates stay positive.
fn interior(s: &ProximalSetup, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let xi: Vec<f64> = (0..s.dim()).map(|_| rand::Rng::random_range(rng, -3.0..3.0)).collect();
    s.prox(&s.omega_center(), &xi).unwrap()
}

fn vec_in(n: usize, lo: f64, hi: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..n).map(|_| rand::Rng::random_range(rng, lo..hi)).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn bregman_dominates_half_squared_norm(s in setups(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let z = interior(&s, &mut rng);
        let zp = s.sample(&mut rng);
        let v = s.bregman(&z, &zp).unwrap();
        let q = 0.5 * s.norm(&sub(&z, &zp)).powi(2);
        prop_assert!(v >= q - 1e-10 * q.max(1.0), "V = {v}, ½‖·‖² = {q}");
    }

    #[test]
    fn prox_satisfies_first_order_condition(s in setups(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let z = interior(&s, &mut rng);
        let xi = vec_in(s.dim(), -5.0, 5.0, &mut rng);
        let zp = s.prox(&z, &xi).unwrap();
        let gz = s.grad_omega(&z).unwrap();
        let gp = s.grad_omega(&zp).unwrap();
        let d: Vec<f64> = (0..s.dim()).map(|i| xi[i] + gp[i] - gz[i]).collect();
        for _ in 0..20 {
            let u = s.sample(&mut rng);
            prop_assert!(dot(&d, &sub(&u, &zp)) >= -1e-8);
        }
    }

    #[test]
    fn simplex_prox_is_a_positive_distribution(n in 2usize..12, seed in any::<u64>()) {
        let s = ProximalSetup::entropy_simplex(n);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let z = interior(&s, &mut rng);
        let zp = s.prox(&z, &vec_in(n, -30.0, 30.0, &mut rng)).unwrap();
        prop_assert!((zp.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        prop_assert!(zp.iter().all(|v| *v > 0.0));
    }

    #[test]
    fn product_prox_is_blockwise(n in 1usize..5, m in 2usize..6, bx in 0.1f64..4.0, by in 0.1f64..4.0, seed in any::<u64>()) {
        let (sx, sy) = (ProximalSetup::euclidean_ball(n, 1.5), ProximalSetup::entropy_simplex(m));
        let p = ProximalSetup::product(sx.clone(), sy.clone(), bx, by).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let z = interior(&p, &mut rng);
        let xi = vec_in(n + m, -4.0, 4.0, &mut rng);
        let out = p.prox(&z, &xi).unwrap();
        let (zx, zy) = p.split(&z);
        let (ax, ay) = p.split(&xi);
        let mut expect = sx.prox(zx, &ax.iter().map(|v| v / bx).collect::<Vec<_>>()).unwrap();
        expect.extend(sy.prox(zy, &ay.iter().map(|v| v / by).collect::<Vec<_>>()).unwrap());
        prop_assert_eq!(out, expect);
    }

    #[test]
    fn structured_subgradient_inequality(n in 1usize..6, k in 1usize..5, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = PwQuadratic {
            hess_diag: vec_in(n, 0.0, 2.0, &mut rng),
            lin: vec_in(n, -1.0, 1.0, &mut rng),
            constant: 0.3,
            max_terms: vec![(0..k).map(|_| Affine::new(vec_in(n, -1.0, 1.0, &mut rng), rand::Rng::random_range(&mut rng, -1.0..1.0))).collect()],
        };
        let s = ProximalSetup::euclidean_ball(n, 2.0);
        for _ in 0..20 {
            let (x, xp) = (s.sample(&mut rng), s.sample(&mut rng));
            let g = f.subgradient(&x);
            prop_assert!(f.value(&xp) >= f.value(&x) + dot(&g, &sub(&xp, &x)) - 1e-8);
        }
    }

    #[test]
    fn certified_optimum_is_not_beaten_by_samples(s in setups(), k in 1usize..4, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = s.dim();
        let f = PwQuadratic {
            hess_diag: vec_in(n, 0.0, 1.0, &mut rng),
            lin: vec_in(n, -1.0, 1.0, &mut rng),
            constant: 0.0,
            max_terms: vec![(0..k).map(|_| Affine::new(vec_in(n, -1.0, 1.0, &mut rng), 0.0)).collect()],
        };
        let c = OfflineOracle::default().minimize_structured(&f, &s).unwrap();
        prop_assert!(c.gap <= 1e-6);
        for _ in 0..100 {
            let x = s.sample(&mut rng);
            prop_assert!(f.value(&x) >= c.value - c.gap - 1e-12);
        }
    }

    #[test]
    fn weights_are_a_distribution(t in 1usize..2000) {
        for w in [WeightSchedule::uniform(t), WeightSchedule::increasing(t)] {
            prop_assert!((w.values().iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        }
        let w = WeightSchedule::increasing(t);
        let tf = t as f64;
        prop_assert!((w.theta(t) - 2.0 / (tf + 1.0)).abs() <= 1e-15);
    }

    #[test]
    fn md_step_residuals_vanish(s in setups(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let w = WeightSchedule::uniform(30);
        let steps = StepSchedule::new(StepKind::ConstantNonsmooth, StepParams::nonsmooth(s.set_width().max(0.1), 3.0), &w).unwrap();
        let gs: Vec<Vec<f64>> = (0..30).map(|_| vec_in(s.dim(), -1.0, 1.0, &mut rng)).collect();
        let tr = mirror_descent(&s, &steps, |t, _| Ok(gs[t - 1].iter().map(|v| v / 30.0).collect())).unwrap();
        prop_assert!(tr.max_residual() <= 1e-8);
    }

    #[test]
    fn linear_decay_stream_meets_its_declaration(c in 0.0f64..3.0, beta in 0.0f64..0.99, n in 1usize..5) {
        let mut dir = vec![0.0; n];
        dir[0] = 1.0;
        let target = vec![0.25; n];
        let mut est = Estimator::new(StreamSpec::LinearDecay { target: target.clone(), c, beta, direction: dir }).unwrap();
        let d = est.decay().unwrap().unwrap();
        for t in 1..=50 {
            let u = est.next().unwrap();
            prop_assert!(norm2(&sub(u, &target)) <= d.c * d.beta.powi(t) * (1.0 + 1e-12) + 1e-15);
        }
    }
}
