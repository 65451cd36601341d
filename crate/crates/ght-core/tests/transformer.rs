mod support;

use ght_core::metric::DiscreteMeasure;
use ght_core::nn::{ActivationKind, MultiIndex, Network};
use ght_core::qas::*;
use ght_core::transformer::*;
use ght_core::Result;
use proptest::prelude::*;
use rand::Rng as _;
use support::oracles::capacity_oracle;
use support::samplers::{all_spaces, random_code, rng, w_space};

fn symmetric_pair(x: &[f64]) -> Result<QasPoint> {
    Ok(QasPoint::Measure(DiscreteMeasure::new(1, vec![-x[0], x[0]], vec![0.5, 0.5])?))
}

fn unit_grid(k: usize) -> Vec<Vec<f64>> {
    (0..=k).map(|i| vec![i as f64 / k as f64]).collect()
}

fn w1_line() -> QasSpace {
    w_space(1, 1.0, Mixer::Convex)
}

#[test]
fn constructive_fit_meets_the_covering_bound() {
    let xs = unit_grid(256);
    let cfg = StaticFitConfig { holder_constant: Some(1.0), ..StaticFitConfig::default() };
    let (_, rep) = fit_static_constructive(symmetric_pair, &xs, None, &w1_line(), Budget { n: 32, q: 2 }, &cfg).unwrap();
    assert!(rep.sup_error <= 0.05, "{}", rep.sup_error);
    assert!(rep.sup_error <= rep.bound.unwrap() + 1e-9);
    assert!(rep.separation >= rep.covering_radius / 2.0);
    assert!(rep.quantization_errors.iter().all(|&e| e == 0.0));
}

#[test]
fn error_does_not_grow_with_more_codes() {
    let xs = unit_grid(256);
    let mut prev = f64::INFINITY;
    for n in [4, 8, 16, 32] {
        let (_, rep) =
            fit_static_constructive(symmetric_pair, &xs, None, &w1_line(), Budget { n, q: 2 }, &StaticFitConfig::default())
                .unwrap();
        assert!(rep.sup_error <= 1.1 * prev, "N={n}: {} after {prev}", rep.sup_error);
        prev = rep.sup_error;
    }
}

#[test]
fn center_errors_equal_quantization_errors() {
    let xs = unit_grid(64);
    let (gt, rep) =
        fit_static_constructive(symmetric_pair, &xs, None, &w1_line(), Budget { n: 8, q: 1 }, &StaticFitConfig::default())
            .unwrap();
    for (k, &i) in rep.centers.iter().enumerate() {
        assert_eq!(rep.errors[i], rep.quantization_errors[k]);
        assert_eq!(gt_eval(&gt, &xs[i]).unwrap(), gt.points()[k]);
    }
}

#[test]
fn constant_target_costs_only_quantization() {
    let y = QasPoint::Measure(DiscreteMeasure::new(1, vec![0.0, 0.3, 1.0], vec![0.2, 0.5, 0.3]).unwrap());
    let f = |_: &[f64]| Ok(y.clone());
    let (_, q_err) = w1_line().encode_point(&y, 2).unwrap();
    for n in [1, 5] {
        let (_, rep) =
            fit_static_constructive(f, &unit_grid(20), None, &w1_line(), Budget { n, q: 2 }, &StaticFitConfig::default())
                .unwrap();
        assert!((rep.sup_error - q_err).abs() < 1e-12);
    }
}

#[test]
fn singular_training_request_is_routed_to_the_closed_form() {
    let cfg = StaticFitConfig {
        activation: ActivationKind::Singular,
        encoder: EncoderMode::Trained { hidden: vec![4], train: Default::default() },
        ..StaticFitConfig::default()
    };
    let (_, rep) = fit_static_constructive(symmetric_pair, &unit_grid(16), None, &w1_line(), Budget { n: 4, q: 2 }, &cfg)
        .unwrap();
    assert_eq!(rep.encoder_route, "closed_form_singular");
}

#[test]
fn end_to_end_with_one_code_is_constant() {
    let (gt, rep) = fit_static_end2end(
        symmetric_pair,
        &unit_grid(8),
        None,
        &w1_line(),
        Budget { n: 1, q: 2 },
        None,
        &End2EndConfig::default(),
    )
    .unwrap();
    for x in unit_grid(8) {
        assert_eq!(gt_eval(&gt, &x).unwrap(), gt.points()[0]);
    }
    // The only code sits at the lexicographically smallest input, x = 0.
    assert!((rep.sup_error - 1.0).abs() < 1e-12);
}

#[test]
fn end_to_end_recovers_a_planted_model() {
    let space = w1_line();
    let codes = vec![QuantizationCode { level: 1, z: vec![0.0] }, QuantizationCode { level: 1, z: vec![1.0] }];
    // Planted encoder u = (x, 1 - x) / 2 + (0.25, 0.25): weights (x, 1 - x) on [0, 1].
    let md = MultiIndex::new(vec![1, 2]).unwrap();
    let planted = Network::new(md, ActivationKind::smooth(), vec![0.5, -0.5, 0.25, 0.75]).unwrap();
    let truth = GeometricTransformer::new(space.clone(), planted, codes.clone()).unwrap();
    let f = |x: &[f64]| gt_eval(&truth, x);
    let cfg = End2EndConfig {
        warm_start: None,
        train: ght_core::nn::TrainConfig { epochs: 3000, lr: 0.5, decay: 1.0, target_loss: 1e-10, ..Default::default() },
        ..End2EndConfig::default()
    };
    let (_, rep) =
        fit_static_end2end(f, &unit_grid(10), None, &space, Budget { n: 2, q: 1 }, Some(codes), &cfg).unwrap();
    assert!(rep.sup_error <= 1e-3, "{}", rep.sup_error);
}

#[test]
fn end_to_end_reaches_the_toy_threshold() {
    let (_, rep) = fit_static_end2end(
        symmetric_pair,
        &unit_grid(64),
        None,
        &w1_line(),
        Budget { n: 16, q: 8 },
        None,
        &End2EndConfig { train: ght_core::nn::TrainConfig { epochs: 20, ..Default::default() }, ..Default::default() },
    )
    .unwrap();
    assert!(rep.sup_error <= 0.1, "{}", rep.sup_error);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn outputs_stay_in_the_space(seed in any::<u64>(), which in 0usize..6) {
        let (_, space) = all_spaces().swap_remove(which);
        let mut r = rng(seed);
        let n = r.random_range(1..4);
        let q = r.random_range(1..4);
        let codes: Vec<_> = (0..n).map(|_| random_code(&space, q, &mut r)).collect();
        let md = MultiIndex::new(vec![2, 3, n]).unwrap();
        let theta: Vec<f64> = (0..md.param_count()).map(|_| r.random_range(-2.0..2.0)).collect();
        let gt = GeometricTransformer::new(space.clone(), Network::new(md, ActivationKind::smooth(), theta).unwrap(), codes).unwrap();
        let out = gt_eval(&gt, &[r.random_range(-1.0..1.0), r.random_range(-1.0..1.0)]).unwrap();
        match (&space, &out) {
            (QasSpace::ExponentialFamily(_), QasPoint::Vector(v)) => prop_assert!(v.iter().all(|x| (0.0..=1.0).contains(x))),
            (QasSpace::WassersteinConvex(_), QasPoint::Measure(m)) => prop_assert!((m.weights().iter().sum::<f64>() - 1.0).abs() < 1e-9),
            (QasSpace::AdaptedEmpirical(_), QasPoint::Path(p)) => prop_assert!(p.law().atoms_flat().iter().all(|x| (0.0..=1.0).contains(x))),
            (QasSpace::GaussianSpd(_), QasPoint::Gaussian(_)) => {}
            (QasSpace::LinearSchauder(_) | QasSpace::ForwardRateRkhs(_), QasPoint::Vector(_)) => {}
            _ => prop_assert!(false, "output variant does not match the space"),
        }
        prop_assert_eq!(space.distance(&out, &out).unwrap(), 0.0);
    }

    #[test]
    fn capacity_bound_is_certified(seed in any::<u64>(), k in 2usize..8, delta in 0.1f64..1.0) {
        let mut r = rng(seed);
        let cloud: Vec<Vec<f64>> = (0..k).map(|_| vec![r.random_range(0.0..1.0), r.random_range(0.0..1.0)]).collect();
        let est = metric_capacity_estimate(&cloud, delta, 300, seed).unwrap();
        prop_assert!(est.bound <= capacity_oracle(&cloud, delta));
        prop_assert!(est.bound >= 1);
    }
}

#[test]
fn two_point_capacity_matches_the_oracle() {
    let cloud = vec![vec![0.0], vec![1.0]];
    for delta in [0.5, 0.9, 0.99, 1.0] {
        let est = metric_capacity_estimate(&cloud, delta, 200, 1).unwrap();
        assert_eq!(est.bound, capacity_oracle(&cloud, delta), "delta = {delta}");
    }
}

#[test]
fn planar_grid_capacity_dominates_the_line() {
    let line: Vec<Vec<f64>> = (0..9).map(|i| vec![i as f64]).collect();
    let plane: Vec<Vec<f64>> = (0..9).map(|i| vec![(i % 3) as f64, (i / 3) as f64]).collect();
    let delta = 0.3;
    let l = metric_capacity_estimate(&line, delta, 500, 2).unwrap().bound;
    let p = metric_capacity_estimate(&plane, delta, 500, 2).unwrap().bound;
    assert!(p >= l, "plane {p} < line {l}");
    assert!(l <= capacity_oracle(&line, delta) && p <= capacity_oracle(&plane, delta));
}

#[test]
fn complexity_tables_are_pure_and_scale_as_expected() {
    let inp = StaticInputs {
        n: 3,
        alpha: 0.5,
        lipschitz: 2.0,
        diam: 1.5,
        kappa: 6.0,
        c_eta: 1.0,
        c: Some(0.7),
        eps_a: 0.05,
        eps_q: 0.1,
        w: Some(5),
        d: None,
        eps_tilde: Some(0.3),
        depth: Some(4.0),
    };
    for kind in [ActivationClass::Singular, ActivationClass::Smooth, ActivationClass::Classical] {
        let a = complexity_static(kind, &inp, ConstantPolicy::Strict, Some(&|_| Ok(3))).unwrap();
        let b = complexity_static(kind, &inp, ConstantPolicy::Strict, Some(&|_| Ok(3))).unwrap();
        assert_eq!(format!("{a:?}"), format!("{b:?}"));
        assert_eq!(a.q, Some(3));
    }
    let ff = FfnnInputs {
        n: 2,
        m: 1,
        alpha: 1.0,
        lipschitz: 1.0,
        diam: 1.0,
        kappa: 5.0,
        c: Some(1.0),
        eps: 0.1,
        w: Some(2),
        d: None,
        eps_tilde: Some(0.5),
        depth: Some(2.0),
    };
    let a = complexity_ffnn(ActivationClass::Smooth, &ff, ConstantPolicy::Strict).unwrap();
    let b = complexity_ffnn(ActivationClass::Smooth, &FfnnInputs { diam: 2.0, ..ff.clone() }, ConstantPolicy::Strict).unwrap();
    assert_eq!(b.c_k.unwrap(), 2.0 * a.c_k.unwrap());
    let s = complexity_ffnn(ActivationClass::Smooth, &ff, ConstantPolicy::Strict).unwrap();
    assert_eq!(s.width, 2.0 * 1.0 + 3.0);
    let c = complexity_ffnn(ActivationClass::Classical, &ff, ConstantPolicy::Strict).unwrap();
    assert_eq!(c.params.unwrap(), 25.0 * 3.0);
}

#[test]
fn minimal_code_branch() {
    // diam = 1, L = 1, alpha = 1 and eps_A = 3 make the first two log terms cancel;
    // with kappa = 2, c = C_eta = 1/2 the clipped term is log2(1) = 0.
    let inp = StaticInputs {
        n: 1,
        alpha: 1.0,
        lipschitz: 1.0,
        diam: 1.0,
        kappa: 2.0,
        c_eta: 0.5,
        c: Some(0.5),
        eps_a: 3.0,
        eps_q: 1.0,
        w: None,
        d: None,
        eps_tilde: None,
        depth: Some(1.0),
    };
    let r = complexity_static(ActivationClass::Classical, &inp, ConstantPolicy::Strict, None).unwrap();
    assert_eq!(r.ln_n, Some(0.0));
    assert_eq!(r.n_codes, Some(1.0));
}
