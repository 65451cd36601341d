mod support;

use std::sync::Arc;
use std::time::Instant;

use ght_core::causal::*;
use ght_core::hyper::*;
use ght_core::metric::DiscreteMeasure;
use ght_core::nn::*;
use ght_core::qas::{Mixer, QasPoint, QasSpace, QuantizationCode};
use ght_core::transformer::{gt_eval, GeometricTransformer};
use ght_core::Error;
use proptest::prelude::*;
use rand::Rng as _;
use support::oracles::{gaussian_w1_oracle, relu_reference};
use support::samplers::{rng, w_space};

fn space() -> QasSpace {
    w_space(1, 1.0, Mixer::Convex)
}

fn relu_net(dims: Vec<usize>, scale: f64, seed: u64) -> Network {
    let md = MultiIndex::new(dims).unwrap();
    let mut r = rng(seed);
    let mut theta: Vec<f64> = (0..md.param_count()).map(|_| r.random_range(-scale..scale)).collect();
    for o in md.hidden_offsets() {
        for i in 0..o.rows {
            theta[o.alpha + 2 * i] = 1.0;
            theta[o.alpha + 2 * i + 1] = 0.0;
        }
    }
    Network::new(md, ActivationKind::Singular, theta).unwrap()
}

/// Decoder over `R^2` with three two-atom codes.
fn decoder(seed: u64) -> GeometricTransformer {
    let codes = vec![
        QuantizationCode { level: 2, z: vec![-1.0, 0.0] },
        QuantizationCode { level: 2, z: vec![0.5, 0.5] },
        QuantizationCode { level: 2, z: vec![1.0, 2.0] },
    ];
    GeometricTransformer::new(space(), relu_net(vec![2, 3], 1.0, seed), codes).unwrap()
}

/// Encoder `[(m + 1), 3, 2]`, random ReLU hyper network of shape `[P, 4, P]`.
fn random_ght(memory: usize, horizon: usize, seed: u64) -> Ght {
    let dims = MultiIndex::new(vec![memory + 1, 3, 2]).unwrap();
    let p = dims.param_count();
    let hyper = relu_net(vec![p, 4, p], 0.3, seed);
    let init = relu_net(dims.dims().to_vec(), 1.0, seed ^ 7).theta;
    Ght::new(decoder(seed ^ 3), hyper, init, horizon, dims, ActivationKind::Singular, memory).unwrap()
}

fn random_path(lo: i64, hi: i64, seed: u64) -> PathWindow {
    let grid = TimeGrid::uniform(lo, hi, 1.0).unwrap();
    let mut r = rng(seed);
    let vals: Vec<Vec<f64>> = (lo..=hi).map(|_| vec![r.random_range(-1.0..1.0)]).collect();
    PathWindow::new(grid, &vals).unwrap()
}

fn bits(v: &[f64]) -> Vec<u64> {
    v.iter().map(|x| x.to_bits()).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn schedule_recursion_holds_bitwise(horizon in 0usize..6, memory in 0usize..3, seed in any::<u64>()) {
        let ght = random_ght(memory, horizon, seed);
        let h = horizon as i64;
        for n in -h - 5..=-h {
            prop_assert_eq!(bits(theta_unroll(&ght, n)), bits(ght.theta_init()));
        }
        for n in -h..h {
            let next = ght.hyper().forward(theta_unroll(&ght, n)).unwrap();
            prop_assert_eq!(bits(theta_unroll(&ght, n + 1)), bits(&next));
        }
        for n in h..h + 5 {
            prop_assert_eq!(bits(theta_unroll(&ght, n)), bits(theta_unroll(&ght, h)));
        }
    }
}

#[test]
fn three_step_unroll_matches_hand_computation() {
    let ght = random_ght(1, 3, 11);
    let dims = ght.encoder_dims().clone();
    let hyper_dims = ght.hyper().dims.dims().to_vec();
    let mut stored = vec![ght.theta_init().to_vec()];
    let mut reference = vec![ght.theta_init().to_vec()];
    for k in 0..6 {
        stored.push(ght.hyper().forward(&stored[k]).unwrap());
        reference.push(relu_reference(&hyper_dims, &ght.hyper().theta, &reference[k]));
    }
    let path = random_path(-6, 6, 5);
    for n in -5i64..=6 {
        let k = (n.clamp(-3, 3) + 3) as usize;
        for (a, b) in stored[k].iter().zip(&reference[k]) {
            assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()));
        }
        let enc = Network::new(dims.clone(), ActivationKind::Singular, stored[k].clone()).unwrap();
        let u = enc.forward(path.segment(n, 1).unwrap()).unwrap();
        assert_eq!(ght_eval(&ght, &path, n).unwrap(), gt_eval(ght.decoder(), &u).unwrap());
    }
    assert!(matches!(ght_eval(&ght, &path, -6), Err(Error::OutOfWindow { .. })));
    assert!(matches!(ght_eval(&ght, &random_path(0, 6, 5), 0), Err(Error::OutOfWindow { .. })));
}

#[test]
fn identity_hyper_gives_a_constant_schedule() {
    let dims = MultiIndex::new(vec![1, 3, 2]).unwrap();
    let p = dims.param_count();
    let mut a = vec![0.0; p * p];
    for i in 0..p {
        a[i * p + i] = 1.0;
    }
    let hyper = Network::from_parts(
        MultiIndex::new(vec![p, p]).unwrap(),
        ActivationKind::Singular,
        &Decomposed { hidden: vec![], a, c: vec![0.0; p] },
    )
    .unwrap();
    let init = relu_net(vec![1, 3, 2], 1.0, 2).theta;
    let ght = Ght::new(decoder(1), hyper, init.clone(), 4, dims, ActivationKind::Singular, 0).unwrap();
    for n in -9..=9 {
        assert_eq!(theta_unroll(&ght, n), init.as_slice());
    }
}

#[test]
fn constant_one_hot_encoder_returns_the_code_image() {
    let codes = vec![
        QuantizationCode { level: 2, z: vec![-1.0, 0.0] },
        QuantizationCode { level: 2, z: vec![0.5, 0.5] },
        QuantizationCode { level: 2, z: vec![1.0, 2.0] },
    ];
    let mut ident = vec![0.0; 9];
    for i in 0..3 {
        ident[i * 3 + i] = 1.0;
    }
    ident.extend([0.0; 3]);
    let dec_net = Network::new(MultiIndex::new(vec![3, 3]).unwrap(), ActivationKind::Singular, ident).unwrap();
    let dec = GeometricTransformer::new(space(), dec_net, codes.clone()).unwrap();
    let dims = MultiIndex::new(vec![1, 3]).unwrap();
    for i in 0..3 {
        let mut theta = vec![0.0; 6];
        theta[3 + i] = 1.0;
        let mut hyper_theta = vec![0.0; 36];
        hyper_theta.extend_from_slice(&theta);
        let hyper = Network::new(MultiIndex::new(vec![6, 6]).unwrap(), ActivationKind::Singular, hyper_theta).unwrap();
        let ght = Ght::new(dec.clone(), hyper, theta, 2, dims.clone(), ActivationKind::Singular, 0).unwrap();
        let want = space().quantize(&codes[i]).unwrap();
        let path = random_path(-5, 5, i as u64);
        for n in -5..=5 {
            assert_eq!(ght_eval(&ght, &path, n).unwrap(), want);
        }
    }
}

#[test]
fn outputs_ignore_the_future() {
    let mut r = rng(99);
    for trial in 0..100u64 {
        let memory = r.random_range(0..3usize);
        let ght = random_ght(memory, 3, trial);
        let path = random_path(-6, 6, trial);
        let n = r.random_range(-6 + memory as i64..6);
        let base = ght_eval(&ght, &path, n).unwrap();
        let mut bumped = path.clone();
        for k in n + 1..=6 {
            bumped.at_mut(k).unwrap()[0] += r.random_range(-5.0..5.0);
        }
        let after = ght_eval(&ght, &bumped, n).unwrap();
        assert_eq!(ght.decoder().space().distance(&base, &after).unwrap(), 0.0);
    }
}

#[test]
fn self_compression_oracles() {
    let ght = random_ght(0, 3, 4);
    let paths: Vec<PathWindow> = (0..5).map(|s| random_path(-6, 6, s)).collect();
    assert_eq!(self_compression(&ght, &paths, 3, 20.0, 3).unwrap(), 1.0);
    assert_eq!(self_compression(&ght, &paths, 3, 20.0, -3).unwrap(), 1.0);
    for n in [-6i64, -1, 0, 2, 5] {
        let anchor = n.signum() * 3;
        let mut want: f64 = 1.0;
        for p in &paths {
            let a = ght_eval(&ght, p, n).unwrap();
            let b = ght_eval(&ght, p, anchor).unwrap();
            want = want.max(20.0 * space().distance(&a, &b).unwrap());
        }
        assert_eq!(self_compression(&ght, &paths, 3, 20.0, n).unwrap(), want);
    }
    assert!(self_compression(&ght, &paths, 3, 0.0, 1).is_err());
}

#[test]
fn frozen_schedule_on_constant_paths_never_compresses() {
    let dims = MultiIndex::new(vec![1, 3, 2]).unwrap();
    let p = dims.param_count();
    let init = relu_net(vec![1, 3, 2], 1.0, 8).theta;
    let mut theta = vec![0.0; p * p];
    theta.extend_from_slice(&init);
    let hyper = Network::new(MultiIndex::new(vec![p, p]).unwrap(), ActivationKind::Singular, theta).unwrap();
    let ght = Ght::new(decoder(2), hyper, init, 3, dims, ActivationKind::Singular, 0).unwrap();
    let grid = TimeGrid::uniform(-8, 8, 1.0).unwrap();
    let paths: Vec<PathWindow> = [-0.7, 0.1, 0.9].iter().map(|&v| PathWindow::constant(grid.clone(), &[v]).unwrap()).collect();
    for n in -8..=8 {
        assert_eq!(self_compression(&ght, &paths, 3, 100.0, n).unwrap(), 1.0);
    }
}

#[test]
fn normalized_error_identities() {
    let ght = random_ght(1, 2, 6);
    let paths: Vec<PathWindow> = (0..4).map(|s| random_path(-5, 5, s)).collect();
    let one = |_: i64| Ok(1.0);
    let zero = normalized_error(&ght, &ght, &paths, &one, &one, 2, 0.5, None).unwrap();
    assert_eq!(zero.value, 0.0);
    assert_eq!(zero.rows.first().unwrap().n, -4);

    let other = random_ght(1, 2, 60);
    let rate = |n: i64| Ok(if n.abs() <= 2 { 1.0 } else { 3.0 * n.abs() as f64 });
    let e = normalized_error(&other, &ght, &paths, &one, &rate, 2, 0.5, None).unwrap();
    assert!(e.rows.iter().all(|r| r.denominator >= 1.0 && r.normalized <= r.raw));
    assert!(e.value <= e.raw_sup);
    let window = |r: &NormalizedRow| r.n.abs() <= 2;
    let inside = normalized_error(&other, &ght, &paths, &one, &rate, 2, 0.5, Some(1e-300)).unwrap();
    assert!(inside.rows.iter().filter(|r| window(r)).all(|r| r.denominator == 1.0 && r.normalized == r.raw));
    let low = |_: i64| Ok(0.5);
    assert!(normalized_error(&other, &ght, &paths, &low, &one, 2, 0.5, None).is_err());
}

fn example_map(time_dependent: bool) -> FiniteComplexityMap {
    let mu: VecField = if time_dependent {
        Arc::new(|t, x| vec![0.1 * (t + x[0]).sin()])
    } else {
        Arc::new(|_, x| vec![0.1 * x[0].sin()])
    };
    sde_kernel_map(mu, Arc::new(|_, _| vec![0.2]), 1.0, DiscreteMeasure::dirac(&[0.0]).unwrap(), 16).unwrap()
}

fn quick_config() -> DynamicFitConfig {
    DynamicFitConfig {
        encoder_hidden: vec![8],
        encoder_train: TrainConfig { epochs: 1500, ..TrainConfig::default() },
        ..DynamicFitConfig::default()
    }
}

#[test]
fn constant_target_needs_the_bias_perturbation() {
    let map = example_map(false).homogeneous(true);
    let grid = TimeGrid::uniform(-3, 3, 1.0).unwrap();
    let paths: Vec<PathWindow> =
        (0..21).map(|i| PathWindow::constant(grid.clone(), &[-1.0 + 0.1 * i as f64]).unwrap()).collect();
    let cfg = quick_config();
    let steps: Vec<StepFit> = (-2..=2).map(|n| fit_step_encoder(&map, &paths, n, &cfg).unwrap()).collect();
    let thetas: Vec<&Vec<f64>> = steps.iter().map(|s| &s.network.theta).collect();
    assert!(thetas.windows(2).all(|w| w[0] == w[1]));
    let pairs: Vec<(Vec<f64>, Vec<f64>)> = thetas.windows(2).map(|w| (w[0].clone(), w[1].clone())).collect();
    assert!(matches!(memorize_sequence(&pairs, thetas[0].len(), 2, 0), Err(Error::Domain(_))));

    let (ght, report) = assemble_dynamic(&map, steps, &paths, 2, &space(), 0.4, &cfg).unwrap();
    assert_eq!(report.coincident_before, 4);
    assert_eq!(report.perturbed, vec![-1, 0, 1, 2]);
    assert!(report.perturbation_norm < (0.4f64 / 8.0) / 2f64.sqrt() * 2f64.sqrt());
    let enc = report.encoder_sup_errors.iter().copied().fold(0.0, f64::max);
    let bound = report.decoder.sup_error + 2f64.sqrt() * (enc + report.perturbation_norm) + 1e-9;
    assert!(report.within_window_sup <= bound, "{} > {bound}", report.within_window_sup);
    assert!(report.memorization_residual <= 1e-6);
    assert_eq!(ght.horizon(), 2);
}

#[test]
fn short_paths_are_rejected() {
    let map = example_map(true);
    let grid = TimeGrid::uniform(-1, 3, 1.0).unwrap();
    let paths = vec![PathWindow::constant(grid, &[0.0]).unwrap()];
    let r = fit_dynamic(&AcMapSpec::exact(map), &paths, 2, &space(), 0.4, &quick_config());
    assert!(matches!(r, Err(Error::OutOfWindow { .. })));
}

#[test]
fn example_sde_dynamic_fit() {
    let start = Instant::now();
    let n_t = 4;
    let eps = 0.4;
    let map = example_map(true);
    let mut r = rng(2024);
    let grid = TimeGrid::uniform(-8, 8, 1.0).unwrap();
    let mut paths = Vec::new();
    for i in 0..101 {
        let vals: Vec<Vec<f64>> = (-8..=8)
            .map(|n| if n == 0 { vec![-1.0 + 0.02 * i as f64] } else { vec![r.random_range(-1.0..=1.0)] })
            .collect();
        paths.push(PathWindow::new(grid.clone(), &vals).unwrap());
    }
    let spec = AcMapSpec::exact(map.clone());
    let (ght, report) = fit_dynamic(&spec, &paths, n_t, &space(), eps, &DynamicFitConfig::default()).unwrap();

    assert!(report.memorization_residual <= 1e-6, "{}", report.memorization_residual);
    let p = report.param_count as f64;
    for (i, dev) in report.replay_deviation.iter().enumerate() {
        let growth = i as f64 * report.hyper_lipschitz.max(1.0).powi(i as i32) * p.sqrt();
        assert!(*dev <= growth * report.memorization_residual + 1e-12, "step {i}: {dev}");
    }
    for (k, n) in report.window.iter().enumerate() {
        let enc = Network::new(ght.encoder_dims().clone(), ght.encoder_activation(), report.stored_thetas[k].clone())
            .unwrap();
        for path in paths.iter().take(10) {
            let u = enc.forward(path.segment(*n, 0).unwrap()).unwrap();
            let stored = gt_eval(ght.decoder(), &u).unwrap();
            let d = space().distance(&stored, &ght_eval(&ght, path, *n).unwrap()).unwrap();
            assert!(d <= 1e-6, "n = {n}: {d}");
        }
    }

    let mut held_out = Vec::new();
    for _ in 0..50 {
        let vals: Vec<Vec<f64>> = (-8..=8).map(|_| vec![r.random_range(-1.0..=1.0)]).collect();
        held_out.push(PathWindow::new(grid.clone(), &vals).unwrap());
    }
    let mut sup: f64 = 0.0;
    for path in paths.iter().chain(&held_out) {
        for n in -(n_t as i64)..=n_t as i64 {
            let x = path.at(n).unwrap()[0];
            let mean = x + 0.1 * (n as f64 + x).sin();
            let QasPoint::Measure(m) = ght_eval(&ght, path, n).unwrap() else { panic!("expected a measure") };
            sup = sup.max(gaussian_w1_oracle(m.atoms_flat(), m.weights(), mean, 0.2, 512));
        }
    }
    assert!(sup <= 0.1, "within-window sup W1 = {sup}");

    let params = RateParams {
        eps,
        dim: 1,
        memory: 0,
        delta_plus: 1.0,
        n_t: n_t as u64,
        holder: Holder { l_rho: 1.0, l_f: 1.0, alpha: 1.0 },
    };
    let row = RateRow::KZ { diam: 2.0 };
    let table = |n: i64| compression_rate(&row, &params, n);
    let c_ac = |n: i64| spec.c_ac(n, eps);
    let e = normalized_error(&map, &ght, &paths, &c_ac, &table, n_t, eps, None).unwrap();
    eprintln!("sup W1 {sup:.4}, normalized {:.4}, P {}, M {}", e.value, report.param_count, report.hyper_width);
    assert!(e.value < eps, "normalized error {}", e.value);
    assert!(start.elapsed().as_secs() < 300);
}
