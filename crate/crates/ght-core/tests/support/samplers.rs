//! Random spaces, codes and points for property checks.

#![allow(dead_code)]

use ght_core::qas::*;
use ght_core::rng::{normal, seeded, Rng};
use rand::Rng as _;

pub fn rng(seed: u64) -> Rng {
    seeded(seed)
}

pub fn w_space(dim: usize, p: f64, mixer: Mixer) -> QasSpace {
    QasSpace::WassersteinConvex(WassersteinSpace { dim, p, moment: p + 1.0, base: BaseSpace::Euclidean, mixer })
}

/// One representative of every space variant.
pub fn all_spaces() -> Vec<(&'static str, QasSpace)> {
    vec![
        ("wasserstein", w_space(2, 1.0, Mixer::Convex)),
        ("adapted", QasSpace::AdaptedEmpirical(AdaptedSpace { dim: 1, horizon: 2, p: 1.0 })),
        ("schauder", QasSpace::LinearSchauder(SchauderSpace { basis: SchauderBasis::FaberSchauder { grid: 64 } })),
        ("rkhs", QasSpace::ForwardRateRkhs(RkhsSpace::new(4.0, 5.0, vec![0.0, 1.0, 2.0, 5.0]).unwrap())),
        ("gaussian", QasSpace::GaussianSpd(GaussianSpace { dim: 2 })),
        (
            "exponential",
            QasSpace::ExponentialFamily(ExpFamilySpace {
                statistics: vec![PathStatistic::Mean, PathStatistic::QuadraticVariation, PathStatistic::Terminal],
            }),
        ),
    ]
}

pub fn random_code(space: &QasSpace, q: usize, rng: &mut Rng) -> QuantizationCode {
    let len = space.code_len(q);
    let z = match space {
        QasSpace::AdaptedEmpirical(_) | QasSpace::ExponentialFamily(_) => (0..len).map(|_| rng.random::<f64>()).collect(),
        QasSpace::GaussianSpd(_) => (0..len).map(|_| 0.5 * normal(rng)).collect(),
        _ => (0..len).map(|_| normal(rng)).collect(),
    };
    QuantizationCode { level: q, z }
}

pub fn random_point(space: &QasSpace, rng: &mut Rng) -> QasPoint {
    let q = rng.random_range(1..=4);
    space.quantize(&random_code(space, q, rng)).unwrap()
}

pub fn random_weights(n: usize, rng: &mut Rng) -> Vec<f64> {
    // Sparse and dense weights alike.
    let raw: Vec<f64> = (0..n).map(|_| if rng.random::<f64>() < 0.2 { 0.0 } else { rng.random::<f64>() }).collect();
    let s: f64 = raw.iter().sum();
    if s == 0.0 {
        let mut w = vec![0.0; n];
        w[0] = 1.0;
        return w;
    }
    raw.iter().map(|x| x / s).collect()
}
