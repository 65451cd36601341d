use alloc::vec::Vec;

use libm::sqrt;
use rand::Rng as _;

use crate::error::{invalid, Result};
use crate::rng::stream;

/// A verified packing: disjoint `delta r`-balls around `centers`, all inside
/// the `r`-ball around `origin` (balls are open and taken within the cloud).
#[derive(Debug, Clone, PartialEq)]
pub struct CapacityEstimate {
    pub bound: usize,
    pub origin: usize,
    pub radius: f64,
    pub centers: Vec<usize>,
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    sqrt(a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum())
}

struct Cloud {
    n: usize,
    d: Vec<f64>,
}

impl Cloud {
    fn new(points: &[Vec<f64>]) -> Self {
        let n = points.len();
        let mut d = alloc::vec![0.0; n * n];
        for i in 0..n {
            for j in 0..i {
                let v = dist(&points[i], &points[j]);
                d[i * n + j] = v;
                d[j * n + i] = v;
            }
        }
        Self { n, d }
    }

    fn at(&self, i: usize, j: usize) -> f64 {
        self.d[i * self.n + j]
    }

    fn ball(&self, c: usize, r: f64) -> impl Iterator<Item = usize> + '_ {
        (0..self.n).filter(move |&j| self.at(c, j) < r)
    }
}

/// Radii where some ball in the definition changes membership, and the
/// midpoints between them (plus one value above the largest).
fn candidate_radii(cloud: &Cloud, delta: f64) -> Vec<f64> {
    let mut crit: Vec<f64> = Vec::with_capacity(cloud.d.len());
    for i in 0..cloud.n {
        for j in 0..i {
            let v = cloud.at(i, j);
            crit.push(v);
            crit.push(v / delta);
        }
    }
    crit.sort_by(f64::total_cmp);
    crit.dedup();
    let mut out: Vec<f64> = crit.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
    if let Some(&last) = crit.last() {
        out.push(2.0 * last);
    }
    if let Some(&first) = crit.first() {
        out.push(0.5 * first);
    }
    out
}

/// Whether the given centers form a valid packing for `(origin, r)`.
fn verify(cloud: &Cloud, origin: usize, r: f64, delta: f64, centers: &[usize]) -> bool {
    let small = delta * r;
    let mut owner = alloc::vec![usize::MAX; cloud.n];
    for (k, &c) in centers.iter().enumerate() {
        for j in cloud.ball(c, small) {
            if cloud.at(origin, j) >= r || owner[j] != usize::MAX {
                return false;
            }
            owner[j] = k;
        }
    }
    true
}

fn greedy(cloud: &Cloud, origin: usize, r: f64, delta: f64) -> Vec<usize> {
    let small = delta * r;
    let mut order: Vec<usize> = cloud.ball(origin, r).collect();
    order.sort_by(|&a, &b| cloud.at(origin, b).total_cmp(&cloud.at(origin, a)).then(a.cmp(&b)));
    let mut taken = alloc::vec![false; cloud.n];
    let mut centers = Vec::new();
    for c in order {
        let members: Vec<usize> = cloud.ball(c, small).collect();
        if members.iter().all(|&j| cloud.at(origin, j) < r && !taken[j]) {
            for j in members {
                taken[j] = true;
            }
            centers.push(c);
        }
    }
    centers
}

/// Certified lower bound on the metric capacity `kappa(delta)` of a finite
/// cloud from a greedy packing search. Trial `t` draws its origin and
/// radius from stream `(seed, t)`, so more trials never lower the bound.
pub fn metric_capacity_estimate(cloud: &[Vec<f64>], delta: f64, trials: usize, seed: u64) -> Result<CapacityEstimate> {
    if cloud.len() < 2 {
        return Err(invalid("metric capacity needs at least two points"));
    }
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(invalid("delta must lie in (0, 1]"));
    }
    let dim = cloud[0].len();
    if cloud.iter().any(|p| p.len() != dim) {
        return Err(invalid("cloud points must share a dimension"));
    }
    let c = Cloud::new(cloud);
    let radii = candidate_radii(&c, delta);
    let mut best = CapacityEstimate { bound: 1, origin: 0, radius: radii[0], centers: alloc::vec![0] };
    for t in 0..trials.max(1) {
        let mut rng = stream(seed, t as u64);
        let origin = rng.random_range(0..c.n);
        let r = radii[rng.random_range(0..radii.len())];
        let centers = greedy(&c, origin, r, delta);
        if centers.len() > best.bound && verify(&c, origin, r, delta, &centers) {
            best = CapacityEstimate { bound: centers.len(), origin, radius: r, centers };
        }
    }
    Ok(best)
}
