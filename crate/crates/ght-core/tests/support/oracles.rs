//! Brute-force reference computations used to check the library.

#![allow(dead_code)]

/// All vertices of the transportation polytope `Pi(a, b)`, found by trying
/// every `(m + n - 1)`-cell subset and solving it by leaf elimination.
pub fn transport_vertices(a: &[f64], b: &[f64]) -> Vec<Vec<f64>> {
    let (m, n) = (a.len(), b.len());
    let cells = m * n;
    let k = m + n - 1;
    let mut out: Vec<Vec<f64>> = Vec::new();
    let mut subset: Vec<usize> = (0..k).collect();
    loop {
        if let Some(plan) = solve_on_cells(a, b, &subset) {
            if !out.iter().any(|p| p.iter().zip(&plan).all(|(x, y)| (x - y).abs() < 1e-14)) {
                out.push(plan);
            }
        }
        // next combination
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if subset[i] < cells - k + i {
                subset[i] += 1;
                for j in i + 1..k {
                    subset[j] = subset[j - 1] + 1;
                }
                break;
            }
        }
    }
}

fn solve_on_cells(a: &[f64], b: &[f64], subset: &[usize]) -> Option<Vec<f64>> {
    let (m, n) = (a.len(), b.len());
    let mut ra = a.to_vec();
    let mut rb = b.to_vec();
    let mut alive: Vec<usize> = subset.to_vec();
    let mut plan = vec![0.0; m * n];
    while !alive.is_empty() {
        let mut progressed = false;
        for r in 0..m {
            let in_row: Vec<usize> = alive.iter().copied().filter(|c| c / n == r).collect();
            if in_row.len() == 1 {
                let c = in_row[0];
                let f = ra[r];
                plan[c] = f;
                ra[r] -= f;
                rb[c % n] -= f;
                alive.retain(|&x| x != c);
                progressed = true;
            }
        }
        for col in 0..n {
            let in_col: Vec<usize> = alive.iter().copied().filter(|c| c % n == col).collect();
            if in_col.len() == 1 {
                let c = in_col[0];
                let f = rb[col];
                plan[c] = f;
                ra[c / n] -= f;
                rb[col] -= f;
                alive.retain(|&x| x != c);
                progressed = true;
            }
        }
        if !progressed {
            return None;
        }
    }
    let balanced = ra.iter().chain(&rb).all(|r| r.abs() < 1e-12);
    let feasible = plan.iter().all(|&f| f >= -1e-12);
    (balanced && feasible).then_some(plan)
}

/// Optimal transport cost by vertex enumeration.
pub fn transport_oracle(a: &[f64], b: &[f64], cost: &[f64]) -> f64 {
    transport_vertices(a, b)
        .iter()
        .map(|p| p.iter().zip(cost).map(|(f, c)| f * c).sum::<f64>())
        .fold(f64::INFINITY, f64::min)
}

pub fn euclid_pow(x: &[f64], y: &[f64], p: f64) -> f64 {
    let s: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
    s.sqrt().powf(p)
}

/// `W_p` by vertex enumeration; atoms given as point lists.
pub fn wasserstein_oracle(xs: &[Vec<f64>], a: &[f64], ys: &[Vec<f64>], b: &[f64], p: f64) -> f64 {
    let mut cost = Vec::new();
    for x in xs {
        for y in ys {
            cost.push(euclid_pow(x, y, p));
        }
    }
    transport_oracle(a, b, &cost).max(0.0).powf(1.0 / p)
}

/// `W_p` on the line through the quantile functions, evaluated on the merged
/// grid of cumulative weights.
pub fn quantile_w1d(xs: &[f64], a: &[f64], ys: &[f64], b: &[f64], p: f64) -> f64 {
    let sort = |v: &[f64], w: &[f64]| {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|&i, &j| v[i].partial_cmp(&v[j]).unwrap());
        let mut acc = 0.0;
        let pts: Vec<f64> = idx.iter().map(|&i| v[i]).collect();
        let cum: Vec<f64> = idx.iter().map(|&i| { acc += w[i]; acc }).collect();
        (pts, cum)
    };
    let (px, cx) = sort(xs, a);
    let (py, cy) = sort(ys, b);
    let mut breaks: Vec<f64> = cx.iter().chain(&cy).copied().collect();
    breaks.push(0.0);
    breaks.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let q = |pts: &[f64], cum: &[f64], u: f64| pts[cum.iter().position(|&c| c >= u).unwrap_or(pts.len() - 1)];
    let mut total = 0.0;
    for w in breaks.windows(2) {
        let len = w[1] - w[0];
        if len <= 0.0 {
            continue;
        }
        let u = 0.5 * (w[0] + w[1]);
        total += len * (q(&px, &cx, u) - q(&py, &cy, u)).abs().powf(p);
    }
    total.powf(1.0 / p)
}

/// Projection onto the simplex by enumerating supports: on each support the
/// projection onto the affine hull is explicit, and the nearest feasible
/// candidate is the answer.
pub fn simplex_projection_oracle(u: &[f64]) -> Vec<f64> {
    let n = u.len();
    let mut best: Option<(f64, Vec<f64>)> = None;
    for mask in 1u32..(1 << n) {
        let support: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
        let s: f64 = support.iter().map(|&i| u[i]).sum();
        let shift = (s - 1.0) / support.len() as f64;
        let mut w = vec![0.0; n];
        let mut ok = true;
        for &i in &support {
            w[i] = u[i] - shift;
            if w[i] < 0.0 {
                ok = false;
            }
        }
        if !ok {
            continue;
        }
        let d: f64 = w.iter().zip(u).map(|(a, b)| (a - b) * (a - b)).sum();
        if best.as_ref().map_or(true, |(bd, _)| d < *bd) {
            best = Some((d, w));
        }
    }
    best.unwrap().1
}

/// One-dimensional two-step paths given as `(x1, x2, weight)`.
pub type Paths2 = Vec<(f64, f64, f64)>;

fn split_first_step(paths: &Paths2) -> Vec<(f64, f64, Vec<(f64, f64)>)> {
    let mut groups: Vec<(f64, f64, Vec<(f64, f64)>)> = Vec::new();
    for &(x1, x2, w) in paths {
        match groups.iter_mut().find(|g| g.0 == x1) {
            Some(g) => {
                g.1 += w;
                g.2.push((x2, w));
            }
            None => groups.push((x1, w, vec![(x2, w)])),
        }
    }
    groups
}

/// `AW_p` for two-step paths by exhaustive enumeration of bicausal couplings:
/// every bicausal coupling is a first-step coupling glued with conditional
/// couplings, and the optimum sits on a product of vertices.
pub fn adapted_oracle(mu: &Paths2, nu: &Paths2, p: f64) -> f64 {
    let gx = split_first_step(mu);
    let gy = split_first_step(nu);
    let a: Vec<f64> = gx.iter().map(|g| g.1).collect();
    let b: Vec<f64> = gy.iter().map(|g| g.1).collect();
    let mut inner = vec![0.0; gx.len() * gy.len()];
    for (i, x) in gx.iter().enumerate() {
        for (j, y) in gy.iter().enumerate() {
            let ca: Vec<f64> = x.2.iter().map(|c| c.1 / x.1).collect();
            let cb: Vec<f64> = y.2.iter().map(|c| c.1 / y.1).collect();
            let mut best = f64::INFINITY;
            for plan in transport_vertices(&ca, &cb) {
                let mut c = 0.0;
                for (k, u) in x.2.iter().enumerate() {
                    for (l, v) in y.2.iter().enumerate() {
                        c += plan[k * cb.len() + l] * (u.0 - v.0).abs().powf(p);
                    }
                }
                best = best.min(c);
            }
            inner[i * gy.len() + j] = (x.0 - y.0).abs().powf(p) + best;
        }
    }
    let mut best = f64::INFINITY;
    for plan in transport_vertices(&a, &b) {
        best = best.min(plan.iter().zip(&inner).map(|(f, c)| f * c).sum());
    }
    best.powf(1.0 / p)
}

/// Plain (non-adapted) `W_p` between the same two-step path laws.
pub fn plain_oracle(mu: &Paths2, nu: &Paths2, p: f64) -> f64 {
    let xs: Vec<Vec<f64>> = mu.iter().map(|t| vec![t.0, t.1]).collect();
    let ys: Vec<Vec<f64>> = nu.iter().map(|t| vec![t.0, t.1]).collect();
    let a: Vec<f64> = mu.iter().map(|t| t.2).collect();
    let b: Vec<f64> = nu.iter().map(|t| t.2).collect();
    let mut cost = Vec::new();
    for x in &xs {
        for y in &ys {
            cost.push((x[0] - y[0]).abs().powf(p) + (x[1] - y[1]).abs().powf(p));
        }
    }
    transport_oracle(&a, &b, &cost).powf(1.0 / p)
}

/// Plain deep ReLU evaluation written against the parameter layout directly:
/// per hidden layer the block is `[W (rows x cols), b, 2 * rows activation slots]`,
/// followed by the readout `[W, c]`. Activation slots are skipped.
pub fn relu_reference(dims: &[usize], theta: &[f64], x: &[f64]) -> Vec<f64> {
    let mut pos = 0;
    let mut h = x.to_vec();
    let last = dims.len() - 1;
    for l in 1..=last {
        let (rows, cols) = (dims[l], dims[l - 1]);
        let w = &theta[pos..pos + rows * cols];
        let b = &theta[pos + rows * cols..pos + rows * cols + rows];
        let mut next = vec![0.0; rows];
        for r in 0..rows {
            let mut s = 0.0;
            for c in 0..cols {
                s += w[r * cols + c] * h[c];
            }
            s += b[r];
            next[r] = if l == last { s } else if s > 0.0 { s } else { 0.0 };
        }
        pos += rows * cols + rows;
        if l != last {
            pos += 2 * rows;
        }
        h = next;
    }
    assert_eq!(pos, theta.len());
    h
}

/// Metric capacity of a small finite cloud by exhaustive search over the
/// origin, every radius regime and every subset of centers. Balls are open
/// and intersected with the cloud.
pub fn capacity_oracle(cloud: &[Vec<f64>], delta: f64) -> usize {
    let n = cloud.len();
    assert!(n <= 12);
    let d = |i: usize, j: usize| -> f64 {
        cloud[i].iter().zip(&cloud[j]).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
    };
    let mut crit = vec![];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                crit.push(d(i, j));
                crit.push(d(i, j) / delta);
            }
        }
    }
    crit.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut radii: Vec<f64> = crit.windows(2).map(|w| (w[0] + w[1]) / 2.0).collect();
    radii.push(crit[crit.len() - 1] * 3.0);
    radii.push(crit[0] / 3.0);
    let mut best = 1;
    for o in 0..n {
        for &r in &radii {
            for mask in 1u32..(1 << n) {
                let k = mask.count_ones() as usize;
                if k <= best {
                    continue;
                }
                let mut owned = vec![false; n];
                let mut ok = true;
                'centers: for c in (0..n).filter(|c| mask >> c & 1 == 1) {
                    for j in 0..n {
                        if d(c, j) < delta * r {
                            if d(o, j) >= r || owned[j] {
                                ok = false;
                                break 'centers;
                            }
                            owned[j] = true;
                        }
                    }
                }
                if ok {
                    best = k;
                }
            }
        }
    }
    best
}

/// `Phi(x)` through the complementary error function.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// `Phi^{-1}(p)` by bisection on `normal_cdf`.
pub fn normal_quantile_oracle(p: f64) -> f64 {
    let (mut lo, mut hi) = (-40.0f64, 40.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if normal_cdf(mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// `W_1` between a discrete law on the line and `N(mean, sd^2)`, integrating
/// `|Q_disc(u) - Q_normal(u)|` with the midpoint rule on `cells` cells.
pub fn gaussian_w1_oracle(atoms: &[f64], weights: &[f64], mean: f64, sd: f64, cells: usize) -> f64 {
    let mut idx: Vec<usize> = (0..atoms.len()).collect();
    idx.sort_by(|&i, &j| atoms[i].partial_cmp(&atoms[j]).unwrap());
    let mut acc = 0.0;
    let cum: Vec<f64> = idx.iter().map(|&i| { acc += weights[i]; acc }).collect();
    let mut total = 0.0;
    for c in 0..cells {
        let u = (c as f64 + 0.5) / cells as f64;
        let pos = cum.iter().position(|&v| v >= u).unwrap_or(idx.len() - 1);
        total += (atoms[idx[pos]] - (mean + sd * normal_quantile_oracle(u))).abs();
    }
    total / cells as f64
}
