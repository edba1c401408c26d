//! Goodness-of-fit machinery shared by the test suites and the diagnostics
//! pipeline: Kolmogorov–Smirnov tests and the two-sample energy test.

use rand::seq::SliceRandom;

use crate::stats::rng::RngStream;

#[derive(Clone, Copy, Debug)]
pub struct GofResult {
    pub statistic: f64,
    pub p_value: f64,
}

/// Survival function of the Kolmogorov distribution,
/// Q(x) = 2 sum_{j>=1} (-1)^{j-1} exp(-2 j^2 x^2).
pub fn kolmogorov_sf(x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    let mut sum = 0.0;
    for j in 1..=100 {
        let term = (-2.0 * (j as f64) * (j as f64) * x * x).exp();
        sum += if j % 2 == 1 { term } else { -term };
        if term < 1e-18 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

fn ks_p_value(d: f64, n_eff: f64) -> f64 {
    // Stephens' small-sample correction on top of the asymptotic law
    let s = n_eff.sqrt();
    kolmogorov_sf((s + 0.12 + 0.11 / s) * d)
}

/// One-sample KS test of `samples` against the continuous CDF `cdf`.
pub fn ks_test_cdf<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> GofResult {
    let mut xs = samples.to_vec();
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = xs.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        let f = cdf(x);
        d = d.max(((i + 1) as f64 / n - f).abs());
        d = d.max((f - i as f64 / n).abs());
    }
    GofResult {
        statistic: d,
        p_value: ks_p_value(d, n),
    }
}

/// KS test of `p_values` against Uniform(0,1).
pub fn ks_test_uniform(p_values: &[f64]) -> GofResult {
    ks_test_cdf(p_values, |x| x.clamp(0.0, 1.0))
}

/// Two-sample KS test.
pub fn ks_test_two_sample(a: &[f64], b: &[f64]) -> GofResult {
    let mut xs = a.to_vec();
    let mut ys = b.to_vec();
    xs.sort_by(|p, q| p.partial_cmp(q).unwrap());
    ys.sort_by(|p, q| p.partial_cmp(q).unwrap());
    let (n, m) = (xs.len(), ys.len());
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < n && j < m {
        let (fx, fy) = (i as f64 / n as f64, j as f64 / m as f64);
        d = d.max((fx - fy).abs());
        if xs[i] <= ys[j] {
            i += 1;
        } else {
            j += 1;
        }
    }
    d = d.max((1.0 - j as f64 / m as f64).max(1.0 - i as f64 / n as f64));
    let n_eff = (n * m) as f64 / (n + m) as f64;
    GofResult {
        statistic: d,
        p_value: ks_p_value(d, n_eff),
    }
}

#[derive(Clone, Copy, Debug)]
pub struct EnergyResult {
    pub statistic: f64,
    pub p_value: f64,
}

/// Two-sample energy test (Szekely–Rizzo) with a permutation p-value.
///
/// The pooled pairwise distance total is permutation-invariant, so each
/// permutation only needs the within-group sums. Permutations are evaluated
/// on all available cores; the shuffles themselves are drawn serially from
/// `rng`, keeping the result deterministic.
pub fn energy_test_two_sample(
    x: &[Vec<f64>],
    y: &[Vec<f64>],
    permutations: usize,
    rng: &mut RngStream,
) -> EnergyResult {
    let n = x.len();
    let m = y.len();
    assert!(n > 1 && m > 1, "energy test needs at least two points per sample");
    let d = x[0].len();
    assert!(x.iter().chain(y.iter()).all(|p| p.len() == d));

    let mut points = Vec::with_capacity((n + m) * d);
    for p in x.iter().chain(y.iter()) {
        points.extend_from_slice(p);
    }

    let base: Vec<u32> = (0..(n + m) as u32).collect();
    let w_x = within_sum(&points, d, &base[..n]);
    let w_y = within_sum(&points, d, &base[n..]);
    let total = within_sum(&points, d, &base);
    let observed = energy_statistic(total, w_x, w_y, n, m);

    let mut shuffles: Vec<Vec<u32>> = Vec::with_capacity(permutations);
    for _ in 0..permutations {
        let mut idx = base.clone();
        idx.shuffle(rng);
        shuffles.push(idx);
    }

    let workers = std::thread::available_parallelism()
        .map(|p| p.get())
        .unwrap_or(1)
        .min(permutations.max(1));
    let chunk = permutations.div_ceil(workers.max(1));
    let mut exceed = 0usize;
    std::thread::scope(|scope| {
        let mut handles = Vec::new();
        for batch in shuffles.chunks(chunk.max(1)) {
            let points = &points;
            handles.push(scope.spawn(move || {
                let mut count = 0usize;
                for idx in batch {
                    let wx = within_sum(points, d, &idx[..n]);
                    let wy = within_sum(points, d, &idx[n..]);
                    if energy_statistic(total, wx, wy, n, m) >= observed {
                        count += 1;
                    }
                }
                count
            }));
        }
        for h in handles {
            exceed += h.join().expect("energy permutation worker panicked");
        }
    });

    EnergyResult {
        statistic: observed,
        p_value: (1 + exceed) as f64 / (permutations + 1) as f64,
    }
}

fn energy_statistic(total: f64, w_x: f64, w_y: f64, n: usize, m: usize) -> f64 {
    let (nf, mf) = (n as f64, m as f64);
    let between = total - w_x - w_y;
    2.0 * between / (nf * mf) - 2.0 * w_x / (nf * nf) - 2.0 * w_y / (mf * mf)
}

fn within_sum(points: &[f64], d: usize, idx: &[u32]) -> f64 {
    let mut sum = 0.0;
    for (a, &i) in idx.iter().enumerate() {
        let pi = &points[i as usize * d..i as usize * d + d];
        for &j in &idx[a + 1..] {
            let pj = &points[j as usize * d..j as usize * d + d];
            let mut sq = 0.0;
            for k in 0..d {
                let diff = pi[k] - pj[k];
                sq += diff * diff;
            }
            sum += sq.sqrt();
        }
    }
    sum
}
