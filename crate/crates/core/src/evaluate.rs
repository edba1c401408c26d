//! ROC/AUC scoring against simulated ground truth, and MCMC convergence
//! diagnostics (Geweke, Heidelberger–Welch).

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::network::LocalFitSummary;
use crate::simulate::GroundTruth;
use crate::stats::normal::std_normal_sf;

pub type RocPoint = (f64, f64);

/// Pools every (target, t, predictor) triple across the supplied summaries
/// into one classification problem and sweeps the threshold from max
/// |median| down to 0: `(fp_rate, tp_rate)` from (0,0) to (1,1).
pub fn roc_curve(truth: &GroundTruth, summaries: &[LocalFitSummary]) -> Result<Vec<RocPoint>> {
    let index_of: HashMap<&str, usize> = truth
        .node_names
        .iter()
        .enumerate()
        .map(|(i, n)| (n.as_str(), i))
        .collect();
    let mut scored: Vec<(bool, f64)> = Vec::new();
    for s in summaries {
        let target = *index_of.get(s.target_name.as_str()).ok_or_else(|| {
            Error::InvalidInput(format!("target {:?} not in ground truth", s.target_name))
        })?;
        for (jj, p_name) in s.predictor_names.iter().enumerate() {
            let j = *index_of.get(p_name.as_str()).ok_or_else(|| {
                Error::InvalidInput(format!("predictor {p_name:?} not in ground truth"))
            })?;
            if j == target {
                continue;
            }
            let positive = truth.is_edge(target, j);
            for t in 0..s.median.nrows() {
                scored.push((positive, s.median[(t, jj)].abs()));
            }
        }
    }
    roc_from_scores(&scored)
}

/// ROC curve from (is-true-edge, |estimate|) pairs.
pub fn roc_from_scores(scored: &[(bool, f64)]) -> Result<Vec<RocPoint>> {
    let n_pos = scored.iter().filter(|(p, _)| *p).count();
    let n_neg = scored.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::DegenerateTruth(format!(
            "need both edge classes, found {n_pos} positives and {n_neg} negatives"
        )));
    }
    let mut sorted = scored.to_vec();
    sorted.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap());
    let mut curve = vec![(0.0, 0.0)];
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut i = 0usize;
    while i < sorted.len() {
        let threshold = sorted[i].1;
        while i < sorted.len() && sorted[i].1 == threshold {
            if sorted[i].0 {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        curve.push((fp as f64 / n_neg as f64, tp as f64 / n_pos as f64));
    }
    // the final sweep point at threshold zero classifies everything positive
    if *curve.last().unwrap() != (1.0, 1.0) {
        curve.push((1.0, 1.0));
    }
    curve.dedup();
    Ok(curve)
}

/// Trapezoidal area under a curve with nondecreasing FP-rate.
pub fn auc(curve: &[RocPoint]) -> Result<f64> {
    if curve.len() < 2 {
        return Err(Error::InvalidInput("AUC needs at least two curve points".into()));
    }
    if curve.windows(2).any(|w| w[1].0 < w[0].0) {
        return Err(Error::InvalidInput("ROC curve is not sorted by FP-rate".into()));
    }
    let mut area = 0.0;
    for w in curve.windows(2) {
        area += 0.5 * (w[1].0 - w[0].0) * (w[0].1 + w[1].1);
    }
    Ok(area)
}

/// TP-rate of a monotone curve at a fixed FP-rate, by linear interpolation
/// (taking the upper envelope at vertical jumps).
fn tpr_at(curve: &[RocPoint], f: f64) -> f64 {
    let mut lo = curve[0];
    for &pt in curve {
        if pt.0 <= f {
            lo = pt;
        } else {
            if pt.0 > lo.0 {
                return lo.1 + (f - lo.0) / (pt.0 - lo.0) * (pt.1 - lo.1);
            }
            return lo.1;
        }
    }
    lo.1
}

/// Vertical averaging of TP-rates on a 101-point FP grid.
pub fn average_roc(curves: &[Vec<RocPoint>]) -> Result<Vec<RocPoint>> {
    if curves.is_empty() {
        return Err(Error::InvalidInput("cannot average zero ROC curves".into()));
    }
    let grid: Vec<f64> = (0..=100).map(|i| i as f64 / 100.0).collect();
    let mut out = Vec::with_capacity(grid.len());
    for &f in &grid {
        let avg = curves.iter().map(|c| tpr_at(c, f)).sum::<f64>() / curves.len() as f64;
        out.push((f, avg));
    }
    Ok(out)
}

// ------------------------- convergence diagnostics -------------------------

#[derive(Clone, Copy, Debug)]
pub struct GewekeResult {
    pub z: f64,
    pub p: f64,
}

/// Geweke diagnostic: standardized difference between the mean of the first
/// 10% and the last 50% of the chain, variances from the zero-frequency
/// spectral density with a 4%-of-length lag window.
pub fn geweke_test(chain: &[f64]) -> Result<GewekeResult> {
    let n = chain.len();
    if n < 100 {
        return Err(Error::InvalidInput(format!(
            "Geweke test needs at least 100 samples, found {n}"
        )));
    }
    let n_a = n / 10;
    let n_b = n / 2;
    let seg_a = &chain[..n_a];
    let seg_b = &chain[n - n_b..];
    let s_a = spectral_density_zero_window(seg_a, 0.04)?;
    let s_b = spectral_density_zero_window(seg_b, 0.04)?;
    let denom = s_a / n_a as f64 + s_b / n_b as f64;
    if !(denom > 0.0) {
        return Err(Error::UndefinedVariance(
            "zero spectral variance in Geweke segments".into(),
        ));
    }
    let z = (mean(seg_a) - mean(seg_b)) / denom.sqrt();
    Ok(GewekeResult {
        z,
        p: 2.0 * std_normal_sf(z.abs()),
    })
}

#[derive(Clone, Copy, Debug)]
pub struct HeidelbergerResult {
    /// Cramer-von Mises p-value of the final stationarity attempt.
    pub stationarity_p: f64,
    /// Whether some initial-discard window passed at level 0.05.
    pub stationary: bool,
    /// Start index of the retained window.
    pub kept_start: usize,
    /// Half-width test at relative precision 0.1 on the retained window.
    pub halfwidth_pass: bool,
}

/// Heidelberger–Welch: Cramer-von Mises stationarity test with iterative
/// discarding of initial 10% segments (up to half the chain), then the
/// half-width test on the retained window.
pub fn heidelberger_test(chain: &[f64]) -> Result<HeidelbergerResult> {
    let n = chain.len();
    if n < 100 {
        return Err(Error::InvalidInput(format!(
            "Heidelberger test needs at least 100 samples, found {n}"
        )));
    }
    // scale estimate from the second half of the full chain; a lag-window
    // estimate with sqrt-length window keeps power against trends, which a
    // near-unit-root AR fit would absorb into the spectral density
    let half = &chain[n / 2..];
    let lags = (half.len() as f64).sqrt().ceil() as usize;
    let s0 = spectral_density_zero_window_lags(half, lags)?;
    if !(s0 > 0.0) {
        return Err(Error::UndefinedVariance(
            "zero spectral density in the second half of the chain".into(),
        ));
    }
    let mut stationarity_p = 0.0;
    let mut kept_start = 0;
    let mut stationary = false;
    for step in 0..=5 {
        kept_start = n * step / 10;
        let window = &chain[kept_start..];
        let nw = window.len() as f64;
        let wbar = mean(window);
        let mut cumsum = 0.0;
        let mut stat = 0.0;
        for (k, &x) in window.iter().enumerate() {
            cumsum += x;
            let bridge = cumsum - wbar * (k + 1) as f64;
            stat += bridge * bridge;
        }
        let cvm = stat / (nw * nw * s0);
        stationarity_p = 1.0 - cramer_von_mises_cdf(cvm);
        if stationarity_p > 0.05 {
            stationary = true;
            break;
        }
    }
    let window = &chain[kept_start..];
    let wbar = mean(window);
    let s_ci = spectral_density_zero_ar(window)?;
    let halfwidth = 1.96 * (s_ci / window.len() as f64).sqrt();
    let halfwidth_pass = wbar != 0.0 && (halfwidth / wbar).abs() <= 0.1;
    Ok(HeidelbergerResult {
        stationarity_p,
        stationary,
        kept_start,
        halfwidth_pass,
    })
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Zero-frequency spectral density via a Bartlett lag window of
/// `frac * len` autocovariances.
pub fn spectral_density_zero_window(xs: &[f64], frac: f64) -> Result<f64> {
    let lag_max = ((xs.len() as f64 * frac) as usize).max(1);
    spectral_density_zero_window_lags(xs, lag_max)
}

/// Same estimator with an explicit lag-window length.
pub fn spectral_density_zero_window_lags(xs: &[f64], lag_max: usize) -> Result<f64> {
    let n = xs.len();
    if n < 4 {
        return Err(Error::InvalidInput("segment too short for spectral estimate".into()));
    }
    let m = mean(xs);
    let lag_max = lag_max.clamp(1, n - 1);
    let gamma = |lag: usize| -> f64 {
        (0..n - lag)
            .map(|i| (xs[i] - m) * (xs[i + lag] - m))
            .sum::<f64>()
            / n as f64
    };
    let g0 = gamma(0);
    if g0 <= 1e-300 {
        return Err(Error::UndefinedVariance("constant chain".into()));
    }
    let mut s = g0;
    for lag in 1..=lag_max {
        let w = 1.0 - lag as f64 / (lag_max + 1) as f64;
        s += 2.0 * w * gamma(lag);
    }
    Ok(s.max(1e-300))
}

/// Zero-frequency spectral density from a Yule-Walker AR fit with AIC order
/// selection, the estimator the half-width and stationarity tests lean on.
pub fn spectral_density_zero_ar(xs: &[f64]) -> Result<f64> {
    let n = xs.len();
    if n < 8 {
        return Err(Error::InvalidInput("segment too short for AR spectral estimate".into()));
    }
    let m = mean(xs);
    let max_order = ((10.0 * (n as f64).log10()) as usize).min(n / 4).min(30);
    let mut autocov = Vec::with_capacity(max_order + 1);
    for lag in 0..=max_order {
        autocov.push(
            (0..n - lag)
                .map(|i| (xs[i] - m) * (xs[i + lag] - m))
                .sum::<f64>()
                / n as f64,
        );
    }
    if autocov[0] <= 1e-300 {
        return Err(Error::UndefinedVariance("constant chain".into()));
    }
    // Levinson-Durbin recursion, tracking AIC per order
    let mut best_s = autocov[0]; // order 0
    let mut best_aic = n as f64 * autocov[0].ln();
    let mut phi = vec![0.0f64; max_order + 1];
    let mut prev = vec![0.0f64; max_order + 1];
    let mut sigma2 = autocov[0];
    for order in 1..=max_order {
        let mut acc = autocov[order];
        for j in 1..order {
            acc -= prev[j] * autocov[order - j];
        }
        let reflection = acc / sigma2;
        phi[order] = reflection;
        for j in 1..order {
            phi[j] = prev[j] - reflection * prev[order - j];
        }
        sigma2 *= 1.0 - reflection * reflection;
        if sigma2 <= 0.0 {
            break;
        }
        let aic = n as f64 * sigma2.ln() + 2.0 * order as f64;
        if aic < best_aic {
            best_aic = aic;
            let phi_sum: f64 = phi[1..=order].iter().sum();
            let denom = (1.0 - phi_sum) * (1.0 - phi_sum);
            if denom > 1e-12 {
                best_s = sigma2 / denom;
            }
        }
        prev[..=order].copy_from_slice(&phi[..=order]);
    }
    Ok(best_s.max(1e-300))
}

/// Asymptotic CDF of the Cramer-von Mises statistic: eigen-expansion with
/// Bessel-K terms, summed until the exponential cutoff kills the tail.
pub fn cramer_von_mises_cdf(q: f64) -> f64 {
    if q <= 0.0 {
        return 0.0;
    }
    let pi = std::f64::consts::PI;
    let mut gamma_ratio = pi.sqrt(); // Gamma(k + 1/2) / Gamma(k + 1) at k = 0
    let mut sum = 0.0;
    for k in 0..400usize {
        let fk = 4.0 * k as f64 + 1.0;
        let u = fk * fk / (16.0 * q);
        if u <= 50.0 {
            let z = gamma_ratio * fk.sqrt() / (pi.powf(1.5) * q.sqrt());
            sum += z * (-u).exp() * besselk_quarter(u);
        } else if k > 0 {
            break;
        }
        gamma_ratio *= (k as f64 + 0.5) / (k as f64 + 1.0);
    }
    sum.clamp(0.0, 1.0)
}

/// K_{1/4}(x) by Simpson quadrature of the integral representation
/// K_v(x) = int_0^inf exp(-x cosh t) cosh(v t) dt.
fn besselk_quarter(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    // integrand is negligible once x cosh(t) - t/4 > ~740
    let t_max = ((745.0 + x.max(1.0).ln()) / x).max(2.0).acosh() + 1.0;
    let n = 2000usize;
    let h = t_max / n as f64;
    let f = |t: f64| (-x * t.cosh()).exp() * (0.25 * t).cosh();
    let mut s = f(0.0) + f(t_max);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(i as f64 * h);
    }
    s * h / 3.0
}
