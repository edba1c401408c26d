//! HOLP predictor screening: rank candidate predictors for a target by the
//! mean over time groups of their absolute per-time ordinary least-squares
//! projection coefficients, then keep the top `budget`.

use crate::data::PseudoTimeDataset;
use crate::error::{Error, Result};

/// Number of predictors to keep.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScreenBudget {
    /// round(N / ln N) for N total samples.
    Auto,
    Fixed(usize),
}

/// The `auto` rule: N / ln(N) rounded to the nearest integer (212 at
/// N = 1557).
pub fn auto_budget(n_samples: usize) -> usize {
    let n = n_samples as f64;
    (n / n.ln()).round() as usize
}

/// Ranks all non-target columns by mean-over-time |HOLP coefficient| and
/// returns the strongest `budget` of them, strongest first. Saturates at
/// p - 1 when the budget exceeds the number of candidates.
pub fn holp_screen(
    ds: &PseudoTimeDataset,
    target: usize,
    budget: ScreenBudget,
) -> Result<Vec<usize>> {
    let p = ds.n_nodes();
    if target >= p {
        return Err(Error::InvalidParameter(format!(
            "target index {target} out of range for {p} nodes"
        )));
    }
    if let Some(t) = (1..=ds.n_times()).find(|&t| ds.rows_at(t).len() < 2) {
        return Err(Error::InvalidParameter(format!(
            "time group {t} has fewer than 2 samples"
        )));
    }
    let budget = match budget {
        ScreenBudget::Auto => auto_budget(ds.n_samples()),
        ScreenBudget::Fixed(b) => {
            if b == 0 {
                return Err(Error::InvalidParameter("screen budget must be positive".into()));
            }
            if b > p - 1 {
                return Err(Error::InvalidParameter(format!(
                    "screen budget {b} exceeds {} candidate predictors",
                    p - 1
                )));
            }
            b
        }
    };
    let budget = budget.clamp(1, p - 1);

    let predictors: Vec<usize> = (0..p).filter(|&j| j != target).collect();
    let m = predictors.len();
    let values = ds.values();
    let mut mean_abs = vec![0.0f64; m];

    for t in 1..=ds.n_times() {
        let rows = ds.rows_at(t);
        let n_t = rows.len();
        // gram G = X X' + eps I over the n_t x n_t sample space
        let mut gram = vec![0.0f64; n_t * n_t];
        let mut x = vec![0.0f64; n_t * m];
        for (a, &row) in rows.iter().enumerate() {
            for (jj, &col) in predictors.iter().enumerate() {
                x[a * m + jj] = values[(row, col)];
            }
        }
        for a in 0..n_t {
            for b in a..n_t {
                let mut s = 0.0;
                for jj in 0..m {
                    s += x[a * m + jj] * x[b * m + jj];
                }
                gram[a * n_t + b] = s;
                gram[b * n_t + a] = s;
            }
        }
        let trace: f64 = (0..n_t).map(|a| gram[a * n_t + a]).sum();
        let jitter = 1e-8 * trace / n_t as f64 + 1e-300;
        for a in 0..n_t {
            gram[a * n_t + a] += jitter;
        }
        let y: Vec<f64> = rows.iter().map(|&row| values[(row, target)]).collect();
        let w = cholesky_solve(&mut gram, n_t, &y)?;
        // beta_t = X' w
        for jj in 0..m {
            let mut beta = 0.0;
            for a in 0..n_t {
                beta += x[a * m + jj] * w[a];
            }
            mean_abs[jj] += beta.abs();
        }
    }
    let scale = 1.0 / ds.n_times() as f64;
    mean_abs.iter_mut().for_each(|v| *v *= scale);

    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| {
        mean_abs[b]
            .partial_cmp(&mean_abs[a])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(predictors[a].cmp(&predictors[b]))
    });
    Ok(order[..budget].iter().map(|&jj| predictors[jj]).collect())
}

/// In-place dense Cholesky solve of the symmetric positive-definite system
/// stored row-major in `a`.
fn cholesky_solve(a: &mut [f64], n: usize, rhs: &[f64]) -> Result<Vec<f64>> {
    for i in 0..n {
        for j in i..n {
            let mut s = a[i * n + j];
            for k in 0..i {
                s -= a[i * n + k] * a[j * n + k];
            }
            if i == j {
                if s <= 0.0 {
                    return Err(Error::FactorizationFailure(format!(
                        "gram matrix not positive definite at pivot {i}"
                    )));
                }
                a[i * n + i] = s.sqrt();
            } else {
                a[j * n + i] = s / a[i * n + i];
            }
        }
    }
    let mut x = rhs.to_vec();
    for i in 0..n {
        for k in 0..i {
            x[i] -= a[i * n + k] * x[k];
        }
        x[i] /= a[i * n + i];
    }
    for i in (0..n).rev() {
        for k in i + 1..n {
            x[i] -= a[k * n + i] * x[k];
        }
        x[i] /= a[i * n + i];
    }
    Ok(x)
}
