//! Univariate slice sampler on a bounded support, stepping out (capped at the
//! bounds) followed by shrinkage (Neal 2003).

use rand::Rng;

use crate::error::{Error, Result};
use crate::stats::rng::RngStream;

const MAX_SHRINK: usize = 10_000;

/// One slice-sampling transition for `log_density` restricted to
/// `[lower, upper)`, started from `current`.
pub fn slice_sample_bounded<F: Fn(f64) -> f64>(
    log_density: F,
    lower: f64,
    upper: f64,
    current: f64,
    rng: &mut RngStream,
) -> Result<f64> {
    if !(lower <= current && current < upper) {
        return Err(Error::InvalidState(format!(
            "slice sampler started at {current} outside [{lower}, {upper})"
        )));
    }
    let f0 = log_density(current);
    if !f0.is_finite() {
        return Err(Error::InvalidState(format!(
            "log-density non-finite ({f0}) at current point {current}"
        )));
    }
    let level = f0 + rng.random::<f64>().ln();

    // place an initial window of width w around the current point, then step
    // out until the density falls below the slice or a bound is hit
    let w = (upper - lower) / 10.0;
    let mut left = current - rng.random::<f64>() * w;
    let mut right = left + w;
    while left > lower {
        if log_density(left) <= level {
            break;
        }
        left -= w;
    }
    left = left.max(lower);
    while right < upper {
        if log_density(right) <= level {
            break;
        }
        right += w;
    }
    right = right.min(upper);

    for _ in 0..MAX_SHRINK {
        let candidate = left + rng.random::<f64>() * (right - left);
        if candidate >= upper {
            right = upper;
            continue;
        }
        if log_density(candidate) > level {
            return Ok(candidate);
        }
        if candidate < current {
            left = candidate;
        } else {
            right = candidate;
        }
    }
    // the interval has shrunk to the current point; keeping it preserves the
    // stationary distribution
    Ok(current)
}
