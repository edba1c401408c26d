//! Laplace(1/lambda) distribution: density (lambda/2) exp(-lambda |x|).

use crate::error::{Error, Result};

/// F_L(x) for the Laplace distribution with rate `lambda`.
pub fn laplace_cdf(x: f64, lambda: f64) -> Result<f64> {
    check_rate(lambda)?;
    Ok(if x < 0.0 {
        0.5 * (lambda * x).exp()
    } else {
        1.0 - 0.5 * (-lambda * x).exp()
    })
}

/// F_L^{-1}(p) for the Laplace distribution with rate `lambda`.
pub fn laplace_quantile(p: f64, lambda: f64) -> Result<f64> {
    check_rate(lambda)?;
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "laplace quantile needs p in (0,1), got {p}"
        )));
    }
    Ok(if p < 0.5 {
        (2.0 * p).ln() / lambda
    } else {
        -(2.0 * (1.0 - p)).ln() / lambda
    })
}

/// Maps a standard-normal score to the Laplace scale through the upper tail,
/// avoiding the cancellation in `1 - Phi(z)` for large `z`.
pub fn laplace_quantile_from_normal_score(z: f64, lambda: f64) -> Result<f64> {
    check_rate(lambda)?;
    let tail = super::normal::std_normal_sf(z.abs()).max(1e-300);
    let mag = -(2.0 * tail).ln() / lambda;
    Ok(if z < 0.0 { -mag.max(0.0) } else { mag.max(0.0) })
}

fn check_rate(lambda: f64) -> Result<()> {
    if !(lambda > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "laplace rate must be positive, got {lambda}"
        )));
    }
    Ok(())
}
