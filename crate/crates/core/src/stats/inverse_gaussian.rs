//! Inverse-Gaussian sampling via the Michael–Schucany–Haas transformation:
//! one standard normal and one uniform per draw.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::stats::rng::RngStream;

/// Draws from IG(mu, lam) with mean `mu` and variance `mu^3 / lam`.
pub fn sample_inverse_gaussian(mu: f64, lam: f64, rng: &mut RngStream) -> Result<f64> {
    if !(mu > 0.0) || !(lam > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "inverse Gaussian needs mu > 0 and lam > 0, got mu={mu}, lam={lam}"
        )));
    }
    let z: f64 = StandardNormal.sample(rng);
    let y = z * z;
    let w = mu * y / (2.0 * lam);
    // root of the MSH quadratic, written as mu / (1 + w + sqrt(w(w+2)))
    // so it stays positive under cancellation for large w
    let x = mu / (1.0 + w + (w * (w + 2.0)).sqrt());
    let u: f64 = rng.random();
    Ok(if u <= mu / (mu + x) { x } else { mu * mu / x })
}
