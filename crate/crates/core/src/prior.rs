//! The decoupled two-way-sparsity prior.
//!
//! Coefficient trajectories across time carry Laplace(1/lambda) marginals
//! tied together by a Gaussian copula whose correlation decays as
//! rho^|t - t'|. That AR(1) structure makes the copula precision matrix
//! tridiagonal with closed-form entries, and the lag-1 correlation itself
//! gets a reverse-exponential prior on [0, 1) that favours smooth
//! trajectories as `k` grows.

use rand::Rng;

use crate::error::{Error, Result};
use crate::stats::laplace::laplace_quantile_from_normal_score;
use crate::stats::rng::RngStream;
use crate::stats::tridiag::{sample_normal_tridiag_precision, TridiagonalMatrix};

/// AR(1) copula correlation: implied T x T matrix has entries rho^|t - t'|,
/// positive definite for rho in [0, 1).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CopulaCorrelation {
    rho: f64,
    t_len: usize,
}

impl CopulaCorrelation {
    pub fn new(rho: f64, t_len: usize) -> Result<Self> {
        if !(0.0..1.0).contains(&rho) {
            return Err(Error::InvalidParameter(format!(
                "copula correlation must lie in [0,1), got {rho}"
            )));
        }
        if t_len == 0 {
            return Err(Error::InvalidParameter(
                "copula correlation needs at least one time point".into(),
            ));
        }
        Ok(Self { rho, t_len })
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn t_len(&self) -> usize {
        self.t_len
    }

    /// Entry (t, t') of the implied covariance matrix.
    pub fn covariance_entry(&self, t: usize, t_prime: usize) -> f64 {
        self.rho.powi(t.abs_diff(t_prime) as i32)
    }
}

/// Closed-form tridiagonal inverse of the AR(1) covariance: corners
/// 1/(1-rho^2), interior diagonal (1+rho^2)/(1-rho^2), off-diagonal
/// -rho/(1-rho^2).
pub fn build_precision(c: &CopulaCorrelation) -> TridiagonalMatrix {
    let t = c.t_len();
    if t == 1 {
        return TridiagonalMatrix::identity(1);
    }
    let rho = c.rho();
    let denom = 1.0 - rho * rho;
    let corner = 1.0 / denom;
    let interior = (1.0 + rho * rho) / denom;
    let off_val = -rho / denom;
    let mut main = vec![interior; t];
    main[0] = corner;
    main[t - 1] = corner;
    TridiagonalMatrix::new(main, vec![off_val; t - 1]).expect("dimensions consistent")
}

/// log |Sigma| = (T - 1) ln(1 - rho^2).
pub fn covariance_log_det(c: &CopulaCorrelation) -> f64 {
    (c.t_len() as f64 - 1.0) * (1.0 - c.rho() * c.rho()).ln()
}

/// Log of the reverse-exponential density k e^{k rho} / (e^k - 1) on [0, 1).
pub fn reverse_exp_log_density(rho: f64, k: f64) -> Result<f64> {
    check_rexp_rate(k)?;
    if !(0.0..1.0).contains(&rho) {
        return Err(Error::InvalidParameter(format!(
            "reverse-exponential support is [0,1), got {rho}"
        )));
    }
    Ok(k.ln() + k * rho - ln_exp_m1(k))
}

/// ln(e^k - 1), stable for both small and large k.
fn ln_exp_m1(k: f64) -> f64 {
    if k > 1.0 {
        k + (-(-k).exp()).ln_1p()
    } else {
        k.exp_m1().ln()
    }
}

/// Inverse-CDF draw from the reverse-exponential distribution.
pub fn sample_reverse_exp(k: f64, rng: &mut RngStream) -> Result<f64> {
    check_rexp_rate(k)?;
    let u: f64 = rng.random();
    let rho = if k > 700.0 {
        // e^k overflows; ln(1 + u(e^k - 1))/k = 1 + ln(u)/k up to O(e^-k)
        1.0 + u.ln() / k
    } else {
        (u * k.exp_m1()).ln_1p() / k
    };
    Ok(rho.clamp(0.0, 1.0 - 1e-12))
}

fn check_rexp_rate(k: f64) -> Result<()> {
    if !(k > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "reverse-exponential rate must be positive, got {k}"
        )));
    }
    Ok(())
}

/// Draws one coefficient trajectory of length `t_len` from the prior:
/// rho from the reverse-exponential, a normal vector from the AR(1) copula,
/// then each coordinate mapped to its Laplace(1/lambda) marginal.
pub fn sample_prior_trajectory(
    lambda: f64,
    k: f64,
    t_len: usize,
    rng: &mut RngStream,
) -> Result<Vec<f64>> {
    if !(lambda > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "laplace rate must be positive, got {lambda}"
        )));
    }
    let rho = sample_reverse_exp(k, rng)?;
    sample_trajectory_at_rho(lambda, rho, t_len, rng)
}

/// Same construction with the correlation pinned, used by the independence
/// checks and by ablations.
pub fn sample_trajectory_at_rho(
    lambda: f64,
    rho: f64,
    t_len: usize,
    rng: &mut RngStream,
) -> Result<Vec<f64>> {
    let c = CopulaCorrelation::new(rho, t_len)?;
    let precision = build_precision(&c);
    let z = sample_normal_tridiag_precision(&precision, &vec![0.0; t_len], rng)?;
    z.iter()
        .map(|&zt| laplace_quantile_from_normal_score(zt, lambda))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::gof::{ks_test_cdf, ks_test_two_sample};
    use crate::stats::laplace::laplace_cdf;
    use crate::stats::normal::std_normal_quantile;
    use approx::assert_relative_eq;
    use nalgebra::DMatrix;

    fn dense_covariance(rho: f64, t: usize) -> DMatrix<f64> {
        DMatrix::from_fn(t, t, |i, j| rho.powi(i.abs_diff(j) as i32))
    }

    fn precision_as_dense(c: &CopulaCorrelation) -> DMatrix<f64> {
        let p = build_precision(c);
        let t = c.t_len();
        DMatrix::from_fn(t, t, |i, j| {
            if i == j {
                p.main()[i]
            } else if i.abs_diff(j) == 1 {
                p.off()[i.min(j)]
            } else {
                0.0
            }
        })
    }

    #[test]
    fn rho_zero_gives_identity() {
        let c = CopulaCorrelation::new(0.0, 5).unwrap();
        let p = build_precision(&c);
        assert_eq!(p.main(), &[1.0; 5]);
        assert_eq!(p.off(), &[0.0; 4]);
    }

    #[test]
    fn two_by_two_matches_dense_inverse() {
        let c = CopulaCorrelation::new(0.5, 2).unwrap();
        let p = build_precision(&c);
        let inv = dense_covariance(0.5, 2).try_inverse().unwrap();
        assert_relative_eq!(p.main()[0], 4.0 / 3.0, max_relative = 1e-14);
        assert_relative_eq!(p.main()[1], 4.0 / 3.0, max_relative = 1e-14);
        assert_relative_eq!(p.off()[0], -2.0 / 3.0, max_relative = 1e-14);
        assert_relative_eq!(p.main()[0], inv[(0, 0)], max_relative = 1e-12);
        assert_relative_eq!(p.off()[0], inv[(0, 1)], max_relative = 1e-12);
    }

    #[test]
    fn product_with_covariance_is_identity() {
        // grid check: rho in {0,...,0.9}, T in {2,...,12}
        for i in 0..10 {
            let rho = i as f64 * 0.1;
            for t in 2..=12 {
                let c = CopulaCorrelation::new(rho, t).unwrap();
                let prod = precision_as_dense(&c) * dense_covariance(rho, t);
                for r in 0..t {
                    for s in 0..t {
                        let expected = if r == s { 1.0 } else { 0.0 };
                        assert!(
                            (prod[(r, s)] - expected).abs() < 1e-10,
                            "rho={rho} T={t} entry ({r},{s}) = {}",
                            prod[(r, s)]
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn high_rho_product_tight() {
        let c = CopulaCorrelation::new(0.8, 6).unwrap();
        let prod = precision_as_dense(&c) * dense_covariance(0.8, 6);
        let max_dev = (0..6)
            .flat_map(|i| (0..6).map(move |j| (i, j)))
            .map(|(i, j)| (prod[(i, j)] - if i == j { 1.0 } else { 0.0 }).abs())
            .fold(0.0f64, f64::max);
        assert!(max_dev < 1e-12, "max deviation {max_dev}");
    }

    #[test]
    fn log_det_matches_dense() {
        assert_eq!(covariance_log_det(&CopulaCorrelation::new(0.0, 7).unwrap()), 0.0);
        let c = CopulaCorrelation::new(0.5, 2).unwrap();
        assert_relative_eq!(covariance_log_det(&c), 0.75f64.ln(), max_relative = 1e-14);
        let c = CopulaCorrelation::new(0.9, 5).unwrap();
        assert_relative_eq!(covariance_log_det(&c), 4.0 * 0.19f64.ln(), max_relative = 1e-13);
        for i in 0..10 {
            let rho = i as f64 * 0.1;
            for t in 2..=12 {
                let c = CopulaCorrelation::new(rho, t).unwrap();
                let dense_ld = dense_covariance(rho, t).determinant().ln();
                assert!(
                    (covariance_log_det(&c) - dense_ld).abs() < 1e-10,
                    "rho={rho} T={t}"
                );
            }
        }
    }

    #[test]
    fn reverse_exp_density_values() {
        let v = reverse_exp_log_density(0.0, 1.0).unwrap();
        assert_relative_eq!(v, -(std::f64::consts::E - 1.0).ln(), max_relative = 1e-12);
        assert!((v - (-0.5413)).abs() < 1e-4);
        // uniform limit as k -> 0
        let small = reverse_exp_log_density(0.37, 1e-6).unwrap();
        assert!(small.exp() - 1.0 < 1e-5, "density {}", small.exp());
        // quadrature normalization at k = 20
        let k = 20.0;
        let n = 200_001usize;
        let h = 1.0 / (n - 1) as f64;
        let mut integral = 0.0;
        for i in 0..n {
            let x = (i as f64 * h).min(1.0 - 1e-15);
            let w = if i == 0 || i == n - 1 {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            integral += w * reverse_exp_log_density(x, k).unwrap().exp();
        }
        integral *= h / 3.0;
        assert!((integral - 1.0).abs() < 1e-8, "integral {integral}");
    }

    #[test]
    fn reverse_exp_support_enforced() {
        assert!(reverse_exp_log_density(1.0, 1.0).is_err());
        assert!(reverse_exp_log_density(-0.1, 1.0).is_err());
        assert!(reverse_exp_log_density(0.5, 0.0).is_err());
    }

    #[test]
    fn reverse_exp_sampler_matches_density() {
        let k = 3.0;
        let mut rng = RngStream::new(51, 0);
        let draws: Vec<f64> = (0..100_000)
            .map(|_| sample_reverse_exp(k, &mut rng).unwrap())
            .collect();
        assert!(draws.iter().all(|&r| (0.0..1.0).contains(&r)));
        let cdf = |x: f64| ((k * x.clamp(0.0, 1.0)).exp_m1()) / k.exp_m1();
        let res = ks_test_cdf(&draws, cdf);
        assert!(res.p_value > 0.01, "KS p={}", res.p_value);
    }

    #[test]
    fn trajectory_with_rho_zero_is_independent() {
        let (lambda, t_len) = (2.0, 4);
        let mut rng = RngStream::new(52, 0);
        let mut lag_products = 0.0;
        let mut count = 0usize;
        let n = 100_000;
        for _ in 0..n {
            let b = sample_trajectory_at_rho(lambda, 0.0, t_len, &mut rng).unwrap();
            // back to the normal scale; lag-1 correlation should vanish
            let z: Vec<f64> = b
                .iter()
                .map(|&bt| std_normal_quantile(laplace_cdf(bt, lambda).unwrap()))
                .collect();
            for t in 0..t_len - 1 {
                lag_products += z[t] * z[t + 1];
                count += 1;
            }
        }
        let corr = lag_products / count as f64;
        assert!(corr.abs() < 0.01, "lag-1 correlation {corr}");
    }

    #[test]
    fn trajectory_marginals_are_laplace_per_coordinate() {
        // lambda = 20, k = 1, T = 8; every coordinate must pass a KS test
        // against Laplace(1/20) at the Bonferroni-corrected level 0.01
        let (lambda, k, t_len) = (20.0, 1.0, 8usize);
        let n = 100_000usize;
        let mut rng = RngStream::new(53, 0);
        let mut per_coord: Vec<Vec<f64>> = vec![Vec::with_capacity(n); t_len];
        for _ in 0..n {
            let b = sample_prior_trajectory(lambda, k, t_len, &mut rng).unwrap();
            for (t, &bt) in b.iter().enumerate() {
                per_coord[t].push(bt);
            }
        }
        let level = 0.01 / t_len as f64;
        for (t, coord) in per_coord.iter().enumerate() {
            let res = ks_test_cdf(coord, |x| laplace_cdf(x, lambda).unwrap());
            assert!(
                res.p_value > level,
                "coordinate {t}: KS p={} below Bonferroni level {level}",
                res.p_value
            );
        }
        // pooled check on 1e5 values (coordinates within a trajectory are
        // correlated, so pool only as many trajectories as keep the KS
        // approximation honest)
        let keep = n / t_len;
        let pooled: Vec<f64> = (0..t_len)
            .flat_map(|t| per_coord[t][..keep].to_vec())
            .collect();
        let res = ks_test_cdf(&pooled, |x| laplace_cdf(x, lambda).unwrap());
        assert!(res.p_value > 0.01, "pooled KS p={}", res.p_value);
    }

    #[test]
    fn normal_pair_correlation_matches_mean_rho() {
        // T = 2, k = 10: correlation of the underlying normal pair equals
        // E[rho] under the reverse-exponential, computed by quadrature
        let (lambda, k) = (1.0, 10.0);
        let n_grid = 100_001usize;
        let h = 1.0 / (n_grid - 1) as f64;
        let (mut num, mut den) = (0.0, 0.0);
        for i in 0..n_grid {
            let x = i as f64 * h;
            let w = if i == 0 || i == n_grid - 1 {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            let dens = (k * x).exp();
            num += w * x * dens;
            den += w * dens;
        }
        let expected = num / den;

        let mut rng = RngStream::new(54, 0);
        let n = 200_000usize;
        let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
        for _ in 0..n {
            let b = sample_prior_trajectory(lambda, k, 2, &mut rng).unwrap();
            let z0 = std_normal_quantile(laplace_cdf(b[0], lambda).unwrap());
            let z1 = std_normal_quantile(laplace_cdf(b[1], lambda).unwrap());
            sxy += z0 * z1;
            sxx += z0 * z0;
            syy += z1 * z1;
        }
        let corr = sxy / (sxx.sqrt() * syy.sqrt());
        assert!(
            (corr - expected).abs() < 0.02,
            "corr {corr} vs E[rho] {expected}"
        );
    }

    #[test]
    fn rho_zero_trajectories_match_independent_lasso_draws() {
        // two-sample check of the rho = 0 reduction
        let (lambda, t_len, n) = (5.0, 3usize, 60_000usize);
        let mut rng = RngStream::new(55, 0);
        let copula: Vec<f64> = (0..n)
            .flat_map(|_| sample_trajectory_at_rho(lambda, 0.0, t_len, &mut rng).unwrap())
            .collect();
        // reference: independent Laplace draws by inverse CDF
        let mut rng2 = RngStream::new(55, 1);
        let direct: Vec<f64> = (0..n * t_len)
            .map(|_| {
                let u: f64 = rand::Rng::random(&mut rng2);
                crate::stats::laplace::laplace_quantile(u.clamp(1e-16, 1.0 - 1e-16), lambda)
                    .unwrap()
            })
            .collect();
        let res = ks_test_two_sample(&copula, &direct);
        assert!(res.p_value > 0.01, "two-sample KS p={}", res.p_value);
    }
}
