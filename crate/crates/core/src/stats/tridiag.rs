//! Symmetric tridiagonal matrices with an LDL^T factorization, plus exact
//! multivariate-normal sampling from a tridiagonal precision in O(T).

use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::stats::rng::RngStream;

const PIVOT_FLOOR: f64 = 1e-12;

/// Symmetric tridiagonal matrix: `main` of length T, `off` of length T-1.
#[derive(Clone, Debug, PartialEq)]
pub struct TridiagonalMatrix {
    main: Vec<f64>,
    off: Vec<f64>,
}

impl TridiagonalMatrix {
    pub fn new(main: Vec<f64>, off: Vec<f64>) -> Result<Self> {
        if main.is_empty() {
            return Err(Error::InvalidParameter(
                "tridiagonal matrix needs dimension >= 1".into(),
            ));
        }
        if off.len() + 1 != main.len() {
            return Err(Error::InvalidParameter(format!(
                "off-diagonal length {} does not match dimension {}",
                off.len(),
                main.len()
            )));
        }
        Ok(Self { main, off })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            main: vec![1.0; dim],
            off: vec![0.0; dim.saturating_sub(1)],
        }
    }

    pub fn dim(&self) -> usize {
        self.main.len()
    }

    pub fn main(&self) -> &[f64] {
        &self.main
    }

    pub fn off(&self) -> &[f64] {
        &self.off
    }

    /// v' M v.
    pub fn quadratic_form(&self, v: &[f64]) -> f64 {
        assert_eq!(v.len(), self.dim());
        let mut q = 0.0;
        for i in 0..v.len() {
            q += self.main[i] * v[i] * v[i];
        }
        for i in 0..self.off.len() {
            q += 2.0 * self.off[i] * v[i] * v[i + 1];
        }
        q
    }

    /// M v, used by tests and the dense-identity checks.
    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.dim());
        let t = self.dim();
        let mut out = vec![0.0; t];
        for i in 0..t {
            let mut s = self.main[i] * v[i];
            if i > 0 {
                s += self.off[i - 1] * v[i - 1];
            }
            if i + 1 < t {
                s += self.off[i] * v[i + 1];
            }
            out[i] = s;
        }
        out
    }

    /// LDL^T factorization; fails when a pivot drops to the floor, which
    /// signals a non-positive-definite input.
    pub fn ldl(&self) -> Result<LdlFactor> {
        let t = self.dim();
        let mut d = vec![0.0; t];
        let mut l = vec![0.0; t.saturating_sub(1)];
        d[0] = self.main[0];
        if d[0] <= PIVOT_FLOOR {
            return Err(Error::FactorizationFailure(format!(
                "pivot {} at index 0 below threshold",
                d[0]
            )));
        }
        for i in 1..t {
            l[i - 1] = self.off[i - 1] / d[i - 1];
            d[i] = self.main[i] - l[i - 1] * self.off[i - 1];
            if d[i] <= PIVOT_FLOOR {
                return Err(Error::FactorizationFailure(format!(
                    "pivot {} at index {i} below threshold",
                    d[i]
                )));
            }
        }
        Ok(LdlFactor { d, l })
    }
}

/// Factors M = L D L^T with unit lower-bidiagonal L.
#[derive(Clone, Debug)]
pub struct LdlFactor {
    d: Vec<f64>,
    l: Vec<f64>,
}

impl LdlFactor {
    pub fn dim(&self) -> usize {
        self.d.len()
    }

    /// Solves M x = rhs.
    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        assert_eq!(rhs.len(), self.dim());
        let t = self.dim();
        let mut x = rhs.to_vec();
        for i in 1..t {
            x[i] -= self.l[i - 1] * x[i - 1];
        }
        for i in 0..t {
            x[i] /= self.d[i];
        }
        for i in (0..t.saturating_sub(1)).rev() {
            x[i] -= self.l[i] * x[i + 1];
        }
        x
    }

    pub fn log_det(&self) -> f64 {
        self.d.iter().map(|&d| d.ln()).sum()
    }
}

/// Draws from N(P^{-1} h, P^{-1}) for tridiagonal precision `P` and natural
/// parameter (shift) `h = P * mean`, in O(T) per draw.
pub fn sample_normal_tridiag_precision(
    precision: &TridiagonalMatrix,
    shift: &[f64],
    rng: &mut RngStream,
) -> Result<Vec<f64>> {
    if shift.len() != precision.dim() {
        return Err(Error::InvalidParameter(format!(
            "shift length {} does not match dimension {}",
            shift.len(),
            precision.dim()
        )));
    }
    let factor = precision.ldl()?;
    let mean = factor.solve(shift);
    let t = precision.dim();
    // x = mean + L^{-T} D^{-1/2} z gives covariance (L D L^T)^{-1}
    let mut x: Vec<f64> = (0..t).map(|_| StandardNormal.sample(rng)).collect();
    for i in 0..t {
        x[i] /= factor.d[i].sqrt();
    }
    for i in (0..t.saturating_sub(1)).rev() {
        let next = x[i + 1];
        x[i] -= factor.l[i] * next;
    }
    for i in 0..t {
        x[i] += mean[i];
    }
    Ok(x)
}
