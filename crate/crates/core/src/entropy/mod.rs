//! Differential and discrete entropies, in bits.

mod histogram;
mod multires;

pub use histogram::{discretized_differential_entropy, gaussian_interval_mass, Histogram1D};
pub use multires::{partition_differential_entropy, AxisBox, Leaf, MultiResHistogram};

use nalgebra::Matrix3;

use crate::dd::DD;
use crate::error::{ensure_positive, invalid, Error, Result};

/// log2(2 pi e) / 2, the entropy of a unit-variance Gaussian.
pub fn unit_gaussian_entropy() -> f64 {
    0.5 * (2.0 * std::f64::consts::PI * std::f64::consts::E).log2()
}

/// (1/2) log2(2 pi e variance).
pub fn gaussian_entropy(variance: f64) -> Result<f64> {
    ensure_positive("variance", variance)?;
    Ok(unit_gaussian_entropy() + 0.5 * variance.log2())
}

/// h2(p) = -p log2 p - (1-p) log2 (1-p), with 0 log 0 = 0.
pub fn binary_entropy(p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(invalid("p", format!("must lie in [0, 1], got {p}")));
    }
    Ok(plogp(p) + plogp(1.0 - p))
}

fn plogp(p: f64) -> f64 {
    if p > 0.0 {
        -p * p.log2()
    } else {
        0.0
    }
}

/// Sum accumulated in double-double; histograms can hold millions of bins.
fn dd_sum(xs: impl Iterator<Item = f64>) -> f64 {
    let mut acc = DD::new(0.0);
    for x in xs {
        acc += DD::new(x);
    }
    acc.to_f64()
}

/// Shannon entropy of the normalized masses. Empty bins contribute nothing.
///
/// Masses are summed in ascending order, so any permutation of the same
/// masses gives a bit-identical result.
pub fn discrete_entropy(masses: &[f64]) -> Result<f64> {
    if masses.iter().any(|&m| !(m >= 0.0 && m.is_finite())) {
        return Err(invalid("masses", "must be finite and nonnegative"));
    }
    let mut sorted: Vec<f64> = masses.iter().copied().filter(|&m| m > 0.0).collect();
    sorted.sort_by(f64::total_cmp);
    let total = dd_sum(sorted.iter().copied());
    if total <= 0.0 {
        return Err(Error::ZeroMass);
    }
    Ok(dd_sum(sorted.iter().map(|&m| plogp(m / total))))
}

/// Symmetric positive semi-definite 3x3 covariance matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CovarianceMatrix3(Matrix3<f64>);

impl CovarianceMatrix3 {
    pub fn new(m: Matrix3<f64>) -> Result<Self> {
        if m.iter().any(|x| !x.is_finite()) {
            return Err(invalid("covariance", "entries must be finite"));
        }
        let scale = m.abs().max().max(f64::MIN_POSITIVE);
        for i in 0..3 {
            for j in 0..i {
                if (m[(i, j)] - m[(j, i)]).abs() > 1e-12 * scale {
                    return Err(invalid("covariance", "matrix is not symmetric"));
                }
            }
        }
        let trace = m.trace();
        let eig = m.symmetric_eigenvalues();
        if eig.iter().any(|&l| l < -1e-12 * trace.abs()) {
            return Err(invalid("covariance", "matrix is not positive semi-definite"));
        }
        Ok(Self(m))
    }

    pub fn from_rows(rows: [[f64; 3]; 3]) -> Result<Self> {
        Self::new(Matrix3::from_fn(|i, j| rows[i][j]))
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }

    /// Variance of `c . x`.
    pub fn quadratic_form(&self, c: &[f64; 3]) -> f64 {
        let v = nalgebra::Vector3::from(*c);
        (v.transpose() * self.0 * v)[(0, 0)]
    }

    /// 1 / (Sigma^-1)_tt: variance of component `target` given the other two.
    pub fn conditional_variance(&self, target: usize) -> Result<f64> {
        if target > 2 {
            return Err(invalid("target_index", format!("must be 0, 1 or 2, got {target}")));
        }
        // Scale to unit diagonal first so the singularity test is relative.
        let d = self.0.diagonal().map(|x| x.sqrt());
        if d.iter().any(|&x| x <= 0.0) {
            return Err(Error::DegenerateCorrelations);
        }
        let corr = Matrix3::from_fn(|i, j| self.0[(i, j)] / (d[i] * d[j]));
        let chol = corr.cholesky().ok_or(Error::DegenerateCorrelations)?;
        let pivot_min = chol.l().diagonal().min();
        if pivot_min <= 1e-7 {
            return Err(Error::DegenerateCorrelations);
        }
        let inv = chol.inverse();
        Ok(d[target] * d[target] / inv[(target, target)])
    }
}

/// Entropy of the target coordinate conditioned on the other two, for a
/// jointly Gaussian vector with covariance `cov`.
pub fn gaussian_conditional_entropy(cov: &CovarianceMatrix3, target: usize) -> Result<f64> {
    gaussian_entropy(cov.conditional_variance(target)?)
}
