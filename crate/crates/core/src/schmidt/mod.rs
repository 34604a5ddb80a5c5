//! Exact E3F of the symmetric triple-Gaussian state from its Schmidt
//! spectrum across the A|BC cut, plus numerical oracles for that spectrum.

mod kernel;
mod modes;

pub use kernel::{default_extent, kernel_moment_ratio, kernel_spectrum, MarginalKernel};
pub use modes::{
    hermite_functions, naive_product_overlap, projection_polynomial, projection_shape_fit,
    schmidt_mode, schmidt_mode_overlap, ProjectionParameterization, QuadratureSpec, ShapeFit,
};

use serde::{Deserialize, Serialize};

use crate::entropy::binary_entropy;
use crate::error::{ensure_positive, invalid, Error, Result};
use crate::types::TripartiteGaussianState;

/// R = (1/3) sqrt(5 + (2 su^4 + 2 sv^4) / (su^2 sv^2)). Always >= 1.
pub fn correlation_ratio(sigma_u_sq: f64, sigma_v_sq: f64) -> Result<f64> {
    ensure_positive("sigma_u_sq", sigma_u_sq)?;
    ensure_positive("sigma_v_sq", sigma_v_sq)?;
    let rho = sigma_u_sq / sigma_v_sq;
    Ok((5.0 + 2.0 * rho + 2.0 / rho).sqrt() / 3.0)
}

/// The variance ratio `sigma_u^2 / sigma_v^2 >= 1` that produces `r`.
pub fn variance_ratio_for(r: f64) -> Result<f64> {
    if !(r >= 1.0 && r.is_finite()) {
        return Err(invalid("R", format!("must be >= 1, got {r}")));
    }
    let b = 9.0 * r * r - 5.0;
    Ok((b + (b * b - 16.0).max(0.0).sqrt()) / 4.0)
}

/// Geometric eigenvalues of the single-party reduced state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchmidtSpectrum {
    pub r: f64,
    pub lambdas: Vec<f64>,
    pub n_max: usize,
}

impl SchmidtSpectrum {
    /// (R - 1) / (R + 1).
    pub fn ratio(&self) -> f64 {
        (self.r - 1.0) / (self.r + 1.0)
    }

    pub fn lambda0(&self) -> f64 {
        2.0 / (1.0 + self.r)
    }
}

/// lambda_n = (2 / (1 + R)) ((R - 1) / (R + 1))^n for n = 0..=n_max.
pub fn marginal_eigenvalues(r: f64, n_max: usize) -> Result<SchmidtSpectrum> {
    if !(r >= 1.0 && r.is_finite()) {
        return Err(invalid("R", format!("must be >= 1, got {r}")));
    }
    let l0 = 2.0 / (1.0 + r);
    let q = (r - 1.0) / (r + 1.0);
    let mut lambdas = Vec::with_capacity(n_max + 1);
    let mut l = l0;
    for _ in 0..=n_max {
        lambdas.push(l);
        l *= q;
    }
    Ok(SchmidtSpectrum { r, lambdas, n_max })
}

/// S(A) = h2(lambda_0) / lambda_0 for the symmetric pure state, which equals
/// its E3F.
pub fn exact_e3f_from_variances(sigma_u_sq: f64, sigma_v_sq: f64) -> Result<f64> {
    let r = correlation_ratio(sigma_u_sq, sigma_v_sq)?;
    let l0 = 2.0 / (1.0 + r);
    Ok(binary_entropy(l0)? / l0)
}

/// As [`exact_e3f_from_variances`]; asymmetric states are rejected.
pub fn exact_e3f(state: &TripartiteGaussianState) -> Result<f64> {
    if !state.is_symmetric() {
        return Err(Error::AsymmetricState);
    }
    exact_e3f_from_variances(state.sigma_u_sq.get(), state.sigma_v_sq.get())
}

/// Width of the Hermite-Gaussian Schmidt modes,
/// sqrt(su sv) ((su^2 + 2 sv^2) / (2 su^2 + sv^2))^(1/4).
pub fn schmidt_width(sigma_u_sq: f64, sigma_v_sq: f64) -> f64 {
    (sigma_u_sq * sigma_v_sq).sqrt().sqrt()
        * ((sigma_u_sq + 2.0 * sigma_v_sq) / (2.0 * sigma_u_sq + sigma_v_sq)).powf(0.25)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn correlation_ratio_examples() {
        assert_eq!(correlation_ratio(2.0, 2.0).unwrap(), 1.0);
        assert_abs_diff_eq!(correlation_ratio(4.0, 1.0).unwrap(), 13.5f64.sqrt() / 3.0, epsilon = 1e-15);
        let r = correlation_ratio(3.000307692307692e-6, 7.692307692307692e-11).unwrap();
        assert_abs_diff_eq!(r, 93.10, epsilon = 5e-3);
        assert!(correlation_ratio(0.0, 1.0).is_err());
    }

    #[test]
    fn eigenvalue_examples() {
        let s = marginal_eigenvalues(1.0, 3).unwrap();
        assert_eq!(s.lambdas, vec![1.0, 0.0, 0.0, 0.0]);
        let s = marginal_eigenvalues(3.0, 3).unwrap();
        assert_eq!(s.lambdas, vec![0.5, 0.25, 0.125, 0.0625]);
        let s = marginal_eigenvalues(93.10, 0).unwrap();
        assert_abs_diff_eq!(s.lambdas[0], 0.021254, epsilon = 1e-6);
        assert!(marginal_eigenvalues(0.99, 3).is_err());
    }

    #[test]
    fn exact_e3f_examples() {
        assert_eq!(exact_e3f_from_variances(1.0, 1.0).unwrap(), 0.0);
        let rho = variance_ratio_for(3.0).unwrap();
        assert_abs_diff_eq!(correlation_ratio(rho, 1.0).unwrap(), 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(exact_e3f_from_variances(rho, 1.0).unwrap(), 2.0, epsilon = 1e-12);
        let e = exact_e3f_from_variances(3.000307692307692e-6, 7.692307692307692e-11).unwrap();
        assert_abs_diff_eq!(e, 6.98, epsilon = 5e-3);
        let asym = TripartiteGaussianState::new(4.0, 1.0, 2.0).unwrap();
        assert!(matches!(exact_e3f(&asym), Err(Error::AsymmetricState)));
    }

    #[test]
    fn schmidt_width_example() {
        let s = schmidt_width(4.0, 1.0);
        assert_abs_diff_eq!(s, 2f64.sqrt() * (6.0f64 / 9.0).powf(0.25), epsilon = 1e-15);
        assert_abs_diff_eq!(s, 1.2779, epsilon = 1e-4);
    }
}
