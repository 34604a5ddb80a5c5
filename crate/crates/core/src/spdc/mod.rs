//! Cascaded-SPDC triphoton model: phase matching, the sinc amplitude and its
//! triple-Gaussian reduction in rotated (u, v, w) coordinates.

mod dispersion;
mod sinc;

pub use dispersion::{
    poling_period_from_dispersion, wavenumber, CongruentLnExtraordinary, DispersionTable,
    RefractiveIndex,
};
pub use sinc::{
    sinc, sinc_width_check, triphoton_sinc_amplitude, AmplitudeShape, GridSpec,
    SincTriphotonModel, SincWidthReport,
};

use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};

use crate::entropy::CovarianceMatrix3;
use crate::error::{ensure_positive, invalid, Error, Result};
use crate::types::{CoefficientVectors, ExperimentParams, TripartiteGaussianState, Triple};

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

/// Momenta entering the phase-matching condition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseMatchSolution {
    pub k_pump: f64,
    /// Signed poling momentum of the first stage (rad/m).
    pub k_poling_1: f64,
    pub k_poling_2: f64,
    pub k_p_tilde: f64,
    /// a = 3 L_z / (4 k_p_tilde), in m^2.
    pub a_param: f64,
}

impl PhaseMatchSolution {
    /// A solution with a given effective momentum and no poling breakdown.
    pub fn from_k_tilde(k_p_tilde: f64, crystal_length: f64) -> Result<Self> {
        let k = ensure_positive("k_p_tilde", k_p_tilde)?;
        let l = ensure_positive("crystal_length", crystal_length)?;
        Ok(Self {
            k_pump: k,
            k_poling_1: 0.0,
            k_poling_2: 0.0,
            k_p_tilde: k,
            a_param: 3.0 * l / (4.0 * k),
        })
    }
}

/// k_p_tilde = 2 pi n_p / lambda_p + s1 2 pi / Lambda_1 + s2 2 pi / Lambda_2.
pub fn effective_pump_momentum(params: &ExperimentParams) -> Result<PhaseMatchSolution> {
    params.validate()?;
    let k_pump = TWO_PI * params.n_pump / params.lambda_pump;
    let k_poling_1 = params
        .poling_period_1
        .map_or(0.0, |p| params.poling_sign_1.factor() * TWO_PI / p);
    let k_poling_2 = params
        .poling_period_2
        .map_or(0.0, |p| params.poling_sign_2.factor() * TWO_PI / p);
    let k_p_tilde = k_pump + k_poling_1 + k_poling_2;
    if !(k_p_tilde > 0.0) {
        return Err(Error::UnphysicalPhaseMatching(k_p_tilde));
    }
    Ok(PhaseMatchSolution {
        k_pump,
        k_poling_1,
        k_poling_2,
        k_p_tilde,
        a_param: 3.0 * params.crystal_length / (4.0 * k_p_tilde),
    })
}

/// Collinear quasi-phase-matching period 2 pi / (k_p - k_s - k_i).
pub fn poling_period(k_pump: f64, k_signal: f64, k_idler: f64) -> Result<f64> {
    let dk = k_pump - k_signal - k_idler;
    if !(dk > 0.0 && dk.is_finite()) {
        return Err(Error::InvalidMismatch(dk));
    }
    Ok(TWO_PI / dk)
}

/// Constant `c` of the approximation `sinc(x) ~ exp(-c x)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianFit {
    pub constant: f64,
}

impl Default for GaussianFit {
    fn default() -> Self {
        Self { constant: 8.0 / 9.0 }
    }
}

/// sigma_u^2 = 32a/9 + 3 sigma_p^2 and sigma_v^2 = sigma_w^2 = 8a/9.
pub fn gaussian_triphoton_state(phase: &PhaseMatchSolution, sigma_p: f64) -> Result<TripartiteGaussianState> {
    gaussian_triphoton_state_with(phase, sigma_p, GaussianFit::default())
}

/// sigma_u^2 = 4ca + 3 sigma_p^2, sigma_v^2 = sigma_w^2 = ca.
pub fn gaussian_triphoton_state_with(
    phase: &PhaseMatchSolution,
    sigma_p: f64,
    fit: GaussianFit,
) -> Result<TripartiteGaussianState> {
    let a = ensure_positive("a_param", phase.a_param)?;
    let c = ensure_positive("fit constant", fit.constant)?;
    if !(sigma_p.is_finite() && sigma_p >= 0.0) {
        return Err(invalid("sigma_p", format!("must be >= 0, got {sigma_p}")));
    }
    let sv2 = c * a;
    TripartiteGaussianState::symmetric(4.0 * c * a + 3.0 * sigma_p * sigma_p, sv2)
}

/// Rows are the u, v, w axes in party coordinates (A, B, C).
pub fn rotation() -> [[f64; 3]; 3] {
    let s3 = 1.0 / 3f64.sqrt();
    let s6 = 1.0 / 6f64.sqrt();
    let s2 = std::f64::consts::FRAC_1_SQRT_2;
    [[s3, s3, s3], [-2.0 * s6, s6, s6], [0.0, s2, -s2]]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    ToPrincipal,
    FromPrincipal,
}

/// (k1, k3, k4) -> (k_u, k_v, k_w) or its inverse.
pub fn rotate(t: Triple, direction: Direction) -> Triple {
    let r = rotation();
    match direction {
        Direction::ToPrincipal => std::array::from_fn(|i| r[i][0] * t[0] + r[i][1] * t[1] + r[i][2] * t[2]),
        Direction::FromPrincipal => std::array::from_fn(|j| r[0][j] * t[0] + r[1][j] * t[1] + r[2][j] * t[2]),
    }
}

pub fn rotate_to_principal(k: Triple) -> Triple {
    rotate(k, Direction::ToPrincipal)
}

pub fn rotate_from_principal(p: Triple) -> Triple {
    rotate(p, Direction::FromPrincipal)
}

/// (k3+k4)^2 + (k1+k3)^2 + (k1+k4)^2.
pub fn sum_of_squares(k1: f64, k3: f64, k4: f64) -> f64 {
    (k3 + k4).powi(2) + (k1 + k3).powi(2) + (k1 + k4).powi(2)
}

fn rotate_diagonal(d: Triple) -> Result<CovarianceMatrix3> {
    let r = rotation();
    let m = Matrix3::from_fn(|i, j| (0..3).map(|a| r[a][i] * d[a] * r[a][j]).sum());
    CovarianceMatrix3::new(m)
}

/// Party-coordinate covariances R^T diag(.) R for position and momentum.
pub fn covariance_matrices(state: &TripartiteGaussianState) -> Result<(CovarianceMatrix3, CovarianceMatrix3)> {
    Ok((
        rotate_diagonal(state.position_variances())?,
        rotate_diagonal(state.momentum_variances())?,
    ))
}

fn projected_variance(diag: Triple, c: &Triple) -> f64 {
    let p = rotate_to_principal(*c);
    (0..3).map(|i| diag[i] * p[i] * p[i]).sum()
}

/// Variances of `eta . x` and `beta . k`, computed in the principal frame so
/// that components annihilated by the coefficients cancel exactly.
pub fn combination_variances(state: &TripartiteGaussianState, coeffs: &CoefficientVectors) -> (f64, f64) {
    (
        projected_variance(state.position_variances(), &coeffs.eta),
        projected_variance(state.momentum_variances(), &coeffs.beta),
    )
}

/// Conditional variances of each party given the other two, as
/// 1 / (Sigma^-1)_tt with the precision matrix R^T diag(1/sigma^2) R.
pub fn conditional_variances(state: &TripartiteGaussianState) -> (Triple, Triple) {
    let r = rotation();
    let cond = |d: Triple| -> Triple {
        std::array::from_fn(|t| 1.0 / (0..3).map(|a| r[a][t] * r[a][t] / d[a]).sum::<f64>())
    };
    (
        cond(state.position_variances()),
        cond(state.momentum_variances()),
    )
}
