use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("coefficient product min|eta_i||beta_i| is zero; the bound would be -inf")]
    VanishingCoefficientProduct,

    #[error("covariance matrix is singular (degenerate correlations)")]
    DegenerateCorrelations,

    #[error("effective pump momentum {0:e} rad/m is not positive")]
    UnphysicalPhaseMatching(f64),

    #[error("phase mismatch {0:e} rad/m must be positive")]
    InvalidMismatch(f64),

    #[error("grid too coarse: {0}")]
    GridTooCoarse(String),

    #[error("quadrature did not converge: {0}")]
    QuadratureNonConvergence(String),

    #[error("total mass is zero")]
    ZeroMass,

    #[error("leaf {0} has zero volume")]
    DegenerateLeaf(usize),

    #[error("bin widths are not uniform")]
    NonUniformBins,

    #[error("projected scalar has zero variance")]
    DegenerateProjection,

    #[error("state is not symmetric: sigma_v^2 != sigma_w^2")]
    AsymmetricState,

    #[error("dispersion data: {0}")]
    Dispersion(String),

    #[error("malformed file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}

pub(crate) fn ensure_positive(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(invalid(name, format!("must be finite and > 0, got {value}")))
    }
}

pub(crate) fn ensure_finite(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(invalid(name, format!("must be finite, got {value}")))
    }
}
