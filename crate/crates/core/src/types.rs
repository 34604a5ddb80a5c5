//! Domain types shared by every module.

use serde::{Deserialize, Serialize};

use crate::error::{ensure_positive, invalid, Error, Result};

/// Values for parties (A, B, C), in that order.
pub type Triple = [f64; 3];

/// A strictly positive, finite variance.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Variance(f64);

impl Variance {
    pub fn new(value: f64) -> Result<Self> {
        ensure_positive("variance", value).map(Variance)
    }

    pub fn get(self) -> f64 {
        self.0
    }

    pub fn std_dev(self) -> f64 {
        self.0.sqrt()
    }

    /// Variance of the Fourier-conjugate minimum-uncertainty Gaussian.
    pub fn conjugate(self) -> Variance {
        Variance(0.25 / self.0)
    }
}

impl TryFrom<f64> for Variance {
    type Error = Error;
    fn try_from(value: f64) -> Result<Self> {
        Variance::new(value)
    }
}

impl From<Variance> for f64 {
    fn from(v: Variance) -> f64 {
        v.0
    }
}

/// Coefficients of the two measured linear combinations
/// `eta . x` and `beta . k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoefficientVectors {
    pub eta: Triple,
    pub beta: Triple,
}

impl CoefficientVectors {
    pub fn new(eta: Triple, beta: Triple) -> Result<Self> {
        if eta.iter().chain(beta.iter()).any(|c| !c.is_finite()) {
            return Err(invalid("coefficients", "entries must be finite"));
        }
        if eta.iter().all(|&c| c == 0.0) {
            return Err(invalid("eta", "at least one entry must be nonzero"));
        }
        if beta.iter().all(|&c| c == 0.0) {
            return Err(invalid("beta", "at least one entry must be nonzero"));
        }
        Ok(Self { eta, beta })
    }

    /// eta = (1, -1/2, -1/2), beta = (1, 1, 1): position difference against
    /// total momentum, the natural choice for cascaded down-conversion.
    pub fn cascaded() -> Self {
        Self {
            eta: [1.0, -0.5, -0.5],
            beta: [1.0, 1.0, 1.0],
        }
    }

    pub fn min_product(&self) -> Result<f64> {
        min_coefficient_product(self)
    }
}

/// `min_i |eta_i| |beta_i|`. Zero is rejected since the bound would be -inf.
pub fn min_coefficient_product(coeffs: &CoefficientVectors) -> Result<f64> {
    let m = (0..3)
        .map(|i| coeffs.eta[i].abs() * coeffs.beta[i].abs())
        .fold(f64::INFINITY, f64::min);
    if m > 0.0 && m.is_finite() {
        Ok(m)
    } else {
        Err(Error::VanishingCoefficientProduct)
    }
}

/// Which pair of Fourier-conjugate variables is measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConjugatePair {
    PositionMomentum,
    TimeFrequency,
}

impl ConjugatePair {
    pub fn x_unit(self) -> &'static str {
        match self {
            ConjugatePair::PositionMomentum => "m",
            ConjugatePair::TimeFrequency => "s",
        }
    }

    pub fn k_unit(self) -> &'static str {
        match self {
            ConjugatePair::PositionMomentum => "rad/m",
            ConjugatePair::TimeFrequency => "rad/s",
        }
    }
}

/// Principal variances of the triple-Gaussian wavefunction, in the rotated
/// (u, v, w) coordinates of the position representation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TripartiteGaussianState {
    pub sigma_u_sq: Variance,
    pub sigma_v_sq: Variance,
    pub sigma_w_sq: Variance,
}

impl TripartiteGaussianState {
    pub fn new(sigma_u_sq: f64, sigma_v_sq: f64, sigma_w_sq: f64) -> Result<Self> {
        Ok(Self {
            sigma_u_sq: Variance::new(sigma_u_sq)?,
            sigma_v_sq: Variance::new(sigma_v_sq)?,
            sigma_w_sq: Variance::new(sigma_w_sq)?,
        })
    }

    /// sigma_w = sigma_v.
    pub fn symmetric(sigma_u_sq: f64, sigma_v_sq: f64) -> Result<Self> {
        Self::new(sigma_u_sq, sigma_v_sq, sigma_v_sq)
    }

    pub fn is_symmetric(&self) -> bool {
        self.sigma_v_sq == self.sigma_w_sq
    }

    pub fn position_variances(&self) -> Triple {
        [
            self.sigma_u_sq.get(),
            self.sigma_v_sq.get(),
            self.sigma_w_sq.get(),
        ]
    }

    /// sigma_k^2 = 1 / (4 sigma_x^2) per principal axis.
    pub fn momentum_variances(&self) -> Triple {
        self.position_variances().map(|v| 0.25 / v)
    }

    /// Standard deviation of a single party's position, sqrt((su^2 + 2 sv^2)/3).
    /// Only meaningful for the symmetric state.
    pub fn marginal_position_std(&self) -> f64 {
        ((self.sigma_u_sq.get() + self.sigma_v_sq.get() + self.sigma_w_sq.get()) / 3.0).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolingSign {
    Add,
    Subtract,
}

impl PolingSign {
    pub fn factor(self) -> f64 {
        match self {
            PolingSign::Add => 1.0,
            PolingSign::Subtract => -1.0,
        }
    }
}

/// Crystal and pump parameters of the cascaded source. `None` poling periods
/// mean bulk (unpoled) phase matching for that stage.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExperimentParams {
    pub lambda_pump: f64,
    pub n_pump: f64,
    pub poling_period_1: Option<f64>,
    pub poling_period_2: Option<f64>,
    pub poling_sign_1: PolingSign,
    pub poling_sign_2: PolingSign,
    pub crystal_length: f64,
    pub pump_radius: f64,
}

impl ExperimentParams {
    /// Periodically poled lithium niobate, 516.67 nm pump, 3 mm crystal,
    /// 1 mm pump radius.
    pub fn ppln_default() -> Self {
        Self {
            lambda_pump: 516.67e-9,
            n_pump: 2.240,
            poling_period_1: Some(8.84e-6),
            poling_period_2: Some(18.99e-6),
            poling_sign_1: PolingSign::Subtract,
            poling_sign_2: PolingSign::Subtract,
            crystal_length: 3e-3,
            pump_radius: 1e-3,
        }
    }

    pub fn validate(&self) -> Result<()> {
        ensure_positive("lambda_pump", self.lambda_pump)?;
        ensure_positive("crystal_length", self.crystal_length)?;
        ensure_positive("pump_radius", self.pump_radius)?;
        if !(self.n_pump.is_finite() && self.n_pump >= 1.0) {
            return Err(invalid("n_pump", format!("must be >= 1, got {}", self.n_pump)));
        }
        for (name, p) in [
            ("poling_period_1", self.poling_period_1),
            ("poling_period_2", self.poling_period_2),
        ] {
            if let Some(p) = p {
                ensure_positive(name, p)?;
            }
        }
        Ok(())
    }

    pub fn with_pump_radius(mut self, sigma_p: f64) -> Self {
        self.pump_radius = sigma_p;
        self
    }
}

impl Default for ExperimentParams {
    fn default() -> Self {
        Self::ppln_default()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundMethod {
    Entropic,
    Variance,
    ClosedForm,
    Sampled,
}

/// A lower bound on E3F together with the quantities it was computed from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub bound_gebits: f64,
    pub method: BoundMethod,
    pub h_x: Option<f64>,
    pub h_k: Option<f64>,
    pub sigma_x: Option<f64>,
    pub sigma_k: Option<f64>,
    pub min_coeff_product: f64,
    /// True when the bound is strictly positive.
    pub certified: bool,
    pub standard_error: Option<f64>,
    /// Bootstrap percentile interval (2.5%, 97.5%).
    pub interval: Option<(f64, f64)>,
    pub notes: Vec<String>,
}

pub const NOT_CERTIFIED: &str = "no entanglement certified";

impl BoundReport {
    pub(crate) fn new(bound_gebits: f64, method: BoundMethod, min_coeff_product: f64) -> Self {
        let certified = bound_gebits > 0.0;
        let notes = if certified {
            Vec::new()
        } else {
            vec![NOT_CERTIFIED.to_string()]
        };
        Self {
            bound_gebits,
            method,
            h_x: None,
            h_k: None,
            sigma_x: None,
            sigma_k: None,
            min_coeff_product,
            certified,
            standard_error: None,
            interval: None,
            notes,
        }
    }
}
