//! Entanglement witnesses and lower bounds on E3F.

use serde::{Deserialize, Serialize};

use crate::entropy::gaussian_entropy;
use crate::error::{ensure_finite, ensure_positive, invalid, Result};
use crate::spdc;
use crate::types::{
    min_coefficient_product, BoundMethod, BoundReport, CoefficientVectors, ExperimentParams,
    TripartiteGaussianState, Triple,
};

/// Conditional-entropy witnesses for the bipartitions A|BC, B|CA and C|AB.
/// A positive value certifies entanglement across that cut.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WitnessTriple {
    pub w_a: f64,
    pub w_b: f64,
    pub w_c: f64,
}

impl WitnessTriple {
    pub fn as_array(&self) -> Triple {
        [self.w_a, self.w_b, self.w_c]
    }

    pub fn certified(&self) -> [bool; 3] {
        self.as_array().map(|w| w > 0.0)
    }
}

/// `w_i = log2(2 pi) - h(x_i | rest) - h(k_i | rest)`.
pub fn bipartite_conditional_witnesses(hx_cond: Triple, hk_cond: Triple) -> Result<WitnessTriple> {
    for &h in hx_cond.iter().chain(hk_cond.iter()) {
        ensure_finite("conditional entropy", h)?;
    }
    let l = (2.0 * std::f64::consts::PI).log2();
    let w: Triple = std::array::from_fn(|i| l - hx_cond[i] - hk_cond[i]);
    Ok(WitnessTriple {
        w_a: w[0],
        w_b: w[1],
        w_c: w[2],
    })
}

/// `log2(2 pi m) - h(eta.x) - h(beta.k)` with `m = min_i |eta_i||beta_i|`.
/// Negative values are returned as-is and flagged uncertified.
pub fn e3f_entropic_bound(h_x: f64, h_k: f64, coeffs: &CoefficientVectors) -> Result<BoundReport> {
    ensure_finite("h_x", h_x)?;
    ensure_finite("h_k", h_k)?;
    let m = min_coefficient_product(coeffs)?;
    let b = (2.0 * std::f64::consts::PI * m).log2() - h_x - h_k;
    let mut r = BoundReport::new(b, BoundMethod::Entropic, m);
    r.h_x = Some(h_x);
    r.h_k = Some(h_k);
    Ok(r)
}

/// `-log2(e sigma_x sigma_k / m)`, the entropic bound with both entropies
/// replaced by their Gaussian maxima.
pub fn e3f_variance_bound(sigma_x: f64, sigma_k: f64, coeffs: &CoefficientVectors) -> Result<BoundReport> {
    ensure_positive("sigma_x", sigma_x)?;
    ensure_positive("sigma_k", sigma_k)?;
    let m = min_coefficient_product(coeffs)?;
    let b = -(std::f64::consts::E * sigma_x * sigma_k / m).log2();
    let mut r = BoundReport::new(b, BoundMethod::Variance, m);
    r.sigma_x = Some(sigma_x);
    r.sigma_k = Some(sigma_k);
    Ok(r)
}

pub const ENERGY_TIME_NOTE: &str =
    "approximation per source: sigma(t2-t1) substituted for sigma(tA-(tB+tC)/2)";

/// Variance bound for time/frequency with eta = (1, -1/2, -1/2),
/// beta = (1, 1, 1). `sigma_t` is the measured two-photon arrival spread and
/// `sigma_omega` the pump bandwidth.
pub fn energy_time_bound(sigma_t: f64, sigma_omega: f64) -> Result<BoundReport> {
    let mut r = e3f_variance_bound(sigma_t, sigma_omega, &CoefficientVectors::cascaded())?;
    r.notes.push(ENERGY_TIME_NOTE.to_string());
    Ok(r)
}

/// `1/2 log2(16 + 18 sigma_p^2 k / L) - log2(3 sqrt(2) e)`, per transverse axis.
pub fn closed_form_bound_value(sigma_p: f64, crystal_length: f64, k_p_tilde: f64) -> f64 {
    0.5 * (16.0 + 18.0 * sigma_p * sigma_p * k_p_tilde / crystal_length).log2()
        - (3.0 * std::f64::consts::SQRT_2 * std::f64::consts::E).log2()
}

/// Pump radius at which the closed-form bound is exactly zero.
pub fn closed_form_zero_crossing(crystal_length: f64, k_p_tilde: f64) -> Result<f64> {
    ensure_positive("crystal_length", crystal_length)?;
    ensure_positive("k_p_tilde", k_p_tilde)?;
    let e2 = std::f64::consts::E * std::f64::consts::E;
    Ok(((18.0 * e2 - 16.0) * crystal_length / (18.0 * k_p_tilde)).sqrt())
}

/// Closed-form bound of the triple-Gaussian source for the cascaded
/// coefficients, per transverse dimension.
pub fn spdc_closed_form_bound(params: &ExperimentParams, k_p_tilde: f64) -> Result<BoundReport> {
    let l = ensure_positive("crystal_length", params.crystal_length)?;
    let k = ensure_positive("k_p_tilde", k_p_tilde)?;
    let sp = params.pump_radius;
    if !(sp.is_finite() && sp >= 0.0) {
        return Err(invalid("pump_radius", format!("must be >= 0, got {sp}")));
    }
    let b = closed_form_bound_value(sp, l, k);
    let a = 3.0 * l / (4.0 * k);
    let sv2 = 8.0 * a / 9.0;
    let su2 = 32.0 * a / 9.0 + 3.0 * sp * sp;
    let mut r = BoundReport::new(b, BoundMethod::ClosedForm, 0.5);
    r.sigma_x = Some((1.5 * sv2).sqrt());
    r.sigma_k = Some((3.0 * 0.25 / su2).sqrt());
    Ok(r)
}

/// Entropic bound evaluated on a Gaussian state through its combination
/// variances (state -> covariances -> entropies -> bound).
pub fn gaussian_state_bound(state: &TripartiteGaussianState, coeffs: &CoefficientVectors) -> Result<BoundReport> {
    let (vx, vk) = spdc::combination_variances(state, coeffs);
    let mut r = e3f_entropic_bound(gaussian_entropy(vx)?, gaussian_entropy(vk)?, coeffs)?;
    r.sigma_x = Some(vx.sqrt());
    r.sigma_k = Some(vk.sqrt());
    Ok(r)
}

/// Witnesses of a Gaussian state from its exact conditional variances.
pub fn gaussian_state_witnesses(state: &TripartiteGaussianState) -> Result<WitnessTriple> {
    let (cx, ck) = spdc::conditional_variances(state);
    let hx: Triple = [gaussian_entropy(cx[0])?, gaussian_entropy(cx[1])?, gaussian_entropy(cx[2])?];
    let hk: Triple = [gaussian_entropy(ck[0])?, gaussian_entropy(ck[1])?, gaussian_entropy(ck[2])?];
    bipartite_conditional_witnesses(hx, hk)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn witness_examples() {
        let h1 = 0.5 * (std::f64::consts::PI * std::f64::consts::E).log2();
        // Product of minimum-uncertainty Gaussians: split h(x)+h(k)=log2(pi e) evenly.
        let w = bipartite_conditional_witnesses([h1; 3], [h1; 3]).unwrap();
        for v in w.as_array() {
            assert_abs_diff_eq!(v, (2.0 / std::f64::consts::E).log2(), epsilon = 1e-12);
        }
        let half = 0.5 * (2.0 * std::f64::consts::PI).log2();
        let w = bipartite_conditional_witnesses([half; 3], [half; 3]).unwrap();
        assert_eq!(w.as_array(), [0.0; 3]);
        let w = bipartite_conditional_witnesses([-14.460, 0.0, 0.0], [11.013, 0.0, 0.0]).unwrap();
        assert_abs_diff_eq!(w.w_a, 6.099, epsilon = 1e-3);
        assert!(bipartite_conditional_witnesses([f64::NAN, 0.0, 0.0], [0.0; 3]).is_err());
    }

    #[test]
    fn entropic_examples() {
        let c = CoefficientVectors::cascaded();
        let r = e3f_entropic_bound(-14.460, 11.013, &c).unwrap();
        assert_abs_diff_eq!(r.bound_gebits, 5.0985, epsilon = 1e-3);
        assert!(r.certified);
        let r = e3f_entropic_bound(std::f64::consts::PI.log2(), 0.0, &c).unwrap();
        assert_abs_diff_eq!(r.bound_gebits, 0.0, epsilon = 1e-15);
        let z = CoefficientVectors::new([1.0, 0.0, 1.0], [1.0; 3]).unwrap();
        assert!(e3f_entropic_bound(1.0, 1.0, &z).is_err());
    }

    #[test]
    fn variance_examples() {
        let c = CoefficientVectors::cascaded();
        let r = e3f_variance_bound(1.0742e-5, 500.0, &c).unwrap();
        assert_abs_diff_eq!(r.bound_gebits, 5.098, epsilon = 2e-3);
        let r = e3f_variance_bound(0.5 / std::f64::consts::E, 1.0, &c).unwrap();
        assert_abs_diff_eq!(r.bound_gebits, 0.0, epsilon = 1e-15);
        assert!(!r.certified);
        assert!(e3f_variance_bound(0.0, 1.0, &c).is_err());
        assert!(e3f_variance_bound(1.0, -1.0, &c).is_err());
    }

    #[test]
    fn energy_time_examples() {
        let r = energy_time_bound(3.7e-10, 3.77e7).unwrap();
        assert_abs_diff_eq!(r.bound_gebits, 3.72, epsilon = 5e-3);
        assert!(r.notes.iter().any(|n| n == ENERGY_TIME_NOTE));
        let r = energy_time_bound(1e-9, 3.77e7).unwrap();
        assert_abs_diff_eq!(r.bound_gebits, 2.2865966253918217, epsilon = 1e-12);
        let r = energy_time_bound(1.0, 0.5 / std::f64::consts::E).unwrap();
        assert_abs_diff_eq!(r.bound_gebits, 0.0, epsilon = 1e-14);
    }

    #[test]
    fn closed_form_examples() {
        let p = ExperimentParams::ppln_default();
        let r = spdc_closed_form_bound(&p, 2.6e7).unwrap();
        assert_abs_diff_eq!(r.bound_gebits, 5.098, epsilon = 5e-3);
        let r = spdc_closed_form_bound(&p.with_pump_radius(0.0), 2.6e7).unwrap();
        assert_abs_diff_eq!(r.bound_gebits, -1.528, epsilon = 1e-3);
        let z = closed_form_zero_crossing(3e-3, 2.6e7).unwrap();
        assert_abs_diff_eq!(z, 2.74e-5, epsilon = 5e-8);
        assert_abs_diff_eq!(closed_form_bound_value(z, 3e-3, 2.6e7), 0.0, epsilon = 1e-6);
        let mut bad = p;
        bad.crystal_length = 0.0;
        assert!(spdc_closed_form_bound(&bad, 2.6e7).is_err());
        assert!(spdc_closed_form_bound(&p, -1.0).is_err());
    }
}
