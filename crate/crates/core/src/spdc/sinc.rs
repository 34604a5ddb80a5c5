use serde::{Deserialize, Serialize};

use super::{rotate_from_principal, sum_of_squares, GaussianFit};
use crate::error::{ensure_positive, invalid, Error, Result};
use crate::exec::Execution;

/// sin(x)/x with sinc(0) = 1.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum AmplitudeShape {
    Sinc,
    /// The triple-Gaussian reduction `exp(-c a S)` in place of `sinc(a S)`.
    Gaussian,
}

/// Grid for numeric integration: `points` nodes per principal axis spanning
/// `+-extent_sigmas` nominal standard deviations, endpoints included.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub points: usize,
    pub extent_sigmas: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            points: 64,
            extent_sigmas: 6.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SincTriphotonModel {
    pub a_param: f64,
    pub sigma_p: f64,
    pub shape: AmplitudeShape,
    pub fit: GaussianFit,
    pub grid: GridSpec,
}

impl SincTriphotonModel {
    pub fn new(a_param: f64, sigma_p: f64) -> Result<Self> {
        ensure_positive("a_param", a_param)?;
        if !(sigma_p.is_finite() && sigma_p >= 0.0) {
            return Err(invalid("sigma_p", format!("must be >= 0, got {sigma_p}")));
        }
        Ok(Self {
            a_param,
            sigma_p,
            shape: AmplitudeShape::Sinc,
            fit: GaussianFit::default(),
            grid: GridSpec::default(),
        })
    }

    pub fn with_shape(mut self, shape: AmplitudeShape) -> Self {
        self.shape = shape;
        self
    }

    pub fn with_grid(mut self, grid: GridSpec) -> Self {
        self.grid = grid;
        self
    }

    /// Momentum-space variances of |psi|^2 along (k_u, k_v, k_w) under the
    /// Gaussian reduction.
    pub fn nominal_variances(&self) -> [f64; 3] {
        let ca = self.fit.constant * self.a_param;
        let u = 0.25 / (3.0 * self.sigma_p * self.sigma_p + 4.0 * ca);
        let v = 0.25 / ca;
        [u, v, v]
    }
}

/// `alpha_p(k1+k3+k4) sinc(a S)` with `alpha_p(q) = exp(-sigma_p^2 q^2)` and
/// `S = (k3+k4)^2 + (k1+k3)^2 + (k1+k4)^2`. Unnormalized.
pub fn triphoton_sinc_amplitude(k1: f64, k3: f64, k4: f64, model: &SincTriphotonModel) -> f64 {
    // Sorted so rounding, and hence the value, is identical under permutation.
    let mut k = [k1, k3, k4];
    k.sort_by(f64::total_cmp);
    let q = k[0] + k[1] + k[2];
    let pump = (-model.sigma_p * model.sigma_p * q * q).exp();
    let x = model.a_param * sum_of_squares(k[0], k[1], k[2]);
    let phase = match model.shape {
        AmplitudeShape::Sinc => sinc(x),
        AmplitudeShape::Gaussian => (-model.fit.constant * x).exp(),
    };
    pump * phase
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SincWidthReport {
    /// Numeric variances of |psi|^2 along (k_u, k_v, k_w).
    pub variances: [f64; 3],
    /// The Gaussian-reduction values 1/(4 sigma_x^2).
    pub nominal: [f64; 3],
    /// Grid sum of |psi|^2 Delta^3 before normalization.
    pub norm: f64,
}

impl SincWidthReport {
    pub fn ratios(&self) -> [f64; 3] {
        std::array::from_fn(|i| self.variances[i] / self.nominal[i])
    }
}

/// Integrates |psi|^2 on a principal-axis grid and returns its variances.
/// A grid whose half-resolution sum disagrees with the full sum by more than
/// 1e-3 is rejected as too coarse.
pub fn sinc_width_check(model: &SincTriphotonModel, exec: Execution) -> Result<SincWidthReport> {
    let GridSpec {
        points: n,
        extent_sigmas: ext,
    } = model.grid;
    if n < 64 {
        return Err(invalid("grid.points", format!("need >= 64, got {n}")));
    }
    if !(ext >= 6.0) {
        return Err(invalid("grid.extent_sigmas", format!("need >= 6, got {ext}")));
    }
    let nominal = model.nominal_variances();
    let half: [f64; 3] = nominal.map(|v| ext * v.sqrt());
    let step: [f64; 3] = half.map(|h| 2.0 * h / (n - 1) as f64);
    let node = |axis: usize, i: usize| -half[axis] + i as f64 * step[axis];

    // Per k_u slab: [sum w, sum w k_u, sum w k_u^2, ..., coarse sum].
    let slabs = exec.map(0..n, |i| {
        let mut acc = [0.0f64; 8];
        let ku = node(0, i);
        for j in 0..n {
            let kv = node(1, j);
            for l in 0..n {
                let kw = node(2, l);
                let k = rotate_from_principal([ku, kv, kw]);
                let a = triphoton_sinc_amplitude(k[0], k[1], k[2], model);
                let w = a * a;
                acc[0] += w;
                acc[1] += w * ku;
                acc[2] += w * ku * ku;
                acc[3] += w * kv;
                acc[4] += w * kv * kv;
                acc[5] += w * kw;
                acc[6] += w * kw * kw;
                if i % 2 == 0 && j % 2 == 0 && l % 2 == 0 {
                    acc[7] += w;
                }
            }
        }
        acc
    });
    let mut tot = [0.0f64; 8];
    for s in &slabs {
        for (t, v) in tot.iter_mut().zip(s) {
            *t += v;
        }
    }
    let cell: f64 = step.iter().product();
    let norm = tot[0] * cell;
    let coarse = tot[7] * cell * 8.0;
    if !(norm > 0.0) || (coarse / norm - 1.0).abs() > 1e-3 {
        return Err(Error::GridTooCoarse(format!(
            "grid sum {norm:e} vs half-resolution {coarse:e}"
        )));
    }
    let var = |m1: f64, m2: f64| m2 / tot[0] - (m1 / tot[0]).powi(2);
    Ok(SincWidthReport {
        variances: [var(tot[1], tot[2]), var(tot[3], tot[4]), var(tot[5], tot[6])],
        nominal,
        norm,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sinc_values() {
        assert_eq!(sinc(0.0), 1.0);
        assert!((sinc(1e-5) - (1e-5f64).sin() / 1e-5).abs() < 1e-15);
        assert!((sinc(std::f64::consts::PI)).abs() < 1e-16);
    }

    #[test]
    fn amplitude_at_origin_and_difference_direction() {
        let m = SincTriphotonModel::new(2.0e-3, 0.5).unwrap();
        assert_eq!(triphoton_sinc_amplitude(0.0, 0.0, 0.0, &m), 1.0);
        let c = 3.0;
        let got = triphoton_sinc_amplitude(c, -c / 2.0, -c / 2.0, &m);
        assert!((got - sinc(1.5 * m.a_param * c * c)).abs() < 1e-15);
    }

    #[test]
    fn coarse_grid_rejected() {
        let m = SincTriphotonModel::new(1.0, 0.0)
            .unwrap()
            .with_grid(GridSpec {
                points: 32,
                extent_sigmas: 6.0,
            });
        assert!(sinc_width_check(&m, Execution::Sequential).is_err());
    }
}
