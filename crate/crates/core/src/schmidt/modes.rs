use serde::{Deserialize, Serialize};

use super::schmidt_width;
use crate::error::{ensure_positive, invalid, Error, Result};
use crate::exec::Execution;

const MAX_ORDER: usize = 30;

/// Orthonormal Hermite functions psi_0..=psi_n at `xi` via the normalized
/// three-term recurrence.
pub fn hermite_functions(n: usize, xi: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    let mut prev = 0.0;
    let mut cur = std::f64::consts::PI.powf(-0.25) * (-0.5 * xi * xi).exp();
    out.push(cur);
    for k in 0..n {
        let kf = k as f64;
        let next = (2.0 / (kf + 1.0)).sqrt() * xi * cur - (kf / (kf + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
        out.push(cur);
    }
    out
}

/// phi_n(x): Hermite-Gaussian of width `sigma_a`, normalized in x.
pub fn schmidt_mode(n: usize, sigma_a: f64, x: f64) -> f64 {
    let s = sigma_a * std::f64::consts::SQRT_2;
    hermite_functions(n, x / s)[n] / s.sqrt()
}

/// Trapezoid quadrature with successive doubling until two levels agree to
/// `tol` relative to the latest value, or to `tol * 1e-9` for overlaps that
/// vanish.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub initial_points: usize,
    pub max_points: usize,
    /// Half-width in units of the widest length scale of the state.
    pub half_width: f64,
    pub tol: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            initial_points: 129,
            max_points: 8193,
            half_width: 12.0,
            tol: 1e-6,
        }
    }
}

/// The state written in (x_A, x_p, x_m) with x_p = (x_B + x_C)/sqrt 2 and
/// x_m = (x_B - x_C)/sqrt 2: psi = N g(x_A, x_p) f(x_m).
struct Factorized {
    su2: f64,
    sv2: f64,
    sigma_a: f64,
    norm: f64,
    /// Integral of f(x_m)^2.
    f_norm_sq: f64,
    scale: f64,
}

impl Factorized {
    fn new(su2: f64, sv2: f64) -> Result<Self> {
        ensure_positive("sigma_u_sq", su2)?;
        ensure_positive("sigma_v_sq", sv2)?;
        let (su, sv) = (su2.sqrt(), sv2.sqrt());
        let sigma_a = schmidt_width(su2, sv2);
        Ok(Self {
            su2,
            sv2,
            sigma_a,
            norm: 1.0 / ((2.0 * std::f64::consts::PI).powf(1.5) * su * sv2).sqrt(),
            f_norm_sq: (2.0 * std::f64::consts::PI).sqrt() * sv,
            scale: su.max(sv).max(sigma_a),
        })
    }

    fn g(&self, xa: f64, xp: f64) -> f64 {
        let r2 = std::f64::consts::SQRT_2;
        (-(xa + r2 * xp).powi(2) / (12.0 * self.su2) - (xa - xp / r2).powi(2) / (6.0 * self.sv2)).exp()
    }

    fn psi(&self, xa: f64, xb: f64, xc: f64) -> f64 {
        let r2 = std::f64::consts::SQRT_2;
        let xp = (xb + xc) / r2;
        let xm = (xb - xc) / r2;
        self.norm * self.g(xa, xp) * (-xm * xm / (4.0 * self.sv2)).exp()
    }
}

fn grid(points: usize, half: f64) -> (Vec<f64>, f64) {
    let h = 2.0 * half / (points - 1) as f64;
    ((0..points).map(|i| -half + i as f64 * h).collect(), h)
}

/// G_n(x_p) = integral of phi_n(x_A) g(x_A, x_p) dx_A at each `xp`.
fn projection(f: &Factorized, n: usize, xp: &[f64], points: usize, half: f64, exec: Execution) -> Vec<f64> {
    let (xa, h) = grid(points, half);
    let phi: Vec<f64> = xa.iter().map(|&x| schmidt_mode(n, f.sigma_a, x)).collect();
    exec.map(0..xp.len(), |j| {
        xa.iter().zip(&phi).map(|(&x, &p)| p * f.g(x, xp[j])).sum::<f64>() * h
    })
}

fn check_order(n: usize) -> Result<()> {
    if n > MAX_ORDER {
        return Err(invalid("n", format!("order must be <= {MAX_ORDER}, got {n}")));
    }
    Ok(())
}

/// Overlap of the state with phi_n(x_A) times the normalized projection
/// theta_n(x_B, x_C); equals sqrt(lambda_n) when phi_n are the true Schmidt
/// modes.
pub fn schmidt_mode_overlap(
    n: usize,
    sigma_u_sq: f64,
    sigma_v_sq: f64,
    spec: &QuadratureSpec,
    exec: Execution,
) -> Result<f64> {
    check_order(n)?;
    let f = Factorized::new(sigma_u_sq, sigma_v_sq)?;
    let half = spec.half_width * f.scale * ((n + 1) as f64).sqrt();
    let eval = |points: usize| {
        let (xp, h) = grid(points, half);
        let g = projection(&f, n, &xp, points, half, exec);
        let norm_sq = g.iter().map(|v| v * v).sum::<f64>() * h * f.f_norm_sq;
        f.norm * norm_sq.sqrt()
    };
    successive(spec, eval)
}

fn successive(spec: &QuadratureSpec, eval: impl Fn(usize) -> f64) -> Result<f64> {
    let mut points = spec.initial_points.max(17);
    let mut prev = eval(points);
    while points < spec.max_points {
        points = 2 * points - 1;
        let cur = eval(points);
        if (cur - prev).abs() <= spec.tol * cur.abs().max(1e-9) {
            return Ok(cur);
        }
        prev = cur;
    }
    Err(Error::QuadratureNonConvergence(format!(
        "no agreement to {:e} up to {} points",
        spec.tol, spec.max_points
    )))
}

/// Overlap with the product phi_n(x_A) phi_n(x_B) phi_n(x_C), by 3-D quadrature.
pub fn naive_product_overlap(
    n: usize,
    sigma_u_sq: f64,
    sigma_v_sq: f64,
    spec: &QuadratureSpec,
    exec: Execution,
) -> Result<f64> {
    check_order(n)?;
    let f = Factorized::new(sigma_u_sq, sigma_v_sq)?;
    let half = 0.75 * spec.half_width * f.scale * ((n + 1) as f64).sqrt();
    let eval = |points: usize| {
        let (x, h) = grid(points, half);
        let phi: Vec<f64> = x.iter().map(|&v| schmidt_mode(n, f.sigma_a, v)).collect();
        let slabs = exec.map(0..points, |i| {
            let mut acc = 0.0;
            for j in 0..points {
                let pij = phi[i] * phi[j];
                for k in 0..points {
                    acc += pij * phi[k] * f.psi(x[i], x[j], x[k]);
                }
            }
            acc
        });
        slabs.iter().sum::<f64>() * h * h * h
    };
    let coarse = QuadratureSpec {
        initial_points: spec.initial_points.min(65),
        max_points: spec.max_points.min(257),
        ..*spec
    };
    successive(&coarse, eval)
}

/// Printed polynomial family P_n(s, u), n <= 7. Order 7 uses the
/// Hermite-consistent coefficient `-84 s^4 u`.
pub fn projection_polynomial(n: usize, s: f64, u: f64) -> Result<f64> {
    let (s2, s4, s6) = (s * s, s.powi(4), s.powi(6));
    Ok(match n {
        0 => 6f64.sqrt(),
        1 => 2.0 * 3f64.sqrt() * s,
        2 => 3f64.sqrt() * (2.0 * s2 - u),
        3 => 2f64.sqrt() * s * (2.0 * s2 - 3.0 * u),
        4 => 0.5 * (4.0 * s4 - 12.0 * s2 * u + 3.0 * u * u),
        5 => s / 10f64.sqrt() * (4.0 * s4 - 20.0 * s2 * u + 15.0 * u * u),
        6 => (8.0 * s6 - 60.0 * s4 * u + 90.0 * s2 * u * u - 15.0 * u.powi(3)) / (2.0 * 30f64.sqrt()),
        7 => {
            s / (2.0 * 105f64.sqrt())
                * (8.0 * s6 - 84.0 * s4 * u + 210.0 * s2 * u * u - 105.0 * u.powi(3))
        }
        _ => return Err(invalid("n", format!("table covers orders 0..=7, got {n}"))),
    })
}

/// How the table's arguments s, u and the Gaussian exponent are built.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ProjectionParameterization {
    /// u = 1 + 2 g^2 sA^4 - 9 g^4 sv^4, exponent c, as printed.
    Stated,
    /// u = 2 g^2 sv^4 (g^2 - 1)^2, exponent c / (4 sv^2).
    Corrected,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShapeFit {
    /// Least-squares constant C in G_n ~ C exp(-c x_p^2) P_n(s, u).
    pub constant: f64,
    /// max |G_n - C model| / max |G_n| over the sample points.
    pub max_residual: f64,
}

/// Fits a single constant relating the computed projection G_n(x_p) to the
/// closed-form shape and reports how well it holds across `xp`.
pub fn projection_shape_fit(
    n: usize,
    sigma_u_sq: f64,
    sigma_v_sq: f64,
    param: ProjectionParameterization,
    xp: &[f64],
    poly: impl Fn(usize, f64, f64) -> Result<f64>,
) -> Result<ShapeFit> {
    let f = Factorized::new(sigma_u_sq, sigma_v_sq)?;
    if xp.is_empty() {
        return Err(invalid("xp", "need at least one sample point"));
    }
    let gamma2 = sigma_u_sq / sigma_v_sq;
    let sa = f.sigma_a;
    let sa2 = sa * sa;
    let exponent = (3.0 * sa2 + (2.0 + gamma2) * sigma_v_sq)
        / ((1.0 + 2.0 * gamma2) * sa2 + 3.0 * gamma2 * sigma_v_sq);
    let (u, c) = match param {
        ProjectionParameterization::Stated => (
            1.0 + 2.0 * gamma2 * sa2 * sa2 - 9.0 * gamma2 * gamma2 * sigma_v_sq * sigma_v_sq,
            exponent,
        ),
        ProjectionParameterization::Corrected => (
            2.0 * gamma2 * sigma_v_sq * sigma_v_sq * (gamma2 - 1.0).powi(2),
            exponent / (4.0 * sigma_v_sq),
        ),
    };
    let half = 14.0 * f.scale * ((n + 1) as f64).sqrt();
    let g = projection(&f, n, xp, 8001, half, Execution::Sequential);
    let model: Vec<f64> = xp
        .iter()
        .map(|&x| Ok((-c * x * x).exp() * poly(n, (gamma2 - 1.0) * x * sa, u)?))
        .collect::<Result<_>>()?;
    let mm: f64 = model.iter().map(|m| m * m).sum();
    if !(mm > 0.0) {
        return Err(invalid("xp", "model vanishes at every sample point"));
    }
    let constant = g.iter().zip(&model).map(|(a, b)| a * b).sum::<f64>() / mm;
    let gmax = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let max_residual = g
        .iter()
        .zip(&model)
        .map(|(a, b)| (a - constant * b).abs())
        .fold(0.0, f64::max)
        / gmax;
    Ok(ShapeFit {
        constant,
        max_residual,
    })
}
