use nalgebra::DMatrix;

use crate::dd::DD;
use crate::error::{ensure_positive, invalid, Error, Result};
use crate::exec::Execution;

/// Position-space density matrix of one party,
/// eta(x, x') = C exp(-A (x - x')^2) exp(-B (x + x')^2).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarginalKernel {
    pub sigma_u_sq: f64,
    pub sigma_v_sq: f64,
}

impl MarginalKernel {
    pub fn new(sigma_u_sq: f64, sigma_v_sq: f64) -> Result<Self> {
        ensure_positive("sigma_u_sq", sigma_u_sq)?;
        ensure_positive("sigma_v_sq", sigma_v_sq)?;
        Ok(Self {
            sigma_u_sq,
            sigma_v_sq,
        })
    }

    fn total(&self) -> f64 {
        self.sigma_u_sq + 2.0 * self.sigma_v_sq
    }

    /// (C, A, B).
    fn coefficients(&self) -> (f64, f64, f64) {
        let t = self.total();
        let c = (3.0 / (2.0 * std::f64::consts::PI * t)).sqrt();
        let a = (1.0 / self.sigma_u_sq + 2.0 / self.sigma_v_sq) / 24.0;
        let b = 9.0 / (24.0 * t);
        (c, a, b)
    }

    pub fn eval(&self, x: f64, xp: f64) -> f64 {
        let (c, a, b) = self.coefficients();
        let d = x - xp;
        let s = x + xp;
        c * (-a * d * d - b * s * s).exp()
    }

    /// Standard deviation of the single-party marginal, sqrt((su^2 + 2 sv^2)/3).
    pub fn marginal_std(&self) -> f64 {
        (self.total() / 3.0).sqrt()
    }

    /// sigma_+ / sigma_-, the kernel's correlation ratio from its exponents.
    pub fn correlation_ratio(&self) -> f64 {
        let (_, a, b) = self.coefficients();
        (a / b).sqrt()
    }
}

/// 8 marginal standard deviations: the default half-width of the grid.
pub fn default_extent(kernel: &MarginalKernel) -> f64 {
    8.0 * kernel.marginal_std()
}

/// sigma(x + x') / sigma(x - x') computed from second moments of eta by 2-D
/// trapezoid quadrature over `points^2` nodes.
pub fn kernel_moment_ratio(kernel: &MarginalKernel, points: usize, exec: Execution) -> f64 {
    let (_, a, b) = kernel.coefficients();
    // Integrate in (d, s) = (x - x', x + x'), where eta factorizes.
    let hd = 12.0 / (2.0 * a).sqrt();
    let hs = 12.0 / (2.0 * b).sqrt();
    let step = |h: f64| 2.0 * h / (points - 1) as f64;
    let (dd, ds) = (step(hd), step(hs));
    let m = exec.map(0..points, |i| {
        let d = -hd + i as f64 * dd;
        let mut acc = [0.0; 3];
        for j in 0..points {
            let s = -hs + j as f64 * ds;
            let w = kernel.eval(0.5 * (s + d), 0.5 * (s - d));
            acc[0] += w;
            acc[1] += w * d * d;
            acc[2] += w * s * s;
        }
        acc
    });
    let tot = m.iter().fold([0.0; 3], |t, x| [t[0] + x[0], t[1] + x[1], t[2] + x[2]]);
    (tot[2] / tot[1]).sqrt()
}

/// Number of leading eigenpairs refined in extended precision.
const REFINE: usize = 16;

/// Eigenvalues of the Nystrom matrix `K_ij = eta(x_i, x_j) Delta` on
/// `grid_points` midpoint nodes over `[-extent, extent]`, in descending order.
///
/// The leading eigenpairs from the f64 solver are refined by subspace
/// iteration and Rayleigh-Ritz in double-double arithmetic, so eigenvalues
/// far below the f64 noise floor of the matrix are still resolved.
pub fn kernel_spectrum(
    kernel: &MarginalKernel,
    grid_points: usize,
    extent: f64,
    exec: Execution,
) -> Result<Vec<f64>> {
    if grid_points < 256 {
        return Err(invalid("grid_points", format!("need >= 256, got {grid_points}")));
    }
    ensure_positive("extent", extent)?;
    if extent < default_extent(kernel) * (1.0 - 1e-12) {
        return Err(invalid(
            "extent",
            format!(
                "must cover 8 marginal standard deviations ({:e}), got {extent:e}",
                default_extent(kernel)
            ),
        ));
    }
    let n = grid_points;
    let (c, a, b) = kernel.coefficients();
    let delta = DD::new(2.0 * extent) / DD::new(n as f64);
    let nodes: Vec<DD> = (0..n)
        .map(|i| DD::new(-extent) + delta.mul_f64(i as f64 + 0.5))
        .collect();
    let pref = DD::new(c) * delta;

    let rows: Vec<Vec<DD>> = exec.map(0..n, |i| {
        (0..n)
            .map(|j| {
                let d = nodes[i] - nodes[j];
                let s = nodes[i] + nodes[j];
                let e = -(d.sqr().mul_f64(a) + s.sqr().mul_f64(b));
                pref * e.exp()
            })
            .collect()
    });

    let trace: f64 = rows.iter().enumerate().map(|(i, r)| r[i].to_f64()).sum();
    if (trace - 1.0).abs() > 1e-6 {
        return Err(Error::GridTooCoarse(format!(
            "kernel trace {trace} deviates from 1 by more than 1e-6"
        )));
    }

    let k64 = DMatrix::from_fn(n, n, |i, j| rows[i][j].to_f64());
    let eig = k64.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&p, &q| eig.eigenvalues[q].total_cmp(&eig.eigenvalues[p]));
    let mut values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i].max(0.0)).collect();

    let m = REFINE.min(n);
    let start: Vec<Vec<DD>> = order[..m]
        .iter()
        .map(|&col| (0..n).map(|r| DD::new(eig.eigenvectors[(r, col)])).collect())
        .collect();
    let mut basis = orthonormalize(&start, &start);
    for _ in 0..2 {
        let images = apply(&rows, &basis, exec);
        basis = orthonormalize(&images, &basis);
    }
    let images = apply(&rows, &basis, exec);
    let h: Vec<Vec<DD>> = (0..m)
        .map(|p| (0..m).map(|q| dot(&basis[p], &images[q])).collect())
        .collect();
    let mut refined = jacobi_eigenvalues(h);
    refined.sort_by(|p, q| q.total_cmp(p));
    for (v, r) in values.iter_mut().zip(refined) {
        *v = r.max(0.0);
    }
    Ok(values)
}

fn dot(x: &[DD], y: &[DD]) -> DD {
    x.iter().zip(y).fold(DD::ZERO, |acc, (a, b)| acc + *a * *b)
}

/// Columns `K v` for every basis vector `v`.
fn apply(rows: &[Vec<DD>], basis: &[Vec<DD>], exec: Execution) -> Vec<Vec<DD>> {
    let n = rows.len();
    let by_row: Vec<Vec<DD>> = exec.map(0..n, |i| basis.iter().map(|v| dot(&rows[i], v)).collect());
    (0..basis.len())
        .map(|k| by_row.iter().map(|r| r[k]).collect())
        .collect()
}

/// Two-pass modified Gram-Schmidt. A vector that collapses to nothing is
/// replaced by the matching `fallback` vector (then a unit vector).
fn orthonormalize(vectors: &[Vec<DD>], fallback: &[Vec<DD>]) -> Vec<Vec<DD>> {
    let n = vectors.first().map_or(0, Vec::len);
    let mut out: Vec<Vec<DD>> = Vec::with_capacity(vectors.len());
    for (k, v) in vectors.iter().enumerate() {
        let scale = dot(v, v).sqrt().to_f64();
        let mut unit_fallback = vec![DD::ZERO; n];
        unit_fallback[k % n.max(1)] = DD::ONE;
        let mut accepted = None;
        for cand in [v, &fallback[k], &unit_fallback] {
            let mut w = cand.clone();
            for _ in 0..2 {
                for q in &out {
                    let p = dot(q, &w);
                    for (wi, qi) in w.iter_mut().zip(q) {
                        *wi = *wi - p * *qi;
                    }
                }
            }
            let norm = dot(&w, &w).sqrt();
            let reference = if std::ptr::eq(cand, v) { scale } else { 1.0 };
            if norm.to_f64() > 1e-24 * reference.max(f64::MIN_POSITIVE) && norm.to_f64() > 1e-300 {
                let inv = norm.recip();
                accepted = Some(w.into_iter().map(|x| x * inv).collect());
                break;
            }
        }
        out.push(accepted.unwrap_or_else(|| vec![DD::ZERO; n]));
    }
    out
}

/// Eigenvalues of a small symmetric matrix by cyclic Jacobi rotations.
fn jacobi_eigenvalues(mut h: Vec<Vec<DD>>) -> Vec<f64> {
    let m = h.len();
    for i in 0..m {
        for j in 0..i {
            let s = (h[i][j] + h[j][i]).mul_f64(0.5);
            h[i][j] = s;
            h[j][i] = s;
        }
    }
    for _sweep in 0..40 {
        let diag_max = (0..m).map(|i| h[i][i].to_f64().abs()).fold(0.0, f64::max);
        let off_max = (0..m)
            .flat_map(|i| (0..i).map(move |j| (i, j)))
            .map(|(i, j)| h[i][j].to_f64().abs())
            .fold(0.0, f64::max);
        if off_max <= 1e-34 * diag_max {
            break;
        }
        for p in 0..m {
            for q in p + 1..m {
                let apq = h[p][q];
                if apq.hi == 0.0 {
                    continue;
                }
                let theta = (h[q][q] - h[p][p]) / apq.mul_f64(2.0);
                let t = if theta.hi.abs() > 1e30 {
                    theta.mul_f64(2.0).recip()
                } else {
                    let r = (theta.sqr() + DD::ONE).sqrt();
                    let denom = theta.abs() + r;
                    let t = denom.recip();
                    if theta.hi < 0.0 {
                        -t
                    } else {
                        t
                    }
                };
                let c = (t.sqr() + DD::ONE).sqrt().recip();
                let s = t * c;
                for k in 0..m {
                    let hkp = h[k][p];
                    let hkq = h[k][q];
                    h[k][p] = c * hkp - s * hkq;
                    h[k][q] = s * hkp + c * hkq;
                }
                for k in 0..m {
                    let hpk = h[p][k];
                    let hqk = h[q][k];
                    h[p][k] = c * hpk - s * hqk;
                    h[q][k] = s * hpk + c * hqk;
                }
            }
        }
    }
    (0..m).map(|i| h[i][i].to_f64()).collect()
}
