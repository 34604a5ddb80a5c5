use libm::erfc;

use super::discrete_entropy;
use crate::error::{ensure_finite, ensure_positive, invalid, Error, Result};

/// One-dimensional histogram with explicit edges.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram1D {
    edges: Vec<f64>,
    masses: Vec<f64>,
    /// Mass that fell outside the edges and was folded into the edge bins.
    pub clipped_mass: f64,
}

impl Histogram1D {
    pub fn new(edges: Vec<f64>, masses: Vec<f64>) -> Result<Self> {
        if edges.len() != masses.len() + 1 || masses.is_empty() {
            return Err(invalid("edges", "need exactly one more edge than bins"));
        }
        if edges.iter().any(|e| !e.is_finite()) || edges.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid("edges", "must be finite and strictly increasing"));
        }
        if masses.iter().any(|&m| !(m >= 0.0 && m.is_finite())) {
            return Err(invalid("masses", "must be finite and nonnegative"));
        }
        Ok(Self {
            edges,
            masses,
            clipped_mass: 0.0,
        })
    }

    /// Bins `[origin + i w, origin + (i+1) w)` for `i in 0..masses.len()`.
    pub fn uniform(origin: f64, width: f64, masses: Vec<f64>) -> Result<Self> {
        ensure_finite("origin", origin)?;
        ensure_positive("width", width)?;
        let edges = (0..=masses.len())
            .map(|i| origin + i as f64 * width)
            .collect();
        Self::new(edges, masses)
    }

    /// Counts samples into `n_bins` bins of `width` starting at `origin`.
    /// Samples outside are clipped into the first or last bin and reported in
    /// `clipped_mass`.
    pub fn from_samples(samples: &[f64], origin: f64, width: f64, n_bins: usize) -> Result<Self> {
        if n_bins == 0 {
            return Err(invalid("n_bins", "must be >= 1"));
        }
        let mut masses = vec![0.0; n_bins];
        let mut clipped = 0.0;
        for &x in samples {
            let j = ((x - origin) / width).floor();
            let idx = if j < 0.0 {
                clipped += 1.0;
                0
            } else if j >= n_bins as f64 {
                clipped += 1.0;
                n_bins - 1
            } else {
                j as usize
            };
            masses[idx] += 1.0;
        }
        let mut h = Self::uniform(origin, width, masses)?;
        h.clipped_mass = clipped;
        Ok(h)
    }

    /// Bins anchored at zero: sample `x` lands in bin `floor(x / width)`.
    /// The histogram spans exactly the occupied range, so nothing is clipped.
    pub fn anchored(samples: &[f64], width: f64) -> Result<Self> {
        ensure_positive("width", width)?;
        if samples.is_empty() {
            return Err(Error::ZeroMass);
        }
        let idx: Vec<i64> = samples
            .iter()
            .map(|&x| ensure_finite("sample", x).map(|x| (x / width).floor() as i64))
            .collect::<Result<_>>()?;
        let lo = *idx.iter().min().unwrap();
        let hi = *idx.iter().max().unwrap();
        let mut masses = vec![0.0; (hi - lo + 1) as usize];
        for j in idx {
            masses[(j - lo) as usize] += 1.0;
        }
        Self::uniform(lo as f64 * width, width, masses)
    }

    /// Exact per-bin probabilities of N(mean, sigma^2) on a uniform grid;
    /// tail mass beyond the grid is folded into the edge bins.
    pub fn gaussian_exact(mean: f64, sigma: f64, origin: f64, width: f64, n_bins: usize) -> Result<Self> {
        ensure_positive("sigma", sigma)?;
        let edges: Vec<f64> = (0..=n_bins).map(|i| origin + i as f64 * width).collect();
        let mut masses: Vec<f64> = edges
            .windows(2)
            .map(|w| gaussian_interval_mass(w[0], w[1], mean, sigma))
            .collect();
        let below = gaussian_interval_mass(f64::NEG_INFINITY, edges[0], mean, sigma);
        let above = gaussian_interval_mass(edges[n_bins], f64::INFINITY, mean, sigma);
        masses[0] += below;
        masses[n_bins - 1] += above;
        let mut h = Self::uniform(origin, width, masses)?;
        h.clipped_mass = below + above;
        Ok(h)
    }

    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn len(&self) -> usize {
        self.masses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masses.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        self.masses.iter().sum()
    }

    pub fn widths(&self) -> impl Iterator<Item = f64> + '_ {
        self.edges.windows(2).map(|w| w[1] - w[0])
    }

    /// The common bin width, or `NonUniformBins`.
    pub fn uniform_width(&self) -> Result<f64> {
        let span = self.edges[self.edges.len() - 1] - self.edges[0];
        let w = span / self.masses.len() as f64;
        // Edges are rounded at the scale of their magnitude.
        let scale = self.edges[0].abs().max(self.edges[self.edges.len() - 1].abs());
        let tol = 1e-9 * w + 8.0 * f64::EPSILON * scale;
        if self.widths().all(|d| (d - w).abs() <= tol) {
            Ok(w)
        } else {
            Err(Error::NonUniformBins)
        }
    }

    /// Same bins with replaced masses (used by resampling).
    pub fn with_masses(&self, masses: Vec<f64>) -> Result<Self> {
        Self::new(self.edges.clone(), masses)
    }
}

/// Positive nodes and weights of 8-point Gauss-Legendre on [-1, 1].
const GL8: [(f64, f64); 4] = [
    (0.18343464249564978, 0.36268378337836177),
    (0.525532409916329, 0.31370664587788705),
    (0.7966664774136267, 0.22238103445337434),
    (0.9602898564975362, 0.10122853629037669),
];

/// P(a <= X < b) for X ~ N(mean, sigma^2), accurate in both tails and for
/// narrow intervals.
pub fn gaussian_interval_mass(a: f64, b: f64, mean: f64, sigma: f64) -> f64 {
    let s = sigma * std::f64::consts::SQRT_2;
    let za = (a - mean) / s;
    let zb = (b - mean) / s;
    let upper_tail = |z: f64| {
        if z == f64::INFINITY {
            0.0
        } else if z == f64::NEG_INFINITY {
            2.0
        } else {
            erfc(z)
        }
    };
    if zb - za <= 0.25 && za.is_finite() && zb.is_finite() {
        // Narrow intervals: tail differences would cancel.
        let (mid, half) = ((0.5 * (a + b) - mean) / s, 0.5 * (b - a) / s);
        let sum: f64 = GL8
            .iter()
            .map(|&(t, w)| w * ((-(mid - half * t).powi(2)).exp() + (-(mid + half * t).powi(2)).exp()))
            .sum();
        half * sum / std::f64::consts::PI.sqrt()
    } else if za >= 0.0 {
        0.5 * (upper_tail(za) - upper_tail(zb))
    } else if zb <= 0.0 {
        0.5 * (upper_tail(-zb) - upper_tail(-za))
    } else {
        1.0 - 0.5 * (upper_tail(-za) + upper_tail(zb))
    }
}

/// H(masses) + log2(width). Upper-bounds the differential entropy of any
/// density whose exact bin probabilities these are.
pub fn discretized_differential_entropy(hist: &Histogram1D) -> Result<f64> {
    let w = hist.uniform_width()?;
    Ok(discrete_entropy(hist.masses())? + w.log2())
}
