//! Simulated coincidence measurements: exact triplet sampling, Poisson
//! counts, adaptive histograms and sampled entanglement bounds.

mod adaptive;

pub use adaptive::{adaptive_histogram, adaptive_histogram_with_oracle, bounding_box, RefinementPolicy};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, Poisson, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::bounds::e3f_entropic_bound;
use crate::entropy::{
    discretized_differential_entropy, gaussian_interval_mass, partition_differential_entropy,
    AxisBox, Histogram1D, MultiResHistogram,
};
use crate::error::{invalid, Error, Result};
use crate::exec::{Execution, CHUNK};
use crate::spdc::{combination_variances, rotate_from_principal};
use crate::types::{BoundMethod, BoundReport, CoefficientVectors, TripartiteGaussianState, Triple};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Domain {
    Position,
    Momentum,
}

impl Domain {
    pub fn name(self) -> &'static str {
        match self {
            Domain::Position => "position",
            Domain::Momentum => "momentum",
        }
    }
}

impl std::str::FromStr for Domain {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "position" => Ok(Domain::Position),
            "momentum" => Ok(Domain::Momentum),
            _ => Err(Error::Format(format!("unknown domain `{s}`"))),
        }
    }
}

// Substream tags; the stream id is (tag << 48) | index.
const TAG_POSITION: u64 = 0;
const TAG_MOMENTUM: u64 = 1;
const TAG_POISSON: u64 = 2;
const TAG_BOOTSTRAP: u64 = 3;

fn substream(seed: u64, tag: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((tag << 48) | index);
    rng
}

/// Triplets drawn from |psi|^2 of a triple-Gaussian state.
#[derive(Debug, Clone, PartialEq)]
pub struct TripletSampleSet {
    pub domain: Domain,
    pub samples: Vec<Triple>,
    pub seed: u64,
    pub state: TripartiteGaussianState,
}

impl TripletSampleSet {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// Exact draws: independent normals along (u, v, w), rotated back to party
/// coordinates. Chunk `c` of 4096 samples uses its own ChaCha substream, so
/// the result does not depend on the execution strategy.
pub fn sample_triplets(
    state: &TripartiteGaussianState,
    domain: Domain,
    n: usize,
    seed: u64,
    exec: Execution,
) -> Result<TripletSampleSet> {
    if n == 0 {
        return Err(invalid("n", "must be >= 1"));
    }
    let (var, tag) = match domain {
        Domain::Position => (state.position_variances(), TAG_POSITION),
        Domain::Momentum => (state.momentum_variances(), TAG_MOMENTUM),
    };
    let sd = var.map(f64::sqrt);
    let chunks = exec.map_chunks(n, CHUNK, |c, range| {
        let mut rng = substream(seed, tag, c as u64);
        range
            .map(|_| {
                let p: Triple = std::array::from_fn(|i| sd[i] * rng.sample::<f64, _>(StandardNormal));
                rotate_from_principal(p)
            })
            .collect::<Vec<_>>()
    });
    Ok(TripletSampleSet {
        domain,
        samples: chunks.concat(),
        seed,
        state: *state,
    })
}

/// `c_A a + c_B b + c_C c` for every sample.
pub fn project_scalar(set: &TripletSampleSet, coeffs: Triple) -> Vec<f64> {
    set.samples
        .iter()
        .map(|s| coeffs[0] * s[0] + coeffs[1] * s[1] + coeffs[2] * s[2])
        .collect()
}

/// Independent Poisson draws with the given means.
pub fn poisson_counts(expected: &[f64], seed: u64) -> Result<Vec<u64>> {
    if let Some(bad) = expected.iter().find(|&&m| !(m >= 0.0 && m.is_finite())) {
        return Err(invalid("expected", format!("means must be finite and >= 0, got {bad}")));
    }
    let chunks = Execution::Sequential.map_chunks(expected.len(), CHUNK, |c, range| {
        let mut rng = substream(seed, TAG_POISSON, c as u64);
        range
            .map(|i| {
                let m = expected[i];
                if m == 0.0 {
                    0
                } else {
                    Poisson::new(m).map(|d| d.sample(&mut rng) as u64).unwrap_or(0)
                }
            })
            .collect::<Vec<_>>()
    });
    Ok(chunks.concat())
}

/// How projected scalars are binned for entropy estimation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Binning {
    /// Uniform bins of width `fraction * sigma_hat` over `+-half_width * sigma_hat`
    /// around the sample mean.
    FixedWidth { fraction: f64, half_width: f64 },
    Adaptive(RefinementPolicy),
}

impl Default for Binning {
    fn default() -> Self {
        Binning::FixedWidth {
            fraction: 1.0 / 16.0,
            half_width: 8.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bootstrap {
    pub resamples: usize,
}

impl Default for Bootstrap {
    fn default() -> Self {
        Self { resamples: 50 }
    }
}

/// A binned estimate: its entropy and a way to recompute it for resampled
/// counts.
enum Binned {
    Fixed(Histogram1D),
    Adaptive(MultiResHistogram<1>),
}

impl Binned {
    fn counts(&self) -> Vec<f64> {
        match self {
            Binned::Fixed(h) => h.masses().to_vec(),
            Binned::Adaptive(h) => h.masses(),
        }
    }

    fn entropy_with(&self, counts: Option<&[f64]>) -> Result<f64> {
        match (self, counts) {
            (Binned::Fixed(h), None) => discretized_differential_entropy(h),
            (Binned::Fixed(h), Some(c)) => discretized_differential_entropy(&h.with_masses(c.to_vec())?),
            (Binned::Adaptive(h), None) => partition_differential_entropy(h),
            (Binned::Adaptive(h), Some(c)) => partition_differential_entropy(&h.with_masses(c)?),
        }
    }
}

fn mean_std(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
    (mean, var.sqrt())
}

fn bin(values: &[f64], binning: &Binning, exec: Execution) -> Result<Binned> {
    let (mean, sd) = mean_std(values);
    if !(sd > 0.0 && sd.is_finite()) {
        return Err(Error::DegenerateProjection);
    }
    match *binning {
        Binning::FixedWidth {
            fraction,
            half_width,
        } => {
            if !(fraction > 0.0 && half_width > 0.0) {
                return Err(invalid("binning", "fraction and half-width must be > 0"));
            }
            let width = fraction * sd;
            let n_bins = (2.0 * half_width / fraction).ceil() as usize;
            let origin = mean - 0.5 * n_bins as f64 * width;
            // Per-chunk histograms merged in order; counts are exact in f64.
            let parts = exec.map_chunks(values.len(), 1 << 16, |_, r| {
                Histogram1D::from_samples(&values[r], origin, width, n_bins)
            });
            let mut masses = vec![0.0; n_bins];
            let mut clipped = 0.0;
            for p in parts {
                let p = p?;
                clipped += p.clipped_mass;
                for (m, v) in masses.iter_mut().zip(p.masses()) {
                    *m += v;
                }
            }
            let mut h = Histogram1D::uniform(origin, width, masses)?;
            h.clipped_mass = clipped;
            Ok(Binned::Fixed(h))
        }
        Binning::Adaptive(policy) => {
            let pts: Vec<[f64; 1]> = values.iter().map(|&v| [v]).collect();
            Ok(Binned::Adaptive(adaptive_histogram(&pts, &policy)?))
        }
    }
}

/// Multinomial resample of integer counts by sequential binomial splitting.
fn multinomial(counts: &[f64], rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut left = counts.iter().sum::<f64>().round() as u64;
    let mut mass_left: f64 = counts.iter().sum();
    counts
        .iter()
        .map(|&c| {
            if left == 0 || mass_left <= 0.0 {
                return 0.0;
            }
            let p = (c / mass_left).clamp(0.0, 1.0);
            let k = Binomial::new(left, p).map(|d| d.sample(rng)).unwrap_or(0);
            left -= k;
            mass_left -= c;
            k as f64
        })
        .collect()
}

fn percentile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let i = pos.floor() as usize;
    let j = (i + 1).min(sorted.len() - 1);
    sorted[i] + (sorted[j] - sorted[i]) * (pos - i as f64)
}

/// A differential-entropy estimate with its bootstrap uncertainty.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntropyEstimate {
    pub entropy: f64,
    pub standard_error: f64,
    /// Mass that fell outside a fixed-width grid and was folded into its edge bins.
    pub clipped_mass: f64,
}

/// Binned entropy of scalar samples; the standard error comes from a
/// multinomial bootstrap over the bin counts.
pub fn estimate_entropy(
    values: &[f64],
    binning: &Binning,
    bootstrap: &Bootstrap,
    seed: u64,
    exec: Execution,
) -> Result<EntropyEstimate> {
    let b = bin(values, binning, exec)?;
    let entropy = b.entropy_with(None)?;
    let clipped_mass = match &b {
        Binned::Fixed(h) => h.clipped_mass,
        Binned::Adaptive(_) => 0.0,
    };
    let standard_error = if bootstrap.resamples >= 2 {
        let counts = b.counts();
        let draws = exec.map(0..bootstrap.resamples, |r| {
            let mut rng = substream(seed, TAG_BOOTSTRAP, r as u64);
            b.entropy_with(Some(&multinomial(&counts, &mut rng)))
        });
        mean_std(&draws.into_iter().collect::<Result<Vec<_>>>()?).1
    } else {
        0.0
    };
    Ok(EntropyEstimate {
        entropy,
        standard_error,
        clipped_mass,
    })
}

/// Entropic bound from sample estimates of h(eta.x) and h(beta.k), with a
/// multinomial bootstrap over the bin counts for its standard error.
pub fn estimate_bound_from_samples(
    x: &TripletSampleSet,
    k: &TripletSampleSet,
    coeffs: &CoefficientVectors,
    binning: &Binning,
    bootstrap: &Bootstrap,
    exec: Execution,
) -> Result<BoundReport> {
    if x.domain != Domain::Position || k.domain != Domain::Momentum {
        return Err(invalid("samples", "need a position set and a momentum set"));
    }
    if x.state != k.state {
        return Err(invalid("samples", "sample sets come from different states"));
    }
    let bx = bin(&project_scalar(x, coeffs.eta), binning, exec)?;
    let bk = bin(&project_scalar(k, coeffs.beta), binning, exec)?;
    let h_x = bx.entropy_with(None)?;
    let h_k = bk.entropy_with(None)?;
    let mut report = e3f_entropic_bound(h_x, h_k, coeffs)?;
    report.method = BoundMethod::Sampled;

    if bootstrap.resamples >= 2 {
        let (cx, ck) = (bx.counts(), bk.counts());
        let m = report.min_coeff_product;
        let base = (2.0 * std::f64::consts::PI * m).log2();
        let seed = x.seed ^ k.seed.rotate_left(32);
        let draws = exec.map(0..bootstrap.resamples, |r| -> Result<f64> {
            let mut rng = substream(seed, TAG_BOOTSTRAP, r as u64);
            let rx = multinomial(&cx, &mut rng);
            let rk = multinomial(&ck, &mut rng);
            Ok(base - bx.entropy_with(Some(&rx))? - bk.entropy_with(Some(&rk))?)
        });
        let mut b: Vec<f64> = draws.into_iter().collect::<Result<_>>()?;
        let se = mean_std(&b).1;
        b.sort_by(f64::total_cmp);
        report.standard_error = Some(se);
        report.interval = Some((percentile(&b, 0.025), percentile(&b, 0.975)));
    }
    if let Binned::Adaptive(h) = &bx {
        if h.truncated {
            report.notes.push("position refinement truncated".into());
        }
    }
    if let Binned::Adaptive(h) = &bk {
        if h.truncated {
            report.notes.push("momentum refinement truncated".into());
        }
    }
    Ok(report)
}

/// Half-width, in standard deviations, of the exact-mass grid.
pub const EXACT_HALF_WIDTH: f64 = 16.0;

/// The sampled pipeline fed exact Gaussian bin probabilities instead of
/// counts: both projections binned into `2^level` equal bins over
/// `+-16 sigma`. Each level refines the previous one dyadically.
pub fn exact_mass_bound(
    state: &TripartiteGaussianState,
    coeffs: &CoefficientVectors,
    level: u32,
) -> Result<BoundReport> {
    if !(1..=24).contains(&level) {
        return Err(invalid("level", format!("must be in 1..=24, got {level}")));
    }
    let (vx, vk) = combination_variances(state, coeffs);
    let h = |var: f64| -> Result<f64> {
        let sd = var.sqrt();
        if !(sd > 0.0) {
            return Err(Error::DegenerateProjection);
        }
        let n = 1usize << level;
        let width = 2.0 * EXACT_HALF_WIDTH * sd / n as f64;
        let hist = Histogram1D::gaussian_exact(0.0, sd, -EXACT_HALF_WIDTH * sd, width, n)?;
        discretized_differential_entropy(&hist)
    };
    let mut r = e3f_entropic_bound(h(vx)?, h(vk)?, coeffs)?;
    r.method = BoundMethod::Sampled;
    Ok(r)
}

/// As [`exact_mass_bound`] but with adaptive partitions whose leaf masses are
/// exact Gaussian probabilities.
pub fn exact_mass_adaptive_bound(
    state: &TripartiteGaussianState,
    coeffs: &CoefficientVectors,
    policy: &RefinementPolicy,
) -> Result<BoundReport> {
    let (vx, vk) = combination_variances(state, coeffs);
    let h = |var: f64| -> Result<f64> {
        let sd = var.sqrt();
        if !(sd > 0.0) {
            return Err(Error::DegenerateProjection);
        }
        let half = EXACT_HALF_WIDTH * sd;
        let root = AxisBox::new([-half], [half])?;
        let hist = adaptive_histogram_with_oracle(
            root,
            |b| gaussian_interval_mass(b.lo[0], b.hi[0], 0.0, sd),
            policy,
        )?;
        partition_differential_entropy(&hist)
    };
    let mut r = e3f_entropic_bound(h(vx)?, h(vk)?, coeffs)?;
    r.method = BoundMethod::Sampled;
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn poisson_zero_and_determinism() {
        let a = poisson_counts(&[0.0, 5.0, 1e4], 7).unwrap();
        assert_eq!(a[0], 0);
        assert_eq!(a, poisson_counts(&[0.0, 5.0, 1e4], 7).unwrap());
        assert!(poisson_counts(&[-1.0], 7).is_err());
    }

    #[test]
    fn multinomial_preserves_total() {
        let mut rng = substream(1, TAG_BOOTSTRAP, 0);
        let c = vec![10.0, 0.0, 250.0, 3.0];
        let r = multinomial(&c, &mut rng);
        assert_eq!(r.iter().sum::<f64>(), 263.0);
        assert_eq!(r[1], 0.0);
    }

    #[test]
    fn percentile_interpolates() {
        let v = [0.0, 1.0, 2.0, 3.0, 4.0];
        assert_eq!(percentile(&v, 0.5), 2.0);
        assert_eq!(percentile(&v, 0.125), 0.5);
    }

    #[test]
    fn zero_samples_rejected() {
        let s = TripartiteGaussianState::symmetric(4.0, 1.0).unwrap();
        assert!(sample_triplets(&s, Domain::Position, 0, 1, Execution::Sequential).is_err());
    }
}
