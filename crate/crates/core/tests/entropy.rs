use approx::assert_abs_diff_eq;
use proptest::prelude::*;

use tripent::entropy::*;
use tripent::sampler::{adaptive_histogram_with_oracle, RefinementPolicy};
use tripent::spdc::{covariance_matrices, gaussian_triphoton_state, PhaseMatchSolution};
use tripent::Error;

const H_UNIT: f64 = 2.047095585180641;

#[test]
fn gaussian_entropy_values() {
    assert_abs_diff_eq!(unit_gaussian_entropy(), H_UNIT, epsilon = 1e-15);
    assert_abs_diff_eq!(gaussian_entropy(4.0).unwrap(), H_UNIT + 1.0, epsilon = 1e-15);
    assert!(matches!(gaussian_entropy(0.0), Err(Error::InvalidParameter { .. })));
}

#[test]
fn discretized_examples() {
    let h = Histogram1D::uniform(0.0, 0.5, vec![0.25; 4]).unwrap();
    assert_eq!(discretized_differential_entropy(&h).unwrap(), 1.0);

    let coarse = Histogram1D::gaussian_exact(0.0, 1.0, -8.0, 0.5, 32).unwrap();
    let fine = Histogram1D::gaussian_exact(0.0, 1.0, -8.0, 0.25, 64).unwrap();
    let hc = discretized_differential_entropy(&coarse).unwrap();
    let hf = discretized_differential_entropy(&fine).unwrap();
    assert!(hc >= H_UNIT && hc - H_UNIT < 0.02);
    assert!(H_UNIT < hf && hf < hc);
}

#[test]
fn partition_examples() {
    let one = MultiResHistogram::new(
        AxisBox::new([0.0], [2.0]).unwrap(),
        vec![Leaf { bbox: AxisBox::new([0.0], [2.0]).unwrap(), mass: 1.0, depth: 0 }],
        false,
    )
    .unwrap();
    assert_eq!(partition_differential_entropy(&one).unwrap(), 1.0);
    let root = AxisBox::new([0.0], [2.0]).unwrap();
    let leaves = root
        .split()
        .into_iter()
        .map(|bbox| Leaf { bbox, mass: 0.5, depth: 1 })
        .collect();
    let two = MultiResHistogram::new(root, leaves, false).unwrap();
    assert_eq!(partition_differential_entropy(&two).unwrap(), 1.0);
}

#[test]
fn partition_matches_uniform_histogram() {
    let root = AxisBox::new([-8.0], [8.0]).unwrap();
    let mut leaves = vec![root];
    for _ in 0..6 {
        leaves = leaves.iter().flat_map(|b| b.split()).collect();
    }
    let masses: Vec<f64> = leaves
        .iter()
        .map(|b| gaussian_interval_mass(b.lo[0], b.hi[0], 0.3, 1.7))
        .collect();
    let part = MultiResHistogram::new(
        root,
        leaves.iter().zip(&masses).map(|(&bbox, &mass)| Leaf { bbox, mass, depth: 6 }).collect(),
        false,
    )
    .unwrap();
    let hist = Histogram1D::uniform(-8.0, 0.25, masses).unwrap();
    assert_abs_diff_eq!(
        partition_differential_entropy(&part).unwrap(),
        discretized_differential_entropy(&hist).unwrap(),
        epsilon = 1e-12
    );
}

#[test]
fn adaptive_exact_partition_upper_bounds_and_decreases() {
    let root = AxisBox::new([-16.0], [16.0]).unwrap();
    let mut last = f64::INFINITY;
    for depth in 3..=12 {
        let policy = RefinementPolicy { tau: 1e-4, max_depth: depth, leaf_budget: 100_000 };
        let h = adaptive_histogram_with_oracle(root, |b| gaussian_interval_mass(b.lo[0], b.hi[0], 0.0, 1.0), &policy)
            .unwrap();
        let e = partition_differential_entropy(&h).unwrap();
        assert!(e >= H_UNIT, "depth {depth}: {e}");
        assert!(e <= last + 1e-12, "depth {depth}: {e} > {last}");
        last = e;
    }
    assert!(last - H_UNIT < 1e-3);
}

#[test]
fn conditional_entropy_examples() {
    let id = CovarianceMatrix3::from_rows([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]).unwrap();
    for t in 0..3 {
        assert_abs_diff_eq!(gaussian_conditional_entropy(&id, t).unwrap(), H_UNIT, epsilon = 1e-14);
    }
    let phase = PhaseMatchSolution::from_k_tilde(2.6e7, 3e-3).unwrap();
    let state = gaussian_triphoton_state(&phase, 1e-3).unwrap();
    let (sx, sk) = covariance_matrices(&state).unwrap();
    assert_abs_diff_eq!(gaussian_conditional_entropy(&sx, 0).unwrap(), -14.460, epsilon = 1e-3);
    assert_abs_diff_eq!(gaussian_conditional_entropy(&sk, 0).unwrap(), 11.013, epsilon = 1e-3);

    let singular = CovarianceMatrix3::from_rows([[1.0, 1.0, 0.0], [1.0, 1.0, 0.0], [0.0, 0.0, 1.0]]).unwrap();
    assert!(matches!(
        gaussian_conditional_entropy(&singular, 0),
        Err(Error::DegenerateCorrelations)
    ));
}

fn random_cov() -> impl Strategy<Value = [[f64; 3]; 3]> {
    (prop::array::uniform9(-2.0f64..2.0), 0.01f64..1.0).prop_map(|(a, eps)| {
        // A A^T + eps I is positive definite.
        let m = |i: usize, j: usize| a[3 * i + j];
        std::array::from_fn(|i| {
            std::array::from_fn(|j| {
                (0..3).map(|k| m(i, k) * m(j, k)).sum::<f64>() + if i == j { eps } else { 0.0 }
            })
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn scaling_law_analytic(var in 1e-6f64..1e6, a in prop_oneof![-1e3f64..-1e-3, 1e-3f64..1e3]) {
        let lhs = gaussian_entropy(a * a * var).unwrap();
        let rhs = gaussian_entropy(var).unwrap() + a.abs().log2();
        prop_assert!((lhs - rhs).abs() < 1e-12);
    }

    #[test]
    fn scaling_law_sampled_exact(
        xs in prop::collection::vec(-50.0f64..50.0, 10..300),
        k in -20i32..20,
        w in 0.05f64..5.0,
    ) {
        // Power-of-two scale factors keep every bin assignment exact.
        let a = 2f64.powi(k);
        let scaled: Vec<f64> = xs.iter().map(|x| a * x).collect();
        let h0 = discretized_differential_entropy(&Histogram1D::anchored(&xs, w).unwrap()).unwrap();
        let h1 = discretized_differential_entropy(&Histogram1D::anchored(&scaled, a * w).unwrap()).unwrap();
        prop_assert!((h1 - h0 - k as f64).abs() < 1e-12);
    }

    #[test]
    fn reflection_law(xs in prop::collection::vec(-50.0f64..50.0, 10..300), w in 0.05f64..5.0) {
        let neg: Vec<f64> = xs.iter().map(|x| -x).collect();
        let h = Histogram1D::anchored(&xs, w).unwrap();
        let mut mirrored = h.masses().to_vec();
        mirrored.reverse();
        let hm = Histogram1D::uniform(-h.edges()[h.len()], w, mirrored).unwrap();
        let direct = discretized_differential_entropy(&h).unwrap();
        prop_assert_eq!(direct, discretized_differential_entropy(&hm).unwrap());
        // Binning -x directly: identical up to floor's tie side on the edges.
        let hn = discretized_differential_entropy(&Histogram1D::anchored(&neg, w).unwrap()).unwrap();
        let mut tie = false;
        for x in &xs {
            tie |= (x / w).fract() == 0.0;
        }
        if !tie {
            prop_assert_eq!(direct, hn);
        }
    }

    #[test]
    fn conditioning_never_increases_entropy(rows in random_cov(), t in 0usize..3) {
        let cov = CovarianceMatrix3::from_rows(rows).unwrap();
        let cond = gaussian_conditional_entropy(&cov, t).unwrap();
        let marg = gaussian_entropy(cov.get(t, t)).unwrap();
        prop_assert!(cond <= marg + 1e-12, "cond {cond} > marginal {marg}");
    }

    #[test]
    fn dyadic_refinement_monotone(
        mean in -2.0f64..2.0,
        sigma in 0.05f64..5.0,
        w_frac in 0.01f64..4.0,
    ) {
        let w = w_frac * sigma;
        let half = 20.0 * sigma;
        let n = (2.0 * half / w).ceil() as usize;
        let origin = mean - 0.5 * n as f64 * w;
        let coarse = Histogram1D::gaussian_exact(mean, sigma, origin, w, n).unwrap();
        let fine = Histogram1D::gaussian_exact(mean, sigma, origin, w / 2.0, 2 * n).unwrap();
        let hc = discretized_differential_entropy(&coarse).unwrap();
        let hf = discretized_differential_entropy(&fine).unwrap();
        let h = gaussian_entropy(sigma * sigma).unwrap();
        prop_assert!(hf <= hc + 1e-12);
        prop_assert!(hc - hf <= 1.0 + 1e-12);
        prop_assert!(hf >= h - 1e-12);
    }

    #[test]
    fn discrete_entropy_permutation_invariant(
        masses in prop::collection::vec(0.0f64..10.0, 1..50),
        seed in any::<u64>(),
    ) {
        prop_assume!(masses.iter().sum::<f64>() > 0.0);
        let mut shuffled = masses.clone();
        let n = shuffled.len();
        let mut s = seed;
        for i in (1..n).rev() {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            shuffled.swap(i, (s >> 33) as usize % (i + 1));
        }
        prop_assert_eq!(discrete_entropy(&masses).unwrap(), discrete_entropy(&shuffled).unwrap());
    }
}
