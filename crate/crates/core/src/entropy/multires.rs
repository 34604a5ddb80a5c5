use crate::error::{invalid, Error, Result};

/// Axis-aligned box `[lo, hi)` in `D` dimensions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisBox<const D: usize> {
    pub lo: [f64; D],
    pub hi: [f64; D],
}

impl<const D: usize> AxisBox<D> {
    pub fn new(lo: [f64; D], hi: [f64; D]) -> Result<Self> {
        for i in 0..D {
            if !(lo[i].is_finite() && hi[i].is_finite() && hi[i] > lo[i]) {
                return Err(invalid("box", format!("axis {i}: need finite lo < hi")));
            }
        }
        Ok(Self { lo, hi })
    }

    pub fn volume(&self) -> f64 {
        (0..D).map(|i| self.hi[i] - self.lo[i]).product()
    }

    pub fn center(&self) -> [f64; D] {
        std::array::from_fn(|i| 0.5 * (self.lo[i] + self.hi[i]))
    }

    /// Halves every axis, giving `2^D` children. Child `c` takes the upper
    /// half of axis `i` when bit `i` of `c` is set.
    pub fn split(&self) -> Vec<AxisBox<D>> {
        let mid = self.center();
        (0..1usize << D)
            .map(|c| {
                let mut b = *self;
                for i in 0..D {
                    if c >> i & 1 == 1 {
                        b.lo[i] = mid[i];
                    } else {
                        b.hi[i] = mid[i];
                    }
                }
                b
            })
            .collect()
    }

    /// Index of the child of `split()` containing `p`.
    pub fn child_index(&self, p: &[f64; D]) -> usize {
        let mid = self.center();
        (0..D).fold(0, |acc, i| acc | (usize::from(p[i] >= mid[i]) << i))
    }

    pub fn contains_box(&self, other: &AxisBox<D>) -> bool {
        (0..D).all(|i| other.lo[i] >= self.lo[i] && other.hi[i] <= self.hi[i])
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Leaf<const D: usize> {
    pub bbox: AxisBox<D>,
    pub mass: f64,
    /// Number of splits from the root; the 2-per-axis seed level is depth 1.
    pub depth: u32,
}

/// Adaptive partition of a root box into leaves carrying masses.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiResHistogram<const D: usize> {
    pub root: AxisBox<D>,
    pub leaves: Vec<Leaf<D>>,
    /// Set when the leaf budget stopped refinement before the threshold was met.
    pub truncated: bool,
}

impl<const D: usize> MultiResHistogram<D> {
    /// Checks that the leaves tile the root: every leaf lies inside it and the
    /// volumes add up. Leaves produced by `split` cannot overlap, so the volume
    /// sum rules out gaps.
    pub fn new(root: AxisBox<D>, leaves: Vec<Leaf<D>>, truncated: bool) -> Result<Self> {
        let total: f64 = leaves.iter().map(|l| l.bbox.volume()).sum();
        if (total - root.volume()).abs() > 1e-9 * root.volume() {
            return Err(invalid("leaves", "leaf volumes do not add up to the root volume"));
        }
        for (i, l) in leaves.iter().enumerate() {
            if !root.contains_box(&l.bbox) {
                return Err(invalid("leaves", format!("leaf {i} lies outside the root")));
            }
            if !(l.mass >= 0.0 && l.mass.is_finite()) {
                return Err(invalid("leaves", format!("leaf {i} has invalid mass")));
            }
        }
        Ok(Self {
            root,
            leaves,
            truncated,
        })
    }

    pub fn total_mass(&self) -> f64 {
        self.leaves.iter().map(|l| l.mass).sum()
    }

    pub fn max_depth(&self) -> u32 {
        self.leaves.iter().map(|l| l.depth).max().unwrap_or(0)
    }

    pub fn masses(&self) -> Vec<f64> {
        self.leaves.iter().map(|l| l.mass).collect()
    }

    pub fn with_masses(&self, masses: &[f64]) -> Result<Self> {
        if masses.len() != self.leaves.len() {
            return Err(invalid("masses", "length must equal the leaf count"));
        }
        let leaves = self
            .leaves
            .iter()
            .zip(masses)
            .map(|(l, &mass)| Leaf { mass, ..*l })
            .collect();
        Self::new(self.root, leaves, self.truncated)
    }
}

/// `sum_l p_l log2(vol_l / p_l)`: entropy of the piecewise-uniform density
/// that matches the leaf masses.
pub fn partition_differential_entropy<const D: usize>(hist: &MultiResHistogram<D>) -> Result<f64> {
    let total = hist.total_mass();
    if total <= 0.0 {
        return Err(Error::ZeroMass);
    }
    let mut h = 0.0;
    for (i, leaf) in hist.leaves.iter().enumerate() {
        let vol = leaf.bbox.volume();
        if vol <= 0.0 {
            return Err(Error::DegenerateLeaf(i));
        }
        if leaf.mass > 0.0 {
            let p = leaf.mass / total;
            h += p * (vol / p).log2();
        }
    }
    Ok(h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entropy::{discretized_differential_entropy, Histogram1D};

    fn leaf1(lo: f64, hi: f64, mass: f64) -> Leaf<1> {
        Leaf {
            bbox: AxisBox::new([lo], [hi]).unwrap(),
            mass,
            depth: 1,
        }
    }

    #[test]
    fn single_and_double_leaf() {
        let root = AxisBox::new([0.0], [2.0]).unwrap();
        let h = MultiResHistogram::new(root, vec![leaf1(0.0, 2.0, 1.0)], false).unwrap();
        assert_eq!(partition_differential_entropy(&h).unwrap(), 1.0);
        let h = MultiResHistogram::new(
            root,
            vec![leaf1(0.0, 1.0, 0.5), leaf1(1.0, 2.0, 0.5)],
            false,
        )
        .unwrap();
        assert_eq!(partition_differential_entropy(&h).unwrap(), 1.0);
    }

    #[test]
    fn gap_rejected() {
        let root = AxisBox::new([0.0], [2.0]).unwrap();
        assert!(MultiResHistogram::new(root, vec![leaf1(0.0, 1.0, 1.0)], false).is_err());
    }

    #[test]
    fn matches_uniform_histogram() {
        let masses = [3.0, 1.0, 0.0, 7.0, 2.0, 5.0];
        let w = 0.37;
        let root = AxisBox::new([-1.0], [-1.0 + 6.0 * w]).unwrap();
        let leaves = masses
            .iter()
            .enumerate()
            .map(|(i, &m)| leaf1(-1.0 + i as f64 * w, -1.0 + (i + 1) as f64 * w, m))
            .collect();
        let mr = MultiResHistogram::new(root, leaves, false).unwrap();
        let h1 = Histogram1D::uniform(-1.0, w, masses.to_vec()).unwrap();
        let a = partition_differential_entropy(&mr).unwrap();
        let b = discretized_differential_entropy(&h1).unwrap();
        assert!((a - b).abs() < 1e-12, "{a} vs {b}");
    }

    #[test]
    fn split_covers_parent() {
        let b = AxisBox::new([0.0, -1.0, 2.0], [1.0, 1.0, 6.0]).unwrap();
        let kids = b.split();
        assert_eq!(kids.len(), 8);
        let v: f64 = kids.iter().map(AxisBox::volume).sum();
        assert_eq!(v, b.volume());
        let p = [0.75, -0.5, 5.0];
        let c = b.child_index(&p);
        let k = kids[c];
        assert!((0..3).all(|i| p[i] >= k.lo[i] && p[i] < k.hi[i]));
    }
}
