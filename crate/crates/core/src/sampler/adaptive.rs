use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::entropy::{AxisBox, Leaf, MultiResHistogram};
use crate::error::{invalid, Error, Result};

/// Stopping rule for brightest-first dyadic refinement. Refinement starts at
/// 2 bins per axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RefinementPolicy {
    /// A leaf is split while it holds more than this fraction of the mass.
    pub tau: f64,
    pub max_depth: u32,
    pub leaf_budget: usize,
}

impl Default for RefinementPolicy {
    fn default() -> Self {
        Self {
            tau: 1.0 / 64.0,
            max_depth: 10,
            leaf_budget: 100_000,
        }
    }
}

impl RefinementPolicy {
    pub fn validate<const D: usize>(&self) -> Result<()> {
        if !(self.tau > 0.0 && self.tau < 1.0) {
            return Err(invalid("tau", format!("must be in (0, 1), got {}", self.tau)));
        }
        if self.max_depth < 1 {
            return Err(invalid("max_depth", "must be >= 1"));
        }
        if self.leaf_budget < 1 << D {
            return Err(invalid("leaf_budget", format!("must allow the 2^{D} seed leaves")));
        }
        Ok(())
    }
}

struct Node<const D: usize, P> {
    bbox: AxisBox<D>,
    mass: f64,
    depth: u32,
    seq: u64,
    payload: P,
}

impl<const D: usize, P> PartialEq for Node<D, P> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl<const D: usize, P> Eq for Node<D, P> {}

impl<const D: usize, P> PartialOrd for Node<D, P> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<const D: usize, P> Ord for Node<D, P> {
    // Brightest first; earlier-created first among equals.
    fn cmp(&self, other: &Self) -> Ordering {
        self.mass
            .total_cmp(&other.mass)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

fn refine<const D: usize, P>(
    root: AxisBox<D>,
    root_payload: P,
    total: f64,
    policy: &RefinementPolicy,
    split: impl Fn(&AxisBox<D>, P) -> Vec<(AxisBox<D>, f64, P)>,
) -> Result<MultiResHistogram<D>> {
    policy.validate::<D>()?;
    if !(total > 0.0) {
        return Err(Error::ZeroMass);
    }
    let threshold = policy.tau * total;
    let children = (1usize << D) - 1;
    let mut seq = 0u64;
    let mut heap = BinaryHeap::new();
    for (bbox, mass, payload) in split(&root, root_payload) {
        heap.push(Node {
            bbox,
            mass,
            depth: 1,
            seq,
            payload,
        });
        seq += 1;
    }
    let mut done = Vec::new();
    let mut truncated = false;
    while let Some(top) = heap.peek() {
        if top.mass <= threshold {
            break;
        }
        let node = heap.pop().unwrap();
        if node.depth >= policy.max_depth {
            done.push(node);
            continue;
        }
        if heap.len() + done.len() + 1 + children > policy.leaf_budget {
            truncated = true;
            done.push(node);
            break;
        }
        for (bbox, mass, payload) in split(&node.bbox, node.payload) {
            heap.push(Node {
                bbox,
                mass,
                depth: node.depth + 1,
                seq,
                payload,
            });
            seq += 1;
        }
    }
    let mut nodes: Vec<_> = done.into_iter().chain(heap).collect();
    nodes.sort_by_key(|n| n.seq);
    let leaves = nodes
        .into_iter()
        .map(|n| Leaf {
            bbox: n.bbox,
            mass: n.mass,
            depth: n.depth,
        })
        .collect();
    MultiResHistogram::new(root, leaves, truncated)
}

/// Smallest box holding every point, widened where an axis has zero extent.
pub fn bounding_box<const D: usize>(points: &[[f64; D]]) -> Result<AxisBox<D>> {
    if points.is_empty() {
        return Err(invalid("samples", "need at least one sample"));
    }
    let mut lo = [f64::INFINITY; D];
    let mut hi = [f64::NEG_INFINITY; D];
    for p in points {
        for i in 0..D {
            if !p[i].is_finite() {
                return Err(invalid("samples", "non-finite coordinate"));
            }
            lo[i] = lo[i].min(p[i]);
            hi[i] = hi[i].max(p[i]);
        }
    }
    for i in 0..D {
        if hi[i] <= lo[i] {
            let pad = 0.5 * lo[i].abs().max(1.0);
            lo[i] -= pad;
            hi[i] += pad;
        }
    }
    AxisBox::new(lo, hi)
}

/// Adaptive count histogram over the samples' bounding box. Leaf masses are
/// sample counts.
pub fn adaptive_histogram<const D: usize>(
    points: &[[f64; D]],
    policy: &RefinementPolicy,
) -> Result<MultiResHistogram<D>> {
    let root = bounding_box(points)?;
    let all: Vec<u32> = (0..points.len() as u32).collect();
    refine(root, all, points.len() as f64, policy, |bbox, idx| {
        let mut parts: Vec<Vec<u32>> = vec![Vec::new(); 1 << D];
        for i in idx {
            parts[bbox.child_index(&points[i as usize])].push(i);
        }
        bbox.split()
            .into_iter()
            .zip(parts)
            .map(|(b, p)| (b, p.len() as f64, p))
            .collect()
    })
}

/// Adaptive histogram whose leaf masses come from `mass(box)`, e.g. exact
/// probabilities of a known density.
pub fn adaptive_histogram_with_oracle<const D: usize>(
    root: AxisBox<D>,
    mass: impl Fn(&AxisBox<D>) -> f64,
    policy: &RefinementPolicy,
) -> Result<MultiResHistogram<D>> {
    let total = mass(&root);
    refine(root, (), total, policy, |bbox, ()| {
        bbox.split().into_iter().map(|b| (b, mass(&b), ())).collect()
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn policy_validation() {
        let mut p = RefinementPolicy::default();
        assert!(p.validate::<3>().is_ok());
        p.tau = 1.0;
        assert!(p.validate::<1>().is_err());
        let p = RefinementPolicy {
            leaf_budget: 4,
            ..Default::default()
        };
        assert!(p.validate::<3>().is_err());
    }

    #[test]
    fn budget_truncates() {
        let pts: Vec<[f64; 1]> = (0..4096).map(|i| [(i as f64 + 0.5) / 4096.0]).collect();
        let p = RefinementPolicy {
            tau: 1e-3,
            max_depth: 20,
            leaf_budget: 10,
        };
        let h = adaptive_histogram(&pts, &p).unwrap();
        assert!(h.truncated);
        assert!(h.leaves.len() <= 10);
        assert_eq!(h.total_mass(), 4096.0);
    }

    #[test]
    fn degenerate_axis_is_widened() {
        let b = bounding_box(&[[1.0, 2.0], [1.0, 3.0]]).unwrap();
        assert!(b.lo[0] < 1.0 && b.hi[0] > 1.0);
    }
}
