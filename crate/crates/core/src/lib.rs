//! Tripartite continuous-variable entanglement numerics.
//!
//! Lower bounds on the tripartite entanglement of formation (E3F) from
//! position/momentum correlations, the cascaded-SPDC triphoton model, the
//! exact Schmidt spectrum of the symmetric triple-Gaussian state, and a
//! simulator for adaptive multi-resolution coincidence measurements.
//!
//! Entropies are in bits; entanglement is in gebits. Physical quantities are
//! SI throughout.

// `!(x > 0.0)` is the idiom for rejecting NaN along with non-positive values,
// and the dense linear algebra reads best with explicit indices.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod bounds;
pub mod dd;
pub mod entropy;
pub mod error;
pub mod exec;
pub mod io;
pub mod sampler;
pub mod schmidt;
pub mod spdc;
pub mod types;

pub use error::{Error, Result};
pub use exec::Execution;
pub use types::{
    min_coefficient_product, BoundMethod, BoundReport, CoefficientVectors, ConjugatePair,
    ExperimentParams, PolingSign, TripartiteGaussianState, Triple, Variance,
};
