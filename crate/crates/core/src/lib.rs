//! Exit probabilities of Markov-modulated tandem walks.
//!
//! The walk `X` on the quarter plane jumps by `(1,0)`, `(-1,1)` and `(0,-1)`
//! with probabilities selected by a finite modulating chain `M`. The crate
//! approximates `p_n(x,m) = P(tau_n < tau_0)`, the probability that the total
//! queue length reaches `n` before the system empties, by superposing
//! exponential harmonic functions of the limit process `Y = (n - x1, x2)`, and
//! provides value-iteration and Monte Carlo oracles to check the result.

pub mod characteristic;
pub mod error;
pub mod exact;
pub mod harmonic;
pub mod linalg;
pub mod model;
pub mod modelfile;
pub mod roots;

pub use error::{Error, ErrorClass, Result};
pub use linalg::C64;
pub use model::{ModelParams, StationaryDistribution, ValidationReport};
pub use roots::{RootCatalog, SurfacePoint};
pub use exact::{ErrorGrid, McEstimate, ProbabilityGrid};
pub use harmonic::{Approximant, BoundCertificate, HarmonicFn, HarmonicKind};
pub use modelfile::ModelFile;
