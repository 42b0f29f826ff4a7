//! Certified bounds on bipartite entanglement measures, random induced and
//! antisymmetric states, and audits of generalized monogamy relations
//! E(A:BC) ≥ f(E(A:B), E(A:C)).
//!
//! Numerical code is generic over [`Real`] (`f32` or `f64`); the aliases at
//! the crate root fix the scalar to `f64`, which is what the experiment
//! drivers and the CLI use. All entropies are in bits.

pub mod antisym;
pub mod audit;
pub mod error;
pub mod experiments;
pub mod linalg;
pub mod measures;
pub mod product;
pub mod random;
pub mod scalar;
pub mod state;

pub use error::{Error, Result};
pub use random::{InducedStateSpec, SeededSampler};
pub use scalar::Real;
pub use state::{partial_trace, purify, tensor, trace_distance, von_neumann_entropy, CutSpec};

pub type MultipartiteState = state::MultipartiteState<f64>;
pub type PureState = state::PureState<f64>;
