//! Exact symbolic engine for deformation quantization on symplectic vector
//! spaces: Moyal and flat Fedosov star products, classical and quantum
//! momentum maps, their non-equivariance cocycles, and the associated
//! central extensions.
//!
//! Everything is computed in exact Gaussian-rational arithmetic. Formal
//! series in ℏ are truncated at an explicit order, and every identity check
//! states the order (and monomial degree bound) at which it holds.

#![allow(clippy::needless_range_loop)]

pub mod error;
pub mod fedosov;
pub mod forms;
pub mod lie;
pub mod linalg;
pub mod momentum;
pub mod par;
pub mod pipeline;
pub mod poly;
pub mod quantum;
pub mod samples;
pub mod scalar;
pub mod scenario;
pub mod series;
pub mod symplectic;

pub use error::{AlgebraError, FedosovError, LieError, MomentumError, QuantumError, ScenarioError, SymplecticError};
pub use par::Exec;
pub use poly::Polynomial;
pub use scalar::Scalar;
pub use series::{classical_limit, FormalSeries};
pub use symplectic::{Convention, Moyal, PhaseSpace, StarProduct, VectorField};
