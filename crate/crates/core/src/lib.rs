//! Optimal universal cloning and optimal state estimation for qudits.
//!
//! The crate builds the optimal `N -> M` cloner and finite covariant
//! estimation measurements as explicit channels, and checks numerically that
//! optimal estimation from `N` copies reaches the fidelity of the cloner in the
//! limit of infinitely many outputs, `(N + 1)/(N + d)`.
//!
//! - [`qudit`]: states, the SU(d) generator basis, Bloch vectors, fidelity.
//! - [`symmetric`]: the symmetric subspace of `N` qudits.
//! - [`pseudo_mixture`]: real-weight decompositions into tensor powers.
//! - [`cloner`]: the optimal universal cloning channel.
//! - [`estimator`]: finite measurements, outcome sampling, shrinking factors.
//! - [`theorem`]: end-to-end experiments combining cloning and estimation.
//! - [`cli`]: the command-line front end.

pub mod cli;
pub mod cloner;
pub mod error;
pub mod estimator;
pub mod io;
pub mod linalg;
pub mod montecarlo;
pub mod nnls;
pub mod pseudo_mixture;
pub mod qudit;
pub mod symmetric;
pub mod theorem;

pub use error::{Error, Result};
pub use qudit::{DensityOperator, Dimension, PureState, ShrinkingFactor};
