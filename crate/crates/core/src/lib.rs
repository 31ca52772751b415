//! Data-driven representation and simulation of continuous-time linear
//! time-invariant systems from measured input-output trajectories.
//!
//! The pipeline works on jets: a sampled input-output pair together with
//! its time derivatives up to some order `L`. Time-shifted copies of every
//! jet layer are stacked into a time-varying data matrix, whose rank decides
//! whether the data determine the system, and whose products with a
//! coefficient trajectory `alpha(t)` span the admissible jets of the system.
//!
//! - [`signals`]: sampled trajectories, interpolation, derivative estimation, jets
//! - [`datamatrix`]: lazy evaluation of the shifted data matrices
//! - [`informativity`]: numerical rank tests on the stacked matrices
//! - [`representation`]: candidate jets from `alpha` and admissibility residuals
//! - [`simulator`]: data-driven simulation by integrating the `alpha` dynamics
//! - [`oracle`]: ground-truth systems, exact trajectories, and kernel residuals
//! - [`io`]: CSV and plain-text file formats

pub mod datamatrix;
pub mod error;
pub mod informativity;
pub mod io;
pub mod linalg;
pub mod ode;
pub mod oracle;
pub mod representation;
pub mod signals;
pub mod simulator;

pub use error::{Error, Result};
