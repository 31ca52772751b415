//! Sampled continuous-time signals, derivative estimation, and jets.

mod diff;
mod grid;
mod jet;
mod smooth;
mod trajectory;

pub use diff::{central4_half_width, central4_min_samples, differentiate, fd_weights, DiffMethod};
pub use grid::{GridPosition, TimeGrid, SNAP_TOL};
pub use jet::{build_jet, DerivativeSource, JetTrajectory, SignalJet, SignalKind};
pub use smooth::SmoothSignal;
pub use trajectory::{InterpOrder, Trajectory};
