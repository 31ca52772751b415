//! Ground-truth systems for verification: random state-space models,
//! analytic inputs, exact trajectories and jets, image forms, and the
//! model's own input-output equations.

mod exact;
mod image;
mod input;
mod kernel;
mod model;

pub use exact::{gauss_legendre, simulate_exact, ExactRun, QUAD_TOL};
pub use image::{generate_latent, make_image_form, ImageFormModel, LatentRun};
pub use input::{AnalyticInput, Term};
pub use kernel::{kernel_basis, kernel_residual};
pub use model::{make_random_system, StateSpaceModel};
