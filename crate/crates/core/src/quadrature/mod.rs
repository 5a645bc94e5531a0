//! Spherical, radial and hat-space integration with error estimates.

pub mod estimate;
pub mod gauss;
pub mod hat;
pub mod monte_carlo;
pub mod radial;
pub mod sphere;

pub use estimate::{pairwise_sum, Ensemble, IntegralEstimate, Method, Spread};
pub use hat::{integrate_hat, HatGrid, HatMethod, HatOutput, HatPass, HatPlan, HatSettings, PassOutput};
pub use monte_carlo::McSampler;
pub use radial::integrate_radial;
pub use sphere::{moment_residuals, sphere_integrate, sphere_moment_matrix, MomentResiduals, SphericalRule, SHIPPED_DEGREES};
