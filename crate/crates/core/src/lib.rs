//! Pseudo-spectral simulation and lower-bound toolkit for full-discrete
//! Euler-type approximations of stochastic reaction–diffusion equations on
//! (0,1), with the stochastic Allen–Cahn equation as the flagship case.
//!
//! | Module | Contents |
//! |--------|----------|
//! | [`spectral`] | Fourier basis arithmetic: projections, interpolation-space norms, semigroups, dealiased polynomial evaluation |
//! | [`noise`] | Reproducible sampling of projected cylindrical Wiener increments |
//! | [`schemes`] | Full-discrete SPDE steppers (exponential / linear-implicit), tamed contrast, 1-D Euler–Maruyama |
//! | [`bounds`] | Log-space evaluation of the explicit lower bounds and their constant pack |
//! | [`montecarlo`] | Parallel moment / event-probability estimation with explosion accounting |

pub mod bounds;
pub mod error;
pub mod montecarlo;
pub mod noise;
pub mod schemes;
pub mod spectral;

pub use error::{Error, Result};
pub use montecarlo::MomentEstimate;
pub use noise::{NoiseIncrement, SeedSpec};
pub use schemes::{SchemeConfig, SchemeKind, Sode1dConfig, TrajectoryResult};
pub use spectral::{GridState, OperatorParams, SemigroupKind, SpectralState, EXPLOSION_GUARD};
