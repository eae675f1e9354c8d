//! Scaling limits of online gradient descent for the spiked tensor and
//! mixture-classifier families: deterministic ballistic flows for the summary
//! statistics, diffusive corrections around equators and rings, and the
//! numerical integrators used to realize them.
//!
//! The ballistic ODE systems share their coordinate schemas with the
//! corresponding finite-size models, so simulated summary trajectories and
//! integrated limit trajectories can be compared directly. The diffusive SDE
//! systems describe √n-rescaled fluctuations and deliberately use distinct
//! (`_tilde`) coordinate names.

pub mod bgmm;
pub mod error;
pub mod mc;
pub mod ode;
pub mod sde;
pub mod tensor;
pub mod xor;

pub use bgmm::{bgmm_ballistic, bgmm_diffusive, bgmm_noiseless, bgmm_ring_level};
pub use error::LimitError;
pub use mc::{
    bgmm_gaussian_expectations, xor_gaussian_expectations, GaussianField, McConfig, MC_STREAM,
};
pub use ode::{rk4_integrate, OdeSystem};
pub use sde::{euler_maruyama, psd_sqrt, SdeSystem};
pub use tensor::{
    tensor_ballistic, tensor_diffusive, tensor_diffusive_boosted, tensor_double_diffusive,
    tensor_loss_ballistic, tensor_population_loss,
};
pub use xor::{xor_ballistic, xor_diffusive, xor_noiseless, xor_ring_level};
