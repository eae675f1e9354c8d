//! Lookup of the named limiting systems, instantiated from a model block.

use sgdlab_limits::{
    bgmm_ballistic, bgmm_diffusive, bgmm_noiseless, bgmm_ring_level, tensor_ballistic,
    tensor_diffusive, tensor_diffusive_boosted, tensor_double_diffusive, tensor_loss_ballistic,
    xor_ballistic, xor_diffusive, xor_noiseless, xor_ring_level, McConfig, OdeSystem, SdeSystem,
};

use crate::config::ModelConfig;
use crate::error::HarnessError;

/// ODE system names accepted by [`build_ode`].
pub const ODE_SYSTEMS: &[&str] = &[
    "tensor-ballistic",
    "tensor-loss",
    "bgmm-ballistic",
    "bgmm-noiseless",
    "xor-ballistic",
    "xor-noiseless",
];

/// SDE system names accepted by [`build_sde`].
pub const SDE_SYSTEMS: &[&str] = &[
    "tensor-diffusive",
    "tensor-diffusive-boosted",
    "tensor-double-diffusive",
    "bgmm-diffusive",
    "xor-diffusive",
];

/// Builds a named ballistic ODE with the model block's parameters. The
/// finite-λ mixture fields fall back to their closed zero-noise forms when
/// λ is infinite.
pub fn build_ode(name: &str, model: &ModelConfig, c_delta: f64) -> Result<OdeSystem, HarnessError> {
    let system = match name {
        "tensor-ballistic" => {
            tensor_ballistic(model.k()?, model.lambda, model.alpha, c_delta)?
        }
        "tensor-loss" => tensor_loss_ballistic(model.k()?, model.lambda, c_delta)?,
        "bgmm-ballistic" => {
            if model.lambda.is_infinite() {
                bgmm_noiseless(model.alpha, None)?
            } else {
                bgmm_ballistic(model.lambda, model.alpha, c_delta, McConfig::default())?
            }
        }
        "bgmm-noiseless" => bgmm_noiseless(model.alpha, None)?,
        "xor-ballistic" => {
            if model.lambda.is_infinite() {
                xor_noiseless(model.width()?, model.alpha, None)?
            } else {
                xor_ballistic(
                    model.width()?,
                    model.lambda,
                    model.alpha,
                    c_delta,
                    McConfig::default(),
                )?
            }
        }
        "xor-noiseless" => xor_noiseless(model.width()?, model.alpha, None)?,
        other => {
            return Err(HarnessError::Config(format!(
                "unknown ODE system '{other}'; known: {}",
                ODE_SYSTEMS.join(", ")
            )))
        }
    };
    Ok(system)
}

/// Builds a named diffusive SDE with the model block's parameters. The
/// mixture fluctuation systems are anchored at the symmetric ring point
/// (a₁ = a₂ = √(level/2), negated on the ν side); `tensor-diffusive-boosted`
/// reads `model.lambda` as the boosted signal strength Λ.
pub fn build_sde(name: &str, model: &ModelConfig) -> Result<SdeSystem, HarnessError> {
    let system = match name {
        "tensor-diffusive" => tensor_diffusive(model.k()?, model.lambda)?,
        "tensor-diffusive-boosted" => tensor_diffusive_boosted(model.k()?, model.lambda)?,
        "tensor-double-diffusive" => tensor_double_diffusive(model.k()?, model.lambda)?,
        "bgmm-diffusive" => {
            let a = (bgmm_ring_level(model.alpha)? / 2.0).sqrt();
            bgmm_diffusive(model.alpha, [a, a])?
        }
        "xor-diffusive" => {
            let a = (xor_ring_level(model.alpha)? / 2.0).sqrt();
            xor_diffusive(model.alpha, [a, a], [-a, -a])?
        }
        other => {
            return Err(HarnessError::Config(format!(
                "unknown SDE system '{other}'; known: {}",
                SDE_SYSTEMS.join(", ")
            )))
        }
    };
    Ok(system)
}
