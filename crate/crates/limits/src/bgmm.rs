//! Limiting flows for the two-cluster mixture classifier: the finite-noise
//! ballistic ODE driven by Monte Carlo Gaussian expectations, its closed-form
//! zero-noise specialization, and the diffusive SDE describing escape from the
//! unstable ring of partial solutions.

use nalgebra::DMatrix;
use sgdlab_core::math::{logit, sigmoid};
use sgdlab_core::Schema;

use crate::error::LimitError;
use crate::mc::{bgmm_gaussian_expectations, McConfig};
use crate::ode::OdeSystem;
use crate::sde::SdeSystem;

/// Coordinates shared with the finite-size model: head weights, center
/// overlaps, and the orthogonal overlap matrix packed as its upper triangle.
fn ballistic_schema() -> Schema {
    Schema::new(["v1", "v2", "m1", "m2", "R11", "R12", "R22"])
}

fn check_alpha(alpha: f64) -> Result<(), LimitError> {
    if !(alpha >= 0.0) || !alpha.is_finite() {
        return Err(LimitError::InvalidConfig(format!(
            "ridge coefficient must be nonnegative and finite, got {alpha}"
        )));
    }
    Ok(())
}

/// Squared radius of the ring of partial (one-direction) stationary points in
/// the zero-noise flow: v = m = a with |a|² equal to this level. Requires
/// 0 < α < 1/4; beyond that the ridge swallows the ring.
pub fn bgmm_ring_level(alpha: f64) -> Result<f64, LimitError> {
    if !(alpha > 0.0 && alpha < 0.25) {
        return Err(LimitError::InvalidConfig(format!(
            "the ring exists for ridge coefficients in (0, 1/4), got {alpha}"
        )));
    }
    Ok(-logit(2.0 * alpha))
}

/// Averaged drift of the summary statistics at finite noise level, with the
/// Monte Carlo expectations re-estimated from the shared pool at every
/// evaluation. The `c_delta` term is the step-size-proportional diffusion kick
/// that survives in the orthogonal overlaps.
///
/// A non-PSD orthogonal overlap block makes the right-hand side NaN, which the
/// integrators report as a non-finite state.
pub fn bgmm_ballistic(
    lambda: f64,
    alpha: f64,
    c_delta: f64,
    mc: McConfig,
) -> Result<OdeSystem, LimitError> {
    if lambda.is_nan() || lambda <= 0.0 {
        return Err(LimitError::InvalidConfig(format!(
            "signal-to-noise ratio must be positive (possibly infinite), got {lambda}"
        )));
    }
    check_alpha(alpha)?;
    if !(c_delta >= 0.0) || !c_delta.is_finite() {
        return Err(LimitError::InvalidConfig(format!(
            "step-size constant must be nonnegative, got {c_delta}"
        )));
    }
    if mc.samples == 0 {
        return Err(LimitError::InvalidConfig(
            "sample count must be positive".into(),
        ));
    }
    Ok(OdeSystem::new(
        "bgmm-ballistic",
        ballistic_schema(),
        move |_t, u, out| {
            let (v, m) = (&u[0..2], &u[2..4]);
            let r = DMatrix::from_row_slice(2, 2, &[u[4], u[5], u[5], u[6]]);
            match bgmm_gaussian_expectations(v, m, &r, lambda, &mc) {
                Ok(field) => {
                    for i in 0..2 {
                        out[i] = -(m[i] * field.a_mu[i] + field.a_perp(i, i) + alpha * v[i]);
                        out[2 + i] = -(v[i] * field.a_mu[i] + alpha * m[i]);
                    }
                    let mut slot = 4;
                    for i in 0..2 {
                        for j in i..2 {
                            let flow = -(v[i] * field.a_perp(i, j)
                                + v[j] * field.a_perp(j, i)
                                + 2.0 * alpha * u[slot]);
                            let kick = c_delta * (v[i] * v[j] / lambda) * field.b(i, j);
                            out[slot] = flow + kick;
                            slot += 1;
                        }
                    }
                }
                Err(_) => out.fill(f64::NAN),
            }
        },
    ))
}

/// Zero-noise (infinite signal-to-noise) ballistic flow in closed form.
///
/// Each unit is driven by a logistic bracket gated on the sign of its center
/// overlap; the gate is strict, so a unit sitting exactly at zero overlap
/// feels only the ridge. `tags` optionally force the gate of such a unit to
/// the positive (+1) or negative (−1) branch, which selects one of the
/// half-space limits when integrating along the overlap-zero set.
pub fn bgmm_noiseless(alpha: f64, tags: Option<[i8; 2]>) -> Result<OdeSystem, LimitError> {
    check_alpha(alpha)?;
    let tags = check_tags(tags.as_ref().map(|t| t.as_slice()), 2)?;
    Ok(OdeSystem::new(
        "bgmm-noiseless",
        ballistic_schema(),
        move |_t, u, out| {
            let (v, m) = (&u[0..2], &u[2..4]);
            let f_plus: f64 = (0..2).map(|j| v[j] * m[j].max(0.0)).sum();
            let f_minus: f64 = (0..2).map(|j| v[j] * (-m[j]).max(0.0)).sum();
            let gate_plus = sigmoid(-f_plus);
            let gate_minus = sigmoid(f_minus);
            for i in 0..2 {
                let bracket = gated_bracket(m[i], tags[i], gate_plus, gate_minus);
                out[i] = 0.5 * m[i] * bracket - alpha * v[i];
                out[2 + i] = 0.5 * v[i] * bracket - alpha * m[i];
            }
            for slot in 4..7 {
                out[slot] = -2.0 * alpha * u[slot];
            }
        },
    ))
}

pub(crate) fn check_tags(tags: Option<&[i8]>, len: usize) -> Result<Vec<i8>, LimitError> {
    match tags {
        None => Ok(vec![0; len]),
        Some(t) => {
            if t.len() != len {
                return Err(LimitError::InvalidConfig(format!(
                    "expected {len} gate tags, got {}",
                    t.len()
                )));
            }
            if t.iter().any(|&x| !(-1..=1).contains(&x)) {
                return Err(LimitError::InvalidConfig(
                    "gate tags must be −1, 0, or +1".into(),
                ));
            }
            Ok(t.to_vec())
        }
    }
}

pub(crate) fn gated_bracket(overlap: f64, tag: i8, gate_plus: f64, gate_minus: f64) -> f64 {
    let side = if overlap > 0.0 {
        1
    } else if overlap < 0.0 {
        -1
    } else {
        tag
    };
    match side {
        1 => gate_plus,
        -1 => gate_minus,
        _ => 0.0,
    }
}

/// Diffusive SDE for the rescaled fluctuations around a ring point
/// v = m = a (componentwise a_i ≥ 0, |a|² at the ring level).
///
/// Coordinates are √n-rescaled deviations in the original variable order. The
/// head/overlap twins contract toward each other at rate 2α, the radial
/// direction contracts, the ring tangent is marginal, and the driving noise is
/// the rank-one label flip: Σ̃ = α² qqᵀ with q = (a₁, a₂, a₁, a₂) on the
/// (head, overlap) block and nothing on the orthogonal overlaps.
pub fn bgmm_diffusive(alpha: f64, a: [f64; 2]) -> Result<SdeSystem, LimitError> {
    let level = bgmm_ring_level(alpha)?;
    if a.iter().any(|x| !x.is_finite() || *x < 0.0) {
        return Err(LimitError::InvalidConfig(format!(
            "ring point coordinates must be nonnegative and finite, got {a:?}"
        )));
    }
    let radius2 = a[0] * a[0] + a[1] * a[1];
    if (radius2 - level).abs() > 1e-8 {
        return Err(LimitError::InvalidConfig(format!(
            "base point must sit on the ring: expected |a|² = {level:.12}, got {radius2:.12}"
        )));
    }
    let coupling = alpha * (1.0 - 2.0 * alpha);
    let schema = Schema::new([
        "v1_tilde", "v2_tilde", "m1_tilde", "m2_tilde", "R11_tilde", "R12_tilde", "R22_tilde",
    ]);
    Ok(SdeSystem::new(
        "bgmm-diffusive",
        schema,
        1,
        move |_t, u, out| {
            let mix: f64 = (0..2).map(|k| a[k] * (u[k] + u[2 + k])).sum();
            for i in 0..2 {
                out[i] = alpha * (u[2 + i] - u[i]) - a[i] * coupling * mix;
                out[2 + i] = alpha * (u[i] - u[2 + i]) - a[i] * coupling * mix;
            }
            for slot in 4..7 {
                out[slot] = -2.0 * alpha * u[slot];
            }
        },
        move |_t, _u, f| {
            f.fill(0.0);
            for i in 0..2 {
                f[(i, 0)] = alpha * a[i];
                f[(2 + i, 0)] = alpha * a[i];
            }
        },
    ))
}
