//! Limiting flows for the four-cluster (two-center) mixture classifier: the
//! finite-noise ballistic ODE driven by Monte Carlo Gaussian expectations, its
//! closed-form zero-noise specialization for any width, and the diffusive SDE
//! around the width-four product of partial-solution rings.

use nalgebra::DMatrix;
use sgdlab_core::math::{logit, sigmoid};
use sgdlab_core::Schema;

use crate::bgmm::{check_tags, gated_bracket};
use crate::error::LimitError;
use crate::mc::{xor_gaussian_expectations, McConfig};
use crate::ode::OdeSystem;
use crate::sde::SdeSystem;

/// Coordinates shared with the finite-size model: head weights, overlaps with
/// each center, and the orthogonal overlap matrix packed as its upper triangle.
fn ballistic_schema(width: usize) -> Schema {
    let mut names: Vec<String> = (1..=width).map(|i| format!("v{i}")).collect();
    names.extend((1..=width).map(|i| format!("m{i}_mu")));
    names.extend((1..=width).map(|i| format!("m{i}_nu")));
    for i in 1..=width {
        for j in i..=width {
            names.push(format!("R{i}{j}"));
        }
    }
    Schema::new(names)
}

fn check_width(width: usize) -> Result<(), LimitError> {
    if width < 4 {
        return Err(LimitError::InvalidConfig(format!(
            "classifying all four clusters requires width at least 4, got {width}"
        )));
    }
    Ok(())
}

fn check_alpha(alpha: f64) -> Result<(), LimitError> {
    if !(alpha >= 0.0) || !alpha.is_finite() {
        return Err(LimitError::InvalidConfig(format!(
            "ridge coefficient must be nonnegative and finite, got {alpha}"
        )));
    }
    Ok(())
}

/// Squared radius of a single-center ring of partial stationary points in the
/// zero-noise flow. Requires 0 < α < 1/8; beyond that the ridge swallows the
/// rings.
pub fn xor_ring_level(alpha: f64) -> Result<f64, LimitError> {
    if !(alpha > 0.0 && alpha < 0.125) {
        return Err(LimitError::InvalidConfig(format!(
            "the rings exist for ridge coefficients in (0, 1/8), got {alpha}"
        )));
    }
    Ok(-logit(4.0 * alpha))
}

/// Averaged drift of the summary statistics at finite noise level, estimated
/// from the shared Monte Carlo pool at every evaluation. A non-PSD orthogonal
/// overlap block makes the right-hand side NaN, which the integrators report
/// as a non-finite state.
pub fn xor_ballistic(
    width: usize,
    lambda: f64,
    alpha: f64,
    c_delta: f64,
    mc: McConfig,
) -> Result<OdeSystem, LimitError> {
    check_width(width)?;
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
    let k = width;
    Ok(OdeSystem::new(
        "xor-ballistic",
        ballistic_schema(width),
        move |_t, u, out| {
            let v = &u[0..k];
            let m_mu = &u[k..2 * k];
            let m_nu = &u[2 * k..3 * k];
            let mut r = DMatrix::zeros(k, k);
            let mut pos = 3 * k;
            for i in 0..k {
                for j in i..k {
                    r[(i, j)] = u[pos];
                    r[(j, i)] = u[pos];
                    pos += 1;
                }
            }
            match xor_gaussian_expectations(v, m_mu, m_nu, &r, lambda, &mc) {
                Ok(field) => {
                    for i in 0..k {
                        out[i] = -(m_mu[i] * field.a_mu[i]
                            + m_nu[i] * field.a_nu[i]
                            + field.a_perp(i, i)
                            + alpha * v[i]);
                        out[k + i] = -(v[i] * field.a_mu[i] + alpha * m_mu[i]);
                        out[2 * k + i] = -(v[i] * field.a_nu[i] + alpha * m_nu[i]);
                    }
                    let mut slot = 3 * k;
                    for i in 0..k {
                        for j in i..k {
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

/// Zero-noise (infinite signal-to-noise) ballistic flow in closed form, for
/// any width.
///
/// Each unit carries two strict sign gates, one per center overlap; a unit
/// whose overlap sits exactly at zero feels only the ridge in that direction.
/// `tags`, when given, must hold 2·width entries (first the μ gates, then the
/// ν gates) forcing such gates to the +1 or −1 branch.
pub fn xor_noiseless(
    width: usize,
    alpha: f64,
    tags: Option<Vec<i8>>,
) -> Result<OdeSystem, LimitError> {
    check_width(width)?;
    check_alpha(alpha)?;
    let tags = check_tags(tags.as_deref(), 2 * width)?;
    let k = width;
    Ok(OdeSystem::new(
        "xor-noiseless",
        ballistic_schema(width),
        move |_t, u, out| {
            let v = &u[0..k];
            let m_mu = &u[k..2 * k];
            let m_nu = &u[2 * k..3 * k];
            let f_mu_plus: f64 = (0..k).map(|j| v[j] * m_mu[j].max(0.0)).sum();
            let f_mu_minus: f64 = (0..k).map(|j| v[j] * (-m_mu[j]).max(0.0)).sum();
            let f_nu_plus: f64 = (0..k).map(|j| v[j] * m_nu[j].max(0.0)).sum();
            let f_nu_minus: f64 = (0..k).map(|j| v[j] * (-m_nu[j]).max(0.0)).sum();
            // Label-1 clusters push σ(F) down, label-0 clusters push it up;
            // the two center gates therefore enter with opposite signs.
            let gate_mu_plus = sigmoid(-f_mu_plus);
            let gate_mu_minus = -sigmoid(-f_mu_minus);
            let gate_nu_plus = sigmoid(f_nu_plus);
            let gate_nu_minus = -sigmoid(f_nu_minus);
            for i in 0..k {
                let bracket_mu = gated_bracket(m_mu[i], tags[i], gate_mu_plus, gate_mu_minus);
                let bracket_nu = gated_bracket(m_nu[i], tags[k + i], gate_nu_plus, gate_nu_minus);
                out[i] = 0.25 * (m_mu[i] * bracket_mu - m_nu[i] * bracket_nu) - alpha * v[i];
                out[k + i] = 0.25 * v[i] * bracket_mu - alpha * m_mu[i];
                out[2 * k + i] = -0.25 * v[i] * bracket_nu - alpha * m_nu[i];
            }
            for slot in 3 * k..u.len() {
                out[slot] = -2.0 * alpha * u[slot];
            }
        },
    ))
}

/// Diffusive SDE for the rescaled fluctuations around a width-four
/// configuration with units 1–2 on a μ ring and units 3–4 on a ν ring,
/// expressed in ring-aligned coordinates.
///
/// The base point has v_i = m_i^μ = a_μ[i] ≥ 0 for the μ units and
/// v_i = m_i^ν = a_ν[i] (any sign, typically negative) for the ν units; each
/// pair must satisfy its ring-level constraint. Coordinates: the four head
/// fluctuations, the four along-ring overlap fluctuations, then the packed
/// orthogonal overlaps. The driving noise is the rank-two cluster flip with
/// Σ̃ = α²(3ppᵀ − pqᵀ − qpᵀ + 3qqᵀ) on the head/overlap block.
pub fn xor_diffusive(
    alpha: f64,
    a_mu: [f64; 2],
    a_nu: [f64; 2],
) -> Result<SdeSystem, LimitError> {
    let level = xor_ring_level(alpha)?;
    if a_mu.iter().any(|x| !x.is_finite() || *x < 0.0) {
        return Err(LimitError::InvalidConfig(format!(
            "μ ring coordinates must be nonnegative and finite, got {a_mu:?}"
        )));
    }
    if a_nu.iter().any(|x| !x.is_finite()) {
        return Err(LimitError::InvalidConfig(format!(
            "ν ring coordinates must be finite, got {a_nu:?}"
        )));
    }
    for (name, pair) in [("μ", &a_mu), ("ν", &a_nu)] {
        let radius2 = pair[0] * pair[0] + pair[1] * pair[1];
        if (radius2 - level).abs() > 1e-8 {
            return Err(LimitError::InvalidConfig(format!(
                "base point must sit on the {name} ring: expected radius² = {level:.12}, \
                 got {radius2:.12}"
            )));
        }
    }
    let coupling = alpha * (1.0 - 4.0 * alpha);
    let mut names = vec![
        "v1_tilde".to_string(),
        "v2_tilde".into(),
        "v3_tilde".into(),
        "v4_tilde".into(),
        "m1_mu_tilde".into(),
        "m2_mu_tilde".into(),
        "m3_nu_tilde".into(),
        "m4_nu_tilde".into(),
    ];
    for i in 1..=4usize {
        for j in i..=4 {
            names.push(format!("R{i}{j}_tilde"));
        }
    }
    let schema = Schema::new(names);
    // Cholesky factor of the stratum-mixing matrix [[3, −1], [−1, 3]].
    let l11 = 3f64.sqrt();
    let l21 = -1.0 / 3f64.sqrt();
    let l22 = (8.0f64 / 3.0).sqrt();
    Ok(SdeSystem::new(
        "xor-diffusive",
        schema,
        2,
        move |_t, u, out| {
            let mix_mu: f64 = (0..2).map(|i| a_mu[i] * (u[i] + u[4 + i])).sum();
            let mix_nu: f64 = (0..2).map(|i| a_nu[i] * (u[2 + i] + u[6 + i])).sum();
            for i in 0..2 {
                out[i] = alpha * (u[4 + i] - u[i]) - a_mu[i] * coupling * mix_mu;
                out[4 + i] = alpha * (u[i] - u[4 + i]) - a_mu[i] * coupling * mix_mu;
                out[2 + i] = alpha * (u[6 + i] - u[2 + i]) - a_nu[i] * coupling * mix_nu;
                out[6 + i] = alpha * (u[2 + i] - u[6 + i]) - a_nu[i] * coupling * mix_nu;
            }
            for slot in 8..18 {
                out[slot] = -2.0 * alpha * u[slot];
            }
        },
        move |_t, _u, f| {
            f.fill(0.0);
            for i in 0..2 {
                f[(i, 0)] = alpha * a_mu[i] * l11;
                f[(4 + i, 0)] = alpha * a_mu[i] * l11;
                f[(2 + i, 0)] = alpha * a_nu[i] * l21;
                f[(6 + i, 0)] = alpha * a_nu[i] * l21;
                f[(2 + i, 1)] = alpha * a_nu[i] * l22;
                f[(6 + i, 1)] = alpha * a_nu[i] * l22;
            }
        },
    ))
}
