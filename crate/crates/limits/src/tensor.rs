//! Limiting systems for spiked tensor PCA at the critical step-size scaling
//! δ = c_δ/n: the ballistic ODE for (m, r_⊥²), its loss-augmented variant, and
//! the diffusive SDEs for the rescaled overlap near the equator.

use sgdlab_core::Schema;

use crate::error::LimitError;
use crate::ode::OdeSystem;
use crate::sde::SdeSystem;

fn validate_common(k: u32, c_delta: f64) -> Result<(), LimitError> {
    if k < 2 {
        return Err(LimitError::InvalidConfig(format!(
            "tensor order must be at least 2, got {k}"
        )));
    }
    if !(c_delta >= 0.0) || !c_delta.is_finite() {
        return Err(LimitError::InvalidConfig(format!(
            "step-size constant must be nonnegative, got {c_delta}"
        )));
    }
    Ok(())
}

fn validate_lambda(lambda: f64) -> Result<(), LimitError> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(LimitError::InvalidConfig(format!(
            "signal-to-noise ratio must be positive and finite, got {lambda}"
        )));
    }
    Ok(())
}

/// Ballistic flow of the overlap and orthogonal mass:
///   dm/dt    = 2kλ m^{k−1} − 2k m R^{2(k−1)} − 2α m,
///   dr_⊥²/dt = −4k R^{2(k−1)} (r_⊥² − c_δ) − 2α r_⊥²,
/// with R² = m² + r_⊥².
pub fn tensor_ballistic(
    k: u32,
    lambda: f64,
    alpha: f64,
    c_delta: f64,
) -> Result<OdeSystem, LimitError> {
    validate_common(k, c_delta)?;
    validate_lambda(lambda)?;
    if !(alpha >= 0.0) || !alpha.is_finite() {
        return Err(LimitError::InvalidConfig(format!(
            "ridge coefficient must be nonnegative, got {alpha}"
        )));
    }
    let kf = k as f64;
    let ki = k as i32;
    Ok(OdeSystem::new(
        "tensor-ballistic",
        Schema::new(["m", "r_perp2"]),
        move |_t, u, out| {
            let (m, r_perp2) = (u[0], u[1]);
            let r2 = m * m + r_perp2;
            let r_pow = r2.powi(ki - 1);
            out[0] = 2.0 * kf * (lambda * m.powi(ki - 1) - m * r_pow) - 2.0 * alpha * m;
            out[1] = -4.0 * kf * r_pow * (r_perp2 - c_delta) - 2.0 * alpha * r_perp2;
        },
    ))
}

/// Ballistic flow augmented with the population loss Φ = −2λm^k + R^{2k} as a
/// third coordinate, whose rate is written in closed form (ridge-free case):
///   dΦ/dt = −4k² (λ m^{k−1} − m R^{2(k−1)})² − 4k² R^{4(k−1)} (r_⊥² − c_δ).
pub fn tensor_loss_ballistic(
    k: u32,
    lambda: f64,
    c_delta: f64,
) -> Result<OdeSystem, LimitError> {
    validate_common(k, c_delta)?;
    validate_lambda(lambda)?;
    let kf = k as f64;
    let ki = k as i32;
    Ok(OdeSystem::new(
        "tensor-loss",
        Schema::new(["m", "r_perp2", "phi"]),
        move |_t, u, out| {
            let (m, r_perp2) = (u[0], u[1]);
            let r2 = m * m + r_perp2;
            let r_pow = r2.powi(ki - 1);
            let gap = lambda * m.powi(ki - 1) - m * r_pow;
            out[0] = 2.0 * kf * gap;
            out[1] = -4.0 * kf * r_pow * (r_perp2 - c_delta);
            out[2] = -4.0 * kf * kf * (gap * gap + r_pow * r_pow * (r_perp2 - c_delta));
        },
    ))
}

/// Population loss value matching the third coordinate of
/// [`tensor_loss_ballistic`], for setting its initial condition.
pub fn tensor_population_loss(k: u32, lambda: f64, m: f64, r_perp2: f64) -> f64 {
    let r2 = m * m + r_perp2;
    -2.0 * lambda * m.powi(k as i32) + r2.powi(k as i32)
}

/// Diffusive SDE for the rescaled overlap m̃ = √n·m near the equator, with the
/// orthogonal mass riding along deterministically:
///   dm̃    = 2m̃ (2λ·1{k=2} − k r^{2(k−1)}) dt + 2√(k r^{2(k−1)}) dB,
///   dr_⊥² = −4k r^{2(k−1)} (r_⊥² − 1) dt.
pub fn tensor_diffusive(k: u32, lambda: f64) -> Result<SdeSystem, LimitError> {
    validate_common(k, 1.0)?;
    validate_lambda(lambda)?;
    let signal = if k == 2 { 2.0 * lambda } else { 0.0 };
    Ok(diffusive_system(k, signal))
}

/// Diffusive SDE for orders k ≥ 3 with the overlap boosted by a factor Λ·n^{(k−2)/2}:
/// the signal term becomes kΛ, with critical threshold Λ = 1 at r_⊥² = 1.
pub fn tensor_diffusive_boosted(k: u32, big_lambda: f64) -> Result<SdeSystem, LimitError> {
    validate_common(k, 1.0)?;
    if k == 2 {
        return Err(LimitError::InvalidConfig(
            "the boosted-overlap regime only exists for tensor order k ≥ 3; \
             at k = 2 the signal already enters the diffusive drift"
                .into(),
        ));
    }
    if !(big_lambda >= 0.0) || !big_lambda.is_finite() {
        return Err(LimitError::InvalidConfig(format!(
            "boost amplitude must be nonnegative, got {big_lambda}"
        )));
    }
    Ok(diffusive_system(k, k as f64 * big_lambda))
}

fn diffusive_system(k: u32, signal: f64) -> SdeSystem {
    let kf = k as f64;
    let ki = k as i32;
    SdeSystem::new(
        "tensor-diffusive",
        Schema::new(["m_tilde", "r_perp2"]),
        1,
        move |_t, u, out| {
            let r2 = u[1];
            let r_pow = r2.powi(ki - 1);
            out[0] = 2.0 * u[0] * (signal - kf * r_pow);
            out[1] = -4.0 * kf * r_pow * (r2 - 1.0);
        },
        move |_t, u, f| {
            let r_pow = u[1].powi(ki - 1);
            f[(0, 0)] = 2.0 * (kf * r_pow).max(0.0).sqrt();
            f[(1, 0)] = 0.0;
        },
    )
}

/// Fully decoupled pair of OU processes once the orthogonal mass has also been
/// rescaled around its fixed point:
///   dm̃    = 2k (λ·1{k=2}·m̃ − m̃) dt + 2√k dB⁽¹⁾,
///   dr̃_⊥² = −4k r̃_⊥² dt + 2√(k(k−1)) dB⁽²⁾,
/// with independent driving noises.
pub fn tensor_double_diffusive(k: u32, lambda: f64) -> Result<SdeSystem, LimitError> {
    validate_common(k, 1.0)?;
    validate_lambda(lambda)?;
    let kf = k as f64;
    let signal = if k == 2 { lambda } else { 0.0 };
    let vol_m = 2.0 * kf.sqrt();
    let vol_r = 2.0 * (kf * (kf - 1.0)).sqrt();
    Ok(SdeSystem::new(
        "tensor-double-diffusive",
        Schema::new(["m_tilde", "r_perp2_tilde"]),
        2,
        move |_t, u, out| {
            out[0] = 2.0 * kf * (signal * u[0] - u[0]);
            out[1] = -4.0 * kf * u[1];
        },
        move |_t, _u, f| {
            f[(0, 0)] = vol_m;
            f[(0, 1)] = 0.0;
            f[(1, 0)] = 0.0;
            f[(1, 1)] = vol_r;
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ode::rk4_integrate;

    #[test]
    fn ballistic_rhs_at_frozen_point() {
        let sys = tensor_ballistic(2, 1.2, 0.0, 1.0).unwrap();
        let rhs = sys.rhs(0.0, &[0.3, 1.0]);
        assert!((rhs[0] - 0.132).abs() < 1e-15, "dm = {}", rhs[0]);
        assert!(rhs[1].abs() < 1e-15, "dr = {}", rhs[1]);
    }

    #[test]
    fn ballistic_fixed_point_residual() {
        // k=2, λ=1.2, c_δ=1: stationary at (√(λ−1), 1).
        let sys = tensor_ballistic(2, 1.2, 0.0, 1.0).unwrap();
        let rhs = sys.rhs(0.0, &[0.2f64.sqrt(), 1.0]);
        assert!(rhs[0].abs() < 1e-12 && rhs[1].abs() < 1e-12, "{rhs:?}");
    }

    #[test]
    fn ballistic_overlap_is_odd_for_even_order() {
        let sys = tensor_ballistic(4, 2.0, 0.1, 0.7).unwrap();
        for (m, r) in [(0.3, 0.9), (0.11, 1.4), (0.75, 0.2)] {
            let plus = sys.rhs(0.0, &[m, r]);
            let minus = sys.rhs(0.0, &[-m, r]);
            assert!((plus[0] + minus[0]).abs() < 1e-14);
            assert!((plus[1] - minus[1]).abs() < 1e-14);
        }
    }

    #[test]
    fn corrector_is_linear_in_step_constant() {
        let u = [0.4, 0.8];
        let at = |c: f64| tensor_ballistic(3, 2.0, 0.2, c).unwrap().rhs(0.0, &u);
        let (h0, h1, h2) = (at(0.0), at(1.0), at(2.0));
        for i in 0..2 {
            let once = h1[i] - h0[i];
            let twice = h2[i] - h0[i];
            assert!((twice - 2.0 * once).abs() < 1e-13);
        }
    }

    #[test]
    fn loss_coordinate_tracks_population_loss() {
        // Integrate the 3-coordinate system and check Φ(t) stays equal to
        // Φ(m(t), r(t)) evaluated on the first two coordinates.
        let sys = tensor_loss_ballistic(3, 4.0, 1.0).unwrap();
        let phi0 = tensor_population_loss(3, 4.0, 0.3, 1.0);
        let traj = rk4_integrate(&sys, &[0.3, 1.0, phi0], 3.0, 1e-3, 100).unwrap();
        for i in 0..traj.len() {
            let row = traj.row(i);
            let direct = tensor_population_loss(3, 4.0, row[0], row[1]);
            assert!(
                (row[2] - direct).abs() <= 1e-8,
                "t={}: {} vs {direct}",
                traj.times()[i],
                row[2]
            );
        }
    }

    #[test]
    fn diffusive_drift_and_volatility_at_equator() {
        // k=2 at r_⊥²=1: dm̃ = 4(λ−1) m̃ dt + 2√2 dB.
        let sys = tensor_diffusive(2, 1.2).unwrap();
        let drift = sys.drift(0.0, &[1.0, 1.0]);
        assert!((drift[0] - 0.8).abs() < 1e-14);
        assert!(drift[1].abs() < 1e-14);
        let f = sys.diffusion_factor(0.0, &[1.0, 1.0]);
        assert!((f[(0, 0)] - 2.0 * std::f64::consts::SQRT_2).abs() < 1e-14);

        // k=3 at the equator: no signal term, drift −2k·m̃ = −6m̃.
        let sys3 = tensor_diffusive(3, 2.0).unwrap();
        let drift3 = sys3.drift(0.0, &[1.0, 1.0]);
        assert!((drift3[0] + 6.0).abs() < 1e-14, "{}", drift3[0]);
    }

    #[test]
    fn boosted_mode_threshold_and_guard() {
        // At Λ = 1 and r_⊥² = 1 the m̃-drift vanishes: the critical boost.
        let sys = tensor_diffusive_boosted(3, 1.0).unwrap();
        let drift = sys.drift(0.0, &[0.7, 1.0]);
        assert!(drift[0].abs() < 1e-14, "{}", drift[0]);
        // Slightly above/below the threshold the drift changes sign.
        assert!(tensor_diffusive_boosted(3, 1.1).unwrap().drift(0.0, &[1.0, 1.0])[0] > 0.0);
        assert!(tensor_diffusive_boosted(3, 0.9).unwrap().drift(0.0, &[1.0, 1.0])[0] < 0.0);
        assert!(tensor_diffusive_boosted(2, 1.0).is_err());
    }

    #[test]
    fn double_diffusive_is_a_decoupled_ou_pair() {
        let sys = tensor_double_diffusive(2, 0.8).unwrap();
        // Drifts: dm̃ = 4(λ−1)m̃ = −0.8·m̃; dr̃ = −8 r̃.
        let drift = sys.drift(0.0, &[1.0, 1.0]);
        assert!((drift[0] + 0.8).abs() < 1e-14);
        assert!((drift[1] + 8.0).abs() < 1e-14);
        // λ=0 value at m̃=1: −4.
        let at0 = tensor_double_diffusive(2, 1e-300).unwrap().drift(0.0, &[1.0, 0.0]);
        assert!((at0[0] + 4.0).abs() < 1e-12);
        // Independent noises with volatilities 2√2 and 2√2 at k=2.
        let f = sys.diffusion_factor(0.0, &[0.0, 0.0]);
        assert!((f[(0, 0)] - 2.0 * std::f64::consts::SQRT_2).abs() < 1e-14);
        assert!((f[(1, 1)] - 2.0 * std::f64::consts::SQRT_2).abs() < 1e-14);
        assert_eq!(f[(0, 1)], 0.0);
        assert_eq!(f[(1, 0)], 0.0);
    }
}
