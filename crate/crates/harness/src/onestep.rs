//! Empirical one-step drift and diffusion: at a frozen parameter point, draw
//! many fresh observations, take one SGD step for each, and average the
//! summary-statistic increments. `mean(Δu)/δ` estimates the ballistic field
//! and `Cov(Δu)/δ` the diffusion matrix in the same normalization the
//! limiting SDEs use.

use sgdlab_core::{RngStream, SummaryVec};
use sgdlab_models::{ParamPoint, SgdModel};

use crate::error::HarnessError;

/// Sample moments of the one-step summary increment at a point.
#[derive(Debug, Clone)]
pub struct DriftEstimate {
    /// Summary coordinates of the base point.
    pub summary: SummaryVec,
    /// mean(Δu)/δ per coordinate.
    pub drift: Vec<f64>,
    /// Standard error of each drift coordinate.
    pub drift_se: Vec<f64>,
    /// Cov(Δu)/δ, row-major symmetric.
    pub covariance: Vec<Vec<f64>>,
    /// Moment-based standard error of each covariance entry (delta-method,
    /// treating the increment mean as negligible against its scatter).
    pub covariance_se: Vec<Vec<f64>>,
    /// Step size used.
    pub delta: f64,
    /// Fresh observations drawn.
    pub samples: usize,
}

impl DriftEstimate {
    /// Largest |drift − field| coordinate against a reference field value.
    pub fn max_drift_deviation(&self, field: &[f64]) -> f64 {
        self.drift
            .iter()
            .zip(field)
            .map(|(d, f)| (d - f).abs())
            .fold(0.0, f64::max)
    }
}

/// Estimates the one-step drift and diffusion at `x` from `samples` fresh
/// observations (at least 100). Deterministic given the rng state.
pub fn estimate_one_step<M: SgdModel + ?Sized>(
    model: &M,
    x: &ParamPoint,
    delta: f64,
    samples: usize,
    rng: &mut RngStream,
) -> Result<DriftEstimate, HarnessError> {
    if x.family != model.family() {
        return Err(HarnessError::InvalidInput(format!(
            "parameter point is tagged {} but the model family is {}",
            x.family,
            model.family()
        )));
    }
    if samples < 100 {
        return Err(HarnessError::InvalidInput(format!(
            "need at least 100 samples for moment estimates, got {samples}"
        )));
    }
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(HarnessError::InvalidInput(format!(
            "step size must be positive and finite, got {delta}"
        )));
    }

    let dim = model.schema().len();
    let u0 = model.summary(&x.x)?;
    let mut grad = vec![0.0; model.dim()];
    let mut stepped = vec![0.0; model.dim()];
    let mut dz = vec![0.0; dim];

    // One pass of raw moments: Σz_i, Σz_iz_j, Σ(z_iz_j)² with z = Δu.
    let mut s1 = vec![0.0; dim];
    let mut s2 = vec![vec![0.0; dim]; dim];
    let mut q2 = vec![vec![0.0; dim]; dim];

    for _ in 0..samples {
        let datum = model.sample_datum(rng);
        model.grad_loss_into(&x.x, &datum, &mut grad)?;
        for (s, (xi, gi)) in stepped.iter_mut().zip(x.x.iter().zip(&grad)) {
            *s = xi - delta * gi;
        }
        let u1 = model.summary(&stepped)?;
        for i in 0..dim {
            dz[i] = u1[i] - u0[i];
        }
        for i in 0..dim {
            s1[i] += dz[i];
            for j in i..dim {
                let p = dz[i] * dz[j];
                s2[i][j] += p;
                q2[i][j] += p * p;
            }
        }
    }

    let m = samples as f64;
    let mean: Vec<f64> = s1.iter().map(|s| s / m).collect();
    let drift: Vec<f64> = mean.iter().map(|v| v / delta).collect();
    let mut drift_se = vec![0.0; dim];
    let mut covariance = vec![vec![0.0; dim]; dim];
    let mut covariance_se = vec![vec![0.0; dim]; dim];
    for i in 0..dim {
        for j in i..dim {
            let cov = (s2[i][j] - s1[i] * s1[j] / m) / (m - 1.0);
            covariance[i][j] = cov / delta;
            covariance[j][i] = covariance[i][j];
            let prod_var = ((q2[i][j] - s2[i][j] * s2[i][j] / m) / (m - 1.0)).max(0.0);
            covariance_se[i][j] = (prod_var / m).sqrt() / delta;
            covariance_se[j][i] = covariance_se[i][j];
        }
        let var = ((s2[i][i] - s1[i] * s1[i] / m) / (m - 1.0)).max(0.0);
        drift_se[i] = (var / m).sqrt() / delta;
    }

    Ok(DriftEstimate {
        summary: SummaryVec::new(model.schema(), u0)?,
        drift,
        drift_se,
        covariance,
        covariance_se,
        delta,
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use sgdlab_core::make_rng;
    use sgdlab_models::{BgmmModel, Family, SgdModel, TensorNoise, TensorPcaModel};

    #[test]
    fn sample_floor_and_family_tag_are_enforced() {
        let model = TensorPcaModel::new(30, 2, 1.2, 0.0, TensorNoise::Factored).unwrap();
        let x = ParamPoint::new(Family::TensorPca, vec![0.1; 30]);
        let mut rng = make_rng(3, 0);
        assert!(estimate_one_step(&model, &x, 1e-2, 99, &mut rng).is_err());
        let mistagged = ParamPoint::new(Family::Bgmm, vec![0.1; 30]);
        assert!(estimate_one_step(&model, &mistagged, 1e-2, 100, &mut rng).is_err());
    }

    #[test]
    fn zero_noise_mixture_data_gives_zero_covariance() {
        // With λ = ∞ the bGMM observations are exactly ±μ; placing both rows
        // of W orthogonal to μ closes every activation gate, so the per-sample
        // gradient is the ridge term for either label and Δu is deterministic.
        let model = BgmmModel::new(24, f64::INFINITY, 0.1).unwrap();
        let mut x = vec![0.0; model.dim()];
        x[0] = 0.7;
        x[1] = -0.4;
        x[2 + 1] = 0.5; // w₁ = 0.5·e₂
        x[2 + 24 + 2] = 0.8; // w₂ = 0.8·e₃
        let point = ParamPoint::new(Family::Bgmm, x);
        let mut rng = make_rng(5, 0);
        let est = estimate_one_step(&model, &point, 1e-3, 400, &mut rng).unwrap();
        for row in &est.covariance {
            for c in row {
                assert!(c.abs() < 1e-12, "covariance entry {c}");
            }
        }
        // The increments are bitwise identical, so the only scatter left is
        // accumulation rounding (amplified by the 1/δ normalization).
        for se in &est.drift_se {
            assert!(*se < 1e-9);
        }
        // The drift is the pure ridge contraction on the head coordinates.
        assert!((est.drift[0] - (-0.1 * 0.7)).abs() < 1e-8);
        assert!((est.drift[1] - (-0.1 * -0.4)).abs() < 1e-8);
    }

    #[test]
    fn tensor_drift_matches_the_closed_field_within_errors() {
        let (n, k, lambda) = (300, 2, 1.2);
        let model = TensorPcaModel::new(n, k, lambda, 0.0, TensorNoise::Factored).unwrap();
        // Exact warm point m = 0.5, r_perp² = 1.
        let mut x = vec![0.0; n];
        x[0] = 0.5;
        x[1] = 1.0;
        let point = ParamPoint::new(Family::TensorPca, x);
        let delta = 1.0 / n as f64;
        let mut rng = make_rng(9, 0);
        let est = estimate_one_step(&model, &point, delta, 20_000, &mut rng).unwrap();

        // Ballistic field at (0.5, 1): ṁ = 2k·m(λ m^{k-2} − R^{2(k-1)}),
        // ṙ⊥² = −4k R^{2(k-1)}(r⊥² − 1) = 0 at r⊥² = 1.
        let r2 = 0.25 + 1.0;
        let field_m = 2.0 * 2.0 * (lambda * 0.5 - 0.5 * r2);
        for (i, field) in [field_m, 0.0].iter().enumerate() {
            let slack = 3.0 * est.drift_se[i] + 10.0 * delta;
            assert!(
                (est.drift[i] - field).abs() <= slack,
                "coordinate {i}: {} vs {field} (slack {slack})",
                est.drift[i]
            );
        }
    }

    #[test]
    fn covariance_is_symmetric_and_nonnegative_definite() {
        let model = TensorPcaModel::new(80, 2, 1.2, 0.0, TensorNoise::Factored).unwrap();
        let mut x = vec![0.0; 80];
        x[0] = 0.3;
        x[1] = 0.9;
        let point = ParamPoint::new(Family::TensorPca, x);
        let mut rng = make_rng(13, 0);
        let est = estimate_one_step(&model, &point, 1e-2, 500, &mut rng).unwrap();
        let c = &est.covariance;
        assert_eq!(c[0][1], c[1][0]);
        // Quadratic form along a few directions stays ≥ −1e-10·scale.
        let scale = c[0][0].abs().max(c[1][1].abs()).max(1.0);
        for dir in [[1.0, 0.0], [0.0, 1.0], [1.0, 1.0], [1.0, -1.0], [0.3, -0.7]] {
            let q = dir[0] * dir[0] * c[0][0]
                + 2.0 * dir[0] * dir[1] * c[0][1]
                + dir[1] * dir[1] * c[1][1];
            assert!(q >= -1e-10 * scale, "quadratic form {q}");
        }
    }
}
