//! Lag-1 autoregression on a recorded scalar series, reported in the
//! continuous-time normalization: an AR(1) step x_{ℓ+1} = a + ρ x_ℓ + ε with
//! step size δ corresponds to an OU drift b = (ρ − 1)/δ and squared
//! volatility Var(ε)/δ.

use crate::error::HarnessError;

/// Ordinary-least-squares lag-1 fit of a scalar series.
#[derive(Debug, Clone, Copy)]
pub struct Ar1Fit {
    /// Fitted lag-1 coefficient ρ̂.
    pub rho: f64,
    /// Fitted intercept.
    pub intercept: f64,
    /// Implied continuous drift b̂ = (ρ̂ − 1)/δ.
    pub b_hat: f64,
    /// Residual variance of the regression.
    pub innovation_variance: f64,
    /// Implied continuous volatility √(innovation variance/δ).
    pub volatility: f64,
    /// Standard error of ρ̂.
    pub rho_se: f64,
    /// Standard error of b̂ (= rho_se/δ).
    pub b_se: f64,
    /// Number of observations in the series.
    pub len: usize,
}

/// Fits x_{ℓ+1} on x_ℓ by OLS with intercept. Requires at least 100
/// observations; a (numerically) constant series has no identifiable lag
/// coefficient and is rejected.
pub fn fit_ar1(series: &[f64], delta: f64) -> Result<Ar1Fit, HarnessError> {
    if series.len() < 100 {
        return Err(HarnessError::InvalidInput(format!(
            "AR(1) fit needs at least 100 observations, got {}",
            series.len()
        )));
    }
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(HarnessError::InvalidInput(format!(
            "step size must be positive and finite, got {delta}"
        )));
    }
    if series.iter().any(|x| !x.is_finite()) {
        return Err(HarnessError::InvalidInput(
            "series contains non-finite values".into(),
        ));
    }

    let x = &series[..series.len() - 1];
    let y = &series[1..];
    let n = x.len() as f64;
    let x_mean = x.iter().sum::<f64>() / n;
    let y_mean = y.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (xi, yi) in x.iter().zip(y) {
        let dx = xi - x_mean;
        sxx += dx * dx;
        sxy += dx * (yi - y_mean);
    }
    let scale = x.iter().map(|v| v * v).sum::<f64>().max(1.0);
    if sxx <= 1e-14 * scale {
        return Err(HarnessError::DegenerateFit(
            "series is constant; the lag coefficient is unidentifiable".into(),
        ));
    }

    let rho = sxy / sxx;
    let intercept = y_mean - rho * x_mean;
    let mut rss = 0.0;
    for (xi, yi) in x.iter().zip(y) {
        let r = yi - intercept - rho * xi;
        rss += r * r;
    }
    let innovation_variance = rss / (n - 2.0);
    let rho_se = (innovation_variance / sxx).sqrt();

    Ok(Ar1Fit {
        rho,
        intercept,
        b_hat: (rho - 1.0) / delta,
        innovation_variance,
        volatility: (innovation_variance / delta).sqrt(),
        rho_se,
        b_se: rho_se / delta,
        len: series.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use sgdlab_core::make_rng;

    #[test]
    fn white_noise_recovers_the_iid_limit() {
        let mut rng = make_rng(21, 0);
        let delta = 1e-3;
        let series: Vec<f64> = (0..20_000).map(|_| rng.standard_normal()).collect();
        let fit = fit_ar1(&series, delta).unwrap();
        assert!(fit.rho.abs() < 0.03, "rho {}", fit.rho);
        // ρ ≈ 0 means b̂ ≈ −1/δ.
        assert!((fit.b_hat * delta + 1.0).abs() < 0.03, "b {}", fit.b_hat);
    }

    #[test]
    fn exact_ar1_series_is_recovered() {
        let (rho_true, sigma, delta) = (0.995, 0.03, 1e-3);
        let mut rng = make_rng(22, 0);
        let mut x = 0.0;
        let series: Vec<f64> = (0..50_000)
            .map(|_| {
                x = rho_true * x + sigma * rng.standard_normal();
                x
            })
            .collect();
        let fit = fit_ar1(&series, delta).unwrap();
        assert!((fit.rho - rho_true).abs() < 4.0 * fit.rho_se + 1e-4);
        let b_true = (rho_true - 1.0) / delta;
        assert!((fit.b_hat - b_true).abs() < 4.0 * fit.b_se + 0.1);
        let vol_true = (sigma * sigma / delta).sqrt();
        assert!((fit.volatility - vol_true).abs() / vol_true < 0.05);
    }

    #[test]
    fn short_and_constant_series_are_rejected() {
        assert!(matches!(
            fit_ar1(&[1.0; 99], 1e-3),
            Err(HarnessError::InvalidInput(_))
        ));
        assert!(matches!(
            fit_ar1(&[2.5; 500], 1e-3),
            Err(HarnessError::DegenerateFit(_))
        ));
        let mut ramp: Vec<f64> = (0..200).map(|i| i as f64).collect();
        ramp[7] = f64::NAN;
        assert!(fit_ar1(&ramp, 1e-3).is_err());
    }
}
