//! Fixed-pool Monte Carlo estimates of the conditional-Gaussian expectations
//! that drive the averaged flows of the two-layer mixture classifiers.
//!
//! Conditioned on its mixture component, a sample's projections onto the class
//! centers and the hidden-layer pre-activations are jointly Gaussian with a law
//! that depends on the network only through its summary statistics. The
//! averaged drift is then assembled from expectations of the shape
//! `E[w · 1{z_i ≥ 0} · (σ(F) − y)]` over that finite-dimensional law. For
//! finite noise level these have no closed form, so they are estimated
//! numerically with three variance-reduction choices baked in:
//!
//! * the mixture component is stratified exactly — every component enters with
//!   its exact weight instead of being resampled;
//! * every Gaussian draw is paired with its negation (antithetic variates);
//! * every call re-derives its generator from the same seed and stream, so the
//!   whole pool of Gaussians is shared across calls (common random numbers).
//!   Repeated evaluation at the same point is bit-identical and the estimated
//!   field is a deterministic, smoothly varying function of its arguments.
//!
//! The activation indicator is closed: a pre-activation sitting exactly at
//! zero counts as active. With zero ambient noise (infinite signal-to-noise
//! ratio) the estimator degenerates to an exact finite quadrature over the
//! mixture components.

use nalgebra::DMatrix;
use sgdlab_core::make_rng;
use sgdlab_core::math::sigmoid;

use crate::error::LimitError;
use crate::sde::psd_sqrt;

/// Stream index reserved for the shared Monte Carlo pool.
pub const MC_STREAM: u64 = u64::MAX - 1;

/// Size and seed of the shared Gaussian pool.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct McConfig {
    /// Base Gaussian draws per evaluation; each is expanded over all mixture
    /// strata and both antithetic signs.
    pub samples: usize,
    /// Master seed from which the pool is derived.
    pub master_seed: u64,
}

impl Default for McConfig {
    fn default() -> Self {
        Self {
            samples: 20_000,
            master_seed: 0,
        }
    }
}

/// The estimated expectations, indexed by hidden unit.
///
/// With `s = σ(F) − y` and `1_i = 1{z_i ≥ 0}`:
/// * `a_mu[i]`      = E[(X·μ) 1_i s]
/// * `a_nu[i]`      = E[(X·ν) 1_i s]   (empty for the single-center model)
/// * `a_perp(i,j)`  = E[Z_{j⊥} 1_i s]
/// * `b(i,j)`       = E[1_i 1_j s²]
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianField {
    width: usize,
    pub a_mu: Vec<f64>,
    pub a_nu: Vec<f64>,
    pub a_perp: Vec<f64>,
    pub b: Vec<f64>,
}

impl GaussianField {
    fn zeros(width: usize, with_nu: bool) -> Self {
        Self {
            width,
            a_mu: vec![0.0; width],
            a_nu: if with_nu { vec![0.0; width] } else { Vec::new() },
            a_perp: vec![0.0; width * width],
            b: vec![0.0; width * width],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn a_perp(&self, i: usize, j: usize) -> f64 {
        self.a_perp[i * self.width + j]
    }

    pub fn b(&self, i: usize, j: usize) -> f64 {
        self.b[i * self.width + j]
    }

    fn accumulate(
        &mut self,
        weight: f64,
        s: f64,
        x_mu: f64,
        x_nu: f64,
        sign: f64,
        z_perp: &[f64],
        active: &[bool],
    ) {
        let k = self.width;
        let ws = weight * s;
        let ws2 = ws * s;
        for i in 0..k {
            if !active[i] {
                continue;
            }
            self.a_mu[i] += ws * x_mu;
            if !self.a_nu.is_empty() {
                self.a_nu[i] += ws * x_nu;
            }
            let row = i * k;
            for j in 0..k {
                self.a_perp[row + j] += ws * sign * z_perp[j];
                if active[j] {
                    self.b[row + j] += ws2;
                }
            }
        }
    }
}

fn noise_scale(lambda: f64) -> Result<f64, LimitError> {
    if lambda.is_nan() || lambda <= 0.0 {
        return Err(LimitError::InvalidConfig(format!(
            "signal-to-noise ratio must be positive (possibly infinite), got {lambda}"
        )));
    }
    Ok((1.0 / lambda).sqrt())
}

/// Factor of the orthogonal pre-activation covariance, or `None` when the
/// ambient noise vanishes and the orthogonal part is identically zero.
fn perp_factor(
    r_perp: &DMatrix<f64>,
    width: usize,
    scale: f64,
) -> Result<Option<DMatrix<f64>>, LimitError> {
    if r_perp.nrows() != width || r_perp.ncols() != width {
        return Err(LimitError::InvalidConfig(format!(
            "orthogonal overlap matrix must be {width}×{width}, got {}×{}",
            r_perp.nrows(),
            r_perp.ncols()
        )));
    }
    if scale == 0.0 {
        return Ok(None);
    }
    let tol = 1e-8 * (1.0 + r_perp.norm());
    Ok(Some(psd_sqrt(r_perp, tol)?))
}

fn check_lengths(mc: &McConfig, lens: &[usize]) -> Result<usize, LimitError> {
    let width = lens[0];
    if width == 0 {
        return Err(LimitError::InvalidConfig(
            "network width must be positive".into(),
        ));
    }
    if lens.iter().any(|&l| l != width) {
        return Err(LimitError::InvalidConfig(format!(
            "head and overlap blocks must share one width, got lengths {lens:?}"
        )));
    }
    if mc.samples == 0 {
        return Err(LimitError::InvalidConfig(
            "sample count must be positive".into(),
        ));
    }
    Ok(width)
}

/// Expectations for the two-cluster model: X = (2y−1)μ + ξ/√λ with y fair.
///
/// Conditioned on y, the center projection is X·μ = (2y−1) + Z_μ with
/// Z_μ ~ N(0, 1/λ) and the pre-activations are z_i = m_i (X·μ) + Z_{i⊥} with
/// Z_⊥ ~ N(0, R_⊥/λ) independent of Z_μ.
pub fn bgmm_gaussian_expectations(
    v: &[f64],
    m: &[f64],
    r_perp: &DMatrix<f64>,
    lambda: f64,
    mc: &McConfig,
) -> Result<GaussianField, LimitError> {
    let k = check_lengths(mc, &[v.len(), m.len()])?;
    let scale = noise_scale(lambda)?;
    let factor = perp_factor(r_perp, k, scale)?;

    let mut field = GaussianField::zeros(k, false);
    let mut rng = make_rng(mc.master_seed, MC_STREAM);
    let weight = 1.0 / (4.0 * mc.samples as f64);
    let mut g_perp = vec![0.0; k];
    let mut z_perp = vec![0.0; k];
    let mut active = vec![false; k];

    for _ in 0..mc.samples {
        let g_mu = rng.standard_normal();
        rng.fill_standard_normal(&mut g_perp);
        fill_z_perp(&factor, &g_perp, scale, &mut z_perp);
        for sign in [1.0f64, -1.0] {
            let noise_mu = sign * scale * g_mu;
            for y in [1.0f64, 0.0] {
                let x_mu = 2.0 * y - 1.0 + noise_mu;
                let mut preact_sum = 0.0;
                for i in 0..k {
                    let z = m[i] * x_mu + sign * z_perp[i];
                    active[i] = z >= 0.0;
                    if z > 0.0 {
                        preact_sum += v[i] * z;
                    }
                }
                let s = sigmoid(preact_sum) - y;
                field.accumulate(weight, s, x_mu, 0.0, sign, &z_perp, &active);
            }
        }
    }
    Ok(field)
}

/// The four balanced components of the second model as (ε_μ, ε_ν, y).
const XOR_STRATA: [(f64, f64, f64); 4] = [
    (1.0, 0.0, 1.0),
    (-1.0, 0.0, 1.0),
    (0.0, 1.0, 0.0),
    (0.0, -1.0, 0.0),
];

/// Expectations for the four-cluster model: X = ±μ + ξ/√λ with label 1 or
/// X = ±ν + ξ/√λ with label 0, all components balanced.
///
/// Conditioned on the component, X·μ and X·ν are the component means plus
/// independent N(0, 1/λ) noise, and z_i = m_i^μ(X·μ) + m_i^ν(X·ν) + Z_{i⊥}
/// with Z_⊥ ~ N(0, R_⊥/λ).
pub fn xor_gaussian_expectations(
    v: &[f64],
    m_mu: &[f64],
    m_nu: &[f64],
    r_perp: &DMatrix<f64>,
    lambda: f64,
    mc: &McConfig,
) -> Result<GaussianField, LimitError> {
    let k = check_lengths(mc, &[v.len(), m_mu.len(), m_nu.len()])?;
    let scale = noise_scale(lambda)?;
    let factor = perp_factor(r_perp, k, scale)?;

    let mut field = GaussianField::zeros(k, true);
    let mut rng = make_rng(mc.master_seed, MC_STREAM);
    let weight = 1.0 / (8.0 * mc.samples as f64);
    let mut g_perp = vec![0.0; k];
    let mut z_perp = vec![0.0; k];
    let mut active = vec![false; k];

    for _ in 0..mc.samples {
        let g_mu = rng.standard_normal();
        let g_nu = rng.standard_normal();
        rng.fill_standard_normal(&mut g_perp);
        fill_z_perp(&factor, &g_perp, scale, &mut z_perp);
        for sign in [1.0f64, -1.0] {
            let noise_mu = sign * scale * g_mu;
            let noise_nu = sign * scale * g_nu;
            for (eps_mu, eps_nu, y) in XOR_STRATA {
                let x_mu = eps_mu + noise_mu;
                let x_nu = eps_nu + noise_nu;
                let mut preact_sum = 0.0;
                for i in 0..k {
                    let z = m_mu[i] * x_mu + m_nu[i] * x_nu + sign * z_perp[i];
                    active[i] = z >= 0.0;
                    if z > 0.0 {
                        preact_sum += v[i] * z;
                    }
                }
                let s = sigmoid(preact_sum) - y;
                field.accumulate(weight, s, x_mu, x_nu, sign, &z_perp, &active);
            }
        }
    }
    Ok(field)
}

fn fill_z_perp(factor: &Option<DMatrix<f64>>, g: &[f64], scale: f64, out: &mut [f64]) {
    match factor {
        Some(c) => {
            let k = out.len();
            for i in 0..k {
                out[i] = scale * (0..k).map(|j| c[(i, j)] * g[j]).sum::<f64>();
            }
        }
        None => out.fill(0.0),
    }
}
