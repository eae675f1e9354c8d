//! SDE systems du = f dt + F dB with an Euler–Maruyama integrator, plus the
//! eigendecomposition-based PSD square root used to build diffusion factors.

use nalgebra::DMatrix;
use sgdlab_core::{RngStream, Schema, Trajectory};

use crate::error::LimitError;
use crate::ode::{check_integration_args, split_steps};

type Drift = dyn Fn(f64, &[f64], &mut [f64]) + Send + Sync;
type Diffusion = dyn Fn(f64, &[f64], &mut DMatrix<f64>) + Send + Sync;

/// du = drift(t,u) dt + diffusion(t,u) dB with `noise_dim` independent
/// Brownian motions; the diffusion callback writes the d×noise_dim factor F
/// (so the instantaneous covariance is F·Fᵀ).
pub struct SdeSystem {
    name: String,
    schema: Schema,
    noise_dim: usize,
    drift: Box<Drift>,
    diffusion: Box<Diffusion>,
}

impl SdeSystem {
    pub fn new(
        name: impl Into<String>,
        schema: Schema,
        noise_dim: usize,
        drift: impl Fn(f64, &[f64], &mut [f64]) + Send + Sync + 'static,
        diffusion: impl Fn(f64, &[f64], &mut DMatrix<f64>) + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            schema,
            noise_dim,
            drift: Box::new(drift),
            diffusion: Box::new(diffusion),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn schema(&self) -> Schema {
        self.schema.clone()
    }

    pub fn dim(&self) -> usize {
        self.schema.len()
    }

    pub fn noise_dim(&self) -> usize {
        self.noise_dim
    }

    pub fn drift_into(&self, t: f64, u: &[f64], out: &mut [f64]) {
        (self.drift)(t, u, out)
    }

    pub fn drift(&self, t: f64, u: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; u.len()];
        self.drift_into(t, u, &mut out);
        out
    }

    /// The diffusion factor F at (t, u).
    pub fn diffusion_factor(&self, t: f64, u: &[f64]) -> DMatrix<f64> {
        let mut f = DMatrix::zeros(self.dim(), self.noise_dim);
        (self.diffusion)(t, u, &mut f);
        f
    }

    /// The instantaneous covariance F·Fᵀ at (t, u).
    pub fn covariance(&self, t: f64, u: &[f64]) -> DMatrix<f64> {
        let f = self.diffusion_factor(t, u);
        &f * f.transpose()
    }
}

impl std::fmt::Debug for SdeSystem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SdeSystem")
            .field("name", &self.name)
            .field("schema", &self.schema)
            .field("noise_dim", &self.noise_dim)
            .finish()
    }
}

/// Euler–Maruyama: u ← u + f·dt + F·ξ·√dt with fresh standard normals ξ each
/// step. The final step is shortened to land exactly on `t_end`; recording
/// follows the same stride-plus-endpoints rule as the ODE integrator.
pub fn euler_maruyama(
    sys: &SdeSystem,
    u0: &[f64],
    t_end: f64,
    h: f64,
    rng: &mut RngStream,
    record_stride: usize,
) -> Result<Trajectory, LimitError> {
    check_integration_args(sys.dim(), u0, t_end, h)?;
    let stride = record_stride.max(1);
    let dim = u0.len();
    let w = sys.noise_dim;

    let mut u = u0.to_vec();
    let mut drift = vec![0.0; dim];
    let mut f = DMatrix::zeros(dim, w);
    let mut xi = vec![0.0; w];
    let mut times = vec![0.0];
    let mut rows = vec![u.clone()];

    let (full_steps, remainder) = split_steps(t_end, h);
    let total = full_steps + usize::from(remainder > 0.0);
    for step in 1..=total {
        let dt = if step <= full_steps { h } else { remainder };
        let t = (step - 1) as f64 * h;
        sys.drift_into(t, &u, &mut drift);
        (sys.diffusion)(t, &u, &mut f);
        rng.fill_standard_normal(&mut xi);
        let sqrt_dt = dt.sqrt();
        for i in 0..dim {
            let mut noise = 0.0;
            for j in 0..w {
                noise += f[(i, j)] * xi[j];
            }
            u[i] += drift[i] * dt + noise * sqrt_dt;
        }
        if !u.iter().all(|v| v.is_finite()) {
            return Err(LimitError::NonFinite { t: t + dt });
        }
        if step % stride == 0 && step <= full_steps {
            times.push(step as f64 * h);
            rows.push(u.clone());
        }
    }
    if *times.last().unwrap() < t_end {
        times.push(t_end);
        rows.push(u);
    }
    Ok(Trajectory::from_rows(sys.schema(), times, rows)?)
}

/// Symmetric PSD square root via eigendecomposition. Eigenvalues in
/// [−tol, 0] are clamped to zero; anything more negative is an error.
pub fn psd_sqrt(m: &DMatrix<f64>, tol: f64) -> Result<DMatrix<f64>, LimitError> {
    let eig = m.clone().symmetric_eigen();
    let mut vals = eig.eigenvalues;
    for v in vals.iter_mut() {
        if *v < -tol {
            return Err(LimitError::NotPsd { min_eig: *v });
        }
        *v = v.max(0.0).sqrt();
    }
    let q = eig.eigenvectors;
    Ok(&q * DMatrix::from_diagonal(&vals) * q.transpose())
}
