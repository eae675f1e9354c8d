//! Autonomous-friendly ODE systems over summary coordinates and a classic
//! fixed-step fourth-order Runge–Kutta integrator.

use sgdlab_core::{Schema, Trajectory};

use crate::error::LimitError;

type Rhs = dyn Fn(f64, &[f64], &mut [f64]) + Send + Sync;

/// du/dt = rhs(t, u) over named coordinates.
pub struct OdeSystem {
    name: String,
    schema: Schema,
    rhs: Box<Rhs>,
}

impl OdeSystem {
    pub fn new(
        name: impl Into<String>,
        schema: Schema,
        rhs: impl Fn(f64, &[f64], &mut [f64]) + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            schema,
            rhs: Box::new(rhs),
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

    pub fn rhs_into(&self, t: f64, u: &[f64], out: &mut [f64]) {
        (self.rhs)(t, u, out)
    }

    pub fn rhs(&self, t: f64, u: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; u.len()];
        self.rhs_into(t, u, &mut out);
        out
    }
}

impl std::fmt::Debug for OdeSystem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("OdeSystem")
            .field("name", &self.name)
            .field("schema", &self.schema)
            .finish()
    }
}

/// Integrates `sys` from `u0` over `[0, t_end]` with fixed step `h` (the final
/// step is shortened to land exactly on `t_end`), recording every
/// `record_stride`-th step plus the endpoints.
pub fn rk4_integrate(
    sys: &OdeSystem,
    u0: &[f64],
    t_end: f64,
    h: f64,
    record_stride: usize,
) -> Result<Trajectory, LimitError> {
    check_integration_args(sys.dim(), u0, t_end, h)?;
    let stride = record_stride.max(1);
    let dim = u0.len();

    let mut u = u0.to_vec();
    let mut times = vec![0.0];
    let mut rows = vec![u.clone()];

    let (full_steps, remainder) = split_steps(t_end, h);
    let mut k1 = vec![0.0; dim];
    let mut k2 = vec![0.0; dim];
    let mut k3 = vec![0.0; dim];
    let mut k4 = vec![0.0; dim];
    let mut stage = vec![0.0; dim];

    let mut step_once = |u: &mut Vec<f64>, t: f64, dt: f64| {
        sys.rhs_into(t, u, &mut k1);
        for i in 0..dim {
            stage[i] = u[i] + 0.5 * dt * k1[i];
        }
        sys.rhs_into(t + 0.5 * dt, &stage, &mut k2);
        for i in 0..dim {
            stage[i] = u[i] + 0.5 * dt * k2[i];
        }
        sys.rhs_into(t + 0.5 * dt, &stage, &mut k3);
        for i in 0..dim {
            stage[i] = u[i] + dt * k3[i];
        }
        sys.rhs_into(t + dt, &stage, &mut k4);
        for i in 0..dim {
            u[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    };

    for step in 1..=full_steps {
        let t = (step - 1) as f64 * h;
        step_once(&mut u, t, h);
        if !u.iter().all(|v| v.is_finite()) {
            return Err(LimitError::NonFinite { t: step as f64 * h });
        }
        if step % stride == 0 {
            times.push(step as f64 * h);
            rows.push(u.clone());
        }
    }
    if remainder > 0.0 {
        step_once(&mut u, full_steps as f64 * h, remainder);
        if !u.iter().all(|v| v.is_finite()) {
            return Err(LimitError::NonFinite { t: t_end });
        }
    }
    if *times.last().unwrap() < t_end {
        times.push(t_end);
        rows.push(u);
    }
    Ok(Trajectory::from_rows(sys.schema(), times, rows)?)
}

pub(crate) fn check_integration_args(
    dim: usize,
    u0: &[f64],
    t_end: f64,
    h: f64,
) -> Result<(), LimitError> {
    if u0.len() != dim {
        return Err(LimitError::InvalidConfig(format!(
            "initial state has {} coordinates, system has {dim}",
            u0.len()
        )));
    }
    if !u0.iter().all(|v| v.is_finite()) {
        return Err(LimitError::InvalidConfig(
            "initial state must be finite".into(),
        ));
    }
    if !(h > 0.0) || !h.is_finite() {
        return Err(LimitError::InvalidConfig(format!(
            "step size must be positive and finite, got {h}"
        )));
    }
    if !(t_end >= 0.0) || !t_end.is_finite() {
        return Err(LimitError::InvalidConfig(format!(
            "horizon must be nonnegative and finite, got {t_end}"
        )));
    }
    Ok(())
}

/// Number of whole `h`-steps in `[0, t_end]` and the leftover final step.
pub(crate) fn split_steps(t_end: f64, h: f64) -> (usize, f64) {
    let ratio = t_end / h;
    let full = ratio.floor();
    // Treat a remainder that is pure floating-point dust as zero.
    let full = if ratio - full > 1.0 - 1e-9 { full + 1.0 } else { full };
    let remainder = t_end - full * h;
    let remainder = if remainder > h * 1e-9 { remainder } else { 0.0 };
    (full as usize, remainder)
}
