//! Theory-versus-simulation distance reports: each SGD trajectory against the
//! reference solution of the matching limiting ODE, over a common window.

use serde::{Deserialize, Serialize};
use sgdlab_core::{sup_distance, CoreError, Schema, SummaryVec, Trajectory};
use sgdlab_limits::{rk4_integrate, OdeSystem};

use crate::error::HarnessError;

/// Where the reference ODE starts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MatchMode {
    /// One reference solution per run, started at that run's initial summary.
    PerRun,
    /// A single reference solution started at the ensemble-mean initial
    /// summary.
    Mean,
}

impl std::fmt::Display for MatchMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            MatchMode::PerRun => "per-run",
            MatchMode::Mean => "mean",
        })
    }
}

/// Distances from an ensemble to a limiting solution.
#[derive(Debug, Clone)]
pub struct CompareReport {
    pub system: String,
    pub mode: MatchMode,
    /// Compared window [0, t_end].
    pub t_end: f64,
    /// Sup-distance of each run over the window, in run order.
    pub per_run: Vec<f64>,
    /// Sup-distance of the pointwise mean trajectory from the reference
    /// solution started at the mean initial summary.
    pub mean_distance: f64,
}

impl CompareReport {
    pub fn max_per_run(&self) -> f64 {
        self.per_run.iter().cloned().fold(0.0, f64::max)
    }
}

/// Compares recorded trajectories to the limiting ODE on [0, min(t_end,
/// shortest trajectory)]. The reference solution is an RK4 solve with step
/// `h`; trajectories must share the system's schema.
pub fn compare_to_limit(
    trajectories: &[&Trajectory],
    sys: &OdeSystem,
    mode: MatchMode,
    t_end: f64,
    h: f64,
) -> Result<CompareReport, HarnessError> {
    if trajectories.is_empty() {
        return Err(HarnessError::InvalidInput(
            "no trajectories to compare".into(),
        ));
    }
    let schema = sys.schema();
    for traj in trajectories {
        if *traj.schema() != schema {
            return Err(HarnessError::Core(CoreError::SchemaMismatch(format!(
                "trajectory records {} but the system evolves {}",
                traj.schema(),
                schema
            ))));
        }
    }
    if !(t_end > 0.0) || !t_end.is_finite() {
        return Err(HarnessError::InvalidInput(format!(
            "comparison window must be positive and finite, got {t_end}"
        )));
    }
    let window = trajectories
        .iter()
        .map(|t| t.t_max())
        .fold(t_end, f64::min);

    let solve_from = |u0: &[f64]| -> Result<Trajectory, HarnessError> {
        Ok(rk4_integrate(sys, u0, window, h, 1)?)
    };

    let mean0 = mean_row(&schema, trajectories, 0)?;
    let mean_reference = solve_from(mean0.values())?;

    let per_run = match mode {
        MatchMode::PerRun => trajectories
            .iter()
            .map(|traj| {
                let reference = solve_from(traj.row(0))?;
                Ok(sup_distance(traj, &reference, 0.0, window)?)
            })
            .collect::<Result<Vec<f64>, HarnessError>>()?,
        MatchMode::Mean => trajectories
            .iter()
            .map(|traj| Ok(sup_distance(traj, &mean_reference, 0.0, window)?))
            .collect::<Result<Vec<f64>, HarnessError>>()?,
    };

    let mean_traj = mean_trajectory(&schema, trajectories)?;
    let mean_distance = sup_distance(&mean_traj, &mean_reference, 0.0, window)?;

    Ok(CompareReport {
        system: sys.name().to_string(),
        mode,
        t_end: window,
        per_run,
        mean_distance,
    })
}

fn mean_row(
    schema: &Schema,
    trajectories: &[&Trajectory],
    row: usize,
) -> Result<SummaryVec, HarnessError> {
    let mut mean = vec![0.0; schema.len()];
    for traj in trajectories {
        for (m, v) in mean.iter_mut().zip(traj.row(row)) {
            *m += v;
        }
    }
    for m in &mut mean {
        *m /= trajectories.len() as f64;
    }
    Ok(SummaryVec::new(schema.clone(), mean)?)
}

/// Pointwise mean across runs. All runs of one ensemble share the recording
/// grid; mismatched grids are rejected.
fn mean_trajectory(
    schema: &Schema,
    trajectories: &[&Trajectory],
) -> Result<Trajectory, HarnessError> {
    let times = trajectories[0].times();
    for traj in &trajectories[1..] {
        if traj.times().len() != times.len()
            || traj
                .times()
                .iter()
                .zip(times)
                .any(|(a, b)| (a - b).abs() > 1e-12)
        {
            return Err(HarnessError::InvalidInput(
                "trajectories do not share a recording grid".into(),
            ));
        }
    }
    let mut rows = Vec::with_capacity(times.len());
    for i in 0..times.len() {
        rows.push(mean_row(schema, trajectories, i)?.into_values());
    }
    Ok(Trajectory::from_rows(
        schema.clone(),
        times.to_vec(),
        rows,
    )?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use sgdlab_limits::tensor_ballistic;

    #[test]
    fn self_comparison_is_interpolation_exact() {
        let sys = tensor_ballistic(2, 1.2, 0.0, 1.0).unwrap();
        let traj = rk4_integrate(&sys, &[0.3, 1.0], 5.0, 1e-3, 10).unwrap();
        let report =
            compare_to_limit(&[&traj], &sys, MatchMode::PerRun, 5.0, 1e-3).unwrap();
        assert!(report.max_per_run() < 1e-6, "{}", report.max_per_run());
        assert!(report.mean_distance < 1e-6);
        assert_eq!(report.per_run.len(), 1);
        assert_eq!(report.system, "tensor-ballistic");
    }

    #[test]
    fn window_clips_to_the_shortest_trajectory() {
        let sys = tensor_ballistic(2, 1.2, 0.0, 1.0).unwrap();
        let traj = rk4_integrate(&sys, &[0.3, 1.0], 2.0, 1e-3, 10).unwrap();
        let report =
            compare_to_limit(&[&traj], &sys, MatchMode::Mean, 50.0, 1e-3).unwrap();
        assert!((report.t_end - 2.0).abs() < 1e-12);
    }

    #[test]
    fn schema_mismatch_is_rejected() {
        let sys2 = tensor_ballistic(2, 1.2, 0.0, 1.0).unwrap();
        let traj = rk4_integrate(&sys2, &[0.3, 1.0], 1.0, 1e-3, 10).unwrap();
        let loss_sys = sgdlab_limits::tensor_loss_ballistic(2, 1.2, 1.0).unwrap();
        assert!(compare_to_limit(&[&traj], &loss_sys, MatchMode::Mean, 1.0, 1e-3).is_err());
        assert!(compare_to_limit(&[], &sys2, MatchMode::Mean, 1.0, 1e-3).is_err());
    }
}
