//! Seeded parallel SGD ensembles with deterministic aggregation.
//!
//! Run `i` always draws from the stream `(master_seed, i)`, so the ensemble is
//! reproducible run-by-run regardless of how many workers execute it, and the
//! aggregation is an ordered reduction over run indices.

use std::collections::BTreeMap;

use rayon::prelude::*;
use sgdlab_core::{make_rng, Schema, SummaryVec, Trajectory};
use sgdlab_fixedpoints::classify_endpoint;
use sgdlab_models::{sgd_run, ModelError, SgdModel};

use crate::config::{ExperimentConfig, InitConfig};
use crate::error::HarnessError;

/// Label recorded for runs whose iterate left the representable region.
pub const DIVERGED: &str = "diverged";

/// One run's endpoint summary, basin label, and (optionally) full trajectory.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub run_index: usize,
    /// Basin label from the fixed-point taxonomy, [`DIVERGED`], or
    /// "unresolved".
    pub label: String,
    pub endpoint: Option<SummaryVec>,
    pub diverged_step: Option<usize>,
    pub trajectory: Option<Trajectory>,
}

/// A basin's share of the classified (non-diverged) runs.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct FractionEntry {
    pub count: usize,
    pub fraction: f64,
    /// Binomial standard error √(p(1−p)/n) over the classified runs.
    pub std_error: f64,
}

/// Everything an ensemble produced, in run-index order.
#[derive(Debug, Clone)]
pub struct EnsembleResult {
    pub config: ExperimentConfig,
    pub schema: Schema,
    pub outcomes: Vec<RunOutcome>,
    /// Label → share of classified runs; keys are sorted, values sum to 1.
    pub fractions: BTreeMap<String, FractionEntry>,
    pub diverged: usize,
    /// Number of non-diverged runs (the fraction denominator).
    pub classified: usize,
}

impl EnsembleResult {
    /// The fraction for `label`, or 0 if no run landed there.
    pub fn fraction(&self, label: &str) -> f64 {
        self.fractions.get(label).map_or(0.0, |e| e.fraction)
    }

    /// Sums the fractions of every label for which `pred` holds.
    pub fn fraction_where(&self, pred: impl Fn(&str) -> bool) -> f64 {
        self.fractions
            .iter()
            .filter(|(label, _)| pred(label))
            .map(|(_, e)| e.fraction)
            .sum()
    }

    /// Recorded trajectories of non-diverged runs, in run order.
    pub fn trajectories(&self) -> Vec<&Trajectory> {
        self.outcomes
            .iter()
            .filter_map(|o| o.trajectory.as_ref())
            .collect()
    }

    /// Mean endpoint over non-diverged runs.
    pub fn mean_endpoint(&self) -> Option<SummaryVec> {
        let endpoints: Vec<_> = self
            .outcomes
            .iter()
            .filter_map(|o| o.endpoint.as_ref())
            .collect();
        if endpoints.is_empty() {
            return None;
        }
        let mut mean = vec![0.0; self.schema.len()];
        for e in &endpoints {
            for (m, v) in mean.iter_mut().zip(e.values()) {
                *m += v;
            }
        }
        for m in &mut mean {
            *m /= endpoints.len() as f64;
        }
        SummaryVec::new(self.schema.clone(), mean).ok()
    }
}

/// Runs the configured ensemble on `threads` workers (0 = the global pool).
///
/// Divergence is recorded, not fatal; any other model error aborts the whole
/// ensemble. The result is identical for every thread count.
pub fn run_ensemble(
    cfg: &ExperimentConfig,
    threads: usize,
) -> Result<EnsembleResult, HarnessError> {
    cfg.check_runnable()?;
    let model = cfg.build_model()?;
    let records = cfg.fixed_point_records()?;
    let schema = model.schema();
    let steps = cfg.resolved_steps();
    let delta = cfg.delta();

    let run_one = |i: usize| -> Result<RunOutcome, HarnessError> {
        let mut rng = make_rng(cfg.master_seed, i as u64);
        let x0 = match &cfg.init {
            InitConfig::Random => model.init_random(&mut rng),
            InitConfig::Warm { summary } => {
                let target = SummaryVec::new(schema.clone(), summary.clone())?;
                model.warm_start(&target, &mut rng)?
            }
        };
        match sgd_run(&model, &x0, delta, steps, &mut rng, cfg.record_stride) {
            Ok(traj) => {
                let endpoint = traj.endpoint();
                let label = classify_endpoint(&endpoint, &records, cfg.classify_eps);
                Ok(RunOutcome {
                    run_index: i,
                    label,
                    endpoint: Some(endpoint),
                    diverged_step: None,
                    trajectory: cfg.keep_trajectories.then_some(traj),
                })
            }
            Err(ModelError::Diverged { step }) => Ok(RunOutcome {
                run_index: i,
                label: DIVERGED.to_string(),
                endpoint: None,
                diverged_step: Some(step),
                trajectory: None,
            }),
            Err(e) => Err(e.into()),
        }
    };

    let outcomes: Result<Vec<RunOutcome>, HarnessError> = if threads == 0 {
        (0..cfg.runs).into_par_iter().map(run_one).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| HarnessError::ThreadPool(e.to_string()))?;
        pool.install(|| (0..cfg.runs).into_par_iter().map(run_one).collect())
    };
    let outcomes = outcomes?;

    Ok(aggregate(cfg.clone(), schema, outcomes))
}

fn aggregate(
    config: ExperimentConfig,
    schema: Schema,
    outcomes: Vec<RunOutcome>,
) -> EnsembleResult {
    let diverged = outcomes.iter().filter(|o| o.label == DIVERGED).count();
    let classified = outcomes.len() - diverged;
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    for outcome in outcomes.iter().filter(|o| o.label != DIVERGED) {
        *counts.entry(outcome.label.clone()).or_insert(0) += 1;
    }
    let fractions = counts
        .into_iter()
        .map(|(label, count)| {
            let p = count as f64 / classified as f64;
            let se = (p * (1.0 - p) / classified as f64).sqrt();
            (
                label,
                FractionEntry {
                    count,
                    fraction: p,
                    std_error: se,
                },
            )
        })
        .collect();
    EnsembleResult {
        config,
        schema,
        outcomes,
        fractions,
        diverged,
        classified,
    }
}
