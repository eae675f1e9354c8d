//! Experiment configuration: a single declarative file (TOML or JSON) that
//! names the model, the step-size scaling, the initialization, how many seeded
//! runs to perform, and optionally a limiting system to compare against.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sgdlab_fixedpoints::{bgmm_fixed_points, tensor_pca_fixed_points, xor_fixed_points};
use sgdlab_fixedpoints::FixedPointRecord;
use sgdlab_models::{AnyModel, BgmmModel, TensorNoise, TensorPcaModel, XorGmmModel};

use crate::compare::MatchMode;
use crate::error::HarnessError;

fn default_c_delta() -> f64 {
    1.0
}
fn default_record_stride() -> usize {
    1
}
fn default_classify_eps() -> f64 {
    // Stable points sit O(1) apart in every studied regime while endpoint
    // scatter is O(n^{-1/2}), so a fixed small radius separates them cleanly.
    0.05
}
fn default_mode() -> MatchMode {
    MatchMode::Mean
}
fn default_ode_step() -> f64 {
    1e-3
}

/// Which model family a config drives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FamilyTag {
    Tensor,
    Bgmm,
    Xor,
}

impl std::fmt::Display for FamilyTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            FamilyTag::Tensor => "tensor",
            FamilyTag::Bgmm => "bgmm",
            FamilyTag::Xor => "xor",
        })
    }
}

/// Accepts λ as a number or as the string "inf" (JSON has no infinity
/// literal), and writes infinities back out as "inf".
mod lambda_field {
    use serde::de::{self, Deserializer, Visitor};
    use serde::Serializer;

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_infinite() {
            s.serialize_str(if *v > 0.0 { "inf" } else { "-inf" })
        } else {
            s.serialize_f64(*v)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        struct NumberOrInf;
        impl Visitor<'_> for NumberOrInf {
            type Value = f64;
            fn expecting(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
                f.write_str("a number or the string \"inf\"")
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> Result<f64, E> {
                Ok(v)
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> Result<f64, E> {
                Ok(v as f64)
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> Result<f64, E> {
                Ok(v as f64)
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<f64, E> {
                match v.trim().to_ascii_lowercase().as_str() {
                    "inf" | "+inf" | "infinity" => Ok(f64::INFINITY),
                    other => other
                        .parse()
                        .map_err(|_| E::custom(format!("not a λ value: '{v}'"))),
                }
            }
        }
        d.deserialize_any(NumberOrInf)
    }
}

/// The model block: family, ambient dimension, data noise level λ (`inf` for
/// the zero-noise mixtures), ridge α, and the family-specific shape numbers.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub family: FamilyTag,
    pub n: usize,
    #[serde(with = "lambda_field")]
    pub lambda: f64,
    #[serde(default)]
    pub alpha: f64,
    /// Tensor order; required for (and only valid for) the tensor family.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<u32>,
    /// Hidden-layer width; required for (and only valid for) the XOR family.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub width: Option<usize>,
}

impl ModelConfig {
    pub fn k(&self) -> Result<u32, HarnessError> {
        self.k
            .ok_or_else(|| HarnessError::Config("tensor family requires `model.k`".into()))
    }

    pub fn width(&self) -> Result<usize, HarnessError> {
        self.width
            .ok_or_else(|| HarnessError::Config("xor family requires `model.width`".into()))
    }
}

/// How each run's parameter vector is initialized.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "lowercase", tag = "kind")]
pub enum InitConfig {
    /// The family's reference cold start.
    #[default]
    Random,
    /// Lift the given summary values (in schema order) to a parameter point,
    /// drawing the unconstrained directions isotropically.
    Warm { summary: Vec<f64> },
}

/// Optional limiting-ODE comparison attached to an ensemble.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareConfig {
    /// One of the named ODE systems, e.g. "tensor-ballistic".
    pub system: String,
    /// Comparison window [0, t_end] in rescaled time.
    pub t_end: f64,
    #[serde(default = "default_mode")]
    pub mode: MatchMode,
    /// RK4 step for the reference solution.
    #[serde(default = "default_ode_step")]
    pub step: f64,
}

/// Optional one-axis parameter sweep; each value yields a derived config.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub lambda: Vec<f64>,
}

/// A complete ensemble experiment. `steps` and `steps_per_dim` are mutually
/// exclusive ways to set the run length; the latter scales with `model.n`
/// (e.g. `steps_per_dim = 100` means 100·N steps).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub master_seed: u64,
    pub runs: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps_per_dim: Option<f64>,
    /// Step size is δ = c_delta / n.
    #[serde(default = "default_c_delta")]
    pub c_delta: f64,
    #[serde(default = "default_record_stride")]
    pub record_stride: usize,
    /// Keep every run's recorded trajectory in memory (required for
    /// comparisons and trajectory export).
    #[serde(default)]
    pub keep_trajectories: bool,
    /// Endpoint classification radius in summary coordinates.
    #[serde(default = "default_classify_eps")]
    pub classify_eps: f64,
    pub model: ModelConfig,
    #[serde(default)]
    pub init: InitConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub compare: Option<CompareConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
}

impl ExperimentConfig {
    pub fn from_toml_str(s: &str) -> Result<Self, HarnessError> {
        let cfg: ExperimentConfig = toml::from_str(s)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_json_str(s: &str) -> Result<Self, HarnessError> {
        let cfg: ExperimentConfig = serde_json::from_str(s)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Loads and validates a config file; the format is chosen by extension
    /// (`.json` for JSON, anything else parsed as TOML).
    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        if path.extension().and_then(|e| e.to_str()) == Some("json") {
            Self::from_json_str(&text)
        } else {
            Self::from_toml_str(&text)
        }
    }

    /// Full config-file contract: positive counts, a well-posed model block,
    /// and exactly one way of specifying the run length.
    pub fn validate(&self) -> Result<(), HarnessError> {
        self.check_runnable()?;
        if self.resolved_steps() == 0 {
            return Err(HarnessError::Config("steps must be ≥ 1".into()));
        }
        Ok(())
    }

    /// Everything `validate` checks except the positive-step-count rule;
    /// zero-step ensembles are legal when constructed in code (the endpoint is
    /// then the initial summary).
    pub fn check_runnable(&self) -> Result<(), HarnessError> {
        if self.name.is_empty() {
            return Err(HarnessError::Config("name must be nonempty".into()));
        }
        if self.runs == 0 {
            return Err(HarnessError::Config("runs must be ≥ 1".into()));
        }
        match (self.steps, self.steps_per_dim) {
            (Some(_), Some(_)) => {
                return Err(HarnessError::Config(
                    "set exactly one of `steps` and `steps_per_dim`, not both".into(),
                ))
            }
            (None, None) => {
                return Err(HarnessError::Config(
                    "one of `steps` or `steps_per_dim` is required".into(),
                ))
            }
            (None, Some(s)) if !(s >= 0.0) || !s.is_finite() => {
                return Err(HarnessError::Config(format!(
                    "steps_per_dim must be finite and ≥ 0, got {s}"
                )))
            }
            _ => {}
        }
        if !(self.c_delta > 0.0) || !self.c_delta.is_finite() {
            return Err(HarnessError::Config(format!(
                "c_delta must be positive and finite, got {}",
                self.c_delta
            )));
        }
        if !(self.classify_eps > 0.0) || !self.classify_eps.is_finite() {
            return Err(HarnessError::Config(format!(
                "classify_eps must be positive and finite, got {}",
                self.classify_eps
            )));
        }
        if self.model.n == 0 {
            return Err(HarnessError::Config("model.n must be ≥ 1".into()));
        }
        match self.model.family {
            FamilyTag::Tensor => {
                self.model.k()?;
                if self.model.width.is_some() {
                    return Err(HarnessError::Config(
                        "`model.width` is not a tensor-family field".into(),
                    ));
                }
            }
            FamilyTag::Bgmm => {
                if self.model.k.is_some() || self.model.width.is_some() {
                    return Err(HarnessError::Config(
                        "`model.k`/`model.width` are not bgmm-family fields".into(),
                    ));
                }
            }
            FamilyTag::Xor => {
                self.model.width()?;
                if self.model.k.is_some() {
                    return Err(HarnessError::Config(
                        "`model.k` is not an xor-family field".into(),
                    ));
                }
            }
        }
        if let Some(compare) = &self.compare {
            if !self.keep_trajectories {
                return Err(HarnessError::Config(
                    "comparison requires keep_trajectories = true".into(),
                ));
            }
            if !(compare.t_end > 0.0) || !compare.t_end.is_finite() {
                return Err(HarnessError::Config(format!(
                    "compare.t_end must be positive and finite, got {}",
                    compare.t_end
                )));
            }
            if !(compare.step > 0.0) || !compare.step.is_finite() {
                return Err(HarnessError::Config(format!(
                    "compare.step must be positive and finite, got {}",
                    compare.step
                )));
            }
        }
        if let Some(sweep) = &self.sweep {
            if sweep.lambda.is_empty() {
                return Err(HarnessError::Config("sweep.lambda must be nonempty".into()));
            }
        }
        Ok(())
    }

    /// The run length in SGD steps.
    pub fn resolved_steps(&self) -> usize {
        match (self.steps, self.steps_per_dim) {
            (Some(s), _) => s,
            (None, Some(per)) => (per * self.model.n as f64).round() as usize,
            (None, None) => 0,
        }
    }

    /// The step size δ = c_delta / n.
    pub fn delta(&self) -> f64 {
        self.c_delta / self.model.n as f64
    }

    /// Instantiates the configured model.
    pub fn build_model(&self) -> Result<AnyModel, HarnessError> {
        Ok(match self.model.family {
            FamilyTag::Tensor => AnyModel::Tensor(TensorPcaModel::new(
                self.model.n,
                self.model.k()?,
                self.model.lambda,
                self.model.alpha,
                TensorNoise::Factored,
            )?),
            FamilyTag::Bgmm => AnyModel::Bgmm(BgmmModel::new(
                self.model.n,
                self.model.lambda,
                self.model.alpha,
            )?),
            FamilyTag::Xor => AnyModel::Xor(XorGmmModel::new(
                self.model.n,
                self.model.width()?,
                self.model.lambda,
                self.model.alpha,
            )?),
        })
    }

    /// The fixed-point taxonomy endpoints are classified against. For the
    /// tensor family this is the ridgeless taxonomy at the configured
    /// (k, λ, c_δ); for the mixtures it depends only on α (and width).
    pub fn fixed_point_records(&self) -> Result<Vec<FixedPointRecord>, HarnessError> {
        Ok(match self.model.family {
            FamilyTag::Tensor => {
                tensor_pca_fixed_points(self.model.k()?, self.model.lambda, self.c_delta)?
            }
            FamilyTag::Bgmm => bgmm_fixed_points(self.model.alpha)?,
            FamilyTag::Xor => xor_fixed_points(self.model.alpha, self.model.width()?)?.0,
        })
    }

    /// Expands `sweep.lambda` into one derived config per value (name suffixed
    /// with the λ value); without a sweep block, returns the config itself.
    pub fn expand_sweep(&self) -> Vec<ExperimentConfig> {
        match &self.sweep {
            None => vec![self.clone()],
            Some(sweep) => sweep
                .lambda
                .iter()
                .map(|&lambda| {
                    let mut derived = self.clone();
                    derived.sweep = None;
                    derived.model.lambda = lambda;
                    derived.name = format!("{}-lambda{lambda}", self.name);
                    derived
                })
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOML_BASE: &str = r#"
        name = "demo"
        master_seed = 7
        runs = 4
        steps = 200
        c_delta = 1.0

        [model]
        family = "tensor"
        n = 50
        k = 2
        lambda = 1.2
    "#;

    #[test]
    fn toml_round_trip_and_defaults() {
        let cfg = ExperimentConfig::from_toml_str(TOML_BASE).unwrap();
        assert_eq!(cfg.runs, 4);
        assert_eq!(cfg.resolved_steps(), 200);
        assert_eq!(cfg.record_stride, 1);
        assert!((cfg.classify_eps - 0.05).abs() < 1e-15);
        assert!(matches!(cfg.init, InitConfig::Random));
        assert!((cfg.delta() - 0.02).abs() < 1e-15);

        let echoed = toml::to_string(&cfg).unwrap();
        let back = ExperimentConfig::from_toml_str(&echoed).unwrap();
        assert_eq!(back.name, cfg.name);
        assert_eq!(back.model.lambda, cfg.model.lambda);
    }

    #[test]
    fn json_parse_and_infinite_lambda() {
        let json = r#"{
            "name": "flat", "master_seed": 1, "runs": 2, "steps_per_dim": 1.5,
            "model": {"family": "bgmm", "n": 40, "lambda": "inf", "alpha": 0.1}
        }"#;
        let cfg = ExperimentConfig::from_json_str(json).unwrap();
        assert!(cfg.model.lambda.is_infinite());
        assert_eq!(cfg.resolved_steps(), 60);

        let toml_inf = TOML_BASE.replace("lambda = 1.2", "lambda = inf");
        let cfg = ExperimentConfig::from_toml_str(&toml_inf).unwrap();
        assert!(cfg.model.lambda.is_infinite());
    }

    #[test]
    fn unknown_fields_and_step_spec_are_rejected() {
        let with_unknown = TOML_BASE.replace("runs = 4", "runs = 4\nworkers = 9");
        assert!(ExperimentConfig::from_toml_str(&with_unknown).is_err());

        let both = TOML_BASE.replace("steps = 200", "steps = 200\nsteps_per_dim = 10.0");
        assert!(matches!(
            ExperimentConfig::from_toml_str(&both),
            Err(HarnessError::Config(_))
        ));

        let neither = TOML_BASE.replace("steps = 200", "");
        assert!(ExperimentConfig::from_toml_str(&neither).is_err());

        let zero = TOML_BASE.replace("steps = 200", "steps = 0");
        assert!(ExperimentConfig::from_toml_str(&zero).is_err());
    }

    #[test]
    fn family_shape_fields_are_enforced() {
        let no_k = TOML_BASE.replace("k = 2\n", "");
        assert!(ExperimentConfig::from_toml_str(&no_k).is_err());

        let xor_missing_width = TOML_BASE
            .replace("family = \"tensor\"", "family = \"xor\"")
            .replace("k = 2\n", "");
        assert!(ExperimentConfig::from_toml_str(&xor_missing_width).is_err());

        let bgmm_with_k = TOML_BASE.replace("family = \"tensor\"", "family = \"bgmm\"");
        assert!(ExperimentConfig::from_toml_str(&bgmm_with_k).is_err());
    }

    #[test]
    fn warm_init_parses_and_model_builds() {
        let warm = format!(
            "{TOML_BASE}\n[init]\nkind = \"warm\"\nsummary = [0.3, 1.0]\n"
        );
        let cfg = ExperimentConfig::from_toml_str(&warm).unwrap();
        match &cfg.init {
            InitConfig::Warm { summary } => assert_eq!(summary, &vec![0.3, 1.0]),
            other => panic!("expected warm init, got {other:?}"),
        }
        let model = cfg.build_model().unwrap();
        use sgdlab_models::SgdModel;
        assert_eq!(model.dim(), 50);
        // Above criticality at order 2: origin, equator, and the ± stable pair.
        assert_eq!(cfg.fixed_point_records().unwrap().len(), 4);
    }

    #[test]
    fn sweep_expansion_derives_names_and_lambdas() {
        let swept = format!("{TOML_BASE}\n[sweep]\nlambda = [0.8, 1.2]\n");
        let cfg = ExperimentConfig::from_toml_str(&swept).unwrap();
        let expanded = cfg.expand_sweep();
        assert_eq!(expanded.len(), 2);
        assert_eq!(expanded[0].name, "demo-lambda0.8");
        assert_eq!(expanded[1].model.lambda, 1.2);
        assert!(expanded.iter().all(|c| c.sweep.is_none()));
        assert_eq!(cfg.expand_sweep().len(), 2);

        let plain = ExperimentConfig::from_toml_str(TOML_BASE).unwrap();
        assert_eq!(plain.expand_sweep().len(), 1);
    }
}
