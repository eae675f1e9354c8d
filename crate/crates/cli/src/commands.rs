//! Subcommand implementations. Progress and file notices go to standard
//! error; tables and computed values go to standard output or artifact files.

use std::path::Path;

use sgdlab_core::{make_rng, write_csv_path, SummaryVec, Trajectory};
use sgdlab_fixedpoints::{
    bgmm_fixed_points, ratio_to_f64, tensor_pca_fixed_points, tensor_pca_lambda_c,
    xor_fixed_points, xor_success_probability, xor_success_probability_by_enumeration,
    FixedPointRecord,
};
use sgdlab_limits::{
    bgmm_noiseless, euler_maruyama, rk4_integrate, tensor_ballistic, xor_noiseless, OdeSystem,
};
use sgdlab_models::{AnyModel, Family, ParamPoint, SgdModel};
use sgdlab_harness::{
    build_ode, build_sde, compare_to_limit, estimate_one_step, export_compare, export_ensemble,
    export_trajectories, fit_ar1, run_ensemble, CompareConfig, ExperimentConfig, FamilyTag,
    HarnessError, InitConfig, MatchMode, ODE_SYSTEMS, SDE_SYSTEMS,
};

use crate::args::{Cli, Command, ConfigArgs, FamilyArg, ModeArg, OutArgs};
use crate::overrides::load_config;

pub fn dispatch(cli: Cli) -> Result<(), HarnessError> {
    match cli.command {
        Command::Simulate {
            config,
            out,
            threads,
            dry_run,
        } => simulate(&config, &out, threads, dry_run),
        Command::LimitOde {
            config,
            out,
            system,
            t_end,
            step,
            stride,
            init,
            list,
        } => limit_ode(&config, &out, system.as_deref(), t_end, step, stride, init, list),
        Command::LimitSde {
            config,
            out,
            system,
            t_end,
            step,
            stride,
            paths,
            init,
            list,
        } => limit_sde(
            &config,
            &out,
            system.as_deref(),
            t_end,
            step,
            stride,
            paths,
            init,
            list,
        ),
        Command::FixedPoints {
            model,
            k,
            lambda,
            c_delta,
            alpha,
            width,
        } => fixed_points(model, k, lambda, c_delta, alpha, width),
        Command::Basin { config, threads } => basin(&config, threads),
        Command::DriftCheck {
            config,
            system,
            at,
            samples,
        } => drift_check(&config, system.as_deref(), at, samples),
        Command::SuccessProb { k, enumerate } => success_prob(k, enumerate),
        Command::Compare {
            config,
            out,
            threads,
            system,
            t_end,
            mode,
        } => compare_cmd(&config, &out, threads, system.as_deref(), t_end, mode),
        Command::Ar1 {
            config,
            threads,
            coord,
            scale_sqrt_n,
        } => ar1(&config, threads, coord.as_deref(), scale_sqrt_n),
    }
}

fn announce(cfg: &ExperimentConfig, threads: usize) {
    let threads = if threads == 0 {
        "auto".to_string()
    } else {
        threads.to_string()
    };
    eprintln!(
        "[{}] {} runs × {} steps of {} (n = {}, δ = {:.3e}, threads = {threads})",
        cfg.name,
        cfg.runs,
        cfg.resolved_steps(),
        cfg.model.family,
        cfg.model.n,
        cfg.delta(),
    );
}

fn simulate(
    config: &ConfigArgs,
    out: &OutArgs,
    threads: usize,
    dry_run: bool,
) -> Result<(), HarnessError> {
    let cfg = load_config(config)?;
    let out_dir = out.dir();
    for sub in cfg.expand_sweep() {
        announce(&sub, threads);
        if dry_run {
            sub.build_model()?;
            if let Some(cmp) = &sub.compare {
                build_ode(&cmp.system, &sub.model, sub.c_delta)?;
            }
            eprintln!("[{}] dry run OK", sub.name);
            continue;
        }
        let result = run_ensemble(&sub, threads)?;
        let mut written = export_ensemble(&result, &out_dir)?;
        if sub.keep_trajectories {
            written.extend(export_trajectories(&result, &out_dir)?);
        }
        if let Some(cmp) = &sub.compare {
            let sys = build_ode(&cmp.system, &sub.model, sub.c_delta)?;
            let report =
                compare_to_limit(&result.trajectories(), &sys, cmp.mode, cmp.t_end, cmp.step)?;
            written.push(export_compare(&report, &sub.name, &out_dir)?);
        }
        for path in &written {
            eprintln!("wrote {}", path.display());
        }
    }
    Ok(())
}

fn basin(config: &ConfigArgs, threads: usize) -> Result<(), HarnessError> {
    let cfg = load_config(config)?;
    for sub in cfg.expand_sweep() {
        announce(&sub, threads);
        let result = run_ensemble(&sub, threads)?;
        println!(
            "# {} (classify_eps = {}, classified = {}, diverged = {})",
            sub.name, sub.classify_eps, result.classified, result.diverged
        );
        println!(
            "{:<44} {:>7} {:>10} {:>10}",
            "label", "count", "fraction", "se"
        );
        for (label, entry) in &result.fractions {
            println!(
                "{:<44} {:>7} {:>10.6} {:>10.6}",
                label, entry.count, entry.fraction, entry.std_error
            );
        }
        println!();
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn limit_ode(
    config: &ConfigArgs,
    out: &OutArgs,
    system: Option<&str>,
    t_end: f64,
    step: f64,
    stride: usize,
    init: Option<Vec<f64>>,
    list: bool,
) -> Result<(), HarnessError> {
    if list {
        for name in ODE_SYSTEMS {
            println!("{name}");
        }
        return Ok(());
    }
    let system = system
        .ok_or_else(|| HarnessError::Config("--system is required (or use --list)".into()))?;
    let cfg = load_config(config)?;
    let out_dir = out.dir();
    for sub in cfg.expand_sweep() {
        let sys = build_ode(system, &sub.model, sub.c_delta)?;
        let u0 = initial_state(init.as_deref(), &sub, sys.dim(), sys.name())?;
        let traj = rk4_integrate(&sys, &u0, t_end, step, stride)?;
        let path = out_dir.join(format!("{}.{}.csv", sub.name, sys.name()));
        write_traj(&traj, &path)?;
        eprintln!("wrote {} ({} rows)", path.display(), traj.len());
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn limit_sde(
    config: &ConfigArgs,
    out: &OutArgs,
    system: Option<&str>,
    t_end: f64,
    step: f64,
    stride: usize,
    paths: usize,
    init: Option<Vec<f64>>,
    list: bool,
) -> Result<(), HarnessError> {
    if list {
        for name in SDE_SYSTEMS {
            println!("{name}");
        }
        return Ok(());
    }
    let system = system
        .ok_or_else(|| HarnessError::Config("--system is required (or use --list)".into()))?;
    if paths == 0 {
        return Err(HarnessError::Config("--paths must be at least 1".into()));
    }
    let cfg = load_config(config)?;
    let out_dir = out.dir();
    for sub in cfg.expand_sweep() {
        let sys = build_sde(system, &sub.model)?;
        let u0 = match &init {
            Some(v) => v.clone(),
            None => vec![0.0; sys.dim()],
        };
        if u0.len() != sys.dim() {
            return Err(HarnessError::Config(format!(
                "{} expects {} initial coordinates, got {}",
                sys.name(),
                sys.dim(),
                u0.len()
            )));
        }
        for p in 0..paths {
            let mut rng = make_rng(sub.master_seed, p as u64);
            let traj = euler_maruyama(&sys, &u0, t_end, step, &mut rng, stride)?;
            let path = out_dir.join(format!("{}.{}.path{:03}.csv", sub.name, sys.name(), p));
            write_traj(&traj, &path)?;
            eprintln!("wrote {}", path.display());
        }
    }
    Ok(())
}

fn fixed_points(
    model: FamilyArg,
    k: Option<u32>,
    lambda: Option<f64>,
    c_delta: f64,
    alpha: Option<f64>,
    width: Option<usize>,
) -> Result<(), HarnessError> {
    fn reject(flag: &str, given: bool, family: &str) -> Result<(), HarnessError> {
        if given {
            Err(HarnessError::Config(format!(
                "--{flag} does not apply to the {family} family"
            )))
        } else {
            Ok(())
        }
    }
    let need_alpha = |alpha: Option<f64>| {
        alpha.ok_or_else(|| HarnessError::Config("the mixture families require --alpha".into()))
    };

    let (records, footer, sys): (Vec<FixedPointRecord>, String, OdeSystem) = match model {
        FamilyArg::Tensor => {
            reject("alpha", alpha.is_some(), "tensor")?;
            reject("width", width.is_some(), "tensor")?;
            let k = k
                .ok_or_else(|| HarnessError::Config("the tensor family requires --k".into()))?;
            let lambda = lambda.ok_or_else(|| {
                HarnessError::Config("the tensor family requires --lambda".into())
            })?;
            let records = tensor_pca_fixed_points(k, lambda, c_delta)?;
            let footer = format!(
                "critical signal strength λ_c = {}",
                tensor_pca_lambda_c(k, c_delta)?
            );
            (records, footer, tensor_ballistic(k, lambda, 0.0, c_delta)?)
        }
        FamilyArg::Bgmm => {
            reject("k", k.is_some(), "bgmm")?;
            reject("lambda", lambda.is_some(), "bgmm")?;
            reject("width", width.is_some(), "bgmm")?;
            let alpha = need_alpha(alpha)?;
            (
                bgmm_fixed_points(alpha)?,
                String::new(),
                bgmm_noiseless(alpha, None)?,
            )
        }
        FamilyArg::Xor => {
            reject("k", k.is_some(), "xor")?;
            reject("lambda", lambda.is_some(), "xor")?;
            let alpha = need_alpha(alpha)?;
            let width = width
                .ok_or_else(|| HarnessError::Config("the xor family requires --width".into()))?;
            let (records, report) = xor_fixed_points(alpha, width)?;
            let footer = format!(
                "{} connected components ({} stable) over {} assignments",
                report.components, report.stable_components, report.assignments
            );
            (records, footer, xor_noiseless(width, alpha, None)?)
        }
    };

    println!("# coordinates: ({})", sys.schema().names().join(", "));
    println!("{:<34} {:>12}  representative", "label", "residual");
    for record in &records {
        let rep = record.representative();
        println!(
            "{:<34} {:>12.3e}  ({})",
            record.label,
            residual(&sys, record),
            fmt_coords(rep.values())
        );
    }
    if !footer.is_empty() {
        println!("{footer}");
    }
    Ok(())
}

/// Sup-norm of the flow's right-hand side over sampled points of the set.
fn residual(sys: &OdeSystem, record: &FixedPointRecord) -> f64 {
    record
        .representatives(3)
        .iter()
        .map(|rep| {
            sys.rhs(0.0, rep.values())
                .iter()
                .fold(0.0f64, |acc, v| acc.max(v.abs()))
        })
        .fold(0.0, f64::max)
}

fn drift_check(
    config: &ConfigArgs,
    system: Option<&str>,
    at: Option<Vec<f64>>,
    samples: usize,
) -> Result<(), HarnessError> {
    let cfg = load_config(config)?;
    let mut disagreements = Vec::new();
    for sub in cfg.expand_sweep() {
        let model = sub.build_model()?;
        let sys_name = system.map(str::to_string).unwrap_or_else(|| {
            default_flow(&model).to_string()
        });
        let sys = build_ode(&sys_name, &sub.model, sub.c_delta)?;
        let schema = model.schema();
        let target_vals = match &at {
            Some(v) => v.clone(),
            None => match &sub.init {
                InitConfig::Warm { summary } => summary.clone(),
                InitConfig::Random => {
                    return Err(HarnessError::Config(
                        "no summary point: pass --at or give the config a warm-start block"
                            .into(),
                    ))
                }
            },
        };
        if target_vals.len() != schema.len() {
            return Err(HarnessError::Config(format!(
                "--at expects {} coordinates ({}), got {}",
                schema.len(),
                schema.names().join(", "),
                target_vals.len()
            )));
        }
        let target = SummaryVec::new(schema.clone(), target_vals)?;
        let mut rng = make_rng(sub.master_seed, 0);
        let x = ParamPoint::new(model.family(), model.warm_start(&target, &mut rng)?);
        let est = estimate_one_step(&model, &x, sub.delta(), samples, &mut rng)?;
        let field = sys.rhs(0.0, est.summary.values());

        println!(
            "# {}: empirical one-step drift vs {} at ({}); {} samples, δ = {:.3e}",
            sub.name,
            sys.name(),
            fmt_coords(est.summary.values()),
            est.samples,
            est.delta
        );
        println!(
            "{:<12} {:>13} {:>11} {:>13} {:>11} {:>11}",
            "coordinate", "empirical", "se", "field", "deviation", "budget"
        );
        let mut ok = true;
        for i in 0..field.len() {
            let deviation = (est.drift[i] - field[i]).abs();
            // Allow 3σ statistical spread plus the O(δ) discretization bias of
            // a single SGD step.
            let budget = 3.0 * est.drift_se[i] + 10.0 * est.delta;
            ok &= deviation <= budget;
            println!(
                "{:<12} {:>13.6} {:>11.6} {:>13.6} {:>11.6} {:>11.6}",
                schema.names()[i],
                est.drift[i],
                est.drift_se[i],
                field[i],
                deviation,
                budget
            );
        }
        println!(
            "{}",
            if ok {
                "agreement within 3·SE + 10δ"
            } else {
                "DISAGREEMENT beyond 3·SE + 10δ"
            }
        );
        if !ok {
            disagreements.push(sub.name.clone());
        }
    }
    if disagreements.is_empty() {
        Ok(())
    } else {
        Err(HarnessError::InvalidInput(format!(
            "empirical drift disagrees with the reference field for: {}",
            disagreements.join(", ")
        )))
    }
}

fn default_flow(model: &AnyModel) -> &'static str {
    match model.family() {
        Family::TensorPca => "tensor-ballistic",
        Family::Bgmm => "bgmm-ballistic",
        Family::XorGmm => "xor-ballistic",
    }
}

fn success_prob(k: usize, enumerate: bool) -> Result<(), HarnessError> {
    let p = xor_success_probability(k)?;
    if enumerate {
        let q = xor_success_probability_by_enumeration(k)?;
        if p != q {
            return Err(HarnessError::InvalidInput(format!(
                "enumeration disagrees with the closed form: {q} vs {p}"
            )));
        }
    }
    println!("{} {}", p, ratio_to_f64(&p));
    Ok(())
}

fn compare_cmd(
    config: &ConfigArgs,
    out: &OutArgs,
    threads: usize,
    system: Option<&str>,
    t_end: Option<f64>,
    mode: Option<ModeArg>,
) -> Result<(), HarnessError> {
    let cfg = load_config(config)?;
    let out_dir = out.dir();
    for base in cfg.expand_sweep() {
        let mut sub = base;
        let existing = sub.compare.clone();
        let cmp = CompareConfig {
            system: system
                .map(str::to_string)
                .or_else(|| existing.as_ref().map(|c| c.system.clone()))
                .unwrap_or_else(|| default_flow_tag(sub.model.family).to_string()),
            t_end: t_end
                .or(existing.as_ref().map(|c| c.t_end))
                .unwrap_or_else(|| sub.resolved_steps() as f64 * sub.delta()),
            mode: mode
                .map(match_mode)
                .or(existing.as_ref().map(|c| c.mode))
                .unwrap_or(MatchMode::Mean),
            step: existing.as_ref().map(|c| c.step).unwrap_or(1e-3),
        };
        sub.keep_trajectories = true;
        sub.compare = Some(cmp.clone());
        announce(&sub, threads);
        let result = run_ensemble(&sub, threads)?;
        let sys = build_ode(&cmp.system, &sub.model, sub.c_delta)?;
        let report =
            compare_to_limit(&result.trajectories(), &sys, cmp.mode, cmp.t_end, cmp.step)?;
        let path = export_compare(&report, &sub.name, &out_dir)?;
        println!(
            "{} vs {} ({}): mean sup-distance {:.6}, max per-run {:.6}",
            sub.name,
            report.system,
            report.mode,
            report.mean_distance,
            report.max_per_run()
        );
        eprintln!("wrote {}", path.display());
    }
    Ok(())
}

fn default_flow_tag(family: FamilyTag) -> &'static str {
    match family {
        FamilyTag::Tensor => "tensor-ballistic",
        FamilyTag::Bgmm => "bgmm-ballistic",
        FamilyTag::Xor => "xor-ballistic",
    }
}

fn match_mode(mode: ModeArg) -> MatchMode {
    match mode {
        ModeArg::PerRun => MatchMode::PerRun,
        ModeArg::Mean => MatchMode::Mean,
    }
}

fn ar1(
    config: &ConfigArgs,
    threads: usize,
    coord: Option<&str>,
    scale_sqrt_n: bool,
) -> Result<(), HarnessError> {
    let cfg = load_config(config)?;
    println!(
        "{:<24} {:<10} {:>5} {:>12} {:>12} {:>12} {:>12}",
        "name", "coord", "fits", "mean_b", "se_b", "mean_vol", "mean_rho"
    );
    for base in cfg.expand_sweep() {
        let mut sub = base;
        sub.keep_trajectories = true;
        announce(&sub, threads);
        let result = run_ensemble(&sub, threads)?;
        let idx = match coord {
            Some(name) => result.schema.index_of(name).ok_or_else(|| {
                HarnessError::Config(format!(
                    "unknown coordinate `{name}`; schema: {}",
                    result.schema.names().join(", ")
                ))
            })?,
            None => 0,
        };
        let scale = if scale_sqrt_n {
            (sub.model.n as f64).sqrt()
        } else {
            1.0
        };
        let spacing = sub.delta() * sub.record_stride.max(1) as f64;
        let (mut bs, mut vols, mut rhos) = (Vec::new(), Vec::new(), Vec::new());
        for (i, traj) in result.trajectories().into_iter().enumerate() {
            let series = coordinate_series(traj, idx, scale);
            let fit = fit_ar1(&series, spacing)
                .map_err(|e| HarnessError::InvalidInput(format!("run {i}: {e}")))?;
            bs.push(fit.b_hat);
            vols.push(fit.volatility);
            rhos.push(fit.rho);
        }
        if bs.is_empty() {
            return Err(HarnessError::InvalidInput(
                "no trajectories to fit (did every run diverge?)".into(),
            ));
        }
        println!(
            "{:<24} {:<10} {:>5} {:>12.6} {:>12.6} {:>12.6} {:>12.6}",
            sub.name,
            result.schema.names()[idx],
            bs.len(),
            mean(&bs),
            standard_error(&bs),
            mean(&vols),
            mean(&rhos)
        );
    }
    Ok(())
}

/// The coordinate column of a trajectory, scaled, with a trailing off-stride
/// row dropped so the sampling spacing stays uniform.
fn coordinate_series(traj: &Trajectory, idx: usize, scale: f64) -> Vec<f64> {
    let times = traj.times();
    let mut len = traj.len();
    if len >= 3 {
        let head = times[1] - times[0];
        let tail = times[len - 1] - times[len - 2];
        if (tail - head).abs() > 1e-9 * head {
            len -= 1;
        }
    }
    (0..len).map(|i| scale * traj.row(i)[idx]).collect()
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn standard_error(v: &[f64]) -> f64 {
    if v.len() < 2 {
        return 0.0;
    }
    let m = mean(v);
    let var = v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (v.len() - 1) as f64;
    (var / v.len() as f64).sqrt()
}

fn initial_state(
    init: Option<&[f64]>,
    cfg: &ExperimentConfig,
    dim: usize,
    sys_name: &str,
) -> Result<Vec<f64>, HarnessError> {
    let vals = match init {
        Some(v) => v.to_vec(),
        None => match &cfg.init {
            InitConfig::Warm { summary } => summary.clone(),
            InitConfig::Random => {
                return Err(HarnessError::Config(format!(
                    "no initial state: pass --init with {dim} coordinates \
                     or give the config a warm-start block"
                )))
            }
        },
    };
    if vals.len() != dim {
        return Err(HarnessError::Config(format!(
            "{sys_name} expects {dim} initial coordinates, got {}",
            vals.len()
        )));
    }
    Ok(vals)
}

fn write_traj(traj: &Trajectory, path: &Path) -> Result<(), HarnessError> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent).map_err(|e| HarnessError::io(parent, e))?;
        }
    }
    write_csv_path(traj, path)?;
    Ok(())
}

fn fmt_coords(values: &[f64]) -> String {
    values
        .iter()
        .map(|&v| fmt_num(v))
        .collect::<Vec<_>>()
        .join(", ")
}

/// Compact numeric formatting for tables: integers without a decimal tail,
/// everything else to six places.
fn fmt_num(v: f64) -> String {
    if v == 0.0 {
        "0".to_string()
    } else if v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{v:.0}")
    } else {
        format!("{v:.6}")
    }
}
