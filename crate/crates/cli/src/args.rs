//! Command-line surface: one subcommand per laboratory operation, with shared
//! flag groups for configuration loading and output placement.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "sgdlab",
    version,
    about = "Online SGD in high dimension: finite-size ensembles, limiting flows, and their fixed points",
    propagate_version = true
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

/// Where the experiment configuration comes from and how it is amended.
#[derive(Debug, Args)]
pub struct ConfigArgs {
    /// Path to a TOML (or .json) experiment configuration.
    #[arg(long, value_name = "PATH", conflicts_with = "preset")]
    pub config: Option<PathBuf>,

    /// Bundled configuration (fig1..fig9) to use instead of a file.
    #[arg(long, value_name = "NAME")]
    pub preset: Option<String>,

    /// Dotted-key override applied before validation, e.g.
    /// `--set model.lambda=1.5` or `--set sweep.lambda=[0.8,1.2]`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,

    /// Master-seed override (shorthand for `--set master_seed=N`).
    #[arg(long, value_name = "N")]
    pub seed: Option<u64>,
}

/// Output placement for subcommands that write artifact files.
#[derive(Debug, Args)]
pub struct OutArgs {
    /// Output directory; defaults to $SGDLAB_OUT, else the current directory.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
}

impl OutArgs {
    pub fn dir(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| {
            std::env::var_os("SGDLAB_OUT")
                .map(PathBuf::from)
                .unwrap_or_else(|| PathBuf::from("."))
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FamilyArg {
    /// Spiked tensor principal component analysis.
    Tensor,
    /// Two-unit classifier on the binary Gaussian mixture.
    Bgmm,
    /// Multi-unit classifier on the four-cluster (XOR) Gaussian mixture.
    Xor,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    /// Integrate one reference per run from that run's initial summary.
    PerRun,
    /// Integrate a single reference from the ensemble-mean initial summary.
    Mean,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a finite-size SGD ensemble and export endpoints, basin fractions,
    /// and (optionally) trajectories and a limit comparison.
    Simulate {
        #[command(flatten)]
        config: ConfigArgs,
        #[command(flatten)]
        out: OutArgs,
        /// Worker threads for the ensemble (0 = all cores).
        #[arg(long, default_value_t = 0, value_name = "N")]
        threads: usize,
        /// Validate the configuration and print the plan without running.
        #[arg(long)]
        dry_run: bool,
    },

    /// Integrate a deterministic limiting flow for the configured model.
    LimitOde {
        #[command(flatten)]
        config: ConfigArgs,
        #[command(flatten)]
        out: OutArgs,
        /// Flow name (see --list).
        #[arg(long, value_name = "NAME")]
        system: Option<String>,
        /// Integration window [0, t_end] in rescaled time.
        #[arg(long, default_value_t = 10.0)]
        t_end: f64,
        /// Runge-Kutta step.
        #[arg(long, default_value_t = 1e-3)]
        step: f64,
        /// Record every STRIDE-th integrator step.
        #[arg(long, default_value_t = 10, value_name = "STRIDE")]
        stride: usize,
        /// Initial summary coordinates, comma separated
        /// (default: the configuration's warm-start summary).
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, value_name = "U0")]
        init: Option<Vec<f64>>,
        /// List the available flow names and exit.
        #[arg(long)]
        list: bool,
    },

    /// Integrate a stochastic fluctuation system for the configured model.
    LimitSde {
        #[command(flatten)]
        config: ConfigArgs,
        #[command(flatten)]
        out: OutArgs,
        /// System name (see --list).
        #[arg(long, value_name = "NAME")]
        system: Option<String>,
        /// Integration window [0, t_end] in rescaled time.
        #[arg(long, default_value_t = 50.0)]
        t_end: f64,
        /// Euler-Maruyama step.
        #[arg(long, default_value_t = 1e-3)]
        step: f64,
        /// Record every STRIDE-th integrator step.
        #[arg(long, default_value_t = 10, value_name = "STRIDE")]
        stride: usize,
        /// Number of independent sample paths (streams 0..paths of the master seed).
        #[arg(long, default_value_t = 1)]
        paths: usize,
        /// Initial fluctuation coordinates, comma separated (default: all zero).
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, value_name = "U0")]
        init: Option<Vec<f64>>,
        /// List the available system names and exit.
        #[arg(long)]
        list: bool,
    },

    /// Print a family's catalogue of stationary sets with residuals under the
    /// matching exact field.
    FixedPoints {
        /// Model family.
        #[arg(long, value_enum)]
        model: FamilyArg,
        /// Tensor order k ≥ 2 (tensor family only).
        #[arg(long)]
        k: Option<u32>,
        /// Signal strength λ (tensor family only).
        #[arg(long, allow_hyphen_values = true)]
        lambda: Option<f64>,
        /// Step-size constant c_δ, with δ = c_δ/n (tensor family only).
        #[arg(long, default_value_t = 1.0)]
        c_delta: f64,
        /// Ridge coefficient α (mixture families only).
        #[arg(long)]
        alpha: Option<f64>,
        /// Hidden-unit count (xor family only).
        #[arg(long)]
        width: Option<usize>,
    },

    /// Run an ensemble and print the fraction of endpoints nearest each
    /// stationary set.
    Basin {
        #[command(flatten)]
        config: ConfigArgs,
        /// Worker threads for the ensemble (0 = all cores).
        #[arg(long, default_value_t = 0, value_name = "N")]
        threads: usize,
    },

    /// Estimate the one-step drift of the configured model at a summary point
    /// and compare it to a limiting drift field.
    DriftCheck {
        #[command(flatten)]
        config: ConfigArgs,
        /// Reference flow (default: the family's ballistic flow).
        #[arg(long, value_name = "NAME")]
        system: Option<String>,
        /// Summary point, comma separated
        /// (default: the configuration's warm-start summary).
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, value_name = "POINT")]
        at: Option<Vec<f64>>,
        /// Monte Carlo sample count.
        #[arg(long, default_value_t = 20000)]
        samples: usize,
    },

    /// Exact probability that K random head signs cover all four signed
    /// clusters, printed as `p/q decimal`.
    SuccessProb {
        /// Hidden-unit count.
        #[arg(long = "K")]
        k: usize,
        /// Cross-check the closed form against direct enumeration (K ≤ 12).
        #[arg(long)]
        enumerate: bool,
    },

    /// Run an ensemble and report sup-distances between its trajectories and
    /// the matching limiting flow.
    Compare {
        #[command(flatten)]
        config: ConfigArgs,
        #[command(flatten)]
        out: OutArgs,
        /// Worker threads for the ensemble (0 = all cores).
        #[arg(long, default_value_t = 0, value_name = "N")]
        threads: usize,
        /// Reference flow (default: the configuration's compare block).
        #[arg(long, value_name = "NAME")]
        system: Option<String>,
        /// Comparison window (default: the config's, else the simulated span).
        #[arg(long)]
        t_end: Option<f64>,
        /// Matching mode (default: the config's, else mean).
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
    },

    /// Fit lag-one autoregressive dynamics to a recorded summary coordinate
    /// across an ensemble.
    Ar1 {
        #[command(flatten)]
        config: ConfigArgs,
        /// Worker threads for the ensemble (0 = all cores).
        #[arg(long, default_value_t = 0, value_name = "N")]
        threads: usize,
        /// Coordinate to fit (default: the first schema entry).
        #[arg(long, value_name = "NAME")]
        coord: Option<String>,
        /// Multiply the series by √n before fitting (fluctuation scaling).
        #[arg(long)]
        scale_sqrt_n: bool,
    },
}
