//! The three model families studied by the laboratory — spiked tensor PCA and
//! two two-layer Gaussian-mixture classifiers — behind one trait: data
//! samplers, per-sample losses and gradients, summary-statistic maps, closed
//! form population losses, and the online SGD driver itself.

pub mod bgmm;
pub mod error;
mod net;
pub mod tensor;
pub mod xor;

use sgdlab_core::{RngStream, Schema, SummaryVec, Trajectory};

pub use bgmm::BgmmModel;
pub use error::ModelError;
pub use tensor::{TensorNoise, TensorPcaModel};
pub use xor::XorGmmModel;

/// Model family tag carried by parameter points and configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    TensorPca,
    Bgmm,
    XorGmm,
}

impl std::fmt::Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Family::TensorPca => "tensor-pca",
            Family::Bgmm => "bgmm",
            Family::XorGmm => "xor-gmm",
        })
    }
}

/// A flat parameter vector tagged with the family it belongs to
/// (x ∈ R^n for PCA, (v, W) flattened for the networks).
#[derive(Debug, Clone, PartialEq)]
pub struct ParamPoint {
    pub family: Family,
    pub x: Vec<f64>,
}

impl ParamPoint {
    pub fn new(family: Family, x: Vec<f64>) -> Self {
        Self { family, x }
    }
}

/// One observation fed to SGD.
#[derive(Debug, Clone, PartialEq)]
pub enum Datum {
    /// Seed from which a tensor model regenerates its Gaussian noise draw.
    Noise { seed: u64 },
    /// Labeled mixture sample; `y` is 0 or 1.
    Labeled { y: f64, x: Vec<f64> },
}

/// Common interface over the model families.
pub trait SgdModel {
    fn family(&self) -> Family;

    /// Flat parameter dimension.
    fn dim(&self) -> usize;

    /// Names of the summary-statistic coordinates.
    fn schema(&self) -> Schema;

    /// Draws one fresh observation.
    fn sample_datum(&self, rng: &mut RngStream) -> Datum;

    /// Writes the analytic per-sample gradient at `x` into `out`.
    fn grad_loss_into(&self, x: &[f64], datum: &Datum, out: &mut [f64])
        -> Result<(), ModelError>;

    /// Per-sample loss at `x` (any additive term independent of `x` is dropped).
    fn loss(&self, x: &[f64], datum: &Datum) -> Result<f64, ModelError>;

    /// Summary statistics of `x`, ordered as in [`SgdModel::schema`].
    fn summary(&self, x: &[f64]) -> Result<Vec<f64>, ModelError>;

    /// Cold start drawn from the family's reference initialization.
    fn init_random(&self, rng: &mut RngStream) -> Vec<f64>;

    /// Lifts summary-coordinate targets to a parameter point, drawing the
    /// orthogonal components isotropically at random.
    fn warm_start(&self, target: &SummaryVec, rng: &mut RngStream)
        -> Result<Vec<f64>, ModelError>;

    /// Closed-form population loss at a summary point. For the mixture models
    /// this is the zero-noise (λ=∞) form, which is exact when the model's λ is
    /// infinite and the λ→∞ limit otherwise.
    fn population_loss(&self, u: &SummaryVec) -> Result<f64, ModelError>;

    /// Allocating convenience wrapper around [`SgdModel::grad_loss_into`].
    fn grad_loss(&self, x: &[f64], datum: &Datum) -> Result<Vec<f64>, ModelError> {
        let mut out = vec![0.0; self.dim()];
        self.grad_loss_into(x, datum, &mut out)?;
        Ok(out)
    }

    /// Summary statistics packaged with the model's schema.
    fn summary_vec(&self, x: &[f64]) -> Result<SummaryVec, ModelError> {
        Ok(SummaryVec::new(self.schema(), self.summary(x)?)?)
    }
}

/// Enum dispatch over the three families, for callers configured at runtime.
#[derive(Debug, Clone)]
pub enum AnyModel {
    Tensor(TensorPcaModel),
    Bgmm(BgmmModel),
    Xor(XorGmmModel),
}

macro_rules! delegate {
    ($self:ident, $m:ident, $body:expr) => {
        match $self {
            AnyModel::Tensor($m) => $body,
            AnyModel::Bgmm($m) => $body,
            AnyModel::Xor($m) => $body,
        }
    };
}

impl SgdModel for AnyModel {
    fn family(&self) -> Family {
        delegate!(self, m, m.family())
    }
    fn dim(&self) -> usize {
        delegate!(self, m, m.dim())
    }
    fn schema(&self) -> Schema {
        delegate!(self, m, m.schema())
    }
    fn sample_datum(&self, rng: &mut RngStream) -> Datum {
        delegate!(self, m, m.sample_datum(rng))
    }
    fn grad_loss_into(&self, x: &[f64], d: &Datum, out: &mut [f64]) -> Result<(), ModelError> {
        delegate!(self, m, m.grad_loss_into(x, d, out))
    }
    fn loss(&self, x: &[f64], d: &Datum) -> Result<f64, ModelError> {
        delegate!(self, m, m.loss(x, d))
    }
    fn summary(&self, x: &[f64]) -> Result<Vec<f64>, ModelError> {
        delegate!(self, m, m.summary(x))
    }
    fn init_random(&self, rng: &mut RngStream) -> Vec<f64> {
        delegate!(self, m, m.init_random(rng))
    }
    fn warm_start(&self, t: &SummaryVec, rng: &mut RngStream) -> Result<Vec<f64>, ModelError> {
        delegate!(self, m, m.warm_start(t, rng))
    }
    fn population_loss(&self, u: &SummaryVec) -> Result<f64, ModelError> {
        delegate!(self, m, m.population_loss(u))
    }
}

/// Online SGD: `X_ℓ = X_{ℓ-1} − δ ∇L(X_{ℓ-1}, Y_ℓ)` with a fresh datum every
/// step, recording summaries at `t = ℓδ` every `record_stride` steps (step 0
/// and the final step always included).
///
/// A non-finite iterate aborts the run with [`ModelError::Diverged`] carrying
/// the offending step index.
pub fn sgd_run<M: SgdModel + ?Sized>(
    model: &M,
    x0: &[f64],
    delta: f64,
    steps: usize,
    rng: &mut RngStream,
    record_stride: usize,
) -> Result<Trajectory, ModelError> {
    if x0.len() != model.dim() {
        return Err(ModelError::DimensionMismatch {
            expected: model.dim(),
            got: x0.len(),
        });
    }
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(ModelError::InvalidParam(format!(
            "step size must be positive and finite, got {delta}"
        )));
    }
    let stride = record_stride.max(1);

    let mut x = x0.to_vec();
    let mut grad = vec![0.0; x.len()];
    let mut times = vec![0.0];
    let mut rows = vec![model.summary(&x)?];

    for step in 1..=steps {
        let datum = model.sample_datum(rng);
        model.grad_loss_into(&x, &datum, &mut grad)?;
        for (xi, gi) in x.iter_mut().zip(&grad) {
            *xi -= delta * gi;
        }
        if !x.iter().all(|v| v.is_finite()) {
            return Err(ModelError::Diverged { step });
        }
        if step % stride == 0 || step == steps {
            times.push(step as f64 * delta);
            rows.push(model.summary(&x)?);
        }
    }

    Ok(Trajectory::from_rows(model.schema(), times, rows)?)
}
