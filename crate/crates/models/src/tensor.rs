//! Spiked tensor PCA: recover a planted unit vector v from λ v^{⊗k} plus an
//! i.i.d. Gaussian noise tensor, by online SGD on the rank-one fit objective
//! with a ridge term. Summary statistics are the spike overlap m = ⟨x, v⟩ and
//! the squared orthogonal mass r_⊥².

use sgdlab_core::{make_rng, RngStream, Schema, SummaryVec};

use crate::error::ModelError;
use crate::{Datum, Family, SgdModel};

/// RNG stream index reserved for regenerating datum noise from its seed,
/// disjoint from the small indices used for per-run streams.
const NOISE_STREAM: u64 = u64::MAX;

/// Largest explicit tensor we are willing to materialize or stream (n^k entries).
const MAX_EXPLICIT_ENTRIES: u128 = 1 << 24;

/// How the per-sample gradient of the noise term −2⟨W, x^{⊗k}⟩ is produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TensorNoise {
    /// Draw the gradient's exact Gaussian law directly: mean zero, covariance
    /// c_xx·xxᵀ + c_id·I, via one n-vector and one scalar normal. O(n) per
    /// sample; the production path.
    Factored,
    /// Materialize the full n^k i.i.d. tensor and contract it slot by slot.
    /// Cross-check oracle for small n.
    Materialized,
    /// Regenerate the same n^k entries in the same order as `Materialized`
    /// without storing them, accumulating the contraction on the fly.
    Streaming,
}

#[derive(Debug, Clone)]
pub struct TensorPcaModel {
    n: usize,
    k: u32,
    lambda: f64,
    alpha: f64,
    spike: Vec<f64>,
    noise: TensorNoise,
    schema: Schema,
}

impl TensorPcaModel {
    /// Model with the canonical spike e_1.
    pub fn new(
        n: usize,
        k: u32,
        lambda: f64,
        alpha: f64,
        noise: TensorNoise,
    ) -> Result<Self, ModelError> {
        let mut spike = vec![0.0; n];
        if n > 0 {
            spike[0] = 1.0;
        }
        Self::with_spike(spike, k, lambda, alpha, noise)
    }

    /// Model with an explicit unit spike vector.
    pub fn with_spike(
        spike: Vec<f64>,
        k: u32,
        lambda: f64,
        alpha: f64,
        noise: TensorNoise,
    ) -> Result<Self, ModelError> {
        let n = spike.len();
        if n < 2 {
            return Err(ModelError::InvalidParam(format!(
                "ambient dimension must be at least 2, got {n}"
            )));
        }
        if k < 2 {
            return Err(ModelError::InvalidParam(format!(
                "tensor order must be at least 2, got {k}"
            )));
        }
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(ModelError::InvalidParam(format!(
                "signal-to-noise ratio must be positive and finite, got {lambda}"
            )));
        }
        if !(alpha >= 0.0) || !alpha.is_finite() {
            return Err(ModelError::InvalidParam(format!(
                "ridge coefficient must be nonnegative, got {alpha}"
            )));
        }
        let norm2: f64 = spike.iter().map(|v| v * v).sum();
        if (norm2.sqrt() - 1.0).abs() > 1e-12 {
            return Err(ModelError::InvalidParam(format!(
                "spike must be a unit vector, got norm {}",
                norm2.sqrt()
            )));
        }
        if noise != TensorNoise::Factored && explicit_entries(n, k) > MAX_EXPLICIT_ENTRIES {
            return Err(ModelError::TensorTooLarge { n, k });
        }
        Ok(Self {
            n,
            k,
            lambda,
            alpha,
            spike,
            noise,
            schema: Schema::new(["m", "r_perp2"]),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn spike(&self) -> &[f64] {
        &self.spike
    }

    pub fn noise_mode(&self) -> TensorNoise {
        self.noise
    }

    /// Covariance of the noise-gradient in factored form: Cov = c_xx·xxᵀ + c_id·I
    /// with c_xx = 4k(k−1)R^{2k−4} and c_id = 4kR^{2k−2}, R² = ‖x‖².
    pub fn noise_covariance_factors(&self, x: &[f64]) -> (f64, f64) {
        let r2: f64 = x.iter().map(|v| v * v).sum();
        let k = self.k as f64;
        let c_xx = 4.0 * k * (k - 1.0) * powi_nn(r2, self.k as i32 - 2);
        let c_id = 4.0 * k * powi_nn(r2, self.k as i32 - 1);
        (c_xx, c_id)
    }

    /// Adds the noise-term gradient for the given datum seed into `out`.
    fn add_noise_grad(&self, x: &[f64], seed: u64, out: &mut [f64]) {
        match self.noise {
            TensorNoise::Factored => {
                let (c_xx, c_id) = self.noise_covariance_factors(x);
                let (s_xx, s_id) = (c_xx.sqrt(), c_id.sqrt());
                let mut nrng = make_rng(seed, NOISE_STREAM);
                let zeta = nrng.standard_normal();
                for (o, xi) in out.iter_mut().zip(x) {
                    *o += s_id * nrng.standard_normal() + s_xx * zeta * xi;
                }
            }
            TensorNoise::Materialized => {
                let g = materialize_tensor(self.n, self.k, seed);
                add_contraction_grad_materialized(&g, x, self.n, self.k as usize, out);
            }
            TensorNoise::Streaming => {
                add_contraction_grad_streaming(seed, x, self.n, self.k as usize, out);
            }
        }
    }
}

impl SgdModel for TensorPcaModel {
    fn family(&self) -> Family {
        Family::TensorPca
    }

    fn dim(&self) -> usize {
        self.n
    }

    fn schema(&self) -> Schema {
        self.schema.clone()
    }

    fn sample_datum(&self, rng: &mut RngStream) -> Datum {
        Datum::Noise {
            seed: rng.fresh_seed(),
        }
    }

    fn grad_loss_into(
        &self,
        x: &[f64],
        datum: &Datum,
        out: &mut [f64],
    ) -> Result<(), ModelError> {
        check_dim(self.n, x)?;
        check_dim(self.n, out)?;
        let seed = match datum {
            Datum::Noise { seed } => *seed,
            Datum::Labeled { .. } => return Err(ModelError::WrongDatum("tensor noise seed")),
        };
        let m: f64 = dot(x, &self.spike);
        let r2: f64 = dot(x, x);
        let k = self.k as f64;
        // ∇[−2λm^k + R^{2k} + (α/2)R²] = −2λk m^{k−1} v + (2k R^{2(k−1)} + α) x
        let spike_coef = -2.0 * self.lambda * k * powi_nn(m, self.k as i32 - 1);
        let x_coef = 2.0 * k * powi_nn(r2, self.k as i32 - 1) + self.alpha;
        for ((o, vi), xi) in out.iter_mut().zip(&self.spike).zip(x) {
            *o = spike_coef * vi + x_coef * xi;
        }
        self.add_noise_grad(x, seed, out);
        Ok(())
    }

    fn loss(&self, x: &[f64], datum: &Datum) -> Result<f64, ModelError> {
        check_dim(self.n, x)?;
        let seed = match datum {
            Datum::Noise { seed } => *seed,
            Datum::Labeled { .. } => return Err(ModelError::WrongDatum("tensor noise seed")),
        };
        let inner = match self.noise {
            TensorNoise::Factored => {
                return Err(ModelError::LossUnavailable(
                    "the factored sampler draws the gradient directly; the per-sample \
                     objective requires an explicit noise tensor",
                ))
            }
            TensorNoise::Materialized => {
                let g = materialize_tensor(self.n, self.k, seed);
                contract_full(&g, x, self.n, self.k as usize)
            }
            TensorNoise::Streaming => contract_full_streaming(seed, x, self.n, self.k as usize),
        };
        let m: f64 = dot(x, &self.spike);
        let r2: f64 = dot(x, x);
        Ok(-2.0 * inner - 2.0 * self.lambda * powi_nn(m, self.k as i32)
            + powi_nn(r2, self.k as i32)
            + 0.5 * self.alpha * r2)
    }

    fn summary(&self, x: &[f64]) -> Result<Vec<f64>, ModelError> {
        check_dim(self.n, x)?;
        let m = dot(x, &self.spike);
        let r_perp2: f64 = x
            .iter()
            .zip(&self.spike)
            .map(|(xi, vi)| {
                let d = xi - m * vi;
                d * d
            })
            .sum();
        Ok(vec![m, r_perp2])
    }

    fn init_random(&self, rng: &mut RngStream) -> Vec<f64> {
        // x ~ N(0, I_n / n)
        let scale = 1.0 / (self.n as f64).sqrt();
        (0..self.n).map(|_| scale * rng.standard_normal()).collect()
    }

    fn warm_start(
        &self,
        target: &SummaryVec,
        rng: &mut RngStream,
    ) -> Result<Vec<f64>, ModelError> {
        check_schema(&self.schema, target)?;
        let m = target.values()[0];
        let r_perp2 = target.values()[1];
        if r_perp2 < 0.0 {
            return Err(ModelError::InvalidParam(format!(
                "r_perp2 must be nonnegative, got {r_perp2}"
            )));
        }
        // Unit direction orthogonal to the spike, drawn isotropically.
        let mut w: Vec<f64> = (0..self.n).map(|_| rng.standard_normal()).collect();
        let proj = dot(&w, &self.spike);
        for (wi, vi) in w.iter_mut().zip(&self.spike) {
            *wi -= proj * vi;
        }
        let norm = dot(&w, &w).sqrt();
        let r = r_perp2.sqrt();
        Ok(self
            .spike
            .iter()
            .zip(&w)
            .map(|(vi, wi)| m * vi + r * wi / norm)
            .collect())
    }

    fn population_loss(&self, u: &SummaryVec) -> Result<f64, ModelError> {
        check_schema(&self.schema, u)?;
        let m = u.values()[0];
        let r2 = m * m + u.values()[1];
        Ok(-2.0 * self.lambda * powi_nn(m, self.k as i32) + powi_nn(r2, self.k as i32)
            + 0.5 * self.alpha * r2)
    }
}

fn explicit_entries(n: usize, k: u32) -> u128 {
    (n as u128).saturating_pow(k)
}

/// x^p for p ≥ 0 with the 0^0 = 1 convention (needed at k = 2).
fn powi_nn(x: f64, p: i32) -> f64 {
    debug_assert!(p >= 0);
    x.powi(p)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn check_dim(expected: usize, x: &[f64]) -> Result<(), ModelError> {
    if x.len() != expected {
        return Err(ModelError::DimensionMismatch {
            expected,
            got: x.len(),
        });
    }
    Ok(())
}

pub(crate) fn check_schema(expected: &Schema, u: &SummaryVec) -> Result<(), ModelError> {
    if u.schema() != expected {
        return Err(ModelError::InvalidParam(format!(
            "summary schema mismatch: expected {expected}, got {}",
            u.schema()
        )));
    }
    Ok(())
}

/// Draws the n^k tensor entries in flat lexicographic order.
fn materialize_tensor(n: usize, k: u32, seed: u64) -> Vec<f64> {
    let len = n.pow(k);
    let mut nrng = make_rng(seed, NOISE_STREAM);
    let mut g = vec![0.0; len];
    nrng.fill_standard_normal(&mut g);
    g
}

/// Contracts the first slot: out[r] = Σ_i x[i] · t[i·stride + r].
fn contract_first(t: &[f64], x: &[f64], n: usize) -> Vec<f64> {
    let stride = t.len() / n;
    let mut out = vec![0.0; stride];
    for (i, xi) in x.iter().enumerate() {
        let block = &t[i * stride..(i + 1) * stride];
        for (o, b) in out.iter_mut().zip(block) {
            *o += xi * b;
        }
    }
    out
}

/// Contracts the last slot: out[q] = Σ_i t[q·n + i] · x[i].
fn contract_last(t: &[f64], x: &[f64], n: usize) -> Vec<f64> {
    t.chunks_exact(n).map(|row| dot(row, x)).collect()
}

/// ⟨G, x^{⊗k}⟩ for a materialized tensor.
fn contract_full(g: &[f64], x: &[f64], n: usize, k: usize) -> f64 {
    let mut cur = g.to_vec();
    for _ in 0..k {
        cur = contract_last(&cur, x, n);
    }
    debug_assert_eq!(cur.len(), 1);
    cur[0]
}

/// Adds ∇(−2⟨G, x^{⊗k}⟩) computed from the stored tensor: for each slot p,
/// contract every other slot with x and accumulate −2 times the result.
fn add_contraction_grad_materialized(g: &[f64], x: &[f64], n: usize, k: usize, out: &mut [f64]) {
    for p in 0..k {
        // Contract the p slots before the free one, then the k−1−p after it.
        let mut cur = g.to_vec();
        for _ in 0..p {
            cur = contract_first(&cur, x, n);
        }
        while cur.len() > n {
            cur = contract_last(&cur, x, n);
        }
        for (o, c) in out.iter_mut().zip(&cur) {
            *o -= 2.0 * c;
        }
    }
}

/// Walks the tensor entries in the `materialize_tensor` order without storing
/// them, accumulating the same gradient via per-entry prefix/suffix products.
fn add_contraction_grad_streaming(seed: u64, x: &[f64], n: usize, k: usize, out: &mut [f64]) {
    let mut nrng = make_rng(seed, NOISE_STREAM);
    let mut idx = vec![0usize; k];
    let mut prefix = vec![1.0f64; k + 1];
    let mut suffix = vec![1.0f64; k + 1];
    let total = n.pow(k as u32);
    for flat in 0..total {
        decode_index(flat, n, &mut idx);
        let g = nrng.standard_normal();
        // prefix[p] = Π_{q<p} x[idx_q], suffix[p] = Π_{q>p} x[idx_q]
        for p in 0..k {
            prefix[p + 1] = prefix[p] * x[idx[p]];
        }
        suffix[k] = 1.0;
        for p in (0..k).rev() {
            suffix[p] = suffix[p + 1] * x[idx[p]];
        }
        for p in 0..k {
            out[idx[p]] -= 2.0 * g * prefix[p] * suffix[p + 1];
        }
    }
}

/// ⟨G, x^{⊗k}⟩ in the streaming order.
fn contract_full_streaming(seed: u64, x: &[f64], n: usize, k: usize) -> f64 {
    let mut nrng = make_rng(seed, NOISE_STREAM);
    let mut idx = vec![0usize; k];
    let total = n.pow(k as u32);
    let mut acc = 0.0;
    for flat in 0..total {
        decode_index(flat, n, &mut idx);
        let g = nrng.standard_normal();
        acc += g * idx.iter().map(|&i| x[i]).product::<f64>();
    }
    acc
}

/// Decodes a flat index into k base-n digits, most significant first, matching
/// the nested-loop order of the materialized layout.
fn decode_index(mut flat: usize, n: usize, idx: &mut [usize]) {
    for d in idx.iter_mut().rev() {
        *d = flat % n;
        flat /= n;
    }
}
