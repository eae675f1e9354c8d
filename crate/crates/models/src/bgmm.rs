//! Binary Gaussian-mixture classification with a width-2 ReLU network:
//! X ~ N((2y−1)μ, I/λ), labels y ∈ {0,1}, trained with the logistic loss and
//! a ridge on both layers. Summary statistics are the second-layer weights,
//! the mean overlaps m_i = W_i·μ, and the orthogonal Gram matrix R⊥.

use nalgebra::DMatrix;
use sgdlab_core::math::log1p_exp;
use sgdlab_core::{RngStream, Schema, SummaryVec};

use crate::error::ModelError;
use crate::net;
use crate::tensor::check_schema;
use crate::{Datum, Family, SgdModel};

const K: usize = 2;

#[derive(Debug, Clone)]
pub struct BgmmModel {
    n: usize,
    lambda: f64,
    alpha: f64,
    mu: Vec<f64>,
    schema: Schema,
}

impl BgmmModel {
    /// Model with the canonical mean direction e_1. `lambda` may be
    /// `f64::INFINITY` for the zero-noise limit.
    pub fn new(n: usize, lambda: f64, alpha: f64) -> Result<Self, ModelError> {
        let mut mu = vec![0.0; n.max(1)];
        mu[0] = 1.0;
        Self::with_mean(mu, lambda, alpha)
    }

    pub fn with_mean(mu: Vec<f64>, lambda: f64, alpha: f64) -> Result<Self, ModelError> {
        let n = mu.len();
        if n < 2 {
            return Err(ModelError::InvalidParam(format!(
                "data dimension must be at least 2, got {n}"
            )));
        }
        if !(lambda > 0.0) {
            return Err(ModelError::InvalidParam(format!(
                "signal-to-noise ratio must be positive, got {lambda}"
            )));
        }
        if !(alpha >= 0.0) || !alpha.is_finite() {
            return Err(ModelError::InvalidParam(format!(
                "ridge coefficient must be nonnegative, got {alpha}"
            )));
        }
        let norm: f64 = mu.iter().map(|v| v * v).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(ModelError::InvalidParam(format!(
                "mean direction must be a unit vector, got norm {norm}"
            )));
        }
        Ok(Self {
            n,
            lambda,
            alpha,
            mu,
            schema: Schema::new(["v1", "v2", "m1", "m2", "R11", "R12", "R22"]),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    fn noise_scale(&self) -> f64 {
        // 1/√λ; exactly zero when λ = ∞.
        (1.0 / self.lambda).sqrt()
    }
}

impl SgdModel for BgmmModel {
    fn family(&self) -> Family {
        Family::Bgmm
    }

    fn dim(&self) -> usize {
        K + K * self.n
    }

    fn schema(&self) -> Schema {
        self.schema.clone()
    }

    fn sample_datum(&self, rng: &mut RngStream) -> Datum {
        let y = if rng.coin() { 1.0 } else { 0.0 };
        let sign = 2.0 * y - 1.0;
        let scale = self.noise_scale();
        let x = self
            .mu
            .iter()
            .map(|&mu_a| sign * mu_a + scale * rng.standard_normal())
            .collect();
        Datum::Labeled { y, x }
    }

    fn grad_loss_into(
        &self,
        x: &[f64],
        datum: &Datum,
        out: &mut [f64],
    ) -> Result<(), ModelError> {
        let (y, data) = labeled(datum, self.n)?;
        check_dims(self.dim(), x, out)?;
        net::grad_into(x, K, self.n, y, data, self.alpha, out);
        Ok(())
    }

    fn loss(&self, x: &[f64], datum: &Datum) -> Result<f64, ModelError> {
        let (y, data) = labeled(datum, self.n)?;
        check_dims(self.dim(), x, x)?;
        Ok(net::loss(x, K, self.n, y, data, self.alpha))
    }

    fn summary(&self, x: &[f64]) -> Result<Vec<f64>, ModelError> {
        check_dims(self.dim(), x, x)?;
        let (v, w) = net::split(x, K, self.n);
        let m: Vec<f64> = (0..K)
            .map(|i| {
                w[i * self.n..(i + 1) * self.n]
                    .iter()
                    .zip(&self.mu)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect();
        let mut out = vec![v[0], v[1], m[0], m[1]];
        for i in 0..K {
            for j in i..K {
                let wi = &w[i * self.n..(i + 1) * self.n];
                let wj = &w[j * self.n..(j + 1) * self.n];
                let r: f64 = wi
                    .iter()
                    .zip(wj)
                    .zip(&self.mu)
                    .map(|((a, b), mu_a)| (a - m[i] * mu_a) * (b - m[j] * mu_a))
                    .sum();
                out.push(r);
            }
        }
        debug_assert!(out[4] >= 0.0 && out[6] >= 0.0);
        Ok(out)
    }

    fn init_random(&self, rng: &mut RngStream) -> Vec<f64> {
        // v ~ N(0, I_2), W_i ~ N(0, I_N/(λN)).
        let w_scale = (1.0 / (self.lambda * self.n as f64)).sqrt();
        let mut x = Vec::with_capacity(self.dim());
        for _ in 0..K {
            x.push(rng.standard_normal());
        }
        for _ in 0..K * self.n {
            x.push(w_scale * rng.standard_normal());
        }
        x
    }

    fn warm_start(
        &self,
        target: &SummaryVec,
        rng: &mut RngStream,
    ) -> Result<Vec<f64>, ModelError> {
        check_schema(&self.schema, target)?;
        let t = target.values();
        let (v1, v2, m1, m2) = (t[0], t[1], t[2], t[3]);
        let r = DMatrix::from_row_slice(2, 2, &[t[4], t[5], t[5], t[6]]);
        let l = net::psd_factor(&r, 1e-10)?;
        let qs = net::isotropic_orthonormal(&[&self.mu], K, self.n, rng)?;
        let mut x = vec![v1, v2];
        for i in 0..K {
            let m_i = if i == 0 { m1 } else { m2 };
            for a in 0..self.n {
                let mut w_ia = m_i * self.mu[a];
                for (j, q) in qs.iter().enumerate() {
                    w_ia += l[(i, j)] * q[a];
                }
                x.push(w_ia);
            }
        }
        Ok(x)
    }

    fn population_loss(&self, u: &SummaryVec) -> Result<f64, ModelError> {
        check_schema(&self.schema, u)?;
        let t = u.values();
        let (v, m) = (&t[0..2], &t[2..4]);
        let f_plus: f64 = (0..K).map(|i| v[i] * m[i].max(0.0)).sum();
        let f_minus: f64 = (0..K).map(|i| v[i] * (-m[i]).max(0.0)).sum();
        let ridge = 0.5
            * self.alpha
            * (v[0] * v[0] + v[1] * v[1] + m[0] * m[0] + m[1] * m[1] + t[4] + t[6]);
        Ok(0.5 * (log1p_exp(-f_plus) + log1p_exp(f_minus)) + ridge)
    }
}

fn labeled(datum: &Datum, n: usize) -> Result<(f64, &[f64]), ModelError> {
    match datum {
        Datum::Labeled { y, x } if x.len() == n => Ok((*y, x)),
        Datum::Labeled { x, .. } => Err(ModelError::DimensionMismatch {
            expected: n,
            got: x.len(),
        }),
        Datum::Noise { .. } => Err(ModelError::WrongDatum("labeled mixture sample")),
    }
}

fn check_dims(expected: usize, x: &[f64], out: &[f64]) -> Result<(), ModelError> {
    for s in [x, out] {
        if s.len() != expected {
            return Err(ModelError::DimensionMismatch {
                expected,
                got: s.len(),
            });
        }
    }
    Ok(())
}
