//! XOR-type Gaussian-mixture classification with a width-K ReLU network.
//! Data come from four components centered at ±μ (label 1) and ±ν (label 0)
//! with covariance I/λ; summary statistics are the second layer, the overlaps
//! with both centers, and the orthogonal Gram matrix.

use nalgebra::DMatrix;
use sgdlab_core::math::log1p_exp;
use sgdlab_core::{RngStream, Schema, SummaryVec};

use crate::error::ModelError;
use crate::net;
use crate::tensor::check_schema;
use crate::{Datum, Family, SgdModel};

#[derive(Debug, Clone)]
pub struct XorGmmModel {
    n: usize,
    width: usize,
    lambda: f64,
    alpha: f64,
    mu: Vec<f64>,
    nu: Vec<f64>,
    schema: Schema,
}

impl XorGmmModel {
    /// Model with the canonical centers μ = e_1, ν = e_2. `lambda` may be
    /// `f64::INFINITY` for the zero-noise limit.
    pub fn new(n: usize, width: usize, lambda: f64, alpha: f64) -> Result<Self, ModelError> {
        let len = n.max(2);
        let mut mu = vec![0.0; len];
        let mut nu = vec![0.0; len];
        mu[0] = 1.0;
        nu[1] = 1.0;
        Self::with_centers(mu, nu, width, lambda, alpha)
    }

    pub fn with_centers(
        mu: Vec<f64>,
        nu: Vec<f64>,
        width: usize,
        lambda: f64,
        alpha: f64,
    ) -> Result<Self, ModelError> {
        let n = mu.len();
        if nu.len() != n {
            return Err(ModelError::DimensionMismatch {
                expected: n,
                got: nu.len(),
            });
        }
        if n < 2 {
            return Err(ModelError::InvalidParam(format!(
                "data dimension must be at least 2, got {n}"
            )));
        }
        if width < 4 {
            return Err(ModelError::InvalidParam(format!(
                "hidden width must be at least 4, got {width}"
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
        for (name, v) in [("mu", &mu), ("nu", &nu)] {
            let norm: f64 = v.iter().map(|a| a * a).sum::<f64>().sqrt();
            if (norm - 1.0).abs() > 1e-12 {
                return Err(ModelError::InvalidParam(format!(
                    "{name} must be a unit vector, got norm {norm}"
                )));
            }
        }
        let ip: f64 = mu.iter().zip(&nu).map(|(a, b)| a * b).sum();
        if ip.abs() > 1e-12 {
            return Err(ModelError::InvalidParam(format!(
                "mu and nu must be orthogonal, got inner product {ip}"
            )));
        }
        let mut names: Vec<String> = (1..=width).map(|i| format!("v{i}")).collect();
        names.extend((1..=width).map(|i| format!("m{i}_mu")));
        names.extend((1..=width).map(|i| format!("m{i}_nu")));
        for i in 1..=width {
            for j in i..=width {
                names.push(format!("R{i}{j}"));
            }
        }
        Ok(Self {
            n,
            width,
            lambda,
            alpha,
            mu,
            nu,
            schema: Schema::new(names),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    fn noise_scale(&self) -> f64 {
        (1.0 / self.lambda).sqrt()
    }

    /// Offsets of the summary blocks: (v, m_mu, m_nu, R upper triangle).
    pub fn block_offsets(&self) -> (usize, usize, usize, usize) {
        let k = self.width;
        (0, k, 2 * k, 3 * k)
    }
}

impl SgdModel for XorGmmModel {
    fn family(&self) -> Family {
        Family::XorGmm
    }

    fn dim(&self) -> usize {
        self.width + self.width * self.n
    }

    fn schema(&self) -> Schema {
        self.schema.clone()
    }

    fn sample_datum(&self, rng: &mut RngStream) -> Datum {
        // Four components with weight 1/4 each: (±μ, y=1), (±ν, y=0).
        let component = rng.below(4);
        let sign = if component % 2 == 0 { 1.0 } else { -1.0 };
        let (center, y) = if component < 2 {
            (&self.mu, 1.0)
        } else {
            (&self.nu, 0.0)
        };
        let scale = self.noise_scale();
        let x = center
            .iter()
            .map(|&c| sign * c + scale * rng.standard_normal())
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
        check_dims(self.dim(), x)?;
        check_dims(self.dim(), out)?;
        net::grad_into(x, self.width, self.n, y, data, self.alpha, out);
        Ok(())
    }

    fn loss(&self, x: &[f64], datum: &Datum) -> Result<f64, ModelError> {
        let (y, data) = labeled(datum, self.n)?;
        check_dims(self.dim(), x)?;
        Ok(net::loss(x, self.width, self.n, y, data, self.alpha))
    }

    fn summary(&self, x: &[f64]) -> Result<Vec<f64>, ModelError> {
        check_dims(self.dim(), x)?;
        let k = self.width;
        let (v, w) = net::split(x, k, self.n);
        let row = |i: usize| &w[i * self.n..(i + 1) * self.n];
        let m_mu: Vec<f64> = (0..k)
            .map(|i| row(i).iter().zip(&self.mu).map(|(a, b)| a * b).sum())
            .collect();
        let m_nu: Vec<f64> = (0..k)
            .map(|i| row(i).iter().zip(&self.nu).map(|(a, b)| a * b).sum())
            .collect();
        let mut out = Vec::with_capacity(3 * k + k * (k + 1) / 2);
        out.extend_from_slice(v);
        out.extend_from_slice(&m_mu);
        out.extend_from_slice(&m_nu);
        for i in 0..k {
            for j in i..k {
                let (wi, wj) = (row(i), row(j));
                let r: f64 = (0..self.n)
                    .map(|a| {
                        (wi[a] - m_mu[i] * self.mu[a] - m_nu[i] * self.nu[a])
                            * (wj[a] - m_mu[j] * self.mu[a] - m_nu[j] * self.nu[a])
                    })
                    .sum();
                out.push(r);
            }
        }
        Ok(out)
    }

    fn init_random(&self, rng: &mut RngStream) -> Vec<f64> {
        // v_i ~ N(0, 1), W_i ~ N(0, I_N/N).
        let w_scale = (1.0 / self.n as f64).sqrt();
        let mut x = Vec::with_capacity(self.dim());
        for _ in 0..self.width {
            x.push(rng.standard_normal());
        }
        for _ in 0..self.width * self.n {
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
        let k = self.width;
        let t = target.values();
        let (_, off_mu, off_nu, off_r) = self.block_offsets();
        let mut r = DMatrix::zeros(k, k);
        let mut pos = off_r;
        for i in 0..k {
            for j in i..k {
                r[(i, j)] = t[pos];
                r[(j, i)] = t[pos];
                pos += 1;
            }
        }
        let l = net::psd_factor(&r, 1e-10)?;
        let qs = net::isotropic_orthonormal(&[&self.mu, &self.nu], k, self.n, rng)?;
        let mut x = Vec::with_capacity(self.dim());
        x.extend_from_slice(&t[0..k]);
        for i in 0..k {
            for a in 0..self.n {
                let mut w_ia = t[off_mu + i] * self.mu[a] + t[off_nu + i] * self.nu[a];
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
        let k = self.width;
        let t = u.values();
        let (_, off_mu, off_nu, off_r) = self.block_offsets();
        let v = &t[0..k];
        let m_mu = &t[off_mu..off_mu + k];
        let m_nu = &t[off_nu..off_nu + k];
        let f = |m: &[f64], sign: f64| -> f64 {
            (0..k).map(|i| v[i] * (sign * m[i]).max(0.0)).sum()
        };
        let mut trace = 0.0;
        let mut pos = off_r;
        for i in 0..k {
            trace += t[pos];
            pos += k - i;
        }
        let sq = |s: &[f64]| s.iter().map(|a| a * a).sum::<f64>();
        let ridge = 0.5 * self.alpha * (sq(v) + sq(m_mu) + sq(m_nu) + trace);
        Ok(0.25
            * (log1p_exp(-f(m_mu, 1.0))
                + log1p_exp(-f(m_mu, -1.0))
                + log1p_exp(f(m_nu, 1.0))
                + log1p_exp(f(m_nu, -1.0)))
            + ridge)
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

fn check_dims(expected: usize, s: &[f64]) -> Result<(), ModelError> {
    if s.len() != expected {
        return Err(ModelError::DimensionMismatch {
            expected,
            got: s.len(),
        });
    }
    Ok(())
}
