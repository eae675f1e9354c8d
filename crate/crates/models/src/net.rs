//! Shared machinery for the two-layer ReLU classifiers: forward pass,
//! logistic-loss gradients, and warm-start lifting of Gram-matrix targets.
//!
//! Parameter layout is `[v (K entries), W row-major (K×N)]`; the network
//! output is F(X) = Σ_i v_i relu(W_i·X) and the per-sample objective is the
//! binary cross-entropy of σ(F) against y plus a ridge on both layers.

use nalgebra::DMatrix;
use sgdlab_core::math::{log1p_exp, sigmoid};
use sgdlab_core::RngStream;

use crate::error::ModelError;

pub(crate) fn split(x: &[f64], k: usize, n: usize) -> (&[f64], &[f64]) {
    debug_assert_eq!(x.len(), k + k * n);
    x.split_at(k)
}

pub(crate) fn split_mut(x: &mut [f64], k: usize) -> (&mut [f64], &mut [f64]) {
    x.split_at_mut(k)
}

/// Writes the analytic gradient of the per-sample objective into `out`.
pub(crate) fn grad_into(
    x: &[f64],
    k: usize,
    n: usize,
    y: f64,
    data: &[f64],
    alpha: f64,
    out: &mut [f64],
) {
    let (v, w) = split(x, k, n);
    let mut f = 0.0;
    let mut z = vec![0.0; k];
    for i in 0..k {
        let zi: f64 = w[i * n..(i + 1) * n]
            .iter()
            .zip(data)
            .map(|(a, b)| a * b)
            .sum();
        z[i] = zi;
        if zi > 0.0 {
            f += v[i] * zi;
        }
    }
    let s = sigmoid(f) - y;
    let (ov, ow) = split_mut(out, k);
    for i in 0..k {
        // ∇v_i = relu(z_i)·s + α v_i; ∇W_i = v_i 1{z_i ≥ 0} s X + α W_i.
        ov[i] = z[i].max(0.0) * s + alpha * v[i];
        let coef = if z[i] >= 0.0 { v[i] * s } else { 0.0 };
        let row = &mut ow[i * n..(i + 1) * n];
        for (o, (wa, xa)) in row.iter_mut().zip(w[i * n..(i + 1) * n].iter().zip(data)) {
            *o = coef * xa + alpha * wa;
        }
    }
}

/// Per-sample objective value matching [`grad_into`].
pub(crate) fn loss(x: &[f64], k: usize, n: usize, y: f64, data: &[f64], alpha: f64) -> f64 {
    let (v, w) = split(x, k, n);
    let mut f = 0.0;
    for i in 0..k {
        let zi: f64 = w[i * n..(i + 1) * n]
            .iter()
            .zip(data)
            .map(|(a, b)| a * b)
            .sum();
        if zi > 0.0 {
            f += v[i] * zi;
        }
    }
    let ridge: f64 = x.iter().map(|a| a * a).sum::<f64>() * 0.5 * alpha;
    log1p_exp((1.0 - 2.0 * y) * f) + ridge
}

/// Symmetric PSD factor L with L·Lᵀ = R, clamping eigenvalues in [−tol, 0] to
/// zero and rejecting anything more negative.
pub(crate) fn psd_factor(r: &DMatrix<f64>, tol: f64) -> Result<DMatrix<f64>, ModelError> {
    let eig = r.clone().symmetric_eigen();
    let mut vals = eig.eigenvalues.clone();
    for v in vals.iter_mut() {
        if *v < -tol {
            return Err(ModelError::InvalidParam(format!(
                "Gram-matrix target is not positive semidefinite (eigenvalue {v})"
            )));
        }
        *v = v.max(0.0).sqrt();
    }
    let q = eig.eigenvectors;
    Ok(&q * DMatrix::from_diagonal(&vals) * q.transpose())
}

/// Draws `count` orthonormal vectors in R^n orthogonal to every row of `fixed`.
pub(crate) fn isotropic_orthonormal(
    fixed: &[&[f64]],
    count: usize,
    n: usize,
    rng: &mut RngStream,
) -> Result<Vec<Vec<f64>>, ModelError> {
    if fixed.len() + count > n {
        return Err(ModelError::InvalidParam(format!(
            "cannot fit {count} orthonormal directions orthogonal to {} vectors in R^{n}",
            fixed.len()
        )));
    }
    let mut basis: Vec<Vec<f64>> = fixed.iter().map(|f| f.to_vec()).collect();
    let mut fresh = Vec::with_capacity(count);
    while fresh.len() < count {
        let mut g: Vec<f64> = (0..n).map(|_| rng.standard_normal()).collect();
        for b in &basis {
            let proj: f64 = g.iter().zip(b).map(|(a, c)| a * c).sum();
            for (gi, bi) in g.iter_mut().zip(b) {
                *gi -= proj * bi;
            }
        }
        let norm: f64 = g.iter().map(|a| a * a).sum::<f64>().sqrt();
        if norm < 1e-8 {
            continue; // essentially-dependent draw; retry
        }
        for gi in g.iter_mut() {
            *gi /= norm;
        }
        basis.push(g.clone());
        fresh.push(g);
    }
    Ok(fresh)
}
