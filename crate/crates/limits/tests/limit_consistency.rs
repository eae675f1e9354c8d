//! Cross-checks between the limiting systems and the finite-size models they
//! approximate: shared coordinate schemas, agreement between the averaged
//! drift and the expected one-step move of actual SGD, and trajectory-level
//! agreement at moderate size.

use std::f64::consts::PI;

use sgdlab_core::{make_rng, SummaryVec};
use sgdlab_limits::{
    bgmm_ballistic, bgmm_diffusive, bgmm_noiseless, bgmm_ring_level, rk4_integrate,
    tensor_ballistic, xor_ballistic, xor_diffusive, xor_noiseless, xor_ring_level, McConfig,
    OdeSystem,
};
use sgdlab_models::{sgd_run, BgmmModel, SgdModel, TensorNoise, TensorPcaModel, XorGmmModel};

#[test]
fn ballistic_schemas_match_the_model_schemas() {
    let mc = McConfig::default();
    let tensor = TensorPcaModel::new(50, 2, 1.2, 0.0, TensorNoise::Factored).unwrap();
    assert_eq!(
        tensor.schema(),
        tensor_ballistic(2, 1.2, 0.0, 1.0).unwrap().schema()
    );
    let bgmm = BgmmModel::new(50, 10.0, 0.1).unwrap();
    assert_eq!(
        bgmm.schema(),
        bgmm_ballistic(10.0, 0.1, 1.0, mc).unwrap().schema()
    );
    assert_eq!(bgmm.schema(), bgmm_noiseless(0.1, None).unwrap().schema());
    let xor = XorGmmModel::new(50, 5, 100.0, 0.1).unwrap();
    assert_eq!(
        xor.schema(),
        xor_ballistic(5, 100.0, 0.1, 1.0, mc).unwrap().schema()
    );
    assert_eq!(xor.schema(), xor_noiseless(5, 0.1, None).unwrap().schema());
}

/// Estimates E[u(x − δ∇L) − u(x)]/δ by direct simulation and returns the
/// per-coordinate means and standard errors.
fn one_step_expectation<M: SgdModel>(
    model: &M,
    x: &[f64],
    delta: f64,
    samples: usize,
    seed: u64,
) -> (Vec<f64>, Vec<f64>) {
    let dim_u = model.schema().len();
    let u0 = model.summary(x).unwrap();
    let mut rng = make_rng(seed, 1);
    let mut grad = vec![0.0; model.dim()];
    let mut moved = vec![0.0; model.dim()];
    let mut mean = vec![0.0; dim_u];
    let mut sumsq = vec![0.0; dim_u];
    for _ in 0..samples {
        let datum = model.sample_datum(&mut rng);
        model.grad_loss_into(x, &datum, &mut grad).unwrap();
        for (o, (xi, gi)) in moved.iter_mut().zip(x.iter().zip(&grad)) {
            *o = xi - delta * gi;
        }
        let u1 = model.summary(&moved).unwrap();
        for i in 0..dim_u {
            let d = (u1[i] - u0[i]) / delta;
            mean[i] += d;
            sumsq[i] += d * d;
        }
    }
    let n = samples as f64;
    for i in 0..dim_u {
        mean[i] /= n;
        let var = (sumsq[i] / n - mean[i] * mean[i]).max(0.0);
        sumsq[i] = (var / n).sqrt();
    }
    (mean, sumsq)
}

fn assert_drift_matches(sys: &OdeSystem, u0: &[f64], mean: &[f64], se: &[f64], slack: f64) {
    let h = sys.rhs(0.0, u0);
    for i in 0..u0.len() {
        let tol = slack + 6.0 * se[i];
        assert!(
            (mean[i] - h[i]).abs() <= tol,
            "coordinate {i} ({}): one-step {} vs drift {} (tol {tol})",
            sys.schema().names()[i].as_str(),
            mean[i],
            h[i]
        );
    }
}

#[test]
fn bgmm_drift_matches_one_step_sgd() {
    let n = 400;
    let (lambda, alpha) = (4.0, 0.1);
    let model = BgmmModel::new(n, lambda, alpha).unwrap();
    let target = SummaryVec::new(
        model.schema(),
        vec![0.3, -0.4, 0.5, 0.2, 0.6, 0.1, 0.3],
    )
    .unwrap();
    let mut rng = make_rng(2024, 0);
    let x = model.warm_start(&target, &mut rng).unwrap();
    let u0 = model.summary(&x).unwrap();
    let (mean, se) = one_step_expectation(&model, &x, 1.0 / n as f64, 120_000, 11);
    let sys = bgmm_ballistic(lambda, alpha, 1.0, McConfig::default()).unwrap();
    assert_drift_matches(&sys, &u0, &mean, &se, 8e-3);
}

#[test]
fn xor_drift_matches_one_step_sgd() {
    let n = 400;
    let (lambda, alpha) = (4.0, 0.1);
    let model = XorGmmModel::new(n, 4, lambda, alpha).unwrap();
    let mut target = vec![
        0.5, -0.3, 0.2, 0.7, // v
        0.4, -0.6, 0.3, 0.2, // m_mu
        -0.2, 0.5, -0.4, 0.6, // m_nu
    ];
    // A generic PSD orthogonal overlap block, packed upper-triangular.
    let r = [
        [0.50, 0.10, 0.05, 0.02],
        [0.10, 0.40, 0.08, 0.03],
        [0.05, 0.08, 0.60, 0.10],
        [0.02, 0.03, 0.10, 0.45],
    ];
    for i in 0..4 {
        for j in i..4 {
            target.push(r[i][j]);
        }
    }
    let target = SummaryVec::new(model.schema(), target).unwrap();
    let mut rng = make_rng(2025, 0);
    let x = model.warm_start(&target, &mut rng).unwrap();
    let u0 = model.summary(&x).unwrap();
    let (mean, se) = one_step_expectation(&model, &x, 1.0 / n as f64, 80_000, 12);
    let sys = xor_ballistic(4, lambda, alpha, 1.0, McConfig::default()).unwrap();
    assert_drift_matches(&sys, &u0, &mean, &se, 8e-3);
}

#[test]
fn tensor_sgd_ensemble_tracks_the_ballistic_flow() {
    let n = 500;
    let (k, lambda) = (2, 1.5);
    let delta = 1.0 / n as f64;
    let t_end = 2.0;
    let steps = (t_end / delta) as usize;
    let model = TensorPcaModel::new(n, k, lambda, 0.0, TensorNoise::Factored).unwrap();
    let target = SummaryVec::new(model.schema(), vec![0.4, 1.0]).unwrap();

    let runs = 8;
    let mut sum = [0.0; 2];
    for run in 0..runs {
        let mut rng = make_rng(99, run);
        let x0 = model.warm_start(&target, &mut rng).unwrap();
        let traj = sgd_run(&model, &x0, delta, steps, &mut rng, steps).unwrap();
        let end = traj.endpoint();
        sum[0] += end.values()[0];
        sum[1] += end.values()[1];
    }
    let mean = [sum[0] / runs as f64, sum[1] / runs as f64];

    let sys = tensor_ballistic(k, lambda, 0.0, 1.0).unwrap();
    let ode = rk4_integrate(&sys, &[0.4, 1.0], t_end, 1e-3, usize::MAX).unwrap();
    let end = ode.endpoint();
    assert!(
        (mean[0] - end.values()[0]).abs() < 0.06,
        "overlap: ensemble {} vs flow {}",
        mean[0],
        end.values()[0]
    );
    assert!(
        (mean[1] - end.values()[1]).abs() < 0.06,
        "orthogonal mass: ensemble {} vs flow {}",
        mean[1],
        end.values()[1]
    );
}

#[test]
fn bgmm_sgd_tracks_the_noiseless_flow_at_high_snr() {
    let n = 500;
    let (lambda, alpha) = (100.0, 0.1);
    let delta = 1.0 / n as f64;
    let t_end = 2.0;
    let steps = (t_end / delta) as usize;
    let model = BgmmModel::new(n, lambda, alpha).unwrap();
    let start = vec![0.6, -0.5, 0.4, 0.5, 0.0, 0.0, 0.0];
    let target = SummaryVec::new(model.schema(), start.clone()).unwrap();

    let runs = 6;
    let mut mean = vec![0.0; 7];
    for run in 0..runs {
        let mut rng = make_rng(4242, run);
        let x0 = model.warm_start(&target, &mut rng).unwrap();
        let traj = sgd_run(&model, &x0, delta, steps, &mut rng, steps).unwrap();
        for (m, v) in mean.iter_mut().zip(traj.endpoint().values()) {
            *m += v / runs as f64;
        }
    }

    let sys = bgmm_noiseless(alpha, None).unwrap();
    let ode = rk4_integrate(&sys, &start, t_end, 1e-3, usize::MAX).unwrap();
    let end = ode.endpoint();
    for i in 0..7 {
        assert!(
            (mean[i] - end.values()[i]).abs() < 0.1,
            "coordinate {i}: ensemble {} vs flow {}",
            mean[i],
            end.values()[i]
        );
    }
}

#[test]
fn diffusive_covariances_are_psd_with_expected_rank() {
    let mut rng = make_rng(31, 0);
    for _ in 0..200 {
        let alpha = 0.02 + 0.2 * rng.uniform();
        let radius = bgmm_ring_level(alpha).unwrap().sqrt();
        let theta = 0.5 * PI * rng.uniform();
        let a = [radius * theta.cos(), radius * theta.sin()];
        let sys = bgmm_diffusive(alpha, a).unwrap();
        let cov = sys.covariance(0.0, &[0.0; 7]);
        let eigs = cov.symmetric_eigen().eigenvalues;
        assert!(eigs.iter().all(|e| *e >= -1e-10));
        assert_eq!(eigs.iter().filter(|e| e.abs() > 1e-8).count(), 1);
    }
    for _ in 0..200 {
        let alpha = 0.01 + 0.11 * rng.uniform();
        let radius = xor_ring_level(alpha).unwrap().sqrt();
        let t_mu = 0.5 * PI * rng.uniform();
        let t_nu = 2.0 * PI * rng.uniform();
        let a_mu = [radius * t_mu.cos(), radius * t_mu.sin()];
        let a_nu = [radius * t_nu.cos(), radius * t_nu.sin()];
        let sys = xor_diffusive(alpha, a_mu, a_nu).unwrap();
        let cov = sys.covariance(0.0, &[0.0; 18]);
        let eigs = cov.symmetric_eigen().eigenvalues;
        assert!(eigs.iter().all(|e| *e >= -1e-10));
        assert_eq!(eigs.iter().filter(|e| e.abs() > 1e-8).count(), 2);
    }
}
