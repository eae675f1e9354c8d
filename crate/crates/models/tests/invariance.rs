//! Distributional and structural invariants: rotation invariance of the
//! tensor model, positive-semidefinite summary Gram blocks, and the SGD
//! driver's recording contract.

use nalgebra::DMatrix;
use proptest::prelude::*;
use sgdlab_core::{make_rng, RngStream, SummaryVec};
use sgdlab_models::{sgd_run, BgmmModel, SgdModel, TensorNoise, TensorPcaModel, XorGmmModel};

/// Random orthogonal matrix via QR of a Gaussian matrix, diagonal sign-fixed.
fn random_orthogonal(n: usize, rng: &mut RngStream) -> DMatrix<f64> {
    let g = DMatrix::from_fn(n, n, |_, _| rng.standard_normal());
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            for i in 0..n {
                q[(i, j)] = -q[(i, j)];
            }
        }
    }
    q
}

/// Two-sample Kolmogorov–Smirnov statistic.
fn ks_statistic(a: &mut [f64], b: &mut [f64]) -> f64 {
    a.sort_by(|x, y| x.partial_cmp(y).unwrap());
    b.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let (n, m) = (a.len(), b.len());
    let (mut i, mut j) = (0usize, 0usize);
    let mut d = 0.0f64;
    while i < n && j < m {
        let (fa, fb) = (i as f64 / n as f64, j as f64 / m as f64);
        d = d.max((fa - fb).abs());
        if a[i] <= b[j] {
            i += 1;
        } else {
            j += 1;
        }
    }
    d.max((1.0 - j as f64 / m as f64).max(1.0 - i as f64 / n as f64))
}

#[test]
fn tensor_model_is_rotation_invariant() {
    let n = 8;
    let mut qrng = make_rng(400, 0);
    let q = random_orthogonal(n, &mut qrng);

    let spike_a: Vec<f64> = {
        let mut e1 = vec![0.0; n];
        e1[0] = 1.0;
        e1
    };
    let spike_b: Vec<f64> = (0..n).map(|i| q[(i, 0)]).collect();
    let model_a =
        TensorPcaModel::with_spike(spike_a, 2, 1.1, 0.3, TensorNoise::Streaming).unwrap();
    let model_b =
        TensorPcaModel::with_spike(spike_b, 2, 1.1, 0.3, TensorNoise::Streaming).unwrap();

    let mut xrng = make_rng(401, 0);
    let x = model_a.init_random(&mut xrng);
    let qx: Vec<f64> = (0..n)
        .map(|i| (0..n).map(|j| q[(i, j)] * x[j]).sum())
        .collect();

    // Summaries agree exactly: both depend only on ⟨x, spike⟩ and ‖x‖.
    let ua = model_a.summary(&x).unwrap();
    let ub = model_b.summary(&qx).unwrap();
    assert!((ua[0] - ub[0]).abs() < 1e-12);
    assert!((ua[1] - ub[1]).abs() < 1e-12);

    // Per-sample losses agree in distribution (two-sample KS at level 0.01).
    let samples = 10_000;
    let mut rng_a = make_rng(402, 1);
    let mut rng_b = make_rng(402, 2);
    let mut losses_a: Vec<f64> = (0..samples)
        .map(|_| {
            let d = model_a.sample_datum(&mut rng_a);
            model_a.loss(&x, &d).unwrap()
        })
        .collect();
    let mut losses_b: Vec<f64> = (0..samples)
        .map(|_| {
            let d = model_b.sample_datum(&mut rng_b);
            model_b.loss(&qx, &d).unwrap()
        })
        .collect();
    let d = ks_statistic(&mut losses_a, &mut losses_b);
    // Critical value at level 0.01 for equal sample sizes: 1.628·√(2/samples).
    let critical = 1.628 * (2.0 / samples as f64).sqrt();
    assert!(d < critical, "KS statistic {d} ≥ {critical}");
}

#[test]
fn sgd_recording_contract() {
    let model = TensorPcaModel::new(16, 2, 1.2, 0.0, TensorNoise::Factored).unwrap();
    let mut rng = make_rng(500, 0);
    let x0 = model.init_random(&mut rng);

    // No steps → the single t=0 point.
    let still = sgd_run(&model, &x0, 0.1, 0, &mut rng, 1).unwrap();
    assert_eq!(still.times(), &[0.0]);
    assert_eq!(still.row(0), model.summary(&x0).unwrap().as_slice());

    // Stride recording keeps step 0, multiples, and the final step.
    let delta = 1.0 / 64.0;
    let traj = sgd_run(&model, &x0, delta, 7, &mut rng, 3).unwrap();
    assert_eq!(traj.times(), &[0.0, 3.0 / 64.0, 6.0 / 64.0, 7.0 / 64.0]);
}

#[test]
fn pca_run_approaches_the_stable_overlap() {
    // k=2, λ=1.2: from a warm start the run settles near (√(λ−1), 1).
    let n = 2000;
    let model = TensorPcaModel::new(n, 2, 1.2, 0.0, TensorNoise::Factored).unwrap();
    let mut rng = make_rng(600, 0);
    let target = SummaryVec::new(model.schema(), vec![0.3, 1.0]).unwrap();
    let x0 = model.warm_start(&target, &mut rng).unwrap();
    let traj = sgd_run(&model, &x0, 1.0 / n as f64, 10 * n, &mut rng, 20).unwrap();
    let end = traj.endpoint();
    let m_star = 0.2f64.sqrt();
    assert!(
        (end.values()[0] - m_star).abs() < 0.15,
        "m(10) = {} vs {m_star}",
        end.values()[0]
    );
    assert!(
        (end.values()[1] - 1.0).abs() < 0.2,
        "r_perp2(10) = {}",
        end.values()[1]
    );
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    // The orthogonal Gram block of a network summary is positive semidefinite.
    #[test]
    fn xor_summary_gram_block_is_psd(seed in 0u64..1000) {
        let width = 4;
        let n = 12;
        let model = XorGmmModel::new(n, width, 10.0, 0.1).unwrap();
        let mut rng = make_rng(seed, 3);
        let x = model.init_random(&mut rng);
        let u = model.summary(&x).unwrap();
        let (_, _, _, off_r) = model.block_offsets();
        let mut gram = DMatrix::zeros(width, width);
        let mut pos = off_r;
        for i in 0..width {
            for j in i..width {
                gram[(i, j)] = u[pos];
                gram[(j, i)] = u[pos];
                pos += 1;
            }
        }
        let eigs = gram.symmetric_eigen().eigenvalues;
        for e in eigs.iter() {
            prop_assert!(*e >= -1e-10, "negative eigenvalue {e}");
        }
    }

    // PCA orthogonal mass and bGMM Gram diagonals are nonnegative.
    #[test]
    fn nonnegative_summary_components(seed in 0u64..1000) {
        let pca = TensorPcaModel::new(10, 2, 1.0, 0.0, TensorNoise::Factored).unwrap();
        let mut rng = make_rng(seed, 4);
        let x = pca.init_random(&mut rng);
        let u = pca.summary(&x).unwrap();
        prop_assert!(u[1] >= 0.0);

        let bgmm = BgmmModel::new(10, 5.0, 0.1).unwrap();
        let xb = bgmm.init_random(&mut rng);
        let ub = bgmm.summary(&xb).unwrap();
        prop_assert!(ub[4] >= 0.0 && ub[6] >= 0.0);
        // 2×2 PSD: det ≥ 0 too.
        prop_assert!(ub[4] * ub[6] - ub[5] * ub[5] >= -1e-12);
    }
}
