//! Analytic gradients checked against central finite differences of the
//! per-sample losses.

use sgdlab_core::make_rng;
use sgdlab_models::{BgmmModel, Datum, SgdModel, TensorNoise, TensorPcaModel, XorGmmModel};

/// Central finite-difference gradient of `loss` at `x`.
fn fd_grad<M: SgdModel>(model: &M, x: &[f64], datum: &Datum, h: f64) -> Vec<f64> {
    let mut out = vec![0.0; x.len()];
    let mut xp = x.to_vec();
    for j in 0..x.len() {
        xp[j] = x[j] + h;
        let lp = model.loss(&xp, datum).unwrap();
        xp[j] = x[j] - h;
        let lm = model.loss(&xp, datum).unwrap();
        xp[j] = x[j];
        out[j] = (lp - lm) / (2.0 * h);
    }
    out
}

fn assert_close(analytic: &[f64], fd: &[f64], rel_tol: f64) {
    for (j, (a, f)) in analytic.iter().zip(fd).enumerate() {
        let scale = a.abs().max(1.0);
        assert!(
            (a - f).abs() <= rel_tol * scale,
            "coordinate {j}: analytic {a} vs finite-difference {f}"
        );
    }
}

#[test]
fn tensor_gradient_matches_finite_differences() {
    for (n, k) in [(8usize, 2u32), (8, 3)] {
        let model = TensorPcaModel::new(n, k, 1.3, 0.2, TensorNoise::Streaming).unwrap();
        let mut rng = make_rng(100 + k as u64, 0);
        let x: Vec<f64> = (0..n).map(|_| rng.standard_normal() * 0.5).collect();
        let datum = model.sample_datum(&mut rng);
        let analytic = model.grad_loss(&x, &datum).unwrap();
        let fd = fd_grad(&model, &x, &datum, 1e-5);
        assert_close(&analytic, &fd, 1e-6);
    }
}

#[test]
fn bgmm_gradient_matches_finite_differences_away_from_kinks() {
    let model = BgmmModel::new(20, 1.0, 0.1).unwrap();
    let mut rng = make_rng(200, 0);
    loop {
        let x = model.init_random(&mut rng);
        let datum = model.sample_datum(&mut rng);
        let Datum::Labeled { x: data, .. } = &datum else {
            unreachable!()
        };
        // Require every pre-activation to be bounded away from the ReLU kink.
        let clear = (0..2).all(|i| {
            let z: f64 = x[2 + i * 20..2 + (i + 1) * 20]
                .iter()
                .zip(data)
                .map(|(a, b)| a * b)
                .sum();
            z.abs() > 0.1
        });
        if !clear {
            continue;
        }
        let analytic = model.grad_loss(&x, &datum).unwrap();
        let fd = fd_grad(&model, &x, &datum, 1e-5);
        assert_close(&analytic, &fd, 1e-4);
        break;
    }
}

#[test]
fn xor_gradient_matches_finite_differences_away_from_kinks() {
    let width = 4;
    let n = 15;
    let model = XorGmmModel::new(n, width, 4.0, 0.1).unwrap();
    let mut rng = make_rng(300, 0);
    loop {
        let x = model.init_random(&mut rng);
        let datum = model.sample_datum(&mut rng);
        let Datum::Labeled { x: data, .. } = &datum else {
            unreachable!()
        };
        let clear = (0..width).all(|i| {
            let z: f64 = x[width + i * n..width + (i + 1) * n]
                .iter()
                .zip(data)
                .map(|(a, b)| a * b)
                .sum();
            z.abs() > 0.1
        });
        if !clear {
            continue;
        }
        let analytic = model.grad_loss(&x, &datum).unwrap();
        let fd = fd_grad(&model, &x, &datum, 1e-5);
        assert_close(&analytic, &fd, 1e-4);
        break;
    }
}

#[test]
fn factored_mode_declines_per_sample_loss() {
    let model = TensorPcaModel::new(8, 2, 1.0, 0.0, TensorNoise::Factored).unwrap();
    let err = model.loss(&vec![0.1; 8], &Datum::Noise { seed: 1 }).unwrap_err();
    assert!(err.to_string().contains("loss unavailable"));
}
