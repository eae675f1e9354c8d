//! Cross-crate checks of the fixed-point taxonomy: stationary points must sit
//! exactly on the limiting flows, stable labels must agree with where those
//! flows actually converge, and stable records must attain the least value of
//! the flat-noise population loss within their family.

use proptest::prelude::*;
use sgdlab_fixedpoints::{
    bgmm_fixed_points, classify_endpoint, tensor_pca_fixed_points, xor_fixed_points,
    FixedPointRecord, Stability,
};
use sgdlab_limits::{bgmm_noiseless, rk4_integrate, tensor_ballistic, xor_noiseless, OdeSystem};
use sgdlab_models::{BgmmModel, SgdModel, XorGmmModel};

const LOG4: f64 = 1.3862943611198906;
const LOG15: f64 = 0.4054651081081644;

/// Largest sup-norm of the flow field over `per_set` representatives.
fn max_residual(sys: &OdeSystem, rec: &FixedPointRecord, per_set: usize) -> f64 {
    let mut worst = 0.0_f64;
    for rep in rec.representatives(per_set) {
        let rhs = sys.rhs(0.0, rep.values());
        for r in rhs {
            worst = worst.max(r.abs());
        }
    }
    worst
}

/// Population loss at the record's representatives; asserts the value is
/// constant across the set (it must be: every point of one record plays the
/// same role) and returns it.
fn phi_of(model: &dyn SgdModel, rec: &FixedPointRecord, per_set: usize) -> f64 {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for rep in rec.representatives(per_set) {
        let phi = model.population_loss(&rep).unwrap();
        lo = lo.min(phi);
        hi = hi.max(phi);
    }
    assert!(
        hi - lo <= 1e-12,
        "loss varies over '{}': {lo} vs {hi}",
        rec.label
    );
    lo
}

fn split_by_stability(
    model: &dyn SgdModel,
    records: &[FixedPointRecord],
    per_set: usize,
) -> (Vec<f64>, Vec<f64>) {
    let mut stable = Vec::new();
    let mut unstable = Vec::new();
    for rec in records {
        let phi = phi_of(model, rec, per_set);
        match rec.stability {
            Stability::Stable => stable.push(phi),
            Stability::Unstable => unstable.push(phi),
        }
    }
    (stable, unstable)
}

#[test]
fn bgmm_stable_points_attain_the_least_population_loss() {
    let model = BgmmModel::new(16, f64::INFINITY, 0.1).unwrap();
    let records = bgmm_fixed_points(0.1).unwrap();
    let (stable, unstable) = split_by_stability(&model, &records, 5);

    assert_eq!(stable.len(), 2);
    assert_eq!(unstable.len(), 3);
    let expected = (5.0_f64 / 4.0).ln() + 0.2 * LOG4;
    for phi in &stable {
        assert!((phi - expected).abs() < 1e-12, "stable loss {phi}");
    }
    let worst_stable = stable.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let best_unstable = unstable.iter().cloned().fold(f64::INFINITY, f64::min);
    assert!(
        worst_stable + 0.05 < best_unstable,
        "stable {worst_stable} vs unstable {best_unstable}"
    );

    // The origin sits at the top of this family's loss ordering.
    let origin = records.iter().find(|r| r.label.ends_with("origin")).unwrap();
    let phi0 = phi_of(&model, origin, 1);
    assert!((phi0 - std::f64::consts::LN_2).abs() < 1e-15);
}

#[test]
fn xor_stable_partitions_attain_the_least_population_loss() {
    let model = XorGmmModel::new(16, 4, f64::INFINITY, 0.1).unwrap();
    let (records, _) = xor_fixed_points(0.1, 4).unwrap();
    let (stable, unstable) = split_by_stability(&model, &records, 2);

    assert_eq!(stable.len(), 24);
    assert_eq!(unstable.len(), 15);
    let expected = (5.0_f64 / 3.0).ln() + 0.4 * LOG15;
    for phi in &stable {
        assert!((phi - expected).abs() < 1e-12, "stable loss {phi}");
    }
    let worst_stable = stable.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let best_unstable = unstable.iter().cloned().fold(f64::INFINITY, f64::min);
    assert!(worst_stable + 1e-3 < best_unstable);

    // Each additional covered direction lowers the loss by the same margin,
    // so the runner-up configurations miss exactly one direction.
    let per_direction = 0.25 * (std::f64::consts::LN_2 - (5.0_f64 / 3.0).ln()) - 0.1 * LOG15;
    assert!((best_unstable - worst_stable - per_direction).abs() < 1e-9);
}

#[test]
fn ballistic_flow_agrees_with_tensor_stability_labels() {
    let (k, lambda) = (3, 3.2);
    let records = tensor_pca_fixed_points(k, lambda, 1.0).unwrap();
    let threshold = records
        .iter()
        .find(|r| r.label == "unstable:+m_dagger")
        .unwrap()
        .representative()
        .values()[0];
    let sys = tensor_ballistic(k, lambda, 0.0, 1.0).unwrap();

    let above = rk4_integrate(&sys, &[threshold + 0.02, 1.0], 60.0, 1e-3, 1000).unwrap();
    assert_eq!(
        classify_endpoint(&above.endpoint(), &records, 1e-6),
        "stable:+m_star"
    );

    let below = rk4_integrate(&sys, &[threshold - 0.02, 1.0], 60.0, 1e-3, 1000).unwrap();
    assert_eq!(
        classify_endpoint(&below.endpoint(), &records, 1e-6),
        "stable:equator"
    );
}

#[test]
fn noiseless_flow_escapes_the_ring_closure() {
    // Start on the ring's axis endpoint, nudged so the second unit points at
    // the opposite class: the flow must leave the ring and settle on the
    // opposite-sign stable point.
    let records = bgmm_fixed_points(0.1).unwrap();
    let sys = bgmm_noiseless(0.1, None).unwrap();
    let s = LOG4.sqrt();
    let start = [s, -0.02, s, -0.02, 0.0, 0.0, 0.0];
    let traj = rk4_integrate(&sys, &start, 200.0, 1e-3, 10_000).unwrap();
    assert_eq!(
        classify_endpoint(&traj.endpoint(), &records, 1e-4),
        "stable:(+,-)"
    );
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn prop_tensor_representatives_are_stationary(
        k in 2u32..=5,
        lambda in 0.15..6.0,
        c_delta in 0.05..2.0,
    ) {
        let records = tensor_pca_fixed_points(k, lambda, c_delta).unwrap();
        let sys = tensor_ballistic(k, lambda, 0.0, c_delta).unwrap();
        for rec in &records {
            prop_assert!(max_residual(&sys, rec, 1) <= 1e-10, "{}", rec.label);
        }
    }

    #[test]
    fn prop_bgmm_representatives_are_stationary(alpha in 0.01..0.24) {
        let records = bgmm_fixed_points(alpha).unwrap();
        let sys = bgmm_noiseless(alpha, None).unwrap();
        for rec in &records {
            prop_assert!(max_residual(&sys, rec, 7) <= 1e-10, "{}", rec.label);
        }
    }
}

proptest! {
    // Each case enumerates the whole assignment lattice, so keep the count low.
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn prop_xor_representatives_are_stationary(
        alpha in 0.01..0.12,
        width in 4usize..=6,
    ) {
        let (records, _) = xor_fixed_points(alpha, width).unwrap();
        let sys = xor_noiseless(width, alpha, None).unwrap();
        for rec in &records {
            prop_assert!(max_residual(&sys, rec, 3) <= 1e-10, "{}", rec.label);
        }
    }
}
