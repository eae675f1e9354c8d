//! Stationary sets of the two-unit mixture classifier's noiseless flow.
//!
//! Below the ridge threshold α = 1/4 the catalogue contains the origin, two
//! quarter-circle rings of radius √C (head and overlap equal, both units on
//! the same side), and two isolated stable points with the units split across
//! the clusters; at and above the threshold only the origin survives.

use crate::error::FixedPointError;
use crate::record::{FixedPointRecord, FixedPointSet, Stability};
use sgdlab_limits::{bgmm_noiseless, bgmm_ring_level};

/// The stationary sets of the noiseless flow in `(v, m, R)` for ridge `α > 0`.
pub fn bgmm_fixed_points(alpha: f64) -> Result<Vec<FixedPointRecord>, FixedPointError> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(FixedPointError::InvalidInput(format!(
            "ridge coefficient must be positive and finite, got {alpha}"
        )));
    }
    let schema = bgmm_noiseless(alpha, None)?.schema();
    let record = |label: String, stability, set| FixedPointRecord {
        label,
        stability,
        schema: schema.clone(),
        set,
    };

    if alpha >= 0.25 {
        // The ring level C = −logit(2α) is no longer positive: everything has
        // collapsed into the origin (marginally stable at α = 1/4, where the
        // saturating gates still contract at cubic order).
        return Ok(vec![record(
            "stable:origin".into(),
            Stability::Stable,
            FixedPointSet::Point(vec![0.0; 7]),
        )]);
    }

    let radius = bgmm_ring_level(alpha)?.sqrt();
    let stable_point = |s: f64| vec![s, -s, s, -s, 0.0, 0.0, 0.0];
    Ok(vec![
        record(
            "unstable:origin".into(),
            Stability::Unstable,
            FixedPointSet::Point(vec![0.0; 7]),
        ),
        record(
            "unstable:ring(+,+)".into(),
            Stability::Unstable,
            FixedPointSet::CircleArc { radius, sign: 1.0 },
        ),
        record(
            "unstable:ring(-,-)".into(),
            Stability::Unstable,
            FixedPointSet::CircleArc {
                radius,
                sign: -1.0,
            },
        ),
        record(
            "stable:(+,-)".into(),
            Stability::Stable,
            FixedPointSet::Point(stable_point(radius)),
        ),
        record(
            "stable:(-,+)".into(),
            Stability::Stable,
            FixedPointSet::Point(stable_point(-radius)),
        ),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rhs_sup_norm(alpha: f64, u: &[f64]) -> f64 {
        let sys = bgmm_noiseless(alpha, None).unwrap();
        sys.rhs(0.0, u)
            .iter()
            .fold(0.0f64, |acc, x| acc.max(x.abs()))
    }

    #[test]
    fn taxonomy_below_the_threshold() {
        let fps = bgmm_fixed_points(0.1).unwrap();
        let labels: Vec<&str> = fps.iter().map(|r| r.label.as_str()).collect();
        assert_eq!(
            labels,
            [
                "unstable:origin",
                "unstable:ring(+,+)",
                "unstable:ring(-,-)",
                "stable:(+,-)",
                "stable:(-,+)"
            ]
        );
        let c = 4.0f64.ln();
        match &fps[1].set {
            FixedPointSet::CircleArc { radius, .. } => {
                assert!((radius * radius - c).abs() < 1e-15)
            }
            other => panic!("expected an arc, got {other:?}"),
        }
        let p = fps[3].representative();
        assert!((p.values()[0] - c.sqrt()).abs() < 1e-15);
        assert!((p.values()[1] + c.sqrt()).abs() < 1e-15);
        // The stable points sit at squared norm 2C, strictly outside the rings.
        let norm2 = p.values()[0].powi(2) + p.values()[1].powi(2);
        assert!((norm2 - 2.0 * c).abs() < 1e-14);
    }

    #[test]
    fn every_representative_is_stationary() {
        for alpha in [0.02, 0.1, 0.2] {
            let fps = bgmm_fixed_points(alpha).unwrap();
            for r in &fps {
                for u in r.representatives(7) {
                    let res = rhs_sup_norm(alpha, u.values());
                    assert!(
                        res <= 1e-12,
                        "residual {res} at {:?} (α = {alpha}, {})",
                        u.values(),
                        r.label
                    );
                }
            }
        }
    }

    #[test]
    fn only_the_origin_survives_a_strong_ridge() {
        for alpha in [0.25, 0.3, 0.45] {
            let fps = bgmm_fixed_points(alpha).unwrap();
            assert_eq!(fps.len(), 1);
            assert_eq!(fps[0].label, "stable:origin");
        }
        assert!(bgmm_fixed_points(0.0).is_err());
        assert!(bgmm_fixed_points(-0.1).is_err());
    }

    #[test]
    fn arc_endpoints_on_the_axes_are_stationary_too() {
        let alpha = 0.1;
        let radius = bgmm_ring_level(alpha).unwrap().sqrt();
        for u in [
            [radius, 0.0, radius, 0.0, 0.0, 0.0, 0.0],
            [0.0, -radius, 0.0, -radius, 0.0, 0.0, 0.0],
        ] {
            assert!(rhs_sup_norm(alpha, &u) <= 1e-12);
        }
    }
}
