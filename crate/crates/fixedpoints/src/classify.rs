//! Endpoint classification against a fixed-point catalogue.

use sgdlab_core::SummaryVec;

use crate::record::FixedPointRecord;

/// Label returned when no catalogue set lies within reach.
pub const UNRESOLVED: &str = "unresolved";

/// Taxonomy label of the nearest fixed-point set within distance `eps` of
/// `u`, or `"unresolved"`.
///
/// Records whose schema differs from `u`'s are skipped; ties go to the
/// earliest record in the list.
pub fn classify_endpoint(u: &SummaryVec, fps: &[FixedPointRecord], eps: f64) -> String {
    let mut best: Option<(f64, &FixedPointRecord)> = None;
    for record in fps {
        if let Some(d) = record.distance_to(u) {
            if d <= eps && best.as_ref().map_or(true, |(bd, _)| d < *bd) {
                best = Some((d, record));
            }
        }
    }
    best.map_or_else(|| UNRESOLVED.to_string(), |(_, r)| r.label.clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bgmm::bgmm_fixed_points;
    use crate::tensor::tensor_pca_fixed_points;
    use crate::xor::xor_fixed_points;
    use sgdlab_core::Schema;

    #[test]
    fn exact_tensor_endpoint_gets_the_stable_label() {
        let fps = tensor_pca_fixed_points(2, 1.2, 1.0).unwrap();
        let schema = fps[0].schema.clone();
        let u = SummaryVec::new(schema, vec![0.2f64.sqrt(), 1.0]).unwrap();
        assert_eq!(classify_endpoint(&u, &fps, 0.05), "stable:+m_star");
    }

    #[test]
    fn near_miss_classifies_and_far_point_does_not() {
        let fps = bgmm_fixed_points(0.1).unwrap();
        let schema = fps[0].schema.clone();
        let close = SummaryVec::new(
            schema.clone(),
            vec![1.17, -1.18, 1.17, -1.18, 0.0, 0.0, 0.0],
        )
        .unwrap();
        assert_eq!(classify_endpoint(&close, &fps, 0.05), "stable:(+,-)");
        let far = SummaryVec::new(schema, vec![3.0, 3.0, -2.0, 0.5, 1.0, 0.0, 1.0]).unwrap();
        assert_eq!(classify_endpoint(&far, &fps, 0.05), UNRESOLVED);
    }

    #[test]
    fn ring_points_resolve_to_their_arc() {
        let fps = bgmm_fixed_points(0.1).unwrap();
        let schema = fps[0].schema.clone();
        let r = 4.0f64.ln().sqrt();
        let (c1, c2) = (r * 0.6f64.cos(), r * 0.6f64.sin());
        let u = SummaryVec::new(schema, vec![c1, c2, c1, c2, 0.01, 0.0, 0.0]).unwrap();
        assert_eq!(classify_endpoint(&u, &fps, 0.05), "unstable:ring(+,+)");
    }

    #[test]
    fn xor_singleton_endpoints_resolve_to_their_permutation() {
        let (fps, _) = xor_fixed_points(0.1, 4).unwrap();
        let stable = fps
            .iter()
            .find(|r| r.label == "stable:units[mu+=2,mu-=4,nu+=1,nu-=3]")
            .unwrap();
        let mut u = stable.representative().into_values();
        u[0] += 0.02;
        u[6] -= 0.015;
        let u = SummaryVec::new(stable.schema.clone(), u).unwrap();
        assert_eq!(
            classify_endpoint(&u, &fps, 0.05),
            "stable:units[mu+=2,mu-=4,nu+=1,nu-=3]"
        );
    }

    #[test]
    fn mismatched_schemas_are_skipped() {
        let fps = tensor_pca_fixed_points(2, 1.2, 1.0).unwrap();
        let u = SummaryVec::new(Schema::new(["a", "b"]), vec![0.2f64.sqrt(), 1.0]).unwrap();
        assert_eq!(classify_endpoint(&u, &fps, 0.05), UNRESOLVED);
    }
}
