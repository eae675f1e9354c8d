//! Stationary partitions of the four-cluster classifier's noiseless flow:
//! enumeration of unit-to-block assignments, connectivity of the resulting
//! stationary sets, stability labels, and the exact probability that a random
//! sign draw covers all four signed clusters.
//!
//! A stationary configuration assigns every hidden unit to one of five blocks
//! (idle, or one of the four signed cluster directions); the units of each
//! occupied directional block share ring mass Σ s_i² = C_α on canonical signs.
//! Two assignments are adjacent when one element can be moved between blocks
//! without emptying an occupied directional block and without landing in an
//! unoccupied one — exactly the moves realizable as continuous paths inside
//! the stationary variety, where a unit's mass shrinks to zero while its
//! former blockmates absorb the ring constraint.

use std::collections::HashMap;

use num_rational::Ratio;

use crate::error::FixedPointError;
use crate::record::{Block, FixedPointRecord, FixedPointSet, Stability};
use sgdlab_limits::{xor_noiseless, xor_ring_level};

/// Ridge level at and above which only the origin remains stationary.
pub const XOR_RIDGE_LIMIT: f64 = 0.125;

/// Growth rate of the origin's steepest cone direction is √2/8 − α; beyond
/// this ridge level the origin is attracting.
const ORIGIN_CONE_RATE: f64 = std::f64::consts::SQRT_2 / 8.0;

/// Largest width for which the 5^width assignment enumeration is performed.
const MAX_ENUM_WIDTH: usize = 8;

/// Summary of the connectivity pass over all stationary assignments.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConnectivityReport {
    /// Number of connected stationary components (= returned records).
    pub components: usize,
    /// Number of components labelled stable.
    pub stable_components: usize,
    /// Number of enumerated unit-to-block assignments.
    pub assignments: usize,
}

/// The stationary sets of the width-`width` classifier grouped into connected
/// components, together with the connectivity census.
///
/// For ridge `α ≥ 1/8` only the origin is stationary. Below that, all
/// `5^width` assignments are enumerated and merged under the adjacency rule;
/// a component is stable exactly when its members cover all four signed
/// clusters. Widths above 8 are rejected (the enumeration grows as 5^width).
pub fn xor_fixed_points(
    alpha: f64,
    width: usize,
) -> Result<(Vec<FixedPointRecord>, ConnectivityReport), FixedPointError> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(FixedPointError::InvalidInput(format!(
            "ridge coefficient must be positive and finite, got {alpha}"
        )));
    }
    if width < 4 {
        return Err(FixedPointError::InvalidInput(format!(
            "the four signed clusters need width ≥ 4, got {width}"
        )));
    }
    if width > MAX_ENUM_WIDTH {
        return Err(FixedPointError::InvalidInput(format!(
            "assignment enumeration supports width ≤ {MAX_ENUM_WIDTH}, got {width}"
        )));
    }
    let schema = xor_noiseless(width, alpha, None)?.schema();
    let dim = schema.len();

    if alpha >= XOR_RIDGE_LIMIT {
        let stability = if alpha >= ORIGIN_CONE_RATE {
            Stability::Stable
        } else {
            Stability::Unstable
        };
        let record = FixedPointRecord {
            label: format!("{stability}:origin"),
            stability,
            schema,
            set: FixedPointSet::Point(vec![0.0; dim]),
        };
        let report = ConnectivityReport {
            components: 1,
            stable_components: usize::from(stability == Stability::Stable),
            assignments: 1,
        };
        return Ok((vec![record], report));
    }

    let level = xor_ring_level(alpha)?;
    let n = 5usize.pow(width as u32);
    let pow5: Vec<usize> = (0..width).map(|i| 5usize.pow(i as u32)).collect();
    let mut uf = UnionFind::new(n);
    let mut digits = [0u8; MAX_ENUM_WIDTH];
    for code in 0..n {
        decode(code, width, &mut digits);
        let mut counts = [0u32; 5];
        for &d in &digits[..width] {
            counts[d as usize] += 1;
        }
        for i in 0..width {
            let from = digits[i] as usize;
            if from != 0 && counts[from] == 1 {
                continue; // the move would empty an occupied directional block
            }
            for to in 0..5 {
                if to == from || (to != 0 && counts[to] == 0) {
                    continue; // directional destinations must already be occupied
                }
                let neighbor = code + to * pow5[i] - from * pow5[i];
                uf.union(code, neighbor);
            }
        }
    }

    // Components ordered by smallest member code.
    let mut component_of_root: HashMap<usize, usize> = HashMap::new();
    let mut members: Vec<Vec<Vec<Block>>> = Vec::new();
    for code in 0..n {
        let root = uf.find(code);
        let id = *component_of_root.entry(root).or_insert_with(|| {
            members.push(Vec::new());
            members.len() - 1
        });
        decode(code, width, &mut digits);
        members[id].push(digits[..width].iter().map(|&d| block_from_digit(d)).collect());
    }

    let mut records: Vec<FixedPointRecord> = Vec::with_capacity(members.len());
    let mut label_uses: HashMap<String, usize> = HashMap::new();
    for component in members {
        let signature = block_signature(&component[0]);
        let stability = if signature == [true; 4] {
            Stability::Stable
        } else {
            Stability::Unstable
        };
        let mut label = component_label(&component, signature, stability);
        let uses = label_uses.entry(label.clone()).or_insert(0);
        *uses += 1;
        if *uses > 1 {
            label = format!("{label}#{uses}");
        }
        records.push(FixedPointRecord {
            label,
            stability,
            schema: schema.clone(),
            set: FixedPointSet::PartitionBlocks {
                width,
                level,
                members: component,
            },
        });
    }
    let stable_components = records
        .iter()
        .filter(|r| r.stability == Stability::Stable)
        .count();
    let report = ConnectivityReport {
        components: records.len(),
        stable_components,
        assignments: n,
    };
    Ok((records, report))
}

/// Exact probability that `width` independent units, each uniform over the
/// four signed clusters, cover all of them:
/// `4^{−width} Σ_{k=2}^{width−2} C(width,k) (2^k − 2) (2^{width−k} − 2)`,
/// summing over which units pick the first cluster pair and requiring both
/// signs on each side.
pub fn xor_success_probability(width: usize) -> Result<Ratio<u128>, FixedPointError> {
    if width < 4 {
        return Err(FixedPointError::InvalidInput(format!(
            "success probability needs width ≥ 4, got {width}"
        )));
    }
    if width > 60 {
        return Err(FixedPointError::InvalidInput(format!(
            "exact arithmetic supports width ≤ 60, got {width}"
        )));
    }
    let mut numer: u128 = 0;
    for k in 2..=width - 2 {
        numer += binomial(width as u128, k as u128)
            * ((1u128 << k) - 2)
            * ((1u128 << (width - k)) - 2);
    }
    Ok(Ratio::new(numer, 1u128 << (2 * width)))
}

/// Brute-force check of [`xor_success_probability`]: enumerate every joint
/// assignment of units to the four signed clusters and count the covering
/// ones.
///
/// Per unit, the initial signs `(v, overlap_μ, overlap_ν)` select a cluster
/// pair (through the head sign) and a side (through the matching overlap
/// sign), leaving the third sign irrelevant; the eight sign patterns therefore
/// collapse onto four equiprobable destinations, which is what is enumerated.
pub fn xor_success_probability_by_enumeration(
    width: usize,
) -> Result<Ratio<u128>, FixedPointError> {
    if !(4..=12).contains(&width) {
        return Err(FixedPointError::InvalidInput(format!(
            "enumeration supports widths 4..=12, got {width}"
        )));
    }
    let total: u64 = 1 << (2 * width);
    let mut covered: u64 = 0;
    for pattern in 0..total {
        let mut mask = 0u8;
        let mut p = pattern;
        for _ in 0..width {
            mask |= 1 << (p & 3);
            if mask == 0b1111 {
                covered += 1;
                break;
            }
            p >>= 2;
        }
    }
    Ok(Ratio::new(u128::from(covered), u128::from(total)))
}

/// Float value of an exact probability.
pub fn ratio_to_f64(r: &Ratio<u128>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

fn decode(code: usize, width: usize, digits: &mut [u8; MAX_ENUM_WIDTH]) {
    let mut c = code;
    for d in digits.iter_mut().take(width) {
        *d = (c % 5) as u8;
        c /= 5;
    }
}

fn block_from_digit(d: u8) -> Block {
    match d {
        0 => Block::Zero,
        1 => Block::MuPlus,
        2 => Block::MuMinus,
        3 => Block::NuPlus,
        _ => Block::NuMinus,
    }
}

/// Which directional blocks are occupied, in `Block::DIRECTIONAL` order.
fn block_signature(assignment: &[Block]) -> [bool; 4] {
    let mut sig = [false; 4];
    for (j, b) in Block::DIRECTIONAL.iter().enumerate() {
        sig[j] = assignment.iter().any(|a| a == b);
    }
    sig
}

fn component_label(
    component: &[Vec<Block>],
    signature: [bool; 4],
    stability: Stability,
) -> String {
    if signature == [false; 4] {
        return format!("{stability}:origin");
    }
    let first = &component[0];
    let rigid = component.len() == 1
        && Block::DIRECTIONAL
            .iter()
            .all(|b| first.iter().filter(|a| *a == b).count() == 1);
    if rigid {
        let unit_of = |b: Block| first.iter().position(|a| *a == b).unwrap() + 1;
        return format!(
            "{stability}:units[mu+={},mu-={},nu+={},nu-={}]",
            unit_of(Block::MuPlus),
            unit_of(Block::MuMinus),
            unit_of(Block::NuPlus),
            unit_of(Block::NuMinus),
        );
    }
    let parts: Vec<&str> = Block::DIRECTIONAL
        .iter()
        .zip(signature)
        .filter(|(_, s)| *s)
        .map(|(b, _)| b.as_str())
        .collect();
    format!("{stability}:span[{}]", parts.join(","))
}

fn binomial(n: u128, k: u128) -> u128 {
    let k = k.min(n - k);
    let mut c: u128 = 1;
    for i in 0..k {
        c = c * (n - i) / (i + 1);
    }
    c
}

struct UnionFind {
    parent: Vec<u32>,
    size: Vec<u32>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n as u32).collect(),
            size: vec![1; n],
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] as usize != x {
            let grand = self.parent[self.parent[x] as usize];
            self.parent[x] = grand;
            x = grand as usize;
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        let (big, small) = if self.size[ra] >= self.size[rb] {
            (ra, rb)
        } else {
            (rb, ra)
        };
        self.parent[small] = big as u32;
        self.size[big] += self.size[small];
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::record::partition_point;

    #[test]
    fn width_four_census() {
        let (records, report) = xor_fixed_points(0.1, 4).unwrap();
        assert_eq!(report.components, 39);
        assert_eq!(report.stable_components, 24);
        assert_eq!(report.assignments, 625);
        assert_eq!(records.len(), 39);
        let stable: Vec<&FixedPointRecord> = records
            .iter()
            .filter(|r| r.stability == Stability::Stable)
            .collect();
        assert_eq!(stable.len(), 24);
        for r in &stable {
            match &r.set {
                FixedPointSet::PartitionBlocks { members, .. } => assert_eq!(members.len(), 1),
                other => panic!("stable component should be a partition set, got {other:?}"),
            }
        }
        assert!(stable
            .iter()
            .any(|r| r.label == "stable:units[mu+=1,mu-=2,nu+=3,nu-=4]"));
        let mut labels: Vec<&str> = records.iter().map(|r| r.label.as_str()).collect();
        labels.sort_unstable();
        labels.dedup();
        assert_eq!(labels.len(), 39, "labels must be unique");
    }

    #[test]
    fn width_four_representatives_are_stationary() {
        let alpha = 0.1;
        let sys = xor_noiseless(4, alpha, None).unwrap();
        let (records, _) = xor_fixed_points(alpha, 4).unwrap();
        for r in &records {
            for u in r.representatives(3) {
                let res = sys
                    .rhs(0.0, u.values())
                    .iter()
                    .fold(0.0f64, |acc, x| acc.max(x.abs()));
                assert!(res <= 1e-12, "residual {res} on {}", r.label);
            }
        }
    }

    #[test]
    fn width_five_stable_sets_form_one_component() {
        let (records, report) = xor_fixed_points(0.1, 5).unwrap();
        assert_eq!(report.components, 16);
        assert_eq!(report.stable_components, 1);
        let stable = records
            .iter()
            .find(|r| r.stability == Stability::Stable)
            .unwrap();
        assert_eq!(stable.label, "stable:span[mu+,mu-,nu+,nu-]");
        match &stable.set {
            FixedPointSet::PartitionBlocks { members, .. } => {
                // All assignments of 5 units covering the four directional
                // blocks: 5⁵ − 4·4⁵ + 6·3⁵ − 4·2⁵ + 1 = 360.
                assert_eq!(members.len(), 360);
            }
            other => panic!("expected a partition set, got {other:?}"),
        }
    }

    #[test]
    fn width_eight_census() {
        let (records, report) = xor_fixed_points(0.1, 8).unwrap();
        assert_eq!(report.assignments, 390_625);
        assert_eq!(report.components, 16);
        assert_eq!(report.stable_components, 1);
        let stable = records
            .iter()
            .find(|r| r.stability == Stability::Stable)
            .unwrap();
        match &stable.set {
            FixedPointSet::PartitionBlocks { members, .. } => {
                assert_eq!(members.len(), 166_824);
            }
            other => panic!("expected a partition set, got {other:?}"),
        }
    }

    #[test]
    fn strong_ridge_collapses_to_the_origin() {
        let (records, report) = xor_fixed_points(0.2, 4).unwrap();
        assert_eq!(records.len(), 1);
        assert_eq!(records[0].label, "stable:origin");
        assert_eq!(report.stable_components, 1);

        // Between the stationary-collapse level 1/8 and the cone rate √2/8
        // the origin is the only stationary point yet still repels.
        let (records, report) = xor_fixed_points(0.15, 4).unwrap();
        assert_eq!(records[0].label, "unstable:origin");
        assert_eq!(report.stable_components, 0);

        assert!(xor_fixed_points(0.1, 3).is_err());
        assert!(xor_fixed_points(0.0, 4).is_err());
        assert!(xor_fixed_points(0.1, 9).is_err());
    }

    #[test]
    fn success_probability_exact_values() {
        assert_eq!(xor_success_probability(4).unwrap(), Ratio::new(3, 32));
        assert_eq!(xor_success_probability(5).unwrap(), Ratio::new(15, 64));
        assert_eq!(xor_success_probability(8).unwrap(), Ratio::new(5103, 8192));
        assert_eq!(ratio_to_f64(&Ratio::new(3, 32)), 0.09375);
        assert!(xor_success_probability(3).is_err());
        assert!(xor_success_probability(61).is_err());

        let mut prev = xor_success_probability(4).unwrap();
        for width in 5..=20 {
            let p = xor_success_probability(width).unwrap();
            assert!(p > prev, "probability must increase with width");
            prev = p;
        }
        assert!(ratio_to_f64(&xor_success_probability(60).unwrap()) > 0.999);
    }

    #[test]
    fn enumeration_matches_the_closed_form() {
        for width in 4..=9 {
            assert_eq!(
                xor_success_probability_by_enumeration(width).unwrap(),
                xor_success_probability(width).unwrap(),
                "width {width}"
            );
        }
        assert!(xor_success_probability_by_enumeration(13).is_err());
    }

    #[test]
    fn a_skewed_ring_configuration_is_stationary() {
        let (alpha, width) = (0.07, 5);
        let level = xor_ring_level(alpha).unwrap();
        let assignment = [
            Block::MuPlus,
            Block::MuPlus,
            Block::MuMinus,
            Block::NuPlus,
            Block::NuMinus,
        ];
        let weights = [0.3, 0.7, 1.0, 1.0, 1.0];
        let u = partition_point(width, level, &assignment, Some(&weights));
        let sys = xor_noiseless(width, alpha, None).unwrap();
        let res = sys
            .rhs(0.0, &u)
            .iter()
            .fold(0.0f64, |acc, x| acc.max(x.abs()));
        assert!(res <= 1e-12, "residual {res}");
    }
}
