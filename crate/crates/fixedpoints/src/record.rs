//! Labelled stationary sets of the limiting flows — isolated points, circular
//! arcs, and families indexed by unit-to-block assignments — together with
//! exact distance formulas used for endpoint classification.

use std::f64::consts::FRAC_PI_2;
use std::fmt;

use sgdlab_core::{Schema, SummaryVec};

/// Linear stability of a stationary set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stability {
    Stable,
    Unstable,
}

impl Stability {
    pub fn as_str(self) -> &'static str {
        match self {
            Stability::Stable => "stable",
            Stability::Unstable => "unstable",
        }
    }
}

impl fmt::Display for Stability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Destination of one hidden unit in a four-cluster-classifier stationary
/// configuration: idle, or tied to one signed cluster direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Block {
    Zero,
    MuPlus,
    MuMinus,
    NuPlus,
    NuMinus,
}

impl Block {
    pub const DIRECTIONAL: [Block; 4] = [
        Block::MuPlus,
        Block::MuMinus,
        Block::NuPlus,
        Block::NuMinus,
    ];

    /// Short name used in taxonomy labels.
    pub fn as_str(self) -> &'static str {
        match self {
            Block::Zero => "zero",
            Block::MuPlus => "mu+",
            Block::MuMinus => "mu-",
            Block::NuPlus => "nu+",
            Block::NuMinus => "nu-",
        }
    }

    /// Canonical signs `(ε_v, ε_m)` of the head weight and of the unit's
    /// active overlap coordinate: stationary units satisfy
    /// `(v_i, overlap_i) = (ε_v s_i, ε_m s_i)` with `s_i > 0`.
    pub fn signs(self) -> Option<(f64, f64)> {
        match self {
            Block::Zero => None,
            Block::MuPlus => Some((1.0, 1.0)),
            Block::MuMinus => Some((1.0, -1.0)),
            Block::NuPlus => Some((-1.0, 1.0)),
            Block::NuMinus => Some((-1.0, -1.0)),
        }
    }

    /// Whether the active overlap is the first (μ) center rather than the second.
    pub fn is_mu(self) -> bool {
        matches!(self, Block::MuPlus | Block::MuMinus)
    }
}

/// Geometric description of one stationary set.
#[derive(Debug, Clone)]
pub enum FixedPointSet {
    /// A single point, stored in the record's schema order.
    Point(Vec<f64>),
    /// Quarter arc of the two-unit classifier ring:
    /// `v = m = sign · radius · (cos θ, sin θ)`, `θ ∈ [0, π/2]`, with all
    /// second-layer overlaps zero.
    CircleArc { radius: f64, sign: f64 },
    /// Connected family of stationary sets of the four-cluster classifier.
    /// Every member assigns each unit to a block; the units of each nonempty
    /// directional block share ring mass `Σ s_i² = level` on the block's
    /// canonical signs, and all other coordinates vanish.
    PartitionBlocks {
        width: usize,
        level: f64,
        members: Vec<Vec<Block>>,
    },
}

/// One entry of the fixed-point catalogue.
#[derive(Debug, Clone)]
pub struct FixedPointRecord {
    /// Taxonomy label, e.g. `stable:+m_star` or `unstable:ring(+,+)`.
    pub label: String,
    pub stability: Stability,
    /// Coordinate schema of the ambient summary space.
    pub schema: Schema,
    pub set: FixedPointSet,
}

impl FixedPointRecord {
    /// A canonical point of the set (arc midpoint, equal ring masses).
    pub fn representative(&self) -> SummaryVec {
        match &self.set {
            FixedPointSet::Point(x) => self.vec(x.clone()),
            FixedPointSet::CircleArc { radius, sign } => {
                self.vec(arc_point(*radius, *sign, FRAC_PI_2 / 2.0))
            }
            FixedPointSet::PartitionBlocks {
                width,
                level,
                members,
            } => self.vec(partition_point(*width, *level, &members[0], None)),
        }
    }

    /// Up to `per_set` sampled points of the set: evenly spaced arc angles
    /// (endpoints included) or evenly strided members with equal ring masses.
    pub fn representatives(&self, per_set: usize) -> Vec<SummaryVec> {
        let per_set = per_set.max(1);
        match &self.set {
            FixedPointSet::Point(x) => vec![self.vec(x.clone())],
            FixedPointSet::CircleArc { radius, sign } => {
                let n = per_set.max(2);
                (0..n)
                    .map(|j| {
                        let theta = FRAC_PI_2 * j as f64 / (n - 1) as f64;
                        self.vec(arc_point(*radius, *sign, theta))
                    })
                    .collect()
            }
            FixedPointSet::PartitionBlocks {
                width,
                level,
                members,
            } => {
                let stride = (members.len() / per_set).max(1);
                members
                    .iter()
                    .step_by(stride)
                    .take(per_set)
                    .map(|a| self.vec(partition_point(*width, *level, a, None)))
                    .collect()
            }
        }
    }

    /// Euclidean distance from `u` to the set, `None` if the schema differs.
    pub fn distance_to(&self, u: &SummaryVec) -> Option<f64> {
        if *u.schema() != self.schema {
            return None;
        }
        let t = u.values();
        Some(match &self.set {
            FixedPointSet::Point(x) => t
                .iter()
                .zip(x)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt(),
            FixedPointSet::CircleArc { radius, sign } => arc_distance(t, *radius, *sign),
            FixedPointSet::PartitionBlocks {
                width,
                level,
                members,
            } => members
                .iter()
                .map(|a| member_distance(t, *width, *level, a))
                .fold(f64::INFINITY, f64::min),
        })
    }

    fn vec(&self, values: Vec<f64>) -> SummaryVec {
        SummaryVec::new(self.schema.clone(), values)
            .expect("record coordinates match the record schema")
    }
}

/// Arc point embedded in the seven summary coordinates `(v₁,v₂,m₁,m₂,R…)`.
fn arc_point(radius: f64, sign: f64, theta: f64) -> Vec<f64> {
    let c1 = sign * radius * theta.cos();
    let c2 = sign * radius * theta.sin();
    vec![c1, c2, c1, c2, 0.0, 0.0, 0.0]
}

/// Distance from `u = (v₁,v₂,m₁,m₂,R₁₁,R₁₂,R₂₂)` to the quarter arc.
///
/// Splitting the `(v, m)` part into the mean `w = sign·(v+m)/2` and the
/// difference leaves `d² = Σ R² + ‖v−m‖²/2 + 2·d(w, arc₊)²` with `arc₊` the
/// positive-quadrant arc of the given radius.
fn arc_distance(u: &[f64], radius: f64, sign: f64) -> f64 {
    let w = [
        sign * (u[0] + u[2]) / 2.0,
        sign * (u[1] + u[3]) / 2.0,
    ];
    let d_arc = positive_arc_distance(w, radius);
    let diff2 = (u[0] - u[2]).powi(2) + (u[1] - u[3]).powi(2);
    let r2 = u[4] * u[4] + u[5] * u[5] + u[6] * u[6];
    (r2 + diff2 / 2.0 + 2.0 * d_arc * d_arc).sqrt()
}

/// Planar distance to `{radius·(cos θ, sin θ) : θ ∈ [0, π/2]}`.
fn positive_arc_distance(w: [f64; 2], radius: f64) -> f64 {
    let d_end = |e: [f64; 2]| ((w[0] - e[0]).powi(2) + (w[1] - e[1]).powi(2)).sqrt();
    match (w[0] >= 0.0, w[1] >= 0.0) {
        (true, true) => (w[0].hypot(w[1]) - radius).abs(),
        (false, true) => d_end([0.0, radius]),
        (true, false) => d_end([radius, 0.0]),
        (false, false) => d_end([0.0, radius]).min(d_end([radius, 0.0])),
    }
}

/// A stationary point for one block assignment, in the packed coordinates
/// `(v, m_μ, m_ν, R_upper)` of the width-`width` classifier.
///
/// The units of each nonempty directional block split the ring mass `level`
/// in proportion to `weights` (equal split when `None`); idle units and all
/// `R` coordinates are zero.
pub fn partition_point(
    width: usize,
    level: f64,
    assignment: &[Block],
    weights: Option<&[f64]>,
) -> Vec<f64> {
    assert_eq!(assignment.len(), width, "one block per unit");
    let mut out = vec![0.0; 3 * width + width * (width + 1) / 2];
    for &b in Block::DIRECTIONAL.iter() {
        let total: f64 = assignment
            .iter()
            .enumerate()
            .filter(|(_, a)| **a == b)
            .map(|(i, _)| weights.map_or(1.0, |w| w[i]))
            .sum();
        if total == 0.0 {
            continue;
        }
        let (ev, em) = b.signs().expect("directional block");
        for (i, _) in assignment.iter().enumerate().filter(|(_, a)| **a == b) {
            let share = weights.map_or(1.0, |w| w[i]) / total;
            let s = (level * share).sqrt();
            out[i] = ev * s;
            let off = if b.is_mu() { width } else { 2 * width };
            out[off + i] = em * s;
        }
    }
    out
}

/// Distance from `u` to the stationary set of one block assignment.
fn member_distance(u: &[f64], width: usize, level: f64, assignment: &[Block]) -> f64 {
    let (off_mu, off_nu, off_r) = (width, 2 * width, 3 * width);
    let mut d2: f64 = u[off_r..].iter().map(|x| x * x).sum();
    for (i, b) in assignment.iter().enumerate() {
        if *b == Block::Zero {
            d2 += u[i] * u[i] + u[off_mu + i].powi(2) + u[off_nu + i].powi(2);
        }
    }
    for &b in Block::DIRECTIONAL.iter() {
        let (ev, em) = b.signs().expect("directional block");
        let off = if b.is_mu() { off_mu } else { off_nu };
        let off_other = if b.is_mu() { off_nu } else { off_mu };
        let mut sum_w2 = 0.0;
        let mut sum_wpos2 = 0.0;
        let mut w_max = f64::NEG_INFINITY;
        let mut occupied = false;
        for (i, _) in assignment.iter().enumerate().filter(|(_, a)| **a == b) {
            occupied = true;
            let w = (ev * u[i] + em * u[off + i]) / 2.0;
            d2 += (ev * u[i] - em * u[off + i]).powi(2) / 2.0 + u[off_other + i].powi(2);
            sum_w2 += w * w;
            if w > 0.0 {
                sum_wpos2 += w * w;
            }
            w_max = w_max.max(w);
        }
        if occupied {
            // Nearest point of the sphere ∩ positive-orthant ring to w: along
            // the positive part of w, or concentrated on the least-negative
            // coordinate when w has none.
            let best_inner = if sum_wpos2 > 0.0 {
                level.sqrt() * sum_wpos2.sqrt()
            } else {
                level.sqrt() * w_max
            };
            d2 += 2.0 * (sum_w2 + level - 2.0 * best_inner).max(0.0);
        }
    }
    d2.sqrt()
}
