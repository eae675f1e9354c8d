//! Stationary points of the spiked-tensor ballistic flow: the critical signal
//! strength, root finding for the stationary-radius equation, and stability
//! labels.
//!
//! With `ρ = m² + r_⊥²`, nonzero stationary overlaps solve
//! `ψ(ρ) = λ^{−2/(k−2)} ρ^{2(k−1)/(k−2)} − ρ + c_δ = 0` on `r_⊥² = c_δ`;
//! `ψ` is strictly convex, so there are at most two roots `ρ_† ≤ ρ_⋆` and they
//! exist exactly when λ exceeds the critical value.

use crate::error::FixedPointError;
use crate::record::{FixedPointRecord, FixedPointSet, Stability};
use sgdlab_limits::tensor_ballistic;

/// Target on |ψ| at returned roots; in regions where double precision cannot
/// reach it, bisection stops at bracket exhaustion instead (a few ulps of ρ).
const PSI_TOL: f64 = 1e-15;

/// Critical signal strength `(c_δ/k)^{k/2} (2k−2)^{k−1} / (k−2)^{(k−2)/2}`.
///
/// At `k = 2` the last factor is `0⁰ = 1` (the IEEE `powf` convention, which is
/// also the intended continuation), giving `λ_c = c_δ`.
pub fn tensor_pca_lambda_c(k: u32, c_delta: f64) -> Result<f64, FixedPointError> {
    validate(k, c_delta)?;
    let kf = k as f64;
    Ok((c_delta / kf).powf(kf / 2.0) * (2.0 * kf - 2.0).powi(k as i32 - 1)
        / (kf - 2.0).powf((kf - 2.0) / 2.0))
}

/// The stationary points of the ridge-free ballistic flow in `(m, r_⊥²)`.
///
/// Always contains the origin and the equator point `(0, c_δ)`; above the
/// critical signal strength it also contains the nonzero overlaps
/// `m = √(ρ − c_δ)` for each root of ψ, mirrored to `±m` when `k` is even
/// (for odd `k` the flow has no negative stationary overlaps).
pub fn tensor_pca_fixed_points(
    k: u32,
    lambda: f64,
    c_delta: f64,
) -> Result<Vec<FixedPointRecord>, FixedPointError> {
    validate(k, c_delta)?;
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(FixedPointError::InvalidInput(format!(
            "signal strength must be positive and finite, got {lambda}"
        )));
    }
    let schema = tensor_ballistic(k, lambda, 0.0, c_delta)?.schema();
    let point = |label: &str, stability: Stability, m: f64, r_perp2: f64| FixedPointRecord {
        label: format!("{}:{label}", stability.as_str()),
        stability,
        schema: schema.clone(),
        set: FixedPointSet::Point(vec![m, r_perp2]),
    };

    let mut out = vec![point("origin", Stability::Unstable, 0.0, 0.0)];
    // The equator attracts whenever the aligned drive vanishes to first order
    // (k ≥ 3) or is too weak (k = 2, λ ≤ λ_c = c_δ; cubically stable at equality).
    let equator_stable = k >= 3 || lambda <= c_delta;
    out.push(point(
        "equator",
        if equator_stable {
            Stability::Stable
        } else {
            Stability::Unstable
        },
        0.0,
        c_delta,
    ));

    let mut nonzero = Vec::new();
    if k == 2 {
        if lambda > c_delta {
            nonzero.push(((lambda - c_delta).sqrt(), Stability::Stable, "m_star"));
        }
    } else if let Some((rho_dagger, rho_star)) = psi_roots(k, lambda, c_delta) {
        nonzero.push((
            (rho_dagger - c_delta).max(0.0).sqrt(),
            Stability::Unstable,
            "m_dagger",
        ));
        nonzero.push((
            (rho_star - c_delta).max(0.0).sqrt(),
            Stability::Stable,
            "m_star",
        ));
    }
    for (m, stability, name) in nonzero {
        out.push(point(&format!("+{name}"), stability, m, c_delta));
        if k % 2 == 0 {
            out.push(point(&format!("-{name}"), stability, -m, c_delta));
        }
    }
    Ok(out)
}

fn validate(k: u32, c_delta: f64) -> Result<(), FixedPointError> {
    if k < 2 {
        return Err(FixedPointError::InvalidInput(format!(
            "tensor order must be at least 2, got {k}"
        )));
    }
    if !(c_delta > 0.0) || !c_delta.is_finite() {
        return Err(FixedPointError::InvalidInput(format!(
            "injected-mass level must be positive and finite, got {c_delta}"
        )));
    }
    Ok(())
}

fn psi(k: u32, lambda: f64, c_delta: f64, rho: f64) -> f64 {
    let kf = k as f64;
    lambda.powf(-2.0 / (kf - 2.0)) * rho.powf(2.0 * (kf - 1.0) / (kf - 2.0)) - rho + c_delta
}

/// Both roots of ψ above `c_δ` for `k ≥ 3`, or `None` below criticality.
///
/// The minimizer is located by golden-section (ψ is strictly convex); each
/// root is then pinned by bisection to |ψ| ≤ 1e-13.
fn psi_roots(k: u32, lambda: f64, c_delta: f64) -> Option<(f64, f64)> {
    let f = |rho: f64| psi(k, lambda, c_delta, rho);

    // Bracket the minimizer: extend to the right while ψ still decreases.
    let mut hi = c_delta + 1.0;
    while f(2.0 * hi) < f(hi) && hi < 1e300 {
        hi *= 2.0;
    }
    let rho_min = golden_section_min(&f, c_delta, 2.0 * hi);
    let psi_min = f(rho_min);
    if psi_min > 0.0 {
        return None;
    }

    let rho_dagger = bisect(&f, c_delta, rho_min);
    let mut upper = rho_min.max(c_delta) + 1.0;
    while f(upper) <= 0.0 && upper < 1e300 {
        upper *= 2.0;
    }
    let rho_star = bisect(&f, rho_min, upper);
    Some((rho_dagger, rho_star))
}

fn golden_section_min(f: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..200 {
        if b - a <= 1e-14 * (1.0 + b.abs()) {
            break;
        }
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2);
        }
    }
    0.5 * (a + b)
}

/// Bisection on a bracket with `f(a)` and `f(b)` of opposite (or zero) sign.
fn bisect(f: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let mut fa = f(a);
    let fb = f(b);
    if fa == 0.0 {
        return a;
    }
    if fb == 0.0 {
        return b;
    }
    debug_assert!((fa > 0.0) != (fb > 0.0), "bisection bracket must straddle 0");
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        let fm = f(mid);
        if fm.abs() <= PSI_TOL || b - a <= f64::EPSILON * (1.0 + b.abs()) {
            return mid;
        }
        if (fm > 0.0) == (fa > 0.0) {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
    0.5 * (a + b)
}
