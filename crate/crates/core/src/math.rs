//! Small numerically-careful scalar helpers shared across the workspace.

/// Logistic function 1/(1+e^{-t}), stable for large |t|.
pub fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

/// log(1 + e^t) without overflow for large t or cancellation for very negative t.
pub fn log1p_exp(t: f64) -> f64 {
    t.max(0.0) + (-t.abs()).exp().ln_1p()
}

/// Inverse of [`sigmoid`]: log(p/(1-p)) for p in (0,1).
pub fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

/// max(t, 0).
pub fn relu(t: f64) -> f64 {
    t.max(0.0)
}
