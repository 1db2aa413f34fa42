//! Double-well potential, optimal profile and mobilities.

/// `W(s) = ½ s²(1 − s)²`.
pub fn w(s: f64) -> f64 {
    0.5 * (s * (1.0 - s)).powi(2)
}

/// `W'(s) = s(1 − s)(1 − 2s)`.
pub fn w_prime(s: f64) -> f64 {
    s * (1.0 - s) * (1.0 - 2.0 * s)
}

/// `W''(s) = 1 − 6s + 6s²`.
pub fn w_second(s: f64) -> f64 {
    1.0 - 6.0 * s + 6.0 * s * s
}

/// Optimal transition profile `q(s) = (1 − tanh(s/2))/2`, equal to 1 for
/// `s → −∞` and 0 for `s → +∞`.
pub fn q(s: f64) -> f64 {
    0.5 * (1.0 - (0.5 * s).tanh())
}

/// Quartic degenerate mobility `36 s²(1 − s)²`, with maximum 2.25 at `s = ½`.
pub fn mobility_mch(s: f64) -> f64 {
    36.0 * (s * (1.0 - s)).powi(2)
}

/// Supremum of [`mobility_mch`] on `[0, 1]`.
pub const MOBILITY_MCH_SUP: f64 = 2.25;

/// Regularised mobility `s²(1 − s)² + ε²`.
pub fn mobility_nmn(s: f64, eps: f64) -> f64 {
    (s * (1.0 - s)).powi(2) + eps * eps
}

/// `N(s) = 1/√M(s)` for the regularised mobility.
pub fn n_fun(s: f64, eps: f64) -> f64 {
    1.0 / mobility_nmn(s, eps).sqrt()
}
