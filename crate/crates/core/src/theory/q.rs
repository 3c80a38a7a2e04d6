use statrs::function::erf::erfc;
use std::f64::consts::SQRT_2;

/// Upper tail of the standard normal, `Q(x) = ½ erfc(x/√2)`.
#[inline]
pub fn q_function(x: f64) -> f64 {
    0.5 * erfc(x / SQRT_2)
}

/// The exponential bound `½ e^{−x²/2}` (x > 0), used only by the
/// unimodality probes that mirror the analytic proofs.
pub fn q_bound(x: f64) -> f64 {
    0.5 * (-0.5 * x * x).exp()
}
