//! Finite-difference gradients on the unit box.

/// Gradient of `f` at `p` by central differences; near an edge of `(0,1]²`
/// the difference goes one-sided inward.
pub fn numeric_gradient<F: FnMut([f64; 2]) -> f64>(mut f: F, p: [f64; 2], h: f64) -> [f64; 2] {
    let mut g = [0.0; 2];
    for i in 0..2 {
        let mut hi = p;
        let mut lo = p;
        if p[i] + h > 1.0 {
            lo[i] = p[i] - h;
            g[i] = (f(p) - f(lo)) / h;
        } else if p[i] - h <= 0.0 {
            hi[i] = p[i] + h;
            g[i] = (f(hi) - f(p)) / h;
        } else {
            hi[i] = p[i] + h;
            lo[i] = p[i] - h;
            g[i] = (f(hi) - f(lo)) / (2.0 * h);
        }
    }
    g
}
