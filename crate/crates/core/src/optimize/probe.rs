//! Sign-change counting on sampled 1-D slices.

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shape {
    Monotone,
    /// Rises then falls.
    UnimodalUp,
    /// Falls then rises.
    UnimodalDown,
    Multimodal,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeReport {
    pub shape: Shape,
    pub sign_changes: usize,
    /// Sample indices where a second or later sign change happens.
    pub violations: Vec<usize>,
    /// Sign of the net trend for monotone slices (+1 rising, −1 falling, 0 flat).
    pub trend: i8,
}

/// Classify sampled values. Differences with magnitude at most `deadband`
/// are treated as flat and carry no sign.
pub fn unimodality_probe(values: &[f64], deadband: f64) -> ProbeReport {
    let mut last = 0i8;
    let mut first = 0i8;
    let mut changes = 0;
    let mut violations = Vec::new();
    for (i, w) in values.windows(2).enumerate() {
        let d = w[1] - w[0];
        let s = if d > deadband {
            1
        } else if d < -deadband {
            -1
        } else {
            continue;
        };
        if first == 0 {
            first = s;
        }
        if last != 0 && s != last {
            changes += 1;
            if changes > 1 {
                violations.push(i);
            }
        }
        last = s;
    }
    let shape = match (changes, first) {
        (0, _) => Shape::Monotone,
        (1, 1) => Shape::UnimodalUp,
        (1, _) => Shape::UnimodalDown,
        _ => Shape::Multimodal,
    };
    ProbeReport { shape, sign_changes: changes, violations, trend: if changes == 0 { first } else { 0 } }
}

/// Sample `f` at `n` evenly spaced points of `[lo, hi]` and probe the result
/// with a deadband of `1e-12` times the largest magnitude.
pub fn unimodality_scan<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, n: usize) -> (Vec<f64>, ProbeReport) {
    let n = n.max(2);
    let vals: Vec<f64> = (0..n).map(|i| f(lo + (hi - lo) * i as f64 / (n - 1) as f64)).collect();
    let scale = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let rep = unimodality_probe(&vals, 1e-12 * scale);
    (vals, rep)
}
