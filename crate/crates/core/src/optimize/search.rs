//! One-dimensional bracket search for a valley.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Probe placement inside the bracket.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ProbeMode {
    #[default]
    Golden,
    /// Two uniform probes per iteration.
    Random { seed: u64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchResult {
    pub x: f64,
    pub value: f64,
    pub evaluations: usize,
    /// True when the bracket search saw a non-valley and a grid scan was
    /// used instead.
    pub fallback: bool,
    pub warning: Option<String>,
}

const FALLBACK_POINTS: usize = 101;
const MAX_ITER: usize = 100_000;

/// Minimize `f` on `[lo, hi]`, assuming a single valley. Each iteration
/// places two interior probes and keeps the part holding the smaller value;
/// once the bracket is at most `eps` wide its midpoint is returned. If both
/// probes sit strictly above both bracket ends the valley assumption is
/// broken and the answer comes from a 101-point grid instead.
pub fn bisection_rho<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, eps: f64, mode: ProbeMode) -> SearchResult {
    let (mut a, mut b) = (lo.min(hi), lo.max(hi));
    let mut evals = 0usize;
    let mut eval = |x: f64, n: &mut usize| {
        *n += 1;
        f(x)
    };
    let mut fa = eval(a, &mut evals);
    let mut fb = eval(b, &mut evals);
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut rng = match mode {
        ProbeMode::Random { seed } => Some(ChaCha8Rng::seed_from_u64(seed)),
        ProbeMode::Golden => None,
    };
    // golden-section keeps one probe between iterations
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = eval(c, &mut evals);
    let mut fd = eval(d, &mut evals);
    let mut broken = false;
    for _ in 0..MAX_ITER {
        if b - a <= eps {
            break;
        }
        if let Some(r) = rng.as_mut() {
            let (mut u, mut v) = (r.random_range(a..=b), r.random_range(a..=b));
            if u > v {
                std::mem::swap(&mut u, &mut v);
            }
            c = u;
            d = v;
            fc = eval(c, &mut evals);
            fd = eval(d, &mut evals);
        }
        if fc.min(fd) > fa.max(fb) || !fc.is_finite() || !fd.is_finite() {
            broken = true;
            break;
        }
        if fc < fd {
            b = d;
            fb = fd;
            if rng.is_none() {
                d = c;
                fd = fc;
                c = b - inv_phi * (b - a);
                fc = eval(c, &mut evals);
            }
        } else {
            a = c;
            fa = fc;
            if rng.is_none() {
                c = d;
                fc = fd;
                d = a + inv_phi * (b - a);
                fd = eval(d, &mut evals);
            }
        }
    }
    if broken {
        let (lo, hi) = (lo.min(hi), lo.max(hi));
        let mut best = (lo, f64::INFINITY);
        for i in 0..FALLBACK_POINTS {
            let x = lo + (hi - lo) * i as f64 / (FALLBACK_POINTS - 1) as f64;
            let v = eval(x, &mut evals);
            if v < best.1 {
                best = (x, v);
            }
        }
        return SearchResult {
            x: best.0,
            value: best.1,
            evaluations: evals,
            fallback: true,
            warning: Some(format!("objective is not a single valley on [{lo}, {hi}], used a grid")),
        };
    }
    let x = 0.5 * (a + b);
    let value = eval(x, &mut evals);
    SearchResult { x, value, evaluations: evals, fallback: false, warning: None }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parabola() {
        for mode in [ProbeMode::Golden, ProbeMode::Random { seed: 3 }] {
            let r = bisection_rho(|x| (x - 0.95).powi(2), 0.9, 1.0, 1e-6, mode);
            assert!((r.x - 0.95).abs() <= 1e-6, "{mode:?}: {}", r.x);
            assert!(!r.fallback);
        }
    }

    #[test]
    fn decreasing_goes_right() {
        let r = bisection_rho(|x| -x, 0.9, 1.0, 1e-6, ProbeMode::Golden);
        assert!(r.x > 1.0 - 1e-6 && r.x <= 1.0);
    }

    #[test]
    fn hump_falls_back() {
        let r = bisection_rho(|x| -(x - 0.95).powi(2), 0.9, 1.0, 1e-6, ProbeMode::Golden);
        assert!(r.fallback);
        assert!(r.warning.is_some());
        assert!(r.x == 0.9 || r.x == 1.0);
    }

    #[test]
    fn scaling_keeps_argmin() {
        let f = |x: f64| (x - 0.93).powi(2) + 0.1 * (x - 0.93).powi(4);
        let a = bisection_rho(f, 0.9, 1.0, 1e-7, ProbeMode::Golden);
        let b = bisection_rho(|x| 7.5 * f(x), 0.9, 1.0, 1e-7, ProbeMode::Golden);
        assert_eq!(a.x, b.x);
    }
}
