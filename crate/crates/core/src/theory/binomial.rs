//! Binomial tail sums in log space.

use statrs::function::factorial::ln_binomial;

/// Neumaier-compensated sum.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(xs: I) -> f64 {
    let mut s = 0.0f64;
    let mut c = 0.0f64;
    for x in xs {
        let t = s + x;
        if s.abs() >= x.abs() {
            c += (s - t) + x;
        } else {
            c += (x - t) + s;
        }
        s = t;
    }
    s + c
}

/// `ln C(n, k)` for every `k = 0..=n`, so repeated CDF evaluations at the
/// same block length skip the log-gamma calls.
#[derive(Debug, Clone, PartialEq)]
pub struct BinomialTable {
    ln_c: Vec<f64>,
}

impl BinomialTable {
    pub fn new(n: usize) -> Self {
        Self { ln_c: (0..=n as u64).map(|k| ln_binomial(n as u64, k)).collect() }
    }

    pub fn n(&self) -> usize {
        self.ln_c.len() - 1
    }

    pub fn ln_coeff(&self, k: usize) -> f64 {
        self.ln_c[k]
    }

    /// `P(X = k)` for `X ~ Bin(n, p)`.
    pub fn pmf(&self, k: usize, p: f64) -> f64 {
        let n = self.n();
        if k > n {
            return 0.0;
        }
        if p <= 0.0 {
            return if k == 0 { 1.0 } else { 0.0 };
        }
        if p >= 1.0 {
            return if k == n { 1.0 } else { 0.0 };
        }
        (self.ln_c[k] + k as f64 * p.ln() + (n - k) as f64 * (-p).ln_1p()).exp()
    }

    /// `P(X ≤ eta)`.
    pub fn cdf(&self, eta: usize, p: f64) -> f64 {
        let n = self.n();
        if eta >= n {
            return 1.0;
        }
        compensated_sum((0..=eta).map(|k| self.pmf(k, p))).clamp(0.0, 1.0)
    }

    /// `P(X ≤ η)` for every `η = 0..=n`.
    pub fn cdf_all(&self, p: f64) -> Vec<f64> {
        let n = self.n();
        let mut out = Vec::with_capacity(n + 1);
        let (mut s, mut c) = (0.0f64, 0.0f64);
        for k in 0..=n {
            let x = self.pmf(k, p);
            let t = s + x;
            if s.abs() >= x.abs() {
                c += (s - t) + x;
            } else {
                c += (x - t) + s;
            }
            s = t;
            out.push((s + c).clamp(0.0, 1.0));
        }
        out[n] = 1.0;
        out
    }
}

pub fn binomial_cdf(eta: usize, n: usize, p: f64) -> f64 {
    BinomialTable::new(n).cdf(eta, p)
}
