//! Authentication probabilities, secrecy rates and reliability metrics.

use super::binomial::{compensated_sum, BinomialTable};
use super::link::{EveLink, UserLink};
use crate::error::{Error, Result};

/// Per-slot probability that both quadratures flip, i.e. the detected
/// ciphertext symbol is the negation of the sent one. Computed as
/// `(1 − √(1−P_m))²` without cancellation.
fn negation_prob(p_m: f64) -> f64 {
    let x = p_m / (1.0 + (1.0 - p_m).sqrt());
    x * x
}

/// Probability that a block carries at least one negated symbol and no
/// other error: `Σ_{ζ=1}^{T} C(T,ζ) (1−P_m)^{T−ζ} (1−√(1−P_m))^{2ζ}`.
pub fn p_b(table: &BinomialTable, p_m: f64) -> f64 {
    let t = table.n();
    if p_m <= 0.0 {
        return 0.0;
    }
    let neg = negation_prob(p_m.min(1.0));
    if p_m >= 1.0 {
        return neg.powi(t as i32);
    }
    let ln_ok = (-p_m).ln_1p();
    let ln_neg = neg.ln();
    let terms = (1..=t).map(|z| {
        let ln_c = table.ln_coeff(z);
        (ln_c + (t - z) as f64 * ln_ok + z as f64 * ln_neg).exp()
    });
    compensated_sum(terms).clamp(0.0, 1.0)
}

/// Negation-only block probability from the exact per-slot negation
/// probability `q`: `(1 − P_m + q)^T − (1 − P_m)^T`. The block form above
/// treats both axes as equally likely to flip, which overstates `q` when the
/// tag loads only the in-phase axis.
pub fn p_b_exact(t: usize, p_m: f64, q: f64) -> f64 {
    let n = t as f64;
    let ok = n * (-p_m).ln_1p();
    let with_neg = n * (q - p_m).ln_1p();
    (with_neg.exp() - ok.exp()).clamp(0.0, 1.0)
}

/// False-alarm probability at threshold `η`:
/// `(1 − P_b) F(η; T, ½) + P_b F(η; T, P_t)`.
pub fn p_f(table: &BinomialTable, eta: usize, p_b: f64, p_t: f64) -> f64 {
    (1.0 - p_b) * table.cdf(eta, 0.5) + p_b * table.cdf(eta, p_t)
}

/// Largest `η` whose false-alarm probability stays within `pf_target`.
pub fn select_threshold(table: &BinomialTable, pf_target: f64, p_b: f64, p_t: f64) -> Result<usize> {
    let t = table.n();
    if !(pf_target > 0.0) {
        return Err(Error::Domain(format!("false-alarm target {pf_target} must be positive")));
    }
    if pf_target >= 1.0 {
        return Ok(t);
    }
    let half = table.cdf_all(0.5);
    let tag = if p_b > 0.0 { table.cdf_all(p_t) } else { vec![0.0; t + 1] };
    let mut best = None;
    for eta in 0..=t {
        let pf = (1.0 - p_b) * half[eta] + p_b * tag[eta];
        if pf <= pf_target {
            best = Some(eta);
        } else {
            break;
        }
    }
    best.ok_or_else(|| Error::Infeasible(format!("no threshold reaches false-alarm target {pf_target}")))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AuthProbabilities {
    pub p_d: f64,
    pub p_f: f64,
    pub p_b: f64,
}

pub fn auth_probabilities(table: &BinomialTable, p_t: f64, p_m: f64, eta: usize) -> AuthProbabilities {
    let pb = p_b(table, p_m);
    AuthProbabilities { p_d: table.cdf(eta, p_t), p_f: p_f(table, eta, pb, p_t), p_b: pb }
}

/// Wiretap information ratio `1 + log₂(1 − P'_t)`, clipped to `[0, 1]`.
pub fn info_ratio(p_t_eve: f64) -> f64 {
    let v = 1.0 + (1.0 - p_t_eve).log2();
    if v.is_nan() {
        0.0
    } else {
        v.clamp(0.0, 1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rates {
    /// Classical sum secrecy rate.
    pub r_classic: f64,
    pub r_u: f64,
    pub r_e: f64,
    /// Per-pair clipped `P_d log₂(1+SINR) − I_e log₂(1+SINR')`.
    pub r_sec: f64,
}

pub fn secrecy_rates(users: &[UserLink], eves: &[EveLink], p_d: &[f64], i_e: &[f64]) -> Rates {
    let mut r = Rates { r_classic: 0.0, r_u: 0.0, r_e: 0.0, r_sec: 0.0 };
    for u in 0..users.len() {
        let cu = (1.0 + users[u].sinr_m).log2();
        let ce = (1.0 + eves[u].sinr_m).log2();
        r.r_classic += (cu - ce).max(0.0);
        r.r_u += p_d[u] * cu;
        r.r_e += i_e[u] * ce;
        r.r_sec += (p_d[u] * cu - i_e[u] * ce).max(0.0);
    }
    r
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Reliability {
    pub bler: f64,
    pub afp: f64,
    pub p_w: f64,
}

/// `BLER = 1 − (1−P_m)^T`, `AFP = 1 − (1−BLER) P_d`,
/// `P_w = 1 − mean (1−P'_m)(1−P'_t)`.
pub fn reliability_metrics(p_m: f64, p_d: f64, eve_sers: &[(f64, f64)], t: usize) -> Reliability {
    let bler = -(t as f64 * (-p_m).ln_1p()).exp_m1();
    let afp = (1.0 - (1.0 - bler) * p_d).clamp(0.0, 1.0);
    let k = eve_sers.len() as f64;
    let p_w = 1.0 - eve_sers.iter().map(|(m, tg)| (1.0 - m) * (1.0 - tg)).sum::<f64>() / k;
    Reliability { bler, afp, p_w: p_w.clamp(0.0, 1.0) }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn threshold_small_block() {
        let t = BinomialTable::new(8);
        assert_eq!(select_threshold(&t, 0.04, 0.0, 0.1).unwrap(), 1);
        assert_eq!(select_threshold(&t, 1.0, 0.0, 0.1).unwrap(), 8);
        assert!(matches!(select_threshold(&t, 1e-3, 0.0, 0.1), Err(Error::Infeasible(_))));
    }

    #[test]
    fn threshold_is_largest_feasible() {
        let t = BinomialTable::new(160);
        let eta = select_threshold(&t, 1e-3, 0.0, 0.05).unwrap();
        assert!(t.cdf(eta, 0.5) <= 1e-3);
        assert!(t.cdf(eta + 1, 0.5) > 1e-3);
    }

    #[test]
    fn p_b_matches_binomial_identity() {
        // Σ_{ζ≥1} C(T,ζ) a^{T−ζ} b^ζ = (a+b)^T − a^T.
        let t = BinomialTable::new(160);
        for pm in [1e-6f64, 1e-4, 1e-2, 0.2] {
            let a = 1.0 - pm;
            let b = (1.0 - a.sqrt()).powi(2);
            let oracle = (a + b).powi(160) - a.powi(160);
            let got = p_b(&t, pm);
            assert!((got - oracle).abs() <= 1e-12 + 1e-6 * oracle, "{pm}: {got} vs {oracle}");
        }
        assert_eq!(p_b(&t, 0.0), 0.0);
    }

    #[test]
    fn exact_p_b_reduces_to_block_form() {
        // with the symmetric per-axis model q = (1 − √(1−P_m))²
        let t = BinomialTable::new(160);
        for pm in [1e-5f64, 1e-3, 0.05] {
            let q = (1.0 - (1.0 - pm).sqrt()).powi(2);
            let a = p_b_exact(160, pm, q);
            let b = p_b(&t, pm);
            assert!((a - b).abs() <= 1e-10 * b.max(1e-300) + 1e-15, "{pm}: {a} vs {b}");
        }
        assert_eq!(p_b_exact(160, 0.01, 0.0), 0.0);
    }

    #[test]
    fn auth_edge_cases() {
        let t = BinomialTable::new(160);
        assert_eq!(auth_probabilities(&t, 0.0, 0.0, 0).p_d, 1.0);
        assert_eq!(auth_probabilities(&t, 0.3, 0.0, 160).p_d, 1.0);
        assert!(auth_probabilities(&t, 0.1, 0.0, 20).p_d > auth_probabilities(&t, 0.2, 0.0, 20).p_d);
    }

    #[test]
    fn info_ratio_values() {
        assert_eq!(info_ratio(0.5), 0.0);
        assert!((info_ratio(0.25) - 0.584_962_500_721_156_2).abs() < 1e-12);
        assert_eq!(info_ratio(0.0), 1.0);
        assert_eq!(info_ratio(0.8), 0.0);
        assert_eq!(info_ratio(1.0), 0.0);
    }

    fn link(sinr: f64) -> (UserLink, EveLink) {
        (
            UserLink { sinr_m: sinr, sinr_t: 0.0, sigma: 0.1, ser_m: 0.0, ser_t: 0.0 },
            EveLink { sinr_m: sinr, sinr_t: 0.0, sigma: 0.1, ser_m: 0.0, ser_t: 0.0 },
        )
    }

    #[test]
    fn symmetric_links_have_no_secrecy() {
        let (u, e) = link(30.0);
        let r = secrecy_rates(&[u; 4], &[e; 4], &[0.7; 4], &[0.7; 4]);
        assert_eq!(r.r_sec, 0.0);
        assert_eq!(r.r_classic, 0.0);
        let r = secrecy_rates(&[u; 4], &[e; 4], &[0.9; 4], &[0.0; 4]);
        assert!((r.r_sec - r.r_u).abs() < 1e-12);
    }

    #[test]
    fn reliability_cases() {
        assert_eq!(reliability_metrics(0.0, 1.0, &[(0.0, 0.0)], 160).afp, 0.0);
        assert!((reliability_metrics(0.0, 0.9, &[(0.0, 0.0)], 160).afp - 0.1).abs() < 1e-15);
        assert!((reliability_metrics(0.0, 1.0, &[(0.5, 0.5); 4], 160).p_w - 0.75).abs() < 1e-15);
        let r = reliability_metrics(1e-4, 1.0, &[(0.0, 0.0)], 160);
        let oracle = 1.0 - 0.9999f64.powi(160);
        assert!((r.bler - oracle).abs() < 1e-12 * oracle);
    }
}
