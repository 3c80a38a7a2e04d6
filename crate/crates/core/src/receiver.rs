//! Legitimate receiver: normalization, ciphertext and residual-tag
//! detection, tag regeneration, threshold authentication and decoding.

use crate::error::{Error, Result};
use crate::tbe::{self, KeyMaterial, PowerSplit, QPSK};
use crate::C64;

/// Divide out `φ_s √(P_T β̃ A)`, where `A` is the array gain (`M` for an
/// ideal zero-forcing link).
pub fn normalize_rx(y: &[C64], split: &PowerSplit, tx_power_mw: f64, beta_tilde: f64, array_gain: f64) -> Result<Vec<C64>> {
    if !(split.phi_s > 0.0) {
        return Err(Error::Domain("no signal power to normalize by".into()));
    }
    let s = 1.0 / (split.phi_s * (tx_power_mw * beta_tilde * array_gain).sqrt());
    Ok(y.iter().map(|v| v * s).collect())
}

/// Minimum-distance ciphertext decision; ties go to the lowest
/// constellation index.
#[inline]
pub fn detect_symbol(y: C64, rho_m: f64) -> C64 {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (i, s) in QPSK.iter().enumerate() {
        let d = (y - s * rho_m).norm_sqr();
        if d < best_d {
            best = i;
            best_d = d;
        }
    }
    QPSK[best]
}

pub fn detect_ciphertext(y_tilde: &[C64], rho_m: f64) -> Vec<C64> {
    y_tilde.iter().map(|&y| detect_symbol(y, rho_m)).collect()
}

/// Tag decision on the residual `r = ỹ − ρ_m ĉ`; a tie goes to +1.
#[inline]
pub fn detect_tag_symbol(y: C64, c_hat: C64, rho_m: f64, rho_t: f64) -> f64 {
    let r = y - c_hat * rho_m;
    let dp = (r - rho_t).norm_sqr();
    let dm = (r + rho_t).norm_sqr();
    if dp <= dm {
        1.0
    } else {
        -1.0
    }
}

pub fn detect_embedded_tag(y_tilde: &[C64], c_hat: &[C64], rho_m: f64, rho_t: f64) -> Result<Vec<f64>> {
    if y_tilde.len() != c_hat.len() {
        return Err(Error::Length("received and detected lengths differ".into()));
    }
    Ok(y_tilde.iter().zip(c_hat).map(|(&y, &c)| detect_tag_symbol(y, c, rho_m, rho_t)).collect())
}

/// Expected tag from the key and the detected ciphertext's feature.
pub fn regenerate_tag(key: &KeyMaterial, c_hat: &[C64]) -> Result<Vec<f64>> {
    let feature = tbe::extract_feature(c_hat)?;
    Ok(tbe::tag_symbols(&tbe::generate_tag(key, &feature)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Hypothesis {
    /// Not authentic.
    H0,
    /// Authentic.
    H1,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AuthDecision {
    pub hypothesis: Hypothesis,
    pub statistic: usize,
    pub threshold: usize,
}

impl AuthDecision {
    pub fn authentic(&self) -> bool {
        self.hypothesis == Hypothesis::H1
    }
}

/// Accept when the number of disagreeing tag symbols is at most `eta`.
pub fn authenticate(t_hat: &[f64], t_tilde: &[f64], eta: usize) -> Result<AuthDecision> {
    if t_hat.len() != t_tilde.len() {
        return Err(Error::Length("tag lengths differ".into()));
    }
    if eta > t_hat.len() {
        return Err(Error::Domain(format!("threshold {eta} exceeds block length {}", t_hat.len())));
    }
    let l = t_hat.iter().zip(t_tilde).filter(|(a, b)| (**a > 0.0) != (**b > 0.0)).count();
    let hypothesis = if l <= eta { Hypothesis::H1 } else { Hypothesis::H0 };
    Ok(AuthDecision { hypothesis, statistic: l, threshold: eta })
}

/// `ŝ = t̃ ⊙ ĉ` and its bits. Only defined for accepted blocks.
pub fn decode_plaintext(c_hat: &[C64], t_tilde: &[f64], decision: &AuthDecision) -> Result<(Vec<C64>, Vec<bool>)> {
    if !decision.authentic() {
        return Err(Error::Contract("decoding a rejected block".into()));
    }
    if c_hat.len() != t_tilde.len() {
        return Err(Error::Length("ciphertext and tag lengths differ".into()));
    }
    let s: Vec<C64> = c_hat.iter().zip(t_tilde).map(|(c, t)| c * *t).collect();
    let bits = tbe::demodulate(&s);
    Ok((s, bits))
}

/// One received block with every intermediate kept for diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct RxBlock {
    pub y_tilde: Vec<C64>,
    pub c_hat: Vec<C64>,
    pub t_hat: Vec<f64>,
    pub t_tilde: Vec<f64>,
    pub decision: AuthDecision,
    /// Present only for accepted blocks.
    pub plaintext: Option<(Vec<C64>, Vec<bool>)>,
}

/// The full chain on an already normalized block.
pub fn receive_block(key: &KeyMaterial, y_tilde: Vec<C64>, split: &PowerSplit, eta: usize) -> Result<RxBlock> {
    let c_hat = detect_ciphertext(&y_tilde, split.rho_m);
    let t_hat = detect_embedded_tag(&y_tilde, &c_hat, split.rho_m, split.rho_t)?;
    let t_tilde = regenerate_tag(key, &c_hat)?;
    let decision = authenticate(&t_hat, &t_tilde, eta)?;
    let plaintext = if decision.authentic() { Some(decode_plaintext(&c_hat, &t_tilde, &decision)?) } else { None };
    Ok(RxBlock { y_tilde, c_hat, t_hat, t_tilde, decision, plaintext })
}
