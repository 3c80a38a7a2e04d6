//! Per-link SINRs and symbol error rates for the legitimate user and its
//! paired eavesdropper.

use std::f64::consts::SQRT_2;

use super::q::q_function;
use super::PowerAllocation;
use crate::error::{Error, Result};

/// Which tag-SER expression to use at the user.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TagSerForm {
    /// Accounts for message-detection errors feeding the residual.
    #[default]
    Full,
    /// `Q(ρ_t/σ)`, valid when the message is detected reliably.
    Simplified,
}

/// Equivalent per-quadrature noise std at the user, `σ_n/(√φ √(2 A P_T β̃))`.
pub fn sigma_user(noise_over_tx: f64, beta_tilde: f64, array_gain: f64, phi: f64) -> f64 {
    (noise_over_tx / (2.0 * phi * array_gain * beta_tilde)).sqrt()
}

/// Equivalent per-quadrature noise std at the eavesdropper,
/// `√((σ_n²/(P_T α) + (1−φ) N)/(2 φ S))`.
pub fn sigma_eve(noise_over_tx: f64, alpha: f64, signal_gain: f64, an_gain: f64, phi: f64) -> f64 {
    ((noise_over_tx / alpha + (1.0 - phi) * an_gain) / (2.0 * phi * signal_gain)).sqrt()
}

/// Ciphertext SER with the tag treated as interference on the in-phase axis.
/// Algebraically `1 − ½(Q((a+ρ_t)/−σ) + Q((a−ρ_t)/−σ)) Q(a/−σ)` with
/// `a = ρ_m/√2`, rearranged so that small values keep full precision.
pub fn ser_message(rho_m: f64, rho_t: f64, sigma: f64) -> f64 {
    let a = rho_m / SQRT_2;
    let e_re = 0.5 * (q_function((a + rho_t) / sigma) + q_function((a - rho_t) / sigma));
    let e_im = q_function(a / sigma);
    (e_re + e_im - e_re * e_im).clamp(0.0, 1.0)
}

/// Per-slot probability that both axes flip, so the detected ciphertext is
/// the negation of the sent one.
pub fn negation_prob_exact(rho_m: f64, rho_t: f64, sigma: f64) -> f64 {
    let a = rho_m / SQRT_2;
    let e_re = 0.5 * (q_function((a + rho_t) / sigma) + q_function((a - rho_t) / sigma));
    e_re * q_function(a / sigma)
}

/// Tag SER from the residual after ciphertext detection.
pub fn ser_tag(rho_m: f64, rho_t: f64, sigma: f64, form: TagSerForm) -> f64 {
    let q = |x: f64| q_function(x / sigma);
    let v = match form {
        TagSerForm::Simplified => q(rho_t),
        TagSerForm::Full => {
            let a = rho_m / SQRT_2;
            let b = SQRT_2 * rho_m;
            0.5 * (2.0 * q(rho_t) - q(a + rho_t) + q(b + rho_t) + q(a - rho_t) - q(b - rho_t))
        }
    };
    v.clamp(0.0, 1.0)
}

/// `f(κ) = κ²Γ²/(M(κ+1)²) + 2κ/(κ+1)² + 1/(κ+1)²`.
pub fn f_kappa(kappa: f64, gamma: f64, m: usize) -> f64 {
    let m = m as f64;
    if kappa.is_infinite() {
        return gamma * gamma / m;
    }
    let d = (kappa + 1.0) * (kappa + 1.0);
    kappa * kappa * gamma * gamma / (m * d) + 2.0 * kappa / d + 1.0 / d
}

/// `g(κ) = (1/M)(κ/(κ+1)(2M − 2Γ) + 2/(κ+1))`.
pub fn g_kappa(kappa: f64, gamma: f64, m: usize) -> f64 {
    let m = m as f64;
    if kappa.is_infinite() {
        return (2.0 * m - 2.0 * gamma) / m;
    }
    (kappa / (kappa + 1.0) * (2.0 * m - 2.0 * gamma) + 2.0 / (kappa + 1.0)) / m
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UserLink {
    pub sinr_m: f64,
    pub sinr_t: f64,
    pub sigma: f64,
    pub ser_m: f64,
    pub ser_t: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EveLink {
    pub sinr_m: f64,
    pub sinr_t: f64,
    pub sigma: f64,
    pub ser_m: f64,
    pub ser_t: f64,
}

/// User and eavesdropper halves for one pair, with the channel terms that
/// produced them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkMetrics {
    pub user: UserLink,
    pub eve: EveLink,
    pub f_kappa: f64,
    pub g_kappa: f64,
    pub gamma: f64,
}

/// User half. `array_gain` is `M` in closed form.
pub fn ue_metrics(
    noise_over_tx: f64,
    beta_tilde: f64,
    array_gain: f64,
    p: PowerAllocation,
    form: TagSerForm,
) -> Result<UserLink> {
    let sigma = sigma_user(noise_over_tx, beta_tilde, array_gain, p.phi);
    if !(sigma > 0.0) {
        return Err(Error::Domain("user noise std is zero".into()));
    }
    let n = noise_over_tx / beta_tilde;
    let (rm, rt) = (p.rho_m(), p.rho_t());
    Ok(UserLink {
        sinr_m: p.phi * p.rho * array_gain / (p.phi * (1.0 - p.rho) * array_gain + n),
        sinr_t: 2.0 * p.phi * (1.0 - p.rho) * array_gain / n,
        sigma,
        ser_m: ser_message(rm, rt, sigma),
        ser_t: ser_tag(rm, rt, sigma, form),
    })
}

/// Eavesdropper half. Closed form uses `signal_gain = β_u⁻¹β̃ f(κ)` and
/// `an_gain = g(κ)`. A vanishing signal gain leaves the eavesdropper at
/// chance level.
pub fn eve_metrics(
    noise_over_tx: f64,
    alpha: f64,
    signal_gain: f64,
    an_gain: f64,
    p: PowerAllocation,
) -> EveLink {
    let noise = noise_over_tx / alpha;
    let interf = (1.0 - p.phi) * an_gain + noise;
    let sigma = sigma_eve(noise_over_tx, alpha, signal_gain, an_gain, p.phi);
    let (rm, rt) = (p.rho_m(), p.rho_t());
    let (ser_m, ser_t) = if signal_gain > 0.0 && sigma.is_finite() {
        (ser_message(rm, rt, sigma), ser_tag(rm, rt, sigma, TagSerForm::Full))
    } else {
        (0.75, 0.5)
    };
    EveLink {
        sinr_m: p.phi * p.rho * signal_gain / (p.phi * (1.0 - p.rho) * signal_gain + interf),
        sinr_t: p.phi * (1.0 - p.rho) * signal_gain / interf,
        sigma,
        ser_m,
        ser_t,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pa(rho: f64, phi: f64) -> PowerAllocation {
        PowerAllocation::new(rho, phi).unwrap()
    }

    #[test]
    fn no_tag_power() {
        let u = ue_metrics(1e-7, 1e-9, 64.0, pa(1.0, 1.0), TagSerForm::Full).unwrap();
        assert_eq!(u.sinr_t, 0.0);
        assert!((u.ser_t - 0.5).abs() < 1e-15);
    }

    #[test]
    fn textbook_qpsk_at_full_message_power() {
        for sigma in [0.2, 0.4, 0.7, 1.3] {
            let q = q_function(1.0 / (SQRT_2 * sigma));
            let textbook = 1.0 - (1.0 - q) * (1.0 - q);
            assert!((ser_message(1.0, 0.0, sigma) - textbook).abs() < 1e-14);
        }
    }

    #[test]
    fn printed_and_rearranged_forms_agree() {
        let printed = |rm: f64, rt: f64, s: f64| {
            let a = rm / SQRT_2;
            let qn = |x: f64| q_function(x / -s);
            1.0 - 0.5 * (qn(a + rt) + qn(a - rt)) * qn(a)
        };
        for rho in [0.9, 0.95, 0.99] {
            for s in [0.1, 0.3, 0.8] {
                let (rm, rt) = (f64::sqrt(rho), f64::sqrt(1.0 - rho));
                assert!((printed(rm, rt, s) - ser_message(rm, rt, s)).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn simplified_tag_ser_close_when_message_reliable() {
        let (rm, rt) = (0.995f64.sqrt(), 0.005f64.sqrt());
        let full = ser_tag(rm, rt, 0.1, TagSerForm::Full);
        let simp = ser_tag(rm, rt, 0.1, TagSerForm::Simplified);
        assert!((full - simp).abs() < 1e-9);
    }

    #[test]
    fn message_ser_grows_as_rho_drops() {
        let s = 0.15;
        let mut prev = 0.0;
        for i in 0..=100 {
            let rho = 1.0 - i as f64 * 0.001;
            let v = ser_message(rho.sqrt(), (1.0 - rho).sqrt(), s);
            assert!(v >= prev);
            prev = v;
        }
    }

    #[test]
    fn kappa_limits() {
        let m = 64;
        assert!((f_kappa(f64::INFINITY, 64.0, m) - 64.0).abs() < 1e-12);
        assert!((f_kappa(1e12, 64.0, m) / 64.0 - 1.0).abs() < 1e-9);
        assert!(g_kappa(1e12, 64.0, m).abs() < 1e-9);
        assert!(f_kappa(1e12, 0.0, m) < 1e-9);
        assert_eq!(g_kappa(f64::INFINITY, 64.0, m), 0.0);
    }

    #[test]
    fn chance_level_without_wiretap_gain() {
        let e = eve_metrics(1e-7, 1e-9, 0.0, 0.3, pa(0.95, 0.8));
        assert_eq!((e.ser_m, e.ser_t), (0.75, 0.5));
    }

    #[test]
    fn sigma_formulas() {
        let s = sigma_user(2.0, 0.5, 4.0, 0.25);
        assert!((s - (2.0f64 / (2.0 * 0.25 * 4.0 * 0.5)).sqrt()).abs() < 1e-15);
        let s = sigma_eve(2.0, 0.5, 3.0, 0.2, 0.5);
        assert!((s - ((4.0 + 0.1) / 3.0f64).sqrt()).abs() < 1e-15);
    }
}
