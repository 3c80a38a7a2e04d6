//! Eavesdropper reception, combining and keyless detection, plus the random
//! blocks a jammer injects.
//!
//! Signals are stored stream-major: `rows[k]` holds the `T` samples of
//! stream (or receiver) `k`.

use nalgebra::DMatrix;
use rand::Rng;

use crate::channel::{cn01, ChannelRealization};
use crate::error::{Error, Result};
use crate::receiver::{detect_symbol, detect_tag_symbol};
use crate::tbe::{self, PowerSplit};
use crate::C64;

fn check_streams(tx: &[Vec<C64>], k: usize) -> Result<usize> {
    if tx.len() != k {
        return Err(Error::Length(format!("{} streams for {k} users", tx.len())));
    }
    let t = tx.first().map_or(0, |r| r.len());
    if tx.iter().any(|r| r.len() != t) {
        return Err(Error::Length("ragged stream lengths".into()));
    }
    Ok(t)
}

/// Wiretapped samples: eavesdropper `e` receives
/// `√(P_T α_e) (φ_s Σ_k (w_k^H g_e) x_k + φ_n Σ_i (v_i^H g_e) z_i) + n_e`
/// with fresh AN streams `z_i` and AWGN of power `σ_n²`.
pub fn eve_receive<R: Rng + ?Sized>(
    r: &ChannelRealization,
    tx: &[Vec<C64>],
    split: &PowerSplit,
    tx_power_mw: f64,
    noise_power_mw: f64,
    rng: &mut R,
) -> Result<Vec<Vec<C64>>> {
    let k = r.num_users();
    let t = check_streams(tx, k)?;
    let wg = r.w.adjoint() * &r.g; // (k, e) = w_k^H g_e
    let vg = r.v.adjoint() * &r.g; // (i, e) = v_i^H g_e
    let n_an = r.v.ncols();
    let sigma_n = noise_power_mw.sqrt();
    let mut out = vec![vec![C64::new(0.0, 0.0); t]; k];
    let mut z = vec![C64::new(0.0, 0.0); n_an];
    for tau in 0..t {
        for zi in z.iter_mut() {
            *zi = cn01(rng);
        }
        for e in 0..k {
            let sig: C64 = (0..k).map(|kk| wg[(kk, e)] * tx[kk][tau]).sum();
            let an: C64 = (0..n_an).map(|i| vg[(i, e)] * z[i]).sum();
            let amp = (tx_power_mw * r.alpha[e]).sqrt();
            out[e][tau] = (sig * split.phi_s + an * split.phi_n) * amp + cn01(rng) * sigma_n;
        }
    }
    Ok(out)
}

/// `B = A (A^H A)^{-1}` with `A = G^H W`, the right inverse the eavesdroppers
/// use to separate the streams.
pub fn combiner(gw: &DMatrix<C64>) -> Result<DMatrix<C64>> {
    let inv = (gw.adjoint() * gw).try_inverse().ok_or(Error::Singular("W^H G G^H W"))?;
    let b = gw * inv;
    if b.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(Error::Singular("W^H G G^H W"));
    }
    Ok(b)
}

/// Combined stream `u`: `Σ_e y_e α_e^{-1/2} B_eu / (φ_s √P_T)`. Without noise
/// and AN this returns the transmitted streams exactly.
pub fn eve_combine(
    y_e: &[Vec<C64>],
    gw: &DMatrix<C64>,
    alpha: &[f64],
    split: &PowerSplit,
    tx_power_mw: f64,
) -> Result<Vec<Vec<C64>>> {
    let k = gw.nrows();
    let t = check_streams(y_e, k)?;
    if !(split.phi_s > 0.0) {
        return Err(Error::Domain("no signal power to combine".into()));
    }
    let b = combiner(gw)?;
    let norm = 1.0 / (split.phi_s * tx_power_mw.sqrt());
    let coef = DMatrix::from_fn(k, k, |e, u| b[(e, u)] * (norm / alpha[e].sqrt()));
    let mut out = vec![vec![C64::new(0.0, 0.0); t]; k];
    for u in 0..k {
        for tau in 0..t {
            out[u][tau] = (0..k).map(|e| y_e[e][tau] * coef[(e, u)]).sum();
        }
    }
    Ok(out)
}

/// Keyless detections: ciphertext and tag by the receiver's rules, then the
/// plaintext guess `Ŝ = Ĉ ⊙ T̂` taken straight from the wiretapped tag.
#[derive(Debug, Clone, PartialEq)]
pub struct EveBlock {
    pub c_hat: Vec<Vec<C64>>,
    pub t_hat: Vec<Vec<f64>>,
    pub s_hat: Vec<Vec<C64>>,
}

pub fn eve_detect_and_decode(y_tilde: &[Vec<C64>], rho_m: f64, rho_t: f64) -> EveBlock {
    let mut blk = EveBlock { c_hat: Vec::new(), t_hat: Vec::new(), s_hat: Vec::new() };
    for row in y_tilde {
        let c: Vec<C64> = row.iter().map(|&y| detect_symbol(y, rho_m)).collect();
        let t: Vec<f64> = row.iter().zip(&c).map(|(&y, &ch)| detect_tag_symbol(y, ch, rho_m, rho_t)).collect();
        blk.s_hat.push(c.iter().zip(&t).map(|(ci, ti)| ci * *ti).collect());
        blk.c_hat.push(c);
        blk.t_hat.push(t);
    }
    blk
}

/// A block of uniformly random symbols under a uniformly random tag, built
/// without any key.
pub fn jamming_block<R: Rng + ?Sized>(t: usize, split: &PowerSplit, rng: &mut R) -> Vec<C64> {
    let bits: Vec<bool> = (0..2 * t).map(|_| rng.random()).collect();
    let s = tbe::modulate_message(&bits).expect("even bit count");
    let tag_bits: Vec<bool> = (0..t).map(|_| rng.random()).collect();
    let c = tbe::encode_ciphertext(&s, &tag_bits).expect("equal lengths");
    tbe::compose_tx(&c, &tbe::tag_symbols(&tag_bits), split).expect("equal lengths")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{build_realization, GeometryScenario};
    use crate::config::SystemConfig;
    use crate::tbe::{KeyMaterial, MessageBlock};
    use crate::theory::PowerAllocation;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn setup(seed: u64) -> (SystemConfig, ChannelRealization, ChaCha8Rng) {
        let cfg = SystemConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let geom = GeometryScenario::sample(&cfg, &mut rng).unwrap();
        let r = build_realization(&cfg, &geom, &mut rng).unwrap();
        (cfg, r, rng)
    }

    fn blocks(r: &ChannelRealization, sp: &PowerSplit, rng: &mut ChaCha8Rng) -> Vec<MessageBlock> {
        let key = KeyMaterial::random(64, rng).unwrap();
        (0..r.num_users()).map(|_| MessageBlock::random(&key, 40, sp, rng)).collect()
    }

    #[test]
    fn noiseless_combiner_recovers_streams() {
        let (cfg, r, mut rng) = setup(1);
        let sp = PowerSplit::new(PowerAllocation::new(0.95, 1.0).unwrap());
        let b = blocks(&r, &sp, &mut rng);
        let tx: Vec<Vec<C64>> = b.iter().map(|m| m.tx.clone()).collect();
        let y = eve_receive(&r, &tx, &sp, cfg.tx_power_mw(), 0.0, &mut rng).unwrap();
        let gw = r.g.adjoint() * &r.w;
        let yt = eve_combine(&y, &gw, &r.alpha, &sp, cfg.tx_power_mw()).unwrap();
        for u in 0..4 {
            for tau in 0..40 {
                assert!((yt[u][tau] - tx[u][tau]).norm() < 1e-9);
            }
        }
        let blk = eve_detect_and_decode(&yt, sp.rho_m, sp.rho_t);
        for u in 0..4 {
            assert_eq!(blk.s_hat[u], b[u].symbols);
            for tau in 0..40 {
                assert_eq!(blk.s_hat[u][tau], blk.c_hat[u][tau] * blk.t_hat[u][tau]);
            }
        }
    }

    #[test]
    fn eve_on_user_channel_sees_user_signal() {
        let (cfg, mut r, mut rng) = setup(2);
        r.g = r.h.clone();
        r.alpha = r.beta.clone();
        let sp = PowerSplit::new(PowerAllocation::new(0.95, 1.0).unwrap());
        let b = blocks(&r, &sp, &mut rng);
        let tx: Vec<Vec<C64>> = b.iter().map(|m| m.tx.clone()).collect();
        let y = eve_receive(&r, &tx, &sp, cfg.tx_power_mw(), 0.0, &mut rng).unwrap();
        for u in 0..4 {
            let gain = (cfg.tx_power_mw() * r.beta[u]).sqrt() * r.w.column(u).dotc(&r.h.column(u));
            for tau in 0..40 {
                assert!((y[u][tau] - tx[u][tau] * gain).norm() < 1e-9 * gain.norm());
            }
        }
    }

    #[test]
    fn an_only_power_matches_realization() {
        let (cfg, r, mut rng) = setup(3);
        let sp = PowerSplit { rho_m: 1.0, rho_t: 0.0, phi_s: 0.0, phi_n: 1.0 };
        let t = 25_000;
        let tx = vec![vec![C64::new(0.0, 0.0); t]; 4];
        let y = eve_receive(&r, &tx, &sp, cfg.tx_power_mw(), cfg.noise_power_mw(), &mut rng).unwrap();
        let cov = r.effective_links().an_cov;
        for e in 0..4 {
            let pred = cfg.tx_power_mw() * r.alpha[e] * cov[(e, e)].re + cfg.noise_power_mw();
            let p: Vec<f64> = y[e].iter().map(|v| v.norm_sqr()).collect();
            let mean = p.iter().sum::<f64>() / t as f64;
            let var = p.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (t - 1) as f64;
            let se = (var / t as f64).sqrt();
            assert!((mean - pred).abs() <= 3.0 * se + 1e-30, "eve {e}: {mean} vs {pred} (se {se})");
        }
    }

    #[test]
    fn coin_flip_tag_limits_plaintext() {
        let (cfg, r, mut rng) = setup(4);
        let sp = PowerSplit::new(PowerAllocation::new(1.0, 1.0).unwrap());
        let b = blocks(&r, &sp, &mut rng);
        let tx: Vec<Vec<C64>> = b.iter().map(|m| m.tx.clone()).collect();
        let y = eve_receive(&r, &tx, &sp, cfg.tx_power_mw(), 0.0, &mut rng).unwrap();
        let gw = r.g.adjoint() * &r.w;
        let yt = eve_combine(&y, &gw, &r.alpha, &sp, cfg.tx_power_mw()).unwrap();
        let blk = eve_detect_and_decode(&yt, sp.rho_m, sp.rho_t);
        for u in 0..4 {
            assert_eq!(blk.c_hat[u], b[u].ciphertext);
            // no tag power: every tag decision is +1 and the guess is the ciphertext
            assert_eq!(blk.s_hat[u], b[u].ciphertext);
        }
    }

    #[test]
    fn jamming_blocks_have_unit_power() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let sp = PowerSplit::new(PowerAllocation::new(0.95, 1.0).unwrap());
        let x = jamming_block(10_000, &sp, &mut rng);
        let p = x.iter().map(|v| v.norm_sqr()).sum::<f64>() / 1e4;
        assert!((p - 1.0).abs() < 0.02);
    }
}
