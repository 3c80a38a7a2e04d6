//! Block-level Monte Carlo through the complete chain.

use nalgebra::{Cholesky, DMatrix};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::adversary::{eve_combine, eve_detect_and_decode, jamming_block};
use crate::channel::{an_scale_sq, cn01, effective_links, los_matrix, mix_rician, GeometryScenario};
use crate::config::SystemConfig;
use crate::error::{Error, Result};
use crate::receiver::{authenticate, detect_ciphertext, detect_embedded_tag, normalize_rx, regenerate_tag};
use crate::tbe::{KeyMaterial, MessageBlock, PowerSplit};
use crate::theory::{scenario_digest, PowerAllocation};
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SimOptions {
    /// Drop AWGN and AN entirely.
    pub zero_noise: bool,
    /// Draw a fresh deployment for every block instead of one per run.
    pub resample_geometry: bool,
    /// Run on a dedicated pool of this many threads.
    pub threads: Option<usize>,
}

/// A proportion estimate with its binomial standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub estimate: f64,
    pub std_err: f64,
    pub successes: u64,
    pub trials: u64,
}

impl Estimate {
    pub fn from_counts(successes: u64, trials: u64) -> Self {
        let n = trials.max(1) as f64;
        let p = successes as f64 / n;
        Self { estimate: p, std_err: (p * (1.0 - p) / n).sqrt(), successes, trials }
    }
}

/// Integer tallies; merging is plain addition, so any reduction order gives
/// the same result.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Counts {
    pub blocks: u64,
    pub skipped: u64,
    pub slots_per_user: u64,
    pub user_m_err: Vec<u64>,
    pub user_t_err: Vec<u64>,
    pub eve_m_err: Vec<u64>,
    pub eve_t_err: Vec<u64>,
    pub eve_plain_err: Vec<u64>,
    pub legit_blocks: u64,
    pub legit_accept: u64,
    pub legit_success: u64,
    /// Blocks whose only ciphertext errors are whole-symbol negations.
    pub negation_only: u64,
    /// Accepted blocks whose decoded plaintext is wrong.
    pub accepted_wrong: u64,
    pub jam_blocks: u64,
    pub jam_accept: u64,
    pub legit_hist: Vec<u64>,
    pub jam_hist: Vec<u64>,
    /// Legitimate blocks whose ciphertext errors, if any, are all negations,
    /// so the regenerated tag is the one that was sent.
    pub feature_ok: u64,
    pub feature_ok_hist: Vec<u64>,
}

impl Counts {
    fn new(k: usize, t: usize) -> Self {
        Self {
            user_m_err: vec![0; k],
            user_t_err: vec![0; k],
            eve_m_err: vec![0; k],
            eve_t_err: vec![0; k],
            eve_plain_err: vec![0; k],
            legit_hist: vec![0; t + 1],
            jam_hist: vec![0; t + 1],
            feature_ok_hist: vec![0; t + 1],
            ..Default::default()
        }
    }

    fn merge(mut self, o: Self) -> Self {
        let add = |a: &mut Vec<u64>, b: &[u64]| a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
        self.blocks += o.blocks;
        self.skipped += o.skipped;
        self.slots_per_user += o.slots_per_user;
        add(&mut self.user_m_err, &o.user_m_err);
        add(&mut self.user_t_err, &o.user_t_err);
        add(&mut self.eve_m_err, &o.eve_m_err);
        add(&mut self.eve_t_err, &o.eve_t_err);
        add(&mut self.eve_plain_err, &o.eve_plain_err);
        self.legit_blocks += o.legit_blocks;
        self.legit_accept += o.legit_accept;
        self.legit_success += o.legit_success;
        self.negation_only += o.negation_only;
        self.accepted_wrong += o.accepted_wrong;
        self.jam_blocks += o.jam_blocks;
        self.jam_accept += o.jam_accept;
        add(&mut self.legit_hist, &o.legit_hist);
        add(&mut self.jam_hist, &o.jam_hist);
        self.feature_ok += o.feature_ok;
        add(&mut self.feature_ok_hist, &o.feature_ok_hist);
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialReport {
    pub n_blocks: u64,
    pub seed: u64,
    pub digest: String,
    pub eta: usize,
    pub user_ser_m: Estimate,
    pub user_ser_t: Estimate,
    pub eve_ser_m: Estimate,
    pub eve_ser_t: Estimate,
    /// Acceptance rate over all legitimate blocks.
    pub p_d: Estimate,
    /// Acceptance rate over legitimate blocks whose feature survived, the
    /// quantity the binomial detection formula describes.
    pub p_d_feature: Estimate,
    /// Acceptance rate of jamming blocks.
    pub p_f: Estimate,
    /// Mean over eavesdroppers of `1 + log₂(1 − p̂'_t)`, with a delta-method
    /// standard error.
    pub leakage: (f64, f64),
    pub afp: Estimate,
    /// Fraction of legitimate blocks whose errors are all negations.
    pub p_b: Estimate,
    pub counts: Counts,
}

impl TrialReport {
    fn from_counts(c: Counts, seed: u64, digest: String, eta: usize) -> Self {
        let k = c.user_m_err.len() as u64;
        let slots = c.slots_per_user * k;
        let sum = |v: &[u64]| v.iter().sum::<u64>();
        let mut leak = 0.0;
        let mut leak_var = 0.0;
        for e in 0..k as usize {
            let est = Estimate::from_counts(c.eve_t_err[e], c.slots_per_user);
            leak += 1.0 + (1.0 - est.estimate).log2();
            let d = est.std_err / ((1.0 - est.estimate) * std::f64::consts::LN_2);
            leak_var += d * d;
        }
        let kf = k.max(1) as f64;
        Self {
            n_blocks: c.blocks,
            seed,
            digest,
            eta,
            user_ser_m: Estimate::from_counts(sum(&c.user_m_err), slots),
            user_ser_t: Estimate::from_counts(sum(&c.user_t_err), slots),
            eve_ser_m: Estimate::from_counts(sum(&c.eve_m_err), slots),
            eve_ser_t: Estimate::from_counts(sum(&c.eve_t_err), slots),
            p_d: Estimate::from_counts(c.legit_accept, c.legit_blocks),
            p_d_feature: Estimate::from_counts(c.feature_ok_hist[..=eta].iter().sum(), c.feature_ok),
            p_f: Estimate::from_counts(c.jam_accept, c.jam_blocks),
            leakage: (leak / kf, leak_var.sqrt() / kf),
            afp: Estimate::from_counts(c.legit_blocks - c.legit_success, c.legit_blocks),
            p_b: Estimate::from_counts(c.negation_only, c.legit_blocks),
            counts: c,
        }
    }
}

/// Stream of block `index` under `master_seed`.
pub fn block_rng(master_seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(index);
    rng
}

/// The scenario's shared key, drawn from a stream no block uses.
pub fn scenario_key(cfg: &SystemConfig, master_seed: u64) -> Result<KeyMaterial> {
    let mut rng = block_rng(master_seed, u64::MAX);
    KeyMaterial::random(cfg.key_bits, &mut rng)
}

struct Fixed {
    cfg: SystemConfig,
    geom: GeometryScenario,
    h_los: DMatrix<C64>,
    g_los: DMatrix<C64>,
    key: KeyMaterial,
    split: PowerSplit,
    eta: usize,
    opts: SimOptions,
    seed: u64,
}

/// Run `n_blocks` independent blocks. Each block draws fresh NLoS channels,
/// AN and AWGN from its own stream, sends one message block per user through
/// the legitimate and wiretap chains, and sends one jamming block per user
/// for false-alarm counting.
pub fn run_montecarlo(
    cfg: &SystemConfig,
    geom: &GeometryScenario,
    p: PowerAllocation,
    eta: usize,
    n_blocks: u64,
    master_seed: u64,
    opts: SimOptions,
) -> Result<TrialReport> {
    cfg.validate()?;
    if n_blocks == 0 {
        return Err(Error::Domain("at least one block is required".into()));
    }
    if eta > cfg.block_len {
        return Err(Error::Domain(format!("threshold {eta} exceeds block length")));
    }
    let fixed = Fixed {
        cfg: cfg.clone(),
        geom: geom.clone(),
        h_los: los_matrix(cfg, &geom.ue_elev),
        g_los: los_matrix(cfg, &geom.eve_elev),
        key: scenario_key(cfg, master_seed)?,
        split: PowerSplit::new(p),
        eta,
        opts,
        seed: master_seed,
    };
    let (k, t) = (cfg.num_users, cfg.block_len);
    let work = || {
        (0..n_blocks)
            .into_par_iter()
            .fold(|| Counts::new(k, t), |acc, b| simulate_block(&fixed, b, acc))
            .reduce(|| Counts::new(k, t), Counts::merge)
    };
    let counts = match opts.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Config(e.to_string()))?
            .install(work),
        None => work(),
    };
    Ok(TrialReport::from_counts(counts, master_seed, scenario_digest(cfg, geom), eta))
}

fn simulate_block(f: &Fixed, index: u64, mut acc: Counts) -> Counts {
    acc.blocks += 1;
    match block_counts(f, index, &mut acc) {
        Ok(()) => {}
        Err(_) => acc.skipped += 1,
    }
    acc
}

fn redraw(los: &DMatrix<C64>, kappa: f64, rng: &mut ChaCha8Rng) -> DMatrix<C64> {
    let mut out = los.clone();
    for c in 0..los.ncols() {
        out.set_column(c, &mix_rician(&los.column(c).into_owned(), kappa, rng));
    }
    out
}

fn block_counts(f: &Fixed, index: u64, acc: &mut Counts) -> Result<()> {
    let cfg = &f.cfg;
    let (k, t) = (cfg.num_users, cfg.block_len);
    let mut rng = block_rng(f.seed, index);
    let (geom, h_los, g_los);
    let (geom_ref, h_ref, g_ref) = if f.opts.resample_geometry {
        geom = GeometryScenario::sample(cfg, &mut rng)?;
        h_los = los_matrix(cfg, &geom.ue_elev);
        g_los = los_matrix(cfg, &geom.eve_elev);
        (&geom, &h_los, &g_los)
    } else {
        (&f.geom, &f.h_los, &f.g_los)
    };
    let ls = geom_ref.large_scale(cfg)?;
    let kappa = cfg.kappa();
    let h = redraw(h_ref, kappa, &mut rng);
    let g = redraw(g_ref, kappa, &mut rng);
    let (_, links) = effective_links(&h, &g, &ls.beta, an_scale_sq(cfg))?;
    let p_t = cfg.tx_power_mw();
    let sigma_n = if f.opts.zero_noise { 0.0 } else { cfg.noise_power_mw().sqrt() };
    let sp = &f.split;

    let msgs: Vec<MessageBlock> = (0..k).map(|_| MessageBlock::random(&f.key, t, sp, &mut rng)).collect();

    // legitimate users: ZF removes the other streams and the AN
    for u in 0..k {
        let amp = (p_t * ls.beta[u]).sqrt() * sp.phi_s;
        let y: Vec<C64> = (0..t)
            .map(|tau| {
                let s: C64 = (0..k).map(|kk| links.hw[(u, kk)].conj() * msgs[kk].tx[tau]).sum();
                s * amp + cn01(&mut rng) * sigma_n
            })
            .collect();
        let gain = ls.beta[u] * links.hw[(u, u)].norm_sqr() / ls.beta_tilde;
        let yt = normalize_rx(&y, sp, p_t, ls.beta_tilde, gain)?;
        let c_hat = detect_ciphertext(&yt, sp.rho_m);
        let t_hat = detect_embedded_tag(&yt, &c_hat, sp.rho_m, sp.rho_t)?;
        let t_tilde = regenerate_tag(&f.key, &c_hat)?;
        let d = authenticate(&t_hat, &t_tilde, f.eta)?;
        let m = &msgs[u];
        let mut c_err = 0u64;
        let mut non_negation = false;
        for tau in 0..t {
            if c_hat[tau] != m.ciphertext[tau] {
                c_err += 1;
                if c_hat[tau] != -m.ciphertext[tau] {
                    non_negation = true;
                }
            }
        }
        acc.user_m_err[u] += c_err;
        acc.user_t_err[u] += t_hat.iter().zip(&m.tag).filter(|(a, b)| a != b).count() as u64;
        acc.legit_blocks += 1;
        acc.legit_hist[d.statistic] += 1;
        if c_err > 0 && !non_negation {
            acc.negation_only += 1;
        }
        if !non_negation {
            acc.feature_ok += 1;
            acc.feature_ok_hist[d.statistic] += 1;
        }
        if d.authentic() {
            acc.legit_accept += 1;
            let plain_ok = (0..t).all(|tau| c_hat[tau] * t_tilde[tau] == m.symbols[tau]);
            if c_err == 0 {
                acc.legit_success += 1;
            }
            if !plain_ok {
                acc.accepted_wrong += 1;
            }
        }

        // jammer on the same stream, checked against the legitimate key
        let x = jamming_block(t, sp, &mut rng);
        let y: Vec<C64> = x.iter().map(|v| links.hw[(u, u)].conj() * *v * amp + cn01(&mut rng) * sigma_n).collect();
        let yt = normalize_rx(&y, sp, p_t, ls.beta_tilde, gain)?;
        let c_hat = detect_ciphertext(&yt, sp.rho_m);
        let t_hat = detect_embedded_tag(&yt, &c_hat, sp.rho_m, sp.rho_t)?;
        let t_tilde = regenerate_tag(&f.key, &c_hat)?;
        let d = authenticate(&t_hat, &t_tilde, f.eta)?;
        acc.jam_blocks += 1;
        acc.jam_hist[d.statistic] += 1;
        if d.authentic() {
            acc.jam_accept += 1;
        }
    }

    // eavesdroppers: AN enters through its covariance at the K antennas
    let an_factor = if sp.phi_n > 0.0 && !f.opts.zero_noise {
        let c = links.an_cov.clone();
        let l = match Cholesky::new(c.clone()) {
            Some(ch) => ch.l(),
            None => {
                let jitter = 1e-12 * c.trace().re.max(1e-300);
                Cholesky::new(c + DMatrix::<C64>::identity(k, k) * C64::from(jitter))
                    .ok_or(Error::Singular("AN covariance"))?
                    .l()
            }
        };
        Some(l.map(|v| v.conj()))
    } else {
        None
    };
    let mut y_e = vec![vec![C64::new(0.0, 0.0); t]; k];
    let mut w = vec![C64::new(0.0, 0.0); k];
    for tau in 0..t {
        if an_factor.is_some() {
            for wi in w.iter_mut() {
                *wi = cn01(&mut rng);
            }
        }
        for e in 0..k {
            let s: C64 = (0..k).map(|kk| links.gw[(e, kk)].conj() * msgs[kk].tx[tau]).sum();
            let an: C64 = match &an_factor {
                Some(l) => (0..=e).map(|i| l[(e, i)] * w[i]).sum(),
                None => C64::new(0.0, 0.0),
            };
            let amp = (p_t * ls.alpha[e]).sqrt();
            y_e[e][tau] = (s * sp.phi_s + an * sp.phi_n) * amp + cn01(&mut rng) * sigma_n;
        }
    }
    let yt = eve_combine(&y_e, &links.gw, &ls.alpha, sp, p_t)?;
    let blk = eve_detect_and_decode(&yt, sp.rho_m, sp.rho_t);
    for e in 0..k {
        let m = &msgs[e];
        acc.eve_m_err[e] += (0..t).filter(|&i| blk.c_hat[e][i] != m.ciphertext[i]).count() as u64;
        acc.eve_t_err[e] += (0..t).filter(|&i| blk.t_hat[e][i] != m.tag[i]).count() as u64;
        acc.eve_plain_err[e] += (0..t).filter(|&i| blk.s_hat[e][i] != m.symbols[i]).count() as u64;
    }
    acc.slots_per_user += t as u64;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup() -> (SystemConfig, GeometryScenario) {
        let cfg = SystemConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let geom = GeometryScenario::sample(&cfg, &mut rng).unwrap();
        (cfg, geom)
    }

    #[test]
    fn zero_noise_single_block() {
        let (cfg, geom) = setup();
        let p = PowerAllocation::new(0.95, 1.0).unwrap();
        let opts = SimOptions { zero_noise: true, ..Default::default() };
        let r = run_montecarlo(&cfg, &geom, p, 0, 1, 3, opts).unwrap();
        assert_eq!(r.user_ser_m.estimate, 0.0);
        assert_eq!(r.user_ser_t.estimate, 0.0);
        assert_eq!(r.eve_ser_m.estimate, 0.0);
        assert_eq!(r.eve_ser_t.estimate, 0.0);
        assert_eq!(r.p_d.estimate, 1.0);
    }

    #[test]
    fn reproducible() {
        let (cfg, geom) = setup();
        let p = PowerAllocation::new(0.95, 0.8).unwrap();
        let a = run_montecarlo(&cfg, &geom, p, 60, 64, 9, SimOptions::default()).unwrap();
        let b = run_montecarlo(&cfg, &geom, p, 60, 64, 9, SimOptions::default()).unwrap();
        assert_eq!(a, b);
        let c = run_montecarlo(&cfg, &geom, p, 60, 64, 10, SimOptions::default()).unwrap();
        assert_ne!(a.counts, c.counts);
    }

    #[test]
    fn std_err_formula() {
        let e = Estimate::from_counts(25, 100);
        assert!((e.std_err - (0.25f64 * 0.75 / 100.0).sqrt()).abs() < 1e-15);
    }
}
