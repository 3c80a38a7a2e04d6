//! Closed-form performance metrics as functions of the power allocation.

pub mod binomial;
pub mod gains;
pub mod link;
pub mod q;
pub mod security;

use sha2::{Digest, Sha256};

pub use binomial::{binomial_cdf, BinomialTable};
pub use gains::EffectiveGains;
pub use link::{eve_metrics, f_kappa, g_kappa, negation_prob_exact, ue_metrics, EveLink, LinkMetrics, TagSerForm, UserLink};
pub use q::q_function;
pub use security::{
    auth_probabilities, info_ratio, p_b, p_b_exact, p_f, reliability_metrics, secrecy_rates, select_threshold,
    AuthProbabilities, Rates, Reliability,
};

use crate::channel::{GeometryScenario, LargeScale};
use crate::config::SystemConfig;
use crate::error::{Error, Result};

/// Power fractions `ρ = ρ_m²` (message share of the signal) and `φ = φ_s²`
/// (signal share of the total, the rest being AN).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerAllocation {
    pub rho: f64,
    pub phi: f64,
}

impl PowerAllocation {
    pub fn new(rho: f64, phi: f64) -> Result<Self> {
        if !(rho > 0.0 && rho <= 1.0 && phi > 0.0 && phi <= 1.0) {
            return Err(Error::Domain(format!("power allocation ({rho}, {phi}) outside (0,1]²")));
        }
        Ok(Self { rho, phi })
    }

    pub fn rho_m(&self) -> f64 {
        self.rho.sqrt()
    }
    pub fn rho_t(&self) -> f64 {
        (1.0 - self.rho).max(0.0).sqrt()
    }
    pub fn phi_s(&self) -> f64 {
        self.phi.sqrt()
    }
    pub fn phi_n(&self) -> f64 {
        (1.0 - self.phi).max(0.0).sqrt()
    }
}

/// Tag-based encoding, or the reference scheme that embeds the same tag but
/// sends the message in the clear.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scheme {
    #[default]
    Tbe,
    NonTbe,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SecurityMetrics {
    pub p_d: f64,
    pub p_f: f64,
    pub p_b: f64,
    pub eta: usize,
    pub i_e: Vec<f64>,
    pub r_classic: f64,
    pub r_u: f64,
    pub r_e: f64,
    pub r_sec: f64,
    pub bler: f64,
    pub afp: f64,
    pub p_w: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub links: Vec<LinkMetrics>,
    /// Per-user detection probability at the common threshold.
    pub p_d: Vec<f64>,
    pub security: SecurityMetrics,
}

impl Evaluation {
    pub fn mean_user_ser(&self) -> (f64, f64) {
        let k = self.links.len() as f64;
        (
            self.links.iter().map(|l| l.user.ser_m).sum::<f64>() / k,
            self.links.iter().map(|l| l.user.ser_t).sum::<f64>() / k,
        )
    }

    pub fn mean_eve_ser(&self) -> (f64, f64) {
        let k = self.links.len() as f64;
        (
            self.links.iter().map(|l| l.eve.ser_m).sum::<f64>() / k,
            self.links.iter().map(|l| l.eve.ser_t).sum::<f64>() / k,
        )
    }
}

/// How the authentication threshold is chosen at each operating point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ThresholdRule {
    /// Largest `η` meeting the false-alarm target, with `P_b`, re-selected at
    /// every point.
    #[default]
    PerPoint,
    /// One `η` for every point.
    Fixed(usize),
}

/// Which gain model a [`Scenario`] was built with.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GainModel {
    ClosedForm,
    Ensemble { draws: usize, seed: u64 },
}

/// A deployment with everything the metrics need precomputed.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub cfg: SystemConfig,
    pub geom: GeometryScenario,
    pub large_scale: LargeScale,
    pub gamma: Vec<f64>,
    pub gains: EffectiveGains,
    pub model: GainModel,
    pub tag_form: TagSerForm,
    pub threshold: ThresholdRule,
    table: BinomialTable,
    noise_over_tx: f64,
}

impl Scenario {
    pub fn closed_form(cfg: &SystemConfig, geom: &GeometryScenario) -> Result<Self> {
        cfg.validate()?;
        let ls = geom.large_scale(cfg)?;
        let gamma = geom.gamma(cfg);
        let gains = EffectiveGains::closed_form(cfg, &ls, &gamma);
        Ok(Self::assemble(cfg, geom, ls, gamma, gains, GainModel::ClosedForm))
    }

    pub fn ensemble(cfg: &SystemConfig, geom: &GeometryScenario, draws: usize, seed: u64) -> Result<Self> {
        cfg.validate()?;
        let ls = geom.large_scale(cfg)?;
        let gamma = geom.gamma(cfg);
        let gains = EffectiveGains::ensemble(cfg, geom, draws, seed)?;
        Ok(Self::assemble(cfg, geom, ls, gamma, gains, GainModel::Ensemble { draws, seed }))
    }

    fn assemble(
        cfg: &SystemConfig,
        geom: &GeometryScenario,
        large_scale: LargeScale,
        gamma: Vec<f64>,
        gains: EffectiveGains,
        model: GainModel,
    ) -> Self {
        Self {
            cfg: cfg.clone(),
            geom: geom.clone(),
            large_scale,
            gamma,
            gains,
            model,
            tag_form: TagSerForm::Full,
            threshold: ThresholdRule::PerPoint,
            table: BinomialTable::new(cfg.block_len),
            noise_over_tx: cfg.noise_power_mw() / cfg.tx_power_mw(),
        }
    }

    pub fn with_threshold(mut self, rule: ThresholdRule) -> Self {
        self.threshold = rule;
        self
    }

    /// The threshold the false-alarm target alone fixes, `P_b` taken as 0.
    pub fn base_threshold(&self) -> Result<usize> {
        select_threshold(&self.table, self.cfg.pf_target, 0.0, 0.5)
    }

    pub fn table(&self) -> &BinomialTable {
        &self.table
    }

    /// `σ_n²/P_T`.
    pub fn noise_over_tx(&self) -> f64 {
        self.noise_over_tx
    }

    pub fn digest(&self) -> String {
        scenario_digest(&self.cfg, &self.geom)
    }

    pub fn links(&self, p: PowerAllocation) -> Result<Vec<LinkMetrics>> {
        let kappa = self.cfg.kappa();
        let m = self.cfg.num_antennas;
        let ls = &self.large_scale;
        (0..self.cfg.num_users)
            .map(|u| {
                let user = ue_metrics(self.noise_over_tx, ls.beta_tilde, self.gains.array_gain[u], p, self.tag_form)?;
                let eve = eve_metrics(
                    self.noise_over_tx,
                    ls.alpha[u],
                    self.gains.eve_signal[u],
                    self.gains.eve_an[u],
                    p,
                );
                Ok(LinkMetrics {
                    user,
                    eve,
                    f_kappa: f_kappa(kappa, self.gamma[u], m),
                    g_kappa: g_kappa(kappa, self.gamma[u], m),
                    gamma: self.gamma[u],
                })
            })
            .collect()
    }

    /// Full metric bundle. The threshold is re-selected at every point from
    /// the false-alarm target.
    pub fn evaluate(&self, p: PowerAllocation, scheme: Scheme) -> Result<Evaluation> {
        let links = self.links(p)?;
        let k = links.len() as f64;
        let t = self.cfg.block_len;
        let mean_pt = links.iter().map(|l| l.user.ser_t).sum::<f64>() / k;
        let pb = match scheme {
            Scheme::Tbe => links.iter().map(|l| p_b(&self.table, l.user.ser_m)).sum::<f64>() / k,
            Scheme::NonTbe => 0.0,
        };
        let eta = match self.threshold {
            ThresholdRule::PerPoint => select_threshold(&self.table, self.cfg.pf_target, pb, mean_pt)?,
            ThresholdRule::Fixed(e) if e <= t => e,
            ThresholdRule::Fixed(e) => return Err(Error::Domain(format!("threshold {e} exceeds block length {t}"))),
        };
        let p_d: Vec<f64> = links.iter().map(|l| self.table.cdf(eta, l.user.ser_t)).collect();
        let pf = p_f(&self.table, eta, pb, mean_pt);
        let i_e: Vec<f64> = match scheme {
            Scheme::Tbe => links.iter().map(|l| info_ratio(l.eve.ser_t)).collect(),
            Scheme::NonTbe => vec![1.0; links.len()],
        };
        let users: Vec<UserLink> = links.iter().map(|l| l.user).collect();
        let eves: Vec<EveLink> = links.iter().map(|l| l.eve).collect();
        let rates = secrecy_rates(&users, &eves, &p_d, &i_e);
        let eve_sers: Vec<(f64, f64)> = match scheme {
            Scheme::Tbe => eves.iter().map(|e| (e.ser_m, e.ser_t)).collect(),
            Scheme::NonTbe => eves.iter().map(|e| (e.ser_m, 0.0)).collect(),
        };
        let mut bler = 0.0;
        let mut afp = 0.0;
        let mut p_w = 0.0;
        for (u, l) in links.iter().enumerate() {
            let r = reliability_metrics(l.user.ser_m, p_d[u], &eve_sers, t);
            bler += r.bler / k;
            afp += r.afp / k;
            p_w = r.p_w;
        }
        let security = SecurityMetrics {
            p_d: p_d.iter().sum::<f64>() / k,
            p_f: pf,
            p_b: pb,
            eta,
            i_e,
            r_classic: rates.r_classic,
            r_u: rates.r_u,
            r_e: rates.r_e,
            r_sec: rates.r_sec,
            bler,
            afp,
            p_w,
        };
        Ok(Evaluation { links, p_d, security })
    }
}

/// Stable identifier of a configuration and deployment.
pub fn scenario_digest(cfg: &SystemConfig, geom: &GeometryScenario) -> String {
    let mut h = Sha256::new();
    h.update(format!("{cfg:?}").as_bytes());
    for v in geom.ue_horiz_m.iter().chain(&geom.eve_elev) {
        h.update(v.to_bits().to_be_bytes());
    }
    h.finalize().iter().take(8).map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scenario() -> Scenario {
        let cfg = SystemConfig::default();
        let geom = GeometryScenario::from_horizontal(&cfg, &[12.0, 30.0, 55.0, 90.0]).unwrap();
        Scenario::closed_form(&cfg, &geom).unwrap()
    }

    #[test]
    fn allocation_bounds() {
        assert!(PowerAllocation::new(0.0, 1.0).is_err());
        assert!(PowerAllocation::new(1.0, 1.01).is_err());
        let p = PowerAllocation::new(0.96, 0.64).unwrap();
        assert!((p.rho_t() - 0.2).abs() < 1e-12 && (p.phi_n() - 0.6).abs() < 1e-12);
    }

    #[test]
    fn closed_form_users_are_balanced() {
        let s = scenario();
        let e = s.evaluate(PowerAllocation::new(0.95, 1.0).unwrap(), Scheme::Tbe).unwrap();
        for l in &e.links {
            assert!((l.user.ser_m - e.links[0].user.ser_m).abs() < 1e-15);
            assert!((l.user.sinr_m - e.links[0].user.sinr_m).abs() < 1e-12);
        }
        let sec = &e.security;
        assert!(sec.r_sec >= 0.0 && (0.0..=1.0).contains(&sec.afp) && (0.0..=1.0).contains(&sec.p_w));
        assert!(sec.p_f <= 1e-3);
    }

    #[test]
    fn user_ser_trends_in_rho() {
        let s = scenario();
        let mut prev_m = 0.0;
        let mut tag = Vec::new();
        for i in 0..=100 {
            let rho = 1.0 - 0.001 * i as f64;
            let l = s.links(PowerAllocation::new(rho, 1.0).unwrap()).unwrap()[0];
            assert!(l.user.ser_m >= prev_m);
            prev_m = l.user.ser_m;
            tag.push(l.user.ser_t);
        }
        // the tag SER starts at one half and falls as tag power grows
        assert!((tag[0] - 0.5).abs() < 1e-12);
        assert!(tag[100] < tag[0]);
    }

    #[test]
    fn non_tbe_never_beats_tbe_on_wiretap_ser() {
        let s = scenario();
        for phi in [0.3, 0.7, 1.0] {
            let p = PowerAllocation::new(0.97, phi).unwrap();
            let a = s.evaluate(p, Scheme::Tbe).unwrap().security;
            let b = s.evaluate(p, Scheme::NonTbe).unwrap().security;
            assert!(a.p_w >= b.p_w);
            assert!(a.r_e <= b.r_e + 1e-12);
        }
    }

    #[test]
    fn digest_changes_with_geometry() {
        let cfg = SystemConfig::default();
        let a = GeometryScenario::from_horizontal(&cfg, &[12.0, 30.0, 55.0, 90.0]).unwrap();
        let b = GeometryScenario::from_horizontal(&cfg, &[12.0, 30.0, 55.0, 91.0]).unwrap();
        assert_ne!(scenario_digest(&cfg, &a), scenario_digest(&cfg, &b));
        assert_eq!(scenario_digest(&cfg, &a), scenario_digest(&cfg, &a.clone()));
    }
}
