//! Effective per-pair gains feeding the SINR and SER expressions.
//!
//! The closed form takes the large-array expectations at face value: the
//! user sees the full array gain `M`, the eavesdropper's signal gain is
//! `β_u⁻¹β̃ f(κ)` and its AN gain `g(κ)`. The ensemble form evaluates the
//! same expectations by averaging exact per-realization noise variances over
//! NLoS draws, which is what a Monte Carlo run actually sees.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::link::{f_kappa, g_kappa};
use crate::channel::{an_scale_sq, effective_links, los_matrix, mix_rician, GeometryScenario, LargeScale};
use crate::config::{AnNormalization, SystemConfig};
use crate::error::{Error, Result};
use crate::C64;

#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveGains {
    /// `A_u`, the user's array gain relative to `β̃`.
    pub array_gain: Vec<f64>,
    /// `S_u`, the eavesdropper's combined signal gain.
    pub eve_signal: Vec<f64>,
    /// `N_u`, the eavesdropper's combined AN gain.
    pub eve_an: Vec<f64>,
}

impl EffectiveGains {
    pub fn closed_form(cfg: &SystemConfig, ls: &LargeScale, gamma: &[f64]) -> Self {
        let m = cfg.num_antennas;
        let kappa = cfg.kappa();
        let an_div = match cfg.an_normalization {
            AnNormalization::UnitPower => 1.0,
            AnNormalization::Literal => cfg.n_an() as f64,
        };
        let k = gamma.len();
        Self {
            array_gain: vec![m as f64; k],
            eve_signal: (0..k).map(|u| ls.beta_tilde / ls.beta[u] * f_kappa(kappa, gamma[u], m)).collect(),
            eve_an: gamma.iter().map(|&g| g_kappa(kappa, g, m) / an_div).collect(),
        }
    }

    /// Averages over `draws` fresh NLoS realizations of the deployment.
    pub fn ensemble(cfg: &SystemConfig, geom: &GeometryScenario, draws: usize, seed: u64) -> Result<Self> {
        if draws == 0 {
            return Err(Error::Domain("ensemble needs at least one draw".into()));
        }
        let k = cfg.num_users;
        let ls = geom.large_scale(cfg)?;
        let kappa = cfg.kappa();
        let h_los = los_matrix(cfg, &geom.ue_elev);
        let g_los = los_matrix(cfg, &geom.eve_elev);
        let s2 = an_scale_sq(cfg);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut inv_a = vec![0.0; k];
        let mut inv_s = vec![0.0; k];
        let mut n_over_s = vec![0.0; k];
        for _ in 0..draws {
            let h = redraw(&h_los, kappa, &mut rng);
            let g = redraw(&g_los, kappa, &mut rng);
            let (_, links) = effective_links(&h, &g, &ls.beta, s2)?;
            let per = PairVariances::from_links(&links, &ls)?;
            for u in 0..k {
                inv_a[u] += 1.0 / per.array_gain[u];
                inv_s[u] += 1.0 / per.eve_signal[u];
                n_over_s[u] += per.eve_an[u] / per.eve_signal[u];
            }
        }
        let n = draws as f64;
        let eve_signal: Vec<f64> = inv_s.iter().map(|v| n / v).collect();
        Ok(Self {
            array_gain: inv_a.iter().map(|v| n / v).collect(),
            eve_an: n_over_s.iter().zip(&eve_signal).map(|(v, s)| v / n * s).collect(),
            eve_signal,
        })
    }
}

fn redraw(los: &DMatrix<C64>, kappa: f64, rng: &mut ChaCha8Rng) -> DMatrix<C64> {
    let mut out = los.clone();
    for c in 0..los.ncols() {
        out.set_column(c, &mix_rician(&los.column(c).into_owned(), kappa, rng));
    }
    out
}

/// Exact gains of a single realization, in the same parameterization as
/// [`EffectiveGains`].
#[derive(Debug, Clone, PartialEq)]
pub struct PairVariances {
    pub array_gain: Vec<f64>,
    pub eve_signal: Vec<f64>,
    pub eve_an: Vec<f64>,
    /// The eavesdropper combiner `B = A (A^H A)^{-1}`, `A = G^H W`.
    pub combiner: DMatrix<C64>,
}

impl PairVariances {
    pub fn from_links(links: &crate::channel::EffectiveLinks, ls: &LargeScale) -> Result<Self> {
        let k = links.hw.nrows();
        let a = &links.gw;
        let ata = a.adjoint() * a;
        let inv = ata.try_inverse().ok_or(Error::Singular("W^H G G^H W"))?;
        let b = a * inv;
        let bcb = b.adjoint() * &links.an_cov * &b;
        let mut out = Self {
            array_gain: Vec::with_capacity(k),
            eve_signal: Vec::with_capacity(k),
            eve_an: Vec::with_capacity(k),
            combiner: b.clone(),
        };
        for u in 0..k {
            out.array_gain.push(ls.beta[u] * links.hw[(u, u)].norm_sqr() / ls.beta_tilde);
            let noise: f64 = (0..k).map(|e| b[(e, u)].norm_sqr() / ls.alpha[e]).sum();
            let s = 1.0 / (ls.alpha[u] * noise);
            out.eve_signal.push(s);
            out.eve_an.push(bcb[(u, u)].re * s);
        }
        Ok(out)
    }
}
