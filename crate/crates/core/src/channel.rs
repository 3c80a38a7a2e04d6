//! UAV geometry, urban-micro path loss, Rician channels, zero-forcing
//! precoding and the null-space artificial-noise basis.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use std::f64::consts::{FRAC_1_SQRT_2, PI};

use crate::config::{AnNormalization, PathLossConvention, SystemConfig};
use crate::error::{Error, Result};
use crate::C64;

/// Urban-micro path loss in dB: `32.4 + 21 lg d + 20 lg f_c`.
pub fn path_loss_db(distance_m: f64, carrier_ghz: f64) -> Result<f64> {
    if !(distance_m > 0.0) {
        return Err(Error::Domain(format!("distance {distance_m} must be positive")));
    }
    if !(carrier_ghz > 0.5 && carrier_ghz < 100.0) {
        return Err(Error::Domain(format!("carrier {carrier_ghz} GHz outside (0.5, 100)")));
    }
    Ok(32.4 + 21.0 * distance_m.log10() + 20.0 * carrier_ghz.log10())
}

/// Large-scale gain for a link of the given length.
pub fn path_loss_beta(distance_m: f64, carrier_ghz: f64, conv: PathLossConvention) -> Result<f64> {
    let pl = path_loss_db(distance_m, carrier_ghz)?;
    Ok(match conv {
        PathLossConvention::Decibel => 10f64.powf(-pl / 10.0),
        PathLossConvention::ReciprocalLiteral => 1.0 / pl,
    })
}

/// Response of a vertical uniform linear array, element `m` being
/// `exp(−j 2π d_s/λ m sin θ)`.
pub fn steering_vector(elevation: f64, m: usize, spacing: f64, wavelength: f64) -> DVector<C64> {
    let k = -2.0 * PI * spacing / wavelength * elevation.sin();
    DVector::from_fn(m, |i, _| C64::from_polar(1.0, k * i as f64))
}

/// Entries i.i.d. CN(0, 1).
pub fn complex_gaussian<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DVector<C64> {
    DVector::from_fn(n, |_, _| cn01(rng))
}

#[inline]
pub(crate) fn cn01<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re * FRAC_1_SQRT_2, im * FRAC_1_SQRT_2)
}

/// LoS and NLoS amplitude weights `(√(κ/(κ+1)), √(1/(κ+1)))`; κ = ∞ is pure LoS.
pub fn rician_weights(kappa: f64) -> (f64, f64) {
    if kappa.is_infinite() {
        (1.0, 0.0)
    } else {
        ((kappa / (kappa + 1.0)).sqrt(), (1.0 / (kappa + 1.0)).sqrt())
    }
}

/// One Rician channel vector around the LoS steering vector.
pub fn draw_channel<R: Rng + ?Sized>(
    elevation: f64,
    kappa: f64,
    m: usize,
    spacing: f64,
    wavelength: f64,
    rng: &mut R,
) -> Result<DVector<C64>> {
    if !(kappa >= 0.0) {
        return Err(Error::Domain(format!("Rician factor {kappa} must be nonnegative")));
    }
    let los = steering_vector(elevation, m, spacing, wavelength);
    Ok(mix_rician(&los, kappa, rng))
}

pub(crate) fn mix_rician<R: Rng + ?Sized>(los: &DVector<C64>, kappa: f64, rng: &mut R) -> DVector<C64> {
    let (a, b) = rician_weights(kappa);
    if b == 0.0 {
        return los.clone();
    }
    DVector::from_fn(los.len(), |i, _| los[i] * a + cn01(rng) * b)
}

/// User and eavesdropper positions. Eavesdropper `e` shadows user `e` at
/// elevation `θ_e + Δθ`, flying at the eavesdropper height.
#[derive(Debug, Clone, PartialEq)]
pub struct GeometryScenario {
    pub ue_horiz_m: Vec<f64>,
    pub ue_elev: Vec<f64>,
    pub eve_elev: Vec<f64>,
    pub ue_dist_m: Vec<f64>,
    pub eve_dist_m: Vec<f64>,
}

impl GeometryScenario {
    pub fn from_horizontal(cfg: &SystemConfig, horiz: &[f64]) -> Result<Self> {
        if horiz.len() != cfg.num_users {
            return Err(Error::Length(format!(
                "{} horizontal distances for {} users",
                horiz.len(),
                cfg.num_users
            )));
        }
        if horiz.iter().any(|&l| !(l > 0.0)) {
            return Err(Error::Domain("horizontal distances must be positive".into()));
        }
        let h = cfg.ue_height_m;
        let ue_elev: Vec<f64> = horiz.iter().map(|&l| (h / l).atan()).collect();
        let ue_dist_m = horiz.iter().map(|&l| l.hypot(h)).collect();
        let eve_elev: Vec<f64> = ue_elev.iter().map(|t| t + cfg.angle_offset_rad()).collect();
        if eve_elev.iter().any(|&v| !(v > 0.0 && v < PI)) {
            return Err(Error::Domain("eavesdropper elevation leaves (0, π)".into()));
        }
        let eve_dist_m = eve_elev.iter().map(|v| cfg.eve_height_m / v.sin()).collect();
        Ok(Self { ue_horiz_m: horiz.to_vec(), ue_elev, eve_elev, ue_dist_m, eve_dist_m })
    }

    /// Same users, eavesdroppers re-placed for `cfg`'s height and angle offset.
    pub fn with_eves(&self, cfg: &SystemConfig) -> Result<Self> {
        let mut cfg = cfg.clone();
        cfg.num_users = self.ue_horiz_m.len();
        Self::from_horizontal(&cfg, &self.ue_horiz_m)
    }

    /// [`Self::sample`] driven by a ChaCha stream seeded with `seed`.
    pub fn sample_seeded(cfg: &SystemConfig, seed: u64) -> Result<Self> {
        use rand::SeedableRng;
        Self::sample(cfg, &mut rand_chacha::ChaCha8Rng::seed_from_u64(seed))
    }

    /// Uniform horizontal distances, redrawn until every user is resolvable
    /// by zero-forcing on the LoS channel (see [`Self::los_zf_efficiency`]).
    pub fn sample<R: Rng + ?Sized>(cfg: &SystemConfig, rng: &mut R) -> Result<Self> {
        cfg.validate()?;
        let (lo, hi) = cfg.ue_horiz_range_m;
        for _ in 0..100_000 {
            let horiz: Vec<f64> = (0..cfg.num_users).map(|_| rng.random_range(lo..hi)).collect();
            let geom = Self::from_horizontal(cfg, &horiz)?;
            let min_gap = min_angle_gap(&geom.ue_elev);
            if cfg.num_users > 1 && min_gap < 1e-6 {
                continue;
            }
            match geom.los_zf_efficiency(cfg) {
                Ok(eff) if eff.iter().all(|&e| e >= cfg.min_zf_efficiency) => return Ok(geom),
                _ => continue,
            }
        }
        Err(Error::Infeasible(format!(
            "no deployment reached ZF efficiency {} in 100000 draws",
            cfg.min_zf_efficiency
        )))
    }

    /// Per-user `1/(M [(H^H H)^{-1}]_uu)` for the LoS channel: the fraction of
    /// the full array gain M that survives interference nulling.
    pub fn los_zf_efficiency(&self, cfg: &SystemConfig) -> Result<Vec<f64>> {
        let h = los_matrix(cfg, &self.ue_elev);
        let gram = h.adjoint() * &h;
        let inv = gram.try_inverse().ok_or(Error::Singular("LoS Gram matrix"))?;
        let m = cfg.num_antennas as f64;
        Ok((0..cfg.num_users).map(|u| 1.0 / (m * inv[(u, u)].re)).collect())
    }

    pub fn large_scale(&self, cfg: &SystemConfig) -> Result<LargeScale> {
        let beta = self
            .ue_dist_m
            .iter()
            .map(|&d| path_loss_beta(d, cfg.carrier_ghz, cfg.path_loss))
            .collect::<Result<Vec<_>>>()?;
        let alpha = self
            .eve_dist_m
            .iter()
            .map(|&d| path_loss_beta(d, cfg.carrier_ghz, cfg.path_loss))
            .collect::<Result<Vec<_>>>()?;
        let beta_tilde = 1.0 / beta.iter().map(|b| 1.0 / b).sum::<f64>();
        Ok(LargeScale { beta, alpha, beta_tilde })
    }

    /// `Γ_e = |h_{e,LoS}^H g_{e,LoS}|` for every pair.
    pub fn gamma(&self, cfg: &SystemConfig) -> Vec<f64> {
        let (m, ds, wl) = (cfg.num_antennas, cfg.antenna_spacing(), cfg.wavelength_m());
        self.ue_elev
            .iter()
            .zip(&self.eve_elev)
            .map(|(&t, &v)| {
                let h = steering_vector(t, m, ds, wl);
                let g = steering_vector(v, m, ds, wl);
                h.dotc(&g).norm()
            })
            .collect()
    }
}

fn min_angle_gap(angles: &[f64]) -> f64 {
    let mut gap = f64::INFINITY;
    for i in 0..angles.len() {
        for j in i + 1..angles.len() {
            gap = gap.min((angles[i] - angles[j]).abs());
        }
    }
    gap
}

pub(crate) fn los_matrix(cfg: &SystemConfig, elevations: &[f64]) -> DMatrix<C64> {
    let (m, ds, wl) = (cfg.num_antennas, cfg.antenna_spacing(), cfg.wavelength_m());
    let cols: Vec<_> = elevations.iter().map(|&t| steering_vector(t, m, ds, wl)).collect();
    DMatrix::from_columns(&cols)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LargeScale {
    pub beta: Vec<f64>,
    pub alpha: Vec<f64>,
    /// `1/Σ β_k^{-1}`.
    pub beta_tilde: f64,
}

/// One small-scale realization with its precoders.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    pub h: DMatrix<C64>,
    pub g: DMatrix<C64>,
    pub h_los: DMatrix<C64>,
    pub g_los: DMatrix<C64>,
    pub beta: Vec<f64>,
    pub alpha: Vec<f64>,
    pub beta_tilde: f64,
    pub w: DMatrix<C64>,
    pub v: DMatrix<C64>,
    pub gamma: Vec<f64>,
}

impl ChannelRealization {
    pub fn num_users(&self) -> usize {
        self.h.ncols()
    }

    /// `β_u |h_u^H w_u|² / (β̃ M)`; 1 when users are mutually orthogonal.
    pub fn zf_efficiency(&self) -> Vec<f64> {
        let m = self.h.nrows() as f64;
        (0..self.num_users())
            .map(|u| self.beta[u] * self.h.column(u).dotc(&self.w.column(u)).norm_sqr() / (self.beta_tilde * m))
            .collect()
    }
}

pub fn build_realization<R: Rng + ?Sized>(
    cfg: &SystemConfig,
    geom: &GeometryScenario,
    rng: &mut R,
) -> Result<ChannelRealization> {
    let k = cfg.num_users;
    if geom.ue_elev.len() != k || geom.eve_elev.len() != k {
        return Err(Error::Length("geometry does not match num_users".into()));
    }
    let ls = geom.large_scale(cfg)?;
    let kappa = cfg.kappa();
    let h_los = los_matrix(cfg, &geom.ue_elev);
    let g_los = los_matrix(cfg, &geom.eve_elev);
    let mut h = h_los.clone();
    for u in 0..k {
        h.set_column(u, &mix_rician(&h_los.column(u).into_owned(), kappa, rng));
    }
    let mut g = g_los.clone();
    for e in 0..k {
        g.set_column(e, &mix_rician(&g_los.column(e).into_owned(), kappa, rng));
    }
    let w = zf_precoder(&h, &ls.beta)?;
    let v = null_space_basis(&h, cfg.an_normalization);
    let gamma = (0..k).map(|e| h_los.column(e).dotc(&g_los.column(e)).norm()).collect();
    Ok(ChannelRealization {
        h,
        g,
        h_los,
        g_los,
        beta: ls.beta,
        alpha: ls.alpha,
        beta_tilde: ls.beta_tilde,
        w,
        v,
        gamma,
    })
}

/// The K×K matrices that fully determine a block's received samples:
/// `H^H W` at the users, `G^H W` at the eavesdroppers and the eavesdroppers'
/// AN covariance `G^H V V^H G`.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveLinks {
    pub hw: DMatrix<C64>,
    pub gw: DMatrix<C64>,
    pub an_cov: DMatrix<C64>,
}

/// Squared norm of each AN basis vector.
pub fn an_scale_sq(cfg: &SystemConfig) -> f64 {
    let n = cfg.n_an() as f64;
    match cfg.an_normalization {
        AnNormalization::UnitPower => 1.0 / n,
        AnNormalization::Literal => 1.0 / (n * n),
    }
}

/// Effective links without forming the null-space basis:
/// `V V^H = s² (I − H (H^H H)^{-1} H^H)` for orthonormal columns scaled by `s`.
pub fn effective_links(
    h: &DMatrix<C64>,
    g: &DMatrix<C64>,
    beta: &[f64],
    an_scale_sq: f64,
) -> Result<(DMatrix<C64>, EffectiveLinks)> {
    let w = zf_precoder(h, beta)?;
    let gram = h.adjoint() * h;
    let inv = gram.try_inverse().ok_or(Error::Singular("H^H H"))?;
    let gh = g.adjoint() * h;
    let gg = g.adjoint() * g;
    let proj = &gh * inv * gh.adjoint();
    let mut an_cov = (gg - proj) * C64::from(an_scale_sq);
    // exact Hermitian symmetry for the Cholesky factorization downstream
    let k = an_cov.nrows();
    for i in 0..k {
        an_cov[(i, i)] = C64::new(an_cov[(i, i)].re, 0.0);
        for j in i + 1..k {
            let v = (an_cov[(i, j)] + an_cov[(j, i)].conj()) * 0.5;
            an_cov[(i, j)] = v;
            an_cov[(j, i)] = v.conj();
        }
    }
    let links = EffectiveLinks { hw: h.adjoint() * &w, gw: g.adjoint() * &w, an_cov };
    Ok((w, links))
}

impl ChannelRealization {
    /// Effective links computed through the explicit basis `V`.
    pub fn effective_links(&self) -> EffectiveLinks {
        let gv = self.g.adjoint() * &self.v;
        EffectiveLinks {
            hw: self.h.adjoint() * &self.w,
            gw: self.g.adjoint() * &self.w,
            an_cov: &gv * gv.adjoint(),
        }
    }
}

/// Balanced zero-forcing:`w_u = √(β̃/β_u) · w̃_u/‖w̃_u‖` with `W̃ = H(H^H H)^{-1}`.
pub fn zf_precoder(h: &DMatrix<C64>, beta: &[f64]) -> Result<DMatrix<C64>> {
    let gram = h.adjoint() * h;
    let inv = gram.try_inverse().ok_or(Error::Singular("H^H H"))?;
    let mut w = h * inv;
    // LU happily "inverts" numerically singular Gram matrices; check the
    // nulling identity instead of trusting it.
    let k = h.ncols();
    let resid = (h.adjoint() * &w - DMatrix::<C64>::identity(k, k)).norm();
    if !(resid < 1e-6) {
        return Err(Error::Singular("H^H H"));
    }
    let beta_tilde = 1.0 / beta.iter().map(|b| 1.0 / b).sum::<f64>();
    for (u, mut col) in w.column_iter_mut().enumerate() {
        let n = col.norm();
        if !(n.is_finite() && n > 0.0) {
            return Err(Error::Singular("zero-forcing column"));
        }
        col *= C64::from((beta_tilde / beta[u]).sqrt() / n);
    }
    Ok(w)
}

/// Orthonormal basis of the orthogonal complement of `span(H)`, scaled per
/// `norm`. Columns are `M − K` vectors `v_i` with `H^H v_i = 0`.
pub fn null_space_basis(h: &DMatrix<C64>, norm: AnNormalization) -> DMatrix<C64> {
    let (m, k) = h.shape();
    let q = h.clone().qr().q();
    let mut basis: Vec<DVector<C64>> = (0..k).map(|i| q.column(i).into_owned()).collect();
    for i in 0..m {
        if basis.len() == m {
            break;
        }
        let mut v = DVector::<C64>::zeros(m);
        v[i] = C64::new(1.0, 0.0);
        for _ in 0..2 {
            for b in &basis {
                let c = b.dotc(&v);
                v.axpy(-c, b, C64::new(1.0, 0.0));
            }
        }
        let n = v.norm();
        if n > 1e-3 {
            basis.push(v / C64::from(n));
        }
    }
    let n_an = (m - k) as f64;
    let scale = match norm {
        AnNormalization::UnitPower => 1.0 / n_an.sqrt(),
        AnNormalization::Literal => 1.0 / n_an,
    };
    let cols: Vec<_> = basis[k..].iter().map(|b| b * C64::from(scale)).collect();
    DMatrix::from_columns(&cols)
}
