//! Minimum AFP under wiretap-degradation and detection constraints, solved
//! case by case from the KKT conditions.

use super::gradient::numeric_gradient;
use super::search::{bisection_rho, ProbeMode};
use super::{metrics_at, PHI_RANGE, RHO_RANGE};
use crate::error::{Error, Result};
use crate::theory::{PowerAllocation, Scenario, Scheme, SecurityMetrics};

/// Thresholds `P_w ≥ P_{w,0}` and `P_d ≥ P_{d,0}`. The multipliers are
/// filled in by the solver for the constraints it found active.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstraintSpec {
    pub pw_min: f64,
    pub pd_min: f64,
    pub lambda: [f64; 2],
}

impl ConstraintSpec {
    pub fn new(pw_min: f64, pd_min: f64) -> Result<Self> {
        for (n, v) in [("pw_min", pw_min), ("pd_min", pd_min)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::Domain(format!("{n} = {v} outside (0,1)")));
            }
        }
        Ok(Self { pw_min, pd_min, lambda: [0.0; 2] })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Constraint {
    /// Wiretap degradation, non-increasing in `φ`.
    Wiretap,
    /// Detection probability, non-decreasing in `φ`.
    Detection,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KktCase {
    /// No constraint active, `φ = 1`.
    Unconstrained,
    WiretapActive,
    DetectionActive,
    BothActive,
    Infeasible,
}

impl KktCase {
    pub fn number(&self) -> Option<u8> {
        match self {
            KktCase::Unconstrained => Some(1),
            KktCase::WiretapActive => Some(2),
            KktCase::DetectionActive => Some(3),
            KktCase::BothActive => Some(4),
            KktCase::Infeasible => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KktSolution {
    pub case: KktCase,
    /// `None` when infeasible.
    pub p: Option<PowerAllocation>,
    /// 1 when infeasible.
    pub afp: f64,
    pub p_w: f64,
    pub p_d: f64,
    pub spec: ConstraintSpec,
}

/// Tolerance on constraint satisfaction.
const FEAS_TOL: f64 = 1e-9;
const RHO_EPS: f64 = 1e-7;

fn value(m: &SecurityMetrics, c: Constraint) -> f64 {
    match c {
        Constraint::Wiretap => m.p_w,
        Constraint::Detection => m.p_d,
    }
}

/// `φ` at fixed `ρ` where the constraint meets `target`. For the wiretap
/// constraint this is the largest `φ` with `P_w ≥ target`, for detection the
/// smallest `φ` with `P_d ≥ target`. A target met already at the favourable
/// end returns that end; an unreachable one is [`Error::Infeasible`].
pub fn invert_constraint_phi(scn: &Scenario, scheme: Scheme, c: Constraint, target: f64, rho: f64) -> Result<f64> {
    let f = |phi: f64| metrics_at(scn, scheme, rho, phi).map(|m| value(&m, c));
    let (lo, hi) = PHI_RANGE;
    let (f_lo, f_hi) = (f(lo)?, f(hi)?);
    // g(φ) ≥ 0 on the feasible side; feasible side is low φ for wiretap
    let (good, bad, f_good, f_bad) = match c {
        Constraint::Wiretap => (lo, hi, f_lo, f_hi),
        Constraint::Detection => (hi, lo, f_hi, f_lo),
    };
    if f_bad >= target {
        return Ok(bad);
    }
    if f_good < target {
        return Err(Error::Infeasible(format!("{c:?} target {target} unreachable at rho {rho}")));
    }
    let (mut a, mut b) = (good, bad);
    while (b - a).abs() > 1e-13 {
        let m = 0.5 * (a + b);
        if f(m)? >= target {
            a = m;
        } else {
            b = m;
        }
    }
    Ok(a)
}

struct Problem<'a> {
    scn: &'a Scenario,
    scheme: Scheme,
    spec: ConstraintSpec,
}

impl Problem<'_> {
    fn at(&self, rho: f64, phi: f64) -> Result<SecurityMetrics> {
        metrics_at(self.scn, self.scheme, rho, phi)
    }

    fn feasible(&self, m: &SecurityMetrics) -> bool {
        m.p_w >= self.spec.pw_min - FEAS_TOL && m.p_d >= self.spec.pd_min - FEAS_TOL
    }

    /// Penalized objective: AFP where feasible, `1 +` total shortfall elsewhere.
    fn penalized(&self, m: &SecurityMetrics) -> f64 {
        let short = (self.spec.pw_min - m.p_w).max(0.0) + (self.spec.pd_min - m.p_d).max(0.0);
        if short > FEAS_TOL {
            1.0 + short
        } else {
            m.afp
        }
    }

    fn phi_w(&self, rho: f64) -> Result<Option<f64>> {
        match invert_constraint_phi(self.scn, self.scheme, Constraint::Wiretap, self.spec.pw_min, rho) {
            Ok(p) => Ok(Some(p)),
            Err(Error::Infeasible(_)) => Ok(None),
            Err(e) => Err(e),
        }
    }

    fn solution(&self, case: KktCase, rho: f64, phi: f64) -> Result<Option<KktSolution>> {
        let m = self.at(rho, phi)?;
        if !self.feasible(&m) {
            return Ok(None);
        }
        let mut spec = self.spec;
        spec.lambda = self.multipliers(case, rho, phi)?;
        Ok(Some(KktSolution { case, p: Some(PowerAllocation::new(rho, phi)?), afp: m.afp, p_w: m.p_w, p_d: m.p_d, spec }))
    }

    /// Least-squares multipliers for `∇AFP = λ₁∇P_w + λ₂∇P_d` over the active
    /// constraints, clipped at zero.
    fn multipliers(&self, case: KktCase, rho: f64, phi: f64) -> Result<[f64; 2]> {
        let mut err = None;
        let mut grad = |sel: fn(&SecurityMetrics) -> f64| {
            numeric_gradient(
                |x| match self.at(x[0], x[1]) {
                    Ok(m) => sel(&m),
                    Err(e) => {
                        err = Some(e);
                        f64::NAN
                    }
                },
                [rho, phi],
                1e-6,
            )
        };
        let ga = grad(|m| m.afp);
        let gw = grad(|m| m.p_w);
        let gd = grad(|m| m.p_d);
        if let Some(e) = err {
            return Err(e);
        }
        let dot = |a: [f64; 2], b: [f64; 2]| a[0] * b[0] + a[1] * b[1];
        let single = |g: [f64; 2]| {
            let n = dot(g, g);
            if n > 0.0 {
                (dot(ga, g) / n).max(0.0)
            } else {
                0.0
            }
        };
        Ok(match case {
            KktCase::WiretapActive => [single(gw), 0.0],
            KktCase::DetectionActive => [0.0, single(gd)],
            KktCase::BothActive => {
                let det = gw[0] * gd[1] - gw[1] * gd[0];
                if det.abs() > 1e-300 {
                    let l1 = (ga[0] * gd[1] - ga[1] * gd[0]) / det;
                    let l2 = (gw[0] * ga[1] - gw[1] * ga[0]) / det;
                    [l1.max(0.0), l2.max(0.0)]
                } else {
                    [0.0, 0.0]
                }
            }
            _ => [0.0, 0.0],
        })
    }

    fn case1(&self) -> Result<Option<KktSolution>> {
        let mut err = None;
        let r = bisection_rho(
            |rho| match self.at(rho, 1.0) {
                Ok(m) => m.afp,
                Err(e) => {
                    err = Some(e);
                    f64::NAN
                }
            },
            RHO_RANGE.0,
            RHO_RANGE.1,
            RHO_EPS,
            ProbeMode::Golden,
        );
        if let Some(e) = err {
            return Err(e);
        }
        self.solution(KktCase::Unconstrained, r.x, 1.0)
    }

    /// `φ = φ_w(ρ)` with the wiretap constraint binding; search `ρ`.
    fn case2(&self) -> Result<Option<KktSolution>> {
        let mut err = None;
        let obj = |rho: f64| -> Result<f64> {
            Ok(match self.phi_w(rho)? {
                Some(phi) if phi < 1.0 => self.penalized(&self.at(rho, phi)?),
                Some(_) => 2.0 + self.spec.pd_min,
                None => {
                    let m = self.at(rho, PHI_RANGE.0)?;
                    2.0 + (self.spec.pw_min - m.p_w).max(0.0)
                }
            })
        };
        let r = bisection_rho(
            |rho| match obj(rho) {
                Ok(v) => v,
                Err(e) => {
                    err = Some(e);
                    f64::NAN
                }
            },
            RHO_RANGE.0,
            RHO_RANGE.1,
            RHO_EPS,
            ProbeMode::Golden,
        );
        if let Some(e) = err {
            return Err(e);
        }
        match self.phi_w(r.x)? {
            Some(phi) if phi < 1.0 => self.solution(KktCase::WiretapActive, r.x, phi),
            _ => Ok(None),
        }
    }

    /// `φ = 1` with the detection constraint binding on `ρ`.
    fn case3(&self) -> Result<Option<KktSolution>> {
        let mut err = None;
        let r = bisection_rho(
            |rho| match self.at(rho, 1.0) {
                Ok(m) => {
                    let short = (self.spec.pd_min - m.p_d).max(0.0);
                    if short > FEAS_TOL {
                        1.0 + short
                    } else {
                        m.afp
                    }
                }
                Err(e) => {
                    err = Some(e);
                    f64::NAN
                }
            },
            RHO_RANGE.0,
            RHO_RANGE.1,
            RHO_EPS,
            ProbeMode::Golden,
        );
        if let Some(e) = err {
            return Err(e);
        }
        self.solution(KktCase::DetectionActive, r.x, 1.0)
    }

    /// Both binding: roots in `ρ` of `P_d(ρ, φ_w(ρ)) − P_{d,0}`, best AFP.
    fn case4(&self) -> Result<Option<KktSolution>> {
        let n = 201;
        let rho_at = |i: usize| RHO_RANGE.0 + (RHO_RANGE.1 - RHO_RANGE.0) * i as f64 / (n - 1) as f64;
        let resid = |rho: f64| -> Result<Option<(f64, f64)>> {
            Ok(match self.phi_w(rho)? {
                Some(phi) => Some((self.at(rho, phi)?.p_d - self.spec.pd_min, phi)),
                None => None,
            })
        };
        let mut prev: Option<(f64, f64)> = None;
        let mut best: Option<KktSolution> = None;
        for i in 0..n {
            let rho = rho_at(i);
            let cur = resid(rho)?.map(|(r, _)| (rho, r));
            if let (Some((r0, v0)), Some((r1, v1))) = (prev, cur) {
                if v0 == 0.0 || v0.signum() != v1.signum() {
                    let (mut a, mut b, mut va) = (r0, r1, v0);
                    while b - a > 1e-12 {
                        let m = 0.5 * (a + b);
                        let Some((vm, _)) = resid(m)? else { break };
                        if (vm >= 0.0) == (va >= 0.0) {
                            a = m;
                            va = vm;
                        } else {
                            b = m;
                        }
                    }
                    // keep the endpoint on the feasible side
                    let root = if va >= 0.0 { a } else { b };
                    if let Some((_, phi)) = resid(root)? {
                        if let Some(s) = self.solution(KktCase::BothActive, root, phi)? {
                            if best.as_ref().is_none_or(|b| s.afp < b.afp) {
                                best = Some(s);
                            }
                        }
                    }
                }
            }
            prev = cur;
        }
        Ok(best)
    }
}

/// Try the four cases in order and return the first feasible optimum;
/// report AFP = 1 when none is.
pub fn solve_constrained_afp(scn: &Scenario, scheme: Scheme, spec: ConstraintSpec) -> Result<KktSolution> {
    let pb = Problem { scn, scheme, spec };
    for case in [Problem::case1, Problem::case2, Problem::case3, Problem::case4] {
        if let Some(s) = case(&pb)? {
            return Ok(s);
        }
    }
    Ok(KktSolution { case: KktCase::Infeasible, p: None, afp: 1.0, p_w: f64::NAN, p_d: f64::NAN, spec })
}
