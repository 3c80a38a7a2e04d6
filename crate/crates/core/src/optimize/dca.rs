//! Difference-of-convex iteration for the secrecy rate.

use rayon::prelude::*;

use super::gradient::numeric_gradient;
use super::{metrics_at, PHI_RANGE, RHO_RANGE};
use crate::error::{Error, Result};
use crate::theory::{PowerAllocation, Scenario, Scheme};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DcaOptions {
    pub eps: f64,
    pub max_iter: usize,
    pub start: [f64; 2],
    /// Finite-difference step for the linearization.
    pub grad_step: f64,
    /// Step-norm tolerance of the inner projected-gradient solve.
    pub inner_tol: f64,
}

impl Default for DcaOptions {
    fn default() -> Self {
        Self { eps: 1e-6, max_iter: 100, start: [1.0, 1.0], grad_step: 1e-6, inner_tol: 1e-8 }
    }
}

/// One outer iterate: `q` is `−∇R_E` at `p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DcaState {
    pub iteration: usize,
    pub p: [f64; 2],
    pub q: [f64; 2],
    pub r_u: f64,
    pub r_e: f64,
    pub r_sec: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DcaResult {
    pub p: PowerAllocation,
    /// Clipped per-pair secrecy rate at the solution.
    pub r_sec: f64,
    /// `R_U − R_E`, the quantity the iteration ascends.
    pub r_dc: f64,
    pub iterations: usize,
    pub converged: bool,
    pub trace: Vec<DcaState>,
}

fn project(p: [f64; 2]) -> [f64; 2] {
    [p[0].clamp(RHO_RANGE.0, RHO_RANGE.1), p[1].clamp(PHI_RANGE.0, PHI_RANGE.1)]
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

/// Projected gradient with backtracking on `s(p) = −R_U(p) − ⟨p, q⟩`.
fn solve_subproblem<F: FnMut([f64; 2]) -> Result<f64>>(
    mut r_u: F,
    q: [f64; 2],
    start: [f64; 2],
    opts: &DcaOptions,
) -> Result<[f64; 2]> {
    let mut s = |p: [f64; 2]| -> Result<f64> { Ok(-r_u(p)? - (p[0] * q[0] + p[1] * q[1])) };
    let mut p = start;
    let mut sp = s(p)?;
    let mut step = 0.05;
    for _ in 0..500 {
        let mut err = None;
        let g = numeric_gradient(
            |x| match s(x) {
                Ok(v) => v,
                Err(e) => {
                    err = Some(e);
                    f64::NAN
                }
            },
            p,
            opts.grad_step,
        );
        if let Some(e) = err {
            return Err(e);
        }
        let gn = (g[0] * g[0] + g[1] * g[1]).sqrt();
        if gn == 0.0 || !gn.is_finite() {
            break;
        }
        let mut moved = false;
        let mut t = step;
        for _ in 0..60 {
            let cand = project([p[0] - t * g[0] / gn, p[1] - t * g[1] / gn]);
            let d = dist(cand, p);
            if d <= opts.inner_tol {
                break;
            }
            let sc = s(cand)?;
            if sc <= sp - 1e-4 * gn * d {
                let done = d <= opts.inner_tol;
                p = cand;
                sp = sc;
                moved = !done;
                step = (t * 2.0).min(0.1);
                break;
            }
            t *= 0.5;
        }
        if !moved {
            break;
        }
    }
    Ok(p)
}

/// DCA from `opts.start`. Each outer step linearizes `R_E` at the current
/// point, solves the convex-concave subproblem on the box, and is pulled back
/// toward the current point if `R_U − R_E` would drop.
pub fn dca_maximize_rsec(scn: &Scenario, scheme: Scheme, opts: &DcaOptions) -> Result<DcaResult> {
    let eval = |p: [f64; 2]| metrics_at(scn, scheme, p[0], p[1]);
    let mut p = project(opts.start);
    let mut trace: Vec<DcaState> = Vec::new();
    let mut converged = false;
    let with_trace = |e: Error, trace: &[DcaState]| match e {
        Error::NonFinite(m) => Error::NonFinite(format!("{m} after {} iterations, last {:?}", trace.len(), trace.last())),
        other => other,
    };
    let mut cur = eval(p).map_err(|e| with_trace(e, &trace))?;
    for it in 0..opts.max_iter {
        let mut err = None;
        let gre = numeric_gradient(
            |x| match eval(x) {
                Ok(m) => m.r_e,
                Err(e) => {
                    err = Some(e);
                    f64::NAN
                }
            },
            p,
            opts.grad_step,
        );
        if let Some(e) = err {
            return Err(with_trace(e, &trace));
        }
        let q = [-gre[0], -gre[1]];
        trace.push(DcaState { iteration: it, p, q, r_u: cur.r_u, r_e: cur.r_e, r_sec: cur.r_sec });
        let cand = solve_subproblem(|x| eval(x).map(|m| m.r_u), q, p, opts)
            .map_err(|e| with_trace(e, &trace))?;
        let d_cur = cur.r_u - cur.r_e;
        let mut next = None;
        let mut frac = 1.0;
        for _ in 0..30 {
            let x = project([p[0] + frac * (cand[0] - p[0]), p[1] + frac * (cand[1] - p[1])]);
            let m = eval(x).map_err(|e| with_trace(e, &trace))?;
            if m.r_u - m.r_e >= d_cur {
                next = Some((x, m));
                break;
            }
            frac *= 0.5;
        }
        let Some((x, m)) = next else {
            converged = true;
            break;
        };
        let step = dist(x, p);
        p = x;
        cur = m;
        if step <= opts.eps {
            converged = true;
            break;
        }
    }
    trace.push(DcaState { iteration: trace.len(), p, q: [f64::NAN; 2], r_u: cur.r_u, r_e: cur.r_e, r_sec: cur.r_sec });
    Ok(DcaResult {
        p: PowerAllocation::new(p[0], p[1])?,
        r_sec: cur.r_sec,
        r_dc: cur.r_u - cur.r_e,
        iterations: trace.len() - 1,
        converged,
        trace,
    })
}

/// Dense-grid maximum of the clipped secrecy rate over `ρ ∈ [0.9, 1]` and
/// `φ ∈ {1/n, …, 1}`.
pub fn grid_max_rsec(scn: &Scenario, scheme: Scheme, n: usize) -> Result<(PowerAllocation, f64)> {
    let pts: Vec<(f64, f64)> = (0..n)
        .flat_map(|i| {
            let rho = RHO_RANGE.0 + (RHO_RANGE.1 - RHO_RANGE.0) * i as f64 / (n - 1) as f64;
            (1..=n).map(move |j| (rho, j as f64 / n as f64))
        })
        .collect();
    let vals: Vec<Result<f64>> = pts.par_iter().map(|&(r, f)| metrics_at(scn, scheme, r, f).map(|m| m.r_sec)).collect();
    let mut best = (pts[0], f64::NEG_INFINITY);
    for (pt, v) in pts.iter().zip(vals) {
        let v = v?;
        if v > best.1 {
            best = (*pt, v);
        }
    }
    Ok((PowerAllocation::new(best.0 .0, best.0 .1)?, best.1))
}

/// DCA from the printed start and from the two highest local maxima of a
/// coarse grid; the best clipped secrecy rate wins.
pub fn dca_two_start(scn: &Scenario, scheme: Scheme, opts: &DcaOptions) -> Result<DcaResult> {
    let n = 21;
    let rho = |i: usize| RHO_RANGE.0 + (RHO_RANGE.1 - RHO_RANGE.0) * i as f64 / (n - 1) as f64;
    let phi = |j: usize| PHI_RANGE.0 + (PHI_RANGE.1 - PHI_RANGE.0) * j as f64 / (n - 1) as f64;
    let mut grid = vec![vec![0.0; n]; n];
    for (i, row) in grid.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = metrics_at(scn, scheme, rho(i), phi(j))?.r_sec;
        }
    }
    let mut peaks = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let v = grid[i][j];
            let mut is_peak = true;
            for di in -1i64..=1 {
                for dj in -1i64..=1 {
                    let (a, b) = (i as i64 + di, j as i64 + dj);
                    if (di, dj) != (0, 0) && a >= 0 && b >= 0 && (a as usize) < n && (b as usize) < n {
                        is_peak &= v >= grid[a as usize][b as usize];
                    }
                }
            }
            if is_peak {
                peaks.push((v, [rho(i), phi(j)]));
            }
        }
    }
    peaks.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut best = dca_maximize_rsec(scn, scheme, opts)?;
    for (_, start) in peaks.into_iter().take(2) {
        let r = dca_maximize_rsec(scn, scheme, &DcaOptions { start, ..*opts })?;
        if r.r_sec > best.r_sec {
            best = r;
        }
    }
    Ok(best)
}
