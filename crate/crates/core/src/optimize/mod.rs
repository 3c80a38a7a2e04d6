//! Power-allocation solvers: the DCA iteration for the secrecy rate, the
//! bisection search and KKT cases for constrained AFP, plus the gradient and
//! unimodality tooling they lean on.

pub mod dca;
pub mod gradient;
pub mod kkt;
pub mod probe;
pub mod search;

pub use dca::{dca_maximize_rsec, dca_two_start, grid_max_rsec, DcaOptions, DcaResult, DcaState};
pub use gradient::numeric_gradient;
pub use kkt::{invert_constraint_phi, solve_constrained_afp, Constraint, ConstraintSpec, KktCase, KktSolution};
pub use probe::{unimodality_probe, unimodality_scan, ProbeReport, Shape};
pub use search::{bisection_rho, ProbeMode, SearchResult};

use crate::error::{Error, Result};
use crate::theory::{PowerAllocation, Scenario, Scheme, SecurityMetrics};

/// Message-share interval searched by every solver.
pub const RHO_RANGE: (f64, f64) = (0.9, 1.0);
/// Signal-share interval; the lower end keeps the allocation inside `(0,1]²`.
pub const PHI_RANGE: (f64, f64) = (1e-3, 1.0);

/// Security metrics at `(ρ, φ)`, with non-finite values reported as errors.
pub fn metrics_at(scn: &Scenario, scheme: Scheme, rho: f64, phi: f64) -> Result<SecurityMetrics> {
    let p = PowerAllocation::new(rho, phi)?;
    let s = scn.evaluate(p, scheme)?.security;
    for (name, v) in [("r_u", s.r_u), ("r_e", s.r_e), ("afp", s.afp), ("p_d", s.p_d), ("p_w", s.p_w)] {
        if !v.is_finite() {
            return Err(Error::NonFinite(format!("{name} at ({rho}, {phi})")));
        }
    }
    Ok(s)
}
