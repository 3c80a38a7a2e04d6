//! The non-TBE reference: same precoder and AN, plain message, no tag.

use tbe_core::channel::GeometryScenario;
use tbe_core::optimize::grid_max_rsec;
use tbe_core::theory::{Scenario, Scheme};
use tbe_core::{PowerAllocation, Result, SystemConfig};

/// Closed-form secrecy rate of the baseline at `p`.
pub fn baseline_no_tbe(cfg: &SystemConfig, geom: &GeometryScenario, p: PowerAllocation) -> Result<f64> {
    let scn = Scenario::closed_form(cfg, geom)?;
    Ok(scn.evaluate(p, Scheme::NonTbe)?.security.r_sec)
}

/// Best baseline rate over an `n × n` grid of the allocation box.
pub fn optimized_baseline(scn: &Scenario, n: usize) -> Result<(PowerAllocation, f64)> {
    grid_max_rsec(scn, Scheme::NonTbe, n)
}
