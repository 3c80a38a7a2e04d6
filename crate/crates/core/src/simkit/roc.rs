//! ROC curves from a single simulation pass.

use super::trial::{run_montecarlo, Estimate, SimOptions, TrialReport};
use crate::channel::GeometryScenario;
use crate::config::SystemConfig;
use crate::error::Result;
use crate::theory::PowerAllocation;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RocPoint {
    pub eta: usize,
    pub p_f: Estimate,
    pub p_d: Estimate,
    /// Detection over blocks whose feature survived.
    pub p_d_feature: Estimate,
}

fn cumulative(hist: &[u64]) -> Vec<u64> {
    hist.iter()
        .scan(0u64, |acc, &h| {
            *acc += h;
            Some(*acc)
        })
        .collect()
}

/// Re-threshold the recorded mismatch counts at every `η ∈ 0..=T`.
pub fn roc_from_report(report: &TrialReport) -> Vec<RocPoint> {
    let c = &report.counts;
    let legit = cumulative(&c.legit_hist);
    let jam = cumulative(&c.jam_hist);
    let feat = cumulative(&c.feature_ok_hist);
    (0..legit.len())
        .map(|eta| RocPoint {
            eta,
            p_f: Estimate::from_counts(jam[eta], c.jam_blocks),
            p_d: Estimate::from_counts(legit[eta], c.legit_blocks),
            p_d_feature: Estimate::from_counts(feat[eta], c.feature_ok),
        })
        .collect()
}

pub fn roc_sweep(
    cfg: &SystemConfig,
    geom: &GeometryScenario,
    p: PowerAllocation,
    n_blocks: u64,
    seed: u64,
    opts: SimOptions,
) -> Result<Vec<RocPoint>> {
    let report = run_montecarlo(cfg, geom, p, cfg.block_len, n_blocks, seed, opts)?;
    Ok(roc_from_report(&report))
}
