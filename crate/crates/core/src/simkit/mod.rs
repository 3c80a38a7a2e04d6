//! Monte Carlo harness: block trials, ROC re-thresholding and
//! theory/simulation comparison.

pub mod compare;
pub mod roc;
pub mod trial;

pub use compare::{compare_theory_sim, Comparison, TheoryPrediction};
pub use roc::{roc_from_report, roc_sweep, RocPoint};
pub use trial::{block_rng, run_montecarlo, scenario_key, Counts, Estimate, SimOptions, TrialReport};
