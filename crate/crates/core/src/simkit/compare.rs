//! Side-by-side theory and simulation with z-scores.

use super::trial::{Estimate, TrialReport};
use crate::error::{Error, Result};
use crate::theory::{negation_prob_exact, p_b_exact, Evaluation, PowerAllocation, Scenario};

/// Theory values for the quantities a [`TrialReport`] estimates.
#[derive(Debug, Clone, PartialEq)]
pub struct TheoryPrediction {
    pub digest: String,
    pub user_ser_m: f64,
    pub user_ser_t: f64,
    pub eve_ser_m: f64,
    pub eve_ser_t: f64,
    /// Binomial detection probability, which assumes the tag is regenerated
    /// correctly.
    pub p_d: f64,
    /// False alarm of a jamming block, `F(η; T, ½)`.
    pub p_f_jam: f64,
    /// Negation-only block probability as the threshold rule uses it.
    pub p_b: f64,
    /// The same from the exact per-axis error probabilities.
    pub p_b_exact: f64,
    pub leakage: f64,
    pub afp: f64,
}

impl TheoryPrediction {
    pub fn from_evaluation(scenario: &Scenario, p: PowerAllocation, eval: &Evaluation) -> Self {
        let (um, ut) = eval.mean_user_ser();
        let (em, et) = eval.mean_eve_ser();
        let s = &eval.security;
        let k = s.i_e.len().max(1) as f64;
        let t = scenario.cfg.block_len;
        let pb_exact = eval
            .links
            .iter()
            .map(|l| p_b_exact(t, l.user.ser_m, negation_prob_exact(p.rho_m(), p.rho_t(), l.user.sigma)))
            .sum::<f64>()
            / k;
        Self {
            digest: scenario.digest(),
            user_ser_m: um,
            user_ser_t: ut,
            eve_ser_m: em,
            eve_ser_t: et,
            p_d: s.p_d,
            p_f_jam: scenario.table().cdf(s.eta, 0.5),
            p_b: s.p_b,
            p_b_exact: pb_exact,
            leakage: s.i_e.iter().sum::<f64>() / k,
            afp: s.afp,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub metric: &'static str,
    pub sim: f64,
    pub theory: f64,
    pub abs_diff: f64,
    /// The larger of the simulated and the theory-implied standard errors.
    pub std_err: f64,
    pub z: f64,
    pub pass: bool,
}

impl Comparison {
    pub fn new(metric: &'static str, sim: f64, theory: f64, std_err: f64) -> Self {
        let d = (sim - theory).abs();
        let z = if d == 0.0 {
            0.0
        } else if std_err > 0.0 {
            d / std_err
        } else {
            f64::INFINITY
        };
        Self { metric, sim, theory, abs_diff: d, std_err, z, pass: z <= 3.0 }
    }

    /// A proportion against its theory value, with the larger of the two
    /// binomial standard errors so that an all-or-nothing sample still
    /// has a scale.
    pub fn proportion(metric: &'static str, est: &Estimate, theory: f64) -> Self {
        let n = est.trials.max(1) as f64;
        let th = theory.clamp(0.0, 1.0);
        let se = est.std_err.max((th * (1.0 - th) / n).sqrt());
        Self::new(metric, est.estimate, theory, se)
    }
}

pub fn compare_theory_sim(report: &TrialReport, theory: &TheoryPrediction) -> Result<Vec<Comparison>> {
    if report.digest != theory.digest {
        return Err(Error::Contract(format!(
            "scenario digests differ: simulation {} vs theory {}",
            report.digest, theory.digest
        )));
    }
    Ok(vec![
        Comparison::proportion("user_ser_m", &report.user_ser_m, theory.user_ser_m),
        Comparison::proportion("user_ser_t", &report.user_ser_t, theory.user_ser_t),
        Comparison::proportion("eve_ser_m", &report.eve_ser_m, theory.eve_ser_m),
        Comparison::proportion("eve_ser_t", &report.eve_ser_t, theory.eve_ser_t),
        Comparison::proportion("p_d_feature", &report.p_d_feature, theory.p_d),
        Comparison::proportion("p_f_jam", &report.p_f, theory.p_f_jam),
        Comparison::proportion("p_b", &report.p_b, theory.p_b_exact),
        Comparison::new("leakage", report.leakage.0, theory.leakage, report.leakage.1),
        Comparison::proportion("afp", &report.afp, theory.afp),
    ])
}
