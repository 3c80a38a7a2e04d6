//! The named experiments. Each writes one CSV into the output directory and
//! returns a short summary for the terminal.

use std::path::{Path, PathBuf};

use clap::ValueEnum;
use tbe_core::channel::GeometryScenario;
use tbe_core::optimize::{
    dca_two_start, grid_max_rsec, metrics_at, solve_constrained_afp, ConstraintSpec, DcaOptions, KktCase,
};
use tbe_core::simkit::{compare_theory_sim, roc_from_report, run_montecarlo, Comparison, SimOptions, TheoryPrediction};
use tbe_core::theory::{Scenario, Scheme};
use tbe_core::{PowerAllocation, SystemConfig};

use crate::baseline::optimized_baseline;
use crate::config::Experiment;
use crate::error::{CliError, Result};
use crate::output::{fmt, Table};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ExperimentPreset {
    /// SER of message and tag against ρ at φ = 1.
    SerVsRho,
    /// SER against φ at ρ = 0.95.
    SerVsPhi,
    /// Detection against false alarm at four message/tag splits.
    Roc,
    /// R_U, R_E and R_sec over the (ρ, φ) box.
    SecrecySurface,
    /// Best TBE secrecy rate against the best baseline, per angle offset.
    SecrecyCompare,
    /// AFP, P_d and P_w over the (ρ, φ) box.
    AfpSurface,
    /// Constrained AFP against the wiretap bound.
    AfpConstraint,
    /// Secrecy-rate and constrained-AFP optimum for the configured scenario.
    Optimize,
}

impl ExperimentPreset {
    pub fn name(&self) -> &'static str {
        match self {
            Self::SerVsRho => "ser-vs-rho",
            Self::SerVsPhi => "ser-vs-phi",
            Self::Roc => "roc",
            Self::SecrecySurface => "secrecy-surface",
            Self::SecrecyCompare => "secrecy-compare",
            Self::AfpSurface => "afp-surface",
            Self::AfpConstraint => "afp-constraint",
            Self::Optimize => "optimize",
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub seed: u64,
    pub trials: u64,
    pub out_dir: PathBuf,
    pub threads: Option<usize>,
}

#[derive(Debug, Default)]
pub struct Summary {
    pub files: Vec<PathBuf>,
    pub lines: Vec<String>,
    /// Theory/simulation comparisons made, and how many fell within 3σ.
    pub checks_total: usize,
    pub checks_passed: usize,
    /// Set when an optimization had no feasible point.
    pub infeasible: Option<String>,
}

impl Summary {
    fn record(&mut self, rows: &[Comparison]) {
        self.checks_total += rows.len();
        self.checks_passed += rows.iter().filter(|c| c.pass).count();
    }

    pub fn pass_rate(&self) -> f64 {
        if self.checks_total == 0 {
            1.0
        } else {
            self.checks_passed as f64 / self.checks_total as f64
        }
    }
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

/// Offsets swept by the comparison preset.
pub const COMPARE_OFFSETS: [f64; 11] = [0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 10.0];
/// Message/tag splits of the ROC preset.
pub const ROC_RHOS: [f64; 4] = [0.9999, 0.9995, 0.999, 0.997];
const SURFACE_N: usize = 41;
const SWEEP_N: usize = 50;

fn deployment(exp: &Experiment) -> Result<GeometryScenario> {
    Ok(GeometryScenario::sample_seeded(&exp.cfg, exp.deployment_seed)?)
}

fn ensemble(exp: &Experiment, geom: &GeometryScenario) -> Result<Scenario> {
    Ok(Scenario::ensemble(&exp.cfg, geom, exp.ensemble_draws, exp.ensemble_seed)?)
}

fn sim_opts(opts: &RunOptions) -> SimOptions {
    SimOptions { threads: opts.threads, ..SimOptions::default() }
}

fn write(table: &Table, preset: ExperimentPreset, opts: &RunOptions, summary: &mut Summary) -> Result<()> {
    std::fs::create_dir_all(&opts.out_dir)?;
    let path = opts.out_dir.join(format!("{}.csv", preset.name()));
    table.write(&path)?;
    summary.files.push(path);
    Ok(())
}

pub fn run_experiment(preset: ExperimentPreset, exp: &Experiment, opts: &RunOptions) -> Result<Summary> {
    if opts.trials == 0 && matches!(preset, ExperimentPreset::SerVsRho | ExperimentPreset::SerVsPhi | ExperimentPreset::Roc) {
        return Err(CliError::Config("--trials must be at least 1".into()));
    }
    let mut summary = Summary::default();
    let table = match preset {
        ExperimentPreset::SerVsRho => {
            let pts = linspace(0.9, 1.0, SWEEP_N).into_iter().map(|r| (r, 1.0)).collect();
            ser_sweep(exp, opts, pts, &mut summary)?
        }
        ExperimentPreset::SerVsPhi => {
            let pts = linspace(0.02, 1.0, SWEEP_N).into_iter().map(|f| (0.95, f)).collect();
            ser_sweep(exp, opts, pts, &mut summary)?
        }
        ExperimentPreset::Roc => roc(exp, opts, &mut summary)?,
        ExperimentPreset::SecrecySurface => secrecy_surface(exp)?,
        ExperimentPreset::SecrecyCompare => secrecy_compare(exp, &mut summary)?,
        ExperimentPreset::AfpSurface => afp_surface(exp)?,
        ExperimentPreset::AfpConstraint => afp_constraint(exp, &mut summary)?,
        ExperimentPreset::Optimize => optimize(exp, &mut summary)?,
    };
    write(&table, preset, opts, &mut summary)?;
    Ok(summary)
}

pub const SER_HEADER: [&str; 14] = [
    "rho",
    "phi",
    "ser_m_theory",
    "ser_m_sim",
    "ser_m_stderr",
    "ser_t_theory",
    "ser_t_sim",
    "ser_t_stderr",
    "eve_ser_m_theory",
    "eve_ser_m_sim",
    "eve_ser_m_stderr",
    "eve_ser_t_theory",
    "eve_ser_t_sim",
    "eve_ser_t_stderr",
];

fn ser_sweep(exp: &Experiment, opts: &RunOptions, pts: Vec<(f64, f64)>, summary: &mut Summary) -> Result<Table> {
    let geom = deployment(exp)?;
    let scn = ensemble(exp, &geom)?;
    let mut table = Table::new(&SER_HEADER);
    for (rho, phi) in pts {
        let p = PowerAllocation::new(rho, phi)?;
        let eval = scn.evaluate(p, Scheme::Tbe)?;
        let th = TheoryPrediction::from_evaluation(&scn, p, &eval);
        let rep = run_montecarlo(&exp.cfg, &geom, p, eval.security.eta, opts.trials, opts.seed, sim_opts(opts))?;
        let cmp = compare_theory_sim(&rep, &th)?;
        summary.record(&cmp[..4]);
        let mut row = vec![fmt(rho), fmt(phi)];
        for (t, e) in [
            (th.user_ser_m, rep.user_ser_m),
            (th.user_ser_t, rep.user_ser_t),
            (th.eve_ser_m, rep.eve_ser_m),
            (th.eve_ser_t, rep.eve_ser_t),
        ] {
            row.extend([fmt(t), fmt(e.estimate), fmt(e.std_err)]);
        }
        table.push(row);
    }
    summary.lines.push(format!(
        "{} of {} SER cells within 3 standard errors",
        summary.checks_passed, summary.checks_total
    ));
    Ok(table)
}

pub const ROC_HEADER: [&str; 11] = [
    "rho",
    "eta",
    "p_f_theory",
    "p_f_sim",
    "p_f_stderr",
    "p_f_full_theory",
    "p_d_theory",
    "p_d_sim",
    "p_d_stderr",
    "p_d_block_sim",
    "p_d_block_stderr",
];

fn roc(exp: &Experiment, opts: &RunOptions, summary: &mut Summary) -> Result<Table> {
    let geom = deployment(exp)?;
    let scn = ensemble(exp, &geom)?;
    let t = exp.cfg.block_len;
    let mut table = Table::new(&ROC_HEADER);
    for rho in ROC_RHOS {
        let p = PowerAllocation::new(rho, 1.0)?;
        let eval = scn.evaluate(p, Scheme::Tbe)?;
        let k = eval.links.len() as f64;
        let mean_pt = eval.links.iter().map(|l| l.user.ser_t).sum::<f64>() / k;
        let rep = run_montecarlo(&exp.cfg, &geom, p, t, opts.trials, opts.seed, sim_opts(opts))?;
        for pt in roc_from_report(&rep) {
            let pf_th = scn.table().cdf(pt.eta, 0.5);
            let pf_full = tbe_core::theory::p_f(scn.table(), pt.eta, eval.security.p_b, mean_pt);
            let pd_th = eval.links.iter().map(|l| scn.table().cdf(pt.eta, l.user.ser_t)).sum::<f64>() / k;
            let cmp = [
                Comparison::proportion("p_f", &pt.p_f, pf_th),
                Comparison::proportion("p_d_feature", &pt.p_d_feature, pd_th),
            ];
            summary.record(&cmp);
            table.push(vec![
                fmt(rho),
                pt.eta.to_string(),
                fmt(pf_th),
                fmt(pt.p_f.estimate),
                fmt(pt.p_f.std_err),
                fmt(pf_full),
                fmt(pd_th),
                fmt(pt.p_d_feature.estimate),
                fmt(pt.p_d_feature.std_err),
                fmt(pt.p_d.estimate),
                fmt(pt.p_d.std_err),
            ]);
        }
        summary.lines.push(format!("rho {rho}: threshold at target {}", eval.security.eta));
    }
    summary.lines.push(format!(
        "{} of {} ROC cells within 3 standard errors",
        summary.checks_passed, summary.checks_total
    ));
    Ok(table)
}

pub const SECRECY_HEADER: [&str; 7] = ["rho", "phi", "r_u", "r_e", "r_sec", "r_classic", "eta"];

fn box_grid(n: usize) -> Vec<(f64, f64)> {
    let rhos = linspace(0.9, 1.0, n);
    let phis: Vec<f64> = (1..=n).map(|j| j as f64 / n as f64).collect();
    rhos.iter().flat_map(|&r| phis.iter().map(move |&f| (r, f))).collect()
}

fn secrecy_surface(exp: &Experiment) -> Result<Table> {
    let scn = Scenario::closed_form(&exp.cfg, &deployment(exp)?)?;
    let mut table = Table::new(&SECRECY_HEADER);
    for (rho, phi) in box_grid(SURFACE_N) {
        let m = metrics_at(&scn, Scheme::Tbe, rho, phi)?;
        table.push(vec![
            fmt(rho),
            fmt(phi),
            fmt(m.r_u),
            fmt(m.r_e),
            fmt(m.r_sec),
            fmt(m.r_classic),
            m.eta.to_string(),
        ]);
    }
    Ok(table)
}

pub const COMPARE_HEADER: [&str; 9] = [
    "eve_height_m",
    "delta_theta_deg",
    "r_sec_tbe",
    "rho_tbe",
    "phi_tbe",
    "r_sec_baseline",
    "rho_baseline",
    "phi_baseline",
    "improvement",
];

/// Best TBE and baseline rates for one configuration, both by grid search.
pub fn compare_at(cfg: &SystemConfig, deployment_seed: u64, n: usize) -> Result<[f64; 6]> {
    let geom = GeometryScenario::sample_seeded(cfg, deployment_seed)?;
    let scn = Scenario::closed_form(cfg, &geom)?;
    let (pt, rt) = grid_max_rsec(&scn, Scheme::Tbe, n)?;
    let (pb, rb) = optimized_baseline(&scn, n)?;
    Ok([rt, pt.rho, pt.phi, rb, pb.rho, pb.phi])
}

fn improvement(tbe: f64, base: f64) -> f64 {
    if base > 0.0 {
        (tbe - base) / base
    } else if tbe > 0.0 {
        f64::INFINITY
    } else {
        0.0
    }
}

fn secrecy_compare(exp: &Experiment, summary: &mut Summary) -> Result<Table> {
    let mut table = Table::new(&COMPARE_HEADER);
    for dt in COMPARE_OFFSETS {
        let mut cfg = exp.cfg.clone();
        cfg.angle_offset_deg = dt;
        let [rt, rho_t, phi_t, rb, rho_b, phi_b] = compare_at(&cfg, exp.deployment_seed, 100)?;
        let imp = improvement(rt, rb);
        table.push(vec![
            fmt(cfg.eve_height_m),
            fmt(dt),
            fmt(rt),
            fmt(rho_t),
            fmt(phi_t),
            fmt(rb),
            fmt(rho_b),
            fmt(phi_b),
            fmt(imp),
        ]);
        summary.lines.push(format!("offset {dt} deg: TBE {rt:.4}, baseline {rb:.4}"));
    }
    Ok(table)
}

pub const AFP_HEADER: [&str; 7] = ["rho", "phi", "afp", "p_d", "p_w", "bler", "eta"];

fn afp_surface(exp: &Experiment) -> Result<Table> {
    let scn = Scenario::closed_form(&exp.cfg, &deployment(exp)?)?;
    let mut table = Table::new(&AFP_HEADER);
    for (rho, phi) in box_grid(SURFACE_N) {
        let m = metrics_at(&scn, Scheme::Tbe, rho, phi)?;
        table.push(vec![
            fmt(rho),
            fmt(phi),
            fmt(m.afp),
            fmt(m.p_d),
            fmt(m.p_w),
            fmt(m.bler),
            m.eta.to_string(),
        ]);
    }
    Ok(table)
}

pub const CONSTRAINT_HEADER: [&str; 10] = [
    "pw_min",
    "pd_min",
    "afp_tbe",
    "case_tbe",
    "rho_tbe",
    "phi_tbe",
    "afp_baseline",
    "case_baseline",
    "rho_baseline",
    "phi_baseline",
];

fn case_str(c: KktCase) -> String {
    c.number().map_or_else(|| "infeasible".to_string(), |n| n.to_string())
}

fn opt_fmt(p: Option<PowerAllocation>) -> [String; 2] {
    match p {
        Some(p) => [fmt(p.rho), fmt(p.phi)],
        None => [String::new(), String::new()],
    }
}

fn afp_constraint(exp: &Experiment, summary: &mut Summary) -> Result<Table> {
    let scn = Scenario::closed_form(&exp.cfg, &deployment(exp)?)?;
    let mut table = Table::new(&CONSTRAINT_HEADER);
    for pw in linspace(0.01, 0.3, 30) {
        let spec = ConstraintSpec::new(pw, exp.pd_min)?;
        let tbe = solve_constrained_afp(&scn, Scheme::Tbe, spec)?;
        let base = solve_constrained_afp(&scn, Scheme::NonTbe, spec)?;
        let [rt, ft] = opt_fmt(tbe.p);
        let [rb, fb] = opt_fmt(base.p);
        table.push(vec![
            fmt(pw),
            fmt(exp.pd_min),
            fmt(tbe.afp),
            case_str(tbe.case),
            rt,
            ft,
            fmt(base.afp),
            case_str(base.case),
            rb,
            fb,
        ]);
    }
    let n_inf = table.rows.iter().filter(|r| r[3] == "infeasible").count();
    summary.lines.push(format!("TBE infeasible at {n_inf} of {} wiretap bounds", table.rows.len()));
    Ok(table)
}

pub const OPTIMIZE_HEADER: [&str; 6] = ["objective", "rho", "phi", "value", "case", "iterations"];

fn optimize(exp: &Experiment, summary: &mut Summary) -> Result<Table> {
    let scn = Scenario::closed_form(&exp.cfg, &deployment(exp)?)?;
    let mut table = Table::new(&OPTIMIZE_HEADER);
    let dca = dca_two_start(&scn, Scheme::Tbe, &DcaOptions::default())?;
    table.push(vec![
        "max_r_sec".into(),
        fmt(dca.p.rho),
        fmt(dca.p.phi),
        fmt(dca.r_sec),
        String::new(),
        dca.iterations.to_string(),
    ]);
    summary.lines.push(format!(
        "max R_sec = {:.6} at rho = {:.6}, phi = {:.6} ({} iterations)",
        dca.r_sec, dca.p.rho, dca.p.phi, dca.iterations
    ));
    let spec = ConstraintSpec::new(exp.pw_min, exp.pd_min)?;
    let sol = solve_constrained_afp(&scn, Scheme::Tbe, spec)?;
    let [r, f] = opt_fmt(sol.p);
    table.push(vec!["min_afp".into(), r, f, fmt(sol.afp), case_str(sol.case), String::new()]);
    match (sol.case.number(), sol.p) {
        (Some(n), Some(p)) => summary.lines.push(format!(
            "min AFP = {:.6e} at rho = {:.6}, phi = {:.6}, KKT case {n} (P_w = {:.4e}, P_d = {:.6})",
            sol.afp, p.rho, p.phi, sol.p_w, sol.p_d
        )),
        _ => {
            summary.infeasible =
                Some(format!("no allocation meets P_w <= {} and P_d >= {}", exp.pw_min, exp.pd_min));
        }
    }
    Ok(table)
}

/// Path of the CSV a preset writes under `dir`.
pub fn output_path(dir: &Path, preset: ExperimentPreset) -> PathBuf {
    dir.join(format!("{}.csv", preset.name()))
}
