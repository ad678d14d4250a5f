//! θ-sweep over the measurement family with one CSV row per grid point.

use anyhow::{bail, Result};
use rayon::prelude::*;
use std::f64::consts::{FRAC_PI_2, TAU};

use telecp::analytic::{
    closed_form_optimum, repeat_fidelity, repeat_first_principles, unitary_optimum,
};
use telecp::fidelity::mc_average_fidelity;
use telecp::optimizer::{
    optimize_scenario_with_oracle, optimize_unitary_scenario, IterationConfig, OracleConfig,
};
use telecp::scenario::Scenario;

#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub theta_min: f64,
    pub theta_max: f64,
    pub steps: usize,
    pub mixing: f64,
    pub tolerance: f64,
    pub max_iterations: usize,
    pub mc_samples: usize,
    pub seed: u64,
    pub oracle_restarts: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            theta_min: 0.0,
            theta_max: FRAC_PI_2,
            steps: 101,
            mixing: 0.5,
            tolerance: 1e-10,
            max_iterations: 100_000,
            mc_samples: 10_000,
            seed: 0,
            oracle_restarts: 8,
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.steps < 2 {
            bail!("steps must be at least 2");
        }
        if !(0.0..=FRAC_PI_2 + 1e-12).contains(&self.theta_min)
            || !(0.0..=FRAC_PI_2 + 1e-12).contains(&self.theta_max)
            || self.theta_min > self.theta_max
        {
            bail!(
                "theta range [{}, {}] must satisfy 0 <= min <= max <= pi/2",
                self.theta_min,
                self.theta_max
            );
        }
        self.iteration_config().validate()?;
        if self.mc_samples == 0 {
            bail!("mc-samples must be at least 1");
        }
        Ok(())
    }

    pub fn iteration_config(&self) -> IterationConfig {
        IterationConfig {
            mixing: self.mixing,
            tolerance: self.tolerance,
            max_iterations: self.max_iterations,
            ..IterationConfig::default()
        }
    }

    pub fn grid(&self) -> Vec<f64> {
        let span = self.theta_max - self.theta_min;
        (0..self.steps)
            .map(|k| self.theta_min + span * k as f64 / (self.steps - 1) as f64)
            .collect()
    }
}

/// One grid point of the sweep; every column of the CSV plus the TP
/// residual kept for diagnostics.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub theta: f64,
    pub cos_theta: f64,
    pub f_iterative: f64,
    pub f_oracle: f64,
    pub f_closed_form: f64,
    pub f_unitary_numeric: f64,
    pub f_unitary_closed: f64,
    pub f_repeat_eq24: f64,
    pub f_repeat_first_principles: f64,
    pub f_mc: f64,
    pub mc_std_error: f64,
    pub max_residual: f64,
    pub min_choi_eigenvalue: f64,
    pub iterations_max: usize,
    pub tp_residual_max: f64,
    pub best_fidelity: f64,
    pub any_substituted: bool,
}

fn derived_seed(seed: u64, row: usize, salt: u64) -> u64 {
    seed ^ (row as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ salt
}

/// Computes one row of the sweep; deterministic in (cfg, row index).
pub fn compute_row(cfg: &SweepConfig, row_index: usize, theta: f64) -> Result<SweepRow> {
    let scenario = Scenario::family(theta)?;
    let oracle = OracleConfig {
        restarts: cfg.oracle_restarts,
        seed: derived_seed(cfg.seed, row_index, 0xA11CE),
    };
    let report = optimize_scenario_with_oracle(&scenario, &cfg.iteration_config(), &oracle)?;

    let (_, f_unitary_numeric) = optimize_unitary_scenario(&scenario)?;
    let mc = mc_average_fidelity(
        &scenario,
        &report.per_outcome_channel,
        cfg.mc_samples,
        derived_seed(cfg.seed, row_index, 0xB0B),
    )?;

    let u_matched = (TAU - theta).rem_euclid(TAU);
    let tp_residual_max = report
        .per_outcome_channel
        .iter()
        .map(|ch| ch.tp_residual())
        .fold(0.0, f64::max);

    Ok(SweepRow {
        theta,
        cos_theta: theta.cos(),
        f_iterative: report.iterative_fidelity,
        f_oracle: report.oracle_fidelity,
        f_closed_form: closed_form_optimum(theta)?,
        f_unitary_numeric,
        f_unitary_closed: unitary_optimum(theta)?,
        f_repeat_eq24: repeat_fidelity(u_matched, theta)?,
        f_repeat_first_principles: repeat_first_principles(&scenario)?,
        f_mc: mc.value,
        mc_std_error: mc.mc_std_error.unwrap_or(0.0),
        max_residual: report.final_residual.iter().copied().fold(0.0, f64::max),
        min_choi_eigenvalue: report
            .cp_diagnostic
            .iter()
            .map(|d| d.min_choi_eigenvalue)
            .fold(f64::INFINITY, f64::min),
        iterations_max: report.iterations.iter().copied().max().unwrap_or(0),
        tp_residual_max,
        best_fidelity: report.fidelity,
        any_substituted: report.substituted.iter().any(|&s| s),
    })
}

/// Runs the sweep over the θ grid; rows are computed independently on the
/// ambient rayon pool and assembled in grid order, so the output is
/// byte-identical to a serial run.
pub fn run_sweep(cfg: &SweepConfig) -> Result<Vec<SweepRow>> {
    cfg.validate()?;
    cfg.grid()
        .par_iter()
        .enumerate()
        .map(|(k, &theta)| compute_row(cfg, k, theta))
        .collect()
}

pub const CSV_HEADER: &str = "theta,cos_theta,f_iterative,f_oracle,f_closed_form,f_unitary_numeric,f_unitary_closed,f_repeat_eq24,f_repeat_first_principles,f_mc,mc_std_error,max_residual,min_choi_eigenvalue,iterations_max";

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// CSV with 17 significant digits, '.' decimal separator and '\n' line
/// endings regardless of locale.
pub fn csv_from_rows(rows: &[SweepRow]) -> String {
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let fields = [
            num(r.theta),
            num(r.cos_theta),
            num(r.f_iterative),
            num(r.f_oracle),
            num(r.f_closed_form),
            num(r.f_unitary_numeric),
            num(r.f_unitary_closed),
            num(r.f_repeat_eq24),
            num(r.f_repeat_first_principles),
            num(r.f_mc),
            num(r.mc_std_error),
            num(r.max_residual),
            num(r.min_choi_eigenvalue),
            r.iterations_max.to_string(),
        ];
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}
