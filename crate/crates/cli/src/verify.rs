//! Built-in verification suite: every release criterion as one pass/fail
//! line with its measured values.

use anyhow::Result;
use std::f64::consts::{FRAC_PI_2, SQRT_2};
use std::time::Instant;

use telecp::analytic::{
    appendix_f_double, appendix_f_prime, appendix_f_triple, chi_operator, closed_form_optimum,
    composition_check, degenerate_family_optimum, AppendixPoint,
};
use telecp::fidelity::mc_average_fidelity;
use telecp::linalg::min_eigenvalue;
use telecp::optimizer::{
    optimize_scenario_with_oracle, optimize_unitary_scenario, IterationConfig, OracleConfig,
};
use telecp::scenario::{povm_family, Scenario};
use telecp::QOperator;

use crate::sweep::{csv_from_rows, run_sweep, SweepConfig, SweepRow};

#[derive(Debug, Clone)]
pub struct VerifyConfig {
    pub seed: u64,
    pub mc_samples: usize,
    pub mixing: f64,
    pub tolerance: f64,
    pub max_iterations: usize,
    pub oracle_restarts: usize,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            mc_samples: 100_000,
            mixing: 0.5,
            tolerance: 1e-10,
            max_iterations: 100_000,
            oracle_restarts: 8,
        }
    }
}

impl VerifyConfig {
    fn iteration_config(&self) -> IterationConfig {
        IterationConfig {
            mixing: self.mixing,
            tolerance: self.tolerance,
            max_iterations: self.max_iterations,
            ..IterationConfig::default()
        }
    }

    fn oracle_config(&self, salt: u64) -> OracleConfig {
        OracleConfig {
            restarts: self.oracle_restarts,
            seed: self.seed ^ salt,
        }
    }

    fn sweep_config(&self) -> SweepConfig {
        SweepConfig {
            mixing: self.mixing,
            tolerance: self.tolerance,
            max_iterations: self.max_iterations,
            seed: self.seed,
            oracle_restarts: self.oracle_restarts,
            ..SweepConfig::default()
        }
    }
}

#[derive(Debug, Clone)]
pub struct CriterionResult {
    pub id: usize,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl CriterionResult {
    pub fn line(&self) -> String {
        format!(
            "{} [{:2}] {}: {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.detail
        )
    }
}

/// Runs all release criteria in order. The 101-point sweep is computed once
/// and shared by the criteria that inspect it.
pub fn run_all_criteria(cfg: &VerifyConfig) -> Result<Vec<CriterionResult>> {
    let mut results = Vec::with_capacity(12);

    results.push(criterion_1_perfect_limit(cfg)?);
    results.push(criterion_2_key_point(cfg)?);

    let sweep_start = Instant::now();
    let rows = run_sweep(&cfg.sweep_config())?;
    let sweep_seconds = sweep_start.elapsed().as_secs_f64();

    results.push(criterion_3_branch_agreement(&rows, sweep_seconds));
    results.push(criterion_4_unitary_coincidence(&rows));
    results.push(criterion_5_classical_limit(cfg)?);
    results.push(criterion_6_monte_carlo(cfg)?);
    results.push(criterion_7_cp_validity(&rows));
    results.push(criterion_8_povm_well_formedness()?);
    results.push(criterion_9_appendix_chain()?);
    results.push(criterion_10_chi_rank()?);
    results.push(criterion_11_composition(cfg)?);
    results.push(criterion_12_determinism(cfg)?);

    Ok(results)
}

fn criterion_1_perfect_limit(cfg: &VerifyConfig) -> Result<CriterionResult> {
    let start = Instant::now();
    let scenario = Scenario::family(0.0)?;
    let report =
        optimize_scenario_with_oracle(&scenario, &cfg.iteration_config(), &cfg.oracle_config(1))?;
    let elapsed = start.elapsed().as_secs_f64();
    let deviation = (report.iterative_fidelity - 1.0).abs();
    let passed = deviation < 1e-6 && elapsed < 1.0;
    Ok(CriterionResult {
        id: 1,
        name: "perfect-teleportation-limit",
        passed,
        detail: format!(
            "fidelity deviation {deviation:.2e} (< 1e-6), runtime {elapsed:.3}s (< 1s)"
        ),
    })
}

fn criterion_2_key_point(cfg: &VerifyConfig) -> Result<CriterionResult> {
    let target = (3.0 + 8.0 * SQRT_2) / 21.0;
    let theta = (SQRT_2 - 1.0).acos();
    let scenario = Scenario::family(theta)?;
    let report =
        optimize_scenario_with_oracle(&scenario, &cfg.iteration_config(), &cfg.oracle_config(2))?;
    let iter_dev = (report.iterative_fidelity - target).abs();
    let oracle_dev = (report.oracle_fidelity - target).abs();
    let closed_dev = (closed_form_optimum(theta)? - target).abs();
    let passed = iter_dev < 1e-4 && oracle_dev < 1e-4 && closed_dev < 1e-12;
    Ok(CriterionResult {
        id: 2,
        name: "key-nonunitary-point",
        passed,
        detail: format!(
            "target (3+8*sqrt2)/21: iterative dev {iter_dev:.2e}, oracle dev {oracle_dev:.2e} (< 1e-4), closed-form dev {closed_dev:.2e} (< 1e-12)"
        ),
    })
}

fn criterion_3_branch_agreement(rows: &[SweepRow], sweep_seconds: f64) -> CriterionResult {
    let worst = rows
        .iter()
        .map(|r| (r.f_iterative - r.f_closed_form).abs())
        .fold(0.0, f64::max);
    let passed = worst < 1e-6 && sweep_seconds < 60.0;
    CriterionResult {
        id: 3,
        name: "branch-agreement",
        passed,
        detail: format!(
            "max |iterative - closed form| = {worst:.2e} over {} points (< 1e-6), sweep runtime {sweep_seconds:.1}s (< 60s)",
            rows.len()
        ),
    }
}

fn criterion_4_unitary_coincidence(rows: &[SweepRow]) -> CriterionResult {
    let mut coincidence_worst: f64 = 0.0;
    let mut improvement_worst = f64::INFINITY;
    let mut window_points = 0;
    for r in rows {
        if r.cos_theta >= 0.5 {
            coincidence_worst = coincidence_worst.max((r.f_iterative - r.f_unitary_closed).abs());
        }
        if r.cos_theta > 0.05 && r.cos_theta < 0.45 {
            window_points += 1;
            improvement_worst = improvement_worst.min(r.f_iterative - r.f_unitary_numeric);
        }
    }
    let passed = coincidence_worst < 1e-6 && window_points > 0 && improvement_worst > 1e-4;
    CriterionResult {
        id: 4,
        name: "unitary-coincidence-region",
        passed,
        detail: format!(
            "cos >= 1/2: max |iterative - unitary| = {coincidence_worst:.2e} (< 1e-6); cos in (0.05, 0.45): min improvement {improvement_worst:.2e} over {window_points} points (> 1e-4)"
        ),
    }
}

fn criterion_5_classical_limit(cfg: &VerifyConfig) -> Result<CriterionResult> {
    let scenario = Scenario::family(FRAC_PI_2)?;
    let report =
        optimize_scenario_with_oracle(&scenario, &cfg.iteration_config(), &cfg.oracle_config(5))?;
    let optimum_dev = (report.iterative_fidelity - 2.0 / 3.0).abs();
    let (_, unitary) = optimize_unitary_scenario(&scenario)?;
    let unitary_dev = (unitary - 0.5).abs();
    let passed = optimum_dev < 1e-6 && unitary_dev < 1e-6;
    Ok(CriterionResult {
        id: 5,
        name: "classical-limit",
        passed,
        detail: format!(
            "optimum dev from 2/3: {optimum_dev:.2e}, unitary dev from 1/2: {unitary_dev:.2e} (< 1e-6)"
        ),
    })
}

fn criterion_6_monte_carlo(cfg: &VerifyConfig) -> Result<CriterionResult> {
    let mut worst_ratio: f64 = 0.0;
    for k in 1..=10 {
        let theta = FRAC_PI_2 * k as f64 / 10.0;
        let scenario = Scenario::family(theta)?;
        let report = optimize_scenario_with_oracle(
            &scenario,
            &cfg.iteration_config(),
            &cfg.oracle_config(600 + k as u64),
        )?;
        let mc = mc_average_fidelity(
            &scenario,
            &report.per_outcome_channel,
            cfg.mc_samples,
            cfg.seed ^ (0xAC0 + k as u64),
        )?;
        let se = mc.mc_std_error.unwrap_or(0.0).max(1e-15);
        worst_ratio = worst_ratio.max((mc.value - report.iterative_fidelity).abs() / (3.0 * se));
    }
    let passed = worst_ratio <= 1.0;
    Ok(CriterionResult {
        id: 6,
        name: "monte-carlo-oracle",
        passed,
        detail: format!(
            "max |mc - iterative| / (3 se) = {worst_ratio:.3} over 10 angles at {} samples (<= 1)",
            cfg.mc_samples
        ),
    })
}

fn criterion_7_cp_validity(rows: &[SweepRow]) -> CriterionResult {
    let min_eig = rows
        .iter()
        .map(|r| r.min_choi_eigenvalue)
        .fold(f64::INFINITY, f64::min);
    let tp_worst = rows.iter().map(|r| r.tp_residual_max).fold(0.0, f64::max);
    let passed = min_eig >= -1e-9 && tp_worst < 1e-8;
    CriterionResult {
        id: 7,
        name: "cp-validity",
        passed,
        detail: format!(
            "min Choi eigenvalue {min_eig:.2e} (>= -1e-9), max TP residual {tp_worst:.2e} (< 1e-8)"
        ),
    }
}

fn criterion_8_povm_well_formedness() -> Result<CriterionResult> {
    let mut completeness_worst: f64 = 0.0;
    let mut eig_worst = f64::INFINITY;
    for k in 0..50 {
        let theta = FRAC_PI_2 * k as f64 / 49.0;
        let povm = povm_family(theta)?;
        let mut sum = QOperator::zeros(4)?;
        for e in povm.elements() {
            eig_worst = eig_worst.min(min_eigenvalue(e)?);
            sum = sum.add(e)?;
        }
        completeness_worst = completeness_worst.max(sum.max_abs_diff(&QOperator::identity(4)?));
    }
    let passed = completeness_worst < 1e-10 && eig_worst >= -1e-10;
    Ok(CriterionResult {
        id: 8,
        name: "povm-well-formedness",
        passed,
        detail: format!(
            "max completeness deviation {completeness_worst:.2e} (< 1e-10), min element eigenvalue {eig_worst:.2e} (>= -1e-10) on 50 angles"
        ),
    })
}

fn criterion_9_appendix_chain() -> Result<CriterionResult> {
    let mut chain_worst: f64 = 0.0;
    for a in 0..20 {
        for b in 0..20 {
            for c in 0..20 {
                let p = AppendixPoint::new(
                    FRAC_PI_2 * a as f64 / 19.0,
                    FRAC_PI_2 * b as f64 / 19.0,
                    FRAC_PI_2 * c as f64 / 19.0,
                )?;
                let f1 = appendix_f_prime(&p);
                let f2 = appendix_f_double(&p);
                let f3 = appendix_f_triple(&p);
                chain_worst = chain_worst.max(f1 - f2).max(f2 - f3);
            }
        }
    }
    let mut optimum_worst: f64 = 0.0;
    for k in 0..=50 {
        let theta = FRAC_PI_2 * k as f64 / 50.0;
        let (_, fidelity) = degenerate_family_optimum(theta)?;
        optimum_worst = optimum_worst.max((fidelity - closed_form_optimum(theta)?).abs());
    }
    let passed = chain_worst <= 1e-12 && optimum_worst < 1e-8;
    Ok(CriterionResult {
        id: 9,
        name: "appendix-chain",
        passed,
        detail: format!(
            "max chain violation {chain_worst:.2e} on 20^3 grid (<= 1e-12), max |degenerate optimum - closed form| {optimum_worst:.2e} on 50 angles (< 1e-8)"
        ),
    })
}

fn criterion_10_chi_rank() -> Result<CriterionResult> {
    let mut rank_worst = 0;
    for k in 0..20 {
        let theta = FRAC_PI_2 * k as f64 / 19.0;
        let scenario = Scenario::family(theta)?;
        for label in scenario.labels() {
            let (_, rank) = chi_operator(&scenario, label)?;
            rank_worst = rank_worst.max(rank);
        }
    }
    let passed = rank_worst <= 2;
    Ok(CriterionResult {
        id: 10,
        name: "chi-rank-extremality",
        passed,
        detail: format!("max chi rank {rank_worst} over 20 angles x 4 outcomes (<= 2)"),
    })
}

fn criterion_11_composition(cfg: &VerifyConfig) -> Result<CriterionResult> {
    let scenario = Scenario::family(0.0)?;
    let report =
        optimize_scenario_with_oracle(&scenario, &cfg.iteration_config(), &cfg.oracle_config(11))?;
    let deviation =
        composition_check(&scenario, &report.per_outcome_channel, 100, cfg.seed ^ 0x11)?;
    let passed = deviation < 1e-9;
    Ok(CriterionResult {
        id: 11,
        name: "composition-identity",
        passed,
        detail: format!("max trace distance {deviation:.2e} over 100 probes (< 1e-9)"),
    })
}

fn criterion_12_determinism(cfg: &VerifyConfig) -> Result<CriterionResult> {
    let sweep_cfg = SweepConfig {
        steps: 21,
        mc_samples: 2_000,
        mixing: cfg.mixing,
        tolerance: cfg.tolerance,
        max_iterations: cfg.max_iterations,
        seed: cfg.seed,
        oracle_restarts: cfg.oracle_restarts,
        ..SweepConfig::default()
    };
    let first = csv_from_rows(&run_sweep(&sweep_cfg)?);
    let second = csv_from_rows(&run_sweep(&sweep_cfg)?);
    let passed = first == second;
    Ok(CriterionResult {
        id: 12,
        name: "determinism",
        passed,
        detail: format!(
            "two 21-point sweeps with identical flags: byte-identical = {passed} ({} bytes)",
            first.len()
        ),
    })
}
