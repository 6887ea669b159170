//! Subcommand implementations. Each returns data; printing and exit codes
//! live in [`crate::run`].

use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;
use spectral_gap::bounds::{fit_exponent, BoundReport, FitResult, SweepRecord};
use spectral_gap::eigensolver::{solve_extrapolated, EigenResult, SolverError};
use spectral_gap::stepsolver::{QuantizationRoot, StepError, StepProblem};
use spectral_gap::{PotentialKind, PotentialSpec};

use crate::config::RunConfig;
use crate::svg::{loglog_chart, Series};
use crate::{csv, CliError};

fn solver_error(e: SolverError) -> CliError {
    match e {
        SolverError::InverseIteration { .. } | SolverError::NonPositiveGroundState(_) => {
            CliError::Convergence(e.to_string())
        }
        _ => CliError::Config(e.to_string()),
    }
}

fn step_error(e: StepError) -> CliError {
    match e {
        StepError::Bracket { .. } => CliError::Convergence(e.to_string()),
        _ => CliError::Config(e.to_string()),
    }
}

pub fn cmd_solve(cfg: &RunConfig) -> Result<EigenResult, CliError> {
    let length = cfg.single_length()?;
    solve_extrapolated(&cfg.spec, length, cfg.tol).map_err(solver_error)
}

#[derive(Debug, Clone, Serialize)]
pub struct QuantizationReport {
    pub problem: StepProblem,
    #[serde(flatten)]
    pub root: QuantizationRoot,
    pub separation: f64,
}

/// Step comparison problem `(L, c = b, ṽ = ‖v‖∞)` of a potential.
pub fn comparison_problem(spec: &PotentialSpec, length: f64) -> Result<StepProblem, StepError> {
    StepProblem::new(length, spec.b, spec.sup_norm())
}

pub fn cmd_quantization(cfg: &RunConfig) -> Result<QuantizationReport, CliError> {
    let length = cfg.single_length()?;
    let problem = comparison_problem(&cfg.spec, length).map_err(step_error)?;
    let root = problem.solve_ground().map_err(step_error)?;
    Ok(QuantizationReport {
        problem,
        root,
        separation: std::f64::consts::FRAC_PI_2 - root.omega0 * problem.l1,
    })
}

/// One evaluated sweep length.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub report: BoundReport,
    pub record: SweepRecord,
}

fn sweep_point(spec: &PotentialSpec, length: f64, tol: f64) -> Result<SweepRow, CliError> {
    let res = solve_extrapolated(spec, length, tol).map_err(solver_error)?;
    let separation = match spec.kind {
        PotentialKind::Step => Some(
            comparison_problem(spec, length)
                .and_then(|p| p.separation())
                .map_err(step_error)?,
        ),
        _ => None,
    };
    let report = BoundReport::evaluate(&res, spec, length, separation);
    let record = SweepRecord::new(&res, &report);
    Ok(SweepRow { report, record })
}

/// Solves every grid length on a dedicated pool; rows come back ordered by
/// length regardless of scheduling.
pub fn run_sweep(cfg: &RunConfig) -> Result<Vec<SweepRow>, CliError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.worker_threads()?)
        .build()
        .map_err(|e| CliError::Config(e.to_string()))?;
    let lengths = cfg.grid.values();
    pool.install(|| {
        lengths
            .par_iter()
            .map(|&l| sweep_point(&cfg.spec, l, cfg.tol))
            .collect()
    })
}

pub fn sweep_chart(spec: &PotentialSpec, rows: &[SweepRow]) -> String {
    let pick = |f: &dyn Fn(&SweepRecord) -> Option<f64>| -> Vec<(f64, f64)> {
        rows.iter()
            .filter_map(|r| f(&r.record).map(|y| (r.record.length, y)))
            .collect()
    };
    let series = [
        Series::new("gap", pick(&|r| Some(r.gap))),
        Series::new("kirsch_rhs", pick(&|r| Some(r.kirsch_rhs))),
        Series::new("lemma_rhs", pick(&|r| Some(r.lemma_rhs))),
        Series::new("theorem_rhs", pick(&|r| r.theorem_rhs)),
    ];
    loglog_chart(
        &format!(
            "{} potential, b = {}, height = {}",
            spec.kind, spec.b, spec.height
        ),
        "L",
        "gap and lower bounds",
        &series,
    )
}

/// Runs the sweep and returns the CSV text; writes the chart when asked.
pub fn cmd_sweep(cfg: &RunConfig, svg: Option<&Path>) -> Result<String, CliError> {
    let rows = run_sweep(cfg)?;
    if let Some(path) = svg {
        std::fs::write(path, sweep_chart(&cfg.spec, &rows))?;
    }
    Ok(csv::render(rows.iter().map(|r| &r.record)))
}

#[derive(Debug, Clone, Serialize)]
pub struct Violation {
    #[serde(rename = "L")]
    pub length: f64,
    pub bounds: Vec<&'static str>,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifySummary {
    pub rows: usize,
    pub checked: usize,
    pub dominated: usize,
    pub gated_out: usize,
    pub theorem_checked: usize,
    pub not_converged: usize,
    pub violations: Vec<Violation>,
}

pub fn summarize(rows: &[SweepRow]) -> VerifySummary {
    let checked: Vec<&SweepRow> = rows.iter().filter(|r| r.report.gated()).collect();
    let violations: Vec<Violation> = checked
        .iter()
        .filter_map(|r| {
            let bounds = r.report.violations();
            (!bounds.is_empty()).then_some(Violation {
                length: r.report.length,
                bounds,
            })
        })
        .collect();
    VerifySummary {
        rows: rows.len(),
        checked: checked.len(),
        dominated: checked.len() - violations.len(),
        gated_out: rows.len() - checked.len(),
        theorem_checked: checked
            .iter()
            .filter(|r| r.report.theorem_rhs.is_some())
            .count(),
        not_converged: rows.iter().filter(|r| !r.record.converged).count(),
        violations,
    }
}

/// Refuses potentials outside the hypotheses, then checks every gated row.
pub fn cmd_verify_bounds(cfg: &RunConfig) -> Result<VerifySummary, CliError> {
    let hyp = cfg.spec.validate_hypotheses();
    if !hyp.lemma_applicable() {
        return Err(CliError::Hypothesis(format!("{hyp:?}")));
    }
    Ok(summarize(&run_sweep(cfg)?))
}

pub fn fit_rows(rows: &[SweepRow]) -> Result<FitResult, CliError> {
    let records: Vec<SweepRecord> = rows.iter().map(|r| r.record.clone()).collect();
    fit_exponent(&records).map_err(|e| CliError::Config(e.to_string()))
}

pub fn cmd_fit_exponent(cfg: &RunConfig) -> Result<FitResult, CliError> {
    fit_rows(&run_sweep(cfg)?)
}
