//! Seeded experiment harnesses. `run_validate_beta` measures how often the
//! probabilistic upper bound clears a white-box oracle on random systems;
//! `run_sweep` tabulates the bounds across sample sizes for plotting.
//! Trials run in parallel on derived RNG streams, so results do not depend
//! on scheduling.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use jsrbound::lmi::SolverOptions;
use jsrbound::scenario::{analyze, BoundsConfig};
use jsrbound::sysmodel::{generate_sample, random_system, rng_stream};
use jsrbound::whitebox::reference_bracket;
use jsrbound::BoundsReport64;

use crate::config::ExperimentConfig;
use crate::error::CliError;

/// Two-sided 95% normal quantile used for the Wilson interval.
const WILSON_Z: f64 = 1.959963984540054;

/// Wilson score interval for `successes` out of `total`.
pub fn wilson_interval(successes: usize, total: usize) -> (f64, f64) {
    assert!(total > 0 && successes <= total);
    let n = total as f64;
    let p = successes as f64 / n;
    let z2 = WILSON_Z * WILSON_Z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = WILSON_Z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationTrial {
    pub trial: usize,
    pub n: usize,
    pub m: usize,
    pub num_traces: usize,
    /// White-box bracket on the true growth rate.
    pub rho_lo: f64,
    pub rho_hi: f64,
    pub gamma_star: f64,
    pub lower: f64,
    /// Finite best upper bound, absent when unbounded.
    pub upper_best: Option<f64>,
    /// Upper bound clears the oracle's lower end (an unbounded upper is
    /// vacuously valid).
    pub upper_valid: bool,
    /// Lower bound stays below the oracle's upper end plus bisection slack.
    pub lower_sound: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationSummary {
    pub beta: f64,
    pub trials: usize,
    pub valid: usize,
    pub correctness: f64,
    pub wilson_low: f64,
    pub wilson_high: f64,
    pub lower_sound_count: usize,
    pub all_lower_sound: bool,
    pub records: Vec<ValidationTrial>,
}

/// Random systems, fresh samples, and a white-box oracle per trial; counts
/// how often the probabilistic upper bound is consistent with the oracle.
pub fn run_validate_beta(cfg: &ExperimentConfig) -> Result<ValidationSummary, CliError> {
    cfg.validate()?;
    let lo = *cfg.n_grid.iter().min().unwrap();
    let hi = *cfg.n_grid.iter().max().unwrap();
    let l = cfg.l_list[0];
    let mut records = (0..cfg.trials)
        .into_par_iter()
        .map(|trial| -> Result<ValidationTrial, CliError> {
            let mut rng = rng_stream(cfg.seed, trial as u64);
            let n = rng.random_range(cfg.n_range[0]..=cfg.n_range[1]);
            let m = rng.random_range(cfg.m_range[0]..=cfg.m_range[1]);
            let num_traces = rng.random_range(lo..=hi);
            let sys = random_system::<f64, _>(n, m, &mut rng)?;
            let bracket =
                reference_bracket(sys.modes(), cfg.depth, l, 1e-3, &SolverOptions::default())?;
            let sample = generate_sample(&sys, num_traces, l, &mut rng)?.strip_hidden();
            let bc = BoundsConfig::new(cfg.beta, l, m);
            let report = analyze(&sample, &bc)?;
            let upper_best = report.upper_best.finite();
            Ok(ValidationTrial {
                trial,
                n,
                m,
                num_traces,
                rho_lo: bracket.lower,
                rho_hi: bracket.upper,
                gamma_star: report.gamma_star,
                lower: report.lower,
                upper_best,
                upper_valid: upper_best.is_none_or(|u| u >= bracket.lower),
                lower_sound: report.lower <= bracket.upper + 2.0 * bc.alpha,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    records.sort_by_key(|r| r.trial);
    let valid = records.iter().filter(|r| r.upper_valid).count();
    let lower_sound_count = records.iter().filter(|r| r.lower_sound).count();
    let (wilson_low, wilson_high) = wilson_interval(valid, records.len());
    Ok(ValidationSummary {
        beta: cfg.beta,
        trials: records.len(),
        valid,
        correctness: valid as f64 / records.len() as f64,
        wilson_low,
        wilson_high,
        lower_sound_count,
        all_lower_sound: lower_sound_count == records.len(),
        records,
    })
}

#[derive(Debug, Clone)]
pub struct SweepRow {
    pub trial: usize,
    pub report: BoundsReport64,
    pub rho_lo: Option<f64>,
    pub rho_hi: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct SummaryRow {
    pub num_traces: usize,
    pub l: usize,
    pub trials: usize,
    /// How many trials produced a finite best upper bound.
    pub finite_upper: usize,
    pub gamma_star: f64,
    pub epsilon: f64,
    pub kappa: f64,
    pub delta: f64,
    pub lower: f64,
    /// Mean over the finite best upper bounds; absent if all unbounded.
    pub upper_best: Option<f64>,
}

pub struct SweepOutput {
    pub rows: Vec<SweepRow>,
    pub summary: Vec<SummaryRow>,
}

/// One random system per trial, analyzed at every (sample size, trace
/// length) point of the grid, with fresh samples per point.
pub fn run_sweep(cfg: &ExperimentConfig, with_oracle: bool) -> Result<SweepOutput, CliError> {
    cfg.validate()?;
    let grid: Vec<(usize, usize)> = cfg
        .n_grid
        .iter()
        .flat_map(|&num| cfg.l_list.iter().map(move |&l| (num, l)))
        .collect();
    let per_trial = (0..cfg.trials)
        .into_par_iter()
        .map(|trial| -> Result<Vec<SweepRow>, CliError> {
            let mut rng = rng_stream(cfg.seed, trial as u64);
            let n = rng.random_range(cfg.n_range[0]..=cfg.n_range[1]);
            let m = rng.random_range(cfg.m_range[0]..=cfg.m_range[1]);
            let sys = random_system::<f64, _>(n, m, &mut rng)?;
            let bracket = if with_oracle {
                let order = *cfg.l_list.iter().min().unwrap();
                Some(reference_bracket(
                    sys.modes(),
                    cfg.depth,
                    order,
                    1e-3,
                    &SolverOptions::default(),
                )?)
            } else {
                None
            };
            grid.iter()
                .enumerate()
                .map(|(j, &(num_traces, l))| {
                    // Streams: trials 0..T draw the systems; everything after
                    // is one stream per (trial, grid point).
                    let stream = cfg.trials as u64
                        + (trial * grid.len() + j) as u64;
                    let mut srng = rng_stream(cfg.seed, stream);
                    let sample =
                        generate_sample(&sys, num_traces, l, &mut srng)?.strip_hidden();
                    let bc = BoundsConfig::new(cfg.beta, l, m);
                    let report = analyze(&sample, &bc)?;
                    Ok(SweepRow {
                        trial,
                        report,
                        rho_lo: bracket.as_ref().map(|b| b.lower),
                        rho_hi: bracket.as_ref().map(|b| b.upper),
                    })
                })
                .collect()
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let rows: Vec<SweepRow> = per_trial.into_iter().flatten().collect();

    let mut summary = Vec::with_capacity(grid.len());
    for &(num_traces, l) in &grid {
        let group: Vec<&SweepRow> = rows
            .iter()
            .filter(|r| r.report.num_traces == num_traces && r.report.l == l)
            .collect();
        let k = group.len() as f64;
        let mean = |f: &dyn Fn(&SweepRow) -> f64| group.iter().map(|r| f(r)).sum::<f64>() / k;
        let finite: Vec<f64> =
            group.iter().filter_map(|r| r.report.upper_best.finite()).collect();
        summary.push(SummaryRow {
            num_traces,
            l,
            trials: group.len(),
            finite_upper: finite.len(),
            gamma_star: mean(&|r| r.report.gamma_star),
            epsilon: mean(&|r| r.report.epsilon),
            kappa: mean(&|r| r.report.kappa),
            delta: mean(&|r| r.report.delta),
            lower: mean(&|r| r.report.lower),
            upper_best: if finite.is_empty() {
                None
            } else {
                Some(finite.iter().sum::<f64>() / finite.len() as f64)
            },
        });
    }
    Ok(SweepOutput { rows, summary })
}

fn opt_cell(v: Option<f64>) -> String {
    v.map_or(String::new(), |x| format!("{x}"))
}

pub fn rows_csv_header() -> String {
    format!("trial,n,m,{},rho_lo,rho_hi", BoundsReport64::csv_header())
}

pub fn row_to_csv(row: &SweepRow) -> String {
    format!(
        "{},{},{},{},{},{}",
        row.trial,
        row.report.n,
        row.report.m,
        row.report.csv_row(),
        opt_cell(row.rho_lo),
        opt_cell(row.rho_hi)
    )
}

pub const SUMMARY_CSV_HEADER: &str =
    "N,l,trials,finite_upper,gamma_star,epsilon,kappa,delta,lower,upper_best";

pub fn summary_to_csv(row: &SummaryRow) -> String {
    format!(
        "{},{},{},{},{},{},{},{},{},{}",
        row.num_traces,
        row.l,
        row.trials,
        row.finite_upper,
        row.gamma_star,
        row.epsilon,
        row.kappa,
        row.delta,
        row.lower,
        opt_cell(row.upper_best)
    )
}
