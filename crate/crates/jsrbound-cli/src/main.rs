//! Command-line front end: simulate switched systems, bound their growth
//! rate from traces, and run seeded validation experiments.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use jsrbound::io::{load_system, load_traces, write_traces, write_traces_csv};
use jsrbound::lmi::SolverOptions;
use jsrbound::scenario::{analyze, BoundsConfig};
use jsrbound::sysmodel::{generate_sample, rng_from_seed};
use jsrbound::whitebox::reference_bracket;
use jsrbound::{BoundsReport64, SampleSet64, SwitchedSystem64};

use jsrbound_cli::config::ExperimentConfig;
use jsrbound_cli::error::CliError;
use jsrbound_cli::harness::{self, run_sweep, run_validate_beta, SweepOutput};
use jsrbound_cli::netctl;

const SCHEMAS: &str = "\
File formats:
  system (JSON):   {\"n\": dim, \"m\": count, \"modes\": [[[row], ...], ...], \"probs\": [...]}
  traces (JSON lines): {\"x0\": [...], \"states\": [[...], ...]} per line, optional \"modes\": [...]

CSV schemas (stable):
  analyze --csv:   N,l,gamma_star,epsilon,kappa,delta,lower,upper,upper_alt,upper_best,status
  simulate --csv:  trace,step,x1,...,xn  (one row per state, step 0 is the start)
  experiment rows: trial,n,m,N,l,gamma_star,epsilon,kappa,delta,lower,upper,upper_alt,upper_best,status,rho_lo,rho_hi
  experiment summary: N,l,trials,finite_upper,gamma_star,epsilon,kappa,delta,lower,upper_best
                   (means over trials; upper_best averages the finite runs)

Unbounded upper bounds serialize as \"inf\" in JSON and an empty CSV cell.
All floats are written with round-trip precision.

Exit codes: 0 success, 1 runtime failure, 2 usage or validation error.";

/// Growth-rate bounds for switched linear systems observed as black boxes.
#[derive(Parser)]
#[command(name = "jsrbound", version, after_long_help = SCHEMAS)]
struct Cli {
    /// RNG seed; every subcommand is deterministic given the seed.
    #[arg(long, global = true, value_name = "U64")]
    seed: Option<u64>,
    /// Write the primary output here instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Emit JSON (the default where a choice exists).
    #[arg(long, global = true, conflicts_with = "csv")]
    json: bool,
    /// Emit CSV where supported.
    #[arg(long, global = true)]
    csv: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

const DEFAULT_SEED: u64 = 42;

#[derive(Args)]
struct ConfigArgs {
    /// JSON experiment config; explicit flags override its fields.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Independent repetitions per grid point.
    #[arg(long)]
    trials: Option<usize>,
    /// Confidence level of the upper bound, in [0, 1).
    #[arg(long)]
    beta: Option<f64>,
    /// Product length for the white-box oracle.
    #[arg(long)]
    depth: Option<usize>,
    /// Sample sizes, comma separated.
    #[arg(long, value_delimiter = ',', value_name = "N,N,...")]
    n_grid: Option<Vec<usize>>,
    /// Trace lengths, comma separated.
    #[arg(long, value_delimiter = ',', value_name = "L,L,...")]
    l_list: Option<Vec<usize>>,
    /// Inclusive state-dimension range.
    #[arg(long, num_args = 2, value_names = ["LO", "HI"])]
    n_range: Option<Vec<usize>>,
    /// Inclusive mode-count range.
    #[arg(long, num_args = 2, value_names = ["LO", "HI"])]
    m_range: Option<Vec<usize>>,
}

impl ConfigArgs {
    fn resolve(&self, seed: Option<u64>) -> Result<ExperimentConfig, CliError> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        if let Some(s) = seed {
            cfg.seed = s;
        }
        if let Some(t) = self.trials {
            cfg.trials = t;
        }
        if let Some(b) = self.beta {
            cfg.beta = b;
        }
        if let Some(d) = self.depth {
            cfg.depth = d;
        }
        if let Some(g) = &self.n_grid {
            cfg.n_grid = g.clone();
        }
        if let Some(l) = &self.l_list {
            cfg.l_list = l.clone();
        }
        if let Some(r) = &self.n_range {
            cfg.n_range = [r[0], r[1]];
        }
        if let Some(r) = &self.m_range {
            cfg.m_range = [r[0], r[1]];
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Simulate traces of a system and write them as a black-box sample.
    Simulate {
        /// System file (JSON).
        #[arg(long, value_name = "PATH")]
        system: PathBuf,
        /// How many traces to draw.
        #[arg(long, visible_alias = "N")]
        num_traces: usize,
        /// Steps per trace.
        #[arg(long, visible_alias = "l", default_value_t = 1)]
        len: usize,
        /// Keep the switching labels in the output for oracle replay.
        #[arg(long)]
        keep_modes: bool,
    },
    /// Bound the growth rate from a trace file; report to stdout, verdict
    /// to stderr.
    Analyze {
        /// Trace file (JSON lines).
        #[arg(long, value_name = "PATH")]
        traces: PathBuf,
        /// Confidence level of the upper bound, in [0, 1).
        #[arg(long)]
        beta: f64,
        /// Claimed number of modes of the hidden system.
        #[arg(long)]
        m: usize,
        /// Expected trace length; must match the file if given.
        #[arg(long)]
        l: Option<usize>,
        /// Relative slack on the fitted level.
        #[arg(long, default_value_t = 0.0)]
        eta: f64,
        /// Bisection width for the fitted level.
        #[arg(long, default_value_t = 1e-3)]
        tol: f64,
        /// Claimed lower bound on the mode probabilities; sharper than --m
        /// when known.
        #[arg(long)]
        min_mode_prob: Option<f64>,
    },
    /// Bracket the growth rate from the mode matrices themselves.
    Whitebox {
        /// System file (JSON).
        #[arg(long, value_name = "PATH")]
        system: PathBuf,
        /// Longest product length to enumerate.
        #[arg(long, default_value_t = 6)]
        depth: usize,
        /// Product order of the quadratic certificate.
        #[arg(long, default_value_t = 1)]
        order: usize,
        /// Relative tolerance of the certificate bisection.
        #[arg(long, default_value_t = 1e-3)]
        tol: f64,
    },
    /// Sweep sample sizes over random systems and tabulate the bounds.
    Experiment {
        #[command(flatten)]
        cfg: ConfigArgs,
        /// Add white-box rho_lo/rho_hi columns.
        #[arg(long)]
        with_oracle: bool,
        /// Write the per-N averaged summary here.
        #[arg(long, value_name = "PATH")]
        summary_out: Option<PathBuf>,
        /// Write a gnuplot script for the summary here (needs --summary-out).
        #[arg(long, value_name = "PATH")]
        gnuplot: Option<PathBuf>,
    },
    /// Measure how often the probabilistic upper bound clears a white-box
    /// oracle on random systems.
    ValidateBeta {
        #[command(flatten)]
        cfg: ConfigArgs,
    },
    /// Built-in demo: a plant stabilized over a shared time-slotted channel.
    Netctl {
        /// Number of channel users including the controller (>= 2).
        #[arg(long)]
        users: usize,
        /// How many one-frame traces to draw.
        #[arg(long, visible_alias = "N")]
        num_traces: usize,
        /// Confidence level of the upper bound.
        #[arg(long, default_value_t = 0.95)]
        beta: f64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

/// Input files are the caller's responsibility: failures are usage errors.
fn usage(e: impl std::fmt::Display) -> CliError {
    CliError::Usage(e.to_string())
}

fn emit(out: &Option<PathBuf>, f: &dyn Fn(&mut dyn Write) -> std::io::Result<()>) -> Result<(), CliError> {
    match out {
        Some(path) => {
            let file = File::create(path)
                .map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))?;
            let mut w = BufWriter::new(file);
            f(&mut w)
                .and_then(|()| w.flush())
                .map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))
        }
        None => {
            let stdout = std::io::stdout();
            let mut w = stdout.lock();
            f(&mut w).map_err(CliError::from)
        }
    }
}

fn emit_text(out: &Option<PathBuf>, text: &str) -> Result<(), CliError> {
    emit(out, &|w| writeln!(w, "{text}"))
}

fn report_text(report: &BoundsReport64, csv: bool) -> String {
    if csv {
        format!("{}\n{}", BoundsReport64::csv_header(), report.csv_row())
    } else {
        serde_json::to_string_pretty(report).expect("report serialization cannot fail")
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let seed = cli.seed.unwrap_or(DEFAULT_SEED);
    match &cli.cmd {
        Cmd::Simulate { system, num_traces, len, keep_modes } => {
            let sys: SwitchedSystem64 = load_system(system).map_err(usage)?;
            let mut rng = rng_from_seed(seed);
            let mut sample = generate_sample(&sys, *num_traces, *len, &mut rng)?;
            if !*keep_modes {
                sample = sample.strip_hidden();
            }
            if cli.csv {
                emit(&cli.out, &|w| write_traces_csv(&sample, w))?;
            } else {
                emit(&cli.out, &|w| write_traces(&sample, w))?;
            }
            eprintln!("{} traces of length {len} from {}", sample.len(), system.display());
            Ok(())
        }
        Cmd::Analyze { traces, beta, m, l, eta, tol, min_mode_prob } => {
            let sample: SampleSet64 = load_traces(traces).map_err(usage)?;
            let file_l = sample.trace_len();
            if let Some(want) = l {
                if *want != file_l {
                    return Err(CliError::Usage(format!(
                        "--l {want} does not match the {file_l}-step traces in {}",
                        traces.display()
                    )));
                }
            }
            let mut bc = BoundsConfig::new(*beta, file_l, *m);
            bc.eta = *eta;
            bc.alpha = *tol;
            bc.min_mode_prob = *min_mode_prob;
            let report = analyze(&sample, &bc)?;
            emit_text(&cli.out, &report_text(&report, cli.csv))?;
            eprintln!(
                "verdict: {} (N={}, status {})",
                report.verdict(),
                report.num_traces,
                report.status_label()
            );
            Ok(())
        }
        Cmd::Whitebox { system, depth, order, tol } => {
            let sys: SwitchedSystem64 = load_system(system).map_err(usage)?;
            let bracket =
                reference_bracket(sys.modes(), *depth, *order, *tol, &SolverOptions::default())?;
            let text = serde_json::to_string_pretty(&bracket)
                .expect("bracket serialization cannot fail");
            emit_text(&cli.out, &text)?;
            eprintln!("certified bracket [{}, {}]", bracket.lower, bracket.upper);
            Ok(())
        }
        Cmd::Experiment { cfg, with_oracle, summary_out, gnuplot } => {
            let cfg_resolved = cfg.resolve(cli.seed)?;
            let rows_out = cli.out.clone().or(cfg_resolved.rows_out.clone());
            let summary_dest = summary_out.clone().or(cfg_resolved.summary_out.clone());
            if gnuplot.is_some() && summary_dest.is_none() {
                return Err(CliError::Usage(
                    "--gnuplot needs --summary-out so the script has a file to plot".into(),
                ));
            }
            let SweepOutput { rows, summary } = run_sweep(&cfg_resolved, *with_oracle)?;
            let both_stdout = rows_out.is_none() && summary_dest.is_none();
            emit(&rows_out, &|w| {
                writeln!(w, "{}", harness::rows_csv_header())?;
                for row in &rows {
                    writeln!(w, "{}", harness::row_to_csv(row))?;
                }
                Ok(())
            })?;
            emit(&summary_dest, &|w| {
                // Keep stdout parseable: a blank line separates the tables.
                if both_stdout {
                    writeln!(w)?;
                }
                writeln!(w, "{}", harness::SUMMARY_CSV_HEADER)?;
                for s in &summary {
                    writeln!(w, "{}", harness::summary_to_csv(s))?;
                }
                Ok(())
            })?;
            if let (Some(script), Some(summary_path)) = (gnuplot, &summary_dest) {
                emit(&Some(script.clone()), &|w| {
                    write_gnuplot(w, summary_path)
                })?;
            }
            eprintln!("swept {} rows over {} trials", rows.len(), cfg_resolved.trials);
            Ok(())
        }
        Cmd::ValidateBeta { cfg } => {
            let cfg_resolved = cfg.resolve(cli.seed)?;
            let summary = run_validate_beta(&cfg_resolved)?;
            let text = serde_json::to_string_pretty(&summary)
                .expect("summary serialization cannot fail");
            emit_text(&cli.out, &text)?;
            eprintln!(
                "correctness {:.4} over {} trials (95% interval [{:.4}, {:.4}])",
                summary.correctness, summary.trials, summary.wilson_low, summary.wilson_high
            );
            Ok(())
        }
        Cmd::Netctl { users, num_traces, beta } => {
            let report = netctl::run_demo(*users, *num_traces, *beta, seed)?;
            emit_text(&cli.out, &report_text(&report, cli.csv))?;
            eprintln!(
                "verdict: {} (N={}, status {})",
                report.verdict(),
                report.num_traces,
                report.status_label()
            );
            Ok(())
        }
    }
}

fn write_gnuplot(w: &mut dyn Write, summary: &std::path::Path) -> std::io::Result<()> {
    writeln!(w, "set datafile separator ','")?;
    writeln!(w, "set xlabel 'N'")?;
    writeln!(w, "set ylabel 'bound'")?;
    writeln!(w, "set key left bottom")?;
    writeln!(
        w,
        "plot '{p}' using 1:9 with linespoints title 'lower', \\",
        p = summary.display()
    )?;
    writeln!(w, "     '{p}' using 1:10 with linespoints title 'upper'", p = summary.display())
}
