//! Command-line front end: load a program and a partition, build or
//! load image tables, compute probability bounds, and emit reports.
//!
//! Exit codes: 0 success, 2 configuration error, 3 analysis error,
//! 4 invariant violation (oracle containment breach).

mod config;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{anyhow, Context, Result};
use clap::{Args, Parser, Subcommand};

use config::{AnalysisConfig, OracleConfig};
use probounds::backward::{BackwardError, BackwardInstance};
use probounds::domain::AbstractOutput;
use probounds::forward::{combine_all, AnalysisDomain, BoundsReport, ImageTable, Provenance};
use probounds::num::{parse_rational, Rational};
use probounds::oracle::{exhaustive, mc_estimate, OracleEstimate};
use probounds::report::{csv_report, human_table, ReportExtras};
use probounds::termination::facts_to_table;
use probounds::{monniaux, OutputEvent, ReportRow};

#[derive(Parser)]
#[command(
    name = "probounds",
    version,
    about = "Sound probability bounds for program outputs from reused static analyses"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute upper/lower probability bounds for the configured events.
    Analyze(AnalyzeArgs),
    /// Bounds from a backward preimage table on a finite space.
    Backward(BackwardArgs),
    /// Side-by-side forward vs pair-propagation upper bounds.
    Compare(AnalyzeArgs),
    /// Ground-truth estimation only (Monte-Carlo or exhaustive).
    Oracle(AnalyzeArgs),
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Analysis configuration (JSON, schema 1).
    #[arg(long)]
    config: PathBuf,
    /// Directory for report files (report.csv).
    #[arg(long)]
    out: Option<PathBuf>,
    /// CSV output path; `-` for stdout.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Override the oracle mode: mc, exhaustive, or none.
    #[arg(long)]
    oracle: Option<String>,
    /// Override the Monte-Carlo sample count.
    #[arg(long)]
    samples: Option<u64>,
    /// Override the random seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the confidence level, e.g. 0.99.
    #[arg(long)]
    confidence: Option<f64>,
    /// Enable a comparison mode (only `monniaux`).
    #[arg(long)]
    compare: Option<String>,
    /// Refine a grid partition by this factor before analysis.
    #[arg(long)]
    refine: Option<u32>,
}

#[derive(Args)]
struct BackwardArgs {
    /// Backward instance file (JSON).
    instance: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    /// CSV output path; `-` for stdout.
    #[arg(long)]
    csv: Option<PathBuf>,
}

/// Errors tagged with their exit code.
enum CliError {
    Config(anyhow::Error),
    Analysis(anyhow::Error),
    Invariant(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Analysis(_) => 3,
            CliError::Invariant(_) => 4,
        }
    }
}

fn config_err<T>(r: Result<T>) -> Result<T, CliError> {
    r.map_err(CliError::Config)
}

fn analysis_err<T>(r: Result<T>) -> Result<T, CliError> {
    r.map_err(CliError::Analysis)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Analyze(args) => run_analyze(args, false),
        Command::Compare(mut args) => {
            args.compare.get_or_insert_with(|| "monniaux".to_string());
            run_analyze(args, false)
        }
        Command::Oracle(args) => run_analyze(args, true),
        Command::Backward(args) => run_backward(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            match &err {
                CliError::Config(e) => eprintln!("config error: {e:#}"),
                CliError::Analysis(e) => eprintln!("analysis error: {e:#}"),
                CliError::Invariant(msg) => eprintln!("invariant violation: {msg}"),
            }
            ExitCode::from(err.code())
        }
    }
}

struct OracleRun {
    estimates: Option<Vec<OracleEstimate>>,
    exact: Option<Vec<(String, Rational)>>,
}

fn run_analyze(args: AnalyzeArgs, oracle_only: bool) -> Result<(), CliError> {
    let (config, base) = config_err(AnalysisConfig::load(&args.config))?;
    let program = config_err(config.load_program(&base))?;
    let mut partition = config_err(config.build_partition())?;
    if let Some(factor) = args.refine {
        partition = config_err(partition.refine(factor).map_err(Into::into))?;
    }
    let partition = Arc::new(partition);
    let kind = partition.mode().kind();
    let events = config_err(config.build_events(kind))?;

    let compare_mode = args.compare.as_ref().or(config.compare.as_ref());
    if let Some(mode) = compare_mode {
        if mode != "monniaux" {
            return Err(CliError::Config(anyhow!("unknown comparison mode `{mode}`")));
        }
    }

    // Table construction: external tables take precedence over the
    // built-in analysis.
    let table = if config.tables.is_empty() {
        let domain = match config.domain.as_str() {
            "interval" => AnalysisDomain::Interval,
            "sign" => AnalysisDomain::Sign,
            other => {
                return Err(CliError::Config(anyhow!("unknown analysis domain `{other}`")))
            }
        };
        let built = analysis_err(
            ImageTable::build(&program, Arc::clone(&partition), domain).map_err(Into::into),
        )?;
        if config.assume_divergence {
            built.assuming_divergence()
        } else {
            built
        }
    } else {
        let mut tables = Vec::new();
        for path in &config.tables {
            let path = base.join(path);
            let file = config_err(
                fs::File::open(&path)
                    .with_context(|| format!("cannot open table `{}`", path.display())),
            )?;
            let table = config_err(
                ImageTable::load(Arc::clone(&partition), std::io::BufReader::new(file))
                    .with_context(|| format!("table `{}`", path.display())),
            )?;
            tables.push(table);
        }
        analysis_err(combine_all(&tables).map_err(Into::into))?
    };

    let facts = config_err(config.build_termination(&program, &partition))?;
    let table = match facts {
        Some(facts) => {
            let top = AbstractOutput::full_numeric(kind);
            let term_table = analysis_err(
                facts_to_table(&facts, Arc::clone(&partition), &top).map_err(Into::into),
            )?;
            analysis_err(table.combine(&term_table).map_err(Into::into))?
        }
        None => table,
    };

    let report = analysis_err(table.bounds_report(&events).map_err(Into::into))?;

    let comparison = if compare_mode.is_some() {
        let pairs = analysis_err(monniaux::propagate(&program, &partition).map_err(Into::into))?;
        let result_var =
            analysis_err(monniaux::result_variable(&program).map_err(Into::into))?;
        Some(
            events
                .iter()
                .map(|e| (e.name.clone(), monniaux::pair_upper_bound(&pairs, result_var, e)))
                .collect::<Vec<_>>(),
        )
    } else {
        None
    };

    let oracle_run = run_oracle(&args, &config, &program, &partition, &events, oracle_only)?;
    if let Some(estimates) = &oracle_run.estimates {
        check_containment_mc(&report, estimates)?;
    }
    if let Some(exact) = &oracle_run.exact {
        check_containment_exact(&report, exact)?;
    }

    emit(&args, &config, &report, comparison.as_deref(), &oracle_run, oracle_only)
}

fn run_oracle(
    args: &AnalyzeArgs,
    config: &AnalysisConfig,
    program: &probounds::Program,
    partition: &Arc<probounds::InputPartition>,
    events: &[OutputEvent],
    oracle_only: bool,
) -> Result<OracleRun, CliError> {
    let mut oracle = config.oracle.clone().unwrap_or(OracleConfig {
        mode: "none".into(),
        samples: 100_000,
        seed: 0,
        confidence: 0.99,
        budget: 10_000,
        points: Vec::new(),
    });
    if let Some(mode) = &args.oracle {
        oracle.mode = mode.clone();
    }
    if let Some(samples) = args.samples {
        oracle.samples = samples;
    }
    if let Some(seed) = args.seed {
        oracle.seed = seed;
    }
    if let Some(confidence) = args.confidence {
        oracle.confidence = confidence;
    }
    if oracle_only && oracle.mode == "none" {
        return Err(CliError::Config(anyhow!(
            "the oracle command needs an oracle mode (config `oracle.mode` or --oracle)"
        )));
    }
    match oracle.mode.as_str() {
        "none" => Ok(OracleRun { estimates: None, exact: None }),
        "mc" => {
            let estimates = analysis_err(
                mc_estimate(
                    program,
                    partition,
                    events,
                    oracle.samples,
                    oracle.seed,
                    oracle.budget,
                    oracle.confidence,
                )
                .map_err(Into::into),
            )?;
            Ok(OracleRun { estimates: Some(estimates), exact: None })
        }
        "exhaustive" => {
            if oracle.points.is_empty() {
                return Err(CliError::Config(anyhow!(
                    "exhaustive oracle needs `oracle.points` in the config"
                )));
            }
            let points = config_err(
                oracle
                    .points
                    .iter()
                    .map(|p| {
                        let args = p
                            .args
                            .iter()
                            .map(|a| parse_rational(a).map_err(Into::into))
                            .collect::<Result<Vec<_>>>()?;
                        let weight = parse_rational(&p.weight)?;
                        Ok((args, weight))
                    })
                    .collect::<Result<Vec<_>>>(),
            )?;
            let exact = analysis_err(
                exhaustive(program, &points, events, oracle.budget).map_err(Into::into),
            )?;
            Ok(OracleRun { estimates: None, exact: Some(exact) })
        }
        other => Err(CliError::Config(anyhow!("unknown oracle mode `{other}`"))),
    }
}

/// The computed bounds must bracket the oracle's confidence interval.
fn check_containment_mc(
    report: &BoundsReport,
    estimates: &[OracleEstimate],
) -> Result<(), CliError> {
    for (row, est) in report.rows.iter().zip(estimates) {
        let lower = probounds::num::to_f64(&row.lower);
        let upper = probounds::num::to_f64(&row.upper);
        if lower > est.ci_high || upper < est.ci_low {
            return Err(CliError::Invariant(format!(
                "event `{}`: oracle CI ({}, {}) escapes bounds [{}, {}]",
                row.event, est.ci_low, est.ci_high, lower, upper
            )));
        }
    }
    Ok(())
}

fn check_containment_exact(
    report: &BoundsReport,
    exact: &[(String, Rational)],
) -> Result<(), CliError> {
    for (row, (name, p)) in report.rows.iter().zip(exact) {
        debug_assert_eq!(&row.event, name);
        if &row.lower > p || &row.upper < p {
            return Err(CliError::Invariant(format!(
                "event `{}`: exact probability {} escapes bounds [{}, {}]",
                row.event, p, row.lower, row.upper
            )));
        }
    }
    Ok(())
}

fn emit(
    args: &AnalyzeArgs,
    config: &AnalysisConfig,
    report: &BoundsReport,
    comparison: Option<&[(String, Rational)]>,
    oracle_run: &OracleRun,
    oracle_only: bool,
) -> Result<(), CliError> {
    // When running oracle-only with the exhaustive estimator, report
    // the exact probabilities as zero-width rows.
    let report = match (&oracle_run.exact, oracle_only) {
        (Some(exact), true) => BoundsReport {
            rows: exact
                .iter()
                .map(|(name, p)| ReportRow {
                    event: name.clone(),
                    lower: p.clone(),
                    upper: p.clone(),
                })
                .collect(),
            cells: report.cells,
            provenance: report.provenance,
        },
        _ => report.clone(),
    };
    let extras = ReportExtras {
        comparison_upper: comparison,
        oracle: oracle_run.estimates.as_deref(),
    };
    print!("{}", human_table(&report, &extras));
    let csv = csv_report(&report, &extras);
    write_csv(args, config, &csv).map_err(CliError::Config)
}

fn write_csv(args: &AnalyzeArgs, config: &AnalysisConfig, csv: &str) -> Result<()> {
    let mut wrote = false;
    let mut targets: Vec<PathBuf> = Vec::new();
    if let Some(path) = &args.csv {
        if path == Path::new("-") {
            print!("{csv}");
            wrote = true;
        } else {
            targets.push(path.clone());
        }
    }
    if let Some(dir) = &args.out {
        targets.push(dir.join("report.csv"));
    }
    if targets.is_empty() && !wrote {
        if let Some(output) = &config.output {
            if let Some(path) = &output.csv {
                targets.push(PathBuf::from(path));
            }
            if let Some(dir) = &output.dir {
                targets.push(Path::new(dir).join("report.csv"));
            }
        }
    }
    for target in targets {
        if let Some(parent) = target.parent() {
            if !parent.as_os_str().is_empty() {
                fs::create_dir_all(parent)
                    .with_context(|| format!("cannot create `{}`", parent.display()))?;
            }
        }
        fs::write(&target, csv)
            .with_context(|| format!("cannot write `{}`", target.display()))?;
    }
    Ok(())
}

fn run_backward(args: BackwardArgs) -> Result<(), CliError> {
    let text = config_err(
        fs::read_to_string(&args.instance)
            .with_context(|| format!("cannot read instance `{}`", args.instance.display())),
    )?;
    let instance: BackwardInstance =
        config_err(serde_json::from_str(&text).context("invalid instance JSON"))?;
    let problem = match instance.into_problem() {
        Ok(p) => p,
        Err(e @ BackwardError::NotOverApproximating { .. }) => {
            return Err(CliError::Analysis(e.into()))
        }
        Err(e) => return Err(CliError::Config(e.into())),
    };
    let rows: Vec<ReportRow> = problem
        .events
        .iter()
        .map(|(name, mask)| ReportRow {
            event: name.clone(),
            lower: probounds::backward_lower_bound(&problem.space, &problem.pre, *mask),
            upper: probounds::backward_upper_bound(&problem.space, &problem.pre, *mask),
        })
        .collect();
    let report = BoundsReport {
        rows,
        cells: problem.space.blocks().len(),
        provenance: Provenance::External,
    };
    let extras = ReportExtras::none();
    print!("{}", human_table(&report, &extras));
    let csv = csv_report(&report, &extras);
    let pseudo_args = AnalyzeArgs {
        config: PathBuf::new(),
        out: args.out,
        csv: args.csv,
        oracle: None,
        samples: None,
        seed: None,
        confidence: None,
        compare: None,
        refine: None,
    };
    let empty_config = AnalysisConfig {
        schema: config::SCHEMA_VERSION,
        program: String::new(),
        partition: config::PartitionConfig {
            mode: "discrete-int".into(),
            domain: Vec::new(),
            grid: None,
            cells: None,
        },
        domain: "interval".into(),
        tables: Vec::new(),
        assume_divergence: false,
        termination: None,
        events: Vec::new(),
        oracle: None,
        compare: None,
        output: None,
    };
    write_csv(&pseudo_args, &empty_config, &csv).map_err(CliError::Config)
}
