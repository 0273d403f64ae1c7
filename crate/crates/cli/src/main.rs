//! `cyclegap`: generate interconnected directed-cycle chains, compute their
//! absolute spectral gaps, run verification suites, execute sweeps and
//! render figures.
//!
//! Exit codes: 0 success, 1 validation error, 2 numerical failure, 3 I/O
//! error.

use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use cyclegap_core::chain::{expand, sample_arcmod, sample_cyclemod, symmetrize, CondensedChain};
use cyclegap_core::interconnect::InterconnectMatrix;
use cyclegap_core::spectral::{
    absolute_spectral_gap, eigenvalues_dense_with_limit, eigenvalues_symmetric, Spectrum,
    DEFAULT_DENSE_LIMIT,
};

use cyclegap_cli::experiments::{
    self, compensated_series, existing_keys, fit_slope, quartiles, run_trials,
    theorem_rate_violations, ExperimentConfig, SweepKind, TrialPlan,
};
use cyclegap_cli::formats::{
    self, fmt_sig, load_chain, matrix_market, read_records_csv, read_series_csv, save_json,
    series_rows, spectrum_to_csv, write_records_csv, write_series_csv,
};
use cyclegap_cli::plot::{render_svg, PlotMode};
use cyclegap_cli::verify::{run_suite, InjectedBug, Suite};

#[derive(Parser)]
#[command(name = "cyclegap", version, about = "Spectral gaps of directed cycles with random sparse interconnections")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a chain and print it as JSON.
    Gen(GenArgs),
    /// Compute the absolute spectral gap of a chain.
    Gap(GapArgs),
    /// Run verification suites and print one JSON line per check.
    Verify(VerifyArgs),
    /// Run a Monte-Carlo sweep over chain sizes.
    Sweep(SweepArgs),
    /// Render a figure from an aggregated series CSV.
    Plot(PlotArgs),
}

#[derive(Args, Clone)]
struct GenArgs {
    /// Sampling model: arcmod (independent geometric arcs) or cyclemod
    /// (fixed n, uniform edge removal).
    #[arg(long)]
    model: String,
    /// Total number of nodes (cyclemod only).
    #[arg(long)]
    n: Option<usize>,
    /// Mean arc length (arcmod only).
    #[arg(long = "L")]
    l: Option<f64>,
    /// Number of arcs / interconnection points.
    #[arg(long)]
    k: Option<usize>,
    /// Interconnection kind: complete | regular:<d> | bc.
    #[arg(long)]
    kind: Option<String>,
    /// RNG seed; identical seeds reproduce identical chains.
    #[arg(long)]
    seed: Option<u64>,
    /// Write the chain JSON here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also export the expanded transition matrix in MatrixMarket format.
    #[arg(long)]
    matrix_out: Option<PathBuf>,
}

#[derive(Args)]
struct GapArgs {
    /// Chain JSON produced by `gen`.
    #[arg(long = "in")]
    input: Option<PathBuf>,
    #[command(flatten)]
    gen: GenArgs2,
    /// Analyze the symmetrized chain (M + M^T)/2 instead.
    #[arg(long)]
    symmetrized: bool,
    /// Write the full spectrum as CSV (re, im, modulus).
    #[arg(long)]
    spectrum_out: Option<PathBuf>,
}

// generation flags reused by `gap` when no --in file is given
#[derive(Args, Clone)]
struct GenArgs2 {
    #[arg(long)]
    model: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long = "L")]
    l: Option<f64>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    kind: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Which suite: invariants | equivalence | lemmas | all.
    #[arg(long, default_value = "all")]
    suite: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 200)]
    trials: usize,
    /// Negative-control fixture; breaks the condensed shift on purpose.
    #[arg(long, hide = true)]
    inject_bug: Option<String>,
}

#[derive(Args)]
struct SweepArgs {
    /// Experiment config JSON; desk-scale defaults when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Worker threads for the trial pool.
    #[arg(long, default_value_t = 1)]
    workers: usize,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
    /// Skip (n, kind, trial) triples already present in records.csv.
    #[arg(long)]
    resume: bool,
    /// Paper-scale grid (ln n to 8.0, 500 trials per point).
    #[arg(long)]
    full: bool,
    /// Also run the structure-check suite and write checks.jsonl.
    #[arg(long)]
    checks: bool,
}

#[derive(Args)]
struct PlotArgs {
    /// Aggregated series CSV from `sweep`.
    #[arg(long = "in")]
    input: PathBuf,
    /// loglog | compensated.
    #[arg(long)]
    mode: String,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug)]
enum CliError {
    Validation(String),
    Numerical(String),
    Io(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Validation(m) | CliError::Numerical(m) | CliError::Io(m) => write!(f, "{m}"),
        }
    }
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Numerical(_) => 2,
            CliError::Io(_) => 3,
        }
    }
}

fn validation<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Validation(e.to_string())
}

fn numerical<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Numerical(e.to_string())
}

fn io_err<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Io(e.to_string())
}

fn format_error(e: formats::FormatError) -> CliError {
    match e {
        formats::FormatError::Io(e) => CliError::Io(e.to_string()),
        other => CliError::Validation(other.to_string()),
    }
}

fn spectral_error(e: cyclegap_core::spectral::SpectralError) -> CliError {
    CliError::Numerical(e.to_string())
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    print!("{e}");
                    std::process::exit(0);
                }
                _ => {
                    eprint!("{e}");
                    std::process::exit(1);
                }
            }
        }
    };
    if let Err(e) = run(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.code());
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Gen(args) => cmd_gen(args),
        Command::Gap(args) => cmd_gap(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Plot(args) => cmd_plot(args),
    }
}

fn dense_limit() -> Result<usize, CliError> {
    match std::env::var("CYCLEGAP_DENSE_LIMIT") {
        Ok(v) => v
            .parse()
            .map_err(|_| CliError::Validation(format!("CYCLEGAP_DENSE_LIMIT=`{v}` is not a size"))),
        Err(_) => Ok(DEFAULT_DENSE_LIMIT),
    }
}

fn build_interconnect(
    kind: &str,
    k: usize,
    rng: &mut ChaCha8Rng,
) -> Result<InterconnectMatrix, CliError> {
    match kind {
        "complete" => InterconnectMatrix::complete(k).map_err(validation),
        "bc" | "bollobas-chung" => InterconnectMatrix::bollobas_chung(k, rng).map_err(validation),
        other => {
            if let Some(d) = other.strip_prefix("regular:") {
                let d: usize = d
                    .parse()
                    .map_err(|_| CliError::Validation(format!("bad degree in `{other}`")))?;
                InterconnectMatrix::random_regular(k, d, rng).map_err(validation)
            } else {
                Err(CliError::Validation(format!(
                    "unknown kind `{other}` (expected complete | regular:<d> | bc)"
                )))
            }
        }
    }
}

fn generate_chain(args: &GenArgs) -> Result<CondensedChain, CliError> {
    let k = args
        .k
        .ok_or_else(|| CliError::Validation("--k is required".into()))?;
    let kind = args
        .kind
        .as_deref()
        .ok_or_else(|| CliError::Validation("--kind is required".into()))?;
    let seed = args
        .seed
        .ok_or_else(|| CliError::Validation("--seed is required".into()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = build_interconnect(kind, k, &mut rng)?;
    match args.model.as_str() {
        "arcmod" => {
            if args.n.is_some() {
                return Err(CliError::Validation(
                    "--n is a cyclemod parameter; arcmod takes --L".into(),
                ));
            }
            let l = args
                .l
                .ok_or_else(|| CliError::Validation("arcmod requires --L".into()))?;
            sample_arcmod(l, k, a, &mut rng).map_err(validation)
        }
        "cyclemod" => {
            if args.l.is_some() {
                return Err(CliError::Validation(
                    "--L is an arcmod parameter; cyclemod takes --n".into(),
                ));
            }
            let n = args
                .n
                .ok_or_else(|| CliError::Validation("cyclemod requires --n".into()))?;
            sample_cyclemod(n, k, a, &mut rng).map_err(validation)
        }
        other => Err(CliError::Validation(format!(
            "unknown model `{other}` (expected arcmod | cyclemod)"
        ))),
    }
}

fn cmd_gen(args: GenArgs) -> Result<(), CliError> {
    let chain = generate_chain(&args)?;
    if let Some(path) = &args.matrix_out {
        std::fs::write(path, matrix_market(&expand(&chain))).map_err(io_err)?;
    }
    let json = serde_json::to_string_pretty(&chain).map_err(io_err)?;
    match &args.out {
        Some(path) => std::fs::write(path, json + "\n").map_err(io_err)?,
        None => println!("{json}"),
    }
    Ok(())
}

fn cmd_gap(args: GapArgs) -> Result<(), CliError> {
    let chain = match &args.input {
        Some(path) => load_chain(path).map_err(format_error)?,
        None => {
            let g = &args.gen;
            let model = g
                .model
                .clone()
                .ok_or_else(|| CliError::Validation("need --in or generation flags (--model ...)".into()))?;
            generate_chain(&GenArgs {
                model,
                n: g.n,
                l: g.l,
                k: g.k,
                kind: g.kind.clone(),
                seed: g.seed,
                out: None,
                matrix_out: None,
            })?
        }
    };
    let limit = dense_limit()?;
    let start = Instant::now();
    let m = expand(&chain);
    let spectrum: Spectrum = if args.symmetrized {
        eigenvalues_symmetric(&symmetrize(&m), limit).map_err(spectral_error)?
    } else {
        eigenvalues_dense_with_limit(&m, limit).map_err(spectral_error)?
    };
    let gap = absolute_spectral_gap(&spectrum).map_err(spectral_error)?;
    let slem = spectrum.second_largest_modulus().unwrap_or(0.0);
    let wall = start.elapsed().as_secs_f64();
    if let Some(path) = &args.spectrum_out {
        std::fs::write(path, spectrum_to_csv(&spectrum)).map_err(io_err)?;
    }
    if gap <= 1e-12 && slem >= 1.0 - 1e-12 {
        eprintln!(
            "warning: second-largest modulus is 1; the chain looks periodic or reducible"
        );
    }
    println!(
        "{{\"gap\":{},\"second_largest_modulus\":{},\"n\":{},\"wall_time\":{}}}",
        fmt_sig(gap),
        fmt_sig(slem),
        m.dim(),
        fmt_sig(wall)
    );
    Ok(())
}

fn cmd_verify(args: VerifyArgs) -> Result<(), CliError> {
    let suite = Suite::parse(&args.suite)
        .ok_or_else(|| CliError::Validation(format!("unknown suite `{}`", args.suite)))?;
    let bug = match args.inject_bug.as_deref() {
        None => None,
        Some("c-shift") => Some(InjectedBug::BrokenCShift),
        Some(other) => {
            return Err(CliError::Validation(format!("unknown bug fixture `{other}`")))
        }
    };
    let report = run_suite(suite, args.seed, args.trials, bug);
    print!("{}", report.to_jsonl());
    if report.hard_failures() > 0 {
        return Err(CliError::Numerical(format!(
            "{} hard check(s) failed",
            report.hard_failures()
        )));
    }
    Ok(())
}

fn cmd_sweep(args: SweepArgs) -> Result<(), CliError> {
    let mut config = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(io_err)?;
            serde_json::from_str::<ExperimentConfig>(&text).map_err(validation)?
        }
        None if args.full => ExperimentConfig::full_scale(),
        None => ExperimentConfig::desk_scale(),
    };
    if std::env::var("CYCLEGAP_DENSE_LIMIT").is_ok() {
        config.dense_limit = dense_limit()?;
    }
    config.validate().map_err(validation)?;

    std::fs::create_dir_all(&args.out_dir).map_err(io_err)?;
    let records_path = args.out_dir.join("records.csv");
    let series_path = args.out_dir.join("series.csv");

    let mut plans = experiments::plan(&config).map_err(validation)?;
    let mut records = Vec::new();
    if args.resume && records_path.exists() {
        records = read_records_csv(&records_path).map_err(format_error)?;
        let have = existing_keys(&records);
        plans.retain(|p: &TrialPlan| !have.contains(&(p.n, p.kind.ordinal(), p.seed)));
        eprintln!("resume: {} trials already present, {} to run", records.len(), plans.len());
    }

    let result = run_trials(&plans, config.dense_limit, config.symmetrized, args.workers)
        .map_err(numerical)?;
    records.extend(result.records);
    records.sort_by_key(|r| (r.n, r.kind, r.seed));
    write_records_csv(&records_path, &records).map_err(format_error)?;

    let series = quartiles(&records).map_err(numerical)?;
    let comp = compensated_series(&series);
    let rows = series_rows(&series, &comp);
    write_series_csv(&series_path, &rows).map_err(format_error)?;

    for (mode, name) in [(PlotMode::LogLogGap, "loglog.svg"), (PlotMode::CompensatedGap, "compensated.svg")] {
        let svg = render_svg(&rows, mode).map_err(validation)?;
        std::fs::write(args.out_dir.join(name), svg).map_err(io_err)?;
    }

    if args.checks {
        let report = run_suite(Suite::Lemmas, config.base_seed, 1000, None);
        std::fs::write(args.out_dir.join("checks.jsonl"), report.to_jsonl()).map_err(io_err)?;
    }

    // summary
    eprintln!(
        "sweep: {} records, {} failures -> {}",
        records.len(),
        result.failures.len(),
        records_path.display()
    );
    for f in &result.failures {
        eprintln!(
            "  failed trial n={} kind={} seed={}: {}",
            f.plan.n,
            f.plan.kind.label(),
            f.plan.seed,
            f.error
        );
    }
    let violations = theorem_rate_violations(&records, 8.0);
    eprintln!("theorem-rate violations (gamma = 8): {}", violations.len());
    let zero_gaps = records.iter().filter(|r| r.gap == 0.0).count();
    if zero_gaps > 0 {
        eprintln!("flagged {zero_gaps} zero-gap records (reducible or periodic samples)");
    }
    for kind in [
        SweepKind::Complete,
        SweepKind::RegularHalf,
        SweepKind::Regular4,
        SweepKind::BollobasChung,
    ] {
        if let Ok((slope, intercept)) = fit_slope(&series, kind) {
            eprintln!(
                "slope[{}]: {:.4} (intercept {:.4})",
                kind.label(),
                slope,
                intercept
            );
        }
    }
    // config snapshot for reproducibility
    save_json(&args.out_dir.join("config.json"), &config).map_err(format_error)?;
    Ok(())
}

fn cmd_plot(args: PlotArgs) -> Result<(), CliError> {
    let rows = read_series_csv(&args.input).map_err(format_error)?;
    let mode = match args.mode.as_str() {
        "loglog" => PlotMode::LogLogGap,
        "compensated" => PlotMode::CompensatedGap,
        other => {
            return Err(CliError::Validation(format!(
                "unknown mode `{other}` (expected loglog | compensated)"
            )))
        }
    };
    let svg = render_svg(&rows, mode).map_err(validation)?;
    std::fs::write(&args.out, svg).map_err(io_err)?;
    Ok(())
}
