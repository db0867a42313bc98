//! `qmeasure` — reproduce the model's figures as data files, simulate noisy
//! measurements, and run the verification suites.
//!
//! Exit codes: 0 success, 2 usage error, 3 verification failure, 4 I/O error.

// range guards are written `!(lo < hi)` so that NaN flags fail validation
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod output;

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use qmeasure::closed_form::{
    DensityGrid, Pdf2Mixed, Spectrum, SteepestDescentMarginal,
};
use qmeasure::error_model::ErrorModel;
use qmeasure::hermitian::{bloch_density, DensityMatrix, HermitianMatrix};
use qmeasure::monte_carlo::{
    default_histogram_range, histogram, simulate_outcomes, SimulationConfig, DEFAULT_BINS,
};
use qmeasure::quad::{find_peaks, Peak};
use qmeasure::verify::{run_suite, Suite};

use output::{write_density, write_histogram, write_samples, Format, Meta};

/// Environment variable naming the default output directory.
const OUT_DIR_ENV: &str = "QMEASURE_OUT_DIR";

/// Grid resolution of the emitted figure curves.
const FIGURE_POINTS: usize = 801;

/// Scan resolution behind every peak report.
const PEAK_SCAN: usize = 2048;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    ChecksFailed(usize),
    Io(PathBuf, std::io::Error),
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::ChecksFailed(_) => 3,
            CliError::Io(_, _) => 4,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "{msg}"),
            CliError::ChecksFailed(n) => write!(f, "{n} check(s) failed"),
            CliError::Io(path, e) => write!(f, "{}: {e}", path.display()),
        }
    }
}

impl From<qmeasure::Error> for CliError {
    fn from(e: qmeasure::Error) -> Self {
        CliError::Usage(e.to_string())
    }
}

#[derive(Parser)]
#[command(
    name = "qmeasure",
    version,
    about = "Measurement-error statistics of randomly perturbed observables",
    after_help = "Exit codes: 0 success, 2 usage error, 3 verification failure, 4 I/O error."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Two-level outcome density, eigenvalues +1/-1, mixed state, c = 3
    Figure1(OutputArgs),
    /// Two-level outcome density in the +1 eigenstate (eta = 1), c = 3
    Figure2(OutputArgs),
    /// Three-level steepest-descent marginal, spectrum -1, 0.5, 1, c = 2
    Figure3(OutputArgs),
    /// Tabulate one of the analytic laws with full parameter control
    Pdf(PdfArgs),
    /// Simulate measurement outcomes of a perturbed observable
    Simulate(SimulateArgs),
    /// Run a verification suite and print a PASS/FAIL table
    Verify(VerifyArgs),
}

#[derive(Args)]
struct OutputArgs {
    /// Output path (default: <command>.<format> in QMEASURE_OUT_DIR or .)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    format: FormatArg,
    /// Number of grid points
    #[arg(long, default_value_t = FIGURE_POINTS)]
    points: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Format {
        match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum LawArg {
    /// Two-level law, maximally mixed state (parameters a, c)
    Uniform2,
    /// Two-level law, general state (parameters a, c, eta)
    Mixed2,
    /// Steepest-descent marginal (parameters spectrum, c)
    MarginalSd,
}

#[derive(Args)]
struct PdfArgs {
    /// Which analytic law to tabulate
    #[arg(long, value_enum)]
    law: LawArg,
    /// Eigenvalue scale of the two-level observable diag(a, -a)
    #[arg(long, default_value_t = 1.0)]
    a: f64,
    /// Error constant
    #[arg(long)]
    c: f64,
    /// State average tr(rho A), required for mixed2
    #[arg(long)]
    eta: Option<f64>,
    /// Comma-separated observable eigenvalues, required for marginal-sd
    #[arg(long, allow_hyphen_values = true)]
    spectrum: Option<String>,
    /// Grid lower bound (default: law-specific window)
    #[arg(long, allow_hyphen_values = true)]
    lo: Option<f64>,
    /// Grid upper bound
    #[arg(long, allow_hyphen_values = true)]
    hi: Option<f64>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct SimulateArgs {
    /// Comma-separated eigenvalues of the diagonal observable
    #[arg(long, allow_hyphen_values = true)]
    observable: String,
    /// State: "mixed" or "bloch:x,y,z" (bloch requires a two-level observable)
    #[arg(long, default_value = "mixed")]
    state: String,
    /// Quantum error constant (tr B^2 weight)
    #[arg(long)]
    c1: f64,
    /// Classical error constant ((tr B)^2 weight)
    #[arg(long, default_value_t = 0.0)]
    c2: f64,
    /// Number of simulated outcomes
    #[arg(long)]
    n: u64,
    /// RNG seed
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads; the output is identical for every value
    #[arg(long, default_value_t = 1)]
    n_workers: usize,
    /// Emit a histogram instead of raw samples
    #[arg(long)]
    histogram: bool,
    /// Histogram bin count
    #[arg(long, default_value_t = DEFAULT_BINS)]
    bins: usize,
    /// Histogram lower edge (default: min eigenvalue - 4/sqrt(c1))
    #[arg(long, allow_hyphen_values = true)]
    lo: Option<f64>,
    /// Histogram upper edge
    #[arg(long, allow_hyphen_values = true)]
    hi: Option<f64>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct VerifyArgs {
    /// Suite: normalization, equivalence, hciz, independence, or all
    #[arg(default_value = "all")]
    suite: String,
}

fn main() {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Figure1(args) => cmd_figure(1, args),
        Command::Figure2(args) => cmd_figure(2, args),
        Command::Figure3(args) => cmd_figure(3, args),
        Command::Pdf(args) => cmd_pdf(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Verify(args) => cmd_verify(args),
    };
    if let Err(e) = result {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}

fn default_path(name: &str, format: Format) -> PathBuf {
    let dir = std::env::var_os(OUT_DIR_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("."));
    dir.join(format!("{name}.{}", format.extension()))
}

fn resolve_out(args: &OutputArgs, name: &str) -> (PathBuf, Format) {
    let format = args.format.into();
    let path = args
        .out
        .clone()
        .unwrap_or_else(|| default_path(name, format));
    (path, format)
}

fn emit_density(
    path: &Path,
    format: Format,
    meta: &Meta,
    density: impl Fn(f64) -> f64,
    lo: f64,
    hi: f64,
    points: usize,
) -> Result<(), CliError> {
    let grid = DensityGrid::from_fn(&density, lo, hi, points)?;
    let peaks: Vec<Peak> = find_peaks(&density, lo, hi, PEAK_SCAN)?;
    write_density(path, format, meta, grid.grid(), grid.values(), &peaks)
}

fn cmd_figure(which: u8, args: OutputArgs) -> Result<(), CliError> {
    let name = format!("figure{which}");
    let (path, format) = resolve_out(&args, &name);
    if args.points < 2 {
        return Err(CliError::Usage(format!(
            "--points must be at least 2, got {}",
            args.points
        )));
    }
    let mut meta = Meta::new(&name);
    match which {
        1 => {
            let (a, c) = (1.0, 3.0);
            let window = a + 8.0 / f64::sqrt(c);
            meta.push("law", "uniform2");
            meta.push("a", a);
            meta.push("c", c);
            meta.push("points", args.points);
            emit_density(
                &path,
                format,
                &meta,
                |r| qmeasure::closed_form::pdf2_uniform(r, a, c).unwrap(),
                -window,
                window,
                args.points,
            )?;
        }
        2 => {
            let (a, c, eta) = (1.0, 3.0, 1.0);
            let mixed = Pdf2Mixed::new(a, c, eta)?;
            let window = mixed.window();
            meta.push("law", "mixed2");
            meta.push("a", a);
            meta.push("c", c);
            meta.push("eta", eta);
            meta.push("points", args.points);
            emit_density(
                &path,
                format,
                &meta,
                |x| mixed.density(x),
                -window,
                window,
                args.points,
            )?;
        }
        3 => {
            let spectrum = Spectrum::new(vec![-1.0, 0.5, 1.0])?;
            let c = 2.0;
            let marginal = SteepestDescentMarginal::new(spectrum, c)?;
            let (lo, hi) = marginal.support();
            meta.push("law", "marginal-sd");
            meta.push("spectrum", "-1,0.5,1");
            meta.push("c", c);
            meta.push("points", args.points);
            emit_density(
                &path,
                format,
                &meta,
                |x| marginal.density(x),
                lo,
                hi,
                args.points,
            )?;
        }
        _ => unreachable!(),
    }
    println!("wrote {}", path.display());
    Ok(())
}

fn parse_reals(input: &str, what: &str) -> Result<Vec<f64>, CliError> {
    input
        .split(',')
        .map(|tok| {
            tok.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Usage(format!("invalid {what} entry: {tok:?}")))
        })
        .collect()
}

fn cmd_pdf(args: PdfArgs) -> Result<(), CliError> {
    let (path, format) = resolve_out(&args.output, "pdf");
    if args.output.points < 2 {
        return Err(CliError::Usage(format!(
            "--points must be at least 2, got {}",
            args.output.points
        )));
    }
    let mut meta = Meta::new("pdf");
    let (density, default_lo, default_hi): (Box<dyn Fn(f64) -> f64>, f64, f64) = match args.law {
        LawArg::Uniform2 => {
            let (a, c) = (args.a, args.c);
            qmeasure::closed_form::pdf2_uniform(0.0, a, c)?;
            let window = a + 8.0 / f64::sqrt(c);
            meta.push("law", "uniform2");
            meta.push("a", a);
            meta.push("c", c);
            (
                Box::new(move |r| qmeasure::closed_form::pdf2_uniform(r, a, c).unwrap()),
                -window,
                window,
            )
        }
        LawArg::Mixed2 => {
            let eta = args.eta.ok_or_else(|| {
                CliError::Usage("--eta is required for --law mixed2".to_string())
            })?;
            let mixed = Pdf2Mixed::new(args.a, args.c, eta)?;
            let window = mixed.window();
            meta.push("law", "mixed2");
            meta.push("a", args.a);
            meta.push("c", args.c);
            meta.push("eta", eta);
            (Box::new(move |x| mixed.density(x)), -window, window)
        }
        LawArg::MarginalSd => {
            let spec_str = args.spectrum.clone().ok_or_else(|| {
                CliError::Usage("--spectrum is required for --law marginal-sd".to_string())
            })?;
            let spectrum = Spectrum::new(parse_reals(&spec_str, "spectrum")?)?;
            let marginal = SteepestDescentMarginal::new(spectrum, args.c)?;
            let (lo, hi) = marginal.support();
            meta.push("law", "marginal-sd");
            meta.push("spectrum", spec_str.trim());
            meta.push("c", args.c);
            (Box::new(move |x| marginal.density(x)), lo, hi)
        }
    };
    let lo = args.lo.unwrap_or(default_lo);
    let hi = args.hi.unwrap_or(default_hi);
    if !(lo < hi) {
        return Err(CliError::Usage(format!("empty grid range: {lo}..{hi}")));
    }
    meta.push("lo", lo);
    meta.push("hi", hi);
    meta.push("points", args.output.points);
    emit_density(&path, format, &meta, density, lo, hi, args.output.points)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn parse_state(input: &str, dim: usize) -> Result<DensityMatrix, CliError> {
    if input == "mixed" {
        return Ok(DensityMatrix::maximally_mixed(dim)?);
    }
    if let Some(rest) = input.strip_prefix("bloch:") {
        if dim != 2 {
            return Err(CliError::Usage(format!(
                "bloch states need a two-level observable, got dimension {dim}"
            )));
        }
        let v = parse_reals(rest, "bloch vector")?;
        if v.len() != 3 {
            return Err(CliError::Usage(format!(
                "bloch vector needs 3 components, got {}",
                v.len()
            )));
        }
        return Ok(bloch_density([v[0], v[1], v[2]])?);
    }
    Err(CliError::Usage(format!(
        "unknown state {input:?}: expected \"mixed\" or \"bloch:x,y,z\""
    )))
}

fn cmd_simulate(args: SimulateArgs) -> Result<(), CliError> {
    let (path, format) = resolve_out(&args.output, "simulate");
    let eigs = parse_reals(&args.observable, "observable")?;
    if eigs.is_empty() {
        return Err(CliError::Usage("observable needs at least one eigenvalue".into()));
    }
    let observable = HermitianMatrix::from_real_diagonal(&eigs);
    let state = parse_state(&args.state, eigs.len())?;
    let model = ErrorModel::new(args.c1, args.c2)?;
    let cfg = SimulationConfig {
        observable,
        state,
        model,
        n_samples: args.n,
        seed: args.seed,
        n_workers: args.n_workers,
    };
    cfg.validate()?;

    let mut meta = Meta::new("simulate");
    meta.push("observable", args.observable.trim());
    meta.push("state", args.state.trim());
    meta.push("c1", args.c1);
    meta.push("c2", args.c2);
    meta.push("n", args.n);
    meta.push("seed", args.seed);
    meta.push("n_workers", args.n_workers);

    let samples = simulate_outcomes(&cfg)?;
    if args.histogram {
        let min_a = eigs.iter().copied().fold(f64::INFINITY, f64::min);
        let max_a = eigs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let (dlo, dhi) = default_histogram_range(min_a, max_a, args.c1);
        let lo = args.lo.unwrap_or(dlo);
        let hi = args.hi.unwrap_or(dhi);
        if !(lo < hi) {
            return Err(CliError::Usage(format!("empty histogram range: {lo}..{hi}")));
        }
        meta.push("bins", args.bins);
        meta.push("lo", lo);
        meta.push("hi", hi);
        let hist = histogram(&samples, lo, hi, args.bins)?;
        write_histogram(&path, format, &meta, &hist)?;
    } else {
        write_samples(&path, format, &meta, &samples)?;
    }
    println!("wrote {}", path.display());
    Ok(())
}

fn cmd_verify(args: VerifyArgs) -> Result<(), CliError> {
    let suite = Suite::parse(&args.suite).ok_or_else(|| {
        CliError::Usage(format!(
            "unknown suite {:?}: expected normalization, equivalence, hciz, independence, or all",
            args.suite
        ))
    })?;
    let results = run_suite(suite);
    let width = results.iter().map(|r| r.name.len()).max().unwrap_or(0);
    let mut failures = 0;
    for r in &results {
        let status = if r.passed { "PASS" } else { "FAIL" };
        println!("{status}  {:width$}  {}", r.name, r.detail);
        if !r.passed {
            failures += 1;
        }
    }
    println!(
        "{} checks, {} passed, {} failed",
        results.len(),
        results.len() - failures,
        failures
    );
    if failures > 0 {
        return Err(CliError::ChecksFailed(failures));
    }
    Ok(())
}
