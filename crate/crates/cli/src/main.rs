//! `risbf`: run single instances, parameter sweeps and self-checks.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::{error, info};

use risbf::experiment::{
    aggregate, emit_plot_data, read_results_csv, run_experiment, write_results_csv, BeamformerDump, Metric,
};
use risbf::{ChannelSet, Error, ExperimentSpec, Method, Problem, ResultRecord, RunConfig, SweepVariable};

#[derive(Parser, Debug)]
#[command(name = "risbf", version, about = "Joint BS/RIS beamforming solvers and Monte Carlo harness")]
struct Cli {
    /// Increase log verbosity (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Power minimization under SINR targets on the configured scenario.
    Qos(RunArgs),
    /// Max-min fair SINR under the power budget on the configured scenario.
    Mmf(RunArgs),
    /// Parameter sweep as described by the [experiment] config section.
    Sweep(SweepArgs),
    /// Built-in solver checks and re-validation of dumped beamformers.
    Validate(ValidateArgs),
    /// Aggregate a results CSV into a plot table.
    Plot(PlotArgs),
}

#[derive(Args, Debug)]
struct CommonArgs {
    /// TOML configuration file.
    #[arg(short, long)]
    config: Option<PathBuf>,
    /// Base seed for channel draws.
    #[arg(short, long)]
    seed: Option<u64>,
    /// Results CSV path.
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Comma-separated method list (ambf, ambf_one_shot, mmf, mmf_relaxed, no_ris, random_ris).
    #[arg(short, long, value_delimiter = ',')]
    methods: Option<Vec<String>>,
    /// Write channel and beamformer dumps into this directory.
    #[arg(long)]
    dump_dir: Option<PathBuf>,
    /// Record wall-clock times (CSV output is then not reproducible byte-for-byte).
    #[arg(long)]
    timing: bool,
}

#[derive(Args, Debug)]
struct RunArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Independent channel draws.
    #[arg(short, long, default_value_t = 1)]
    trials: usize,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Plot table (TSV) path.
    #[arg(long)]
    plot: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = MetricArg::Auto)]
    metric: MetricArg,
}

#[derive(Args, Debug)]
struct ValidateArgs {
    /// Directory with `.chan` / `.bf` dumps to re-validate.
    #[arg(long)]
    dump_dir: Option<PathBuf>,
    /// Tolerance for SINR targets, budget and unit modulus.
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
}

#[derive(Args, Debug)]
struct PlotArgs {
    /// Results CSV.
    input: PathBuf,
    #[arg(long, value_enum, default_value_t = MetricArg::PowerDbm)]
    metric: MetricArg,
    /// Output TSV; stdout when omitted.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum MetricArg {
    /// Power for QoS sweeps, min weighted SINR for MMF sweeps.
    Auto,
    PowerDbm,
    MinWeightedSinrDb,
    SumRate,
}

impl MetricArg {
    fn resolve(self, problem: Problem) -> Metric {
        match (self, problem) {
            (MetricArg::Auto, Problem::Qos) | (MetricArg::PowerDbm, _) => Metric::PowerDbm,
            (MetricArg::Auto, Problem::Mmf) | (MetricArg::MinWeightedSinrDb, _) => Metric::MinWeightedSinrDb,
            (MetricArg::SumRate, _) => Metric::SumRate,
        }
    }
}

fn load_config(path: Option<&Path>) -> Result<RunConfig, Error> {
    match path {
        Some(p) => RunConfig::load(p),
        None => Ok(RunConfig::default()),
    }
}

fn build_spec(common: &CommonArgs, cfg: &RunConfig) -> Result<ExperimentSpec, Error> {
    let mut spec = cfg.experiment_spec()?;
    if let Some(seed) = common.seed {
        spec.seed = seed;
    }
    if let Some(out) = &common.output {
        spec.output = Some(out.clone());
    }
    if let Some(methods) = &common.methods {
        spec.methods = methods.iter().map(|m| Method::parse(m.trim())).collect::<Result<_, _>>()?;
    }
    spec.dump_dir = common.dump_dir.clone();
    spec.include_timing |= common.timing;
    Ok(spec)
}

fn default_methods(problem: Problem) -> Vec<Method> {
    match problem {
        Problem::Qos => vec![Method::Ambf, Method::RandomRis, Method::NoRis],
        Problem::Mmf => vec![Method::Mmf, Method::RandomRis, Method::NoRis],
    }
}

fn run_single(problem: Problem, args: &RunArgs) -> Result<(), Error> {
    let cfg = load_config(args.common.config.as_deref())?;
    let mut spec = build_spec(&args.common, &cfg)?;
    if args.common.methods.is_none() {
        spec.methods = default_methods(problem);
    }
    spec.problem = problem;
    // the configured scenario as a one-point sweep
    spec.sweep = SweepVariable::M;
    spec.values = vec![cfg.geometry.n_ris() as f64];
    spec.trials = args.trials;
    let records = run_experiment(&spec)?;
    print_records(&records)?;
    Ok(())
}

fn print_records(records: &[ResultRecord]) -> Result<(), Error> {
    let stdout = io::stdout();
    let mut out = stdout.lock();
    writeln!(out, "{:>5} {:>8} {:<14} {:<11} {:>11} {:>12} {:>9} {:>4} {:>6}", "trial", "x", "method", "status", "power_dBm", "minSINR_dB", "sum_rate", "ao", "psa")?;
    for r in records {
        let f = |v: Option<f64>| v.map(|x| format!("{x:.3}")).unwrap_or_else(|| "-".into());
        writeln!(
            out,
            "{:>5} {:>8} {:<14} {:<11} {:>11} {:>12} {:>9} {:>4} {:>6}",
            r.trial,
            r.sweep_value,
            r.method,
            r.status,
            f(r.power_dbm),
            f(r.min_weighted_sinr_db),
            f(r.sum_rate),
            r.ao_iters,
            r.psa_iters
        )?;
    }
    Ok(())
}

fn run_sweep(args: &SweepArgs) -> Result<(), Error> {
    let cfg = load_config(args.common.config.as_deref())?;
    let spec = build_spec(&args.common, &cfg)?;
    let records = run_experiment(&spec)?;
    if spec.output.is_none() {
        write_results_csv(&records, io::stdout().lock())?;
    }
    let metric = args.metric.resolve(spec.problem);
    match &args.plot {
        Some(path) => {
            emit_plot_data(&records, metric, BufWriter::new(File::create(path)?))?;
        }
        None => {
            for row in aggregate(&records, metric) {
                info!("{} x={} median={:.3} iqr={:.3} n={}", row.method, row.x, row.median, row.q3 - row.q1, row.count);
            }
        }
    }
    Ok(())
}

fn run_plot(args: &PlotArgs) -> Result<(), Error> {
    let records = read_results_csv(BufReader::new(File::open(&args.input)?))?;
    let metric = args.metric.resolve(Problem::Qos);
    match &args.output {
        Some(p) => emit_plot_data(&records, metric, BufWriter::new(File::create(p)?))?,
        None => emit_plot_data(&records, metric, io::stdout().lock())?,
    };
    Ok(())
}

/// Pairs every `<trial>_<method>.bf` with its `<trial>.chan` and re-checks it.
fn validate_dumps(dir: &Path, tol: f64) -> Result<(usize, usize), Error> {
    let mut checked = 0;
    let mut failed = 0;
    let mut entries: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "bf"))
        .collect();
    entries.sort();
    for bf_path in entries {
        let stem = bf_path.file_stem().and_then(|s| s.to_str()).unwrap_or_default();
        let Some(trial_stem) = stem.find("_t").and_then(|i| stem[i + 2..].find('_').map(|j| &stem[..i + 2 + j])) else {
            continue;
        };
        let chan_path = dir.join(format!("{trial_stem}.chan"));
        let channels = ChannelSet::read_dump(BufReader::new(File::open(&chan_path)?))?;
        let dump = BeamformerDump::read(BufReader::new(File::open(&bf_path)?))?;
        checked += 1;
        if let Err(err) = dump.validate(&channels, tol) {
            failed += 1;
            error!("{}: {err}", bf_path.display());
        }
    }
    Ok((checked, failed))
}

fn run_validate(args: &ValidateArgs) -> Result<bool, Error> {
    let checks = risbf::selfcheck::run_all();
    let mut ok = true;
    for c in &checks {
        println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
        ok &= c.passed;
    }
    if let Some(dir) = &args.dump_dir {
        let (checked, failed) = validate_dumps(dir, args.tol)?;
        println!("{} dumps: {checked} checked, {failed} failed", if failed == 0 { "PASS" } else { "FAIL" });
        ok &= failed == 0;
    }
    Ok(ok)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    let result = match &cli.command {
        Command::Qos(a) => run_single(Problem::Qos, a).map(|_| true),
        Command::Mmf(a) => run_single(Problem::Mmf, a).map(|_| true),
        Command::Sweep(a) => run_sweep(a).map(|_| true),
        Command::Validate(a) => run_validate(a),
        Command::Plot(a) => run_plot(a).map(|_| true),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(2)
        }
    }
}
