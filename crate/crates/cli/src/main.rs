use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use bellkit::local::{facet_check_with, local_bound, ExactPass, FacetOptions, DEFAULT_PRIME_SEED};
use bellkit::quantum::{
    evaluate, ghz_paradox_assemblage, optimize_fourier_phases, psi3_assemblage, state_factory, visibility, Assemblage,
    FourierSearch, Ket, QuantumModel,
};
use bellkit::report::{config_hash, resolve_inequality, run_report, OutputFormat, ReportSpec, TableId};
use bellkit::scenario::BellExpression;
use bellkit::seesaw::{seesaw, seesaw_fixed_measurements, SeesawConfig, SeesawMode};
use bellkit::Error;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

/// Exit status for argument and runtime errors; 1 and 2 are reserved for report outcomes.
const EXIT_ERROR: u8 = 3;

/// Largest K run without `--extended` by `bound` and `facet`.
const DESK_MAX_K: usize = 5;

#[derive(Parser)]
#[command(name = "bellkit", version, about = "Modular-bracket Bell inequalities: local bounds, facets and quantum violations")]
struct Cli {
    /// Master seed. Seesaw restarts and report rows default to 0; facet checks use it as the prime seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads for enumeration and restarts (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// csv applies to `report` only.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    /// Allow K > 5 enumeration and run extended report rows.
    #[arg(long, global = true)]
    extended: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Exact local bound by enumerating deterministic strategies.
    Bound(IneqArg),
    /// Facet check of the declared bound.
    Facet {
        #[command(flatten)]
        ineq: IneqArg,
        /// Confirm the modular rank by exact elimination even when not needed.
        #[arg(long)]
        exact: bool,
    },
    /// Value of a fixed quantum model.
    Value {
        #[command(flatten)]
        ineq: IneqArg,
        #[command(flatten)]
        model: ModelArgs,
        /// Minimize the Bell-operator ground energy over Fourier measurement phases instead.
        #[arg(long, conflicts_with_all = ["model", "state", "measurements"])]
        fourier: bool,
    },
    /// Alternating state and measurement optimization.
    Seesaw {
        #[command(flatten)]
        ineq: IneqArg,
        /// Local dimensions, e.g. 2,2,2. Defaults to the fixed state's or to K for every party.
        #[arg(long, value_delimiter = ',')]
        dims: Option<Vec<usize>>,
        #[arg(long)]
        restarts: Option<usize>,
        #[arg(long, value_enum, default_value_t = Mode::Free)]
        mode: Mode,
        /// Fix the state (catalog name such as ghz:3, w, aharonov, psi3).
        #[arg(long, conflicts_with = "measurements")]
        state: Option<String>,
        /// Fix the measurements: psi3, ghz-paradox or a JSON assemblage file.
        #[arg(long)]
        measurements: Option<String>,
        #[arg(long)]
        max_sweeps: Option<usize>,
        #[arg(long)]
        tolerance: Option<f64>,
    },
    /// White-noise visibility of a fixed quantum model.
    Visibility {
        #[command(flatten)]
        ineq: IneqArg,
        #[command(flatten)]
        model: ModelArgs,
    },
    /// Reproduce a reference table and compare against the embedded targets.
    Report {
        /// I, II, III, IV or V.
        #[arg(long)]
        table: String,
        #[arg(long)]
        k_min: Option<usize>,
        #[arg(long)]
        k_max: Option<usize>,
        /// Keep only rows at these dimensions, e.g. 2,2,2.
        #[arg(long, value_delimiter = ',')]
        dims: Option<Vec<usize>>,
        /// Override every row's restart budget.
        #[arg(long)]
        restarts: Option<usize>,
        /// Seconds after which remaining rows are not started.
        #[arg(long)]
        time_cap: Option<f64>,
        /// Write the report here instead of standard output.
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Args)]
struct IneqArg {
    /// `catalog:<name>:<K>` or a path to a bracket-format text file.
    #[arg(long)]
    ineq: String,
}

#[derive(Args)]
struct ModelArgs {
    /// JSON-encoded quantum model (state and assemblage).
    #[arg(long, conflicts_with_all = ["state", "measurements"])]
    model: Option<PathBuf>,
    /// Catalog state name; omit to use the optimal state for the measurements.
    #[arg(long)]
    state: Option<String>,
    /// psi3, ghz-paradox or a JSON assemblage file.
    #[arg(long)]
    measurements: Option<String>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Free,
    Symmetric,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_ERROR) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}

fn run(cli: Cli) -> Result<u8, Error> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::InvalidConfig(e.to_string()))?;
    }
    if cli.format == Format::Csv && !matches!(cli.command, Command::Report { .. }) {
        return Err(Error::InvalidConfig("csv output is only available for `report`".into()));
    }
    let seed = cli.seed.unwrap_or(0);
    match cli.command {
        Command::Bound(ineq) => {
            let expr = load_ineq(&ineq.ineq, cli.extended)?;
            let bound = local_bound(&expr)?;
            let result = json!({
                "local_bound": bound.value.to_string(),
                "declared_bound": expr.bound().to_string(),
                "comparator": expr.comparator().symbol(),
                "certifies": bound.certifies(&expr),
                "optimizer_count": bound.optimizers.len(),
                "strategy_count": bound.strategy_count,
            });
            emit(seed, json!({"command": "bound", "ineq": ineq.ineq}), result)
        }
        Command::Facet { ineq, exact } => {
            let expr = load_ineq(&ineq.ineq, cli.extended)?;
            let options = FacetOptions {
                prime_seed: cli.seed.unwrap_or(DEFAULT_PRIME_SEED),
                exact_pass: if exact { ExactPass::Always } else { ExactPass::WhenNeeded },
            };
            let report = facet_check_with(&expr, &options)?;
            emit(
                options.prime_seed,
                json!({"command": "facet", "ineq": ineq.ineq, "exact": exact}),
                serde_json::to_value(&report)?,
            )
        }
        Command::Value { ineq, model, fourier } => {
            let expr = resolve_inequality(&ineq.ineq)?;
            let config = json!({
                "command": "value",
                "ineq": ineq.ineq,
                "model": model.model,
                "state": model.state,
                "measurements": model.measurements,
                "fourier": fourier,
            });
            if fourier {
                let optimum = optimize_fourier_phases(&expr, &FourierSearch::default())?;
                return emit(seed, config, serde_json::to_value(&optimum)?);
            }
            let (value, model) = load_model(&expr, &model)?;
            let result = json!({"value": value, "model": model});
            emit(seed, config, result)
        }
        Command::Visibility { ineq, model } => {
            let expr = resolve_inequality(&ineq.ineq)?;
            let config = json!({
                "command": "visibility",
                "ineq": ineq.ineq,
                "model": model.model,
                "state": model.state,
                "measurements": model.measurements,
            });
            let (_, model) = load_model(&expr, &model)?;
            emit(seed, config, serde_json::to_value(&visibility(&expr, &model)?)?)
        }
        Command::Seesaw {
            ineq,
            dims,
            restarts,
            mode,
            state,
            measurements,
            max_sweeps,
            tolerance,
        } => {
            let expr = resolve_inequality(&ineq.ineq)?;
            let k = expr.outputs();
            let parties = expr.scenario().parties();
            let ket = state.as_deref().map(|s| state_factory(s, k)).transpose()?;
            let assemblage = measurements.as_deref().map(load_assemblage).transpose()?;
            let dims = dims
                .or_else(|| ket.as_ref().map(|s| s.dims().to_vec()))
                .or_else(|| assemblage.as_ref().map(Assemblage::dims))
                .unwrap_or_else(|| vec![k; parties]);
            let mut config = SeesawConfig::new(dims).with_seed(seed);
            if let Some(r) = restarts {
                config = config.with_restarts(r);
            }
            if let Some(s) = max_sweeps {
                config.max_sweeps = s;
            }
            if let Some(t) = tolerance {
                config.tolerance = t;
            }
            config.mode = match (mode, ket, assemblage) {
                (Mode::Symmetric, None, None) => SeesawMode::Symmetric,
                (Mode::Symmetric, _, _) => {
                    return Err(Error::InvalidConfig("symmetric mode cannot fix the state or measurements".into()))
                }
                (Mode::Free, Some(ket), _) => SeesawMode::FixedState(ket),
                (Mode::Free, None, Some(a)) => SeesawMode::FixedMeasurements(a),
                (Mode::Free, None, None) => SeesawMode::Free,
            };
            let hashed = json!({
                "command": "seesaw",
                "ineq": ineq.ineq,
                "state": state,
                "measurements": measurements,
                "config": serde_json::to_value(&config)?,
            });
            let result = seesaw(&expr, &config)?;
            emit(seed, hashed, serde_json::to_value(&result)?)
        }
        Command::Report {
            table,
            k_min,
            k_max,
            dims,
            restarts,
            time_cap,
            output,
        } => {
            let mut spec = ReportSpec::new(table.parse::<TableId>()?);
            spec.k_range = match (k_min, k_max) {
                (None, None) => None,
                (lo, hi) => Some((lo.unwrap_or(0), hi.unwrap_or(usize::MAX))),
            };
            spec.dims = dims;
            spec.restarts = restarts;
            spec.time_cap_secs = time_cap;
            spec.seed = seed;
            spec.extended = cli.extended;
            spec.format = match cli.format {
                Format::Json => OutputFormat::Json,
                Format::Csv => OutputFormat::Csv,
            };
            spec.output = output.clone();
            let report = run_report(&spec)?;
            match &output {
                Some(path) => {
                    report.write(path, spec.format)?;
                    eprintln!("wrote {} rows to {}", report.rows.len(), path.display());
                }
                None => print_out(&report.render(spec.format)?)?,
            }
            Ok(report.exit_code() as u8)
        }
    }
}

fn load_ineq(spec: &str, extended: bool) -> Result<BellExpression, Error> {
    let expr = resolve_inequality(spec)?;
    if expr.outputs() > DESK_MAX_K && !extended {
        return Err(Error::InvalidConfig(format!(
            "K = {} exceeds {DESK_MAX_K}; pass --extended to enumerate anyway",
            expr.outputs()
        )));
    }
    Ok(expr)
}

fn load_assemblage(spec: &str) -> Result<Assemblage, Error> {
    match spec {
        "psi3" => Ok(psi3_assemblage()),
        "ghz-paradox" => Ok(ghz_paradox_assemblage()),
        path => Ok(serde_json::from_str(&std::fs::read_to_string(Path::new(path))?)?),
    }
}

/// The model from a file, or from named state and measurements. Without a
/// state the Bell operator's ground state is used.
fn load_model(expr: &BellExpression, args: &ModelArgs) -> Result<(f64, QuantumModel), Error> {
    if let Some(path) = &args.model {
        let model: QuantumModel = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        return Ok((evaluate(expr, &model)?, model));
    }
    let Some(measurements) = &args.measurements else {
        return Err(Error::InvalidConfig("give --model or --measurements".into()));
    };
    let assemblage = load_assemblage(measurements)?;
    let ket: Ket = match &args.state {
        Some(name) => state_factory(name, expr.outputs())?,
        None => seesaw_fixed_measurements(expr, &assemblage)?.1,
    };
    let model = QuantumModel::new(ket, assemblage)?;
    Ok((evaluate(expr, &model)?, model))
}

fn emit(seed: u64, config: Value, result: Value) -> Result<u8, Error> {
    let envelope = json!({
        "version": env!("CARGO_PKG_VERSION"),
        "seed": seed,
        "config_hash": config_hash(&json!({"seed": seed, "config": config})),
        "result": result,
    });
    print_out(&serde_json::to_string_pretty(&envelope)?)?;
    Ok(0)
}

/// Writes to stdout, treating a closed pipe as success.
fn print_out(text: &str) -> Result<(), Error> {
    let mut out = std::io::stdout().lock();
    match writeln!(out, "{text}").and_then(|_| out.flush()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}
