mod config;
mod output;
mod pipeline;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use decaylab::decayfit::{fit_power_law, FitOptions};
use decaylab::evolution::{Propagator, SourceData};
use decaylab::potential::ModelSpec;

use config::{ExperimentConfig, FdSettings, FitSettings, Grid, GridRange, Grids, Pipeline, Spacing, Tolerances};

#[derive(Debug)]
pub enum CliError {
    Validation(Vec<String>),
    Core(String, decaylab::Error),
    Io(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        use decaylab::Error as E;
        match self {
            CliError::Validation(_) => 2,
            CliError::Core(_, e) => match e {
                E::InvalidArgument(_) | E::InvalidModel(_) | E::InvalidFdConfig(_) | E::NotInRegime(_) | E::BelowFloor { .. } => 2,
                E::AccuracyFailure(_) | E::ResolutionExceeded { .. } | E::Unstable { .. } | E::WronskianInconsistent { .. } => 3,
                _ => 1,
            },
            CliError::Io(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Validation(errs) => {
                writeln!(f, "validation failed:")?;
                for e in errs {
                    writeln!(f, "  {e}")?;
                }
                Ok(())
            }
            CliError::Core(ctx, e) => write!(f, "{ctx}: {e}"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

#[derive(Parser)]
#[command(name = "decaylab", version, about = "Scattering, spectral evolution and decay-rate experiments for 1D wave equations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Potential values and tail classes on a grid.
    Potential {
        #[command(subcommand)]
        action: PotentialCmd,
    },
    /// Scattering sweeps and zero-energy resonance checks.
    Scatter {
        #[command(subcommand)]
        action: ScatterCmd,
    },
    /// Spectral evolution.
    Evolve {
        #[command(subcommand)]
        action: EvolveCmd,
    },
    /// Finite-difference evolution.
    Fdtd {
        #[command(subcommand)]
        action: FdtdCmd,
    },
    /// WKB transmission against the exact solution.
    Wkb {
        #[command(subcommand)]
        action: WkbCmd,
    },
    /// Power-law fits of station series.
    Fit {
        #[command(subcommand)]
        action: FitCmd,
    },
    /// Finite-difference tail plus decay fit.
    PriceLaw(PriceLawArgs),
}

#[derive(Args)]
struct ConfigArgs {
    #[arg(long)]
    config: PathBuf,
    /// Overrides output_dir from the config.
    #[arg(long)]
    output_dir: Option<PathBuf>,
}

#[derive(Subcommand)]
enum PotentialCmd {
    Dump(ConfigArgs),
}

#[derive(Subcommand)]
enum ScatterCmd {
    Sweep(ConfigArgs),
    Resonance(ConfigArgs),
}

#[derive(Subcommand)]
enum FdtdCmd {
    Run(ConfigArgs),
}

#[derive(Subcommand)]
enum WkbCmd {
    Sweep(ConfigArgs),
}

#[derive(Subcommand)]
enum EvolveCmd {
    Run(EvolveArgs),
}

#[derive(Args)]
struct EvolveArgs {
    #[arg(long, conflicts_with_all = ["model", "stations", "t"])]
    config: Option<PathBuf>,
    #[arg(long)]
    output_dir: Option<PathBuf>,
    /// Inline TOML table, e.g. 'family = "regge_wheeler", mass = 1, ell = 0, sigma = 1'.
    #[arg(long)]
    model: Option<String>,
    #[arg(long, default_value = "sinc")]
    propagator: String,
    /// Inline TOML table, e.g. 'profile = "gaussian_bump", center = 0, width = 1, amplitude = 1'.
    #[arg(long)]
    data: Option<String>,
    /// Comma-separated station positions.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    stations: Vec<f64>,
    /// start:stop:count
    #[arg(long)]
    t: Option<String>,
    #[arg(long)]
    log_t: bool,
    #[arg(long, default_value = "evolve")]
    name: String,
}

#[derive(Subcommand)]
enum FitCmd {
    /// Fit one station of a long-format CSV and print the report.
    Run {
        #[arg(long)]
        input: PathBuf,
        /// lo:hi
        #[arg(long)]
        window: String,
        #[arg(long, allow_hyphen_values = true)]
        station: Option<f64>,
        #[arg(long, default_value_t = 50.0)]
        min_t_lo: f64,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Join decay_report.json files against theory into one CSV.
    Compare {
        #[arg(long)]
        output: PathBuf,
        #[arg(required = true)]
        reports: Vec<PathBuf>,
    },
}

#[derive(Args)]
struct PriceLawArgs {
    #[arg(long, conflicts_with_all = ["ell", "sigma"])]
    config: Option<PathBuf>,
    #[arg(long)]
    output_dir: Option<PathBuf>,
    #[arg(long)]
    ell: Option<u32>,
    #[arg(long, allow_hyphen_values = true)]
    sigma: Option<i32>,
    #[arg(long, default_value_t = 1.0)]
    mass: f64,
    #[arg(long, default_value_t = 10.0, allow_hyphen_values = true)]
    station: f64,
    #[arg(long, default_value_t = 0.1)]
    h: f64,
    #[arg(long, default_value_t = 800.0)]
    t_final: f64,
    /// lo:hi
    #[arg(long, default_value = "100:800")]
    window: String,
}

fn load(path: &Path) -> Result<ExperimentConfig, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    ExperimentConfig::parse(&text).map_err(CliError::Validation)
}

fn expect_pipeline(cfg: &ExperimentConfig, want: Pipeline) -> Result<(), CliError> {
    if cfg.pipeline != want {
        return Err(CliError::Validation(vec![format!(
            "pipeline: config says {:?} but the subcommand runs {want:?}",
            cfg.pipeline
        )]));
    }
    Ok(())
}

fn run_config(args: &ConfigArgs, want: Pipeline) -> Result<(), CliError> {
    let cfg = load(&args.config)?;
    expect_pipeline(&cfg, want)?;
    execute(&cfg, args.output_dir.as_deref())
}

fn execute(cfg: &ExperimentConfig, output_dir: Option<&Path>) -> Result<(), CliError> {
    let out = output_dir.map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from(&cfg.output_dir));
    let manifest = pipeline::run_experiment(cfg, &out)?;
    println!("{}", serde_json::to_string_pretty(&manifest).unwrap_or_default());
    Ok(())
}

fn parse_pair(s: &str, field: &str) -> Result<(f64, f64), CliError> {
    let bad = || CliError::Validation(vec![format!("{field}: expected lo:hi, got {s:?}")]);
    let (a, b) = s.split_once(':').ok_or_else(bad)?;
    Ok((a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?))
}

fn inline_table<T: serde::de::DeserializeOwned>(s: &str, field: &str) -> Result<T, CliError> {
    #[derive(serde::Deserialize)]
    struct Wrap<T> {
        v: T,
    }
    toml::from_str::<Wrap<T>>(&format!("v = {{ {s} }}"))
        .map(|w| w.v)
        .map_err(|e| CliError::Validation(vec![format!("{field}: {e}")]))
}

fn evolve_config(a: &EvolveArgs) -> Result<ExperimentConfig, CliError> {
    let mut errors = Vec::new();
    let model: Option<ModelSpec> = match &a.model {
        Some(m) => Some(inline_table(m, "model")?),
        None => {
            errors.push("model: required without --config".to_string());
            None
        }
    };
    let data = match &a.data {
        Some(d) => inline_table(d, "data")?,
        None => SourceData::gaussian(0.0, 1.0, 1.0),
    };
    let propagator: Propagator = serde_json::from_value(serde_json::json!(a.propagator))
        .map_err(|_| CliError::Validation(vec![format!("propagator: unknown {:?}", a.propagator)]))?;
    if a.stations.is_empty() {
        errors.push("stations: at least one station is required".to_string());
    }
    let t = match a.t.as_deref().map(|s| s.split(':').collect::<Vec<_>>()) {
        Some(parts) if parts.len() == 3 => {
            match (parts[0].parse::<f64>(), parts[1].parse::<f64>(), parts[2].parse::<usize>()) {
                (Ok(start), Ok(stop), Ok(count)) => Some(Grid::Range(GridRange {
                    start,
                    stop,
                    count,
                    spacing: if a.log_t { Spacing::Log } else { Spacing::Linear },
                })),
                _ => {
                    errors.push("t: expected start:stop:count".to_string());
                    None
                }
            }
        }
        _ => {
            errors.push("t: expected start:stop:count".to_string());
            None
        }
    };
    if !errors.is_empty() {
        return Err(CliError::Validation(errors));
    }
    let cfg = ExperimentConfig {
        name: a.name.clone(),
        pipeline: Pipeline::Evolve,
        model: model.expect("checked"),
        propagator,
        data,
        grids: Grids { x: Some(Grid::Values(a.stations.clone())), t, ..Grids::default() },
        tolerances: Tolerances::default(),
        fd: None,
        fit: None,
        output_dir: "out".into(),
        seed: 0,
    };
    cfg.validate().map_err(CliError::Validation)?;
    Ok(cfg)
}

fn price_law_config(a: &PriceLawArgs) -> Result<ExperimentConfig, CliError> {
    let (lo, hi) = parse_pair(&a.window, "window")?;
    let (Some(ell), Some(sigma)) = (a.ell, a.sigma) else {
        return Err(CliError::Validation(vec!["ell, sigma: required without --config".to_string()]));
    };
    let cfg = ExperimentConfig {
        name: format!("price-law-l{ell}-s{sigma}"),
        pipeline: Pipeline::PriceLaw,
        model: ModelSpec::ReggeWheeler { mass: a.mass, ell, sigma },
        propagator: Propagator::Sinc,
        data: SourceData::gaussian(0.0, 1.0, 1.0),
        grids: Grids { x: Some(Grid::Values(vec![a.station])), ..Grids::default() },
        tolerances: Tolerances::default(),
        fd: Some(FdSettings {
            h: a.h,
            courant: 0.9,
            boundary: decaylab::timedomain::Boundary::CausalTruncation,
            t_final: a.t_final,
            output_stride: 10,
        }),
        fit: Some(FitSettings { window: [lo, hi], min_t_lo: 50.0 }),
        output_dir: "out".into(),
        seed: 0,
    };
    cfg.validate().map_err(CliError::Validation)?;
    Ok(cfg)
}

fn fit_run(
    input: &Path,
    window: &str,
    station: Option<f64>,
    min_t_lo: f64,
    output: Option<&Path>,
) -> Result<(), CliError> {
    let window = parse_pair(window, "window")?;
    let rows = output::read_series(input).map_err(CliError::Io)?;
    let mut xs: Vec<f64> = rows.iter().map(|r| r.1).collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    let x = match station {
        Some(s) => *xs
            .iter()
            .find(|x| (*x - s).abs() <= 1e-9 * s.abs().max(1.0))
            .ok_or_else(|| CliError::Validation(vec![format!("station: {s} not in {}", input.display())]))?,
        None if xs.len() == 1 => xs[0],
        None => return Err(CliError::Validation(vec![format!("station: required, file has {} stations", xs.len())])),
    };
    let series: Vec<(f64, f64)> = rows.iter().filter(|r| r.1 == x).map(|r| (r.0, r.2)).collect();
    let report = fit_power_law(&series, x, window, &FitOptions { min_t_lo }).map_err(|e| CliError::Core("decay fit".into(), e))?;
    let value = serde_json::json!({ "name": input.display().to_string(), "reports": [report] });
    match output {
        Some(p) => output::write_json(p, &value).map_err(CliError::Io)?,
        None => println!("{}", serde_json::to_string_pretty(&value).unwrap_or_default()),
    }
    Ok(())
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Potential { action: PotentialCmd::Dump(a) } => run_config(&a, Pipeline::PotentialDump),
        Command::Scatter { action: ScatterCmd::Sweep(a) } => run_config(&a, Pipeline::ScatterSweep),
        Command::Scatter { action: ScatterCmd::Resonance(a) } => run_config(&a, Pipeline::Resonance),
        Command::Fdtd { action: FdtdCmd::Run(a) } => run_config(&a, Pipeline::Fdtd),
        Command::Wkb { action: WkbCmd::Sweep(a) } => run_config(&a, Pipeline::WkbSweep),
        Command::Evolve { action: EvolveCmd::Run(a) } => {
            let cfg = match &a.config {
                Some(p) => {
                    let cfg = load(p)?;
                    expect_pipeline(&cfg, Pipeline::Evolve)?;
                    cfg
                }
                None => evolve_config(&a)?,
            };
            execute(&cfg, a.output_dir.as_deref())
        }
        Command::PriceLaw(a) => {
            let cfg = match &a.config {
                Some(p) => {
                    let cfg = load(p)?;
                    expect_pipeline(&cfg, Pipeline::PriceLaw)?;
                    cfg
                }
                None => price_law_config(&a)?,
            };
            execute(&cfg, a.output_dir.as_deref())
        }
        Command::Fit { action: FitCmd::Run { input, window, station, min_t_lo, output } } => {
            fit_run(&input, &window, station, min_t_lo, output.as_deref())
        }
        Command::Fit { action: FitCmd::Compare { output, reports } } => {
            let table = pipeline::compare_reports(&reports)?;
            let dir = output.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
            let stem = output.file_stem().and_then(|s| s.to_str()).unwrap_or("summary");
            table.write(dir, stem).map_err(CliError::Io)?;
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprint!("error: {e}");
            if !matches!(e, CliError::Validation(_)) {
                eprintln!();
            }
            ExitCode::from(e.exit_code())
        }
    }
}
