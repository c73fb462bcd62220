use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use cqnls::experiments::{
    plot_csv, run_scenario, write_table, PlotOptions, ScenarioConfig, Summary,
};
use cqnls::ground_state::{petviashvili, pohozaev_check, shooting_oracle};
use cqnls::spectral::{write_field, GridSpec};
use cqnls::Error;

/// Numerical experiments for the radial 2d cubic-quintic NLS.
#[derive(Parser)]
#[command(name = "cqnls", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute Q by Petviashvili iteration, or by radial shooting with --oracle.
    GroundState(GroundStateArgs),
    /// Run the scenario named in a config file.
    Evolve(ConfigArgs),
    /// Morawetz bound scan over a radius grid.
    VirialScan(ConfigArgs),
    /// Local energy minima on dyadic windows.
    Evacuation(ConfigArgs),
    /// Exterior kinetic energy beyond C lambda(t).
    Localization(ConfigArgs),
    /// Exterior Littlewood-Paley pieces along a run.
    FreqDecay(FreqDecayArgs),
    /// Checks of the incoming/outgoing decomposition.
    InoutTest(InoutArgs),
    /// Operator norms of cutoff/projection composites.
    MismatchScan(MismatchArgs),
    /// Line plot of CSV columns as SVG.
    Plot(PlotArgs),
}

#[derive(Args)]
struct GroundStateArgs {
    #[arg(long, default_value_t = 512)]
    n: usize,
    #[arg(long, default_value_t = 20.0)]
    half_width: f64,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long, default_value_t = 500)]
    max_iter: usize,
    /// Write Q to this field file.
    #[arg(long, visible_alias = "out")]
    field: Option<PathBuf>,
    /// Use the radial shooting solver instead.
    #[arg(long)]
    oracle: bool,
    #[arg(long, default_value_t = 30.0)]
    rmax: f64,
    #[arg(long, default_value_t = 1e-3)]
    dr: f64,
    /// Write the radial profile as CSV (oracle only).
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct ConfigArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long = "T")]
    t_final: Option<f64>,
    #[arg(long)]
    output_dir: Option<PathBuf>,
    #[arg(long)]
    name: Option<String>,
}

#[derive(Args)]
struct FreqDecayArgs {
    #[command(flatten)]
    base: ConfigArgs,
    #[arg(long = "N-list", value_delimiter = ',')]
    n_list: Option<Vec<f64>>,
}

#[derive(Args)]
struct InoutArgs {
    #[arg(long, default_value_t = 400)]
    m: usize,
    #[arg(long, default_value_t = 40.0)]
    rmax: f64,
    #[arg(long, default_value_t = 200)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 512)]
    n: usize,
    #[arg(long, default_value_t = 40.0)]
    half_width: f64,
    #[arg(long, default_value = ".")]
    output_dir: PathBuf,
}

#[derive(Args)]
struct MismatchArgs {
    #[arg(long, default_value = "1")]
    kind: String,
    #[arg(long = "N", default_value_t = 4.0)]
    n_freq: f64,
    #[arg(long = "R-list", value_delimiter = ',', default_value = "4,8,16")]
    r_list: Vec<f64>,
    #[arg(long, default_value_t = 8)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 256)]
    n: usize,
    #[arg(long, default_value_t = 40.0)]
    half_width: f64,
    #[arg(long, default_value = ".")]
    output_dir: PathBuf,
}

#[derive(Args)]
struct PlotArgs {
    #[arg(long)]
    csv: PathBuf,
    #[arg(long)]
    x: String,
    #[arg(long, value_delimiter = ',')]
    y: Vec<String>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    log_log: bool,
    /// Reference line slope.
    #[arg(long, allow_hyphen_values = true)]
    slope: Option<f64>,
    #[arg(long)]
    title: Option<String>,
}

/// Exit status 2 for bad input, 1 for failed checks or runtime failure.
enum Failure {
    Usage(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config { .. }
            | Error::InvalidArgument(_)
            | Error::Format(_)
            | Error::NotPowerOfTwo(_)
            | Error::GridTooSmall(_)
            | Error::BadHalfWidth(_)
            | Error::InadmissibleFrequency { .. }
            | Error::RadiusTooLarge { .. } => Failure::Usage(e.to_string()),
            _ => Failure::Runtime(e.to_string()),
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn run(command: Command) -> Result<bool, Failure> {
    match command {
        Command::GroundState(a) => ground_state(a),
        Command::Evolve(a) => scenario(&a, None, |_| {}),
        Command::VirialScan(a) => scenario(&a, Some("virial-scan"), |_| {}),
        Command::Evacuation(a) => scenario(&a, Some("evacuation"), |_| {}),
        Command::Localization(a) => scenario(&a, Some("localization"), |_| {}),
        Command::FreqDecay(a) => scenario(&a.base, Some("freq-decay"), |v| {
            if let Some(list) = &a.n_list {
                v["N_list"] = json!(list);
            }
        }),
        Command::InoutTest(a) => report(run_scenario(&ScenarioConfig::from_value(json!({
            "scenario": "inout",
            "n": a.n,
            "half_width": a.half_width,
            "m": a.m,
            "rmax": a.rmax,
            "trials": a.trials,
            "seed": a.seed,
            "output_dir": a.output_dir,
        }))?)?),
        Command::MismatchScan(a) => report(run_scenario(&ScenarioConfig::from_value(json!({
            "scenario": "mismatch",
            "n": a.n,
            "half_width": a.half_width,
            "kind": a.kind,
            "N": a.n_freq,
            "R_list": a.r_list,
            "trials": a.trials,
            "seed": a.seed,
            "output_dir": a.output_dir,
        }))?)?),
        Command::Plot(a) => {
            let ys: Vec<&str> = a.y.iter().map(String::as_str).collect();
            let opts = PlotOptions {
                log_log: a.log_log,
                reference_slope: a.slope,
                title: a.title,
            };
            plot_csv(&a.csv, &a.x, &ys, &a.out, &opts)?;
            Ok(true)
        }
    }
}

fn load_config(path: &Path) -> Result<Value, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn scenario(
    a: &ConfigArgs,
    forced: Option<&str>,
    extra: impl FnOnce(&mut Value),
) -> Result<bool, Failure> {
    let mut v = load_config(&a.config)?;
    if !v.is_object() {
        return Err(Failure::Usage("config must be a JSON object".into()));
    }
    if let Some(s) = forced {
        v["scenario"] = json!(s);
    }
    if let Some(dt) = a.dt {
        v["dt"] = json!(dt);
    }
    if let Some(t) = a.t_final {
        v["T"] = json!(t);
    }
    if let Some(dir) = &a.output_dir {
        v["output_dir"] = json!(dir);
    }
    if let Some(name) = &a.name {
        v["name"] = json!(name);
    }
    extra(&mut v);
    let cfg = ScenarioConfig::from_value(v)?;
    report(run_scenario(&cfg)?)
}

fn report(summary: Summary) -> Result<bool, Failure> {
    println!(
        "{}",
        serde_json::to_string_pretty(&summary).expect("summary serializes")
    );
    Ok(summary.passed)
}

fn ground_state(a: GroundStateArgs) -> Result<bool, Failure> {
    if a.oracle {
        let profile = shooting_oracle(a.rmax, a.dr, a.tol)?;
        let q0 = profile.interpolate(0.0).re;
        if let Some(path) = &a.csv {
            let rows: Vec<Vec<f64>> = profile
                .r_values()
                .iter()
                .zip(profile.samples())
                .map(|(r, q)| vec![*r, q.re])
                .collect();
            write_table(path, &["r", "Q"], &rows)?;
        }
        let out = json!({
            "method": "shooting",
            "q0": q0,
            "mass": profile.l2_norm_sq(),
            "rmax": a.rmax,
            "dr": a.dr,
        });
        println!(
            "{}",
            serde_json::to_string_pretty(&out).expect("serializes")
        );
        return Ok(true);
    }
    let grid = GridSpec::new(a.n, a.half_width)?;
    let gs = petviashvili(grid, a.tol, a.max_iter)?;
    let poh = pohozaev_check(&gs)?;
    if let Some(path) = &a.field {
        write_field(&gs.q, path)?;
    }
    let out = json!({
        "method": "petviashvili",
        "n": a.n,
        "half_width": a.half_width,
        "iterations": gs.iterations,
        "residual": gs.residual,
        "stabilizer": gs.stabilizer,
        "mass": gs.mass_q,
        "q0": gs.q.linf(),
        "pohozaev": {
            "kinetic": poh.kinetic,
            "quartic": poh.quartic,
            "energy": poh.energy,
            "mass_radial": poh.mass_radial,
            "mass_crosscheck": poh.mass_crosscheck,
            "angular_deviation": poh.angular_deviation,
        },
        "warnings": gs.warnings,
    });
    println!(
        "{}",
        serde_json::to_string_pretty(&out).expect("serializes")
    );
    Ok(true)
}
