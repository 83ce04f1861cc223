//! Command-line front end: argument parsing and command execution, kept in a
//! library so the binary is a thin wrapper and tests can drive it in-process.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use qthermo::catalysis::{catalysis_sweep, sweep_csv, ProfileKind, SweepSystem};
use qthermo::correlated::{scenario_report, ScenarioParams};
use qthermo::format::sig17;
use qthermo::types::default_grid;
use qthermo::{
    divergence, gibbs_dist, second_law_scan, thermo_curve, AlphaValue, ExtReal, Family,
    GibbsContext, ProbDist,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FORBIDDEN: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;
pub const EXIT_DOMAIN: i32 = 4;

#[derive(Debug, Parser)]
#[command(
    name = "qthermo",
    version,
    about = "Generalized free energies, thermo-majorization and catalysis reports"
)]
pub struct Cli {
    /// JSON file with option values; flags given on the command line win.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Renyi and non-additive divergences of p from q over an order grid (CSV).
    Divergence(DivergenceArgs),
    /// Free-energy changes of p -> p' over an order grid (JSON).
    Scan(ScanArgs),
    /// Thermo-majorization curve breakpoints of p (CSV).
    Curve(CurveArgs),
    /// Finite-size catalysis landscape over profile kinds, dimensions, epsilons and orders (CSV).
    CatalysisSweep(SweepArgs),
    /// Two-qubit correlated-catalysis scenario report (JSON).
    CorrelatedDemo(DemoArgs),
}

#[derive(Debug, Args)]
pub struct DivergenceArgs {
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub p: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub q: Option<Vec<f64>>,
    /// Orders; accepts `inf` and `-inf`. Default: the standard grid on [0, inf].
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub alphas: Option<Vec<AlphaValue>>,
}

#[derive(Debug, Args)]
pub struct ThermalArgs {
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub energies: Option<Vec<f64>>,
    #[arg(long)]
    pub beta: Option<f64>,
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub p: Option<Vec<f64>>,
    /// Final state p'.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub pp: Option<Vec<f64>>,
    #[command(flatten)]
    pub thermal: ThermalArgs,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub alphas: Option<Vec<AlphaValue>>,
    /// Exit with status 1 when the transition is forbidden.
    #[arg(long)]
    pub fail_on_forbidden: bool,
}

#[derive(Debug, Args)]
pub struct CurveArgs {
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub p: Option<Vec<f64>>,
    /// Reference distribution; alternatively give --energies and --beta.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub g: Option<Vec<f64>>,
    #[command(flatten)]
    pub thermal: ThermalArgs,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// `distributed`, `concentrated` or both. Default: both.
    #[arg(long, value_delimiter = ',')]
    pub kind: Option<Vec<ProfileKind>>,
    /// Catalyst dimensions. Default: 4,8,16.
    #[arg(long, value_delimiter = ',')]
    pub d: Option<Vec<usize>>,
    /// Return errors. Default: 0.001,0.01.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub eps: Option<Vec<f64>>,
    /// Orders (finite, positive, not 1). Default: 0.5,2,3.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub alphas: Option<Vec<f64>>,
    /// System initial state. Default: the two-qubit scenario's system pair.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub p: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub pp: Option<Vec<f64>>,
    #[command(flatten)]
    pub thermal: ThermalArgs,
}

#[derive(Debug, Args)]
pub struct DemoArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub e_g: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub e_e: Option<f64>,
    #[arg(long)]
    pub beta1: Option<f64>,
    #[arg(long)]
    pub beta2: Option<f64>,
    #[arg(long)]
    pub beta3: Option<f64>,
    #[arg(long)]
    pub beta_b: Option<f64>,
    /// Classical correlation strengths. Default: 0.05,0.065.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub chi: Option<Vec<f64>>,
    /// Coherences in the degenerate block. Default: 0.0947.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub lambda: Option<Vec<f64>>,
    /// Also write one CSV per curve into this directory.
    #[arg(long)]
    pub csv_dir: Option<PathBuf>,
    #[arg(long)]
    pub fail_on_forbidden: bool,
}

/// Option values read from `--config`. Unknown keys are rejected.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub p: Option<Vec<f64>>,
    pub q: Option<Vec<f64>>,
    pub pp: Option<Vec<f64>>,
    pub g: Option<Vec<f64>>,
    pub energies: Option<Vec<f64>>,
    pub beta: Option<f64>,
    pub alphas: Option<Vec<AlphaValue>>,
    pub kind: Option<Vec<ProfileKind>>,
    pub d: Option<Vec<usize>>,
    pub eps: Option<Vec<f64>>,
    pub e_g: Option<f64>,
    pub e_e: Option<f64>,
    pub beta1: Option<f64>,
    pub beta2: Option<f64>,
    pub beta3: Option<f64>,
    pub beta_b: Option<f64>,
    pub chi: Option<Vec<f64>>,
    pub lambda: Option<Vec<f64>>,
    pub csv_dir: Option<PathBuf>,
    pub fail_on_forbidden: Option<bool>,
}

#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Io(String, io::Error),
    Domain(qthermo::Error),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Usage(_) => EXIT_USAGE,
            Failure::Io(..) => EXIT_IO,
            Failure::Domain(_) => EXIT_DOMAIN,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Usage(m) => write!(f, "usage error: {m}"),
            Failure::Io(what, e) => write!(f, "I/O failure ({what}): {e}"),
            Failure::Domain(e) => write!(f, "{}: {e}", e.kind()),
        }
    }
}

impl From<qthermo::Error> for Failure {
    fn from(e: qthermo::Error) -> Self {
        Failure::Domain(e)
    }
}

type Outcome = Result<i32, Failure>;

fn required<T>(name: &str, flag: Option<T>, config: Option<T>) -> Result<T, Failure> {
    flag.or(config)
        .ok_or_else(|| Failure::Usage(format!("missing --{}", name.replace('_', "-"))))
}

fn dist(v: Vec<f64>) -> Result<ProbDist, Failure> {
    Ok(ProbDist::new(v)?)
}

fn io_err(what: impl Into<String>) -> impl FnOnce(io::Error) -> Failure {
    let what = what.into();
    move |e| Failure::Io(what, e)
}

fn load_config(path: Option<&Path>) -> Result<Config, Failure> {
    let Some(path) = path else {
        return Ok(Config::default());
    };
    let text = fs::read_to_string(path).map_err(io_err(format!("reading {}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| Failure::Usage(format!("config {}: {e}", path.display())))
}

fn context(thermal: ThermalArgs, cfg: &mut Config) -> Result<GibbsContext, Failure> {
    let energies = required("energies", thermal.energies, cfg.energies.take())?;
    let beta = required("beta", thermal.beta, cfg.beta.take())?;
    Ok(GibbsContext::new(energies, beta)?)
}

fn ext(x: ExtReal) -> String {
    match x {
        ExtReal::Finite(v) => sig17(v + 0.0),
        ExtReal::PosInfinity => "inf".to_string(),
    }
}

fn write_out(out: &mut dyn Write, text: &str) -> Result<(), Failure> {
    out.write_all(text.as_bytes())
        .map_err(io_err("writing output"))
}

fn run_divergence(args: DivergenceArgs, mut cfg: Config, out: &mut dyn Write) -> Outcome {
    let p = dist(required("p", args.p, cfg.p.take())?)?;
    let q = dist(required("q", args.q, cfg.q.take())?)?;
    let grid = args
        .alphas
        .or(cfg.alphas.take())
        .unwrap_or_else(default_grid);
    let mut csv = String::from("alpha,renyi,tsallis\n");
    for alpha in grid {
        let r = divergence(Family::Renyi, &p, &q, alpha)?;
        let t = divergence(Family::Tsallis, &p, &q, alpha)?;
        let _ = writeln!(csv, "{alpha},{},{}", ext(r), ext(t));
    }
    write_out(out, &csv)?;
    Ok(EXIT_OK)
}

fn run_scan(args: ScanArgs, mut cfg: Config, out: &mut dyn Write) -> Outcome {
    let p = dist(required("p", args.p, cfg.p.take())?)?;
    let pp = dist(required("pp", args.pp, cfg.pp.take())?)?;
    let ctx = context(args.thermal, &mut cfg)?;
    let grid = args
        .alphas
        .or(cfg.alphas.take())
        .unwrap_or_else(default_grid);
    let report = second_law_scan(&p, &pp, &ctx, &grid)?;
    write_out(out, &(report.to_json() + "\n"))?;
    let fail = args.fail_on_forbidden || cfg.fail_on_forbidden.unwrap_or(false);
    Ok(if fail && !report.allowed {
        EXIT_FORBIDDEN
    } else {
        EXIT_OK
    })
}

fn run_curve(args: CurveArgs, mut cfg: Config, out: &mut dyn Write) -> Outcome {
    let p = dist(required("p", args.p, cfg.p.take())?)?;
    let g = match args.g.or(cfg.g.take()) {
        Some(g) => dist(g)?,
        None => gibbs_dist(&context(args.thermal, &mut cfg)?),
    };
    write_out(out, &thermo_curve(&p, &g)?.to_csv())?;
    Ok(EXIT_OK)
}

fn run_sweep(args: SweepArgs, mut cfg: Config, out: &mut dyn Write) -> Outcome {
    let kinds = args
        .kind
        .or(cfg.kind.take())
        .unwrap_or_else(|| vec![ProfileKind::Distributed, ProfileKind::Concentrated]);
    let ds = args.d.or(cfg.d.take()).unwrap_or_else(|| vec![4, 8, 16]);
    let eps = args
        .eps
        .or(cfg.eps.take())
        .unwrap_or_else(|| vec![0.001, 0.01]);
    let alphas = match args.alphas {
        Some(a) => a,
        None => match cfg.alphas.take() {
            Some(a) => a.into_iter().map(AlphaValue::as_f64).collect(),
            None => vec![0.5, 2.0, 3.0],
        },
    };

    let scenario = ScenarioParams::default();
    let p = match args.p.or(cfg.p.take()) {
        Some(v) => dist(v)?,
        None => scenario.thermal(scenario.beta2),
    };
    let p_prime = match args.pp.or(cfg.pp.take()) {
        Some(v) => dist(v)?,
        None => scenario.thermal(scenario.beta3),
    };
    let thermal_given = args.thermal.energies.is_some()
        || args.thermal.beta.is_some()
        || cfg.energies.is_some()
        || cfg.beta.is_some();
    let ctx = if thermal_given {
        context(args.thermal, &mut cfg)?
    } else {
        scenario.qubit_context()?
    };

    let system = SweepSystem { p, p_prime, ctx };
    let rows = catalysis_sweep(&system, &kinds, &ds, &eps, &alphas)?;
    write_out(out, &sweep_csv(&rows))?;
    Ok(EXIT_OK)
}

fn run_demo(args: DemoArgs, mut cfg: Config, out: &mut dyn Write) -> Outcome {
    let base = ScenarioParams::default();
    let params = ScenarioParams {
        e_g: args.e_g.or(cfg.e_g).unwrap_or(base.e_g),
        e_e: args.e_e.or(cfg.e_e).unwrap_or(base.e_e),
        beta1: args.beta1.or(cfg.beta1).unwrap_or(base.beta1),
        beta2: args.beta2.or(cfg.beta2).unwrap_or(base.beta2),
        beta3: args.beta3.or(cfg.beta3).unwrap_or(base.beta3),
        beta_b: args.beta_b.or(cfg.beta_b).unwrap_or(base.beta_b),
    };
    params.validate()?;
    let chi = args
        .chi
        .or(cfg.chi.take())
        .unwrap_or_else(|| vec![0.05, 0.065]);
    let lambda = args
        .lambda
        .or(cfg.lambda.take())
        .unwrap_or_else(|| vec![0.0947]);
    let report = scenario_report(&params, &chi, &lambda)?;

    if let Some(dir) = args.csv_dir.or(cfg.csv_dir.take()) {
        fs::create_dir_all(&dir).map_err(io_err(format!("creating {}", dir.display())))?;
        for (name, csv) in report.curve_csvs() {
            let path = dir.join(name);
            fs::write(&path, csv).map_err(io_err(format!("writing {}", path.display())))?;
        }
    }
    write_out(out, &(report.to_json() + "\n"))?;

    let fail = args.fail_on_forbidden || cfg.fail_on_forbidden.unwrap_or(false);
    let forbidden = report.states.iter().any(|s| s.verdict == "forbidden");
    Ok(if fail && forbidden {
        EXIT_FORBIDDEN
    } else {
        EXIT_OK
    })
}

/// Runs a parsed command, writing data to `out`.
pub fn execute(cli: Cli, out: &mut dyn Write) -> Outcome {
    let cfg = load_config(cli.config.as_deref())?;
    match cli.command {
        Command::Divergence(a) => run_divergence(a, cfg, out),
        Command::Scan(a) => run_scan(a, cfg, out),
        Command::Curve(a) => run_curve(a, cfg, out),
        Command::CatalysisSweep(a) => run_sweep(a, cfg, out),
        Command::CorrelatedDemo(a) => run_demo(a, cfg, out),
    }
}

/// Parses `argv` (program name first), executes, and returns the exit code.
/// Diagnostics go to `err`.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            if code == 0 {
                let _ = out.write_all(text.as_bytes());
                return EXIT_OK;
            }
            let _ = err.write_all(text.as_bytes());
            return EXIT_USAGE;
        }
    };
    match execute(cli, out) {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {f}");
            f.exit_code()
        }
    }
}
