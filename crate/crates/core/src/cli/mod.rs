//! The `delta-lab` command line: one subcommand per scenario, options from
//! a `key=value` config file overlaid by flags.
//!
//! | subcommand | CSV columns |
//! |---|---|
//! | `sift` | `eps,integral,deviation` |
//! | `project` | `n,coefficient,probability,energy` |
//! | `series` | `N,norm_sum,energy_sum` |
//! | `energy` | `eps,energy,closed_form,energy_times_eps2` |
//! | `kernel` | `N,kernel` |
//! | `slit` | `p,density` |
//! | `modes` | `n,product,product_over_hbar` |
//!
//! Exit codes: 0 success, 2 configuration error, 3 numerical failure.

mod config;
mod run;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use config::{
    validate, Diagnostic, ModelChoice, Scenario, ScenarioConfig, Settings, TestFunction, KNOWN_KEYS,
};
pub use run::{execute, run, Failure, RunError, RunReport, ScenarioOutput, SCHEMA_VERSION};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "delta-lab",
    version,
    about = "Energy cost of position-measurement states"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sifting integrals ∫|χ_ε|²f against f(x0) over a list of widths
    Sift(Options),
    /// Overlap table c_n, P(E_n), E_n for the lowest n-max states
    Project(Options),
    /// Normalization and energy partial sums with a divergence verdict
    Series(Options),
    /// Direct ⟨H⟩ of a smooth approximant against its closed form
    Energy(Options),
    /// Completeness-kernel partial sums K_N(x, x′) and kernel sifting
    Kernel(Options),
    /// Single-slit momentum density, dark band and energy threshold
    Slit(Options),
    /// Uncertainty products of the slit's transverse modes
    Modes(Options),
}

/// Flags shared by every subcommand. Each one can also be given as a
/// `key=value` line in the config file; flags win.
#[derive(Debug, Args, Default)]
struct Options {
    /// key=value configuration file
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory for <scenario>.csv and report.json
    #[arg(long)]
    out: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    hbar: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    mass: Option<String>,
    /// Worker threads (results do not depend on it)
    #[arg(long)]
    threads: Option<String>,
    /// free, well or oscillator
    #[arg(long)]
    model: Option<String>,
    /// Well (or slit) width
    #[arg(long, allow_hyphen_values = true)]
    a: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    omega: Option<String>,
    /// rect, sine or gaussian
    #[arg(long)]
    approximant: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    eps: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    x0: Option<String>,
    /// Comma-separated state counts
    #[arg(long)]
    checkpoints: Option<String>,
    /// Comma-separated widths
    #[arg(long = "eps-list", allow_hyphen_values = true)]
    eps_list: Option<String>,
    /// Test function: square, cos or sin
    #[arg(long)]
    f: Option<String>,
    #[arg(long = "n-max")]
    n_max: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    x: Option<String>,
    #[arg(long = "x-prime", allow_hyphen_values = true)]
    x_prime: Option<String>,
    /// Incident energy
    #[arg(long = "E0", allow_hyphen_values = true)]
    e0: Option<String>,
    /// Aperture grid extent
    #[arg(long, allow_hyphen_values = true)]
    extent: Option<String>,
    /// Aperture grid samples (power of two)
    #[arg(long)]
    samples: Option<String>,
}

impl Options {
    fn flags(&self) -> Vec<(&'static str, &Option<String>)> {
        vec![
            ("out", &self.out),
            ("hbar", &self.hbar),
            ("mass", &self.mass),
            ("threads", &self.threads),
            ("model", &self.model),
            ("a", &self.a),
            ("omega", &self.omega),
            ("approximant", &self.approximant),
            ("eps", &self.eps),
            ("x0", &self.x0),
            ("checkpoints", &self.checkpoints),
            ("eps-list", &self.eps_list),
            ("f", &self.f),
            ("n-max", &self.n_max),
            ("x", &self.x),
            ("x-prime", &self.x_prime),
            ("E0", &self.e0),
            ("extent", &self.extent),
            ("samples", &self.samples),
        ]
    }
}

impl Command {
    fn split(self) -> (Scenario, Options) {
        match self {
            Command::Sift(o) => (Scenario::Sift, o),
            Command::Project(o) => (Scenario::Project, o),
            Command::Series(o) => (Scenario::Series, o),
            Command::Energy(o) => (Scenario::Energy, o),
            Command::Kernel(o) => (Scenario::Kernel, o),
            Command::Slit(o) => (Scenario::Slit, o),
            Command::Modes(o) => (Scenario::Modes, o),
        }
    }
}

fn report_diagnostics(diags: &[Diagnostic]) -> i32 {
    for d in diags {
        eprintln!("config error: {d}");
    }
    EXIT_CONFIG
}

fn load(scenario: Scenario, options: &Options) -> Result<ScenarioConfig, Vec<Diagnostic>> {
    let mut settings = match &options.config {
        None => Settings::default(),
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| {
                vec![Diagnostic::new(
                    "config",
                    format!("{}: {e}", path.display()),
                )]
            })?;
            Settings::parse(&text)?
        }
    };
    for (key, value) in options.flags() {
        if let Some(v) = value {
            settings.set(key, v.clone());
        }
    }
    let config = ScenarioConfig::from_settings(scenario, &settings)?;
    let diags = validate(&config);
    if diags.is_empty() {
        Ok(config)
    } else {
        Err(diags)
    }
}

/// Parses `args` (including the program name), runs the scenario and
/// returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let (scenario, options) = cli.command.split();
    let config = match load(scenario, &options) {
        Ok(c) => c,
        Err(diags) => return report_diagnostics(&diags),
    };
    let result = match config.threads {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| run(&config)),
            Err(e) => return report_diagnostics(&[Diagnostic::new("threads", e.to_string())]),
        },
        None => run(&config),
    };
    match result {
        Ok(report) => {
            println!(
                "{}: wrote {}.csv and report.json to {}",
                scenario.name(),
                scenario.name(),
                config.output_dir.display()
            );
            if let Some(v) = report.results.get("verdict") {
                println!("verdict: {v}");
            }
            EXIT_OK
        }
        Err(RunError::Numerical(f)) => {
            eprintln!("numerical error: {f}");
            EXIT_NUMERICAL
        }
        Err(e @ RunError::Io(_)) => report_diagnostics(&[Diagnostic::new("out", e.to_string())]),
    }
}

pub fn main() -> i32 {
    main_with_args(std::env::args_os())
}
