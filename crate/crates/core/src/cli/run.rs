//! Scenario execution: each scenario produces a CSV table and a JSON
//! results object.

use std::fs;
use std::time::Instant;

use serde::Serialize;
use serde_json::{json, Value};

use super::config::{ModelChoice, Scenario, ScenarioConfig};
use crate::approximants::{sifting_check, Approximant};
use crate::error::Error;
use crate::numerics::fit_loglog_slope;
use crate::projection::{
    approximant_in, build_series, direct_energy_expectation, free_energy_closed_form,
    overlap_table, Host, Verdict,
};
use crate::slit::{classify_incident_energy, diffract, mode_uncertainty_growth, SlitSetup};
use crate::spectra::{ModelSpectrum, PhysicalUnits};

/// Version of the CSV headers and JSON keys.
pub const SCHEMA_VERSION: u32 = 1;

/// A numerical failure inside a named operation.
#[derive(Debug, Clone, PartialEq)]
pub struct Failure {
    pub operation: &'static str,
    pub error: Error,
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} failed: {}", self.operation, self.error)
    }
}

trait Context<T> {
    fn during(self, operation: &'static str) -> Result<T, Failure>;
}

impl<T> Context<T> for crate::Result<T> {
    fn during(self, operation: &'static str) -> Result<T, Failure> {
        self.map_err(|error| Failure { operation, error })
    }
}

/// CSV text plus the JSON results of one scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioOutput {
    pub csv: String,
    pub results: Value,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub tool: &'static str,
    pub version: &'static str,
    pub scenario: Scenario,
    pub config: ScenarioConfig,
    pub results: Value,
    pub duration_seconds: f64,
}

/// Shortest representation that parses back to the same `f64`.
fn num(v: f64) -> String {
    format!("{v:?}")
}

struct Table {
    text: String,
}

impl Table {
    fn new(header: &[&str]) -> Self {
        Self {
            text: header.join(",") + "\n",
        }
    }

    fn row(&mut self, cells: &[String]) {
        self.text.push_str(&cells.join(","));
        self.text.push('\n');
    }
}

fn spectrum(config: &ScenarioConfig) -> crate::Result<Option<ModelSpectrum>> {
    let units = PhysicalUnits::new(config.units.hbar, config.units.mass)?;
    Ok(match config.model {
        ModelChoice::Free => None,
        ModelChoice::Well { a } => Some(ModelSpectrum::well(a, units)?),
        ModelChoice::Oscillator { omega } => Some(ModelSpectrum::oscillator(omega, units)?),
    })
}

fn approximant(
    config: &ScenarioConfig,
    model: Option<&ModelSpectrum>,
    eps: f64,
) -> crate::Result<Approximant> {
    match model {
        Some(m) => approximant_in(m, config.approximant, config.x0, eps),
        None => Approximant::new(config.approximant, config.x0, eps, None),
    }
}

fn bound(model: Option<ModelSpectrum>) -> Result<ModelSpectrum, Failure> {
    model.ok_or(Failure {
        operation: "model",
        error: Error::param("model", "a bound model is required"),
    })
}

fn fit_json(xs: &[f64], ys: &[f64]) -> Value {
    match fit_loglog_slope(xs, ys) {
        Ok(fit) => json!({"slope": fit.slope, "r_squared": fit.r_squared}),
        Err(_) => Value::Null,
    }
}

fn sift(config: &ScenarioConfig) -> Result<ScenarioOutput, Failure> {
    let model = spectrum(config).during("model")?;
    let a = config.length_scale();
    let f = config.f;
    let base = approximant(config, model.as_ref(), config.eps_list[0]).during("approximant")?;
    let report =
        sifting_check(&base, |x| f.eval(x, a), &config.eps_list).during("sifting_check")?;
    let mut t = Table::new(&["eps", "integral", "deviation"]);
    for i in 0..report.epsilon_values.len() {
        t.row(&[
            num(report.epsilon_values[i]),
            num(report.integrals[i]),
            num(report.deviations[i]),
        ]);
    }
    let mut pairs: Vec<(f64, f64)> = report
        .epsilon_values
        .iter()
        .copied()
        .zip(report.deviations.iter().copied())
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (xs, ys): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
    Ok(ScenarioOutput {
        csv: t.text,
        results: json!({
            "target": report.target,
            "deviation_fit": fit_json(&xs, &ys),
        }),
    })
}

fn project(config: &ScenarioConfig) -> Result<ScenarioOutput, Failure> {
    let model = bound(spectrum(config).during("model")?)?;
    let approx = approximant(config, Some(&model), config.eps).during("approximant")?;
    let table = overlap_table(&model, &approx, config.n_max).during("overlap_table")?;
    let mut t = Table::new(&["n", "coefficient", "probability", "energy"]);
    for e in &table.entries {
        t.row(&[
            e.n.to_string(),
            num(e.coefficient),
            num(e.probability),
            num(e.energy),
        ]);
    }
    Ok(ScenarioOutput {
        csv: t.text,
        results: json!({
            "probability_sum": table.probability_sum(),
            "source": table.source,
        }),
    })
}

fn series(config: &ScenarioConfig) -> Result<ScenarioOutput, Failure> {
    let model = bound(spectrum(config).during("model")?)?;
    let approx = approximant(config, Some(&model), config.eps).during("approximant")?;
    let s = build_series(&model, &approx, &config.checkpoints).during("build_series")?;
    let mut t = Table::new(&["N", "norm_sum", "energy_sum"]);
    for i in 0..s.checkpoints.len() {
        t.row(&[
            s.checkpoints[i].to_string(),
            num(s.normalization_sums[i]),
            num(s.energy_sums[i]),
        ]);
    }
    let limit = match s.verdict {
        Verdict::Convergent { limit } => json!(limit),
        _ => Value::Null,
    };
    Ok(ScenarioOutput {
        csv: t.text,
        results: json!({
            "verdict": s.verdict.label(),
            "slope": s.fit.slope,
            "r_squared": s.fit.r_squared,
            "limit": limit,
            "states": s.states,
            "source": s.source,
        }),
    })
}

fn energy(config: &ScenarioConfig) -> Result<ScenarioOutput, Failure> {
    let model = spectrum(config).during("model")?;
    let units = PhysicalUnits::new(config.units.hbar, config.units.mass).during("units")?;
    let host = match model {
        Some(m) => Host::Bound(m),
        None => Host::Free(units),
    };
    let mut t = Table::new(&["eps", "energy", "closed_form", "energy_times_eps2"]);
    let mut rows = Vec::new();
    for &eps in &config.eps_list {
        let approx = approximant(config, model.as_ref(), eps).during("approximant")?;
        let e = direct_energy_expectation(&host, &approx).during("direct_energy_expectation")?;
        let closed = match host {
            Host::Free(u) => {
                Some(free_energy_closed_form(config.approximant, eps, &u).during("closed_form")?)
            }
            Host::Bound(_) => None,
        };
        t.row(&[
            num(eps),
            num(e),
            closed.map_or_else(String::new, num),
            num(e * eps * eps),
        ]);
        rows.push((e, closed));
    }
    let (e, closed) = rows[0];
    Ok(ScenarioOutput {
        csv: t.text,
        results: json!({"energy": e, "closed_form": closed}),
    })
}

fn kernel(config: &ScenarioConfig) -> Result<ScenarioOutput, Failure> {
    let model = bound(spectrum(config).during("model")?)?;
    let mut t = Table::new(&["N", "kernel"]);
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for &n in &config.checkpoints {
        let k = model
            .completeness_kernel(config.x, config.x_prime, n)
            .during("completeness_kernel")?;
        t.row(&[n.to_string(), num(k.value)]);
        xs.push(n as f64);
        ys.push(k.value);
    }
    let a = config.length_scale();
    let f = config.f;
    let sifted = model
        .kernel_sifting(config.x_prime, config.n_max, |x| f.eval(x, a))
        .during("kernel_sifting")?;
    Ok(ScenarioOutput {
        csv: t.text,
        results: json!({
            "kernel_fit": fit_json(&xs, &ys),
            "sifting": {
                "n_terms": config.n_max,
                "value": sifted,
                "target": f.eval(config.x_prime, a),
            },
        }),
    })
}

fn slit(config: &ScenarioConfig) -> Result<ScenarioOutput, Failure> {
    let setup = SlitSetup::with_grid(
        config.length_scale(),
        config.e0,
        config.units,
        config.extent,
        config.samples,
    )
    .during("slit setup")?;
    let profile = diffract(&setup).during("diffract")?;
    let mut t = Table::new(&["p", "density"]);
    for (p, rho) in profile.momentum_grid.iter().zip(&profile.density) {
        t.row(&[num(*p), num(*rho)]);
    }
    let ground = ModelSpectrum::well(setup.width, setup.units)
        .and_then(|w| w.energy(1))
        .during("well ground state")?;
    Ok(ScenarioOutput {
        csv: t.text,
        results: json!({
            "threshold": setup.threshold(),
            "threshold_over_ground_state": setup.threshold() / ground,
            "classification": classify_incident_energy(&setup),
            "first_dark_band": profile.first_dark_band,
            "dark_band_product_over_h": profile.product_over_h,
            "central_lobe_fraction": profile.central_lobe_fraction,
            "parseval_error": profile.parseval_error,
        }),
    })
}

fn modes(config: &ScenarioConfig) -> Result<ScenarioOutput, Failure> {
    let products =
        mode_uncertainty_growth(config.length_scale(), config.units, config.n_max as u64)
            .during("mode_uncertainty_growth")?;
    let hbar = config.units.hbar;
    let mut t = Table::new(&["n", "product", "product_over_hbar"]);
    for &(n, p) in &products {
        t.row(&[n.to_string(), num(p), num(p / hbar)]);
    }
    Ok(ScenarioOutput {
        csv: t.text,
        results: json!({
            "strictly_increasing": products.windows(2).all(|w| w[1].1 > w[0].1),
            "ground_over_minimum": products[0].1 / (0.5 * hbar),
            "first_excited_over_minimum": products[1].1 / (0.5 * hbar),
        }),
    })
}

/// Runs a validated scenario without touching the file system.
pub fn execute(config: &ScenarioConfig) -> Result<ScenarioOutput, Failure> {
    match config.scenario {
        Scenario::Sift => sift(config),
        Scenario::Project => project(config),
        Scenario::Series => series(config),
        Scenario::Energy => energy(config),
        Scenario::Kernel => kernel(config),
        Scenario::Slit => slit(config),
        Scenario::Modes => modes(config),
    }
}

/// Runs the scenario and writes `<scenario>.csv` and `report.json` into the
/// output directory.
pub fn run(config: &ScenarioConfig) -> Result<RunReport, RunError> {
    let started = Instant::now();
    let output = execute(config).map_err(RunError::Numerical)?;
    let report = RunReport {
        schema_version: SCHEMA_VERSION,
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        scenario: config.scenario,
        config: config.clone(),
        results: output.results,
        duration_seconds: started.elapsed().as_secs_f64(),
    };
    let dir = &config.output_dir;
    let io = |e: std::io::Error| RunError::Io(format!("{}: {e}", dir.display()));
    fs::create_dir_all(dir).map_err(io)?;
    fs::write(
        dir.join(format!("{}.csv", config.scenario.name())),
        &output.csv,
    )
    .map_err(io)?;
    let mut json = serde_json::to_string_pretty(&report).expect("report serializes");
    json.push('\n');
    fs::write(dir.join("report.json"), json).map_err(io)?;
    Ok(report)
}

#[derive(Debug, Clone, PartialEq)]
pub enum RunError {
    Numerical(Failure),
    Io(String),
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::Numerical(e) => e.fmt(f),
            RunError::Io(e) => write!(f, "cannot write outputs to {e}"),
        }
    }
}
