//! Scenario configuration: flat `key=value` files overlaid by command-line
//! flags, parsed into a typed [`ScenarioConfig`] and checked by [`validate`].

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::Serialize;

use crate::approximants::Family;
use crate::projection::DEFAULT_CHECKPOINTS;
use crate::slit::{DEFAULT_EXTENT_OVER_WIDTH, DEFAULT_SAMPLES, MIN_EXTENT_OVER_WIDTH, MIN_SAMPLES};
use crate::spectra::PhysicalUnits;

/// Every key a config file or flag may set.
pub const KNOWN_KEYS: [&str; 21] = [
    "scenario",
    "out",
    "hbar",
    "mass",
    "threads",
    "model",
    "a",
    "omega",
    "approximant",
    "eps",
    "x0",
    "checkpoints",
    "eps-list",
    "f",
    "n-max",
    "x",
    "x-prime",
    "E0",
    "extent",
    "samples",
    "config",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    Sift,
    Project,
    Series,
    Energy,
    Kernel,
    Slit,
    Modes,
}

impl Scenario {
    pub const ALL: [Scenario; 7] = [
        Scenario::Sift,
        Scenario::Project,
        Scenario::Series,
        Scenario::Energy,
        Scenario::Kernel,
        Scenario::Slit,
        Scenario::Modes,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::Sift => "sift",
            Scenario::Project => "project",
            Scenario::Series => "series",
            Scenario::Energy => "energy",
            Scenario::Kernel => "kernel",
            Scenario::Slit => "slit",
            Scenario::Modes => "modes",
        }
    }
}

impl FromStr for Scenario {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Scenario::ALL
            .into_iter()
            .find(|sc| sc.name() == s)
            .ok_or_else(|| format!("unknown scenario `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelChoice {
    Free,
    Well { a: f64 },
    Oscillator { omega: f64 },
}

/// Test function for sifting integrals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TestFunction {
    /// x²
    Square,
    /// cos x
    Cos,
    /// sin(πx/a), the well ground-state shape
    Sin,
}

impl TestFunction {
    pub fn eval(self, x: f64, a: f64) -> f64 {
        match self {
            TestFunction::Square => x * x,
            TestFunction::Cos => x.cos(),
            TestFunction::Sin => (std::f64::consts::PI * x / a).sin(),
        }
    }
}

impl FromStr for TestFunction {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "square" => Ok(TestFunction::Square),
            "cos" => Ok(TestFunction::Cos),
            "sin" => Ok(TestFunction::Sin),
            _ => Err(format!("unknown test function `{s}` (square, cos, sin)")),
        }
    }
}

/// A problem with one configuration key.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub key: String,
    pub message: String,
    /// Line of the config file the value came from.
    pub line: Option<usize>,
}

impl Diagnostic {
    pub fn new(key: &str, message: impl Into<String>) -> Self {
        Self {
            key: key.to_string(),
            message: message.into(),
            line: None,
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}: {}", self.key, self.message),
            None => write!(f, "{}: {}", self.key, self.message),
        }
    }
}

/// Raw string settings with the config-file line each one came from.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Settings {
    values: BTreeMap<String, (String, Option<usize>)>,
}

impl Settings {
    /// Parses `key = value` lines; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self, Vec<Diagnostic>> {
        let mut settings = Settings::default();
        let mut diags = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let Some((key, value)) = content.split_once('=') else {
                diags.push(Diagnostic {
                    key: content.to_string(),
                    message: "expected key=value".into(),
                    line: Some(line),
                });
                continue;
            };
            let key = key.trim();
            if !KNOWN_KEYS.contains(&key) || key == "config" {
                diags.push(Diagnostic {
                    key: key.to_string(),
                    message: "unknown key".into(),
                    line: Some(line),
                });
                continue;
            }
            settings
                .values
                .insert(key.to_string(), (value.trim().to_string(), Some(line)));
        }
        if diags.is_empty() {
            Ok(settings)
        } else {
            Err(diags)
        }
    }

    /// Sets `key`, replacing any config-file value.
    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        self.values.insert(key.to_string(), (value.into(), None));
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(|(v, _)| v.as_str())
    }

    fn line(&self, key: &str) -> Option<usize> {
        self.values.get(key).and_then(|(_, l)| *l)
    }
}

/// A fully typed scenario.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioConfig {
    pub scenario: Scenario,
    pub model: ModelChoice,
    pub approximant: Family,
    pub eps: f64,
    pub x0: f64,
    pub checkpoints: Vec<usize>,
    pub eps_list: Vec<f64>,
    pub f: TestFunction,
    pub n_max: usize,
    pub x: f64,
    pub x_prime: f64,
    #[serde(rename = "E0")]
    pub e0: f64,
    pub extent: f64,
    pub samples: usize,
    pub units: PhysicalUnits,
    #[serde(skip)]
    pub output_dir: PathBuf,
    #[serde(skip)]
    pub threads: Option<usize>,
}

struct Reader<'a> {
    settings: &'a Settings,
    diags: Vec<Diagnostic>,
}

impl Reader<'_> {
    fn fail(&mut self, key: &str, message: String) {
        self.diags.push(Diagnostic {
            key: key.to_string(),
            message,
            line: self.settings.line(key),
        });
    }

    fn parse<T: FromStr>(&mut self, key: &str, default: T) -> T
    where
        T::Err: fmt::Display,
    {
        match self.settings.get(key) {
            None => default,
            Some(v) => match v.parse::<T>() {
                Ok(t) => t,
                Err(e) => {
                    self.fail(key, format!("cannot parse `{v}`: {e}"));
                    default
                }
            },
        }
    }

    fn list<T: FromStr>(&mut self, key: &str, default: Vec<T>) -> Vec<T>
    where
        T::Err: fmt::Display,
    {
        match self.settings.get(key) {
            None => default,
            Some(v) => {
                let parsed: Result<Vec<T>, String> = v
                    .split(',')
                    .map(|item| {
                        item.trim()
                            .parse::<T>()
                            .map_err(|e| format!("cannot parse `{item}`: {e}"))
                    })
                    .collect();
                parsed.unwrap_or_else(|e| {
                    self.fail(key, e);
                    default
                })
            }
        }
    }
}

impl ScenarioConfig {
    /// Builds the typed configuration, applying per-scenario defaults. Only
    /// syntax is checked here; see [`validate`] for the physics.
    pub fn from_settings(scenario: Scenario, settings: &Settings) -> Result<Self, Vec<Diagnostic>> {
        let mut r = Reader {
            settings,
            diags: Vec::new(),
        };
        if let Some(s) = settings.get("scenario") {
            if s != scenario.name() {
                r.fail(
                    "scenario",
                    format!(
                        "config is for `{s}` but `{}` was requested",
                        scenario.name()
                    ),
                );
            }
        }
        let hbar = r.parse("hbar", 1.0);
        let mass = r.parse("mass", 1.0);
        let a = r.parse("a", 1.0);
        let omega = r.parse("omega", 1.0);
        let default_model = if scenario == Scenario::Energy {
            "free"
        } else {
            "well"
        };
        let model_name: String = r.parse("model", default_model.to_string());
        let model = match model_name.as_str() {
            "free" => ModelChoice::Free,
            "well" => ModelChoice::Well { a },
            "oscillator" => ModelChoice::Oscillator { omega },
            other => {
                r.fail(
                    "model",
                    format!("unknown model `{other}` (free, well, oscillator)"),
                );
                ModelChoice::Well { a }
            }
        };
        let default_family = match scenario {
            Scenario::Energy => Family::SineBump,
            _ => Family::Rectangular,
        };
        let approximant = r.parse("approximant", default_family);
        let eps = r.parse("eps", 0.1);
        let center = match model {
            ModelChoice::Well { a } => 0.5 * a,
            _ => 0.0,
        };
        let x0 = r.parse("x0", center);
        let default_checkpoints = match (scenario, model) {
            (Scenario::Series, ModelChoice::Well { .. }) => DEFAULT_CHECKPOINTS.to_vec(),
            _ => DEFAULT_CHECKPOINTS[..5].to_vec(),
        };
        let checkpoints = r.list("checkpoints", default_checkpoints);
        let default_eps_list = match scenario {
            Scenario::Sift => vec![0.2, 0.1, 0.05, 0.02, 0.01],
            _ => vec![eps],
        };
        let eps_list = r.list("eps-list", default_eps_list);
        let default_f = match scenario {
            Scenario::Kernel => TestFunction::Sin,
            _ => TestFunction::Cos,
        };
        let f = r.parse("f", default_f);
        let default_n_max = match scenario {
            Scenario::Modes => 50,
            Scenario::Kernel => 1000,
            _ => 20,
        };
        let n_max = r.parse("n-max", default_n_max);
        let x = r.parse("x", center);
        let x_prime = r.parse("x-prime", x);
        let e0 = r.parse("E0", 0.0);
        let extent = r.parse("extent", DEFAULT_EXTENT_OVER_WIDTH * a);
        let samples = r.parse("samples", DEFAULT_SAMPLES);
        let output_dir = PathBuf::from(settings.get("out").unwrap_or("."));
        let threads = settings.get("threads").map(|_| r.parse("threads", 0usize));
        if !r.diags.is_empty() {
            return Err(r.diags);
        }
        Ok(Self {
            scenario,
            model,
            approximant,
            eps,
            x0,
            checkpoints,
            eps_list,
            f,
            n_max,
            x,
            x_prime,
            e0,
            extent,
            samples,
            units: PhysicalUnits { hbar, mass },
            output_dir,
            threads,
        })
    }

    /// Width of the well, or 1 for unbounded models (used to scale `f = sin`).
    pub fn length_scale(&self) -> f64 {
        match self.model {
            ModelChoice::Well { a } => a,
            _ => 1.0,
        }
    }

    fn slit_width(&self) -> f64 {
        self.length_scale()
    }
}

fn positive(diags: &mut Vec<Diagnostic>, key: &str, what: &str, v: f64) -> bool {
    let ok = v > 0.0 && v.is_finite();
    if !ok {
        diags.push(Diagnostic::new(key, format!("{what} must be positive")));
    }
    ok
}

/// Every precondition violation `run` would hit, as one diagnostic per key.
pub fn validate(config: &ScenarioConfig) -> Vec<Diagnostic> {
    let mut d = Vec::new();
    positive(&mut d, "hbar", "hbar", config.units.hbar);
    positive(&mut d, "mass", "mass", config.units.mass);
    if config.threads == Some(0) {
        d.push(Diagnostic::new("threads", "threads must be at least 1"));
    }
    let bounded = match config.model {
        ModelChoice::Free => true,
        ModelChoice::Well { a } => positive(&mut d, "a", "well width", a),
        ModelChoice::Oscillator { omega } => positive(&mut d, "omega", "omega", omega),
    };
    let uses_approximant = matches!(
        config.scenario,
        Scenario::Sift | Scenario::Project | Scenario::Series | Scenario::Energy
    );
    if uses_approximant && bounded {
        let widths: Vec<f64> = match config.scenario {
            Scenario::Sift | Scenario::Energy => config.eps_list.clone(),
            _ => vec![config.eps],
        };
        let key = if matches!(config.scenario, Scenario::Sift | Scenario::Energy)
            && config.eps_list.len() > 1
        {
            "eps-list"
        } else {
            "eps"
        };
        if widths.is_empty() {
            d.push(Diagnostic::new(key, "at least one width required"));
        }
        if !config.x0.is_finite() {
            d.push(Diagnostic::new("x0", "x0 must be finite"));
        }
        for &eps in &widths {
            if !(eps > 0.0 && eps.is_finite()) {
                d.push(Diagnostic::new(key, "eps must be positive"));
                break;
            }
            if let ModelChoice::Well { a } = config.model {
                if !(config.x0 > 0.0 && config.x0 < a) {
                    d.push(Diagnostic::new("x0", "x0 must lie inside the well"));
                    break;
                }
                if config.approximant.has_compact_support() {
                    if eps > a * (1.0 + 1e-12) {
                        d.push(Diagnostic::new(key, "eps exceeds well width"));
                        break;
                    }
                    let slack = 1e-12 * a;
                    if config.x0 - 0.5 * eps < -slack || config.x0 + 0.5 * eps > a + slack {
                        d.push(Diagnostic::new(key, "approximant support leaves the well"));
                        break;
                    }
                }
            }
        }
    }
    match config.scenario {
        Scenario::Series | Scenario::Project => {
            if config.model == ModelChoice::Free {
                d.push(Diagnostic::new(
                    "model",
                    "projection needs a bound model (well or oscillator)",
                ));
            }
        }
        Scenario::Energy => {
            if config.approximant == Family::Rectangular {
                d.push(Diagnostic::new(
                    "approximant",
                    "rect has no finite kinetic energy",
                ));
            }
        }
        Scenario::Kernel => {
            if config.model == ModelChoice::Free {
                d.push(Diagnostic::new(
                    "model",
                    "kernel needs a bound model (well or oscillator)",
                ));
            }
            if let ModelChoice::Well { a } = config.model {
                for (key, v) in [("x", config.x), ("x-prime", config.x_prime)] {
                    if !(v >= 0.0 && v <= a) {
                        d.push(Diagnostic::new(key, format!("{key} must lie in [0, a]")));
                    }
                }
            }
        }
        _ => {}
    }
    if matches!(config.scenario, Scenario::Series | Scenario::Kernel) {
        let c = &config.checkpoints;
        if c.is_empty() || c[0] == 0 || c.windows(2).any(|w| w[1] <= w[0]) {
            d.push(Diagnostic::new(
                "checkpoints",
                "checkpoints must be positive and strictly increasing",
            ));
        } else if config.scenario == Scenario::Series
            && (c.len() < 4 || c[c.len() - 1] < 100 * c[0])
        {
            d.push(Diagnostic::new(
                "checkpoints",
                "at least four checkpoints spanning two decades are required",
            ));
        }
    }
    match config.scenario {
        Scenario::Project | Scenario::Kernel if config.n_max == 0 => {
            d.push(Diagnostic::new("n-max", "n-max must be at least 1"));
        }
        Scenario::Modes if config.n_max < 2 => {
            d.push(Diagnostic::new("n-max", "n-max must be at least 2"));
        }
        _ => {}
    }
    if matches!(config.scenario, Scenario::Slit | Scenario::Modes) {
        if let ModelChoice::Oscillator { .. } | ModelChoice::Free = config.model {
            d.push(Diagnostic::new(
                "model",
                "the slit is modelled as a well of width a",
            ));
        }
    }
    if config.scenario == Scenario::Slit && config.length_scale() > 0.0 {
        let a = config.slit_width();
        if !(config.e0 >= 0.0 && config.e0.is_finite()) {
            d.push(Diagnostic::new("E0", "E0 must be non-negative"));
        }
        if !(config.extent >= MIN_EXTENT_OVER_WIDTH * a) {
            d.push(Diagnostic::new(
                "extent",
                format!("extent must be at least {MIN_EXTENT_OVER_WIDTH}·a"),
            ));
        }
        if config.samples < MIN_SAMPLES || !config.samples.is_power_of_two() {
            d.push(Diagnostic::new(
                "samples",
                format!("samples must be a power of two no smaller than {MIN_SAMPLES}"),
            ));
        }
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(scenario: Scenario, pairs: &[(&str, &str)]) -> ScenarioConfig {
        let mut s = Settings::default();
        for (k, v) in pairs {
            s.set(k, *v);
        }
        ScenarioConfig::from_settings(scenario, &s).unwrap()
    }

    #[test]
    fn defaults_validate_cleanly() {
        for sc in Scenario::ALL {
            let c = config(sc, &[]);
            assert!(validate(&c).is_empty(), "{sc:?}: {:?}", validate(&c));
        }
    }

    #[test]
    fn wide_rect_is_diagnosed() {
        let c = config(Scenario::Series, &[("eps", "1.5")]);
        let d = validate(&c);
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].key, "eps");
        assert_eq!(d[0].message, "eps exceeds well width");
    }

    #[test]
    fn negative_mass_is_diagnosed() {
        let c = config(Scenario::Energy, &[("mass", "-1")]);
        let d = validate(&c);
        assert_eq!(d[0].key, "mass");
        assert_eq!(d[0].message, "mass must be positive");
    }

    #[test]
    fn unknown_key_reports_line() {
        let err = Settings::parse("a = 1\n# comment\nwidth = 3\n").unwrap_err();
        assert_eq!(err.len(), 1);
        assert_eq!(err[0].line, Some(3));
        assert_eq!(err[0].key, "width");
    }

    #[test]
    fn bad_number_reports_line() {
        let s = Settings::parse("eps = 0.1\nhbar = one\n").unwrap();
        let err = ScenarioConfig::from_settings(Scenario::Energy, &s).unwrap_err();
        assert_eq!(err[0].key, "hbar");
        assert_eq!(err[0].line, Some(2));
    }

    #[test]
    fn flags_override_file() {
        let mut s = Settings::parse("eps = 0.2\n").unwrap();
        s.set("eps", "0.05");
        let c = ScenarioConfig::from_settings(Scenario::Series, &s).unwrap();
        assert_eq!(c.eps, 0.05);
    }

    #[test]
    fn scenario_mismatch_is_an_error() {
        let s = Settings::parse("scenario = slit\n").unwrap();
        assert!(ScenarioConfig::from_settings(Scenario::Series, &s).is_err());
    }
}
