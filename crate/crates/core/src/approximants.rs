//! Normalized position-measurement states of width ε centred at x₀:
//!
//! * rectangular: `1/√ε` on `[x₀ − ε/2, x₀ + ε/2]`
//! * sine bump:   `√(2/ε)·sin(π(x − x₀ + ε/2)/ε)` on the same support
//! * Gaussian:    `(1/(√π ε))^{1/2}·exp(−(x − x₀)²/(2ε²))`
//!
//! On a compact host domain the Gaussian is truncated to the domain and
//! renormalized. The compact families must fit inside the domain.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::{
    dft_momentum, integrate, interior_breakpoints, MomentumDistribution, NeumaierSum,
    QuadratureSpec,
};

/// Half-width of the Gaussian integration window in units of ε. The
/// density there is e^{-144}.
pub const GAUSSIAN_WINDOW: f64 = 12.0;

/// Largest momentum grid [`momentum_distribution`] will allocate.
pub const MAX_MOMENTUM_SAMPLES: usize = 1 << 22;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Family {
    #[serde(rename = "rect")]
    Rectangular,
    #[serde(rename = "sine")]
    SineBump,
    #[serde(rename = "gaussian")]
    Gaussian,
}

impl Family {
    pub const ALL: [Family; 3] = [Family::Rectangular, Family::SineBump, Family::Gaussian];

    pub fn has_compact_support(self) -> bool {
        !matches!(self, Family::Gaussian)
    }

    /// Short name used in configs and reports.
    pub fn key(self) -> &'static str {
        match self {
            Family::Rectangular => "rect",
            Family::SineBump => "sine",
            Family::Gaussian => "gaussian",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "rect" | "rectangular" => Ok(Family::Rectangular),
            "sine" | "sinebump" | "sine-bump" | "sine_bump" => Ok(Family::SineBump),
            "gaussian" | "gauss" => Ok(Family::Gaussian),
            other => Err(Error::param(
                "approximant",
                format!("unknown family `{other}` (expected rect, sine or gaussian)"),
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Domain {
    pub lo: f64,
    pub hi: f64,
}

impl Domain {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo < hi) {
            return Err(Error::InvalidInterval { lo, hi });
        }
        Ok(Self { lo, hi })
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo && x <= self.hi
    }
}

impl From<(f64, f64)> for Domain {
    fn from((lo, hi): (f64, f64)) -> Self {
        Self { lo, hi }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Approximant {
    family: Family,
    center: f64,
    width: f64,
    domain: Option<Domain>,
    amplitude: f64,
}

impl Approximant {
    pub fn new(family: Family, center: f64, width: f64, domain: Option<Domain>) -> Result<Self> {
        if !(width > 0.0 && width.is_finite()) {
            return Err(Error::InvalidWidth {
                width,
                reason: "width must be positive",
            });
        }
        if !center.is_finite() {
            return Err(Error::param("x0", "center must be finite"));
        }
        let amplitude = match family {
            Family::Rectangular => 1.0 / width.sqrt(),
            Family::SineBump => (2.0 / width).sqrt(),
            Family::Gaussian => {
                let whole_line = 1.0 / (PI.sqrt() * width);
                let kept = match domain {
                    Some(d) => {
                        let s = 0.5
                            * (libm::erf((d.hi - center) / width)
                                - libm::erf((d.lo - center) / width));
                        if !(s > 0.0) {
                            return Err(Error::param(
                                "x0",
                                "Gaussian has no weight inside the domain",
                            ));
                        }
                        s
                    }
                    None => 1.0,
                };
                (whole_line / kept).sqrt()
            }
        };
        if let Some(d) = domain {
            if family.has_compact_support() {
                let (lo, hi) = (center - 0.5 * width, center + 0.5 * width);
                let slack = 1e-12 * (d.hi - d.lo);
                if lo < d.lo - slack || hi > d.hi + slack {
                    return Err(Error::Inadmissible {
                        lo,
                        hi,
                        domain_lo: d.lo,
                        domain_hi: d.hi,
                    });
                }
            } else if !d.contains(center) {
                return Err(Error::param(
                    "x0",
                    "Gaussian center lies outside the domain",
                ));
            }
        }
        Ok(Self {
            family,
            center,
            width,
            domain,
            amplitude,
        })
    }

    pub fn rectangular(center: f64, width: f64) -> Result<Self> {
        Self::new(Family::Rectangular, center, width, None)
    }

    pub fn sine_bump(center: f64, width: f64) -> Result<Self> {
        Self::new(Family::SineBump, center, width, None)
    }

    pub fn gaussian(center: f64, width: f64) -> Result<Self> {
        Self::new(Family::Gaussian, center, width, None)
    }

    /// Same family, center and domain with a different width.
    pub fn with_width(&self, width: f64) -> Result<Self> {
        Self::new(self.family, self.center, width, self.domain)
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn center(&self) -> f64 {
        self.center
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn domain(&self) -> Option<Domain> {
        self.domain
    }

    /// `max |χ|²`
    pub fn peak_density(&self) -> f64 {
        self.amplitude * self.amplitude
    }

    /// Interval outside which χ vanishes (or, for the Gaussian, is below
    /// e^{-72}).
    pub fn support(&self) -> (f64, f64) {
        let half = match self.family {
            Family::Gaussian => GAUSSIAN_WINDOW * self.width,
            _ => 0.5 * self.width,
        };
        let (mut lo, mut hi) = (self.center - half, self.center + half);
        if let Some(d) = self.domain {
            lo = lo.max(d.lo);
            hi = hi.min(d.hi);
        }
        (lo, hi)
    }

    /// Points where χ or χ′ is discontinuous.
    pub fn kinks(&self) -> Vec<f64> {
        let mut pts = Vec::new();
        if self.family.has_compact_support() {
            pts.push(self.center - 0.5 * self.width);
            pts.push(self.center + 0.5 * self.width);
        }
        if let Some(d) = self.domain {
            pts.push(d.lo);
            pts.push(d.hi);
        }
        pts
    }

    fn outside_domain(&self, x: f64) -> bool {
        self.domain.is_some_and(|d| !d.contains(x))
    }

    pub fn evaluate(&self, x: f64) -> f64 {
        if self.outside_domain(x) {
            return 0.0;
        }
        let u = x - self.center;
        match self.family {
            Family::Rectangular => {
                if u.abs() <= 0.5 * self.width {
                    self.amplitude
                } else {
                    0.0
                }
            }
            Family::SineBump => {
                if u.abs() <= 0.5 * self.width {
                    self.amplitude * (PI * (u + 0.5 * self.width) / self.width).sin()
                } else {
                    0.0
                }
            }
            Family::Gaussian => {
                let s = u / self.width;
                self.amplitude * (-0.5 * s * s).exp()
            }
        }
    }

    /// dχ/dx away from the kinks. The rectangular family has no
    /// square-integrable derivative.
    pub fn derivative(&self, x: f64) -> Result<f64> {
        if self.outside_domain(x) {
            return Ok(0.0);
        }
        let u = x - self.center;
        match self.family {
            Family::Rectangular => Err(Error::UnsupportedFamily(Family::Rectangular)),
            Family::SineBump => {
                if u.abs() < 0.5 * self.width {
                    let k = PI / self.width;
                    Ok(self.amplitude * k * (k * (u + 0.5 * self.width)).cos())
                } else {
                    Ok(0.0)
                }
            }
            Family::Gaussian => Ok(-u / (self.width * self.width) * self.evaluate(x)),
        }
    }

    /// `∫ |χ|² g dx` over the support, with the kinks as breakpoints.
    pub fn integrate_density<G: Fn(f64) -> f64>(&self, g: G, spec: &QuadratureSpec) -> Result<f64> {
        let (lo, hi) = self.support();
        let spec = spec
            .clone()
            .with_breakpoints(interior_breakpoints(lo, hi, &self.kinks()));
        integrate(|x| self.evaluate(x).powi(2) * g(x), lo, hi, &spec)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SiftingReport {
    pub epsilon_values: Vec<f64>,
    pub integrals: Vec<f64>,
    pub target: f64,
    pub deviations: Vec<f64>,
}

/// `∫ |χ_ε|² f dx` for each ε, compared with `f(x₀)`.
pub fn sifting_check<F: Fn(f64) -> f64>(
    approx: &Approximant,
    f: F,
    epsilon_values: &[f64],
) -> Result<SiftingReport> {
    let spec = QuadratureSpec::default().with_tolerances(1e-13, 1e-15);
    let target = f(approx.center());
    let integrals = epsilon_values
        .iter()
        .map(|&eps| approx.with_width(eps)?.integrate_density(&f, &spec))
        .collect::<Result<Vec<_>>>()?;
    let deviations = integrals.iter().map(|i| (i - target).abs()).collect();
    Ok(SiftingReport {
        epsilon_values: epsilon_values.to_vec(),
        integrals,
        target,
        deviations,
    })
}

/// Samples χ on a cell-centred grid four times as wide as its support and
/// fine enough that `p_max` sits at a quarter of the Nyquist momentum. The
/// support edges fall on cell boundaries.
pub fn momentum_distribution(
    approx: &Approximant,
    hbar: f64,
    p_max: f64,
) -> Result<MomentumDistribution> {
    if !(p_max > 0.0) || !(hbar > 0.0) {
        return Err(Error::param(
            "cutoffs",
            "momentum cutoff and hbar must be positive",
        ));
    }
    let (lo, hi) = approx.support();
    let w = hi - lo;
    let extent = 4.0 * w;
    let needed = (extent * 4.0 * p_max / (PI * hbar)).ceil().max(256.0);
    if needed > MAX_MOMENTUM_SAMPLES as f64 {
        return Err(Error::GridTooCoarse(format!(
            "cutoff {p_max} needs {needed} samples (limit {MAX_MOMENTUM_SAMPLES})"
        )));
    }
    let n = (needed as usize).next_power_of_two();
    let dx = extent / n as f64;
    let start = lo - 1.5 * w;
    let samples: Vec<Complex64> = (0..n)
        .map(|j| Complex64::new(approx.evaluate(start + (j as f64 + 0.5) * dx), 0.0))
        .collect();
    dft_momentum(&samples, start + 0.5 * dx, dx, hbar)
}

/// `G(P) = ∫_{−P}^{P} p² |χ̃(p)|² dp` for each cutoff, from DFT samples.
pub fn momentum_second_moment_cumulative(
    approx: &Approximant,
    cutoffs: &[f64],
    hbar: f64,
) -> Result<Vec<f64>> {
    if cutoffs.is_empty() {
        return Ok(Vec::new());
    }
    if cutoffs.iter().any(|&p| !(p > 0.0)) || cutoffs.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::param("cutoffs", "must be positive and increasing"));
    }
    let dist = momentum_distribution(approx, hbar, *cutoffs.last().unwrap())?;
    let zero = dist.zero_index();
    let mut acc = NeumaierSum::new();
    acc.add(0.0);
    let mut out = Vec::with_capacity(cutoffs.len());
    let mut k = 1usize;
    for &cut in cutoffs {
        while zero + k < dist.len() && dist.momenta[zero + k] <= cut {
            let p = dist.momenta[zero + k];
            acc.add(p * p * dist.density[zero + k] * dist.dp);
            let q = dist.momenta[zero - k];
            acc.add(q * q * dist.density[zero - k] * dist.dp);
            k += 1;
        }
        out.push(acc.value());
    }
    Ok(out)
}
