//! Expansion of an approximant state in a model eigenbasis: overlap
//! coefficients `c_n = ⟨φ_n|χ⟩`, probabilities `P(E_n) = c_n²`, and the
//! normalization and energy partial sums `Σ P(E_n)` and `Σ P(E_n)·E_n`.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::approximants::{Approximant, Domain, Family};
use crate::error::{Error, Result};
use crate::numerics::{
    compensated_prefix_sums, fit_loglog_slope, integrate, integrate_vec, interior_breakpoints,
    QuadratureSpec, SlopeFit,
};
use crate::spectra::{ModelKind, ModelSpectrum, PhysicalUnits, StateSequence};

/// Checkpoints 10², 10^2.5, …, 10⁵ rounded to the nearest integer.
pub const DEFAULT_CHECKPOINTS: [usize; 7] = [100, 316, 1000, 3162, 10_000, 31_623, 100_000];

/// Log-log slope at or above which a growing series is called divergent.
pub const DIVERGENCE_SLOPE: f64 = 0.5;
pub const DIVERGENCE_MIN_R_SQUARED: f64 = 0.99;
/// Relative change between the last two checkpoints below which a series
/// is called convergent.
pub const CONVERGENCE_REL_CHANGE: f64 = 1e-6;

/// `sin(t)/t`
fn sinc(t: f64) -> f64 {
    if t.abs() < 1e-4 {
        1.0 - t * t / 6.0
    } else {
        t.sin() / t
    }
}

/// `P(E_n)` for a rectangular state of width ε centred in a well of width
/// `a`: `(8a/ε)·sin²(nπε/2a)/(nπ)²` for odd n and 0 for even n.
pub fn overlap_closed_form_rect_well(n: u64, eps: f64, a: f64) -> Result<f64> {
    if !(a > 0.0) {
        return Err(Error::param("a", "well width must be positive"));
    }
    if !(eps > 0.0) {
        return Err(Error::InvalidWidth {
            width: eps,
            reason: "width must be positive",
        });
    }
    if eps > a {
        return Err(Error::InvalidWidth {
            width: eps,
            reason: "width exceeds the well",
        });
    }
    if n == 0 {
        return Err(Error::IndexOutOfRange { index: 0, first: 1 });
    }
    if n.is_multiple_of(2) {
        return Ok(0.0);
    }
    let npi = n as f64 * PI;
    Ok(8.0 * a / eps * (npi * eps / (2.0 * a)).sin().powi(2) / (npi * npi))
}

/// Closed-form `c_n` for approximants in the well, where one exists:
/// rectangular and sine bump at any admissible center, and the Gaussian
/// when its truncation at the walls changes `c_n` by less than 1e-17.
fn well_closed_form(width: f64, approx: &Approximant, n: u64) -> Option<f64> {
    let k = n as f64 * PI / width;
    let eps = approx.width();
    let x0 = approx.center();
    let basis = (2.0 / width).sqrt();
    match approx.family() {
        Family::Rectangular => Some(basis * eps.sqrt() * (k * x0).sin() * sinc(0.5 * k * eps)),
        Family::SineBump => {
            // ∫ sin(kx)·sin(π(x−x₀+ε/2)/ε) dx = ε·π/2·sin(kx₀)·sinc(t−π/2)/(t+π/2), t = kε/2
            let t = 0.5 * k * eps;
            let shape = sinc(t - 0.5 * PI) / (t + 0.5 * PI);
            Some(basis * (2.0 / eps).sqrt() * 0.5 * eps * PI * (k * x0).sin() * shape)
        }
        Family::Gaussian => {
            let amp = approx.peak_density().sqrt();
            let d_lo = x0;
            let d_hi = width - x0;
            let s = std::f64::consts::SQRT_2 * eps;
            let tails = libm::erfc(d_lo / s) + libm::erfc(d_hi / s);
            let bound = basis * amp * eps * (0.5 * PI).sqrt() * tails;
            if bound > 1e-17 {
                return None;
            }
            let ke = k * eps;
            Some(basis * amp * (2.0 * PI).sqrt() * eps * (-0.5 * ke * ke).exp() * (k * x0).sin())
        }
    }
}

fn check_admissible(model: &ModelSpectrum, approx: &Approximant) -> Result<()> {
    if let Some((lo, hi)) = model.domain() {
        let (slo, shi) = approx.support();
        let slack = 1e-12 * (hi - lo);
        let truncated_to_domain = approx
            .domain()
            .is_some_and(|d| (d.lo - lo).abs() <= slack && (d.hi - hi).abs() <= slack);
        let inside = slo >= lo - slack && shi <= hi + slack;
        if !inside || (approx.family() == Family::Gaussian && !truncated_to_domain) {
            return Err(Error::Inadmissible {
                lo: slo,
                hi: shi,
                domain_lo: lo,
                domain_hi: hi,
            });
        }
    }
    Ok(())
}

/// Builds an approximant in the host domain of `model` (truncating a
/// Gaussian to the well).
pub fn approximant_in(
    model: &ModelSpectrum,
    family: Family,
    center: f64,
    width: f64,
) -> Result<Approximant> {
    let domain = model.domain().map(Domain::from);
    Approximant::new(family, center, width, domain)
}

fn overlap_window(model: &ModelSpectrum, approx: &Approximant, n_max: u64) -> (f64, f64, Vec<f64>) {
    let (slo, shi) = approx.support();
    let (wlo, whi) = model.quadrature_window(n_max);
    let lo = slo.max(wlo);
    let hi = shi.min(whi);
    let breaks = interior_breakpoints(lo, hi, &approx.kinks());
    (lo, hi, breaks)
}

/// `c_n` by adaptive quadrature over the approximant's support, with its
/// edges as breakpoints.
pub fn overlap_quadrature(model: &ModelSpectrum, approx: &Approximant, n: u64) -> Result<f64> {
    check_admissible(model, approx)?;
    model.energy(n)?;
    let (lo, hi, breaks) = overlap_window(model, approx, n);
    let spec = QuadratureSpec::default().with_breakpoints(breaks);
    integrate(
        |x| model.eigenfunction(n, x).unwrap_or(0.0) * approx.evaluate(x),
        lo,
        hi,
        &spec,
    )
}

/// Where the overlap coefficients of a table or series came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OverlapSource {
    ClosedForm,
    Quadrature,
}

/// `c_n` for the first `count` states of `seq`.
pub fn overlap_coefficients(
    model: &ModelSpectrum,
    approx: &Approximant,
    seq: StateSequence,
    count: usize,
) -> Result<(Vec<f64>, OverlapSource)> {
    check_admissible(model, approx)?;
    if count == 0 {
        return Ok((Vec::new(), OverlapSource::ClosedForm));
    }
    if let ModelKind::InfiniteWell { width } = model.kind {
        if well_closed_form(width, approx, seq.index(0)).is_some() {
            let c = (0..count)
                .into_par_iter()
                .map(|k| {
                    well_closed_form(width, approx, seq.index(k)).expect("family has a closed form")
                })
                .collect();
            return Ok((c, OverlapSource::ClosedForm));
        }
    }
    let (lo, hi, breaks) = overlap_window(model, approx, seq.last_index(count));
    let spec = QuadratureSpec::default().with_breakpoints(breaks);
    let c = integrate_vec(
        |x, out| {
            let chi = approx.evaluate(x);
            if chi == 0.0 {
                out.fill(0.0);
                return;
            }
            model.eigenfunctions_into(seq, x, out);
            for v in out.iter_mut() {
                *v *= chi;
            }
        },
        count,
        lo,
        hi,
        &spec,
    )?;
    Ok((c, OverlapSource::Quadrature))
}

/// True when the approximant sits at the reflection center of the model, so
/// that every odd eigenstate has exactly zero overlap.
pub fn is_parity_symmetric(model: &ModelSpectrum, approx: &Approximant) -> bool {
    (approx.center() - model.symmetry_center()).abs() <= 1e-12 * model.length_scale()
}

/// States a series has to run over: only the even ones for a centred
/// approximant, every state otherwise.
pub fn series_states(model: &ModelSpectrum, approx: &Approximant) -> StateSequence {
    if is_parity_symmetric(model, approx) {
        model.even_states()
    } else {
        model.all_states()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OverlapEntry {
    pub n: u64,
    pub coefficient: f64,
    pub probability: f64,
    pub energy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OverlapTable {
    pub model: ModelSpectrum,
    pub approximant: Approximant,
    pub entries: Vec<OverlapEntry>,
    pub n_max: usize,
    pub source: OverlapSource,
}

impl OverlapTable {
    pub fn probability_sum(&self) -> f64 {
        crate::numerics::compensated_sum(
            &self
                .entries
                .iter()
                .map(|e| e.probability)
                .collect::<Vec<_>>(),
        )
    }
}

/// Overlaps with the lowest `n_max` eigenstates (all parities).
pub fn overlap_table(
    model: &ModelSpectrum,
    approx: &Approximant,
    n_max: usize,
) -> Result<OverlapTable> {
    let seq = model.all_states();
    let (coefficients, source) = overlap_coefficients(model, approx, seq, n_max)?;
    let entries = coefficients
        .iter()
        .enumerate()
        .map(|(k, &c)| {
            let n = seq.index(k);
            Ok(OverlapEntry {
                n,
                coefficient: c,
                probability: c * c,
                energy: model.energy(n)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(OverlapTable {
        model: *model,
        approximant: *approx,
        entries,
        n_max,
        source,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "verdict")]
pub enum Verdict {
    Convergent { limit: f64 },
    Divergent { slope: f64, r_squared: f64 },
    Undetermined,
}

impl Verdict {
    pub fn label(&self) -> &'static str {
        match self {
            Verdict::Convergent { .. } => "Convergent",
            Verdict::Divergent { .. } => "Divergent",
            Verdict::Undetermined => "Undetermined",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PartialSumSeries {
    /// Number of states summed at each checkpoint, counted along `states`.
    pub checkpoints: Vec<usize>,
    pub states: StateSequence,
    pub normalization_sums: Vec<f64>,
    pub energy_sums: Vec<f64>,
    pub verdict: Verdict,
    pub fit: SlopeFit,
    pub source: OverlapSource,
}

/// Divergent if `energy_sums` grows with log-log slope ≥ 0.5 at r² ≥ 0.99;
/// convergent if the last two checkpoints differ by less than 1e-6
/// relative; undetermined otherwise.
pub fn classify_series(checkpoints: &[usize], energy_sums: &[f64]) -> Result<(Verdict, SlopeFit)> {
    if checkpoints.len() != energy_sums.len() {
        return Err(Error::param(
            "energy_sums",
            "one sum per checkpoint required",
        ));
    }
    if checkpoints.len() < 4
        || checkpoints[0] == 0
        || checkpoints[checkpoints.len() - 1] < 100 * checkpoints[0]
    {
        return Err(Error::InsufficientCheckpoints);
    }
    let xs: Vec<f64> = checkpoints.iter().map(|&n| n as f64).collect();
    let fit = fit_loglog_slope(&xs, energy_sums)?;
    let verdict = if fit.slope >= DIVERGENCE_SLOPE && fit.r_squared >= DIVERGENCE_MIN_R_SQUARED {
        Verdict::Divergent {
            slope: fit.slope,
            r_squared: fit.r_squared,
        }
    } else {
        let last = energy_sums[energy_sums.len() - 1];
        let prev = energy_sums[energy_sums.len() - 2];
        if (last - prev).abs() < CONVERGENCE_REL_CHANGE * last.abs() {
            Verdict::Convergent { limit: last }
        } else {
            Verdict::Undetermined
        }
    };
    Ok((verdict, fit))
}

/// Compensated partial sums of `P(E_n)` and `P(E_n)·E_n` at each checkpoint.
pub fn build_series(
    model: &ModelSpectrum,
    approx: &Approximant,
    checkpoints: &[usize],
) -> Result<PartialSumSeries> {
    if checkpoints.is_empty() || checkpoints[0] == 0 || checkpoints.windows(2).any(|w| w[1] <= w[0])
    {
        return Err(Error::param(
            "checkpoints",
            "must be positive and strictly increasing",
        ));
    }
    let states = series_states(model, approx);
    let count = *checkpoints.last().unwrap();
    let (coefficients, source) = overlap_coefficients(model, approx, states, count)?;
    let probabilities: Vec<f64> = coefficients.iter().map(|c| c * c).collect();
    let energy_terms = probabilities
        .par_iter()
        .enumerate()
        .map(|(k, p)| Ok(p * model.energy(states.index(k))?))
        .collect::<Result<Vec<f64>>>()?;
    let norm_prefix = compensated_prefix_sums(&probabilities);
    let energy_prefix = compensated_prefix_sums(&energy_terms);
    let normalization_sums: Vec<f64> = checkpoints.iter().map(|&n| norm_prefix[n - 1]).collect();
    let energy_sums: Vec<f64> = checkpoints.iter().map(|&n| energy_prefix[n - 1]).collect();
    let (verdict, fit) = classify_series(checkpoints, &energy_sums)?;
    Ok(PartialSumSeries {
        checkpoints: checkpoints.to_vec(),
        states,
        normalization_sums,
        energy_sums,
        verdict,
        fit,
        source,
    })
}

/// Hamiltonian whose expectation value [`direct_energy_expectation`] takes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Host {
    /// V = 0 on the whole line.
    Free(PhysicalUnits),
    Bound(ModelSpectrum),
}

impl Host {
    pub fn units(&self) -> PhysicalUnits {
        match self {
            Host::Free(u) => *u,
            Host::Bound(m) => m.units,
        }
    }
}

/// `⟨χ|H|χ⟩ = (ħ²/2m)∫|χ′|² dx + ∫V|χ|² dx` with the analytic derivative of
/// the family. Inside the well V = 0; the walls enter only through the
/// domain.
pub fn direct_energy_expectation(host: &Host, approx: &Approximant) -> Result<f64> {
    if approx.family() == Family::Rectangular {
        return Err(Error::UnsupportedFamily(Family::Rectangular));
    }
    if let Host::Bound(model) = host {
        check_admissible(model, approx)?;
    }
    let PhysicalUnits { hbar, mass } = host.units();
    let (lo, hi) = approx.support();
    let spec = QuadratureSpec::default()
        .with_tolerances(1e-13, 1e-300)
        .with_breakpoints(interior_breakpoints(lo, hi, &approx.kinks()));
    let gradient = integrate(
        |x| approx.derivative(x).unwrap_or(0.0).powi(2),
        lo,
        hi,
        &spec,
    )?;
    let kinetic = hbar * hbar / (2.0 * mass) * gradient;
    let potential = match host {
        Host::Bound(ModelSpectrum {
            kind: ModelKind::Oscillator { omega },
            ..
        }) => {
            0.5 * mass
                * omega
                * omega
                * integrate(|x| x * x * approx.evaluate(x).powi(2), lo, hi, &spec)?
        }
        _ => 0.0,
    };
    Ok(kinetic + potential)
}

/// Kinetic energy of the whole-line state: `(πħ)²/(2mε²)` for the sine bump
/// and `ħ²/(4mε²)` for the Gaussian.
pub fn free_energy_closed_form(family: Family, eps: f64, units: &PhysicalUnits) -> Result<f64> {
    let PhysicalUnits { hbar, mass } = *units;
    match family {
        Family::Rectangular => Err(Error::UnsupportedFamily(Family::Rectangular)),
        Family::SineBump => Ok((PI * hbar).powi(2) / (2.0 * mass * eps * eps)),
        Family::Gaussian => Ok(hbar * hbar / (4.0 * mass * eps * eps)),
    }
}
