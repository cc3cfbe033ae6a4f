//! A single slit of width `a` treated as a position measurement. The
//! Fraunhofer pattern on the screen is the momentum density of the uniform
//! aperture state; its first dark band fixes δp, and δp·a ≈ h.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::dft_momentum;
use crate::spectra::{ModelSpectrum, PhysicalUnits};

pub const MIN_EXTENT_OVER_WIDTH: f64 = 20.0;
pub const MIN_SAMPLES: usize = 1024;
pub const DEFAULT_EXTENT_OVER_WIDTH: f64 = 32.0;
pub const DEFAULT_SAMPLES: usize = 1 << 14;
/// A dark band is a local minimum of the density below this fraction of
/// the central peak, or one where the amplitude changes sign between samples.
pub const DARK_BAND_LEVEL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SlitSetup {
    pub width: f64,
    pub incident_energy: f64,
    pub units: PhysicalUnits,
    pub extent: f64,
    pub samples: usize,
}

impl SlitSetup {
    /// Slit with the default grid: 32·a wide, 2¹⁴ samples.
    pub fn new(width: f64, incident_energy: f64, units: PhysicalUnits) -> Result<Self> {
        Self::with_grid(
            width,
            incident_energy,
            units,
            DEFAULT_EXTENT_OVER_WIDTH * width,
            DEFAULT_SAMPLES,
        )
    }

    pub fn with_grid(
        width: f64,
        incident_energy: f64,
        units: PhysicalUnits,
        extent: f64,
        samples: usize,
    ) -> Result<Self> {
        let setup = Self {
            width,
            incident_energy,
            units,
            extent,
            samples,
        };
        setup.validate()?;
        Ok(setup)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.width > 0.0 && self.width.is_finite()) {
            return Err(Error::param("a", "slit width must be positive"));
        }
        if !(self.incident_energy >= 0.0 && self.incident_energy.is_finite()) {
            return Err(Error::param("E0", "incident energy must be non-negative"));
        }
        PhysicalUnits::new(self.units.hbar, self.units.mass)?;
        if !(self.extent >= MIN_EXTENT_OVER_WIDTH * self.width) || !self.extent.is_finite() {
            return Err(Error::param(
                "extent",
                format!("must be at least {MIN_EXTENT_OVER_WIDTH}·a"),
            ));
        }
        if self.samples < MIN_SAMPLES || !self.samples.is_power_of_two() {
            return Err(Error::param(
                "samples",
                format!("must be a power of two no smaller than {MIN_SAMPLES}"),
            ));
        }
        Ok(())
    }

    /// `h²/(2ma²)`: the lowest transverse energy a state confined to the
    /// slit can carry.
    pub fn threshold(&self) -> f64 {
        energy_threshold(self.width, &self.units)
    }
}

/// `h²/(2ma²)`
pub fn energy_threshold(width: f64, units: &PhysicalUnits) -> f64 {
    let h = units.planck_h();
    h * h / (2.0 * units.mass * width * width)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiffractionProfile {
    pub momentum_grid: Vec<f64>,
    pub density: Vec<f64>,
    pub first_dark_band: f64,
    pub delta_p: f64,
    pub product_delta_p_times_a: f64,
    /// `δp·a/h`
    pub product_over_h: f64,
    /// Probability inside `|p| < first_dark_band`.
    pub central_lobe_fraction: f64,
    /// `|Σ density·dp − 1|`
    pub parseval_error: f64,
}

/// Root closest to 0 of the parabola through `(-1, a)`, `(0, b)`, `(1, c)`,
/// clamped to `[-1, 1]`.
fn quadratic_root_near_zero(a: f64, b: f64, c: f64) -> f64 {
    if b == 0.0 {
        return 0.0;
    }
    let q = 0.5 * (a + c) - b;
    let l = 0.5 * (c - a);
    let root = if q.abs() < 1e-12 * (l.abs() + b.abs()) {
        -b / l
    } else {
        let disc = (l * l - 4.0 * q * b).max(0.0).sqrt();
        // numerically stable pair of roots
        let t = -0.5 * (l + l.signum() * disc);
        let (r1, r2) = (t / q, b / t);
        if r1.abs() < r2.abs() {
            r1
        } else {
            r2
        }
    };
    if root.is_finite() {
        root.clamp(-1.0, 1.0)
    } else {
        0.0
    }
}

/// Momentum density of the uniform aperture state and its first dark band.
pub fn diffract(setup: &SlitSetup) -> Result<DiffractionProfile> {
    setup.validate()?;
    let n = setup.samples;
    let dx = setup.extent / n as f64;
    let start = -0.5 * setup.extent;
    let half = 0.5 * setup.width;
    // cell-averaged transmission so that slit edges need not fall on the grid
    let mut samples: Vec<Complex64> = (0..n)
        .map(|j| {
            let lo = start + j as f64 * dx;
            let covered = ((lo + dx).min(half) - lo.max(-half)).max(0.0);
            Complex64::new(covered / dx, 0.0)
        })
        .collect();
    let norm = (samples.iter().map(|s| s.norm_sqr()).sum::<f64>() * dx).sqrt();
    for s in &mut samples {
        *s /= norm;
    }
    let dist = dft_momentum(&samples, start + 0.5 * dx, dx, setup.units.hbar)?;
    let zero = dist.zero_index();
    let rho = &dist.density;
    let peak = rho[zero];
    // the amplitude, phase-aligned with the central peak, crosses zero
    // linearly at a dark band
    let phase = dist.amplitudes[zero].conj() / dist.amplitudes[zero].norm();
    let s = |k: usize| (dist.amplitudes[k] * phase).re;
    let crosses = |k: usize| s(k - 1) * s(k) <= 0.0 || s(k) * s(k + 1) <= 0.0;
    let dark = (zero + 1..rho.len() - 1)
        .find(|&k| {
            rho[k] < rho[k - 1]
                && rho[k] < rho[k + 1]
                && (rho[k] < DARK_BAND_LEVEL * peak || crosses(k))
        })
        .ok_or(Error::NoDarkBandFound)?;
    let shift = quadratic_root_near_zero(s(dark - 1), s(dark), s(dark + 1));
    let first_dark_band = dist.momenta[dark] + shift * dist.dp;

    let lobe = dark - zero;
    let central: f64 = rho[zero - lobe + 1..zero + lobe].iter().sum::<f64>()
        + 0.5 * (rho[zero - lobe] + rho[zero + lobe]);
    let product = first_dark_band * setup.width;
    Ok(DiffractionProfile {
        parseval_error: (dist.momentum_norm - 1.0).abs(),
        central_lobe_fraction: central * dist.dp,
        product_over_h: product / setup.units.planck_h(),
        product_delta_p_times_a: product,
        delta_p: first_dark_band,
        first_dark_band,
        momentum_grid: dist.momenta,
        density: dist.density,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum EnergyClass {
    /// The slit cannot hold a transverse state: not a position measurement.
    BelowThreshold,
    AboveThreshold,
}

/// `BelowThreshold` iff `E0 < h²/(2ma²)`; equality counts as above.
pub fn classify_incident_energy(setup: &SlitSetup) -> EnergyClass {
    if setup.incident_energy < setup.threshold() {
        EnergyClass::BelowThreshold
    } else {
        EnergyClass::AboveThreshold
    }
}

/// Δx·Δp of the transverse modes `n = 1..=n_max`, the slit being an
/// infinite well of width `a`.
pub fn mode_uncertainty_growth(
    width: f64,
    units: PhysicalUnits,
    n_max: u64,
) -> Result<Vec<(u64, f64)>> {
    if n_max < 2 {
        return Err(Error::param("n_max", "must be at least 2"));
    }
    let well = ModelSpectrum::well(width, units)?;
    (1..=n_max)
        .map(|n| Ok((n, well.state_uncertainty_product(n)?)))
        .collect()
}
