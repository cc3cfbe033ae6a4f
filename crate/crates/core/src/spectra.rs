//! Exactly solvable one-dimensional systems: the infinitely deep square well
//! on `(0, a)` and the simple harmonic oscillator on the whole line.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::{hermite_psi, hermite_psi_all, integrate, NeumaierSum, QuadratureSpec};

/// ħ and particle mass.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhysicalUnits {
    pub hbar: f64,
    pub mass: f64,
}

impl Default for PhysicalUnits {
    fn default() -> Self {
        Self {
            hbar: 1.0,
            mass: 1.0,
        }
    }
}

impl PhysicalUnits {
    pub fn new(hbar: f64, mass: f64) -> Result<Self> {
        if !(hbar > 0.0 && hbar.is_finite()) {
            return Err(Error::param("hbar", "must be positive"));
        }
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(Error::param("mass", "must be positive"));
        }
        Ok(Self { hbar, mass })
    }

    /// h = 2πħ
    pub fn planck_h(&self) -> f64 {
        2.0 * PI * self.hbar
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelKind {
    InfiniteWell { width: f64 },
    Oscillator { omega: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModelSpectrum {
    pub kind: ModelKind,
    pub units: PhysicalUnits,
}

/// The sequence of quantum numbers `first, first + stride, ...` that a
/// series runs over. Position `k = 0, 1, ...` in the sequence maps to
/// `first + k·stride`, which hides whether a model starts counting at 0 or 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct StateSequence {
    pub first: u64,
    pub stride: u64,
}

impl StateSequence {
    #[inline]
    pub fn index(&self, k: usize) -> u64 {
        self.first + k as u64 * self.stride
    }

    /// Largest quantum number among the first `count` states.
    pub fn last_index(&self, count: usize) -> u64 {
        self.index(count.saturating_sub(1))
    }

    pub fn iter(&self, count: usize) -> impl Iterator<Item = u64> + '_ {
        (0..count).map(move |k| self.index(k))
    }
}

/// `Σ_{states ≤ N} φ_n(x′) φ_n(x)` for the first `n_terms` eigenstates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KernelPartialSum {
    pub x: f64,
    pub x_prime: f64,
    pub n_terms: usize,
    pub value: f64,
}

impl ModelSpectrum {
    pub fn well(width: f64, units: PhysicalUnits) -> Result<Self> {
        if !(width > 0.0 && width.is_finite()) {
            return Err(Error::param("a", "well width must be positive"));
        }
        Ok(Self {
            kind: ModelKind::InfiniteWell { width },
            units,
        })
    }

    pub fn oscillator(omega: f64, units: PhysicalUnits) -> Result<Self> {
        if !(omega > 0.0 && omega.is_finite()) {
            return Err(Error::param(
                "omega",
                "oscillator frequency must be positive",
            ));
        }
        Ok(Self {
            kind: ModelKind::Oscillator { omega },
            units,
        })
    }

    /// Lowest quantum number: 1 for the well, 0 for the oscillator.
    pub fn first_index(&self) -> u64 {
        match self.kind {
            ModelKind::InfiniteWell { .. } => 1,
            ModelKind::Oscillator { .. } => 0,
        }
    }

    /// Every eigenstate in ascending energy.
    pub fn all_states(&self) -> StateSequence {
        StateSequence {
            first: self.first_index(),
            stride: 1,
        }
    }

    /// Eigenstates that are even about [`Self::symmetry_center`].
    pub fn even_states(&self) -> StateSequence {
        StateSequence {
            first: self.first_index(),
            stride: 2,
        }
    }

    /// Compact domain of the well; `None` for the oscillator.
    pub fn domain(&self) -> Option<(f64, f64)> {
        match self.kind {
            ModelKind::InfiniteWell { width } => Some((0.0, width)),
            ModelKind::Oscillator { .. } => None,
        }
    }

    /// Reflection center of the potential.
    pub fn symmetry_center(&self) -> f64 {
        match self.kind {
            ModelKind::InfiniteWell { width } => 0.5 * width,
            ModelKind::Oscillator { .. } => 0.0,
        }
    }

    /// Well width, or the oscillator length `√(ħ/mω)`.
    pub fn length_scale(&self) -> f64 {
        match self.kind {
            ModelKind::InfiniteWell { width } => width,
            ModelKind::Oscillator { omega } => (self.units.hbar / (self.units.mass * omega)).sqrt(),
        }
    }

    fn check_index(&self, n: u64) -> Result<()> {
        let first = self.first_index();
        if n < first {
            return Err(Error::IndexOutOfRange { index: n, first });
        }
        Ok(())
    }

    pub fn energy(&self, n: u64) -> Result<f64> {
        self.check_index(n)?;
        let PhysicalUnits { hbar, mass } = self.units;
        Ok(match self.kind {
            ModelKind::InfiniteWell { width } => {
                let k = n as f64 * PI * hbar;
                k * k / (2.0 * mass * width * width)
            }
            ModelKind::Oscillator { omega } => hbar * omega * (n as f64 + 0.5),
        })
    }

    /// Integration window containing the support of every eigenfunction up
    /// to `n_max` (for the oscillator: the classical turning point of
    /// `E_{n_max}` times 1.5, plus ten oscillator lengths).
    pub fn quadrature_window(&self, n_max: u64) -> (f64, f64) {
        match self.kind {
            ModelKind::InfiniteWell { width } => (0.0, width),
            ModelKind::Oscillator { omega } => {
                let m = self.units.mass;
                let e = self.units.hbar * omega * (n_max as f64 + 0.5);
                let turning = (2.0 * e / (m * omega * omega)).sqrt();
                let x_max = 1.5 * turning + 10.0 * self.length_scale();
                (-x_max, x_max)
            }
        }
    }

    pub fn eigenfunction(&self, n: u64, x: f64) -> Result<f64> {
        self.check_index(n)?;
        Ok(match self.kind {
            ModelKind::InfiniteWell { width } => {
                if x <= 0.0 || x >= width {
                    0.0
                } else {
                    (2.0 / width).sqrt() * (n as f64 * PI * x / width).sin()
                }
            }
            ModelKind::Oscillator { .. } => {
                let l = self.length_scale();
                hermite_psi(n as usize, x / l) / l.sqrt()
            }
        })
    }

    pub fn eigenfunction_derivative(&self, n: u64, x: f64) -> Result<f64> {
        self.check_index(n)?;
        Ok(match self.kind {
            ModelKind::InfiniteWell { width } => {
                if x <= 0.0 || x >= width {
                    0.0
                } else {
                    let k = n as f64 * PI / width;
                    (2.0 / width).sqrt() * k * (k * x).cos()
                }
            }
            ModelKind::Oscillator { .. } => {
                // ψ_n' = √(n/2) ψ_{n−1} − √((n+1)/2) ψ_{n+1}, in units of 1/l
                let l = self.length_scale();
                let y = x / l;
                let nf = n as f64;
                let lower = if n == 0 {
                    0.0
                } else {
                    (nf / 2.0).sqrt() * hermite_psi(n as usize - 1, y)
                };
                let upper = ((nf + 1.0) / 2.0).sqrt() * hermite_psi(n as usize + 1, y);
                (lower - upper) / (l * l.sqrt())
            }
        })
    }

    /// Writes `φ_{seq(k)}(x)` into `out[k]` for `k = 0..out.len()`.
    pub fn eigenfunctions_into(&self, seq: StateSequence, x: f64, out: &mut [f64]) {
        if out.is_empty() {
            return;
        }
        match self.kind {
            ModelKind::InfiniteWell { width } => {
                if x <= 0.0 || x >= width {
                    out.fill(0.0);
                    return;
                }
                let norm = (2.0 / width).sqrt();
                let theta = PI * x / width;
                for (k, o) in out.iter_mut().enumerate() {
                    *o = norm * (seq.index(k) as f64 * theta).sin();
                }
            }
            ModelKind::Oscillator { .. } => {
                let l = self.length_scale();
                let n_max = seq.last_index(out.len()) as usize;
                let mut all = vec![0.0; n_max + 1];
                hermite_psi_all(x / l, &mut all);
                let norm = 1.0 / l.sqrt();
                for (k, o) in out.iter_mut().enumerate() {
                    *o = all[seq.index(k) as usize] * norm;
                }
            }
        }
    }

    /// Partial sum of the completeness relation over the first `n_terms`
    /// eigenstates.
    pub fn completeness_kernel(
        &self,
        x: f64,
        x_prime: f64,
        n_terms: usize,
    ) -> Result<KernelPartialSum> {
        if n_terms == 0 {
            return Err(Error::IndexOutOfRange { index: 0, first: 1 });
        }
        let seq = self.all_states();
        let mut at_x = vec![0.0; n_terms];
        let mut at_xp = vec![0.0; n_terms];
        self.eigenfunctions_into(seq, x, &mut at_x);
        self.eigenfunctions_into(seq, x_prime, &mut at_xp);
        let value = at_x
            .iter()
            .zip(&at_xp)
            .map(|(a, b)| a * b)
            .collect::<NeumaierSum>()
            .value();
        Ok(KernelPartialSum {
            x,
            x_prime,
            n_terms,
            value,
        })
    }

    /// `∫ K_N(x, x′) f(x) dx` over the model's window.
    pub fn kernel_sifting<F: Fn(f64) -> f64 + Sync>(
        &self,
        x_prime: f64,
        n_terms: usize,
        f: F,
    ) -> Result<f64> {
        if n_terms == 0 {
            return Err(Error::IndexOutOfRange { index: 0, first: 1 });
        }
        let seq = self.all_states();
        let mut at_xp = vec![0.0; n_terms];
        self.eigenfunctions_into(seq, x_prime, &mut at_xp);
        let (lo, hi) = self.quadrature_window(seq.last_index(n_terms));
        let spec = QuadratureSpec {
            max_subdivisions: 20 * n_terms + 100,
            ..QuadratureSpec::default()
        };
        integrate(
            |x| {
                let mut at_x = vec![0.0; n_terms];
                self.eigenfunctions_into(seq, x, &mut at_x);
                let k = at_x
                    .iter()
                    .zip(&at_xp)
                    .map(|(a, b)| a * b)
                    .collect::<NeumaierSum>()
                    .value();
                k * f(x)
            },
            lo,
            hi,
            &spec,
        )
    }

    /// Δx·Δp of eigenstate `n` from the closed forms.
    pub fn state_uncertainty_product(&self, n: u64) -> Result<f64> {
        self.check_index(n)?;
        let hbar = self.units.hbar;
        Ok(match self.kind {
            ModelKind::InfiniteWell { width } => {
                let nf = n as f64;
                let dx = width * (1.0 / 12.0 - 1.0 / (2.0 * PI * PI * nf * nf)).sqrt();
                let dp = nf * PI * hbar / width;
                dx * dp
            }
            ModelKind::Oscillator { .. } => hbar * (n as f64 + 0.5),
        })
    }

    /// Δx·Δp of eigenstate `n` with every moment obtained by quadrature.
    pub fn state_uncertainty_product_quadrature(&self, n: u64) -> Result<f64> {
        self.check_index(n)?;
        let (lo, hi) = self.quadrature_window(n);
        let spec = QuadratureSpec {
            max_subdivisions: 200 + 20 * n as usize,
            ..QuadratureSpec::default()
        }
        .with_tolerances(1e-13, 1e-15);
        let phi = |x: f64| self.eigenfunction(n, x).unwrap_or(0.0);
        let dphi = |x: f64| self.eigenfunction_derivative(n, x).unwrap_or(0.0);
        let norm = integrate(|x| phi(x).powi(2), lo, hi, &spec)?;
        let mean_x = integrate(|x| x * phi(x).powi(2), lo, hi, &spec)? / norm;
        let mean_x2 = integrate(|x| x * x * phi(x).powi(2), lo, hi, &spec)? / norm;
        let mean_p2 =
            self.units.hbar.powi(2) * integrate(|x| dphi(x).powi(2), lo, hi, &spec)? / norm;
        // real eigenfunctions have ⟨p⟩ = 0
        let var_x = mean_x2 - mean_x * mean_x;
        Ok((var_x * mean_p2).sqrt())
    }
}
