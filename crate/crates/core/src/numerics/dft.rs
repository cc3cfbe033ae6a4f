//! Radix-2 FFT and the continuum-normalized momentum transform
//!
//!   χ̃(p) = (2πħ)^{-1/2} ∫ χ(x) e^{-ipx/ħ} dx
//!
//! discretized on a uniform position grid.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

pub const MIN_SAMPLES: usize = 16;

/// In-place forward FFT, `X_k = Σ_j x_j e^{-2πi jk/N}`. Length must be a
/// power of two.
pub fn fft_in_place(data: &mut [Complex64]) {
    let n = data.len();
    assert!(n.is_power_of_two(), "fft length {n} is not a power of two");
    if n < 2 {
        return;
    }
    let bits = n.trailing_zeros();
    for i in 0..n {
        let j = i.reverse_bits() >> (usize::BITS - bits);
        if j > i {
            data.swap(i, j);
        }
    }
    // twiddles from direct sin/cos, not by repeated multiplication
    let twiddles: Vec<Complex64> = (0..n / 2)
        .map(|k| {
            let (s, c) = (-2.0 * PI * k as f64 / n as f64).sin_cos();
            Complex64::new(c, s)
        })
        .collect();
    let mut len = 2;
    while len <= n {
        let half = len / 2;
        let stride = n / len;
        for start in (0..n).step_by(len) {
            for k in 0..half {
                let w = twiddles[k * stride];
                let a = data[start + k];
                let b = data[start + k + half] * w;
                data[start + k] = a + b;
                data[start + k + half] = a - b;
            }
        }
        len <<= 1;
    }
}

/// Sampled momentum-space wave function with Parseval bookkeeping.
#[derive(Debug, Clone)]
pub struct MomentumDistribution {
    /// Symmetric grid `p_k = (k − N/2)·dp`, ascending.
    pub momenta: Vec<f64>,
    pub amplitudes: Vec<Complex64>,
    /// `|χ̃(p_k)|²`
    pub density: Vec<f64>,
    pub dp: f64,
    /// `Σ|χ_j|² dx`
    pub position_norm: f64,
    /// `Σ|χ̃_k|² dp`
    pub momentum_norm: f64,
}

impl MomentumDistribution {
    pub fn parseval_relative_error(&self) -> f64 {
        if self.position_norm == 0.0 {
            return self.momentum_norm.abs();
        }
        ((self.momentum_norm - self.position_norm) / self.position_norm).abs()
    }

    pub fn len(&self) -> usize {
        self.momenta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.momenta.is_empty()
    }

    /// Index of `p = 0`.
    pub fn zero_index(&self) -> usize {
        self.momenta.len() / 2
    }
}

/// Momentum representation of samples `χ(x_start + j·dx)`, `j = 0..N`.
pub fn dft_momentum(
    samples: &[Complex64],
    x_start: f64,
    dx: f64,
    hbar: f64,
) -> Result<MomentumDistribution> {
    let n = samples.len();
    if n < MIN_SAMPLES {
        return Err(Error::GridTooCoarse(format!(
            "{n} samples, at least {MIN_SAMPLES} required"
        )));
    }
    if !n.is_power_of_two() {
        return Err(Error::GridTooCoarse(format!(
            "{n} samples is not a power of two"
        )));
    }
    if !(dx > 0.0) || !(hbar > 0.0) {
        return Err(Error::param("dx", "grid spacing and hbar must be positive"));
    }

    // (-1)^j shifts the output so that index N/2 is p = 0
    let mut data: Vec<Complex64> = samples
        .iter()
        .enumerate()
        .map(|(j, &v)| if j % 2 == 0 { v } else { -v })
        .collect();
    fft_in_place(&mut data);

    let dp = 2.0 * PI * hbar / (n as f64 * dx);
    let scale = dx / (2.0 * PI * hbar).sqrt();
    let half = (n / 2) as isize;
    let mut momenta = Vec::with_capacity(n);
    let mut amplitudes = Vec::with_capacity(n);
    let mut density = Vec::with_capacity(n);
    for (k, f) in data.into_iter().enumerate() {
        let p = (k as isize - half) as f64 * dp;
        let (s, c) = (-p * x_start / hbar).sin_cos();
        let amp = f * Complex64::new(c, s) * scale;
        momenta.push(p);
        density.push(amp.norm_sqr());
        amplitudes.push(amp);
    }
    let position_norm = samples.iter().map(|v| v.norm_sqr()).sum::<f64>() * dx;
    let momentum_norm = density.iter().sum::<f64>() * dp;
    Ok(MomentumDistribution {
        momenta,
        amplitudes,
        density,
        dp,
        position_norm,
        momentum_norm,
    })
}
