//! Numerical laboratory for the energy cost of position-measurement states.
//!
//! A position measurement leaves the particle in a narrow state χ_ε that
//! stands in for δ(x − x₀). Projecting χ_ε onto the eigenbasis of a bound
//! Hamiltonian gives the probabilities P(E_n) and the post-measurement
//! energy Σ P(E_n)·E_n. For the rectangular approximant that sum diverges;
//! for the continuous sine-bump and Gaussian approximants it converges to
//! an energy that scales like 1/ε².
//!
//! * [`numerics`]: quadrature, compensated sums, Hermite functions, FFT, slope fits
//! * [`approximants`]: the three families of χ_ε and their momentum-space behaviour
//! * [`spectra`]: infinite square well and harmonic oscillator
//! * [`projection`]: overlaps, partial-sum series, divergence verdicts, direct ⟨H⟩
//! * [`slit`]: single-slit Fraunhofer analysis as a position measurement
//! * [`cli`]: the `delta-lab` scenario runner

#![allow(
    clippy::neg_cmp_op_on_partial_ord,
    clippy::excessive_precision,
    clippy::needless_range_loop
)]

pub mod approximants;
pub mod cli;
pub mod error;
pub mod numerics;
pub mod projection;
pub mod slit;
pub mod spectra;

pub use error::{Error, Result};
