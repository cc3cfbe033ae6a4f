//! Deterministic numerical kernels shared by the physics modules.

mod dft;
mod fit;
mod hermite;
mod quadrature;
mod summation;

pub use dft::{dft_momentum, fft_in_place, MomentumDistribution, MIN_SAMPLES};
pub use fit::{fit_loglog_slope, SlopeFit};
pub use hermite::{hermite_psi, hermite_psi_all};
pub use quadrature::{integrate, integrate_vec, interior_breakpoints, QuadratureSpec};
pub use summation::{compensated_prefix_sums, compensated_sum, NeumaierSum};
