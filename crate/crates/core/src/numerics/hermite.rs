//! Orthonormal Hermite functions (harmonic-oscillator eigenfunctions in
//! dimensionless units) via the normalized three-term recurrence
//!
//!   ψ_{n+1}(y) = y·√(2/(n+1))·ψ_n(y) − √(n/(n+1))·ψ_{n−1}(y),
//!
//! started from ψ_0 = π^{-1/4} e^{-y²/2}. The Gaussian factor is carried as
//! a separate exponent, and the mantissa is rescaled by powers of two, so
//! neither the underflow of e^{-y²/2} nor the growth of the recurrence in
//! the classically forbidden region loses the result.

use std::f64::consts::PI;

const RESCALE_ABOVE: f64 = 1e150;
const RESCALE_EXP: i32 = 500;

fn ln_pi_quarter() -> f64 {
    0.25 * PI.ln()
}

/// Converts mantissa `m` with binary exponent `scale` back to a plain value
/// including the factor π^{-1/4} e^{-y²/2}.
#[inline]
fn assemble(m: f64, scale: i32, y: f64) -> f64 {
    if m == 0.0 {
        return 0.0;
    }
    let log_factor = scale as f64 * std::f64::consts::LN_2 - 0.5 * y * y - ln_pi_quarter();
    let factor = log_factor.exp();
    if factor.is_normal() && factor.is_finite() {
        m * factor
    } else {
        m.signum() * (m.abs().ln() + log_factor).exp()
    }
}

/// ψ_n(y) for a single index.
pub fn hermite_psi(n: usize, y: f64) -> f64 {
    let mut prev = 0.0;
    let mut cur = 1.0;
    let mut scale = 0i32;
    for k in 0..n {
        let kf = k as f64;
        let next = y * (2.0 / (kf + 1.0)).sqrt() * cur - (kf / (kf + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
        if cur.abs() > RESCALE_ABOVE {
            cur = libm::ldexp(cur, -RESCALE_EXP);
            prev = libm::ldexp(prev, -RESCALE_EXP);
            scale += RESCALE_EXP;
        }
    }
    assemble(cur, scale, y)
}

/// Fill `out[k] = ψ_k(y)` for `k = 0..out.len()`.
pub fn hermite_psi_all(y: f64, out: &mut [f64]) {
    if out.is_empty() {
        return;
    }
    let mut prev = 0.0;
    let mut cur = 1.0;
    let mut scale = 0i32;
    let mut factor_scale = i32::MIN;
    let mut factor = 0.0;
    for k in 0..out.len() {
        if scale != factor_scale {
            factor_scale = scale;
            factor = (scale as f64 * std::f64::consts::LN_2 - 0.5 * y * y - ln_pi_quarter()).exp();
        }
        out[k] = if factor.is_normal() && factor.is_finite() {
            cur * factor
        } else {
            assemble(cur, scale, y)
        };
        let kf = k as f64;
        let next = y * (2.0 / (kf + 1.0)).sqrt() * cur - (kf / (kf + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
        if cur.abs() > RESCALE_ABOVE {
            cur = libm::ldexp(cur, -RESCALE_EXP);
            prev = libm::ldexp(prev, -RESCALE_EXP);
            scale += RESCALE_EXP;
        }
    }
}
