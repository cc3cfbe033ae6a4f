use serde::Serialize;

use crate::error::{Error, Result};

/// Least-squares line through `(ln x, ln y)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub n_points: usize,
}

pub fn fit_loglog_slope(xs: &[f64], ys: &[f64]) -> Result<SlopeFit> {
    let n = xs.len().min(ys.len());
    if xs.len() != ys.len() {
        return Err(Error::param("ys", "xs and ys must have equal length"));
    }
    if n < 3 {
        return Err(Error::InsufficientPoints { needed: 3, got: n });
    }
    if xs.iter().chain(ys).any(|&v| !(v > 0.0) || !v.is_finite()) {
        return Err(Error::NonPositiveData);
    }
    if xs.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::param("xs", "must be strictly increasing"));
    }
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let nf = n as f64;
    let mx = lx.iter().sum::<f64>() / nf;
    let my = ly.iter().sum::<f64>() / nf;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ly.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = lx
        .iter()
        .zip(&ly)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    // a constant series is fit exactly by a flat line
    let r_squared = if syy <= f64::EPSILON * f64::EPSILON * my.abs().max(1.0) {
        1.0
    } else {
        (1.0 - ss_res / syy).clamp(0.0, 1.0)
    };
    Ok(SlopeFit {
        slope,
        intercept,
        r_squared,
        n_points: n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity() {
        let xs = [1.0, 2.0, 5.0, 10.0];
        let f = fit_loglog_slope(&xs, &xs).unwrap();
        assert!((f.slope - 1.0).abs() < 1e-14);
        assert!((f.r_squared - 1.0).abs() < 1e-14);
        assert_eq!(f.n_points, 4);
    }

    #[test]
    fn square_law() {
        let xs = [1.0, 3.0, 9.0, 27.0];
        let ys: Vec<f64> = xs.iter().map(|x| x * x).collect();
        assert!((fit_loglog_slope(&xs, &ys).unwrap().slope - 2.0).abs() < 1e-13);
    }

    #[test]
    fn scaled_root() {
        let xs = [0.5, 1.0, 4.0, 16.0, 100.0];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| 3.0 * x.sqrt()).collect();
        let f = fit_loglog_slope(&xs, &ys).unwrap();
        assert!((f.slope - 0.5).abs() < 1e-13);
        assert!((f.intercept - 3f64.ln()).abs() < 1e-13);
    }

    #[test]
    fn errors() {
        assert!(matches!(
            fit_loglog_slope(&[1.0, 2.0], &[1.0, 2.0]),
            Err(Error::InsufficientPoints { .. })
        ));
        assert_eq!(
            fit_loglog_slope(&[1.0, 2.0, 3.0], &[1.0, 0.0, 2.0]),
            Err(Error::NonPositiveData)
        );
        assert_eq!(
            fit_loglog_slope(&[-1.0, 2.0, 3.0], &[1.0, 1.0, 2.0]),
            Err(Error::NonPositiveData)
        );
        assert!(fit_loglog_slope(&[1.0, 3.0, 2.0], &[1.0, 1.0, 2.0]).is_err());
    }

    #[test]
    fn flat_series() {
        let f = fit_loglog_slope(&[1.0, 10.0, 100.0], &[4.0, 4.0, 4.0]).unwrap();
        assert_eq!(f.slope, 0.0);
        assert_eq!(f.r_squared, 1.0);
    }
}
