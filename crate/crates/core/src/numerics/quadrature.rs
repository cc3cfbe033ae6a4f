//! Globally adaptive 21-point Gauss–Kronrod quadrature.
//!
//! The interval is first cut at every declared breakpoint; afterwards the
//! subinterval with the largest error estimate is bisected until the summed
//! estimate meets `max(abs_tol, rel_tol * |I|)`. Error estimates use the
//! QUADPACK scaling of `|K21 - G10|`, and a result is also accepted once its
//! estimate falls below the rounding floor `50·ε·∫|f|`.

use rayon::prelude::*;

use super::summation::NeumaierSum;
use crate::error::{Error, Result};

// Kronrod abscissae on [0, 1]; odd indices are the 10-point Gauss nodes.
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_208_606_891_090,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

/// Tolerances and subdivision budget for [`integrate`].
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureSpec {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Upper bound on the number of subintervals, breakpoint cuts included.
    pub max_subdivisions: usize,
    /// Interior points where the integrand is not smooth.
    pub breakpoints: Vec<f64>,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-14,
            max_subdivisions: 4000,
            breakpoints: Vec::new(),
        }
    }
}

impl QuadratureSpec {
    pub fn with_breakpoints(mut self, breakpoints: Vec<f64>) -> Self {
        self.breakpoints = breakpoints;
        self
    }

    pub fn with_tolerances(mut self, rel_tol: f64, abs_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self.abs_tol = abs_tol;
        self
    }

    fn cut_points(&self, lo: f64, hi: f64) -> Result<Vec<f64>> {
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::InvalidInterval { lo, hi });
        }
        if !(self.rel_tol > 0.0) || !(self.abs_tol > 0.0) {
            return Err(Error::param(
                "tolerance",
                "rel_tol and abs_tol must be positive",
            ));
        }
        if self.max_subdivisions < self.breakpoints.len() + 1 {
            return Err(Error::param(
                "max_subdivisions",
                "budget smaller than the number of breakpoint pieces",
            ));
        }
        let mut pts = Vec::with_capacity(self.breakpoints.len() + 2);
        pts.push(lo);
        for &b in &self.breakpoints {
            let prev = *pts.last().unwrap();
            if !(b > prev && b < hi) {
                return Err(Error::param(
                    "breakpoints",
                    format!("{b} is not strictly increasing inside ({lo}, {hi})"),
                ));
            }
            pts.push(b);
        }
        pts.push(hi);
        Ok(pts)
    }
}

/// Interior breakpoints of `candidates` that fall strictly inside `(lo, hi)`,
/// sorted and deduplicated. Convenience for callers whose non-smooth points
/// may coincide with the integration limits.
pub fn interior_breakpoints(lo: f64, hi: f64, candidates: &[f64]) -> Vec<f64> {
    let width = hi - lo;
    let mut pts: Vec<f64> = candidates
        .iter()
        .copied()
        .filter(|&p| p > lo + 1e-14 * width && p < hi - 1e-14 * width)
        .collect();
    pts.sort_by(f64::total_cmp);
    pts.dedup_by(|a, b| (*a - *b).abs() <= 1e-14 * width);
    pts
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    lo: f64,
    hi: f64,
    value: f64,
    error: f64,
    abs_value: f64,
}

const ROUNDOFF: f64 = 50.0 * f64::EPSILON;

/// QUADPACK error estimate of one 21-point rule, from the raw Kronrod and
/// Gauss sums on [-1, 1] and the Kronrod sum of `|f - mean|`.
fn scaled_error(kronrod: f64, gauss: f64, resasc: f64, resabs: f64, half: f64) -> f64 {
    let mut err = ((kronrod - gauss) * half).abs();
    let resasc = resasc * half.abs();
    if resasc != 0.0 && err != 0.0 {
        err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
    }
    let resabs = resabs * half.abs();
    if resabs > f64::MIN_POSITIVE / ROUNDOFF {
        err = err.max(ROUNDOFF * resabs);
    }
    err
}

fn kronrod_deviation(samples: impl Iterator<Item = (f64, f64)>, mean: f64) -> f64 {
    samples.map(|(w, v)| w * (v - mean).abs()).sum()
}

fn gauss_kronrod<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64) -> Segment {
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let mut fv = [0.0; 21];
    fv[0] = f(center);
    for k in 0..10 {
        let dx = half * XGK[k];
        fv[1 + 2 * k] = f(center - dx);
        fv[2 + 2 * k] = f(center + dx);
    }
    let (kronrod, gauss, resabs, resasc) = rule_sums(|j| fv[j]);
    Segment {
        lo,
        hi,
        value: kronrod * half,
        error: scaled_error(kronrod, gauss, resasc, resabs, half),
        abs_value: resabs * half.abs(),
    }
}

/// Kronrod sum, Gauss sum, Kronrod sum of `|f|` and of `|f - mean|` for the
/// 21 samples in node order (center, then `-x_k`, `+x_k` for k = 0..10).
fn rule_sums(sample: impl Fn(usize) -> f64) -> (f64, f64, f64, f64) {
    let weights = || {
        std::iter::once((WGK[10], sample(0)))
            .chain((0..10).flat_map(|k| [(WGK[k], sample(1 + 2 * k)), (WGK[k], sample(2 + 2 * k))]))
    };
    let mut kronrod = 0.0;
    let mut resabs = 0.0;
    for (w, v) in weights() {
        kronrod += w * v;
        resabs += w * v.abs();
    }
    let mut gauss = 0.0;
    for j in 0..5 {
        let k = 2 * j + 1;
        gauss += WG[j] * (sample(1 + 2 * k) + sample(2 + 2 * k));
    }
    let resasc = kronrod_deviation(weights(), 0.5 * kronrod);
    (kronrod, gauss, resabs, resasc)
}

fn too_narrow(lo: f64, hi: f64) -> bool {
    let mid = 0.5 * (lo + hi);
    mid <= lo || mid >= hi || (hi - lo) <= 8.0 * f64::EPSILON * lo.abs().max(hi.abs())
}

/// Integrate `f` over `[lo, hi]`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, spec: &QuadratureSpec) -> Result<f64> {
    let cuts = spec.cut_points(lo, hi)?;
    let mut segments: Vec<Segment> = cuts
        .windows(2)
        .map(|w| gauss_kronrod(&f, w[0], w[1]))
        .collect();

    loop {
        let value = segments
            .iter()
            .map(|s| s.value)
            .collect::<NeumaierSum>()
            .value();
        let error = segments
            .iter()
            .map(|s| s.error)
            .collect::<NeumaierSum>()
            .value();
        let floor = ROUNDOFF * segments.iter().map(|s| s.abs_value).sum::<f64>();
        let tolerance = spec.abs_tol.max(spec.rel_tol * value.abs()).max(floor);
        if error <= tolerance {
            return Ok(value);
        }
        if !value.is_finite() {
            return Err(Error::NonConvergence {
                subdivisions: segments.len(),
                error,
                tolerance,
            });
        }
        let (worst, _) = segments
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.error.total_cmp(&b.1.error))
            .expect("at least one segment");
        let seg = segments[worst];
        if segments.len() >= spec.max_subdivisions || too_narrow(seg.lo, seg.hi) {
            return Err(Error::NonConvergence {
                subdivisions: segments.len(),
                error,
                tolerance,
            });
        }
        let mid = 0.5 * (seg.lo + seg.hi);
        segments[worst] = gauss_kronrod(&f, seg.lo, mid);
        segments.push(gauss_kronrod(&f, mid, seg.hi));
    }
}

struct VecSegment {
    lo: f64,
    hi: f64,
    values: Vec<f64>,
    errors: Vec<f64>,
    abs_values: Vec<f64>,
    priority: f64,
}

fn gauss_kronrod_vec<F>(f: &F, dim: usize, lo: f64, hi: f64) -> (Vec<f64>, Vec<f64>, Vec<f64>)
where
    F: Fn(f64, &mut [f64]) + Sync,
{
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    // node order: center, then (-x_k, +x_k) for k = 0..10
    let nodes: Vec<f64> = std::iter::once(center)
        .chain((0..10).flat_map(|k| [center - half * XGK[k], center + half * XGK[k]]))
        .collect();
    let samples: Vec<Vec<f64>> = nodes
        .par_iter()
        .map(|&x| {
            let mut out = vec![0.0; dim];
            f(x, &mut out);
            out
        })
        .collect();

    let mut values = vec![0.0; dim];
    let mut errors = vec![0.0; dim];
    let mut abs_values = vec![0.0; dim];
    for i in 0..dim {
        let (kronrod, gauss, resabs, resasc) = rule_sums(|j| samples[j][i]);
        values[i] = kronrod * half;
        errors[i] = scaled_error(kronrod, gauss, resasc, resabs, half);
        abs_values[i] = resabs * half.abs();
    }
    (values, errors, abs_values)
}

/// Integrate a vector-valued function component-wise on a shared adaptive
/// mesh. `f(x, out)` must fill all `dim` components of `out`. Every
/// component has to meet `max(abs_tol, rel_tol * |I_k|)`.
///
/// Node evaluations within one rule run in parallel; the reduction is done
/// in a fixed order, so the result does not depend on the thread count.
pub fn integrate_vec<F>(
    f: F,
    dim: usize,
    lo: f64,
    hi: f64,
    spec: &QuadratureSpec,
) -> Result<Vec<f64>>
where
    F: Fn(f64, &mut [f64]) + Sync,
{
    let cuts = spec.cut_points(lo, hi)?;
    let mut totals = vec![0.0; dim];
    let mut total_errors = vec![0.0; dim];
    let mut total_abs = vec![0.0; dim];
    let mut segments: Vec<VecSegment> = Vec::with_capacity(cuts.len() - 1);
    for w in cuts.windows(2) {
        let (values, errors, abs_values) = gauss_kronrod_vec(&f, dim, w[0], w[1]);
        for i in 0..dim {
            totals[i] += values[i];
            total_errors[i] += errors[i];
            total_abs[i] += abs_values[i];
        }
        segments.push(VecSegment {
            lo: w[0],
            hi: w[1],
            values,
            errors,
            abs_values,
            priority: f64::INFINITY,
        });
    }

    let tolerance = |i: usize, totals: &[f64], total_abs: &[f64]| {
        spec.abs_tol
            .max(spec.rel_tol * totals[i].abs())
            .max(ROUNDOFF * total_abs[i])
    };
    let priority = |errors: &[f64], totals: &[f64], total_abs: &[f64]| {
        errors
            .iter()
            .enumerate()
            .map(|(i, e)| e / tolerance(i, totals, total_abs))
            .fold(0.0, f64::max)
    };
    for s in segments.iter_mut() {
        s.priority = priority(&s.errors, &totals, &total_abs);
    }

    loop {
        let worst_component = (0..dim)
            .map(|i| (i, total_errors[i] / tolerance(i, &totals, &total_abs)))
            .max_by(|a, b| a.1.total_cmp(&b.1));
        let (worst_i, ratio) = match worst_component {
            Some(w) => w,
            None => return Ok(totals),
        };
        if ratio <= 1.0 {
            // rebuild the totals in a fixed order to shed incremental drift
            let mut out = vec![NeumaierSum::new(); dim];
            for s in &segments {
                for i in 0..dim {
                    out[i].add(s.values[i]);
                }
            }
            return Ok(out.iter().map(NeumaierSum::value).collect());
        }
        let (idx, _) = segments
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.priority.total_cmp(&b.1.priority))
            .expect("at least one segment");
        let (lo, hi) = (segments[idx].lo, segments[idx].hi);
        if segments.len() >= spec.max_subdivisions || too_narrow(lo, hi) || !ratio.is_finite() {
            return Err(Error::NonConvergence {
                subdivisions: segments.len(),
                error: total_errors[worst_i],
                tolerance: tolerance(worst_i, &totals, &total_abs),
            });
        }
        let parent = segments.swap_remove(idx);
        let mid = 0.5 * (lo + hi);
        let (lv, le, la) = gauss_kronrod_vec(&f, dim, lo, mid);
        let (rv, re, ra) = gauss_kronrod_vec(&f, dim, mid, hi);
        for i in 0..dim {
            totals[i] += lv[i] + rv[i] - parent.values[i];
            total_errors[i] += le[i] + re[i] - parent.errors[i];
            total_abs[i] += la[i] + ra[i] - parent.abs_values[i];
        }
        let lp = priority(&le, &totals, &total_abs);
        let rp = priority(&re, &totals, &total_abs);
        segments.push(VecSegment {
            lo,
            hi: mid,
            values: lv,
            errors: le,
            abs_values: la,
            priority: lp,
        });
        segments.push(VecSegment {
            lo: mid,
            hi,
            values: rv,
            errors: re,
            abs_values: ra,
            priority: rp,
        });
    }
}
