//! End-to-end acceptance checks. Each test prints one `PASS`/`FAIL` line
//! (visible with `--nocapture`) and then asserts the same condition.

use std::f64::consts::PI;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use proptest::strategy::{Strategy, ValueTree};
use proptest::test_runner::TestRunner;

use delta_lab::approximants::{
    momentum_second_moment_cumulative, sifting_check, Approximant, Family,
};
use delta_lab::numerics::fit_loglog_slope;
use delta_lab::projection::{
    approximant_in, build_series, direct_energy_expectation, overlap_quadrature, Host,
    OverlapSource, Verdict, DEFAULT_CHECKPOINTS,
};
use delta_lab::slit::{
    classify_incident_energy, diffract, mode_uncertainty_growth, EnergyClass, SlitSetup,
};
use delta_lab::spectra::{ModelSpectrum, PhysicalUnits};

fn verdict(id: u32, title: &str, ok: bool, detail: String) {
    println!(
        "criterion {id:>2} {}: {title} ({detail})",
        if ok { "PASS" } else { "FAIL" }
    );
    assert!(ok, "criterion {id} failed: {title}: {detail}");
}

fn unit_well() -> ModelSpectrum {
    ModelSpectrum::well(1.0, PhysicalUnits::default()).unwrap()
}

/// Independent evaluation of the centred rectangular-state probabilities.
fn rect_probability(n: u64, eps: f64, a: f64) -> f64 {
    if n.is_multiple_of(2) {
        0.0
    } else {
        let x = n as f64 * PI;
        8.0 * a / eps * (x * eps / (2.0 * a)).sin().powi(2) / (x * x)
    }
}

fn within(elapsed: Duration, secs: u64) -> bool {
    elapsed <= Duration::from_secs(secs)
}

#[test]
fn criterion_01_rect_well_probabilities() {
    let start = Instant::now();
    let m = unit_well();
    let mut runner = TestRunner::deterministic();
    let pairs = (1u64..=200, 1e-4f64..=1.0);
    let mut worst = 0.0f64;
    let mut worst_even = 0.0f64;
    for _ in 0..20 {
        let (n, eps) = pairs.new_tree(&mut runner).unwrap().current();
        let approx = approximant_in(&m, Family::Rectangular, 0.5, eps).unwrap();
        let p = overlap_quadrature(&m, &approx, n).unwrap().powi(2);
        let oracle = rect_probability(n, eps, 1.0);
        let closed = delta_lab::projection::overlap_closed_form_rect_well(n, eps, 1.0).unwrap();
        worst = worst.max((p - oracle).abs()).max((closed - oracle).abs());
        let even = overlap_quadrature(&m, &approx, 2 * (n / 2 + 1))
            .unwrap()
            .powi(2);
        worst_even = worst_even.max(even);
    }
    let elapsed = start.elapsed();
    verdict(
        1,
        "quadrature overlaps reproduce the rect-in-well probabilities",
        worst < 1e-9 && worst_even < 1e-12 && within(elapsed, 5),
        format!("max |Δp| {worst:.2e}, max even p {worst_even:.2e}, {elapsed:.2?}"),
    );
}

#[test]
fn criterion_02_normalization_reaches_unity() {
    let start = Instant::now();
    let m = unit_well();
    let approx = approximant_in(&m, Family::Rectangular, 0.5, 0.1).unwrap();
    let s = build_series(&m, &approx, &DEFAULT_CHECKPOINTS).unwrap();
    let last = *s.normalization_sums.last().unwrap();
    let elapsed = start.elapsed();
    verdict(
        2,
        "rect-in-well probabilities sum to 1 by N = 1e5",
        (last - 1.0).abs() < 1e-4 && within(elapsed, 10),
        format!("Σ P = {last:.8}, {elapsed:.2?}"),
    );
}

#[test]
fn criterion_03_rect_well_energy_diverges() {
    let start = Instant::now();
    let m = unit_well();
    let mut ok = true;
    let mut detail = Vec::new();
    for eps in [1.0, 0.5, 0.1, 0.01] {
        let approx = approximant_in(&m, Family::Rectangular, 0.5, eps).unwrap();
        let s = build_series(&m, &approx, &DEFAULT_CHECKPOINTS).unwrap();
        let good = matches!(s.verdict, Verdict::Divergent { slope, r_squared }
            if (slope - 1.0).abs() <= 0.05 && r_squared >= 0.99);
        ok &= good;
        detail.push(format!(
            "ε={eps}: slope {:.4} r² {:.4}",
            s.fit.slope, s.fit.r_squared
        ));
        if eps == 1.0 {
            for (&n, &e) in s.checkpoints.iter().zip(&s.energy_sums) {
                // every odd term contributes 4ħ²/(ma²) at full width
                let exact = 4.0 * n as f64;
                ok &= ((e - exact) / exact).abs() < 1e-9;
            }
        }
    }
    let elapsed = start.elapsed();
    ok &= within(elapsed, 30);
    verdict(
        3,
        "rect-in-well energy sums diverge linearly",
        ok,
        format!("{}, {elapsed:.2?}", detail.join("; ")),
    );
}

#[test]
fn criterion_04_rect_oscillator_energy_diverges() {
    let start = Instant::now();
    let o = ModelSpectrum::oscillator(1.0, PhysicalUnits::default()).unwrap();
    let approx = approximant_in(&o, Family::Rectangular, 0.0, 0.1).unwrap();
    let s = build_series(&o, &approx, &DEFAULT_CHECKPOINTS[..5]).unwrap();
    let elapsed = start.elapsed();
    verdict(
        4,
        "rect-in-oscillator energy sums classified divergent",
        matches!(s.verdict, Verdict::Divergent { .. })
            && s.source == OverlapSource::Quadrature
            && within(elapsed, 120),
        format!(
            "{} with slope {:.4}, r² {:.4}, {elapsed:.2?}",
            s.verdict.label(),
            s.fit.slope,
            s.fit.r_squared
        ),
    );
}

#[test]
fn criterion_05_sine_bump_energy() {
    let u = PhysicalUnits::default();
    let m = unit_well();
    let mut ok = true;
    let mut detail = Vec::new();
    for eps in [1.0, 0.1, 0.01] {
        let oracle = (PI * u.hbar).powi(2) / (2.0 * u.mass * eps * eps);
        let free = Approximant::sine_bump(0.0, eps).unwrap();
        let direct = direct_energy_expectation(&Host::Free(u), &free).unwrap();
        let in_well = approximant_in(&m, Family::SineBump, 0.5, eps).unwrap();
        let s = build_series(&m, &in_well, &DEFAULT_CHECKPOINTS).unwrap();
        let limit = *s.energy_sums.last().unwrap();
        let rel_direct = ((direct - oracle) / oracle).abs();
        let rel_series = ((limit - direct) / direct).abs();
        ok &= rel_direct < 1e-8 && rel_series < 1e-3;
        detail.push(format!(
            "ε={eps}: direct {rel_direct:.1e}, series {rel_series:.1e}"
        ));
    }
    verdict(
        5,
        "sine-bump energy matches its closed form",
        ok,
        detail.join("; "),
    );
}

#[test]
fn criterion_06_gaussian_energy() {
    let u = PhysicalUnits::default();
    let mut ok = true;
    let mut scaled = Vec::new();
    let mut worst = 0.0f64;
    for eps in [1.0, 0.1, 0.01] {
        let oracle = u.hbar * u.hbar / (4.0 * u.mass * eps * eps);
        let g = Approximant::gaussian(0.0, eps).unwrap();
        let e = direct_energy_expectation(&Host::Free(u), &g).unwrap();
        worst = worst.max(((e - oracle) / oracle).abs());
        scaled.push(e * eps * eps);
    }
    ok &= worst < 1e-8;
    let spread = scaled
        .iter()
        .map(|s| ((s - scaled[0]) / scaled[0]).abs())
        .fold(0.0, f64::max);
    ok &= spread < 1e-8;
    verdict(
        6,
        "Gaussian energy matches its closed form and scales as 1/ε²",
        ok,
        format!("max rel error {worst:.1e}, ⟨H⟩ε² spread {spread:.1e}"),
    );
}

#[test]
fn criterion_07_momentum_second_moment() {
    let u = PhysicalUnits::default();
    let eps = 1.0;
    let rect = Approximant::rectangular(0.0, eps).unwrap();
    let cutoffs: Vec<f64> = (0..=8)
        .map(|k| 10f64.powf(2.0 + 0.25 * k as f64) * u.hbar / eps)
        .collect();
    let g = momentum_second_moment_cumulative(&rect, &cutoffs, u.hbar).unwrap();
    let fit = fit_loglog_slope(&cutoffs, &g).unwrap();
    let rect_ok = (fit.slope - 1.0).abs() <= 0.05;

    let smooth_cutoffs = [1e3, 1e4, 1e5, 4e5];
    let sine = Approximant::sine_bump(0.0, eps).unwrap();
    let gs = momentum_second_moment_cumulative(&sine, &smooth_cutoffs, u.hbar).unwrap();
    let sine_target = 2.0 * u.mass * (PI * u.hbar).powi(2) / (2.0 * u.mass * eps * eps);
    let sine_err = ((gs[3] - sine_target) / sine_target).abs();
    let gauss = Approximant::gaussian(0.0, eps).unwrap();
    let gg = momentum_second_moment_cumulative(&gauss, &[10.0, 50.0], u.hbar).unwrap();
    let gauss_target = 2.0 * u.mass * u.hbar * u.hbar / (4.0 * u.mass * eps * eps);
    let gauss_err = ((gg[1] - gauss_target) / gauss_target).abs();
    verdict(
        7,
        "rect momentum moment grows linearly, smooth moments converge",
        rect_ok && sine_err < 1e-4 && gauss_err < 1e-4,
        format!(
            "rect slope {:.4}, sine rel {sine_err:.1e}, gaussian rel {gauss_err:.1e}",
            fit.slope
        ),
    );
}

#[test]
fn criterion_08_completeness_kernel() {
    let m = unit_well();
    let ns = [100usize, 316, 1000, 3162, 10_000];
    let k: Vec<f64> = ns
        .iter()
        .map(|&n| m.completeness_kernel(0.5, 0.5, n).unwrap().value)
        .collect();
    let fit = fit_loglog_slope(&ns.map(|n| n as f64), &k).unwrap();
    let mut worst = 0.0f64;
    for xp in [0.5, 0.3, 0.77] {
        let f = |x: f64| (PI * x).sin();
        let s = m.kernel_sifting(xp, 1000, f).unwrap();
        worst = worst.max((s - f(xp)).abs());
    }
    verdict(
        8,
        "diagonal kernel grows linearly and sifts at N = 1000",
        (fit.slope - 1.0).abs() <= 0.02 && worst < 1e-3,
        format!("slope {:.4}, sifting error {worst:.1e}", fit.slope),
    );
}

#[test]
fn criterion_09_sifting_deviation() {
    let mut worst = 0.0f64;
    for (x0, eps) in [(0.3, 0.1), (-1.2, 0.5), (2.0, 0.01), (0.0, 1.0)] {
        let r = Approximant::rectangular(x0, eps).unwrap();
        let rep = sifting_check(&r, |x| x * x, &[eps]).unwrap();
        let dev = rep.integrals[0] - x0 * x0;
        worst = worst.max((dev - eps * eps / 12.0).abs());
    }
    let eps_list = [0.2, 0.1, 0.05, 0.02, 0.01];
    let mut slopes = Vec::new();
    for fam in Family::ALL {
        let a = Approximant::new(fam, 0.4, 0.2, None).unwrap();
        let rep = sifting_check(&a, f64::cos, &eps_list).unwrap();
        let xs: Vec<f64> = eps_list.iter().rev().copied().collect();
        let ys: Vec<f64> = rep.deviations.iter().rev().copied().collect();
        slopes.push(fit_loglog_slope(&xs, &ys).unwrap().slope);
    }
    verdict(
        9,
        "sifting deviations vanish as ε²",
        worst < 1e-10 && slopes.iter().all(|&s| s >= 1.9),
        format!("x² error {worst:.1e}, cos slopes {slopes:.3?}"),
    );
}

/// Share of the normalized sinc² pattern inside its central lobe, by
/// composite Simpson quadrature.
fn central_lobe_oracle() -> f64 {
    let n = 20_000;
    let h = 2.0 * PI / n as f64;
    let f = |u: f64| {
        if u == 0.0 {
            1.0
        } else {
            (u / 2.0).sin().powi(2) / (u / 2.0).powi(2)
        }
    };
    let mut s = f(0.0) + f(2.0 * PI);
    for i in 1..n {
        s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(i as f64 * h);
    }
    // both halves, normalized by ∫ sinc²(u/2) du = 2π
    2.0 * s * h / 3.0 / (2.0 * PI)
}

#[test]
fn criterion_10_slit_dark_band() {
    let u = PhysicalUnits::default();
    let lobe = central_lobe_oracle();
    let mut ok = (lobe - 0.903).abs() <= 0.002;
    let mut detail = vec![format!("sinc² lobe {lobe:.5}")];
    for a in [0.5, 1.0, 2.0, 5.0] {
        let d = diffract(&SlitSetup::new(a, 0.0, u).unwrap()).unwrap();
        let good = (d.product_over_h - 1.0).abs() <= 0.01
            && (d.central_lobe_fraction - 0.903).abs() <= 0.002
            && (d.central_lobe_fraction - lobe).abs() <= 1e-3
            && d.parseval_error < 1e-9;
        ok &= good;
        detail.push(format!(
            "a={a}: δp·a/h {:.6}, lobe {:.5}, Parseval {:.1e}",
            d.product_over_h, d.central_lobe_fraction, d.parseval_error
        ));
    }
    verdict(10, "slit dark band gives δp·a = h", ok, detail.join("; "));
}

#[test]
fn criterion_11_energy_threshold() {
    let mut ok = true;
    let mut worst = 0.0f64;
    for (a, hbar, mass) in [(1.0, 1.0, 1.0), (0.3, 2.0, 0.7), (5.0, 1e-3, 3.0)] {
        let u = PhysicalUnits::new(hbar, mass).unwrap();
        let h = 2.0 * PI * hbar;
        let threshold = h * h / (2.0 * mass * a * a);
        let e1 = (PI * hbar).powi(2) / (2.0 * mass * a * a);
        let well_e1 = ModelSpectrum::well(a, u).unwrap().energy(1).unwrap();
        worst = worst
            .max((threshold / well_e1 - 4.0).abs() / 4.0)
            .max(((well_e1 - e1) / e1).abs());
        let at = SlitSetup::new(a, threshold, u).unwrap();
        worst = worst.max(((at.threshold() - threshold) / threshold).abs());
        let below = SlitSetup::new(a, at.threshold().next_down(), u).unwrap();
        let above = SlitSetup::new(a, at.threshold().next_up(), u).unwrap();
        ok &= classify_incident_energy(&below) == EnergyClass::BelowThreshold
            && classify_incident_energy(&at) == EnergyClass::AboveThreshold
            && classify_incident_energy(&above) == EnergyClass::AboveThreshold;
    }
    verdict(
        11,
        "threshold h²/2ma² = 4E₁ separates the energy classes",
        ok && worst < 1e-12,
        format!("max relative deviation {worst:.1e}"),
    );
}

#[test]
fn criterion_12_mode_uncertainty_growth() {
    let u = PhysicalUnits::default();
    let modes = mode_uncertainty_growth(1.0, u, 50).unwrap();
    let increasing = modes.windows(2).all(|w| w[1].1 > w[0].1);
    let oracle = u.hbar * (PI * PI / 12.0 - 0.5).sqrt();
    let quad = unit_well().state_uncertainty_product_quadrature(1).unwrap();
    let err = (modes[0].1 - oracle).abs().max((quad - oracle).abs());
    verdict(
        12,
        "mode uncertainty products increase from the ground state",
        increasing && err < 1e-10,
        format!(
            "ground {:.10}, quadrature {quad:.10}, error {err:.1e}",
            modes[0].1
        ),
    );
}

fn run_cli(args: &[&str], out: &Path, threads: usize) -> (Vec<u8>, String) {
    let status = Command::new(env!("CARGO_BIN_EXE_delta-lab"))
        .args(args)
        .arg("--out")
        .arg(out)
        .arg("--threads")
        .arg(threads.to_string())
        .output()
        .unwrap();
    assert!(
        status.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&status.stderr)
    );
    let csv = std::fs::read(out.join(format!("{}.csv", args[0]))).unwrap();
    let mut report: serde_json::Value =
        serde_json::from_slice(&std::fs::read(out.join("report.json")).unwrap()).unwrap();
    report.as_object_mut().unwrap().remove("duration_seconds");
    (csv, report.to_string())
}

#[test]
fn criterion_13_cli_determinism() {
    let scenarios: [&[&str]; 8] = [
        &["sift", "--approximant", "gaussian"],
        &[
            "project",
            "--approximant",
            "sine",
            "--eps",
            "0.3",
            "--x0",
            "0.4",
            "--n-max",
            "50",
        ],
        &["series"],
        &[
            "series",
            "--model",
            "oscillator",
            "--checkpoints",
            "10,31,100,316,1000",
        ],
        &[
            "energy",
            "--approximant",
            "gaussian",
            "--eps-list",
            "1,0.5,0.1",
        ],
        &["kernel", "--x", "0.3", "--x-prime", "0.4"],
        &["slit", "--a", "1", "--E0", "10"],
        &["modes"],
    ];
    let dir = tempfile::tempdir().unwrap();
    let mut mismatches = Vec::new();
    for (i, args) in scenarios.iter().enumerate() {
        let runs: Vec<_> = [(1, "a"), (1, "b"), (8, "c")]
            .iter()
            .map(|(threads, tag)| run_cli(args, &dir.path().join(format!("{i}{tag}")), *threads))
            .collect();
        if runs[0] != runs[1] || runs[0] != runs[2] {
            mismatches.push(args[0]);
        }
    }
    verdict(
        13,
        "CLI outputs are byte-identical across runs and thread counts",
        mismatches.is_empty(),
        format!("{} scenarios, mismatches {mismatches:?}", scenarios.len()),
    );
}
