use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_delta-lab");

fn golden(name: &str) -> String {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/golden")
        .join(name);
    std::fs::read_to_string(path).unwrap()
}

fn exec(args: &[&str], out: &Path) -> Output {
    Command::new(BIN)
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .unwrap()
}

fn run_ok(args: &[&str], out: &Path) -> (String, Value) {
    let o = exec(args, out);
    assert!(
        o.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&o.stderr)
    );
    let csv = std::fs::read_to_string(out.join(format!("{}.csv", args[0]))).unwrap();
    let report =
        serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    (csv, report)
}

fn keys(v: &Value) -> BTreeSet<String> {
    v.as_object().unwrap().keys().cloned().collect()
}

fn set(items: &[&str]) -> BTreeSet<String> {
    items.iter().map(|s| s.to_string()).collect()
}

#[test]
fn csv_headers_and_result_keys_are_pinned() {
    let dir = tempfile::tempdir().unwrap();
    let cases: [(&[&str], &str, &[&str]); 7] = [
        (
            &["sift"],
            "eps,integral,deviation",
            &["target", "deviation_fit"],
        ),
        (
            &["project"],
            "n,coefficient,probability,energy",
            &["probability_sum", "source"],
        ),
        (
            &["series", "--checkpoints", "10,100,1000,10000"],
            "N,norm_sum,energy_sum",
            &["verdict", "slope", "r_squared", "limit", "states", "source"],
        ),
        (
            &["energy"],
            "eps,energy,closed_form,energy_times_eps2",
            &["energy", "closed_form"],
        ),
        (
            &["kernel", "--n-max", "50"],
            "N,kernel",
            &["kernel_fit", "sifting"],
        ),
        (
            &["slit"],
            "p,density",
            &[
                "threshold",
                "threshold_over_ground_state",
                "classification",
                "first_dark_band",
                "dark_band_product_over_h",
                "central_lobe_fraction",
                "parseval_error",
            ],
        ),
        (
            &["modes"],
            "n,product,product_over_hbar",
            &[
                "strictly_increasing",
                "ground_over_minimum",
                "first_excited_over_minimum",
            ],
        ),
    ];
    for (i, (args, header, result_keys)) in cases.iter().enumerate() {
        let (csv, report) = run_ok(args, &dir.path().join(i.to_string()));
        assert_eq!(csv.lines().next().unwrap(), *header, "{args:?}");
        assert_eq!(keys(&report["results"]), set(result_keys), "{args:?}");
        assert_eq!(
            keys(&report),
            set(&[
                "schema_version",
                "tool",
                "version",
                "scenario",
                "config",
                "results",
                "duration_seconds"
            ])
        );
        assert_eq!(report["schema_version"], 1);
        assert_eq!(report["scenario"], args[0]);
    }
}

#[test]
fn golden_tables() {
    let dir = tempfile::tempdir().unwrap();
    let (modes, _) = run_ok(&["modes", "--n-max", "5"], &dir.path().join("m"));
    assert_eq!(modes, golden("modes.csv"));
    let (energy, _) = run_ok(
        &[
            "energy",
            "--approximant",
            "gaussian",
            "--eps-list",
            "1,0.5,0.1",
        ],
        &dir.path().join("e"),
    );
    assert_eq!(energy, golden("energy.csv"));
    let (series, _) = run_ok(
        &["series", "--eps", "1", "--checkpoints", "10,100,1000,10000"],
        &dir.path().join("s"),
    );
    assert_eq!(series, golden("series.csv"));
}

#[test]
fn documented_examples() {
    let dir = tempfile::tempdir().unwrap();
    let (_, series) = run_ok(
        &[
            "series",
            "--model",
            "well",
            "--a",
            "1",
            "--approximant",
            "rect",
            "--eps",
            "0.1",
        ],
        &dir.path().join("series"),
    );
    assert_eq!(series["results"]["verdict"], "Divergent");
    assert!((series["results"]["slope"].as_f64().unwrap() - 1.0).abs() < 0.05);

    let (_, energy) = run_ok(
        &["energy", "--approximant", "gaussian", "--eps", "1"],
        &dir.path().join("energy"),
    );
    assert_eq!(energy["results"]["energy"], 0.25);
    assert_eq!(energy["results"]["closed_form"], 0.25);

    let (_, slit) = run_ok(
        &["slit", "--a", "1", "--E0", "10"],
        &dir.path().join("slit"),
    );
    let r = &slit["results"];
    assert!((r["threshold"].as_f64().unwrap() - 19.7392).abs() < 1e-4);
    assert_eq!(r["classification"], "BelowThreshold");
    assert!((r["dark_band_product_over_h"].as_f64().unwrap() - 1.0).abs() < 0.01);
}

#[test]
fn gaussian_in_well_converges() {
    let dir = tempfile::tempdir().unwrap();
    let (_, report) = run_ok(
        &["series", "--approximant", "gaussian", "--eps", "0.05"],
        dir.path(),
    );
    assert_eq!(report["results"]["verdict"], "Convergent");
    let limit = report["results"]["limit"].as_f64().unwrap();
    // far from the walls the truncated state carries the free energy ħ²/(4mε²)
    assert!((limit / 100.0 - 1.0).abs() < 1e-9);
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(
        &cfg,
        "# sine bump in the free line\nscenario = energy\napproximant = sine\neps = 0.5\n",
    )
    .unwrap();
    let (_, report) = run_ok(
        &["energy", "--config", cfg.to_str().unwrap(), "--eps", "1"],
        &dir.path().join("o"),
    );
    let e = report["results"]["energy"].as_f64().unwrap();
    assert!((e - std::f64::consts::PI.powi(2) / 2.0).abs() < 1e-10);
    assert_eq!(report["config"]["approximant"], "sine");
}

#[test]
fn unknown_config_key_exits_with_line_diagnostic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "eps = 0.1\n\nwidth = 2\n").unwrap();
    let o = exec(&["series", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("line 3") && err.contains("width"), "{err}");
}

#[test]
fn validation_failures_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let o = exec(
        &["series", "--approximant", "rect", "--eps", "1.5"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("eps exceeds well width"));

    let o = exec(&["energy", "--mass", "-1"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("mass must be positive"));

    let o = exec(&["energy", "--approximant", "rect"], dir.path());
    assert_eq!(o.status.code(), Some(2));

    let o = exec(&["slit", "--samples", "1000"], dir.path());
    assert_eq!(o.status.code(), Some(2));

    let o = exec(&["series", "--eps", "abc"], dir.path());
    assert_eq!(o.status.code(), Some(2));

    let o = exec(&["nonsense"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn numerical_failure_exits_3_naming_the_operation() {
    let dir = tempfile::tempdir().unwrap();
    let o = exec(&["energy", "--eps", "1e-300"], dir.path());
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("direct_energy_expectation"));
}

#[test]
fn csv_numbers_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let (csv, _) = run_ok(
        &[
            "project",
            "--approximant",
            "sine",
            "--eps",
            "0.3",
            "--x0",
            "0.4",
        ],
        dir.path(),
    );
    for line in csv.lines().skip(1) {
        let mut cells = line.split(',');
        cells.next().unwrap().parse::<u64>().unwrap();
        for cell in cells {
            let v: f64 = cell.parse().unwrap();
            assert_eq!(format!("{v:?}"), cell);
        }
    }
}
