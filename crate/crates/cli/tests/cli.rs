use std::path::Path;
use std::process::{Command, Output};

use relstring::io::{load_snapshot, parse_metadata, parse_report, Table};

fn relstring(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_relstring")).args(args).output().expect("binary runs")
}

fn write_config(dir: &Path, text: &str) -> String {
    let p = dir.join("config.toml");
    std::fs::write(&p, text).unwrap();
    p.display().to_string()
}

fn run_in(dir: &Path, sub: &str, config: &str, extra: &[&str]) -> Output {
    let cfg = write_config(dir, config);
    let out = dir.join("out").display().to_string();
    let mut args = vec![sub, "--config", &cfg, "--out", &out];
    args.extend_from_slice(extra);
    relstring(&args)
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join("out").join(name)).unwrap()
}

const CONSTANT: &str = r#"
experiment = "simulate"
times = [0.0, 0.5, 1.0]
[grid]
samples = 128
[initial]
kind = "constant"
tau = 0.6
v = 0.0
eta = [0.8, 0.0]
zeta = [0.0, 0.0]
"#;

#[test]
fn constant_relativistic_state_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_in(dir.path(), "simulate", CONSTANT, &[]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let report = parse_report(&read(dir.path(), "report.json")).unwrap();
    assert!(report.pass);
    assert!(report.results.iter().any(|r| r.name.starts_with("constraint_preserved")));
}

#[test]
fn snapshots_round_trip_through_the_loaders() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_in(dir.path(), "simulate", "experiment = \"simulate\"\ntimes = [0.25]\n[grid]\nsamples = 256\n[initial]\nkind = \"smooth_hull\"\nd = 2\n", &[]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = read(dir.path(), "snapshot_000.csv");
    let meta = parse_metadata(&read(dir.path(), "snapshot_000.json")).unwrap();
    assert_eq!(meta.t, 0.25);
    let p = load_snapshot(&csv, &meta).unwrap();
    assert_eq!(p.len(), 256);
    // reserialising the loaded profile reproduces the file byte for byte
    let again = relstring::io::profile_snapshot(&p).unwrap().to_csv_string().unwrap();
    assert_eq!(again, csv);
    assert!(!csv.contains('\r'));
}

#[test]
fn snapshot_output_feeds_back_as_initial_data() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run_in(dir.path(), "simulate", CONSTANT, &[]).status.code(), Some(0));
    let next = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cfg = format!(
        "experiment = \"simulate\"\ntimes = [0.5]\n[initial]\nkind = \"snapshot\"\ncsv = \"{}\"\nmeta = \"{}\"\n",
        out.join("snapshot_002.csv").display(),
        out.join("snapshot_002.json").display()
    );
    let o = run_in(next.path(), "simulate", &cfg, &[]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn inadmissible_data_exit_two_and_name_the_samples() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"
[initial]
kind = "riemann"
at = 0.0
left = { tau = 0.05, v = 0.9, eta = [0.0], zeta = [0.0] }
right = { tau = 0.05, v = -0.9, eta = [0.0], zeta = [0.0] }
"#;
    let o = run_in(dir.path(), "simulate", cfg, &[]);
    assert_eq!(o.status.code(), Some(2));
    let msg = String::from_utf8_lossy(&o.stderr);
    assert!(msg.contains("sample 0") && msg.contains("sample 512"), "{msg}");
}

#[test]
fn bad_configs_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run_in(dir.path(), "simulate", "nonsense = 1\n", &[]).status.code(), Some(2));
    assert_eq!(run_in(dir.path(), "thm1", CONSTANT, &[]).status.code(), Some(2));
    assert_eq!(run_in(dir.path(), "simulate", "[initial]\nkind = \"snapshot\"\ncsv = \"nope.csv\"\nmeta = \"nope.json\"\n", &[]).status.code(), Some(2));
    assert_eq!(relstring(&["simulate"]).status.code(), Some(2));
}

#[test]
fn thm1_with_single_n_gives_one_row() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_in(dir.path(), "thm1", "n_list = [8]\n[thm1]\ndata_samples = 4096\naxis_points = 65\n", &[]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let t = Table::parse_csv(&read(dir.path(), "thm1_rates.csv")).unwrap();
    assert_eq!(t.header, ["n", "sup_error", "ratio"]);
    assert_eq!(t.rows.len(), 1);
    assert_eq!(t.rows[0][2], "");
}

#[test]
fn thm1_rates_are_near_two() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_in(dir.path(), "thm1", "n_list = [8, 16, 32]\n[thm1]\naxis_points = 129\n", &[]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let t = Table::parse_csv(&read(dir.path(), "thm1_rates.csv")).unwrap();
    for row in &t.rows[1..] {
        let r: f64 = row[2].parse().unwrap();
        assert!((r - 2.0).abs() < 0.4, "{r}");
    }
}

#[test]
fn thm1_without_n_list_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_in(dir.path(), "thm1", "experiment = \"thm1\"\n", &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("n_list"));
}

#[test]
fn mismatched_experiment_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_in(dir.path(), "validate", CONSTANT, &[]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn validate_passes_and_detects_an_injected_fault() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("a").display().to_string();
    let o = relstring(&["validate", "--out", &out]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let out = dir.path().join("b").display().to_string();
    let o = relstring(&["validate", "--out", &out, "--inject-fault"]);
    assert_eq!(o.status.code(), Some(1));
    let report = parse_report(&std::fs::read_to_string(dir.path().join("b/report.json")).unwrap()).unwrap();
    let failed: Vec<_> = report.results.iter().filter(|r| !r.pass).map(|r| r.name.as_str()).collect();
    assert_eq!(failed, ["decomposition"]);
}

#[test]
fn fixed_seed_gives_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, seed: &str| {
        let out = dir.path().join(name).display().to_string();
        assert_eq!(relstring(&["validate", "--out", &out, "--seed", seed]).status.code(), Some(0));
        std::fs::read(dir.path().join(name).join("report.json")).unwrap()
    };
    assert_eq!(run("a", "11"), run("b", "11"));
    assert_ne!(run("a", "11"), run("c", "12"));

    let (d1, d2) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    run_in(d1.path(), "simulate", CONSTANT, &[]);
    run_in(d2.path(), "simulate", CONSTANT, &[]);
    for name in ["report.json", "snapshot_001.csv", "snapshot_001.json"] {
        assert_eq!(read(d1.path(), name), read(d2.path(), name), "{name}");
    }
}

#[test]
fn tol_flag_overrides_the_main_tolerance() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_in(dir.path(), "simulate", "[grid]\nsamples = 64\n[initial]\nkind = \"smooth_m\"\nd = 2\n", &["--tol", "0"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn small_completion_runs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"
experiment = "completion"
[completion]
d = 2
samples = 1024
n_values = [8.0, 16.0, 32.0]
extrapolation = [256.0, 512.0]
probe_tol = 2e-2
# coarse grids: plumbing check, not the pinned run
[tolerances]
identity = 1e-2
slope_band = [0.6, 1.3]
"#;
    let o = run_in(dir.path(), "completion", cfg, &[]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let report = parse_report(&read(dir.path(), "report.json")).unwrap();
    let flag = report.results.iter().find(|r| r.name == "non_relativistic_limit").unwrap();
    assert!(flag.pass);
    let t = Table::parse_csv(&read(dir.path(), "convergence_table.csv")).unwrap();
    assert_eq!(t.header, ["n", "g_id", "t", "gap"]);
    assert!(!t.rows.is_empty());
    t.floats("gap").unwrap();
}

#[test]
fn oversized_galilean_shift_is_skipped_with_reason() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"
[completion]
d = 2
samples = 1024
n_values = [8.0, 16.0]
extrapolation = [256.0, 512.0]
probe_tol = 2e-2
galilean_shift = 0.5
"#;
    let o = run_in(dir.path(), "completion", cfg, &[]);
    let report = parse_report(&read(dir.path(), "report.json")).unwrap();
    let g = report.results.iter().find(|r| r.name == "galilean_subtest").unwrap();
    assert!(g.pass && g.detail["skipped"].is_string(), "{:?} {}", g, o.status);
}
