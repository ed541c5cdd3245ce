use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use pauli_cli::ExperimentConfig;

fn pauli(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pauli")).args(args).arg("--out").arg(out).output().expect("spawn pauli")
}

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn rows(path: &Path) -> Vec<csv::StringRecord> {
    csv::Reader::from_path(path).unwrap().records().map(Result::unwrap).collect()
}

#[test]
fn gaussian_toeplitz_column_is_powers_of_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config("gaussian_toeplitz.json");
    let out = pauli(&["toeplitz", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let hash = ExperimentConfig::load(&cfg).unwrap().hash();
    let rows = rows(&dir.path().join("toeplitz.csv"));
    assert_eq!(rows.len(), 41);
    for r in &rows {
        assert_eq!(&r[0], hash);
        let l: i32 = r[1].parse().unwrap();
        let lambda: f64 = r[2].parse().unwrap();
        assert!((lambda - 0.5f64.powi(l + 1)).abs() < 1e-10, "l={l}: {lambda}");
    }
}

#[test]
fn constants_report_ordered_k1_k2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config("constants.json");
    let out = pauli(&["constants", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let rows = rows(&dir.path().join("constants.csv"));
    assert_eq!(rows.len(), 4);
    let (k1, k2): (f64, f64) = (rows[0][3].parse().unwrap(), rows[0][4].parse().unwrap());
    assert!(k1 < k2);
    assert!((k1 - 0.2741257).abs() < 1e-6);
}

#[test]
fn same_config_gives_identical_bytes() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let cfg = config("constants.json");
    for dir in [&a, &b] {
        let out = pauli(&["inequalities", "--config", cfg.to_str().unwrap(), "--threads", "2"], dir.path());
        assert_eq!(out.status.code(), Some(0));
    }
    let read = |d: &tempfile::TempDir| fs::read(d.path().join("inequalities.csv")).unwrap();
    assert_eq!(read(&a), read(&b));
}

#[test]
fn invalid_configs_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let text = fs::read_to_string(config("constants.json")).unwrap();
    let cases = [
        (text.replace("\"b0\": 1.0", "\"b0\": 0.0"), "b0"),
        (text.replace("\"q_max\"", "\"levels\""), "line"),
        (text.replace("\"half_width\": 16.0", "\"half_width\": 3.0"), "constants_grid"),
        (text.replace("\"nodes\": 65536", "\"nodes\": 8"), "constants_grid"),
        ("{ not json".to_string(), "line 1"),
    ];
    for (i, (body, needle)) in cases.iter().enumerate() {
        let path = dir.path().join(format!("bad{i}.json"));
        fs::write(&path, body).unwrap();
        let out = pauli(&["constants", "--config", path.to_str().unwrap()], dir.path());
        let stderr = String::from_utf8_lossy(&out.stderr);
        assert_eq!(out.status.code(), Some(2), "case {i}: {stderr}");
        assert!(stderr.contains(needle), "case {i}: {stderr}");
    }
}

#[test]
fn usage_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(pauli(&["toeplitz"], dir.path()).status.code(), Some(2));
    assert_eq!(pauli(&["nonsense"], dir.path()).status.code(), Some(2));
    assert_eq!(pauli(&["toeplitz", "--config", "/nonexistent.json"], dir.path()).status.code(), Some(2));
    let spectrum_without_grids = config("constants.json");
    let out = pauli(&["spectrum", "--config", spectrum_without_grids.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn help_documents_csv_columns() {
    let out = Command::new(env!("CARGO_BIN_EXE_pauli")).args(["spectrum", "--help"]).output().unwrap();
    let help = String::from_utf8_lossy(&out.stdout);
    assert!(help.contains("counts.csv: r, lower, direct, effective, upper, ratio, within"));
}

#[test]
fn gaussian_spectrum_withholds_sandwich_verdict() {
    let dir = tempfile::tempdir().unwrap();
    let text = fs::read_to_string(config("sandwich.json"))
        .unwrap()
        .replace(r#"{ "kind": "power_law", "alpha": 2.0, "u0": 1.0 }"#, r#"{ "kind": "gaussian", "rate": 0.5, "amplitude": 1.0 }"#)
        .replace("\"l_max\": 60", "\"l_max\": 4");
    let path = dir.path().join("gauss.json");
    fs::write(&path, text).unwrap();
    let out = pauli(&["spectrum", "--config", path.to_str().unwrap()], dir.path());
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("verdict withheld"), "{stdout}");
    let rows = rows(&dir.path().join("counts.csv"));
    assert!(rows.iter().all(|r| &r[7] == "withheld"));
}
