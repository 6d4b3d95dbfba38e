use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_cavmirror");

const SCENARIO: &str = r#"schema_version = 1
name = "small"
mode = "evolve"

[params]
k = 0.5
alpha = 1.0
beta = 0.5

[times]
over_pi = [0.5, 1.0]
"#;

fn cavmirror(args: &[&str]) -> Output {
    Command::new(BIN).args(args).env_remove("CAVMIRROR_THREADS").output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.display().to_string()
}

fn csv_files(dir: &Path, kind: &str) -> Vec<String> {
    let mut files: Vec<String> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .filter(|f| f.ends_with(".csv") && f.contains(kind))
        .collect();
    files.sort();
    files
}

/// Data rows of a CSV, skipping `#` comments and the column line.
fn rows(path: &Path) -> (String, Vec<Vec<f64>>) {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let columns = lines.next().unwrap().to_string();
    let data = lines.map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
    (columns, data)
}

#[test]
fn list_presets_covers_figures_and_criteria() {
    let o = cavmirror(&["list-presets"]);
    assert!(o.status.success());
    let names: Vec<String> = stdout(&o).lines().map(|l| l.split_whitespace().next().unwrap().to_string()).collect();
    for i in 1..=7 {
        assert!(names.contains(&format!("fig{i}")), "fig{i} missing");
    }
    for i in 1..=13 {
        assert!(names.contains(&format!("acc{i}")), "acc{i} missing");
    }
}

#[test]
fn validate_reports_dims_and_memory() {
    let dir = tempfile::tempdir().unwrap();
    let file = write(dir.path(), "s.toml", SCENARIO);
    let o = cavmirror(&["validate", &file]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.starts_with("ok: small"), "{out}");
    assert!(out.contains("dims") && out.contains("MiB"), "{out}");
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1, "validate must not write outputs");
}

#[test]
fn printed_presets_validate() {
    let dir = tempfile::tempdir().unwrap();
    let o = cavmirror(&["preset", "fig3", "--print"]);
    assert!(o.status.success());
    let file = write(dir.path(), "fig3.toml", &stdout(&o));
    assert!(cavmirror(&["validate", &file]).status.success());
}

#[test]
fn missing_k_is_a_field_level_error() {
    let dir = tempfile::tempdir().unwrap();
    let file = write(dir.path(), "s.toml", &SCENARIO.replace("k = 0.5\n", ""));
    let o = cavmirror(&["validate", &file]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("params.k"), "{}", stderr(&o));
}

#[test]
fn negative_gamma_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let file = write(dir.path(), "s.toml", &SCENARIO.replace("k = 0.5", "k = 0.5\ngamma = -0.2"));
    let o = cavmirror(&["validate", &file]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("params.gamma"), "{}", stderr(&o));
}

#[test]
fn parse_errors_carry_line_context() {
    let dir = tempfile::tempdir().unwrap();
    let file = write(dir.path(), "s.toml", &SCENARIO.replace("alpha = 1.0", "alpha = \"big\""));
    let o = cavmirror(&["validate", &file]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line"), "{}", stderr(&o));
}

#[test]
fn truncation_overflow_names_mode_and_dim() {
    let dir = tempfile::tempdir().unwrap();
    let file = write(dir.path(), "s.toml", &format!("{SCENARIO}\n[truncation]\nfield = 2\nmirror = 4\n"));
    let o = cavmirror(&["run", &file, "--out", &dir.path().join("out").display().to_string()]);
    assert!(!o.status.success());
    let err = stderr(&o);
    assert!(err.contains("field mode needs dim >=") && err.contains("mirror mode needs dim >="), "{err}");
    assert!(!dir.path().join("out").exists());
}

#[test]
fn unknown_preset_fails() {
    let o = cavmirror(&["preset", "fig99"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn fig1_entropy_returns_to_zero_at_two_pi() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().display().to_string();
    let o = cavmirror(&["preset", "fig1", "--out", &out]);
    assert!(o.status.success(), "{}", stderr(&o));
    let files = csv_files(dir.path(), "entropy");
    assert_eq!(files.len(), 3, "{files:?}");
    for f in files {
        let (columns, data) = rows(&dir.path().join(&f));
        assert_eq!(columns, "t,S");
        assert_eq!(data.len(), 200);
        let last = data.last().unwrap();
        assert!((last[0] - 2.0 * std::f64::consts::PI).abs() < 1e-12);
        assert!(last[1] <= 1e-8, "{f}: S(2π) = {}", last[1]);
    }
}

fn wigner_grids(preset: &str, expected: usize) {
    let dir = tempfile::tempdir().unwrap();
    let o = cavmirror(&["preset", preset, "--out", &dir.path().display().to_string()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let files = csv_files(dir.path(), "wigner");
    assert_eq!(files.len(), expected, "{files:?}");
    for f in files {
        let text = std::fs::read_to_string(dir.path().join(&f)).unwrap();
        assert!(text.contains("# k = ") && text.contains("# grid_x = "), "{f}: header lacks parameters");
        let (columns, data) = rows(&dir.path().join(&f));
        assert_eq!(columns, "x,y,W");
        assert!(data.iter().all(|r| r.len() == 3 && r[2].is_finite()));
        assert!(data.iter().any(|r| r[2] < 0.0), "{f}: expected interference fringes");
    }
}

#[test]
fn fig3_writes_three_wigner_grids() {
    wigner_grids("fig3", 3);
}

#[test]
fn fig7_writes_four_wigner_grids() {
    wigner_grids("fig7", 4);
}

fn run_to(dir: &Path, preset: &str, threads: &str) -> Vec<(String, Vec<u8>)> {
    let o = Command::new(BIN)
        .args(["preset", preset, "--out", &dir.display().to_string()])
        .env("CAVMIRROR_THREADS", threads)
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    csv_files(dir, "")
        .into_iter()
        .map(|f| {
            let bytes = std::fs::read(dir.join(&f)).unwrap();
            (f, bytes)
        })
        .collect()
}

#[test]
fn outputs_are_bit_identical_across_runs_and_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    for preset in ["fig3", "fig4"] {
        let a = run_to(&dir.path().join(format!("{preset}a")), preset, "1");
        let b = run_to(&dir.path().join(format!("{preset}b")), preset, "4");
        assert!(!a.is_empty());
        assert_eq!(a, b, "{preset} differs between runs");
    }
}

#[test]
fn bad_thread_count_is_rejected() {
    let o = Command::new(BIN).arg("list-presets").env("CAVMIRROR_THREADS", "zero").output().unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn run_summary_reports_losses_and_timing() {
    let dir = tempfile::tempdir().unwrap();
    let file = write(dir.path(), "s.toml", SCENARIO);
    let o = cavmirror(&["run", &file, "--out", &dir.path().join("out").display().to_string()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("truncation loss") && out.contains(" s"), "{out}");
    assert!(!csv_files(&dir.path().join("out"), "state").is_empty(), "{out}");
}
