//! End-to-end runs of the `kcopy` binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const TRINE_VALUE: f64 = (1.5 + std::f64::consts::SQRT_2) / 3.0;
const TRINE: &str = r#"{"d":2,"states":[
  {"type":"pure","ket":[[1,0],[0,0]]},
  {"type":"pure","ket":[[0.5,0],[0.8660254037844386,0]]},
  {"type":"pure","ket":[[0.5,0],[-0.8660254037844386,0]]}]}"#;
const BASIS2: &str = r#"{"d":2,"states":[
  {"type":"pure","ket":[[1,0],[0,0]]},
  {"type":"pure","ket":[[0,0],[1,0]]}]}"#;
const BLOCH_EXAMPLES: &str = r#"{"d":2,"states":[
  {"type":"pure","ket":[[1,0],[0,0]]},
  {"type":"mixed","rho":[[[0.5,0],[0,0]],[[0,0],[0.5,0]]]}]}"#;

/// A scratch directory removed when dropped.
struct Scratch(PathBuf);

impl Scratch {
    fn new(tag: &str) -> Self {
        let dir = std::env::temp_dir().join(format!("kcopy-cli-{tag}-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        Self(dir)
    }

    fn file(&self, name: &str, contents: &str) -> PathBuf {
        let path = self.0.join(name);
        std::fs::write(&path, contents).unwrap();
        path
    }

    fn path(&self, name: &str) -> PathBuf {
        self.0.join(name)
    }
}

impl Drop for Scratch {
    fn drop(&mut self) {
        let _ = std::fs::remove_dir_all(&self.0);
    }
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kcopy")).args(args).output().unwrap()
}

fn stdout_ok(args: &[&str]) -> String {
    let out = run(args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

/// Reads the number after `key:` on the first matching line.
fn field(text: &str, key: &str) -> f64 {
    let prefix = format!("{key}:");
    let line = text.lines().find(|l| l.trim_start().starts_with(&prefix)).unwrap_or_else(|| panic!("no {key} in {text}"));
    let rest = line.trim_start()[prefix.len()..].trim();
    rest.split_whitespace().next().unwrap().parse().unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn discr_reports_value_gap_and_margin() {
    let dir = Scratch::new("discr");
    let trine = dir.file("trine.json", TRINE);
    let out = stdout_ok(&["discr", p(&trine), "--k", "2"]);
    assert!((field(&out, "value") - TRINE_VALUE).abs() < 1e-6, "{out}");
    assert!(field(&out, "gap") <= 1e-7, "{out}");
    assert!(out.contains("certificate margin"));
    let gram = stdout_ok(&["discr", p(&trine), "--k", "2", "--gram"]);
    assert!((field(&gram, "value") - TRINE_VALUE).abs() < 1e-6, "{gram}");
    let pgm = stdout_ok(&["discr", p(&trine), "--k", "2", "--pgm-only"]);
    assert!((field(&pgm, "pgm value") - TRINE_VALUE).abs() < 1e-6, "{pgm}");
    let basis = dir.file("basis2.json", BASIS2);
    let out = stdout_ok(&["discr", p(&basis), "--k", "1"]);
    assert!((field(&out, "value") - 1.0).abs() < 1e-6, "{out}");
}

#[test]
fn exact_output_round_trips() {
    let dir = Scratch::new("exact");
    let trine = dir.file("trine.json", TRINE);
    let out = stdout_ok(&["--exact", "discr", p(&trine), "--k", "2", "--pgm-only"]);
    let value = field(&out, "pgm value");
    let printed = out.lines().find(|l| l.starts_with("pgm value:")).unwrap().trim_start_matches("pgm value:").trim();
    assert_eq!(format!("{value:.16e}"), printed);
    assert!((value - TRINE_VALUE).abs() < 1e-12);
}

#[test]
fn bound_routes_by_family() {
    let out = stdout_ok(&["bound", "--family", "pure", "--d", "2", "--N", "4", "--k", "2"]);
    assert!((field(&out, "pure") - 0.75).abs() < 1e-9, "{out}");
    assert!(out.contains("(upper)") && out.contains("exact: 2-design exists at N=4"), "{out}");
    let out = stdout_ok(&["--exact", "bound", "--family", "classical", "--d", "2", "--N", "6", "--k", "5"]);
    assert!((field(&out, "classical") - 2194.0 / 625.0 / 6.0).abs() < 1e-14, "{out}");
    assert!(out.contains("(exact)") && out.contains("2194/625"), "{out}");
    let out = stdout_ok(&["bound", "--family", "dps", "--d", "2", "--N", "4", "--k", "2", "--ell", "1", "--pure"]);
    let v = field(&out, "dps");
    assert!((0.75 - 1e-6..=0.755).contains(&v), "{out}");
    assert!(out.contains("pure states") && out.contains("1 symmetric extension"));
}

#[test]
fn bound_writes_the_relaxation_dump() {
    let dir = Scratch::new("dump");
    let dump = dir.path("rel.dat");
    stdout_ok(&["bound", "--family", "dps", "--d", "2", "--N", "3", "--k", "1", "--ell", "1", "--dump", p(&dump)]);
    assert!(std::fs::metadata(&dump).unwrap().len() > 0);
}

#[test]
fn search_writes_trace_and_best_ensemble() {
    let dir = Scratch::new("search");
    let trace = dir.path("trace.jsonl");
    let best = dir.path("best.json");
    let args = [
        "search", "--class", "pure", "--method", "adam", "--d", "2", "--N", "2", "--k", "1", "--seed", "4",
        "--iterations", "2000", "--restarts", "2", "--out", p(&trace), "--save", p(&best),
    ];
    let out = stdout_ok(&args);
    assert!((field(&out, "value") - 1.0).abs() < 1e-4, "{out}");
    assert_eq!(std::fs::read_to_string(&trace).unwrap().lines().count(), 2);
    // The saved ensemble parses and discriminates as reported.
    let check = stdout_ok(&["discr", p(&best), "--k", "1"]);
    assert!((field(&check, "value") - 1.0).abs() < 1e-4, "{check}");
    // Same flags, same seed, same output.
    assert_eq!(stdout_ok(&args), out);

    let out = stdout_ok(&[
        "search", "--class", "mixed", "--method", "adam", "--d", "2", "--N", "4", "--k", "2", "--seed", "7",
        "--iterations", "2000", "--restarts", "1",
    ]);
    assert!(field(&out, "value") >= 0.790, "{out}");

    let out = stdout_ok(&["search", "--class", "classical", "--method", "grid", "--d", "2", "--N", "3", "--k", "2"]);
    assert!((field(&out, "value") - 5.0 / 6.0).abs() < 1e-6, "{out}");
}

#[test]
fn reproduce_quick_table_passes() {
    let out = run(&["reproduce", "--table", "2", "--budget", "quick", "--format", "csv"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(out.status.success(), "{text}");
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("table,scenario"));
    let rows: Vec<&str> = lines.collect();
    assert!(!rows.is_empty());
    assert!(rows.iter().all(|r| r.contains("\"pass\"") || r.contains("skipped")), "{text}");
}

#[test]
fn export_bloch_maps_states_to_vectors() {
    let dir = Scratch::new("bloch");
    let examples = dir.file("examples.json", BLOCH_EXAMPLES);
    let v: serde_json::Value = serde_json::from_str(&stdout_ok(&["export-bloch", p(&examples)])).unwrap();
    let pts = v["points"].as_array().unwrap();
    let xyz = |i: usize| ["x", "y", "z"].map(|k| pts[i][k].as_f64().unwrap());
    let zero = xyz(0);
    assert!(zero[0].abs() < 1e-12 && zero[1].abs() < 1e-12 && (zero[2] - 1.0).abs() < 1e-12);
    assert!(xyz(1).iter().all(|c| c.abs() < 1e-12));

    let trine = dir.file("trine.json", TRINE);
    let v: serde_json::Value = serde_json::from_str(&stdout_ok(&["export-bloch", p(&trine)])).unwrap();
    let vecs: Vec<[f64; 3]> =
        v["points"].as_array().unwrap().iter().map(|q| ["x", "y", "z"].map(|k| q[k].as_f64().unwrap())).collect();
    for a in &vecs {
        assert!(a[1].abs() < 1e-12);
        assert!((a.iter().map(|c| c * c).sum::<f64>() - 1.0).abs() < 1e-9);
    }
    for i in 0..3 {
        let (a, b) = (vecs[i], vecs[(i + 1) % 3]);
        let cos: f64 = a.iter().zip(&b).map(|(x, y)| x * y).sum();
        assert!((cos + 0.5).abs() < 1e-9, "{cos}");
    }
}

#[test]
fn malformed_input_exits_with_parse_code() {
    let dir = Scratch::new("bad");
    let truncated = dir.file("bad.json", r#"{"d":2"#);
    assert_eq!(run(&["discr", p(&truncated), "--k", "1"]).status.code(), Some(2));
    let wrong_dim = dir.file("dim.json", r#"{"d":3,"states":[{"type":"pure","ket":[[1,0],[0,0]]}]}"#);
    assert_eq!(run(&["discr", p(&wrong_dim), "--k", "1"]).status.code(), Some(2));
    assert_eq!(run(&["discr", p(&dir.path("missing.json")), "--k", "1"]).status.code(), Some(2));
    let qutrit = dir.file("qutrit.json", r#"{"d":3,"states":[{"type":"pure","ket":[[1,0],[0,0],[0,0]]}]}"#);
    assert_eq!(run(&["export-bloch", p(&qutrit)]).status.code(), Some(2));
}
