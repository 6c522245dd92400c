use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use cylsim_cli::csv::BIPARTITE_HEADER;

fn cylsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cylsim"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn out_arg(dir: &Path) -> &str {
    dir.to_str().unwrap()
}

#[test]
fn bipartite_rows_oracle_and_rerun() {
    let tmp = tempfile::tempdir().unwrap();
    let a = tmp.path().join("a");
    let run = || {
        let o = cylsim(&[
            "bipartite", "--kind", "photon", "--trials", "20000", "--angles", "25", "--seed", "42",
            "--out", out_arg(&a),
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        (
            fs::read_to_string(a.join("bipartite.csv")).unwrap(),
            fs::read(a.join("bipartite_report.json")).unwrap(),
        )
    };
    let first = run();
    let second = run();
    assert!(first == second, "rerun changed data files");
    let mut lines = first.0.lines();
    assert_eq!(lines.next(), Some(BIPARTITE_HEADER));
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 25);
    for r in &rows {
        assert_eq!(r.len(), 16);
        assert!((r[12] - (2.0 * r[0]).cos()).abs() < 1e-12);
    }
}

#[test]
fn manifest_lists_every_output() {
    let tmp = tempfile::tempdir().unwrap();
    let svg = tmp.path().join("fringe.svg");
    let o = cylsim(&[
        "swap", "--groups", "200", "--reps", "4", "--seed", "3", "--svg", svg.to_str().unwrap(),
        "--out", out_arg(tmp.path()),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(tmp.path().join("swap_manifest.json")).unwrap();
    let m: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(m["subcommand"], "swap");
    assert_eq!(m["seed"], 3);
    assert_eq!(m["config"]["groups"], 200);
    assert!(m["duration_secs"].as_f64().unwrap() >= 0.0);
    let outputs: Vec<&str> = m["outputs"].as_array().unwrap().iter().map(|v| v.as_str().unwrap()).collect();
    assert_eq!(outputs.len(), 4);
    for p in outputs {
        assert!(Path::new(p).exists(), "{p}");
    }
    let svg = fs::read_to_string(svg).unwrap();
    assert_eq!(svg.matches("<circle").count(), 26);

    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("swap_report.json")).unwrap()).unwrap();
    assert_eq!(report["report"]["experiment"], "pbwz");
    assert!(report["manifest"].get("duration_secs").is_none());
}

#[test]
fn efficiency_table_and_reference_lines() {
    let tmp = tempfile::tempdir().unwrap();
    let o = cylsim(&["efficiency", "--trials", "5000", "--angles", "3", "--out", out_arg(tmp.path())]);
    assert!(o.status.success());
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert!(stdout.contains("0.81831"));
    assert!(stdout.contains("0.63662"));
    assert!(stdout.contains("0.77797"));
    assert!(stdout.contains("Clauser bound C = 0.828"));
    assert!(stdout.contains("cylinder     C = 0.778"));
}

#[test]
fn ghz_rows() {
    let tmp = tempfile::tempdir().unwrap();
    let o = cylsim(&["ghz", "--groups", "20000", "--out", out_arg(tmp.path())]);
    assert!(o.status.success());
    let csv = fs::read_to_string(tmp.path().join("ghz.csv")).unwrap();
    assert_eq!(csv.lines().count(), 19);
    let fourfold = |label: &str| -> u64 {
        let row = csv.lines().find(|l| l.starts_with(&format!("{label},"))).unwrap();
        row.rsplit(',').next().unwrap().parse().unwrap()
    };
    assert!(fourfold("HVVH") > 0);
    assert_eq!(fourfold("HVHV"), 0);
}

#[test]
fn chsh_reports_four_settings() {
    let tmp = tempfile::tempdir().unwrap();
    let o = cylsim(&["chsh", "--trials", "50000", "--out", out_arg(tmp.path())]);
    assert!(o.status.success());
    let csv = fs::read_to_string(tmp.path().join("chsh.csv")).unwrap();
    assert_eq!(csv.lines().count(), 5);
    assert!(cylsim(&["chsh", "--angles", "0,45,22.5", "--out", out_arg(tmp.path())])
        .status
        .code()
        == Some(2));
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = out_arg(tmp.path());
    assert_eq!(cylsim(&["bipartite", "--kind", "muon"]).status.code(), Some(2));
    assert_eq!(cylsim(&["nonsense"]).status.code(), Some(2));
    assert_eq!(cylsim(&["bipartite", "--trials", "0", "--out", dir]).status.code(), Some(2));
    assert_eq!(cylsim(&["bipartite", "--angles", "1,x", "--out", dir]).status.code(), Some(2));
    assert_eq!(cylsim(&["ghz", "--threads", "0", "--out", dir]).status.code(), Some(2));
    assert_eq!(cylsim(&["ghz", "--config", "/nonexistent.cfg"]).status.code(), Some(2));
    assert_eq!(cylsim(&["--help"]).status.code(), Some(0));

    // output path is a regular file
    let file = tmp.path().join("blocker");
    fs::write(&file, "x").unwrap();
    let o = cylsim(&["ghz", "--groups", "10", "--out", file.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    assert!(!o.stderr.is_empty());
}

#[test]
fn config_file_with_flag_override() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("run.cfg");
    fs::write(&cfg, "# bipartite defaults\ntrials = 3000\nangles = 4\nseed = 5\n").unwrap();
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    let o = cylsim(&["bipartite", "--config", cfg.to_str().unwrap(), "--angles", "6", "--out", out_arg(&a)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let o = cylsim(&[
        "bipartite", "--trials", "3000", "--angles", "6", "--seed", "5", "--out", out_arg(&b),
    ]);
    assert!(o.status.success());
    let csv = fs::read_to_string(a.join("bipartite.csv")).unwrap();
    assert_eq!(csv.lines().count(), 7);
    assert_eq!(csv, fs::read_to_string(b.join("bipartite.csv")).unwrap());
}
