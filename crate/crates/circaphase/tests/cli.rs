use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::OnceLock;

use circaphase::csv_io::write_csv;
use circaphase::dam::write_dam;
use circaphase_core::{ActivityTrace, LightSchedule, TraceGroup};
use tempfile::TempDir;

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_circaphase"));
    cmd.env_remove("CIRCAPHASE_OUT_DIR").env("RUST_LOG", "error");
    cmd
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn ok(args: &[&str]) -> String {
    let o = run(args);
    assert!(o.status.success(), "{args:?} failed:\n{}", stderr(&o));
    stdout(&o)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// One synthesized pulse experiment shared by every test.
fn synth_dir() -> &'static Path {
    static DIR: OnceLock<TempDir> = OnceLock::new();
    DIR.get_or_init(|| {
        let dir = tempfile::tempdir().unwrap();
        ok(&["synth", "--table1", "--seed", "5", "--out", s(dir.path())]);
        dir
    })
    .path()
}

fn trace(label: &str, bin_minutes: u32, hours: usize, f: impl Fn(f64) -> f64) -> ActivityTrace {
    let per_h = 60 / bin_minutes as usize;
    let values = (0..hours * per_h).map(|i| f(i as f64 / per_h as f64)).collect();
    ActivityTrace::new(label, "2024-01-01T00:00:00", bin_minutes, values).unwrap()
}

fn write_monitor(path: &Path, group: &TraceGroup) {
    let f = std::fs::File::create(path).unwrap();
    write_dam(std::io::BufWriter::new(f), group, &LightSchedule::dark()).unwrap();
}

#[test]
fn synth_is_deterministic() {
    let first = synth_dir();
    let again = tempfile::tempdir().unwrap();
    ok(&["synth", "--table1", "--seed", "5", "--out", s(again.path())]);
    for name in ["ctrl-a.txt", "cp06.txt", "cp20.truth.json", "manifest.json", "scenario.json"] {
        assert_eq!(
            std::fs::read(first.join(name)).unwrap(),
            std::fs::read(again.path().join(name)).unwrap(),
            "{name}"
        );
    }
    assert!(first.join("synth.meta.json").exists());
}

#[test]
fn screen_reports_against_truth_and_sweeps() {
    let syn = synth_dir();
    let out = tempfile::tempdir().unwrap();
    let text = ok(&[
        "screen",
        s(&syn.join("ctrl-a.txt")),
        s(&syn.join("cp09.txt")),
        "--truth",
        s(&syn.join("ctrl-a.truth.json")),
        "--truth",
        s(&syn.join("cp09.truth.json")),
        "--sweep",
        "1,5,10",
        "--out",
        s(out.path()),
    ]);
    assert!(text.contains("ctrl-a: "), "{text}");
    assert!(text.contains("precision"), "{text}");
    for f in ["screening.csv", "screening.json", "screening.meta.json", "threshold_sweep.csv"] {
        assert!(out.path().join(f).exists(), "{f}");
    }
    let sweep = std::fs::read_to_string(out.path().join("threshold_sweep.csv")).unwrap();
    assert_eq!(sweep.lines().count(), 4);
}

#[test]
fn silent_monitor_is_all_inactive() {
    let dir = tempfile::tempdir().unwrap();
    let group = TraceGroup::new("quiet", vec![trace("q-1", 1, 72, |_| 0.0)]).unwrap();
    let file = dir.path().join("quiet.txt");
    write_monitor(&file, &group);
    let out = dir.path().join("out");
    let text = ok(&["screen", s(&file), "--window", "0,72", "--out", s(&out)]);
    assert!(text.contains("0/32 included"), "{text}");
    let csv = std::fs::read_to_string(out.join("screening.csv")).unwrap();
    assert_eq!(csv.lines().skip(1).filter(|l| l.ends_with(",inactive")).count(), 32);
}

#[test]
fn estimate_tracks_rhythm_and_flags_silence() {
    let dir = tempfile::tempdir().unwrap();
    let tau = 24.4;
    let rhythmic = trace("rhythmic", 1, 240, |h| 5.0 + 4.0 * (std::f64::consts::TAU * h / tau).cos());
    let silent = trace("silent", 1, 240, |_| 0.0);
    let file = dir.path().join("pair.csv");
    write_csv(std::fs::File::create(&file).unwrap(), &TraceGroup::new("pair", vec![rhythmic, silent]).unwrap()).unwrap();
    let out = dir.path().join("out");
    let text = ok(&["estimate", s(&file), "--out", s(&out)]);
    assert!(text.contains("phase undefined"), "{text}");
    let line = text.lines().find(|l| l.contains("rhythmic")).unwrap();
    let period: f64 = line.split("period ").nth(1).unwrap().split(' ').next().unwrap().parse().unwrap();
    assert!((period - tau).abs() < 0.1, "{line}");
    assert!(out.join("phase").join("rhythmic.csv").exists());
    assert!(out.join("estimate_summary.csv").exists());
}

#[test]
fn prc_from_manifest_gives_both_curves() {
    let syn = synth_dir();
    let out = tempfile::tempdir().unwrap();
    let text = ok(&["prc", "--manifest", s(&syn.join("manifest.json")), "--out", s(out.path())]);
    assert!(text.contains("RMS gap anf vs acrophase"), "{text}");
    for name in ["prc_anf.csv", "prc_acrophase.csv"] {
        let csv = std::fs::read_to_string(out.path().join(name)).unwrap();
        assert_eq!(csv.lines().count(), 8, "{name}");
        assert!(out.path().join(name.replace(".csv", ".meta.json")).exists());
    }
}

#[test]
fn prc_with_explicit_files() {
    let syn = synth_dir();
    let ctrl = syn.join("ctrl-a.txt");
    let out = tempfile::tempdir().unwrap();
    ok(&["prc", "--control", s(&ctrl), "--method", "anf", "--out", s(out.path())]);
    let csv = std::fs::read_to_string(out.path().join("prc_anf.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1);

    let target = format!("6={}", s(&ctrl));
    ok(&["prc", "--control", s(&ctrl), "--target", &target, "--method", "anf", "--out", s(out.path())]);
    let csv = std::fs::read_to_string(out.path().join("prc_anf.csv")).unwrap();
    let row: Vec<&str> = csv.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[1].parse::<f64>().unwrap(), 0.0);
}

#[test]
fn prc_input_errors() {
    let out = tempfile::tempdir().unwrap();
    let o = run(&["prc", "--control", "/nonexistent/ctrl.txt", "--out", s(out.path())]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    let o = run(&["prc", "--out", s(out.path())]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
}

#[test]
fn corrupt_then_compare() {
    let syn = synth_dir();
    let out = tempfile::tempdir().unwrap();
    ok(&["corrupt", s(&syn.join("cp03.txt")), "--variance", "10", "--seed", "3", "--out", s(out.path())]);
    let noisy = out.path().join("cp03.corrupt.csv");
    assert!(noisy.exists());
    assert!(out.path().join("cp03.corrupt.meta.json").exists());
    let text = std::fs::read_to_string(&noisy).unwrap();
    assert!(text.lines().nth(1).unwrap().contains('.'));

    let curves = out.path().join("curves");
    ok(&["prc", "--manifest", s(&syn.join("manifest.json")), "--out", s(&curves)]);
    let (a, b) = (curves.join("prc_anf.csv"), curves.join("prc_acrophase.csv"));
    let summary = ok(&["compare", s(&a), s(&b), "--reference", s(&a), "--out", s(out.path())]);
    assert!(summary.contains("mean |a - ref| 0.000 h"), "{summary}");
    let table = std::fs::read_to_string(out.path().join("compare.csv")).unwrap();
    assert_eq!(table.lines().count(), 8);

    let short: String = std::fs::read_to_string(&a).unwrap().lines().take(4).map(|l| format!("{l}\n")).collect();
    let short_path = out.path().join("short.csv");
    std::fs::write(&short_path, short).unwrap();
    let o = run(&["compare", s(&short_path), s(&b), "--reference", s(&a), "--out", s(out.path())]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(run(&["screen", "--bogus"]).status.code(), Some(1));
    let syn = synth_dir();
    let o = run(&["--workers", "0", "screen", s(&syn.join("ctrl-a.txt")), "--out", "/tmp"]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    assert_eq!(run(&["--version"]).status.code(), Some(0));
}

#[test]
fn coarse_bins_are_a_numerical_failure() {
    let dir = tempfile::tempdir().unwrap();
    let group = TraceGroup::new("hourly", vec![trace("h-1", 60, 240, |h| 5.0 + 4.0 * (h / 24.0 * std::f64::consts::TAU).cos())]).unwrap();
    let file = dir.path().join("hourly.txt");
    write_monitor(&file, &group);
    let o = run(&["estimate", s(&file), "--harmonics", "3", "--zeta", "5", "--out", s(dir.path())]);
    assert_eq!(o.status.code(), Some(3), "{}\n{}", stdout(&o), stderr(&o));
}

#[test]
fn malformed_monitor_line_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let group = TraceGroup::new("m", vec![trace("m-1", 1, 1, |_| 1.0)]).unwrap();
    let file = dir.path().join("m.txt");
    write_monitor(&file, &group);
    let mut text = std::fs::read_to_string(&file).unwrap();
    let mut lines: Vec<String> = text.lines().map(String::from).collect();
    lines[6] = lines[6].replacen("Jan", "Foo", 1);
    text = lines.join("\n");
    std::fs::write(&file, text).unwrap();
    let o = run(&["screen", s(&file), "--window", "0,1", "--out", s(dir.path())]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("m.txt:7:"), "{}", stderr(&o));
}

#[test]
fn output_directory_from_env_and_config() {
    let syn = synth_dir();
    let dir = tempfile::tempdir().unwrap();
    let via_env = dir.path().join("env");
    let o = bin()
        .env("CIRCAPHASE_OUT_DIR", &via_env)
        .args(["screen", s(&syn.join("cp12.txt"))])
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(via_env.join("screening.csv").exists());

    let via_config: PathBuf = dir.path().join("cfg");
    let config = dir.path().join("run.json");
    std::fs::write(&config, serde_json::json!({ "out_dir": via_config, "screening": { "periodogram": { "threshold": 1.0 } } }).to_string()).unwrap();
    ok(&["--config", s(&config), "screen", s(&syn.join("cp12.txt"))]);
    let csv = std::fs::read_to_string(via_config.join("screening.csv")).unwrap();
    let strict = std::fs::read_to_string(via_env.join("screening.csv")).unwrap();
    let count = |t: &str| t.lines().filter(|l| l.ends_with(",included")).count();
    assert!(count(&csv) > count(&strict));
}
