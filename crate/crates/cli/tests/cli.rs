use std::path::PathBuf;
use std::process::{Command, Output};

fn region(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../regions").join(name)
}

fn wavesym(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wavesym")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn analyze(name: &str, extra: &[&str]) -> Output {
    let path = region(name);
    let mut args = vec!["analyze", path.to_str().unwrap(), "--n", "64"];
    args.extend_from_slice(extra);
    wavesym(&args)
}

#[test]
fn analyze_exit_codes() {
    for (name, code, first) in [
        ("fig1.region", 10, "observable: no"),
        ("fig2.region", 10, "observable: no"),
        ("fullsquare.region", 0, "observable: yes"),
        ("halfcylinder.region", 0, "observable: yes"),
        ("etaband.region", 10, "observable: no"),
        ("smallproduct.region", 10, "observable: no"),
    ] {
        let o = analyze(name, &[]);
        assert_eq!(o.status.code(), Some(code), "{name}: {}", String::from_utf8_lossy(&o.stderr));
        assert!(stdout(&o).starts_with(first), "{name}: {}", stdout(&o));
    }
}

#[test]
fn syntax_errors_exit_with_input_error() {
    let o = analyze("bad.region", &[]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("line 3"), "{err}");
    assert!(o.stdout.is_empty());
    let o = wavesym(&["analyze", "/nonexistent/region"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn json_output_and_estimate() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let gram = dir.path().join("g.bin");
    let o = analyze(
        "fig1.region",
        &[
            "--format", "json", "--estimate", "--modes", "8", "--seed", "5",
            "--out", out.to_str().unwrap(), "--dump-matrix", gram.to_str().unwrap(),
        ],
    );
    assert_eq!(o.status.code(), Some(10));
    let text = std::fs::read_to_string(&out).unwrap();
    let report = wavesym::report::AnalysisReport::from_json(&text).unwrap();
    assert_eq!(report.seed, Some(5));
    assert_eq!(report.verdict.estimate.as_ref().map(Vec::len), Some(3));
    assert_eq!(&std::fs::read(&gram).unwrap()[..8], b"WVSGRAM1");
}

#[test]
fn repeated_runs_are_identical() {
    let a = analyze("fig2.region", &["--estimate", "--modes", "8", "--seed", "1"]);
    let b = analyze("fig2.region", &["--estimate", "--modes", "8", "--seed", "1"]);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn witness_is_written_or_refused() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("w.csv");
    let fig1 = region("fig1.region");
    let o = wavesym(&["witness", fig1.to_str().unwrap(), "--n", "64", "--out", csv.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let state = wavesym::report::read_wave_csv(&csv).unwrap();
    assert_eq!(state.n(), 64);

    let full = region("fullsquare.region");
    let o = wavesym(&["witness", full.to_str().unwrap(), "--n", "32", "--out", csv.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn simulate_exports_series_and_dump() {
    let dir = tempfile::tempdir().unwrap();
    let series = dir.path().join("s.csv");
    let dump = dir.path().join("t.bin");
    let fig1 = region("fig1.region");
    let o = wavesym(&[
        "simulate", fig1.to_str().unwrap(), "--n", "32", "--witness",
        "--export", series.to_str().unwrap(), "--dump", dump.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&series).unwrap();
    assert!(text.starts_with("t,E,I,observed_cum\n"));
    let d = wavesym::report::read_trajectory_dump(&dump).unwrap();
    assert_eq!(d.n, 32);
    assert_eq!(text.lines().count(), d.nt + 2);

    let o = wavesym(&["simulate", fig1.to_str().unwrap(), "--n", "32", "--random", "4", "--seed", "3", "--force", "1"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn render_writes_images() {
    let dir = tempfile::tempdir().unwrap();
    let pgm = dir.path().join("f.pgm");
    let svg = dir.path().join("f.svg");
    let fig2 = region("fig2.region");
    let o = wavesym(&["render", fig2.to_str().unwrap(), "--n", "32", "--out", pgm.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(std::fs::read(&pgm).unwrap().starts_with(b"P5"));
    let o = wavesym(&[
        "render", fig2.to_str().unwrap(), "--n", "32", "--out", svg.to_str().unwrap(),
        "--characteristics", "4", "--components",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(std::fs::read_to_string(&svg).unwrap().contains("<svg"));
    let o = wavesym(&["render", fig2.to_str().unwrap(), "--out", dir.path().join("f.png").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}
