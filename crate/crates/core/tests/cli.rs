use std::path::Path;
use std::process::{Command, Output};

use uwoc_relay::cli::config::{HopSpec, RunConfig};
use uwoc_relay::cli::report::{format_sig, CSV_HEADER};
use uwoc_relay::cli::{cmd_eval, cmd_sweep, DetectionName, Grid, Metric, Table};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_uwoc-relay")).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn csv_rows(text: &str) -> Vec<Vec<String>> {
    text.lines().skip(1).map(|l| l.split(',').map(str::to_string).collect()).collect()
}

fn column(rows: &[Vec<String>], idx: usize) -> Vec<f64> {
    rows.iter().map(|r| r[idx].parse().unwrap()).collect()
}

fn golden(name: &str) -> String {
    std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)).unwrap()
}

#[test]
fn significant_figure_formatting() {
    assert_eq!(format_sig(0.0509669123, 6), "0.0509669");
    assert_eq!(format_sig(30.0, 6), "30");
    assert_eq!(format_sig(-2.5, 6), "-2.5");
    assert_eq!(format_sig(8.554191e-6, 6), "8.55419e-06");
    assert_eq!(format_sig(1234567.0, 6), "1.23457e+06");
    assert_eq!(format_sig(123456.4, 6), "123456");
    assert_eq!(format_sig(0.99999999, 6), "1");
    assert_eq!(format_sig(0.0, 6), "0");
}

#[test]
fn sweep_csv_matches_golden_file() {
    let out = run(&["sweep", "--metric", "outage", "--grid", "0:50:5"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert_eq!(text, golden("sweep_outage_egg_a_egg_b.csv"));
    assert_eq!(text.lines().next().unwrap(), CSV_HEADER);
    let rows = csv_rows(&text);
    assert_eq!(rows.len(), 11);
    assert!(rows.iter().all(|r| r.len() == 10 && r[8] == "true"));
    let exact = column(&rows, 3);
    assert!(exact.windows(2).all(|w| w[1] <= w[0]));
}

#[test]
fn eval_outage_agrees_with_simulation() {
    let out = run(&["eval", "--metric", "outage", "--mu-db", "30", "--mc-samples", "2000000", "--seed", "5"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let rows = csv_rows(&stdout(&out));
    assert_eq!(rows.len(), 1);
    let (exact, mc, se) =
        (rows[0][3].parse::<f64>().unwrap(), rows[0][5].parse::<f64>().unwrap(), rows[0][6].parse::<f64>().unwrap());
    assert!((exact - mc).abs() < 3.0 * se, "{exact} vs {mc} ± {se}");
}

#[test]
fn degenerate_asymptote_is_marked() {
    let out = run(&["eval", "--hop1", "pure_gg", "--hop2", "pure_gg", "--detection", "heterodyne", "--mu-db", "15"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let rows = csv_rows(&stdout(&out));
    assert_eq!(rows[0][4], "degenerate");
    assert!(rows[0][3].parse::<f64>().unwrap() > 0.0);
    let json: serde_json::Value = serde_json::from_str(&stdout(&run(&[
        "eval",
        "--hop1",
        "pure_gg",
        "--hop2",
        "pure_gg",
        "--detection",
        "heterodyne",
        "--mu-db",
        "15",
        "--format",
        "json",
    ])))
    .unwrap();
    assert!(json["rows"][0]["asymptotic"].is_null());
    assert_eq!(json["rows"][0]["note"], "degenerate");
}

#[test]
fn json_and_csv_carry_the_same_numbers() {
    let base = ["sweep", "--metric", "ber", "--grid", "10:30:10", "--mc-samples", "20000", "--seed", "3"];
    let csv = stdout(&run(&base));
    let json = stdout(&run(&[&base[..], &["--format", "json"]].concat()));
    let table: Table = serde_json::from_str(&json).unwrap();
    let rows = csv_rows(&csv);
    assert_eq!(rows.len(), table.rows.len());
    for (c, j) in rows.iter().zip(&table.rows) {
        let cells = [Some(j.mu_db), Some(j.mu2_db), j.exact, j.asymptotic, j.mc_estimate, j.mc_stderr, j.rel_gap];
        for (cell, value) in c[1..8].iter().zip(cells) {
            assert_eq!(*cell, value.map(|v| format_sig(v, 6)).unwrap_or_default());
        }
    }
    assert_eq!(table.modulation.as_deref(), Some("ook"));
}

#[test]
fn unbalanced_bpsk_beats_ook_rowwise() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("unbalanced.toml");
    std::fs::write(
        &path,
        r#"
metric = "ber"
mu2_offset_db = 6.989700043360188

[hop1]
fixture = "egg_a"
detection = "heterodyne"
avg_snr_db = 0.0

[hop2]
fixture = "egg_b"
detection = "heterodyne"
avg_snr_db = 0.0
"#,
    )
    .unwrap();
    let path = path.to_str().unwrap();
    let bpsk = stdout(&run(&["sweep", "--config", path, "--modulation", "bpsk", "--grid", "0:50:5"]));
    let ook =
        stdout(&run(&["sweep", "--config", path, "--detection", "im-dd", "--modulation", "ook", "--grid", "0:50:5"]));
    let (b, o) = (column(&csv_rows(&bpsk), 3), column(&csv_rows(&ook), 3));
    assert_eq!(b.len(), 11);
    assert!(b.iter().zip(&o).all(|(b, o)| b <= o), "{b:?}\n{o:?}");
    assert!(csv_rows(&bpsk)
        .iter()
        .all(|r| (r[2].parse::<f64>().unwrap() - r[1].parse::<f64>().unwrap() - 6.9897).abs() < 1e-3));
}

#[test]
fn heterodyne_twin_sweep_beats_im_dd() {
    let mut cfg = RunConfig { sweep: Grid { start_db: 5.0, stop_db: 50.0, step_db: 5.0 }, ..RunConfig::default() };
    let imdd = cmd_sweep(&cfg, None).unwrap();
    cfg.hop1.detection = DetectionName::Heterodyne;
    cfg.hop2.detection = DetectionName::Heterodyne;
    let het = cmd_sweep(&cfg, None).unwrap();
    assert_eq!(het.monotone, Some(true));
    for (h, i) in het.rows.iter().zip(&imdd.rows) {
        assert!(h.exact.unwrap() <= i.exact.unwrap(), "{} dB", h.mu_db);
    }
}

#[test]
fn capacity_and_moment_sweeps_are_flagged_monotone() {
    let cfg = RunConfig {
        metric: Metric::Capacity,
        sweep: Grid { start_db: 0.0, stop_db: 40.0, step_db: 10.0 },
        ..RunConfig::default()
    };
    let t = cmd_sweep(&cfg, None).unwrap();
    assert_eq!(t.monotone, Some(true));
    let t = cmd_sweep(&RunConfig { metric: Metric::Moments, ..cfg }, None).unwrap();
    assert_eq!(t.rows.len(), 15);
    assert!(t.rows.iter().filter(|r| r.metric == "af2").all(|r| r.exact.unwrap() >= 0.0));
}

#[test]
fn config_file_and_flag_overrides() {
    let cfg = RunConfig {
        hop1: HopSpec {
            fixture: None,
            omega: Some(0.25),
            lambda: Some(0.45),
            a: Some(1.8),
            b: Some(0.65),
            c: Some(1.2),
            detection: DetectionName::ImDd,
            mu_db: Some(30.0),
            avg_snr_db: None,
        },
        ..RunConfig::default()
    };
    let text = toml::to_string(&cfg).unwrap();
    assert_eq!(RunConfig::from_toml(&text).unwrap(), cfg);
    let explicit = cmd_eval(&cfg, None).unwrap();
    let by_name =
        cmd_eval(&RunConfig { hop1: HopSpec::fixture("egg_a", DetectionName::ImDd, 30.0), ..cfg.clone() }, None)
            .unwrap();
    assert_eq!(explicit.rows[0].exact, by_name.rows[0].exact);

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.toml");
    std::fs::write(&path, text).unwrap();
    let out = run(&["eval", "--config", path.to_str().unwrap(), "--format", "json"]);
    let table: Table = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(table.rows[0].exact, explicit.rows[0].exact);
}

#[test]
fn fixture_directory_override() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("harbour.json"),
        r#"{"name": "harbour", "omega": 0.3, "lambda": 0.5, "a": 1.5, "b": 0.6, "c": 1.1}"#,
    )
    .unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_uwoc-relay"))
        .args(["eval", "--hop1", "harbour", "--mu-db", "25"])
        .env("UWOC_FIXTURE_DIR", dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(csv_rows(&stdout(&out))[0][3].parse::<f64>().unwrap() > 0.0);
}

#[test]
fn invalid_configurations_exit_with_messages() {
    let out = run(&["sweep", "--grid", "10:0:5"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("grid is empty"));
    let out = run(&["sweep", "--grid", "0:10:0"]);
    assert!(stderr(&out).contains("step must be > 0"));
    let out = run(&["eval", "--metric", "ber", "--modulation", "1024-qam"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("unknown modulation") && stderr(&out).contains("16-qam"));
    let out = run(&["eval", "--hop1", "river"]);
    assert!(stderr(&out).contains("unknown fixture"));
    let out = run(&["sweep", "--mu2-db", "10"]);
    assert!(stderr(&out).contains("--mu2-offset-db"));
    let out = run(&["eval", "--metric", "ber", "--modulation", "ook", "--detection", "heterodyne"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("exact:"), "mismatch is reported on the row: {}", stdout(&out));
}

#[test]
fn list_modulations_and_extensions() {
    let out = stdout(&run(&["list-modulations"]));
    assert_eq!(out.lines().count(), 8);
    assert!(out.contains("\nook,1,0.5,1,0.25,im_dd\n"));
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("extra.ndjson");
    std::fs::write(
        &path,
        r#"{"name": "bfsk-nc", "delta": 1.0, "p": 1.0, "n_terms": 1, "q": [0.5], "valid_detection": "both"}"#,
    )
    .unwrap();
    let out = stdout(&run(&["list-modulations", "--modulations", path.to_str().unwrap(), "--format", "json"]));
    let list: Vec<serde_json::Value> = serde_json::from_str(&out).unwrap();
    assert_eq!(list.len(), 8);
    let out = run(&["eval", "--metric", "ber", "--modulation", "bfsk-nc", "--modulations", path.to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
}

#[test]
fn validate_catches_injected_fault() {
    let out = run(&["validate", "--mc-samples", "100000", "--inject-fault", "wrong-sign-kernel"]);
    assert_eq!(out.status.code(), Some(1));
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(report["passed"], false);
    let failed: Vec<&str> = report["checks"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["passed"] == false)
        .map(|c| c["name"].as_str().unwrap())
        .collect();
    assert!(failed.iter().any(|n| n.starts_with("e2e_cdf_vs_mc")), "{failed:?}");
    assert!(stderr(&out).contains("FAILED e2e_cdf_vs_mc"));
    assert!(!stdout(&out).contains("wall_time"));
}
