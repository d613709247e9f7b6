use dcsk_cli::output::{read_analyze, read_compare, read_simulate};
use dcsk_core::SchemeId;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn presets() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../presets")
}

fn dcsk(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dcsk-nc"))
        .args(args)
        .env("DCSK_WORKERS", "2")
        .output()
        .expect("binary runs")
}

fn preset(name: &str) -> String {
    presets().join(name).display().to_string()
}

fn small_config(dir: &Path, extra: &str) -> String {
    let path = dir.join("small.ini");
    std::fs::write(
        &path,
        format!(
            "[scenario]\nscheme = timemux2\nbeta = 25\nebn0_db = 0:10:5\n{extra}\n\
             [hop1_a]\navg_gain_1 = 0.7\navg_gain_2 = 0.89\ndelay = 3\n\
             [run]\nmin_errors = 50\nmax_bits = 200000\nmaster_seed = 5\n"
        ),
    )
    .unwrap();
    path.display().to_string()
}

#[test]
fn all_presets_parse() {
    for entry in std::fs::read_dir(presets()).unwrap() {
        let path = entry.unwrap().path();
        dcsk_cli::config::ExperimentConfig::load(&path)
            .unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    }
}

#[test]
fn simulate_preset_rows_follow_grid() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sim.csv");
    let o = dcsk(&[
        "simulate",
        "--config",
        &preset("multipath-beta25.ini"),
        "--grid",
        "0:10:5",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let recs = read_simulate(std::fs::File::open(&out).unwrap()).unwrap();
    assert_eq!(recs.len(), 3);
    assert!(recs
        .iter()
        .all(|r| r.scheme == SchemeId::TimeMux2 && r.ber_analytic.is_some()));
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("# dcsk-nc simulate format=1\n# config_sha256="));
    assert!(text.contains("\n# seed=1\n"));
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path(), "");
    let run = |workers: &str| {
        Command::new(env!("CARGO_BIN_EXE_dcsk-nc"))
            .args(["simulate", "--config", &cfg, "--seed", "99"])
            .env("DCSK_WORKERS", workers)
            .output()
            .unwrap()
    };
    let (a, b) = (run("1"), run("3"));
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert!(String::from_utf8_lossy(&a.stdout).contains("# seed=99"));
}

#[test]
fn unknown_scheme_is_reported_with_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path(), "").replace("small", "bad");
    std::fs::write(
        &cfg,
        std::fs::read_to_string(dir.path().join("small.ini"))
            .unwrap()
            .replace("timemux2", "bpsk"),
    )
    .unwrap();
    let o = dcsk(&["analyze", "--config", &cfg]);
    assert!(!o.status.success());
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("line 2") && err.contains("scheme"), "{err}");
}

#[test]
fn bad_scheme_flag_is_a_usage_error() {
    let o = dcsk(&["simulate", "--config", "x.ini", "--scheme", "qam"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn compare_without_configs_is_a_usage_error() {
    let o = dcsk(&["compare"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn flagged_points_set_exit_status() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path(), "special_case = all_awgn");
    let o = dcsk(&["simulate", "--config", &cfg, "--grid", "30:30:1"]);
    assert_eq!(o.status.code(), Some(3));
    let recs = read_simulate(&o.stdout[..]).unwrap();
    assert!(recs[0].flagged && recs[0].errors == 0);
}

#[test]
fn analyze_reports_fixed_ratios() {
    let o = dcsk(&["analyze", "--config", &preset("multipath-beta50.ini")]);
    assert!(o.status.success());
    let recs = read_analyze(&o.stdout[..]).unwrap();
    assert_eq!(recs.len(), 6);
    for w in recs.windows(2) {
        assert!(w[1].ber_e2e <= w[0].ber_e2e);
    }
    for r in &recs {
        assert!((r.gamma_f / r.gamma_t - 0.75).abs() < 1e-10);
    }
}

#[test]
fn csv_round_trips_at_printed_precision() {
    let o = dcsk(&["analyze", "--config", &preset("multipath-beta150.ini")]);
    let recs = read_analyze(&o.stdout[..]).unwrap();
    let rows: Vec<Vec<String>> = recs.iter().map(|r| r.to_row()).collect();
    let prov = dcsk_cli::output::Provenance {
        command: "analyze",
        configs: vec![],
        seed: None,
    };
    let again = dcsk_cli::output::render(&prov, &dcsk_cli::output::ANALYZE_COLUMNS, &rows).unwrap();
    assert_eq!(read_analyze(&again[..]).unwrap(), recs);
    let body = |b: &[u8]| {
        String::from_utf8_lossy(b)
            .lines()
            .filter(|l| !l.starts_with('#'))
            .collect::<Vec<_>>()
            .join("\n")
    };
    assert_eq!(body(&o.stdout), body(&again));
}

#[test]
fn compare_covers_requested_schemes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path(), "");
    let o = dcsk(&[
        "compare",
        "--config",
        &cfg,
        "--scheme",
        "pnc1,anc,timemux2,freqmux3",
        "--grid",
        "10:10:1",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let recs = read_compare(&o.stdout[..]).unwrap();
    for s in SchemeId::ALL {
        assert!(recs.iter().any(|r| r.scheme == s && r.metric == "ber_sim"));
        assert!(recs
            .iter()
            .any(|r| r.scheme == s && r.metric == "throughput_sim"));
    }
}

#[test]
fn invalid_worker_count_fails() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path(), "");
    let o = Command::new(env!("CARGO_BIN_EXE_dcsk-nc"))
        .args(["simulate", "--config", &cfg])
        .env("DCSK_WORKERS", "many")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("DCSK_WORKERS"));
}
