//! End-to-end checks of the installed binary: exit codes, output
//! determinism, the CSV contract and the config-file round trip.

use std::fs;
use std::process::{Command, Output};

use cbh_cli::{OutputFormat, SweepMode, SweepSpec, CSV_HEADER};
use cbh_core::solver::SolverConfig;
use cbh_core::thermo::ReferenceFrequencies;
use cbh_core::SystemParams;

fn cbh(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cbh"))
        .args(args)
        .output()
        .expect("binary should spawn")
}

fn stdout_of(out: &Output) -> String {
    assert!(
        out.status.success(),
        "expected success, stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).expect("stdout should be utf-8")
}

#[test]
fn sideband_order_out_of_range_exits_two() {
    let out = cbh(&["steady", "--k", "3"]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("--k"), "stderr should name the flag: {stderr}");
}

#[test]
fn missing_subcommand_exits_two() {
    let out = cbh(&[]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn steady_json_reports_the_solved_point() {
    let out = cbh(&[
        "steady", "--k", "1", "--g", "1.0", "--kappa", "0.1", "--mth", "0.5", "--nth", "0.5",
        "--json",
    ]);
    let text = stdout_of(&out);
    let point: serde_json::Value = serde_json::from_str(&text).expect("valid json");
    assert_eq!(point["m_th"], 0.5);
    assert_eq!(point["n_th"], 0.5);
    let ea = point["ea_over_omega0"].as_f64().unwrap();
    assert!(ea > 0.0 && ea < 1.0, "excited population {ea}");
    assert!(point["e_int"].as_f64().unwrap().abs() < 1e-8);
    assert!(point["n_fock_used"].as_u64().unwrap() >= 8);
}

#[test]
fn sweep_without_timestamp_is_byte_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let path = dir.path().join(name);
        let out = cbh(&[
            "sweep",
            "--k",
            "1",
            "--grid",
            "0.2:0.8:0.2",
            "--no-timestamp",
            "--out",
            path.to_str().unwrap(),
        ]);
        stdout_of(&out);
        fs::read(&path).unwrap()
    };
    let first = run("a.csv");
    let second = run("b.csv");
    assert_eq!(first, second, "identical runs should produce identical bytes");

    let text = String::from_utf8(first).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some(CSV_HEADER));
    assert_eq!(lines.count(), 4, "one row per grid point");
    assert!(!text.contains('\r'));
}

#[test]
fn sweep_with_timestamp_prepends_a_generated_comment() {
    let out = cbh(&["sweep", "--k", "1", "--grid", "0.5:0.5:0.1"]);
    let text = stdout_of(&out);
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# generated "));
    assert_eq!(lines.next(), Some(CSV_HEADER));
}

#[test]
fn config_file_reproduces_the_flag_driven_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let spec = SweepSpec {
        mode: SweepMode::CommonOccupation,
        params: SystemParams::new(1, 1.0, 0.1, 0.0, 0.0).unwrap(),
        grid: "0.3:0.9:0.3".parse().unwrap(),
        fixed_n: Vec::new(),
        freqs: ReferenceFrequencies::default(),
        solver: SolverConfig::default(),
        fd_step: None,
        format: OutputFormat::Csv,
        out: None,
    };
    let config_path = dir.path().join("sweep.toml");
    fs::write(&config_path, toml::to_string(&spec).unwrap()).unwrap();

    let from_config = dir.path().join("config.csv");
    let out = cbh(&[
        "sweep",
        "--config",
        config_path.to_str().unwrap(),
        "--no-timestamp",
        "--out",
        from_config.to_str().unwrap(),
    ]);
    stdout_of(&out);

    let from_flags = dir.path().join("flags.csv");
    let out = cbh(&[
        "sweep",
        "--k",
        "1",
        "--grid",
        "0.3:0.9:0.3",
        "--no-timestamp",
        "--out",
        from_flags.to_str().unwrap(),
    ]);
    stdout_of(&out);

    assert_eq!(fs::read(&from_config).unwrap(), fs::read(&from_flags).unwrap());
}

#[test]
fn plot_script_references_the_data_file() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("curve.csv");
    let script = dir.path().join("curve.gp");
    let out = cbh(&[
        "sweep",
        "--k",
        "1",
        "--grid",
        "0.4:0.8:0.4",
        "--no-timestamp",
        "--out",
        data.to_str().unwrap(),
        "--plot-script",
        script.to_str().unwrap(),
    ]);
    stdout_of(&out);
    let text = fs::read_to_string(&script).unwrap();
    assert!(text.contains("plot"));
    assert!(text.contains("curve.csv"));
}

#[test]
fn preset_carrier_emits_the_full_grid() {
    let out = cbh(&["preset", "carrier", "--no-timestamp"]);
    let text = stdout_of(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some(CSV_HEADER));
    assert_eq!(lines.count(), 60);
}

#[test]
fn oracle_table_ratio_settles_near_one_half() {
    let out = cbh(&["oracle", "--grid", "0.5:1.0:0.25"]);
    let text = stdout_of(&out);
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("m_th,c_atom_numeric,c_atom_analytic,ratio")
    );
    for line in lines {
        let ratio: f64 = line.rsplit(',').next().unwrap().parse().unwrap();
        assert!((ratio - 0.5).abs() < 5e-3, "ratio {ratio} in line {line}");
    }
}

#[test]
fn scan_kappa_reports_a_lower_bound_when_the_grid_top_still_cools() {
    let out = cbh(&[
        "scan-kappa",
        "--k",
        "1",
        "--g",
        "1.0",
        "--grid",
        "0.05:0.1:0.05",
    ]);
    let text = stdout_of(&out);
    assert!(text.contains("largest kappa/gamma with a field cooling region: 0.100"));
    assert!(text.contains("(lower bound)"));
}

#[test]
fn json_format_emits_a_parsable_record_array() {
    let out = cbh(&[
        "sweep",
        "--k",
        "2",
        "--g",
        "0.2",
        "--grid",
        "0.5:1.0:0.5",
        "--format",
        "json",
    ]);
    let text = stdout_of(&out);
    let records: serde_json::Value = serde_json::from_str(&text).expect("valid json");
    let arr = records.as_array().expect("array of records");
    assert_eq!(arr.len(), 2);
    assert!(arr[0].get("note").is_none(), "clean rows carry no note");
    assert!(arr[0]["c_field"].as_f64().unwrap() < 0.0);
}