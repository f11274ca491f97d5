use std::process::Command;

use polariton_core::cli::{emit, parse_config, Format, Output, Table};
use proptest::prelude::*;
use serde_json::{json, Value};

fn polariton(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_polariton")).args(args).output().expect("binary runs")
}

#[test]
fn repeated_runs_are_byte_identical() {
    let args = ["merit-sweep", "--n", "12", "--detuning-hz", "0", "--a-list", "1e-6,2e-6,4e-6"];
    let first = polariton(&args);
    assert!(first.status.success(), "{}", String::from_utf8_lossy(&first.stderr));
    let again = polariton(&args);
    let mut threaded = args.to_vec();
    threaded.extend(["--jobs", "3"]);
    let threaded = polariton(&threaded);
    assert_eq!(first.stdout, again.stdout);
    assert_eq!(first.stdout, threaded.stdout);
    assert!(first.stdout.starts_with(b"a_m,detuning_hz,rho,band,E_hz,E_minus_2E0_hz,deltaA\r\n"));
}

#[test]
fn config_file_and_output_path() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    let out = dir.path().join("spectrum.json");
    std::fs::write(&cfg, format!(r#"{{"n_sites": 8, "detuning_hz": 0, "output": {{"format": "json", "path": {:?}}}}}"#, out)).unwrap();
    let res = polariton(&["--config", cfg.to_str().unwrap(), "spectrum"]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let parsed: Value = serde_json::from_slice(&std::fs::read(&out).unwrap()).unwrap();
    assert_eq!(parsed.as_array().unwrap().len(), 3 * 8 / 2 + 2);
    assert_eq!(parsed[0]["classification"], "LL");
}

#[test]
fn bad_configs_fail_with_named_key() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, r#"{"lattice_constant": 5e-6}"#).unwrap();
    let res = polariton(&["--config", cfg.to_str().unwrap(), "dispersion"]);
    assert!(!res.status.success());
    assert!(String::from_utf8_lossy(&res.stderr).contains("lattice_constant"));
    let res = polariton(&["--n", "7", "dispersion"]);
    assert!(!res.status.success());
    assert!(String::from_utf8_lossy(&res.stderr).contains("n_sites"));
}

#[test]
fn detuning_overrides_radius_with_warning() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("both.json");
    std::fs::write(&cfg, r#"{"n_sites": 8, "fiber_radius_m": 3e-7, "detuning_hz": 0}"#).unwrap();
    let res = polariton(&["--config", cfg.to_str().unwrap(), "dispersion"]);
    assert!(res.status.success());
    assert!(String::from_utf8_lossy(&res.stderr).contains("detuning_hz wins"));
}

#[test]
fn json_only_reports_refuse_csv() {
    let res = polariton(&["--n", "8", "--detuning-hz", "0", "--format", "csv", "wavepacket", "--rho", "2"]);
    assert!(!res.status.success());
    let res = polariton(&["--n", "8", "--detuning-hz", "0", "wavepacket", "--rho", "2"]);
    assert!(res.status.success());
    let v: Value = serde_json::from_slice(&res.stdout).unwrap();
    assert!(v["a0_direct"].is_number());
}

#[test]
fn empty_object_is_accepted() {
    assert!(parse_config("{}").is_ok());
}

fn cell() -> impl Strategy<Value = Value> {
    prop_oneof![
        Just(Value::Null),
        any::<bool>().prop_map(Value::from),
        any::<i64>().prop_map(Value::from),
        any::<f64>().prop_filter("finite", |x| x.is_finite()).prop_map(|x| json!(x)),
        "[a-zA-Z][a-zA-Z ,\"]{0,8}".prop_map(Value::from),
    ]
}

proptest! {
    #[test]
    fn csv_round_trip(rows in prop::collection::vec(prop::collection::vec(cell(), 3), 0..12)) {
        let mut t = Table::new(&["x", "y", "z"]);
        for r in rows {
            t.push(r);
        }
        let bytes = emit(&Output::Table(t.clone()), Some(Format::Csv)).unwrap();
        prop_assert_eq!(Table::from_csv(&bytes).unwrap(), t);
    }
}
