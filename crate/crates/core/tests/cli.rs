//! End-to-end tests of the `ptring` binary.

use std::path::Path;
use std::process::{Command, Output};

use ptring::analytics::four_site_region;
use ptring::cli::{Cell, Table};
use serde_json::Value;

fn ptring(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ptring")).args(args).output().unwrap()
}

fn ptring_with_threads(threads: &str, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ptring"))
        .env("PTRING_THREADS", threads)
        .args(args)
        .output()
        .unwrap()
}

fn run_to_file(args: &[&str], out: &Path) -> Vec<u8> {
    let mut full = args.to_vec();
    full.extend(["--out", out.to_str().unwrap()]);
    let o = ptring(&full);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    std::fs::read(out).unwrap()
}

fn num(cell: &Cell) -> f64 {
    match cell {
        Cell::Num(v) => *v,
        Cell::Int(v) => *v as f64,
        other => panic!("expected a number, found {other:?}"),
    }
}

#[test]
fn exit_codes() {
    assert_eq!(ptring(&["threshold", "--n", "5"]).status.code(), Some(0));
    assert_eq!(ptring(&["verify", "--quick", "--fault", "drop-loss"]).status.code(), Some(1));
    assert_eq!(ptring(&["spectrum", "--n", "0", "--gamma", "1", "--flux", "0"]).status.code(), Some(2));
    assert_eq!(ptring(&["no-such-command"]).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let o = ptring(&["band", "--n", "2", "--gamma", "0.5", "--flux-steps", "5", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn csv_outputs_round_trip_byte_identically() {
    let dir = tempfile::tempdir().unwrap();
    let commands: [&[&str]; 6] = [
        &["spectrum", "--n", "3", "--gamma", "0.7", "--flux", "0.4"],
        &["band", "--n", "3", "--gamma", "0.3", "--flux-steps", "17"],
        &["phase-diagram", "--n", "3", "--steps", "9"],
        &["critical-flux", "--n", "5", "--gamma-steps", "7"],
        &["kc", "--n", "5", "--gamma-steps", "7"],
        &["threshold", "--n", "7"],
    ];
    for (i, args) in commands.iter().enumerate() {
        let path = dir.path().join(format!("{i}.csv"));
        let bytes = run_to_file(args, &path);
        let table = Table::parse_csv(&bytes).unwrap();
        assert!(!table.rows.is_empty(), "{args:?}");
        assert_eq!(table.to_csv().unwrap(), bytes, "{args:?}");
    }
}

#[test]
fn json_envelope_matches_csv_rows() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["critical-flux", "--n", "5", "--gamma-steps", "5"];
    let csv = Table::parse_csv(&run_to_file(&args, &dir.path().join("c.csv"))).unwrap();
    let mut json_args = args.to_vec();
    json_args.extend(["--format", "json"]);
    let json: Value = serde_json::from_slice(&run_to_file(&json_args, &dir.path().join("c.json"))).unwrap();
    assert_eq!(json["schema_version"], "1");
    assert_eq!(json["command"], "critical-flux");
    assert_eq!(json["params"]["n"], 5);
    let rows = json["rows"].as_array().unwrap();
    assert_eq!(rows.len(), csv.rows.len());
    for (row, expected) in rows.iter().zip(&csv.rows) {
        for (col, cell) in csv.columns.iter().zip(expected) {
            assert_eq!(row[col].as_f64().unwrap(), num(cell), "{col}");
        }
    }
}

#[test]
fn threshold_for_five() {
    let o = ptring(&["threshold", "--n", "5"]);
    let t = Table::parse_csv(&o.stdout).unwrap();
    assert_eq!(t.columns, ["gamma_c"]);
    assert_eq!(format!("{:.6}", num(&t.rows[0][0])), "1.175571");
}

#[test]
fn four_site_diagram_follows_closed_form_regions() {
    let dir = tempfile::tempdir().unwrap();
    let bytes = run_to_file(&["phase-diagram", "--n", "2", "--steps", "21"], &dir.path().join("p.csv"));
    let t = Table::parse_csv(&bytes).unwrap();
    assert_eq!(t.columns, ["gamma", "flux", "phase", "pair_count"]);
    assert_eq!(t.rows.len(), 21 * 21);
    let mut checked = 0;
    for row in &t.rows {
        let (g, phi) = (num(&row[0]), num(&row[1]));
        let Cell::Text(phase) = &row[2] else { panic!("{row:?}") };
        if let Some(exact) = four_site_region(g, phi).is_exact_phase() {
            assert_eq!(phase == "exact", exact, "γ={g}, Φ={phi}");
            checked += 1;
        }
    }
    assert!(checked > 400);
}

#[test]
fn critical_flux_decreases_with_gain() {
    let dir = tempfile::tempdir().unwrap();
    let bytes = run_to_file(&["critical-flux", "--n", "6", "--gamma-steps", "25"], &dir.path().join("c.csv"));
    let t = Table::parse_csv(&bytes).unwrap();
    assert_eq!(t.columns, ["gamma", "phi_c_analytic", "phi_c_numeric", "phi_c_linear"]);
    for col in 1..4 {
        for pair in t.rows.windows(2) {
            assert!(num(&pair[1][col]) <= num(&pair[0][col]) + 1e-9, "{} not monotone", t.columns[col]);
        }
    }
}

#[test]
fn output_independent_of_thread_count() {
    let args = ["phase-diagram", "--n", "4", "--steps", "15", "--format", "json"];
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for threads in ["1", "3"] {
        let path = dir.path().join(format!("{threads}.json"));
        let mut full = args.to_vec();
        full.extend(["--out", path.to_str().unwrap()]);
        let o = ptring_with_threads(threads, &full);
        assert_eq!(o.status.code(), Some(0));
        outputs.push(std::fs::read(path).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
}
