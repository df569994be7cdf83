// SPDX-License-Identifier: Apache-2.0

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn device(omega_b: f64, g: f64, temperatures: [f64; 3]) -> String {
    let [h, c, w] = temperatures;
    format!(
        r#""device": {{
            "system": {{"omega_a": 1.0, "omega_b": {omega_b}, "g": {g}}},
            "baths": [
                {{"label": "h", "temperature": {h}, "gamma": 0.008, "cutoff": 50.0}},
                {{"label": "c", "temperature": {c}, "gamma": 0.008, "cutoff": 50.0}},
                {{"label": "w", "temperature": {w}, "gamma": 0.008, "cutoff": 50.0}}
            ]
        }}"#
    )
}

fn valve_device() -> String {
    device(0.8, 0.02, [1.0, 0.85, 3.0])
}

struct Workspace {
    dir: TempDir,
}

impl Workspace {
    fn new() -> Self {
        Self {
            dir: tempfile::tempdir().unwrap(),
        }
    }

    fn config(&self, name: &str, body: &str) -> PathBuf {
        let path = self.dir.path().join(name);
        std::fs::write(&path, format!("{{{body}}}")).unwrap();
        path
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }
}

fn qthermal(args: &[&str], config: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qthermal"))
        .args(args)
        .arg("--config")
        .arg(config)
        .output()
        .unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn table(o: &Output) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_reader(o.stdout.as_slice());
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(String::from).collect())
        .collect();
    (header, rows)
}

fn column(header: &[String], name: &str) -> usize {
    header
        .iter()
        .position(|h| h == name)
        .unwrap_or_else(|| panic!("no column {name}"))
}

fn summary_value(text: &str, key: &str) -> f64 {
    let start = text
        .find(key)
        .unwrap_or_else(|| panic!("`{key}` not in `{text}`"))
        + key.len();
    let tail = &text[start..];
    let end = tail
        .find(|c: char| !(c.is_ascii_digit() || c == '.' || c == '-'))
        .unwrap_or(tail.len());
    tail[..end].parse().unwrap()
}

#[test]
fn thermometer_reads_hidden_cold_temperature() {
    let ws = Workspace::new();
    let cfg = ws.config("t.json", &device(0.6, 0.0, [1.0, 0.7, 1.0]));
    let out = qthermal(&["thermometer"], &cfg);
    assert!(out.status.success(), "{}", stderr(&out));
    let msg = stderr(&out);
    assert!((summary_value(&msg, "Tw*=") - 2.8).abs() < 1e-5, "{msg}");
    assert!((summary_value(&msg, "Tc=") - 0.7).abs() < 1e-5, "{msg}");
    let (header, rows) = table(&out);
    let tc: f64 = rows[0][column(&header, "tc_estimate")].parse().unwrap();
    assert!((tc - 0.7).abs() <= 1e-6 * 0.7);
}

#[test]
fn thermometer_below_range_is_numerical_failure() {
    let ws = Workspace::new();
    let cfg = ws.config("t.json", &device(0.6, 0.0, [1.0, 0.5, 1.0]));
    let out = qthermal(&["thermometer"], &cfg);
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));
}

#[test]
fn valve_point_and_refrigerator_onset() {
    let ws = Workspace::new();
    let cfg = ws.config(
        "v.json",
        &format!(
            r#"{}, "valve": {{"bracket": [3.0, 4.0]}}, "refrigerator": {{"bracket": [3.0, 4.0]}}"#,
            valve_device()
        ),
    );
    let out = qthermal(&["valve"], &cfg);
    assert!(out.status.success(), "{}", stderr(&out));
    let (header, rows) = table(&out);
    let tw: f64 = rows[0][column(&header, "Tw")].parse().unwrap();
    assert!((tw - 3.42).abs() < 0.05, "{tw}");

    let out = qthermal(&["refrigerator"], &cfg);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!((summary_value(&stderr(&out), "Tw = ") - 3.53).abs() < 0.05);
}

#[test]
fn valve_without_sign_change_fails() {
    let ws = Workspace::new();
    let cfg = ws.config("v.json", &valve_device());
    let out = qthermal(&["valve", "--bracket", "1.0,2.0"], &cfg);
    assert_eq!(out.status.code(), Some(2));
    assert!(
        stderr(&out).contains("no working point in bracket"),
        "{}",
        stderr(&out)
    );
    assert!(out.stdout.is_empty());
}

#[test]
fn valve_without_bracket_is_config_error() {
    let ws = Workspace::new();
    let cfg = ws.config("v.json", &valve_device());
    let out = qthermal(&["valve"], &cfg);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("--bracket"));
}

#[test]
fn dynamics_from_lower_excited_level_stays_positive() {
    let ws = Workspace::new();
    let cfg = ws.config(
        "d.json",
        &format!(
            r#"{}, "dynamics": {{"initial": {{"level": 2}}, "stride": 100}}"#,
            valve_device()
        ),
    );
    let target = ws.path("traj.csv");
    let out = Command::new(env!("CARGO_BIN_EXE_qthermal"))
        .args(["dynamics", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&target)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(out.stdout.is_empty());
    let mut r = csv::Reader::from_path(&target).unwrap();
    let header: Vec<String> = r.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(header.len(), 1 + 18 + 2);
    let k = column(&header, "min_eigenvalue");
    let mut rows = 0;
    for rec in r.records() {
        let v: f64 = rec.unwrap()[k].parse().unwrap();
        assert!(v >= -1e-8, "{v}");
        rows += 1;
    }
    assert!(rows > 10);
}

#[test]
fn sweep_reproduces_valve_crossing() {
    let ws = Workspace::new();
    let cfg = ws.config(
        "s.json",
        &format!(r#"{}, "sweep": {{"grid": {{"variable": "Tw", "start": 1.0, "stop": 5.0, "points": 401}}}}"#, valve_device()),
    );
    let out = qthermal(&["sweep", "--threads", "4"], &cfg);
    assert!(out.status.success(), "{}", stderr(&out));
    let (header, rows) = table(&out);
    assert_eq!(rows.len(), 401);
    assert_eq!(header.last().unwrap(), "status");
    let (tw, jh) = (column(&header, "Tw"), column(&header, "j_h"));
    let values: Vec<(f64, f64)> = rows
        .iter()
        .map(|r| (r[tw].parse().unwrap(), r[jh].parse().unwrap()))
        .collect();
    let crossing = values
        .windows(2)
        .find(|w| w[0].1 > 0.0 && w[1].1 <= 0.0)
        .unwrap();
    assert!(
        crossing[0].0 <= 3.43 && crossing[1].0 >= 3.41,
        "{crossing:?}"
    );
}

#[test]
fn nested_sweep_locates_coherence_peak() {
    let ws = Workspace::new();
    let cfg = ws.config(
        "n.json",
        &format!(
            r#"{}, "sweep": {{
                "grid": {{"variable": "Tw", "start": 0.5, "stop": 2.0, "points": 4}},
                "inner": {{"variable": "g", "start": 0.0, "stop": 0.1, "points": 21}}
            }}"#,
            device(0.95, 0.0, [1.0, 0.1, 1.0])
        ),
    );
    let out = qthermal(&["sweep"], &cfg);
    assert!(out.status.success(), "{}", stderr(&out));
    let (header, rows) = table(&out);
    assert_eq!(rows.len(), 4 * 21);
    let (g, coh) = (column(&header, "g"), column(&header, "coherence_abs"));
    for block in rows.chunks(21) {
        let best = block
            .iter()
            .max_by(|a, b| {
                a[coh]
                    .parse::<f64>()
                    .unwrap()
                    .total_cmp(&b[coh].parse().unwrap())
            })
            .unwrap();
        let g_best: f64 = best[g].parse().unwrap();
        assert!((g_best - 0.02).abs() <= 0.005 + 1e-12, "{g_best}");
    }
}

#[test]
fn empty_grid_is_usage_error() {
    let ws = Workspace::new();
    let cfg = ws.config(
        "e.json",
        &format!(r#"{}, "sweep": {{"grid": {{"variable": "Tw", "start": 2.0, "stop": 2.0, "points": 10}}}}"#, valve_device()),
    );
    let out = qthermal(&["sweep"], &cfg);
    assert_eq!(out.status.code(), Some(1), "{}", stderr(&out));
    let out = qthermal(
        &["sweep", "--grid", "3,3,5"],
        &ws.config("f.json", &valve_device()),
    );
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn unknown_key_is_config_error() {
    let ws = Workspace::new();
    let cfg = ws.config("u.json", &format!(r#"{}, "sweeep": {{}}"#, valve_device()));
    let out = qthermal(&["dynamics"], &cfg);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("sweeep"), "{}", stderr(&out));
}

#[test]
fn invalid_device_and_bad_flags_are_usage_errors() {
    let ws = Workspace::new();
    let cfg = ws.config("b.json", &device(1.2, 0.0, [1.0, 0.5, 2.0]));
    assert_eq!(qthermal(&["generator"], &cfg).status.code(), Some(1));
    let ok = ws.config("ok.json", &valve_device());
    assert_eq!(
        qthermal(&["generator", "--threads", "0"], &ok)
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        qthermal(&["valve", "--bracket", "3"], &ok).status.code(),
        Some(1)
    );
    assert_eq!(
        qthermal(&["generator"], &ws.path("missing.json"))
            .status
            .code(),
        Some(1)
    );
    let full = ws.config(
        "full.json",
        &format!(
            r#"{}, "generator": {{"kind": "full_secular"}}"#,
            valve_device()
        ),
    );
    assert_eq!(qthermal(&["generator"], &full).status.code(), Some(1));
}

#[test]
fn generator_dump_shape() {
    let ws = Workspace::new();
    let out = qthermal(&["generator"], &ws.config("g.json", &valve_device()));
    assert!(out.status.success());
    let (header, rows) = table(&out);
    assert_eq!((header.len(), rows.len()), (18, 9));
}

#[test]
fn phase_map_output_is_identical_across_thread_counts() {
    let ws = Workspace::new();
    let cfg = ws.config(
        "p.json",
        &format!(
            r#"{}, "phase_map": {{
                "tw": {{"variable": "Tw", "start": 2.0, "stop": 10.0, "points": 9}},
                "g": {{"variable": "g", "start": 0.0, "stop": 0.2, "points": 5}}
            }}"#,
            valve_device()
        ),
    );
    let one = qthermal(&["phase-map", "--threads", "1"], &cfg);
    let four = qthermal(&["phase-map", "--threads", "4"], &cfg);
    assert!(one.status.success(), "{}", stderr(&one));
    assert_eq!(one.stdout, four.stdout);
    let (header, rows) = table(&one);
    assert_eq!(rows.len(), 45);
    assert!(header.iter().any(|h| h == "alpha_J"));
    let f = column(&header, "thermal_function");
    assert!(rows.iter().any(|r| r[f] == "refrigerator") && rows.iter().any(|r| r[f] == "heater"));
}

#[test]
fn amplifier_grid_classifies_coupling_strengths() {
    let ws = Workspace::new();
    let cfg = ws.config(
        "a.json",
        &format!(
            r#"{}, "amplifier": {{"grid": {{"variable": "g", "start": 0.05, "stop": 0.2, "points": 2}}}}"#,
            device(0.8, 0.0, [1.0, 0.85, 8.0])
        ),
    );
    let out = qthermal(&["amplifier"], &cfg);
    assert!(out.status.success(), "{}", stderr(&out));
    let (header, rows) = table(&out);
    let c = column(&header, "amplifier_class");
    assert_eq!(rows[0][c], "amplifier");
    assert_eq!(rows[1][c], "contraction");
}
