use std::path::Path;
use std::process::{Command, Output};

fn garouter(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_garouter"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn rows(path: &Path) -> Vec<Vec<String>> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn column(rows: &[Vec<String>], i: usize) -> Vec<f64> {
    rows.iter().map(|r| r[i].parse().unwrap()).collect()
}

#[test]
fn spectrum_writes_every_grid_point() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("spec.csv");
    let o = garouter(&[
        "spectrum", "--n", "8", "--j", "0.01", "--g", "1.5", "--e-min", "-2", "--e-max", "2", "--steps", "801",
        "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("E,R_A,T_A,T_B_back,T_B_fwd,residual\n"));
    assert!(!text.contains('\r'));
    let rows = rows(&out);
    assert_eq!(rows.len(), 801);
    // band edges have no scattering state
    assert_eq!(rows[0][1], "NaN");
    assert_eq!(rows[800][1], "NaN");
    let t = column(&rows[1..800], 4);
    let best = t.iter().copied().fold(0.0, f64::max);
    // The refined maximum for this regime is 0.98046; a 0.005 grid samples
    // the peak slightly off its top.
    assert!(best > 0.85 && best <= 0.980_465, "{best}");
    // E = ±0.01 coincide with chain poles J·2cos(π/3)
    let failed: Vec<f64> = rows.iter().filter(|r| r[1] == "NaN").map(|r| r[0].parse().unwrap()).collect();
    assert_eq!(failed.len(), 4);
    assert!((failed[1] + 0.01).abs() < 1e-12 && (failed[2] - 0.01).abs() < 1e-12);
    for r in column(&rows[1..800], 5).into_iter().filter(|r| !r.is_nan()) {
        assert!(r < 1e-10);
    }
}

#[test]
fn uncoupled_spectrum_transmits_everything() {
    let o = garouter(&["spectrum", "--g", "0", "--e-min", "-1.99", "--e-max", "1.99", "--steps", "41"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    for line in text.lines().skip(1) {
        let t_a: f64 = line.split(',').nth(2).unwrap().parse().unwrap();
        assert_eq!(t_a, 1.0, "{line}");
    }
}

#[test]
fn mismatched_atom_count_is_a_config_error() {
    let o = garouter(&["spectrum", "--n", "8", "--m", "5", "--steps", "11"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("MismatchedAtomCount"));
}

#[test]
fn direct_solver_accepts_unequal_atom_count_and_waveguides() {
    let o = garouter(&["spectrum", "--n", "8", "--m", "5", "--g-b", "0.7", "--solver", "oracle", "--steps", "11"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let o = garouter(&["spectrum", "--g-b", "0.7", "--steps", "11"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn sidecar_records_the_resolved_run() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s.csv");
    let o = garouter(&["spectrum", "--n", "5", "--steps", "5", "--solver", "both", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let header = std::fs::read_to_string(&out).unwrap();
    assert!(header.starts_with("E,R_A,T_A,T_B_back,T_B_fwd,residual,dev\n"));
    let meta: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("s.csv.meta.json")).unwrap()).unwrap();
    assert_eq!(meta["config"]["model"]["n"], 5);
    assert_eq!(meta["config"]["solver"], "both");
    assert_eq!(meta["version"], env!("CARGO_PKG_VERSION"));
    assert!(meta["wall_time_seconds"].as_f64().unwrap() >= 0.0);
    // E = ±2 are band edges, E = 0 is a chain pole for odd N
    let errors = meta["error_points"].as_array().unwrap();
    assert_eq!(errors.len(), 3);
    assert_eq!(errors[1]["kind"], "Pole");
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let args = ["map", "--e-steps", "31", "--y-axis", "rabi", "--y-min", "0", "--y-max", "1", "--y-steps", "4"];
    let run = |p: &Path| {
        let mut v: Vec<&str> = args.to_vec();
        v.extend(["--out", p.to_str().unwrap()]);
        assert_eq!(garouter(&v).status.code(), Some(0));
    };
    run(&a);
    run(&b);
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn thread_count_does_not_change_output() {
    let args = ["spectrum", "--n", "6", "--steps", "101", "--solver", "both"];
    let one = Command::new(env!("CARGO_BIN_EXE_garouter")).args(args).env("GAROUTER_THREADS", "1").output().unwrap();
    let many = Command::new(env!("CARGO_BIN_EXE_garouter")).args(args).env("GAROUTER_THREADS", "4").output().unwrap();
    assert_eq!(one.status.code(), Some(0));
    assert_eq!(one.stdout, many.stdout);
    let bad = Command::new(env!("CARGO_BIN_EXE_garouter")).args(args).env("GAROUTER_THREADS", "lots").output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn config_file_values_yield_to_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# two-point check\nn = 4\ng = 0\nsteps = 3\ne-min = -1\ne-max = 1\n").unwrap();
    let o = garouter(&["spectrum", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 4);
    assert!(text.lines().skip(1).all(|l| l.split(',').nth(2) == Some("1.0000000000000000e0")));

    let o = garouter(&["spectrum", "--config", cfg.to_str().unwrap(), "--g", "1.5"]);
    let t_a: f64 = stdout(&o).lines().nth(2).unwrap().split(',').nth(2).unwrap().parse().unwrap();
    assert!(t_a < 0.99);

    std::fs::write(&cfg, "no-such-flag = 3\n").unwrap();
    assert_eq!(garouter(&["spectrum", "--config", cfg.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(garouter(&["spectrum", "--config", "/nonexistent/run.cfg"]).status.code(), Some(2));
}

#[test]
fn energy_by_size_map() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("map.csv");
    let o = garouter(&[
        "map", "--e-min", "-1.9", "--e-max", "1.9", "--e-steps", "39", "--y-axis", "n", "--y-min", "2", "--y-max",
        "20", "--y-steps", "19", "--solver", "both", "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("axis1,axis2,R_A,T_A,T_B_back,T_B_fwd,residual\n"));
    let rows = rows(&out);
    assert_eq!(rows.len(), 39 * 19);
    let sizes = column(&rows, 1);
    assert_eq!(sizes[0], 2.0);
    assert_eq!(sizes[18], 20.0);
}

#[test]
fn single_cell_map() {
    let o = garouter(&["map", "--e-min", "0.3", "--e-max", "0.3", "--e-steps", "1", "--y-list", "8"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(stdout(&o).lines().count(), 2);
}

#[test]
fn json_output() {
    let o = garouter(&["map", "--e-min", "0.3", "--e-max", "0.3", "--e-steps", "1", "--y-list", "8", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["points"].as_array().unwrap().len(), 1);
    assert_eq!(v["axis2"], "Sites");
}

#[test]
fn verify_defaults_pass() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("verify.json");
    let o = garouter(&["verify", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}{}", stdout(&o), stderr(&o));
    assert!(stdout(&o).contains("draws: 1000"));
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert!(report["max_deviation"].as_f64().unwrap() < 1e-8);
    assert_eq!(report["config"]["seed"], 42);
    assert!(report["failures"].as_array().unwrap().is_empty());
}

#[test]
fn verify_reporting_paths() {
    assert_eq!(garouter(&["verify", "--draws", "0"]).status.code(), Some(2));
    let o = garouter(&["verify", "--draws", "20", "--tolerance", "1e-16"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("exceed tolerance"));
}

#[test]
fn period_reports_every_candidate() {
    let o = garouter(&["period", "--n", "8"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    for key in ["diagnostic", "phi = k(N-1)", "delta_e_exact", "delta_e_taylor", "4pi/N", "4/N: 0.5", "4N: 32", "tau_estimate: 0.79"] {
        assert!(text.contains(key), "missing {key} in\n{text}");
    }
    let change: f64 = text
        .lines()
        .find_map(|l| l.strip_prefix("grid_change: "))
        .unwrap()
        .parse()
        .unwrap();
    assert!(change < 0.01);
}

#[test]
fn period_edge_cases() {
    let o = garouter(&["period", "--g", "0"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("no finite period"));
    assert_eq!(garouter(&["period", "--steps", "100"]).status.code(), Some(3));
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(garouter(&["spectrum", "--steps", "many"]).status.code(), Some(2));
    assert_eq!(garouter(&["spectrum", "--steps", "0"]).status.code(), Some(2));
    assert_eq!(garouter(&["nonsense"]).status.code(), Some(2));
    assert_eq!(garouter(&["spectrum", "--fixed-k", "1.0", "--solver", "oracle"]).status.code(), Some(2));
}
