use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::time::{Duration, Instant};

const NYC: &str = "[observation]
n_obs = 5089
lambda_obs = 187
trip_minutes = 16.3
pickup_minutes = 5
p_f_obs = 17
p_d_obs = 10.2
";

fn tnc(dir: &Path, args: &[&str], workers: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_tnc"));
    cmd.current_dir(dir).args(args);
    match workers {
        Some(w) => cmd.env("TNC_WORKERS", w),
        None => cmd.env_remove("TNC_WORKERS"),
    };
    cmd.output().unwrap()
}

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines().skip(1).map(|l| l.split(',').map(str::to_string).collect()).collect()
}

fn sweep_body(kind: &str, start: f64, stop: f64, steps: usize, out: &str) -> String {
    format!("{NYC}\n[scenario]\nkind = \"{kind}\"\nstart = {start}\nstop = {stop}\nsteps = {steps}\n\n[output]\npath = \"{out}\"\n")
}

#[test]
fn two_step_sweep_writes_two_rows() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.toml", &sweep_body("cap", 3000.0, 4000.0, 2, "o.csv"));
    let out = tnc(dir.path(), &["sweep", cfg.to_str().unwrap()], None);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("o.csv")).unwrap();
    let header = csv.lines().next().unwrap();
    assert_eq!(
        header,
        "scenario,param_value,lambda,n_drivers,n_idle,p_f,p_d,p_c,wage_hr,pickup_min,total_cost,occupancy,commission_rate,profit_hr,regime,converged,max_residual"
    );
    let r = rows(&csv);
    assert_eq!(r.len(), 2);
    assert_eq!(r[0][1], "3000");
    assert_eq!(r[1][1], "4000");
    assert!(r.iter().all(|row| row[14] == "cap_binding" && row[15] == "true"));
}

#[test]
fn reruns_are_byte_identical_for_any_worker_count() {
    let dir = tempfile::tempdir().unwrap();
    let body = sweep_body("wage_floor", 20.0, 40.0, 40, "o.csv");
    let cfg = write_config(dir.path(), "c.toml", &body);
    let mut outputs = Vec::new();
    for workers in [Some("1"), Some("4"), None] {
        let out = tnc(dir.path(), &["sweep", cfg.to_str().unwrap()], workers);
        assert!(out.status.success());
        outputs.push(std::fs::read(dir.path().join("o.csv")).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
    assert_eq!(outputs[0], outputs[2]);
}

#[test]
fn failed_points_stay_in_the_table() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.toml", &sweep_body("wage_floor", 37.0, 45.0, 3, "o.csv"));
    let out = tnc(dir.path(), &["sweep", cfg.to_str().unwrap()], None);
    assert!(out.status.success());
    let r = rows(&std::fs::read_to_string(dir.path().join("o.csv")).unwrap());
    assert_eq!(r.len(), 3);
    assert_eq!(r[0][14], "floor_only_active");
    assert_eq!(r[2][14], "no_positive_profit");
    assert_eq!(r[2][15], "false");
    let summary = String::from_utf8_lossy(&out.stderr);
    assert!(summary.contains("regime boundaries"), "{summary}");
}

#[test]
fn config_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let typo = sweep_body("cap", 3000.0, 4000.0, 2, "o.csv").replace("steps", "stpes");
    let cfg = write_config(dir.path(), "typo.toml", &typo);
    let out = tnc(dir.path(), &["sweep", cfg.to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("stpes"));

    let missing = tnc(dir.path(), &["sweep", "nope.toml"], None);
    assert_eq!(missing.status.code(), Some(2));

    let cfg = write_config(dir.path(), "ok.toml", &sweep_body("cap", 3000.0, 4000.0, 2, "o.csv"));
    let bad_workers = tnc(dir.path(), &["sweep", cfg.to_str().unwrap()], Some("zero"));
    assert_eq!(bad_workers.status.code(), Some(2));
}

#[test]
fn solver_failure_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.toml", &format!("{NYC}\n[scenario]\nkind = \"wage_floor\"\nvalue = 45\n"));
    let out = tnc(dir.path(), &["solve", cfg.to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn solve_reports_the_floor_regime() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "c.toml",
        &format!("{NYC}\n[scenario]\nkind = \"wage_floor\"\nvalue = 27.87\n\n[output]\npath = \"one.csv\"\n"),
    );
    let out = tnc(dir.path(), &["solve", cfg.to_str().unwrap()], None);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("both_constraints_active"), "{text}");
    assert_eq!(rows(&std::fs::read_to_string(dir.path().join("one.csv")).unwrap()).len(), 1);
}

#[test]
fn calibrated_params_reproduce_the_observation_run() {
    let dir = tempfile::tempdir().unwrap();
    let solve = "\n[scenario]\nkind = \"unregulated\"\n";
    let obs_cfg = write_config(dir.path(), "obs.toml", &format!("{NYC}{solve}"));
    let cal = tnc(dir.path(), &["calibrate", obs_cfg.to_str().unwrap()], None);
    assert!(cal.status.success());
    let params = String::from_utf8(cal.stdout).unwrap();
    assert!(params.starts_with("[params]"));
    let par_cfg = write_config(dir.path(), "par.toml", &format!("{params}{solve}"));
    let a = tnc(dir.path(), &["solve", obs_cfg.to_str().unwrap()], None);
    let b = tnc(dir.path(), &["solve", par_cfg.to_str().unwrap()], None);
    let drivers = |o: &Output| -> f64 {
        let s = String::from_utf8_lossy(&o.stdout).to_string();
        let line = s.lines().find(|l| l.starts_with("drivers ")).unwrap().to_string();
        line.split_whitespace().nth(1).unwrap().parse().unwrap()
    };
    assert!((drivers(&a) / drivers(&b) - 1.0).abs() < 1e-8);
}

#[test]
fn shipped_configs_run_quickly() {
    let configs = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let dir = tempfile::tempdir().unwrap();
    let mut seen = 0;
    for entry in std::fs::read_dir(&configs).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_none_or(|e| e != "toml") {
            continue;
        }
        let name = path.file_stem().unwrap().to_str().unwrap().to_string();
        let cmd = if name.starts_with("solve") { "solve" } else { "sweep" };
        let t = Instant::now();
        let out = tnc(dir.path(), &[cmd, path.to_str().unwrap()], Some("1"));
        assert!(out.status.success(), "{name}: {}", String::from_utf8_lossy(&out.stderr));
        assert!(t.elapsed() < Duration::from_secs(60), "{name} took {:?}", t.elapsed());
        seen += 1;
    }
    assert!(seen >= 6);
    let cap = rows(&std::fs::read_to_string(dir.path().join("out/cap.csv")).unwrap());
    // beyond the unregulated fleet the cap stops binding and the fleet plateaus
    let plateau: Vec<&Vec<String>> = cap.iter().filter(|r| r[1].parse::<f64>().unwrap() >= 5100.0).collect();
    assert!(!plateau.is_empty());
    assert!(plateau.iter().all(|r| r[3] == plateau[0][3] && r[14] == "cap_inactive"));
    let n: f64 = plateau[0][3].parse().unwrap();
    assert!((n / 5089.0 - 1.0).abs() < 0.01, "{n}");
}

#[test]
fn validate_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let ok = tnc(dir.path(), &["validate", "disk", "--trials", "20000", "--seed", "2"], None);
    assert_eq!(ok.status.code(), Some(0), "{}", String::from_utf8_lossy(&ok.stdout));
    let text = String::from_utf8_lossy(&ok.stdout);
    assert_eq!(text.lines().filter(|l| l.starts_with("PASS")).count(), 3);

    let queue = tnc(dir.path(), &["validate", "queue"], None);
    assert_eq!(queue.status.code(), Some(0), "{}", String::from_utf8_lossy(&queue.stdout));

    let law = tnc(dir.path(), &["validate", "sqrt_law", "--region", "l_shape", "--trials", "1000"], None);
    assert_eq!(law.status.code(), Some(0), "{}", String::from_utf8_lossy(&law.stdout));

    for bad in [
        &["validate", "queue", "--trials", "5000"][..],
        &["validate", "disk", "--region", "rectangle"],
        &["validate", "disk", "--trials", "10"],
        &["validate", "cube"],
    ] {
        assert_eq!(tnc(dir.path(), bad, None).status.code(), Some(2), "{bad:?}");
    }
}
