//! End-to-end checks of the `relwave` binary: exit codes, file layout,
//! and byte-level determinism of the generated artifacts.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::atomic::{AtomicU32, Ordering};

static COUNTER: AtomicU32 = AtomicU32::new(0);

fn work_dir(tag: &str) -> PathBuf {
    let n = COUNTER.fetch_add(1, Ordering::Relaxed);
    let dir = std::env::temp_dir().join(format!(
        "relwave-cli-test-{}-{tag}-{n}",
        std::process::id()
    ));
    if dir.exists() {
        std::fs::remove_dir_all(&dir).unwrap();
    }
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn relwave(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_relwave"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn exit_code(out: &std::process::Output) -> i32 {
    out.status.code().expect("no signal")
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name))
        .unwrap_or_else(|e| panic!("missing {name}: {e}"))
}

#[test]
fn localize_writes_profiles_and_succeeds() {
    let dir = work_dir("loc");
    let out = relwave(&["localize", "--out", dir.to_str().unwrap()]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));

    let profile = read(&dir, "nw_scalar_profile.csv");
    let mut lines = profile.lines();
    assert!(lines.next().unwrap().starts_with("# units: hbar = c = 1"));
    assert_eq!(lines.next().unwrap(), "r,value,k_ratio");
    assert_eq!(lines.count(), 12);
    assert!(profile.ends_with('\n'));
    assert!(!profile.contains('\r'));

    let probe = read(&dir, "nw_delta_probe.csv");
    assert!(probe.contains("p_cutoff,smeared,g0"));
    assert!(read(&dir, "config.json").contains("\"mass\": 1.0"));
    assert!(read(&dir, "localize_checks.json").contains("\"pass\": true"));
}

#[test]
fn usage_errors_exit_with_2() {
    let dir = work_dir("usage");
    let d = dir.to_str().unwrap();

    // profile window too small to say anything about the tail
    let out = relwave(&["localize", "--out", d, "--rmax", "0.3"]);
    assert_eq!(exit_code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("rmax"));

    // speeds outside [0, 1) are not boosts
    let out = relwave(&["boost", "--out", d, "--beta0=-0.5"]);
    assert_eq!(exit_code(&out), 2);
    let out = relwave(&["boost", "--out", d, "--beta0", "1.0"]);
    assert_eq!(exit_code(&out), 2);

    // packet too wide for the contraction experiment's narrow-packet regime
    let out = relwave(&["boost", "--out", d, "--sigma-p", "0.5", "--beta0", "0.5"]);
    assert_eq!(exit_code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("narrow-packet"));

    // unknown config fields are rejected, not ignored
    let cfg = dir.join("bad.json");
    std::fs::write(&cfg, "{\"masss\": 2.0}").unwrap();
    let out = relwave(&["verify", "--out", d, "--config", cfg.to_str().unwrap()]);
    assert_eq!(exit_code(&out), 2);
}

#[test]
fn flags_override_config_file() {
    let dir = work_dir("override");
    let cfg = dir.join("cfg.json");
    std::fs::write(&cfg, "{\"mass\": 2.0, \"sigma_p_over_m\": 2.0}").unwrap();
    let out_dir = dir.join("run");
    let out = relwave(&[
        "subminimal",
        "--config",
        cfg.to_str().unwrap(),
        "--sigma-p",
        "1.0",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let effective = read(&out_dir, "config.json");
    assert!(effective.contains("\"mass\": 2.0"));
    assert!(effective.contains("\"sigma_p_over_m\": 1.0"));
}

#[test]
fn repeated_runs_are_byte_identical() {
    let a = work_dir("det-a");
    let b = work_dir("det-b");
    for dir in [&a, &b] {
        let out = relwave(&["boost", "--out", dir.to_str().unwrap(), "--grid-points", "33"]);
        assert_eq!(exit_code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    }
    for name in [
        "contraction_report.json",
        "boost_exact_profile.csv",
        "boost_approx_profile.csv",
        "boost_checks.json",
    ] {
        assert_eq!(read(&a, name), read(&b, name), "{name} differs between runs");
    }
}

#[test]
fn subminimal_reports_a_width_below_the_compton_wavelength() {
    let dir = work_dir("sub");
    let out = relwave(&["subminimal", "--out", dir.to_str().unwrap(), "--sigma-p", "2.0"]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let rep = read(&dir, "subminimal_report.json");
    assert!(rep.contains("\"sub_minimal\": true"));
    assert!(rep.contains("\"measured_sigma_x\": 0.25"));
}

fn gaussian_table(scale: f64) -> String {
    // the sigma_p = 0.5 Gaussian on a log grid, in units of the mass
    let sp = 0.5f64;
    let mut out = String::from("p,re,im\n");
    let n = 200;
    for i in 0..n {
        let p = 1e-4 * (6.0f64 / 1e-4).powf(i as f64 / (n - 1) as f64);
        let v = scale * (-p * p / (4.0 * sp * sp)).exp()
            / (2.0 * std::f64::consts::PI * sp * sp).powf(0.75);
        out.push_str(&format!("{p:.15e},{v:.15e},0\n"));
    }
    out
}

#[test]
fn verify_accepts_a_normalized_table_and_rejects_a_scaled_one() {
    let dir = work_dir("table");
    let good = dir.join("good.csv");
    let bad = dir.join("bad.csv");
    std::fs::write(&good, gaussian_table(1.0)).unwrap();
    std::fs::write(&bad, gaussian_table(1.01)).unwrap();

    for (path, want) in [(&good, 0), (&bad, 3)] {
        let cfg = dir.join("cfg.json");
        std::fs::write(
            &cfg,
            format!("{{\"table_path\": {:?}}}", path.to_str().unwrap()),
        )
        .unwrap();
        let run = dir.join(format!("run-{want}"));
        let out = relwave(&[
            "verify",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            run.to_str().unwrap(),
        ]);
        assert_eq!(
            exit_code(&out),
            want,
            "stderr: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        let report = read(&run, "verify_report.json");
        assert!(report.contains("tabulated_state_normalized"));
    }
}

#[test]
fn spread_trajectory_is_subluminal_and_indexed() {
    let dir = work_dir("spread");
    let out = relwave(&["spread", "--out", dir.to_str().unwrap(), "--sigma-p", "0.2"]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let csv = read(&dir, "spreading_sigma_0.csv");
    let mut lines = csv.lines();
    assert!(lines.next().unwrap().starts_with("# units"));
    assert_eq!(lines.next().unwrap(), "t,sigma_sq,v_sp");
    for line in lines {
        let v: f64 = line.rsplit(',').next().unwrap().parse().unwrap();
        assert!(v < 1.0, "superluminal spreading rate in {line}");
    }
    let index = read(&dir, "spreading_index.json");
    assert!(index.contains("spreading_sigma_0.csv"));
}
