use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/configs")
}

fn pmet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pmet")).args(args).output().expect("binary runs")
}

fn config(name: &str) -> String {
    configs().join(name).to_string_lossy().into_owned()
}

fn write_config(dir: &TempDir, name: &str, body: &str) -> String {
    let path = dir.path().join(name);
    fs::write(&path, body).unwrap();
    path.to_string_lossy().into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn marcus_prints_header_and_one_row() {
    let o = pmet(&["marcus", "--config", &config("resonant.json")]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[0], "v_eff,delta_g,activation,rate");
    let rate: f64 = lines[1].split(',').nth(3).unwrap().parse().unwrap();
    assert!((rate / 2.75e6 - 1.0).abs() < 5e-3);
}

#[test]
fn rate_writes_csv_and_sidecar() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("rate.csv");
    let o = pmet(&["rate", "--config", &config("offres.json"), "--mode", "offres", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("kind,mode,pathway,total_rate"));
    assert!(lines.next().unwrap().starts_with("summary,off_resonant,total,"));
    assert!(lines.all(|l| l.starts_with("channel,")));

    let meta: serde_json_like::Meta = serde_json_like::parse(&fs::read_to_string(dir.path().join("rate.csv.meta.json")).unwrap());
    assert_eq!(meta.hash_len, 64);
    assert!(meta.has_constants);
}

/// Tiny field extraction so the test does not need a JSON dependency.
mod serde_json_like {
    pub struct Meta {
        pub hash_len: usize,
        pub has_constants: bool,
    }

    pub fn parse(text: &str) -> Meta {
        let hash = text
            .split("\"config_hash\": \"")
            .nth(1)
            .and_then(|rest| rest.split('"').next())
            .unwrap_or_default();
        Meta { hash_len: hash.len(), has_constants: text.contains("\"hbar_ev_s\"") && text.contains("\"kb_ev_per_k\"") }
    }
}

#[test]
fn pathway_flag_overrides() {
    let o = pmet(&["rate", "--config", &config("offres.json"), "--pathway", "bridge"]);
    assert!(o.status.success());
    assert!(stdout(&o).lines().nth(1).unwrap().starts_with("summary,off_resonant,bridge_only,"));
}

#[test]
fn mode_mismatch_is_a_config_error() {
    let o = pmet(&["rate", "--config", &config("resonant.json"), "--mode", "offres"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn bad_config_exits_2() {
    let dir = TempDir::new().unwrap();
    let path = write_config(&dir, "bad.json", r#"{"mode": "resonant", "lambda_da": 0}"#);
    let o = pmet(&["marcus", "--config", &path]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("error"));

    let o = pmet(&["marcus", "--config", "/nonexistent/config.json"]);
    assert_ne!(o.status.code(), Some(0));

    let o = pmet(&["rate", "--config", &config("resonant.json"), "--pathway", "sideways"]);
    assert_eq!(o.status.code(), Some(2));
}

const POLE_CONFIG: &str = r#"{
  "mode": "off_resonant",
  "u_d_minus_u_a": "150 meV",
  "u_b_minus_u_d": "0.6 eV",
  "v_db": "5 meV",
  "v_ba": "5 meV",
  "lambda_da": "0.65 eV",
  "temperature": "300 K",
  "hbar_omega_c": "200 meV",
  "hbar_g_c": "4 meV",
  "mu_db": 1,
  "mu_ba": 1
}"#;

#[test]
fn poles_exit_3_unless_skipped() {
    let dir = TempDir::new().unwrap();
    let path = write_config(&dir, "pole.json", POLE_CONFIG);
    let o = pmet(&["rate", "--config", &path]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stderr).contains("l="));

    let o = pmet(&["rate", "--config", &path, "--skip-poles"]);
    assert!(o.status.success());
    let summary = stdout(&o).lines().nth(1).unwrap().to_string();
    let skipped: usize = summary.split(',').nth(9).unwrap().parse().unwrap();
    assert!(skipped > 0);
}

#[test]
fn unconverged_truncation_exits_4() {
    // a 1 meV photon is thermally populated far beyond the cutoff cap
    let dir = TempDir::new().unwrap();
    let path = write_config(
        &dir,
        "soft.json",
        r#"{"mode": "resonant", "u_d_minus_u_a": 0, "u_b_minus_u_d": 1.5, "v_db": 0.02, "v_ba": 0.02,
            "lambda_da": 0.65, "temperature": 300, "hbar_omega_c": "1 meV", "hbar_g_c": "0.05 meV",
            "mu_da": 1, "mu_dd": 5, "mu_aa": -5}"#,
    );
    let o = pmet(&["rate", "--config", &path]);
    assert_eq!(o.status.code(), Some(4), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn sweep_is_identical_across_worker_counts() {
    let dir = TempDir::new().unwrap();
    let cfg = config("sweep_offres_200.json");
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let c = dir.path().join("c.csv");
    let threads = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(4).max(2).to_string();
    for (out, workers) in [(&a, "1"), (&b, threads.as_str()), (&c, "1")] {
        let o = pmet(&["sweep", "--config", &cfg, "--workers", workers, "--out", out.to_str().unwrap()]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let (a, b, c) = (fs::read(a).unwrap(), fs::read(b).unwrap(), fs::read(c).unwrap());
    assert_eq!(a, b);
    assert_eq!(a, c);
    assert_eq!(String::from_utf8(a).unwrap().lines().count(), 51);
}

#[test]
fn bridge_gap_sweep_needs_skip_poles() {
    let cfg = config("sweep_bridge_gap_200.json");
    let o = pmet(&["sweep", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("bridge_gap"));
    let o = pmet(&["sweep", "--config", &cfg, "--skip-poles"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("poles_skipped"));
}

#[test]
fn overlap_from_value_and_config() {
    let o = pmet(&["overlap", "--d", "0.5", "--size", "4"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "n\\m,0,1,2,3");
    let s00: f64 = lines[1].split(',').nth(1).unwrap().parse().unwrap();
    assert!((s00 - 0.882_497).abs() < 1e-6);

    let o = pmet(&["overlap", "--d", "-0.5", "--size", "2"]);
    assert!(o.status.success());
    let s10: f64 = stdout(&o).lines().nth(2).unwrap().split(',').nth(1).unwrap().parse().unwrap();
    assert!((s10 + 0.441_248).abs() < 1e-6);

    let o = pmet(&["overlap", "--config", &config("resonant.json"), "--which", "da", "--size", "3"]);
    assert!(o.status.success());

    let o = pmet(&["overlap", "--size", "3"]);
    assert_eq!(o.status.code(), Some(2));
    let o = pmet(&["overlap", "--d", "0.5", "--size", "0"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn validate_passes() {
    let o = pmet(&["validate", "--config", &config("offres.json")]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert!(stdout(&o).lines().all(|l| !l.starts_with("FAIL")));
}
