//! End-to-end runs of the `levyma` binary.

use std::path::Path;
use std::process::{Command, Output};

use levyma::experiment::{consistency_verdicts, Record};

const SMALL: &str = r#"
[levy]
kind = "gamma"
b = 1.0
tau = 1.0

[kernel]
kind = "exp_window"
lambda = 1.0
theta = 1.0

[sim]
delta = 0.5
h = 0.05
n = 256

[estimator]
cutoff_C = 0.05
cutoff_exponent = 0.5

[[estimator.test_functions]]
kind = "gauss_moment"
k = 1
sigma = 1.0

[experiment]
sizes = [256, 1024]
reps = 12
seed = 100
"#;

fn levyma(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_levyma"))
        .args(args)
        .env_remove("LEVYMA_SEED")
        .output()
        .unwrap()
}

fn small_config(dir: &Path) -> String {
    let p = dir.join("small.toml");
    std::fs::write(&p, SMALL).unwrap();
    p.to_str().unwrap().to_string()
}

fn read(p: &Path) -> String {
    std::fs::read_to_string(p).unwrap()
}

#[test]
fn simulate_with_zero_size_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let out = dir.path().join("s.csv");
    let o = levyma(&[
        "simulate",
        "--config",
        &cfg,
        "--n",
        "0",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("`n`"));
    assert!(!out.exists());
}

#[test]
fn malformed_config_names_line_and_key() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.toml");
    std::fs::write(&p, SMALL.replace("b = 1.0", "bb = 1.0")).unwrap();
    let o = levyma(&["check-conditions", "--config", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("bb") && err.contains("line"), "{err}");
}

#[test]
fn check_conditions_reports_u1_for_the_exp_window() {
    let o = levyma(&["check-conditions", "--preset", "consistency"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["u_beta"]["beta1"], 1.0);
    assert_eq!(v["u_beta"]["holds"], true);
    assert_eq!(v["assumptions"]["items"].as_array().unwrap().len(), 5);
    assert!(v["assumptions"]["items"][0]["margin"].is_number());
}

#[test]
fn runs_are_byte_identical_across_thread_counts_and_replay_matches() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for (out, threads) in [(&a, "1"), (&b, "3")] {
        let o = levyma(&[
            "mc-consistency",
            "--config",
            &cfg,
            "--threads",
            threads,
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    for f in ["records.csv", "summary.json", "verdicts.txt", "config.toml"] {
        assert_eq!(read(&a.join(f)), read(&b.join(f)), "{f} differs");
    }

    // verdicts are a pure function of the stored records
    let recs: Vec<Record> = levyma::io::read_csv(&a.join("records.csv")).unwrap();
    assert_eq!(recs.len(), 24);
    let again = consistency_verdicts(&recs, [-0.65, -0.35]);
    let table: String = again
        .iter()
        .map(|v| {
            format!(
                "{} {}: {}\n",
                if v.pass { "PASS" } else { "FAIL" },
                v.name,
                v.detail
            )
        })
        .collect();
    assert_eq!(table, read(&a.join("verdicts.txt")));

    let o = levyma(&["replay", "--out", a.to_str().unwrap(), "--seed", "105"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stdout));
    assert!(String::from_utf8_lossy(&o.stdout).contains("2 records match"));

    // a tampered record is detected
    let text = read(&a.join("records.csv"));
    let line = text
        .lines()
        .find(|l| l.contains(",105,"))
        .unwrap()
        .to_string();
    let mut fields: Vec<String> = line.split(',').map(String::from).collect();
    let k = fields.len() - 3;
    fields[k] = "12.5".to_string();
    std::fs::write(
        a.join("records.csv"),
        text.replace(&line, &fields.join(",")),
    )
    .unwrap();
    let o = levyma(&["replay", "--out", a.to_str().unwrap(), "--seed", "105"]);
    assert_eq!(o.status.code(), Some(1));

    let o = levyma(&["replay", "--out", a.to_str().unwrap(), "--seed", "7"]);
    assert!(!o.status.success());
}

#[test]
fn seed_precedence_flag_over_env_over_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let sim = |extra: &[&str], env: Option<&str>| {
        let out = dir.path().join("s.csv");
        let mut c = Command::new(env!("CARGO_BIN_EXE_levyma"));
        c.args(["simulate", "--config", &cfg, "--out", out.to_str().unwrap()])
            .args(extra)
            .env_remove("LEVYMA_SEED");
        if let Some(e) = env {
            c.env("LEVYMA_SEED", e);
        }
        assert!(c.output().unwrap().status.success());
        read(&out)
    };
    let base = sim(&[], None);
    let seed100 = sim(&["--seed", "100"], None);
    assert_eq!(base, seed100);
    let env5 = sim(&[], Some("5"));
    assert_ne!(env5, base);
    assert_eq!(env5, sim(&["--seed", "5"], None));
    assert_eq!(sim(&["--seed", "100"], Some("5")), base);
}

#[test]
fn estimate_writes_curve_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let sample = dir.path().join("s.csv");
    let o = levyma(&[
        "simulate",
        "--config",
        &cfg,
        "--n",
        "1024",
        "--out",
        sample.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let out = dir.path().join("est");
    let o = levyma(&[
        "estimate",
        "--config",
        &cfg,
        "--sample",
        sample.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(read(&out.join("uv0_hat.csv")).starts_with("x,uv0_hat_re\n"));
    let s: serde_json::Value = serde_json::from_str(&read(&out.join("summary.json"))).unwrap();
    for key in ["n", "a_n", "b_n", "diagnostics"] {
        assert!(!s[key].is_null(), "missing {key}");
    }
    assert_eq!(s["n"], 1024);
    let f = &s["functionals"][0];
    for key in ["L_hat", "L_true", "err_W", "sigma_sq_plugin"] {
        assert!(f[key].is_number(), "missing {key}");
    }
    // spectral and two-route evaluations agree
    let (a, b) = (
        f["L_hat"].as_f64().unwrap(),
        f["L_hat_direct"].as_f64().unwrap(),
    );
    assert!((a - b).abs() < 1e-3 * a.abs().max(1e-3), "{a} vs {b}");
}

#[test]
fn distributional_runs_need_fifty_replications() {
    let dir = tempfile::tempdir().unwrap();
    let o = levyma(&[
        "mc-clt",
        "--reps",
        "10",
        "--out",
        dir.path().join("c").to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
}
