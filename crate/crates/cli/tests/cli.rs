use std::path::PathBuf;
use std::process::{Command, Output};

fn shastry(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_shastry"));
    for (k, _) in std::env::vars().filter(|(k, _)| k.starts_with("SHASTRY_")) {
        cmd.env_remove(k);
    }
    cmd.args(args).envs(env.iter().copied()).output().expect("binary runs")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("shastry-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).expect("stdout is JSON")
}

#[test]
fn curves_suite_passes_with_exit_zero() {
    let o = shastry(&["--suite", "curves", "--samples", "5", "--u", "2"], &[]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v = json(&o);
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["overall"], "pass");
    assert!(v["records"].as_array().unwrap().iter().all(|r| r["suite"] == "curves"));
    assert!(String::from_utf8_lossy(&o.stderr).contains("0 failed, 0 errors"));
}

#[test]
fn usage_and_config_errors_exit_two() {
    for args in [
        &["--precision", "32"][..],
        &["--u", "4i"],
        &["--u", "two"],
        &["--suite", "bogus"],
        &["--samples", "0"],
        &["--tolerance-exponent", "200"],
        &["--no-such-flag"],
    ] {
        let o = shastry(args, &[]);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(o.stdout.is_empty(), "{args:?}");
    }
}

#[test]
fn failing_check_exits_one() {
    let o = shastry(&["--suite", "elliptic", "--samples", "4", "--u", "2", "--tolerance-exponent", "127"], &[]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(json(&o)["overall"], "fail");
}

#[test]
fn environment_mirrors_flags_and_flags_win() {
    let env = [("SHASTRY_SUITE", "curves"), ("SHASTRY_SAMPLES", "0"), ("SHASTRY_U", "-2,1/3")];
    assert_eq!(shastry(&[], &env).status.code(), Some(2));
    let o = shastry(&["--samples", "3"], &env);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v = json(&o);
    assert_eq!(v["config"]["samples"], 3);
    assert_eq!(v["config"]["couplings"], serde_json::json!(["-2", "1/3"]));
    assert!(v["records"].as_array().unwrap().iter().all(|r| r["suite"] == "curves"));
}

#[test]
fn repeated_u_flags_and_mutations() {
    let o = shastry(&["--suite", "curves", "--samples", "3", "--u", "1", "--u", "1+i", "--mutations"], &[]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["config"]["couplings"], serde_json::json!(["1", "1+i"]));
    let recs = v["records"].as_array().unwrap();
    assert!(recs.iter().any(|r| r["mutation"] == true && r["status"] == "pass"));
}

#[test]
fn fixed_seed_gives_identical_bytes() {
    let args = ["--suite", "lax,elliptic", "--samples", "4", "--u", "3", "--seed", "11"];
    let a = shastry(&args, &[]);
    let b = shastry(&args, &[]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn out_file_and_weights_csv() {
    let out = scratch("report.json");
    let csv = scratch("weights.csv");
    let o = shastry(
        &["--suite", "curves", "--samples", "2", "--u", "2", "--out", out.to_str().unwrap(), "--emit-weights", csv.to_str().unwrap()],
        &[],
    );
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let rep: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(rep["overall"], "pass");

    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "lambda_re,lambda_im,xc_re,xc_im,yc_re,yc_im,thc_re,thc_im,curve_residual,flag");
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 42);
    assert!(rows.iter().all(|r| r.len() == 10));
    let f = |s: &str| s.parse::<f64>().unwrap();
    let r0 = &rows[0];
    assert_eq!((f(r0[0]), f(r0[2]), f(r0[4]), f(r0[6]), f(r0[8])), (0.0, 1.0, 0.0, 1.0, 0.0));
    for r in rows.iter().filter(|r| r[9] == "ok") {
        assert!(f(r[8]) < 1e-30, "{r:?}");
    }
}

#[test]
fn unwritable_out_path_exits_two() {
    let o = shastry(&["--suite", "curves", "--samples", "2", "--u", "2", "--out", "/nonexistent-dir/x/report.json"], &[]);
    assert_eq!(o.status.code(), Some(2));
}
