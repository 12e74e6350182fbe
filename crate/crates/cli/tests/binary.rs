use std::path::Path;
use std::process::Command;

fn mwlab(cmd: &str, config: &str, out: &Path, extra: &[&str]) -> (i32, String, String) {
    let cfg = out.join(format!("{cmd}-config.json"));
    std::fs::create_dir_all(out).unwrap();
    std::fs::write(&cfg, config).unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_mwlab"))
        .args([cmd, "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()])
        .args(extra)
        .output()
        .unwrap();
    (o.status.code().unwrap(), String::from_utf8_lossy(&o.stdout).into(), String::from_utf8_lossy(&o.stderr).into())
}

#[test]
fn sharpness_run_witnesses_scalar_instance() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _, err) = mwlab(
        "sharpness-run",
        r#"{"mode":"multiplier","n":1,"l":1,"p_list":[2],"q":1,"s":0.75,"delta":0.1}"#,
        dir.path(),
        &["--threads", "2"],
    );
    assert_eq!(code, 0, "{err}");
    let json = std::fs::read_to_string(dir.path().join("sharpness-run.json")).unwrap();
    assert!(json.contains("\"sharpness witnessed\""));
    assert!(json.contains("config_sha256"));
    assert!(dir.path().join("sharpness-run.svg").exists());
    let csv = std::fs::read_to_string(dir.path().join("sharpness-run.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("epsilon,lhs_annulus,lhs_full,rhs_1,ratio"));
    assert_eq!(csv.lines().count(), 7);
}

#[test]
fn audit_of_unit_weights() {
    let dir = tempfile::tempdir().unwrap();
    let one = r#"{"dimension":1,"factors":[]}"#;
    let doc = format!(r#"{{"q":1,"weights":[{one},{one}],"p_list":[2,2]}}"#);
    let (code, _, err) = mwlab("multi-weight-audit", &doc, dir.path(), &[]);
    assert_eq!(code, 0, "{err}");
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("multi-weight-audit.json")).unwrap()).unwrap();
    for c in json["report"]["components"].as_array().unwrap() {
        assert_eq!(c["value"].as_f64(), Some(1.0), "{c}");
    }
}

#[test]
fn apply_identity_symbol_gives_product() {
    let dir = tempfile::tempdir().unwrap();
    let doc = r#"{"n":1,"symbol":{"kind":"constant"},"grid":{"half_width":4,"points":128},
        "inputs":[{"kind":"gaussian","center":[0],"width":1},{"kind":"gaussian","center":[0.5],"width":0.7}]}"#;
    let (code, _, err) = mwlab("apply", doc, dir.path(), &[]);
    assert_eq!(code, 0, "{err}");
    let csv = std::fs::read_to_string(dir.path().join("apply.csv")).unwrap();
    for line in csv.lines().skip(1) {
        let v: Vec<f64> = line.split(',').map(|s| s.parse().unwrap()).collect();
        let x = v[0];
        let expect = (-x * x).exp() * (-(x - 0.5f64).powi(2) / 0.49).exp();
        assert!((v[1] - expect).abs() < 1e-8 && v[2].abs() < 1e-8, "{line}");
    }
}

#[test]
fn unknown_key_exits_with_validation_code() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _, err) = mwlab("maximal-ratio", r#"{"n":1,"l":1,"r":2,"q":1,"rho_delta":3}"#, dir.path(), &[]);
    assert_eq!(code, 2);
    let e: serde_json::Value = serde_json::from_str(err.trim()).unwrap();
    assert_eq!(e["error"]["kind"], "config");
    assert!(e["error"]["message"].as_str().unwrap().contains("rho_delta"));
}

#[test]
fn resource_error_exits_with_code_three() {
    let dir = tempfile::tempdir().unwrap();
    let doc = r#"{"n":2,"symbol":{"kind":"model","mu":1.5},"grid":{"half_width":4,"points":64},
        "inputs":[{"kind":"gaussian","center":[0,0],"width":1},{"kind":"gaussian","center":[0,0],"width":1}]}"#;
    let (code, _, err) = mwlab("apply", doc, dir.path(), &[]);
    assert_eq!(code, 3, "{err}");
    assert!(err.contains("\"resource\""));
}

#[test]
fn failing_verdict_exits_with_code_one() {
    let dir = tempfile::tempdir().unwrap();
    let (code, out, _) = mwlab("hormander-norm", r#"{"n":1,"l":1,"mu":0.75,"max_ratio":1.5}"#, dir.path(), &[]);
    assert_eq!(code, 1);
    assert!(out.contains("fail"));
}

#[test]
fn outputs_do_not_depend_on_thread_budget() {
    let doc = r#"{"n":1,"l":1,"r":2,"q":1,"epsilons":[0.0625,0.03125,0.015625,0.0078125]}"#;
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    assert_eq!(mwlab("maximal-ratio", doc, a.path(), &["--threads", "1"]).0, 0);
    assert_eq!(mwlab("maximal-ratio", doc, b.path(), &["--threads", "4"]).0, 0);
    for ext in ["csv", "json", "svg"] {
        let f = format!("maximal-ratio.{ext}");
        assert_eq!(std::fs::read(a.path().join(&f)).unwrap(), std::fs::read(b.path().join(&f)).unwrap(), "{f}");
    }
}
