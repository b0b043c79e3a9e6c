use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_fiberpoles"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("fiberpoles-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn square_fiber_populates_only_the_positive_side() {
    let path = scratch("square.csv");
    let o = run(&[
        "fiber",
        "--phase",
        "x^2",
        "--region",
        "+:1,-:1",
        "--g",
        "1",
        "--n",
        "1e5",
        "--seed",
        "7",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(&path).unwrap();
    let mut pos = 0;
    for line in text.lines().filter(|l| !l.starts_with('#')).skip(1) {
        let cols: Vec<&str> = line.split(',').collect();
        let v: f64 = cols[2].parse().unwrap();
        if cols[0] == "-" {
            assert_eq!(v, 0.0);
        } else if v > 0.0 {
            pos += 1;
        }
    }
    assert!(pos > 0);
}

#[test]
fn fiber_is_deterministic_for_a_seed() {
    let a = scratch("det_a.csv");
    let b = scratch("det_b.csv");
    for p in [&a, &b] {
        let o = run(&[
            "fiber",
            "--phase",
            "x^2 - y^2",
            "--n",
            "2e4",
            "--seed",
            "3",
            "--out",
            p.to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0));
    }
    // the embedded config records the output path, so compare the data rows only
    let rows = |p: &PathBuf| -> Vec<String> {
        std::fs::read_to_string(p)
            .unwrap()
            .lines()
            .filter(|l| !l.starts_with('#'))
            .map(String::from)
            .collect()
    };
    assert_eq!(rows(&a), rows(&b));
    let text = std::fs::read_to_string(&a).unwrap();
    assert!(text
        .lines()
        .any(|l| l.starts_with("-,") && !l.contains(",0.0,0.0,")));
}

#[test]
fn missing_phase_is_a_usage_error() {
    assert_eq!(run(&["fiber", "--n", "10"]).status.code(), Some(2));
}

#[test]
fn malformed_samples_are_rejected() {
    let path = scratch("bad.csv");
    std::fs::write(&path, "side,s\n+,abc\n").unwrap();
    let o = run(&[
        "mellin",
        "--samples",
        path.to_str().unwrap(),
        "--phase",
        "x^2",
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn cube_oracle_has_only_third_poles() {
    let o = run(&[
        "mellin",
        "--source",
        "oracle",
        "--phase",
        "x^3",
        "--g",
        "1 + x + x^2 + x^3 + x^4 + x^5",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let locs: Vec<&str> = v["poles"]
        .as_array()
        .unwrap()
        .iter()
        .map(|p| p["location"].as_str().unwrap())
        .collect();
    assert_eq!(locs, vec!["-1/3", "-2/3", "-4/3", "-5/3"]);
}

#[test]
fn smooth_bump_has_no_poles() {
    let o = run(&["mellin", "--source", "smooth-bump"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v["poles"].as_array().unwrap().is_empty());
}

#[test]
fn sampled_square_gives_the_half_pole() {
    let path = scratch("sq_half.csv");
    let o = run(&[
        "fiber",
        "--phase",
        "x^2",
        "--region",
        "+:1",
        "--n",
        "2e5",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let o = run(&[
        "mellin",
        "--samples",
        path.to_str().unwrap(),
        "--unnormalized",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let first = &v["poles"][0];
    assert_eq!(first["location"], "-1/2");
    // ∫₀ x^{2λ} dx has residue 1/2 at λ = −1/2
    let re = first["principal_parts"][0][0].as_f64().unwrap();
    assert!((re - 0.5).abs() < 0.01, "{re}");
}

#[test]
fn cycle_reports() {
    let o = run(&["cycle", "--k", "2", "--region", "+:1,-:1", "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["components"][0]["u"], "0");
    assert_eq!(v["components"][0]["zero"], true);
    assert_eq!(v["components"][1]["zero"], false);

    let o = run(&[
        "cycle", "--k", "3", "--region", "+:1,-:1", "--hat", "--json",
    ]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["cycle"], "Γ̂(A)");
    assert_eq!(v["components"][0]["zero"], true);

    let o = run(&["cycle", "--k", "2", "--region", ""]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("Γ(A) = {}"));
}

#[test]
fn spectrum_of_cusp() {
    let o = run(&["spectrum", "--exponents", "3,2", "--json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let us: Vec<&str> = v["cosets"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["u"].as_str().unwrap())
        .collect();
    assert_eq!(us, vec!["1/6", "5/6"]);
}

#[test]
fn oscillate_emits_a_table() {
    let o = run(&["oscillate", "--phase", "x^2", "--tau", "10,100,1000"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows[0], "tau,re,im,pred_re,pred_im");
    assert_eq!(rows.len(), 4);
}

#[test]
fn unsupported_family_is_explained() {
    let o = run(&["oscillate", "--phase", "x^3 + y^2", "--tau", "10"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("unsupported"));
}

#[test]
fn verify_exit_codes() {
    assert_eq!(run(&["verify", "lemma1"]).status.code(), Some(0));
    assert_eq!(run(&["verify", "detection-1d"]).status.code(), Some(0));
    assert_eq!(run(&["verify", "nonexistent"]).status.code(), Some(2));
}

#[test]
fn config_file_is_overridden_by_flags() {
    let cfg = scratch("cfg.json");
    std::fs::write(
        &cfg,
        r#"{"cycle": {"k": 3, "region": "+:1", "json": true}}"#,
    )
    .unwrap();
    let o = run(&["--config", cfg.to_str().unwrap(), "cycle", "--k", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["config"]["k"], 2);
    assert_eq!(v["config"]["region"], "+:1");
}
