use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use dirac_cli::{parse_config, ExperimentConfig};
use serde_json::Value;

fn dirac(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dirac"))
        .args(args)
        .current_dir(dir)
        .env_remove("DIRAC_OUT_DIR")
        .output()
        .unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn summary(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("summary.json")).unwrap()).unwrap()
}

const DENSITY: &str = r#"
budget = 100000

[source]
kind = "halton"

[policy]
kind = "density"
density = { kind = "polynomial", coefficients = [1.0, 1.0] }

[function]
kind = "coordinate"
"#;

#[test]
fn density_estimate_exits_zero() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "density.toml", DENSITY);
    let out = dirac(tmp.path(), &["estimate", "--config", &cfg, "--out", "res"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let s = summary(&tmp.path().join("res"));
    let re = s["result"]["final_estimate"]["re"].as_f64().unwrap();
    assert!((re - 5.0 / 9.0).abs() < 1e-3);
    assert_eq!(s["result"]["stop_reason"], "window-cauchy");
    let header = fs::read_to_string(tmp.path().join("res/trace.csv")).unwrap();
    assert!(header.starts_with("m,re_num,im_num,re_den,im_den,re_est,im_est,den_ratio\n"));
}

#[test]
fn settings_echo_round_trips() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "density.toml", DENSITY);
    let out = dirac(tmp.path(), &["estimate", "--config", &cfg, "--out", "res", "--budget", "50000", "--blocks", "4"]);
    assert_eq!(out.status.code(), Some(0));
    let s = summary(&tmp.path().join("res"));
    let echoed = serde_json::to_string(&s["settings"]).unwrap();
    let reparsed: ExperimentConfig = parse_config(&echoed).unwrap();
    assert_eq!(reparsed.budget, 50_000);
    assert_eq!(reparsed.blocks, 4);
    let again = serde_json::to_value(&reparsed).unwrap();
    assert_eq!(again, s["settings"]);
}

#[test]
fn env_var_sets_default_output_dir() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "density.toml", DENSITY);
    let out = Command::new(env!("CARGO_BIN_EXE_dirac"))
        .args(["estimate", "--config", &cfg])
        .current_dir(tmp.path())
        .env("DIRAC_OUT_DIR", tmp.path().join("from-env"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(tmp.path().join("from-env/summary.json").exists());
    let out = dirac(tmp.path(), &["estimate", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(0));
    assert!(tmp.path().join("dirac-out/summary.json").exists());
}

#[test]
fn certify_constant_source_exits_four() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "c.toml",
        "mode = \"certify\"\nbudget = 10000\nhierarchy = [1, 2]\n[source]\nkind = \"constant\"\nvalue = 0.3\n",
    );
    let out = dirac(tmp.path(), &["run", "--config", &cfg, "--out", "res"]);
    assert_eq!(out.status.code(), Some(4));
    let rows = fs::read_to_string(tmp.path().join("res/trace.csv")).unwrap();
    assert_eq!(rows.lines().count(), 3);
    assert!(rows.lines().skip(1).all(|l| l.ends_with(",false")));
}

#[test]
fn alternating_phase_exits_two() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "alt.toml",
        "budget = 100000\n[source]\nkind = \"index\"\n[policy]\nkind = \"oscillatory\"\n\
         action = { kind = \"alternating\" }\n[function]\nkind = \"constant\"\n",
    );
    let out = dirac(tmp.path(), &["estimate", "--config", &cfg, "--out", "res"]);
    assert_eq!(out.status.code(), Some(2));
    let s = summary(&tmp.path().join("res"));
    assert_eq!(s["result"]["final_estimate"], Value::Null);
    assert_eq!(s["result"]["stop_reason"], "degenerate");
}

#[test]
fn budget_without_convergence_exits_three() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "slow.toml",
        "budget = 2000\ntrace_stride = 100\n[source]\nkind = \"pseudorandom\"\n\
         [function]\nkind = \"cosine\"\nfrequency = 40.0\n[stopping]\nrel_tol = 1e-12\n",
    );
    let out = dirac(tmp.path(), &["estimate", "--config", &cfg, "--out", "res", "--seed", "5"]);
    assert_eq!(out.status.code(), Some(3));
    let s = summary(&tmp.path().join("res"));
    assert_eq!(s["result"]["stop_reason"], "budget-exhausted");
    assert_eq!(s["settings"]["source"]["seed"], 5);
}

#[test]
fn config_errors_exit_one() {
    let tmp = tempfile::tempdir().unwrap();
    let bad_name = write(
        tmp.path(),
        "bad.toml",
        "budget = 100000\n[source]\nkind = \"halton\"\n[policy]\nkind = \"frenel\"\n[function]\nkind = \"coordinate\"\n",
    );
    let out = dirac(tmp.path(), &["estimate", "--config", &bad_name]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("policy.kind"));

    let small = write(tmp.path(), "small.toml", "budget = 10\n[source]\nkind = \"halton\"\n[function]\nkind = \"coordinate\"\n");
    let out = dirac(tmp.path(), &["estimate", "--config", &small]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("budget"));

    let broken = write(tmp.path(), "broken.toml", "budget = 10\n[source\n");
    let out = dirac(tmp.path(), &["estimate", "--config", &broken]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));

    let seeded = write(tmp.path(), "seed.toml", DENSITY);
    let out = dirac(tmp.path(), &["estimate", "--config", &seeded, "--seed", "3"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn oracle_and_compare_modes() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "fresnel.toml",
        "budget = 200000\nblocks = 4\n[source]\nkind = \"halton\"\noffset = 1\n[source.pullback]\nkind = \"normal\"\n\
         [policy]\nkind = \"oscillatory\"\naction = { kind = \"quadratic\", matrix = [[1.0]] }\n\
         [function]\nkind = \"polynomial\"\ncoefficients = [0.0, 0.0, 1.0]\n[compare]\ntolerance = 5e-3\n",
    );
    let out = dirac(tmp.path(), &["oracle", "--config", &cfg, "--out", "oracle"]);
    assert_eq!(out.status.code(), Some(0));
    let v = &summary(&tmp.path().join("oracle"))["result"]["value"];
    assert!((v["re"].as_f64().unwrap() - 0.5).abs() < 1e-8);
    assert!((v["im"].as_f64().unwrap() + 0.5).abs() < 1e-8);

    let out = dirac(tmp.path(), &["compare", "--config", &cfg, "--out", "cmp"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(summary(&tmp.path().join("cmp"))["result"]["pass"], true);

    let strict = fs::read_to_string(&cfg).unwrap().replace("tolerance = 5e-3", "tolerance = 1e-9");
    let strict = write(tmp.path(), "strict.toml", &strict);
    let out = dirac(tmp.path(), &["compare", "--config", &strict, "--out", "strict"]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn fresnel_scan_writes_one_row_per_sigma() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "scan.toml",
        "mode = \"fresnel-scan\"\nbudget = 100000\nblocks = 4\n[source]\nkind = \"halton\"\noffset = 1\n\
         [fresnel]\nsigmas = [0.5, 1.0]\n",
    );
    let out = dirac(tmp.path(), &["run", "--config", &cfg, "--out", "res"]);
    assert!(matches!(out.status.code(), Some(0) | Some(3)));
    let rows = fs::read_to_string(tmp.path().join("res/trace.csv")).unwrap();
    assert_eq!(rows.lines().count(), 3);
    let s = summary(&tmp.path().join("res"));
    assert_eq!(s["result"]["points"].as_array().unwrap().len(), 2);
}
