use std::path::PathBuf;
use std::process::{Command, Output};

fn zeropi(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut c = Command::new(env!("CARGO_BIN_EXE_zeropi"));
    c.args(args);
    for (k, v) in env {
        c.env(k, v);
    }
    c.output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn rows(csv: &str) -> Vec<Vec<f64>> {
    csv.lines().skip(1).map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect()
}

fn tmp(name: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("zeropi-cli-{}", std::process::id()));
    std::fs::create_dir_all(&d).unwrap();
    d.join(name)
}

#[test]
fn fig1b_rows_are_doublets() {
    let o = zeropi(&["sweep", "fig1b", "--grid", "0.5,1.5,3"], &[]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = stdout(&o);
    assert!(csv.starts_with("axis,E_0,E_1,E_2,E_3,E_4,E_5,E_6,E_7,E_8,E_9,E_10,E_11,max_split,conv_est\n"));
    let r = rows(&csv);
    assert_eq!(r.len(), 3);
    for row in &r {
        assert_eq!(row.len(), 15);
        assert!(row[13] < 1e-7, "splitting {}", row[13]);
        assert!(row[14] < 1e-8, "drift {}", row[14]);
    }
}

#[test]
fn fig2_decoupled_row_matches_oscillator_ladder() {
    let o = zeropi(&["sweep", "fig2", "--grid", "0"], &[]);
    assert_eq!(o.status.code(), Some(0));
    let r = rows(&stdout(&o));
    let expect = [0.3, 0.3, 0.7, 0.7, 0.8, 0.8, 1.2, 1.2, 1.3, 1.3, 1.5, 1.5];
    for (e, x) in r[0][1..13].iter().zip(expect) {
        assert!((e - x).abs() < 1e-9, "{e} vs {x}");
    }
}

#[test]
fn empty_grid_gives_header_only() {
    let o = zeropi(&["sweep", "fig3a", "--grid", ""], &[]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "axis,E_0,E_1,E_2,E_3,max_split,conv_est\n");
}

#[test]
fn numbers_carry_seventeen_significant_digits() {
    let o = zeropi(&["sweep", "fig3a", "--grid", "0.1"], &[]);
    let line = stdout(&o).lines().nth(1).unwrap().to_string();
    for f in line.split(',') {
        let mantissa = f.split('e').next().unwrap().trim_start_matches('-');
        assert_eq!(mantissa.replace('.', "").len(), 17, "{f}");
    }
}

#[test]
fn output_is_identical_across_runs_and_thread_counts() {
    let args = ["sweep", "fig3a", "--grid", "0,0.25,0.5,0.75"];
    let a = zeropi(&args, &[("ZEROPI_THREADS", "1")]);
    let b = zeropi(&args, &[("ZEROPI_THREADS", "2")]);
    let c = zeropi(&args, &[("ZEROPI_THREADS", "2")]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(b.stdout, c.stdout);
}

#[test]
fn axis_override_replaces_fixed_parameter() {
    let args = ["sweep", "fig1b", "--axis", "n_g", "--grid", "0,0.5", "--count", "2"];
    let o = zeropi(&args, &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("missing parameter `e_j`"));
    let o = zeropi(&[&args[..], &["--set", "e_j=1"]].concat(), &[]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r = rows(&stdout(&o));
    assert_eq!(r[0][0], 0.0);
    assert_eq!(r[1][0], 0.5);
}

#[test]
fn spec_file_with_sidecar() {
    let spec = tmp("ring.json");
    let out = tmp("ring.csv");
    std::fs::write(
        &spec,
        r#"{"model": "ring", "fixed": {"e_cs": 1.0, "v2": 50.0}, "axis": {"name": "n_g", "grid": [0.0, 0.5]}, "count": 2}"#,
    )
    .unwrap();
    let o = zeropi(&["sweep", spec.to_str().unwrap(), "--out", out.to_str().unwrap()], &[]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(o.stdout.is_empty());
    let r = rows(&std::fs::read_to_string(&out).unwrap());
    assert_eq!(r.len(), 2);
    assert!(r[1][3] < 1e-7);
    let meta = std::fs::read_to_string(out.with_extension("csv.json")).unwrap();
    let v: serde_json::Value = serde_json::from_str(&meta).unwrap();
    assert_eq!(v["rows"], 2);
    assert_eq!(v["spec"]["model"], "ring");
    assert!(v["failed_points"].as_array().unwrap().is_empty());
}

#[test]
fn invalid_specs_exit_with_validation_code() {
    let bad = tmp("bad.json");
    std::fs::write(&bad, r#"{"model": "zeropi", "fixed": {}, "axis": {"name": "e_j", "grid": [0]}, "count": 2, "extra": 1}"#).unwrap();
    for args in [
        vec!["sweep", bad.to_str().unwrap()],
        vec!["sweep", "no-such-spec"],
        vec!["sweep", "fig2", "--grid", "0.2,0.1"],
        vec!["sweep", "fig2", "--grid", "0,nan"],
        vec!["sweep", "fig2", "--grid", "-1,0"],
        vec!["sweep", "fig2", "--count", "0"],
        vec!["sweep", "fig3a", "--grid", "1.0"],
        vec!["report", "symmetry", "--param", "varphi_ext=1"],
        vec!["report", "swcheck", "--param", "nope=1"],
    ] {
        let o = zeropi(&args, &[]);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(!o.stderr.is_empty());
    }
}

#[test]
fn nonconvergence_exits_with_code_three() {
    let o = zeropi(&["sweep", "fig1b", "--grid", "1", "--tol", "1e-30"], &[]);
    assert_eq!(o.status.code(), Some(3));
    let r = rows(&stdout(&o));
    assert_eq!(r.len(), 1);
}

#[test]
fn symmetry_report_passes_at_control_point() {
    let o = zeropi(&["report", "symmetry"], &[]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    assert!(s.contains("generated group order 8"));
    assert!(s.ends_with("symmetry report: PASS\n"));
    assert!(!s.contains("FAIL"));
}

#[test]
fn symmetry_report_flags_broken_charge_conjugation() {
    let o = zeropi(&["report", "symmetry", "--param", "n_g=0.3"], &[]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn swcheck_sums_match_closed_forms() {
    let out = tmp("sw.json");
    let o = zeropi(&["report", "swcheck", "--out", out.to_str().unwrap()], &[]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let checks: Vec<_> = v["rows"].as_array().unwrap().iter().filter(|r| r.get("check").is_some()).collect();
    assert_eq!(checks.len(), 2);
    for c in checks {
        assert!(c["value"].as_f64().unwrap() < 1e-8);
    }
}

#[test]
fn semiclassics_report_tabulates_sums_and_slopes() {
    let o = zeropi(&["report", "semiclassics"], &[]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    assert!(s.contains("partial sum"));
    assert!(s.contains("Feynman-Hellmann"));
}

#[test]
fn selfcheck_passes() {
    let o = zeropi(&["selfcheck"], &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}

#[test]
fn selfcheck_restores_sound_blas_without_cargo_environment() {
    let o = Command::new(env!("CARGO_BIN_EXE_zeropi")).arg("selfcheck").env_remove("OPENBLAS_CORETYPE").output().unwrap();
    assert_eq!(o.status.code(), Some(0));
}
