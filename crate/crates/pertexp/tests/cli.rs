use std::path::Path;
use std::process::{Command, Output};

use pertexp::system_file::SystemFile;
use pertexp_core::systems::{build, Builtin, SystemParams};

fn pertexp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pertexp"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn run_to(path: &Path, extra: &[&str]) -> Output {
    let mut args = vec![
        "run",
        "--system",
        "bloch-siegert",
        "--method",
        "fm",
        "--order",
        "3",
        "--epsilon",
        "0.2",
        "--tmax",
        "60",
        "--samples",
        "600",
        "--output",
        path.to_str().unwrap(),
    ];
    args.extend_from_slice(extra);
    pertexp(&args)
}

#[test]
fn run_writes_one_row_per_sample() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bs.csv");
    let out = run_to(&path, &[]);
    assert!(out.status.success(), "{}", stderr(&out));
    let csv = std::fs::read_to_string(&path).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("t,P,P_ref,abs_err,unitarity_defect"));
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 600);
    assert_eq!(rows[0][0], 0.0);
    assert_eq!(rows[599][0], 60.0);
    for r in &rows {
        assert_eq!(r.len(), 5);
        assert!((r[1] - r[2]).abs() == r[3]);
        assert!(r[3] < 1e-3 && r[4] < 1e-12);
    }
    assert!(stderr(&out).contains("max |dP|"));
}

#[test]
fn identical_configs_give_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    assert!(run_to(&a, &[]).status.success());
    assert!(run_to(&b, &[]).status.success());
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn seventeen_significant_digits_in_csv() {
    let out = pertexp(&["run", "--system", "bloch-siegert", "--samples", "3", "--tmax", "1"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let row = text.lines().nth(2).unwrap();
    let t = row.split(',').next().unwrap();
    assert_eq!(t, "5.0000000000000000e-1");
}

#[test]
fn order_zero_is_a_config_error() {
    let out = pertexp(&["run", "--system", "bloch-siegert", "--order", "0"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("order"));
}

#[test]
fn bad_inputs_exit_two() {
    for args in [
        vec!["run", "--system", "bloch-siegert", "--observable", "1,3"],
        vec!["run", "--system", "bloch-siegert", "--tol", "1e-3"],
        vec!["run", "--system", "bloch-siegert", "--method", "nope"],
        vec!["run", "--system", "/nonexistent/system.json"],
        vec!["effective", "--system", "bloch-siegert", "--method", "magnus"],
        vec!["run", "--system", "bloch-siegert", "--beta", "2"],
    ] {
        let out = pertexp(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", stderr(&out));
    }
}

#[test]
fn resonant_frequency_override_exits_three_with_mode() {
    let out = pertexp(&["run", "--system", "three-lambda-qp", "--method", "fm", "--omega2", "24"]);
    assert_eq!(out.status.code(), Some(3), "{}", stderr(&out));
    let err = stderr(&out);
    assert!(err.contains("[2, -1]"), "{err}");
}

#[test]
fn strict_lie_deprit_at_resonance_exits_three() {
    let out = pertexp(&["run", "--system", "bloch-siegert", "--method", "ld", "--strict"]);
    assert_eq!(out.status.code(), Some(3), "{}", stderr(&out));
    let ok = pertexp(&["run", "--system", "bloch-siegert", "--method", "ld", "--samples", "5"]);
    assert!(ok.status.success());
}

fn parse_matrix(text: &str) -> Vec<(usize, usize, f64, f64)> {
    text.lines()
        .skip_while(|l| l.starts_with('#'))
        .skip(1)
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[0].parse().unwrap(), f[1].parse().unwrap(), f[2].parse().unwrap(), f[3].parse().unwrap())
        })
        .collect()
}

#[test]
fn effective_prints_the_three_lambda_matrix() {
    let out = pertexp(&["effective", "--system", "three-lambda-periodic", "--scaled-time", "--order", "4"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let w = Builtin::ThreeLambdaPeriodic.default_omega();
    let a = (6.0 - w * w) / w.powi(4);
    let b = 4.0 / w.powi(3);
    let c = 2.0 * (w * w - 6.0) / w.powi(4);
    let expected = [[a, a, b], [a, a, b], [b, b, c]];
    let entries = parse_matrix(&stdout(&out));
    assert_eq!(entries.len(), 9);
    for (i, j, re, im) in entries {
        let e = expected[i - 1][j - 1];
        assert!((re - e).abs() <= 1e-10 * e.abs(), "({i}, {j})");
        assert!(im.abs() < 1e-14);
    }
}

#[test]
fn first_order_effective_is_zero() {
    let out = pertexp(&["effective", "--system", "three-lambda-periodic", "--order", "1"]);
    assert!(out.status.success());
    assert!(parse_matrix(&stdout(&out)).iter().all(|e| e.2 == 0.0 && e.3 == 0.0));
}

#[test]
fn interaction_picture_effective_is_hermitian() {
    let out = pertexp(&["effective", "--system", "bloch-siegert", "--order", "2"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let m = parse_matrix(&stdout(&out));
    let at = |i: usize, j: usize| m.iter().find(|e| e.0 == i && e.1 == j).map(|e| (e.2, e.3)).unwrap();
    for i in 1..=2 {
        for j in 1..=2 {
            let (a, b) = (at(i, j), at(j, i));
            assert!((a.0 - b.0).abs() < 1e-12 && (a.1 + b.1).abs() < 1e-12);
        }
    }
}

#[test]
fn horizon_values() {
    let get = |args: &[&str]| -> (f64, f64) {
        let out = pertexp(args);
        assert!(out.status.success());
        let text = stdout(&out);
        let field = |name: &str| -> f64 {
            let line = text.lines().find(|l| l.starts_with(name)).unwrap();
            line.split(',').nth(1).unwrap().parse().unwrap()
        };
        (field("magnus,"), field("floquet-magnus,"))
    };
    let (m, _) = get(&["horizon", "--system", "bloch-siegert", "--epsilon", "0.2"]);
    assert!((m - 6.056).abs() < 1e-3);
    let (m, _) = get(&["horizon", "--system", "bloch-siegert", "--epsilon", "1"]);
    assert!((m - 3.608).abs() < 1e-3);
    let (_, fm) = get(&["horizon", "--system", "three-lambda-qp", "--omega", "12"]);
    assert!((fm - 0.074).abs() < 1e-3);
}

#[test]
fn sweep_merges_in_config_order() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sweep.csv");
    let out = pertexp(&[
        "run",
        "--system",
        "bloch-siegert",
        "--samples",
        "11",
        "--sweep",
        "epsilon=0.3,0.1,0.2",
        "--threads",
        "3",
        "--output",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let csv = std::fs::read_to_string(&path).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("epsilon,t,P,P_ref,abs_err,unitarity_defect"));
    let keys: Vec<&str> = lines.map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(keys.len(), 33);
    assert_eq!(&keys[..11], &["0.3"; 11]);
    assert_eq!(&keys[11..22], &["0.1"; 11]);
    assert_eq!(&keys[22..], &["0.2"; 11]);
}

#[test]
fn system_file_matches_builtin() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bs.json");
    let sys = build(Builtin::BlochSiegert, &SystemParams::default()).unwrap();
    std::fs::write(&path, SystemFile::from_system(&sys).to_json()).unwrap();
    let builtin = pertexp(&["run", "--system", "bloch-siegert", "--samples", "21"]);
    let file = pertexp(&["run", "--system", path.to_str().unwrap(), "--samples", "21"]);
    assert!(file.status.success(), "{}", stderr(&file));
    assert_eq!(builtin.stdout, file.stdout);
}
