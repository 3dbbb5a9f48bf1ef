use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use aniso_core::grid::{read_field, write_field, BoxDomain, GridFunction, TensorGrid};
use aniso_core::norms::{gradient_norm, mixed_norm};
use aniso_core::ExponentVector;

fn aniso(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_aniso"))
        .args(args)
        .output()
        .expect("spawn aniso")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn demo(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("configs")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn write_config(dir: &Path, name: &str, json: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, json).unwrap();
    path
}

fn value_of(text: &str, key: &str) -> f64 {
    text.lines()
        .find_map(|l| l.strip_prefix(&format!("{key},")))
        .unwrap_or_else(|| panic!("no {key} row in {text}"))
        .split(',')
        .next()
        .unwrap()
        .parse()
        .unwrap()
}

fn validate_code(dir: &Path, json: &str) -> i32 {
    let cfg = write_config(dir, "v.json", json);
    aniso(&["validate", "--config", cfg.to_str().unwrap()]).status.code().unwrap()
}

#[test]
fn validate_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(validate_code(dir.path(), r#"{"p": [2, 2, 2]}"#), 0);
    assert_eq!(validate_code(dir.path(), r#"{"p": [2, 2]}"#), 1);
    assert_eq!(validate_code(dir.path(), r#"{"p": [3, 2, 2]}"#), 1);
    assert_eq!(validate_code(dir.path(), r#"{"p": [2, 2,"#), 2);
    assert_eq!(validate_code(dir.path(), r#"{"p": [1.5, 1.6], "s": [0.5, 0.6]}"#), 0);
    // p̄ < 2 and sp̄ < 2, but p_2 = 3.9 exceeds p*_s ≈ 2.16
    assert_eq!(validate_code(dir.path(), r#"{"p": [1.3, 3.9], "s": [0.1, 0.1]}"#), 1);
    assert_eq!(validate_code(dir.path(), r#"{"p": [1.3, 3.9], "mode": "local"}"#), 0);

    let cfg = write_config(dir.path(), "v.json", r#"{"p": [2, 2, 2]}"#);
    let out = aniso(&["validate", "--config", cfg.to_str().unwrap()]);
    let text = stdout(&out);
    assert!(text.starts_with("condition,ok,value\n"));
    assert!(text.contains("ordering,true,2\n"));
    assert!(text.contains("critical_exponent,true,6\n"));
}

#[test]
fn missing_config_file_is_an_io_error() {
    let out = aniso(&["validate", "--config", "/definitely/not/here.json"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn norm_of_indicator_and_zero_fields() {
    let dir = tempfile::tempdir().unwrap();
    let grid = TensorGrid::new(BoxDomain::new(vec![0.0, 0.0], vec![2.0, 0.5]).unwrap(), vec![7, 3]).unwrap();
    let ones = GridFunction::constant(grid.clone(), 1.0);
    let ones_path = dir.path().join("ones.field");
    write_field(&ones, &ones_path).unwrap();
    let cfg = write_config(dir.path(), "n.json", r#"{"p": [1.5, 3.0], "s": [0.4, 0.7]}"#);

    let out = aniso(&["norm", "--config", cfg.to_str().unwrap(), "--field", ones_path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    // the nodes cover a discrete measure of count * spacing per axis
    let a: [f64; 2] = [7.0 * 0.25, 3.0 * 0.125];
    let want = a[0].powf(1.0 / 1.5) * a[1].powf(1.0 / 3.0);
    assert!((value_of(&text, "mixed_norm") - want).abs() < 1e-14 * want);
    let total = value_of(&text, "fractional_seminorm");
    let parts = value_of(&text, "fractional_axis_1") + value_of(&text, "fractional_axis_2");
    assert!((total - parts).abs() <= 1e-14 * total);

    let zero_path = dir.path().join("zero.field");
    write_field(&GridFunction::zeros(grid), &zero_path).unwrap();
    let text = stdout(&aniso(&["norm", "--config", cfg.to_str().unwrap(), "--field", zero_path.to_str().unwrap()]));
    for line in text.lines().skip(1) {
        assert_eq!(line.split(',').nth(1), Some("0"), "{line}");
    }
}

#[test]
fn norm_values_match_library() {
    let dir = tempfile::tempdir().unwrap();
    let grid = TensorGrid::<f64>::unit(2, 6).unwrap();
    let u = aniso_core::grid::sample(|x| (3.0 * x[0]).sin() * x[1] - 0.2, &grid).unwrap();
    let path = dir.path().join("u.field");
    write_field(&u, &path).unwrap();
    let cfg = write_config(dir.path(), "n.json", r#"{"p": [1.7, 2.4]}"#);
    let text = stdout(&aniso(&["norm", "--config", cfg.to_str().unwrap(), "--field", path.to_str().unwrap()]));
    let p = ExponentVector::new(vec![1.7, 2.4]).unwrap();
    let back: GridFunction<f64> = read_field(&path).unwrap();
    assert_eq!(value_of(&text, "mixed_norm"), mixed_norm(&back, &p).unwrap());
    assert_eq!(value_of(&text, "gradient_norm"), gradient_norm(&back, &p).unwrap());
}

#[test]
fn norm_rejects_bad_field() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.field");
    std::fs::write(&bad, "ANISOFIELD 1\ndim 1\ncounts 2\nlower 0\nupper 1\n1.0\n").unwrap();
    let cfg = write_config(dir.path(), "n.json", r#"{"p": [2.0]}"#);
    let out = aniso(&["norm", "--config", cfg.to_str().unwrap(), "--field", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

fn solve_demo(cfg: &str) -> (f64, bool, PathBuf, tempfile::TempDir) {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    let out = aniso(&["solve", "--config", &demo(cfg), "--out", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    let fields: Vec<&str> = text.trim().split(',').collect();
    assert_eq!(fields[0], "lambda");
    assert_eq!(fields[2], "converged");
    (fields[1].parse().unwrap(), fields[3] == "true", out_dir, dir)
}

#[test]
fn solve_demo_1d() {
    let (lambda, converged, out, _dir) = solve_demo("solve_1d.json");
    assert!(converged);
    assert!((lambda - PI).abs() < 0.01 * PI, "{lambda}");
    let u: GridFunction<f64> = read_field(out.join("eigenfunction.field")).unwrap();
    assert_eq!(u.grid().counts(), &[255]);
    // cosine similarity with the sine profile
    let sine: Vec<f64> = (0..255).map(|k| (PI * (k + 1) as f64 / 256.0).sin()).collect();
    let dot: f64 = u.values().iter().zip(&sine).map(|(a, b)| a * b).sum();
    let nu: f64 = u.values().iter().map(|a| a * a).sum::<f64>().sqrt();
    let ns: f64 = sine.iter().map(|a| a * a).sum::<f64>().sqrt();
    assert!(dot.abs() / (nu * ns) >= 0.999);

    let hist = std::fs::read_to_string(out.join("history.csv")).unwrap();
    let mut lines = hist.lines();
    assert!(lines.next().unwrap().starts_with("# generated"));
    assert_eq!(lines.next(), Some("iter,Q,residual"));
    assert!(!hist.contains('\r'));
}

#[test]
fn solve_demo_2d() {
    let (lambda, converged, _, _dir) = solve_demo("solve_2d.json");
    assert!(converged);
    assert!((lambda - 2.0 * PI).abs() < 0.02 * 2.0 * PI, "{lambda}");
}

#[test]
fn sweep_demo_has_one_row_per_s() {
    let dir = tempfile::tempdir().unwrap();
    let out = aniso(&["sweep-s", "--config", &demo("sweep_1d.json"), "--out", dir.path().to_str().unwrap(), "--no-timestamp"]);
    assert_eq!(out.status.code(), Some(0));
    let csv = std::fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "s,lambda_s,lambda_local,lambda_local_limit,ratio,converged");
    assert_eq!(lines.len(), 6);
    let local: Vec<&str> = lines[1..].iter().map(|l| l.split(',').nth(2).unwrap()).collect();
    assert!(local.windows(2).all(|w| w[0] == w[1]));
}

#[test]
fn non_convergence_exits_3_and_writes_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "c.json",
        r#"{"p": [2.0], "counts": [63], "max_iter": 1, "tol_residual": 1e-14, "restarts": 1}"#,
    );
    let out_dir = dir.path().join("out");
    let out = aniso(&["solve", "--config", cfg.to_str().unwrap(), "--out", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stdout(&out).contains("converged,false"));
    assert!(out_dir.join("eigenfunction.field").exists());
    assert!(out_dir.join("history.csv").exists());
}

#[test]
fn higher_eigenvalues_are_refused() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", r#"{"p": [2.0], "counts": [15], "eigen_index": 2}"#);
    let out = aniso(&["solve", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("genus"));
}

#[test]
fn flags_override_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", r#"{"p": [2.0], "counts": [31], "restarts": 1, "rng_seed": 5}"#);
    let run = |seed: &str, sub: &str| {
        let o = dir.path().join(sub);
        aniso(&["solve", "--config", cfg.to_str().unwrap(), "--seed", seed, "--out", o.to_str().unwrap(), "--no-timestamp"]);
        std::fs::read_to_string(o.join("history.csv")).unwrap()
    };
    assert_eq!(run("5", "a"), run("5", "b"));
    assert_ne!(run("5", "a"), run("6", "c"));
}

#[test]
fn check_passes_with_default_seed() {
    let out = aniso(&["check"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.starts_with("invariant,max_error,pass\n"));
    assert!(value_of(&text, "duality") <= 1e-10);
    assert!(value_of(&text, "monotonicity") >= -1e-12);
    assert!(text.lines().skip(1).all(|l| l.ends_with(",true")));
}
