use std::f64::consts::PI;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use linedelta::io::{read_field_dump, sidecar_path};

fn linedelta(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_linedelta")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn integrate_circle_with_defaults() {
    let o = linedelta(&["integrate", "--curve", "circle"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let value: f64 = stdout(&o).trim().parse().unwrap();
    assert!((value - 2.0 * PI).abs() / (2.0 * PI) < 0.02, "{value}");
}

#[test]
fn excised_field_dump_is_zero_near_the_corner() {
    let dir = tempfile::tempdir().unwrap();
    let stem = dir.path().join("lgraph");
    let o = linedelta(&[
        "field", "--curve", "lgraph", "--excise", "auto", "--h", "1/32", "--out", stem.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let dump = dir.path().join("lgraph.delta.f64");
    let (meta, field) = read_field_dump(&dump).unwrap();
    assert_eq!(meta.config["excise"], "auto");
    let radius = 4.0 / 32.0;
    let mut near = 0;
    let mut nonzero_outside = 0;
    for (i, v) in field.values().iter().enumerate() {
        let c = field.grid().cell_center(i);
        if c.norm() < radius {
            near += 1;
            assert_eq!(*v, 0.0, "cell {i} at {c:?}");
        } else if *v > 0.0 {
            nonzero_outside += 1;
        }
    }
    assert!(near > 0 && nonzero_outside > 0);
}

#[test]
fn missing_curve_file_is_a_usage_error_without_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("r.csv");
    let stem = dir.path().join("f");
    let o = linedelta(&[
        "converge",
        "--curve",
        dir.path().join("absent.json").to_str().unwrap(),
        "--csv",
        csv.to_str().unwrap(),
        "--out",
        stem.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("absent.json"));
    assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        &["integrate", "--curve", "circle", "--h", "0"][..],
        &["integrate", "--curve", "circle", "--kernel", "gauss"],
        &["integrate", "--curve", "circle", "--wat"],
        &["frobnicate"],
    ] {
        assert_eq!(linedelta(args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn monotonicity_violation_exits_one() {
    // x² + 4y² is not a level set of the circle: it decreases away from it
    let o = linedelta(&["integrate", "--curve", "circle", "--formula", "levelset-codim2", "--phi", "ellip", "--h", "1/16"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("not increasing"));
}

#[test]
fn converge_report_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, threads: &str| {
        let csv = dir.path().join(name);
        let o = linedelta(&[
            "converge", "--curve", "circle", "--kernel", "cosine", "--mode", "radial", "--eps-coupling", "4", "--h",
            "1/16,1/32,1/64", "--threads", threads, "--csv", csv.to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        assert!(stdout(&o).contains("observed order"));
        csv
    };
    let a = run("a.csv", "1");
    let b = run("b.csv", "3");
    let text = fs::read_to_string(&a).unwrap();
    assert_eq!(text, fs::read_to_string(&b).unwrap());
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("h,eps,value,abs_err,rel_err"));
    assert_eq!(lines.count(), 3);
    let meta: serde_json::Value = serde_json::from_str(&fs::read_to_string(sidecar_path(&a)).unwrap()).unwrap();
    assert_eq!(meta["config"]["kernel"], "cosine");
    assert_eq!(meta["config"]["h_text"][0], "1/16");
}

#[test]
fn field_reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let run = |stem: &Path| {
        let o = linedelta(&["field", "--curve", "helix", "--h", "1/16", "--slice", "32", "--out", stem.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    };
    let stem = dir.path().join("a");
    let suffixes = [".delta.f64", ".delta.f64.meta.json", ".delta.slice.csv"];
    let read_all = || suffixes.map(|s| fs::read(format!("{}{s}", stem.display())).unwrap());
    run(&stem);
    let first = read_all();
    run(&stem);
    assert!(first == read_all());
}

#[test]
fn config_file_and_codim1() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(&cfg, "formula = \"codim1\"\ndim = 2\nh = \"1/128\"\nkernel = \"hat\"\n").unwrap();
    let o = linedelta(&["integrate", "--config", cfg.to_str().unwrap(), "--kernel", "cosine"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let value: f64 = stdout(&o).trim().parse().unwrap();
    assert!((value - 2.0 * PI).abs() < 0.01 * 2.0 * PI);
}

#[test]
fn distance_dumps_four_fields() {
    let dir = tempfile::tempdir().unwrap();
    let stem = dir.path().join("d");
    let o = linedelta(&["distance", "--curve", "zaxis", "--h", "1/8", "--domain", "-1,1", "--out", stem.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let (_, rho) = read_field_dump(&dir.path().join("d.rho.f64")).unwrap();
    let (_, gx) = read_field_dump(&dir.path().join("d.grad_x.f64")).unwrap();
    let i = rho.grid().index(13, 8, 0);
    let c = rho.grid().cell_center(i);
    assert!((rho.values()[i] - c.x.hypot(c.y)).abs() < 1e-15);
    assert!((gx.values()[i] - c.x / c.x.hypot(c.y)).abs() < 1e-15);
}
