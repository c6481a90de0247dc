use std::path::Path;
use std::process::{Command, Output};

use ddcv::imgio::{read_map, write_map, MapFormat};
use ddcv::ScalarMap;

fn ddcv(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ddcv")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn csv_value(text: &str, key: &str) -> f64 {
    text.lines()
        .find_map(|l| l.strip_prefix(&format!("{key},")))
        .unwrap_or_else(|| panic!("no row {key} in\n{text}"))
        .trim()
        .parse()
        .unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn synth(dir: &Path, extra: &[&str]) {
    let mut args = vec!["synth", "--out-dir", p(dir), "--width", "48", "--height", "32"];
    args.extend_from_slice(extra);
    let o = ddcv(&args);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn synth_is_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let flags = ["--seed", "7", "--corruption", "salt:0.05,20"];
    synth(a.path(), &flags);
    synth(b.path(), &flags);
    for name in [
        "left.png",
        "right.png",
        "disparity.pfm",
        "estimate.pfm",
        "depth.pfm",
        "right_disparity.pfm",
        "corruption_mask.png",
        "manifest.toml",
    ] {
        let x = std::fs::read(a.path().join(name)).unwrap();
        let y = std::fs::read(b.path().join(name)).unwrap();
        assert_eq!(x, y, "{name} differs between runs");
    }
}

#[test]
fn clean_scene_manifest_lists_no_corruption() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path(), &[]);
    let text = std::fs::read_to_string(dir.path().join("manifest.toml")).unwrap();
    let manifest: toml::Table = text.parse().unwrap();
    assert_eq!(manifest["corrupted_count"].as_integer(), Some(0));
    assert!(manifest["corrupted"].as_array().unwrap().is_empty());
}

#[test]
fn loss_vanishes_at_ground_truth() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    synth(d, &["--seed", "3"]);
    let o = ddcv(&[
        "loss",
        "--left",
        p(&d.join("left.png")),
        "--right",
        p(&d.join("right.png")),
        "--disparity",
        p(&d.join("disparity.pfm")),
        "--right-disparity",
        p(&d.join("right_disparity.pfm")),
        "--depth",
        p(&d.join("depth.pfm")),
        "--grad",
        p(&d.join("grad.pfm")),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(csv_value(&text, "photometric") < 1e-6);
    assert_eq!(csv_value(&text, "lrc"), 0.0);
    assert_eq!(csv_value(&text, "ldr"), 0.0);
    let grad = read_map(&d.join("grad.pfm"), MapFormat::Pfm).unwrap();
    assert_eq!((grad.width(), grad.height()), (48, 32));
}

#[test]
fn confidence_then_sparsify() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    synth(d, &["--corruption", "salt:0.05,20", "--depth-transform", "power:1.5"]);
    let conf = d.join("conf.pfm");
    let o = ddcv(&[
        "confidence",
        "--disparity",
        p(&d.join("estimate.pfm")),
        "--depth",
        p(&d.join("depth.pfm")),
        "--out",
        p(&conf),
        "--color",
        p(&d.join("conf.png")),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let mean = csv_value(&stdout(&o), "mean_confidence");
    assert!((0.0..=1.0).contains(&mean));
    assert!(d.join("conf.png").exists());

    let o = ddcv(&[
        "sparsify",
        "--est",
        p(&d.join("estimate.pfm")),
        "--gt",
        p(&d.join("disparity.pfm")),
        "--confidence",
        p(&conf),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.starts_with("density,epe\n"));
    assert!(csv_value(&text, "auc") >= csv_value(&text, "optimal_auc"));

    let o = ddcv(&["eval-disp", "--est", p(&d.join("estimate.pfm")), "--gt", p(&d.join("disparity.pfm"))]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(csv_value(&text, "epe") > 0.0);
    assert!(csv_value(&text, "pep-1") >= csv_value(&text, "pep-3"));
}

#[test]
fn constant_disparity_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write_map(&ScalarMap::filled(16, 16, 4.0).unwrap(), &d.join("d.pfm"), MapFormat::Pfm).unwrap();
    let t = ScalarMap::from_fn(16, 16, |x, _| x as f64).unwrap();
    write_map(&t, &d.join("t.pfm"), MapFormat::Pfm).unwrap();
    let o = ddcv(&[
        "confidence",
        "--disparity",
        p(&d.join("d.pfm")),
        "--depth",
        p(&d.join("t.pfm")),
        "--out",
        p(&d.join("c.pfm")),
    ]);
    assert_eq!(o.status.code(), Some(3));
    assert!(!d.join("c.pfm").exists());
}

#[test]
fn shape_mismatch_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write_map(&ScalarMap::filled(16, 16, 4.0).unwrap(), &d.join("a.pfm"), MapFormat::Pfm).unwrap();
    write_map(&ScalarMap::filled(8, 16, 4.0).unwrap(), &d.join("b.pfm"), MapFormat::Pfm).unwrap();
    let o = ddcv(&["eval-disp", "--est", p(&d.join("a.pfm")), "--gt", p(&d.join("b.pfm"))]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn invalid_parameters_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    synth(d, &[]);
    let o = ddcv(&[
        "sparsify",
        "--est",
        p(&d.join("estimate.pfm")),
        "--gt",
        p(&d.join("disparity.pfm")),
        "--confidence",
        p(&d.join("estimate.pfm")),
        "--steps",
        "0",
    ]);
    assert_eq!(o.status.code(), Some(2));

    let o = ddcv(&["synth", "--out-dir", p(d), "--layout", "spiral"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("step-edge"));

    // LDR needs a depth map when its weight is non-zero
    let o = ddcv(&[
        "loss",
        "--left",
        p(&d.join("left.png")),
        "--right",
        p(&d.join("right.png")),
        "--disparity",
        p(&d.join("disparity.pfm")),
        "--right-disparity",
        p(&d.join("right_disparity.pfm")),
    ]);
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn missing_input_file_fails() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.pfm");
    let o = ddcv(&["eval-disp", "--est", p(&missing), "--gt", p(&missing)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("nope.pfm"));
}

#[test]
fn gradcheck_reports_injected_fault() {
    let o = ddcv(&["gradcheck", "--size", "12x10"]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert_eq!(stdout(&o).lines().filter(|l| l.ends_with(",pass")).count(), 6);

    let o = ddcv(&["gradcheck", "--size", "12x10", "--inject-sign-flip", "lrc"]);
    assert_eq!(o.status.code(), Some(1));
    let text = stdout(&o);
    let failing: Vec<_> = text.lines().filter(|l| l.ends_with(",FAIL")).collect();
    assert_eq!(failing.len(), 1, "{text}");
    assert!(failing[0].contains(",lrc,"));
}
