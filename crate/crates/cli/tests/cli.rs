use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use swimlab_core::FieldCloud;

const BASE: &str = r#"{
    "schema": 1,
    "seed": 3,
    "frequency": 5000,
    "sources": [{"position": [0, 0, 0]}],
    "medium": {"speed": 343, "attenuation": "none"},
    "path": {"kind": "linear", "start": [0.1, 0, 0], "end": [0.6, 0, 0], "count": 201},
    "render": {"width": 100, "height": 10},
    "analysis": {"temperature_c": 20}
}"#;

fn swimlab(args: &[&str], config: Option<&str>, out: &Path) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_swimlab"));
    cmd.args(args).arg("--out").arg(out);
    if let Some(text) = config {
        let path = out.with_extension("json");
        fs::write(&path, text).unwrap();
        cmd.arg("--config").arg(path);
    }
    cmd.output().unwrap()
}

fn patched(patch: &str) -> String {
    let mut base: serde_json::Value = serde_json::from_str(BASE).unwrap();
    let patch: serde_json::Value = serde_json::from_str(patch).unwrap();
    for (k, v) in patch.as_object().unwrap() {
        if v.is_null() {
            base.as_object_mut().unwrap().remove(k);
        } else {
            base[k] = v.clone();
        }
    }
    base.to_string()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn simulate_writes_cloud_config_and_report() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("sim");
    let o = swimlab(&["simulate"], Some(BASE), &out);
    assert!(o.status.success(), "{}", stderr(&o));
    let cloud = FieldCloud::parse(&fs::read_to_string(out.join("cloud.swimcloud")).unwrap()).unwrap();
    assert_eq!(cloud.len(), 201);
    assert_eq!(cloud.seed(), 3);
    let report = fs::read_to_string(out.join("report.txt")).unwrap();
    assert_eq!(String::from_utf8(o.stdout).unwrap(), report);
    assert!(report.lines().all(|l| l.split_once('=').is_some()));
    assert!(report.contains("poses=201\n"));
    let normalized = fs::read_to_string(out.join("config.normalized.json")).unwrap();
    let reparsed = swimlab_cli::parse_config(&normalized).unwrap();
    assert_eq!(reparsed, swimlab_cli::parse_config(BASE).unwrap());
}

#[test]
fn analyze_reports_speed_and_theory() {
    let tmp = tempfile::tempdir().unwrap();
    let o = swimlab(&["analyze"], Some(BASE), &tmp.path().join("a"));
    assert!(o.status.success(), "{}", stderr(&o));
    let text = String::from_utf8(o.stdout).unwrap();
    let get = |k: &str| -> f64 {
        text.lines()
            .find_map(|l| l.strip_prefix(&format!("{k}=")))
            .unwrap_or_else(|| panic!("{k} missing in {text}"))
            .parse()
            .unwrap()
    };
    assert!((get("speed") - 343.0).abs() / 343.0 < 0.01);
    assert!((get("theory") - 343.2).abs() < 0.2);
    assert!(get("relative_error") < 0.01);
    assert!((get("wavelength") - 0.0686).abs() / 0.0686 < 0.01);
}

#[test]
fn render_and_animate_write_ppm() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("r");
    let o = swimlab(&["render"], Some(BASE), &out);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(fs::read(out.join("image.ppm")).unwrap().starts_with(b"P6\n100 10\n255\n"));

    let out = tmp.path().join("anim");
    let o = swimlab(&["animate", "--frames", "4"], Some(BASE), &out);
    assert!(o.status.success(), "{}", stderr(&o));
    let mut names: Vec<String> =
        fs::read_dir(out.join("frames")).unwrap().map(|e| e.unwrap().file_name().into_string().unwrap()).collect();
    names.sort();
    assert_eq!(names, ["frame_0000.ppm", "frame_0001.ppm", "frame_0002.ppm", "frame_0003.ppm"]);
    let normalized = fs::read_to_string(out.join("config.normalized.json")).unwrap();
    assert!(normalized.contains("\"frames\": 4"));
}

#[test]
fn seed_flag_overrides_config() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("s");
    let o = swimlab(&["simulate", "--seed", "99"], Some(BASE), &out);
    assert!(o.status.success());
    let cloud = FieldCloud::parse(&fs::read_to_string(out.join("cloud.swimcloud")).unwrap()).unwrap();
    assert_eq!(cloud.seed(), 99);
}

#[test]
fn noisy_runs_repeat_exactly_and_depend_on_seed() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = patched(r#"{"noise_rms": 0.1, "lockin": {"sample_rate": 50000, "time_constant": 0.002}}"#);
    let run = |name: &str, seed: &str| {
        let out = tmp.path().join(name);
        let o = swimlab(&["simulate", "--seed", seed], Some(&cfg), &out);
        assert!(o.status.success(), "{}", stderr(&o));
        fs::read(out.join("cloud.swimcloud")).unwrap()
    };
    let a = run("a", "1");
    assert_eq!(a, run("b", "1"));
    assert_ne!(a, run("c", "2"));
}

#[test]
fn config_errors_exit_2_with_field() {
    let tmp = tempfile::tempdir().unwrap();
    let cases = [
        (patched(r#"{"medium": {"attenuation": "none"}}"#), "field=medium.speed"),
        (patched(r#"{"lockin": {"sample_rate": 40000, "time_constant": 0.002}}"#), "field=lockin.sample_rate"),
        (patched(r#"{"bogus": true}"#), "field=bogus"),
        ("{ not json".to_string(), "kind=config"),
    ];
    for (i, (cfg, needle)) in cases.iter().enumerate() {
        let o = swimlab(&["simulate"], Some(cfg), &tmp.path().join(format!("e{i}")));
        assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
        let err = stderr(&o);
        assert!(err.starts_with("error code=2 kind=config"), "{err}");
        assert!(err.contains(needle), "{err}");
    }
}

#[test]
fn missing_config_file_is_a_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_swimlab"))
        .args(["simulate", "--config"])
        .arg(tmp.path().join("absent.json"))
        .arg("--out")
        .arg(tmp.path().join("o"))
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn render_stage_errors_exit_4() {
    let tmp = tempfile::tempdir().unwrap();
    // A dot graph needs a line; a 2-D raster is rejected by the renderer.
    let cfg = patched(
        r#"{"path": {"kind": "raster", "min": [0.1, 0.1, 0], "max": [0.3, 0.3, 0], "counts": [5, 5, 1]},
            "dotgraph": {"height": 20}, "render": null, "analysis": null}"#,
    );
    let o = swimlab(&["render"], Some(&cfg), &tmp.path().join("r"));
    assert_eq!(o.status.code(), Some(4), "{}", stderr(&o));
    assert!(stderr(&o).starts_with("error code=4 kind=render"));
}

#[test]
fn analysis_errors_exit_5() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg =
        patched(r#"{"path": {"kind": "raster", "min": [0.1, 0.1, 0], "max": [0.3, 0.3, 0], "counts": [5, 5, 1]}}"#);
    let o = swimlab(&["analyze"], Some(&cfg), &tmp.path().join("a"));
    assert_eq!(o.status.code(), Some(5), "{}", stderr(&o));
    // Too short to hold three zero crossings.
    let cfg = patched(r#"{"path": {"kind": "linear", "start": [0.1, 0, 0], "end": [0.11, 0, 0], "count": 11}}"#);
    let o = swimlab(&["analyze"], Some(&cfg), &tmp.path().join("b"));
    assert_eq!(o.status.code(), Some(5), "{}", stderr(&o));
    assert!(stderr(&o).starts_with("error code=5 kind=analysis"));
}

#[test]
fn sightfield_subcommand_runs_without_scene() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = r#"{
        "schema": 1,
        "path": {"kind": "raster", "min": [-1, -1, 2], "max": [1, 1, 2], "counts": [21, 21, 1]},
        "render": {"width": 21, "height": 21, "splat_radius": 0},
        "sightfield": {"camera": {"forward": [0, 0, 1], "up": [0, 1, 0], "hfov": 40, "vfov": 30, "near": 0.1, "far": 10}}
    }"#;
    let out = tmp.path().join("sf");
    let o = swimlab(&["sightfield"], Some(cfg), &out);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(out.join("sightfield.ppm").exists());
    let cloud = FieldCloud::parse(&fs::read_to_string(out.join("sightfield.swimcloud")).unwrap()).unwrap();
    assert_eq!(cloud.frequency(), 0.0);
    let o = swimlab(&["simulate"], Some(cfg), &tmp.path().join("sim"));
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("field=sources"));
}

#[test]
fn fringe_recipe_reports_ratio_near_two() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("fringes");
    let o = swimlab(&["recipe", "fig11-fringes"], None, &out);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = fs::read_to_string(out.join("report.txt")).unwrap();
    let ratio: f64 = text.lines().find_map(|l| l.strip_prefix("fringe_ratio=")).unwrap().parse().unwrap();
    assert!((ratio - 2.0).abs() / 2.0 < 0.05, "{ratio}");
    assert!(out.join("d0.5/image.ppm").exists() && out.join("d1.0/image.ppm").exists());
}

#[test]
fn unknown_recipe_is_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let o = swimlab(&["recipe", "fig99"], None, &tmp.path().join("x"));
    assert!(!o.status.success());
}
