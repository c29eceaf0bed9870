use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use wgcorr::correlations::{quantum_correlation, PropagatedBeams};
use wgcorr::TransverseGrid;
use wgcorr_cli::output::read_matrix;
use wgcorr_cli::{preset, run_scenario, RunReport};

fn wgcorr(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wgcorr")).args(args).env_remove("WGCORR_OUT").output().unwrap()
}

fn files(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .collect()
}

fn report(dir: &Path) -> RunReport {
    serde_json::from_slice(&fs::read(dir.join("report.json")).unwrap()).unwrap()
}

#[test]
fn presets_and_version() {
    let out = wgcorr(&["presets"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for name in ["fig1", "fig2a", "fig2b", "fig2c", "fig4a", "fig4b"] {
        assert!(text.lines().any(|l| l.starts_with(name)), "{name} missing");
    }
    let out = wgcorr(&["--version"]);
    assert!(out.status.success());
    assert!(String::from_utf8(out.stdout).unwrap().contains(env!("CARGO_PKG_VERSION")));
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let missing = tmp.path().join("nope.toml");
    let out = wgcorr(&["run", missing.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("nope.toml"));

    assert_eq!(wgcorr(&["run", "--preset", "fig9"]).status.code(), Some(2));
    assert_eq!(wgcorr(&["run"]).status.code(), Some(2));

    let bad = tmp.path().join("bad.toml");
    fs::write(&bad, "[geometry]\nwidth = \"57 parsecs\"\n").unwrap();
    assert_eq!(wgcorr(&["run", bad.to_str().unwrap()]).status.code(), Some(2));
    fs::write(&bad, "[grid]\nsampels = 10\n").unwrap();
    let out = wgcorr(&["run", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("sampels"));

    let dir = tmp.path().join("x");
    // three beams that the guide leaves in only two lobes
    let out = wgcorr(&["run", "--preset", "fig4a", "--set", "geometry.talbots=3.3", "--out", dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));

    let blocker = tmp.path().join("file");
    fs::write(&blocker, "").unwrap();
    let out = wgcorr(&["run", "--preset", "fig2a", "--out", blocker.join("sub").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn layering_order() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("c.toml");
    fs::write(&cfg, "name = \"custom\"\n[compute]\nseed = 5\nsamples = 3000\nthermal = \"mc\"\n[grid]\nmap_samples = 64\n").unwrap();
    let dir = tmp.path().join("out");
    let out = wgcorr(&[
        "run",
        cfg.to_str().unwrap(),
        "--preset",
        "fig2c",
        "--set",
        "grid.map_samples=48",
        "--seed",
        "8",
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(&dir);
    assert_eq!(r.name, "custom");
    assert_eq!(r.config.compute.seed, 8);
    assert_eq!(r.config.compute.samples, 3000);
    assert_eq!(r.config.grid.map_samples, 48);
    assert!((r.derived.length_in_talbot - 2.5).abs() < 1e-9);
    assert!(r.metrics.thermal_mc.as_ref().unwrap().within_3_sigma);
    let g = read_matrix(&dir.join("g2_thermal_0.csv")).unwrap();
    assert_eq!(g.rows.len(), 48);
}

#[test]
fn fig2b_report() {
    let tmp = tempfile::tempdir().unwrap();
    let out = wgcorr(&["run", "--preset", "fig2b", "--out", tmp.path().to_str().unwrap()]);
    assert!(out.status.success());
    let r = report(tmp.path());
    let thermal = r.metrics.thermal.unwrap();
    assert!((thermal.bunching_ratio.unwrap() - 3.0).abs() < 0.05 * 3.0);
    let quantum = r.metrics.quantum.unwrap();
    assert!(quantum.antibunched_fraction < 1e-3);
    assert!((r.derived.length_in_talbot - 3.0).abs() < 1e-9);
    assert_eq!(r.metrics.periods.unwrap().ratio, Some(4.0));
    // the manifest matches the files on disk
    let on_disk = files(tmp.path());
    assert_eq!(r.files.len() + 1, on_disk.len());
    for f in &r.files {
        assert_eq!(on_disk[&f.path].len() as u64, f.bytes);
    }
}

#[test]
fn outputs_are_byte_identical_across_runs_and_threads() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("run");
    let args = [
        "run",
        "--preset",
        "fig4b",
        "--set",
        "compute.thermal=\"mc\"",
        "--set",
        "compute.samples=5000",
        "--set",
        "grid.map3_samples=40",
        "--set",
        "output.slices=true",
        "--out",
        dir.to_str().unwrap(),
    ];
    let mut snapshots = Vec::new();
    for threads in ["1", "4", "4"] {
        let out = Command::new(env!("CARGO_BIN_EXE_wgcorr")).args(args).env("RAYON_NUM_THREADS", threads).output().unwrap();
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        snapshots.push(files(&dir));
    }
    assert!(snapshots[0].keys().any(|k| k.contains("slice")));
    assert_eq!(snapshots[0], snapshots[1]);
    assert_eq!(snapshots[1], snapshots[2]);
}

#[test]
fn emitted_maps_round_trip() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = preset("fig2a").unwrap();
    cfg.grid.map_samples = 64;
    let r = run_scenario(&cfg, tmp.path()).unwrap();
    let resolved = cfg.resolve().unwrap();
    let geom = resolved.geometry.with_mode_count(63).unwrap();
    let grid = TransverseGrid::for_geometry(&geom, 64).unwrap();
    let a = PropagatedBeams::new(&resolved.input, &geom, &grid).unwrap().at(geom.length()).unwrap();
    let g = quantum_correlation(&a, 2).unwrap();
    let file = read_matrix(&tmp.path().join("g2_quantum_0.csv")).unwrap();
    assert_eq!(file.header[0], "axis units: m");
    assert!(file.header[1].starts_with("z = "));
    let back: Vec<f64> = file.rows.iter().flatten().map(|v| v.unwrap()).collect();
    assert_eq!(back.len(), g.values.len());
    assert!(back.iter().zip(&g.values).all(|(a, b)| a.to_bits() == b.to_bits()));

    // intensities live on the full grid, maps on the coarser one
    let i = read_matrix(&tmp.path().join("intensity_0.csv")).unwrap();
    assert_eq!(i.rows.len(), resolved.grid.len());
    assert!(i.rows.iter().all(|r| r.len() == 2));
    assert_eq!(r.files.iter().filter(|f| f.path.ends_with(".csv")).count(), 3);
}

#[test]
fn reduced_g3_has_empty_cells() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = preset("fig4a").unwrap();
    cfg.grid.map3_samples = 24;
    cfg.compute.scan = None;
    run_scenario(&cfg, tmp.path()).unwrap();
    let m = read_matrix(&tmp.path().join("g3_quantum_0_reduced.csv")).unwrap();
    assert_eq!(m.rows.len(), 47);
    assert_eq!(m.rows[0][0], None);
    assert!(m.rows[23][23].is_some());
}

#[test]
fn report_config_reproduces_the_run() {
    let tmp = tempfile::tempdir().unwrap();
    let first = tmp.path().join("a");
    let mut cfg = preset("fig1").unwrap();
    cfg.compute.scan = None;
    cfg.grid.map_samples = 32;
    cfg.output.dir = first.display().to_string();
    let r1 = run_scenario(&cfg, &first).unwrap();
    let before = fs::read(first.join("report.json")).unwrap();

    let toml_path = tmp.path().join("echo.toml");
    fs::write(&toml_path, report(&first).config.to_toml()).unwrap();
    let out = wgcorr(&["run", toml_path.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(r1.files, report(&first).files);
    assert_eq!(before, fs::read(first.join("report.json")).unwrap());
}

#[test]
fn fig1_snapshots_repeat_after_two_talbot_distances() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = preset("fig1").unwrap();
    cfg.grid.map_samples = 96;
    run_scenario(&cfg, tmp.path()).unwrap();
    let load = |p: usize| -> Vec<f64> {
        read_matrix(&tmp.path().join(format!("g2_quantum_{p}.csv"))).unwrap().rows.into_iter().flatten().map(Option::unwrap).collect()
    };
    let rel = |a: &[f64], b: &[f64]| {
        a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>() / b.iter().map(|v| v.abs()).sum::<f64>()
    };
    let (g0, g_zt, g_2zt) = (load(0), load(2), load(4));
    assert!(rel(&g_2zt, &g0) < 1e-6);
    assert!(rel(&g_zt, &g0) > 0.1);
    // the intensity already repeats after one Talbot distance
    let carpet = read_matrix(&tmp.path().join("carpet.csv")).unwrap();
    let (first, mid) = (&carpet.rows[0], &carpet.rows[100]);
    let f: Vec<f64> = first.iter().map(|v| v.unwrap()).collect();
    let m: Vec<f64> = mid.iter().map(|v| v.unwrap()).collect();
    assert!(rel(&m, &f) < 1e-3);
    let pgm = fs::read(tmp.path().join("carpet.pgm")).unwrap();
    assert!(pgm.starts_with(b"P5\n1024 201\n255\n"));
}
