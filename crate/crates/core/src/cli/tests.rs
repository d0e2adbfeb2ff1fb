use std::fs;
use std::path::Path;

use super::*;
use crate::model::SystemParams;

fn cfg(text: &str) -> crate::Result<RunConfig> {
    RunConfig::parse(text, &Overrides::default())
}

fn run_args(args: &[&str]) -> i32 {
    run(std::iter::once("kerrcat").chain(args.iter().copied()))
}

#[test]
fn empty_config_resolves_to_device_defaults() {
    let c = cfg("scenario = \"fig2-map\"").unwrap();
    assert_eq!(c.scenario, Scenario::Fig2Map);
    assert_eq!(c.params.xi, PHASE_MAP_XI);
    assert_eq!(c.params.k_a, 0.7);
    assert_eq!(c.params.alpha, 1.3);
    assert_eq!(c.seed, 0);
    assert_eq!(c.snail.e_c, 109.0);

    let c = cfg("scenario = \"stark-fit\"").unwrap();
    assert_eq!(c.params, SystemParams::default());
    let c = cfg("scenario = \"projected-compare\"").unwrap();
    assert_eq!(c.params.ramp, PROJECTED_RAMP);
    let c = cfg("scenario = \"fig2-map\"\n[params]\nxi = 1.5\n").unwrap();
    assert_eq!(c.params.xi, 1.5);
}

#[test]
fn scenario_names_roundtrip() {
    for s in Scenario::ALL {
        assert_eq!(Scenario::parse(s.name()).unwrap(), s);
        let c = cfg(&format!("scenario = \"{s}\"")).unwrap();
        assert_eq!(c.scenario, s);
    }
    assert!(matches!(Scenario::parse("fig4"), Err(crate::Error::Config(_))));
}

#[test]
fn parse_errors_name_the_problem() {
    let e = cfg("scenario = \"fig2-map\"\n[params]\nalpha = 1.2\nalpha = 1.4\n").unwrap_err();
    let msg = e.to_string();
    assert!(msg.contains("duplicate key `alpha`") && msg.contains("line 4"), "{msg}");

    let e = cfg("scenario = \"fig2-map\"\n[params]\nbeta = 1\n").unwrap_err();
    assert!(e.to_string().contains("beta"), "{e}");
    let e = cfg("scenario = \"fig2-map\"\nextra = 1\n").unwrap_err();
    assert!(e.to_string().contains("extra"), "{e}");
    let e = cfg("scenario = \"fig2-map\"\n[params]\nalpha = \"big\"\n").unwrap_err();
    assert!(matches!(e, crate::Error::Config(_)));
    assert!(cfg("").unwrap_err().to_string().contains("missing scenario"));
}

#[test]
fn truncation_guard_rejects_large_cat_at_validation() {
    let c = cfg("scenario = \"fig2-map\"\n[params]\nalpha = 3.0\nn_fock = 30\n").unwrap();
    let e = c.validate().unwrap_err();
    assert!(matches!(e, crate::Error::Truncation { .. }));
    assert_eq!(Category::of(&e).exit_code(), 3);
}

#[test]
fn overrides_layer_in_order() {
    let o = Overrides {
        scenario: Some("stark-fit".into()),
        seed: Some(9),
        workers: Some(2),
        set: vec![
            "params.alpha=1.6".into(),
            "params.t1_a=infinite".into(),
            "stark.v={start=0.0, stop=100.0, count=3}".into(),
            "params.alpha=1.7".into(),
        ],
        ..Default::default()
    };
    let c = RunConfig::parse("scenario = \"fig2-map\"\nseed = 1\n", &o).unwrap();
    assert_eq!(c.scenario, Scenario::StarkFit);
    assert_eq!((c.seed, c.workers), (9, 2));
    assert_eq!(c.params.alpha, 1.7);
    assert!(!c.params.t1_a.is_finite());
    assert_eq!(c.stark.v.values(), vec![0.0, 50.0, 100.0]);

    let bad = Overrides {
        set: vec!["params.alpha".into()],
        ..Default::default()
    };
    assert!(RunConfig::parse("scenario = \"fig2-map\"", &bad).is_err());
    let bad = Overrides {
        set: vec!["seed.x=1".into()],
        ..Default::default()
    };
    assert!(RunConfig::parse("scenario = \"fig2-map\"", &bad).is_err());
}

#[test]
fn grids_expand() {
    assert_eq!(Grid::range(1.0, 2.0, 1).values(), vec![1.0]);
    assert_eq!(Grid::range(0.0, 1.0, 5).values(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
    assert_eq!(Grid::List(vec![3.0, 1.0]).values(), vec![3.0, 1.0]);
    assert!(Grid::range(0.0, 1.0, 0).values().is_empty());
}

#[test]
fn inputs_hash_ignores_destination_only() {
    let a = cfg("scenario = \"stark-synth\"\nout = \"x\"\nworkers = 1\n").unwrap();
    let b = cfg("scenario = \"stark-synth\"\nout = \"y\"\nworkers = 8\n").unwrap();
    assert_eq!(a.inputs_hash(), b.inputs_hash());
    let c = cfg("scenario = \"stark-synth\"\nseed = 1\n").unwrap();
    assert_ne!(a.inputs_hash(), c.inputs_hash());
}

fn read(dir: &Path, name: &str) -> String {
    fs::read_to_string(dir.join(name)).unwrap()
}

fn manifest(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&read(dir, MANIFEST)).unwrap()
}

#[test]
fn stark_fit_pipeline_recovers_conversion_factor() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("stark");
    let code = run_args(&["--scenario", "stark-fit", "--out", out.to_str().unwrap()]);
    assert_eq!(code, 0);
    let fit: serde_json::Value = serde_json::from_str(&read(&out, "stark_fit.json")).unwrap();
    let c = fit["values"][0].as_f64().unwrap();
    assert!((c / 6.57e-4 - 1.0).abs() < 1e-10, "{c}");
    let m = manifest(&out);
    assert_eq!(m["scenario"], "stark-fit");
    assert_eq!(m["seed"], 0);
    assert_eq!(m["artifacts"].as_array().unwrap().len(), 2);
    // Exactly one manifest, nothing outside the directory.
    let files: Vec<_> = fs::read_dir(tmp.path()).unwrap().collect();
    assert_eq!(files.len(), 1);
}

#[test]
fn manifest_reruns_identically() {
    let tmp = tempfile::tempdir().unwrap();
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    let code = run_args(&[
        "--scenario",
        "stark-synth",
        "--out",
        a.to_str().unwrap(),
        "--seed",
        "42",
        "--set",
        "stark.noise_sigma=0.003",
    ]);
    assert_eq!(code, 0);
    let m = a.join(MANIFEST);
    assert_eq!(run_args(&["--config", m.to_str().unwrap(), "--out", b.to_str().unwrap()]), 0);
    assert_eq!(read(&a, "stark.csv"), read(&b, "stark.csv"));
    assert_eq!(manifest(&a)["inputs_hash"], manifest(&b)["inputs_hash"]);
    assert_eq!(manifest(&a)["config"]["seed"], 42);
    // Another seed changes the noise.
    let c = tmp.path().join("c");
    let code = run_args(&[
        "--config",
        m.to_str().unwrap(),
        "--out",
        c.to_str().unwrap(),
        "--seed",
        "43",
    ]);
    assert_eq!(code, 0);
    assert_ne!(read(&a, "stark.csv"), read(&c, "stark.csv"));
}

#[test]
fn csv_numbers_carry_full_precision() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("s");
    assert_eq!(run_args(&["--scenario", "stark-synth", "--out", out.to_str().unwrap()]), 0);
    let text = read(&out, "stark.csv");
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("v,freq"));
    for line in lines {
        for field in line.split(',') {
            let mantissa = field.split('e').next().unwrap();
            assert_eq!(mantissa.trim_start_matches('-').len(), 18, "{field}");
        }
    }
}

#[test]
fn fig3_sweep_shape_and_worker_determinism() {
    let tmp = tempfile::tempdir().unwrap();
    let mut texts = Vec::new();
    for workers in ["1", "8"] {
        let out = tmp.path().join(workers);
        let code = run_args(&[
            "--scenario",
            "fig3-sweep",
            "--out",
            out.to_str().unwrap(),
            "--workers",
            workers,
            "--set",
            "params.n_fock=16",
        ]);
        assert!(code == 0 || code == 5, "exit {code}");
        let text = read(&out, "fig3_z_t.csv");
        let rows: Vec<&str> = text.lines().collect();
        assert_eq!(rows.len(), 1 + 8);
        assert!(rows.iter().all(|r| r.split(',').count() == 1 + 200));
        texts.push(text);
    }
    assert_eq!(texts[0], texts[1]);
}

#[test]
fn exit_codes_by_category() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("o");
    let o = out.to_str().unwrap();
    assert_eq!(run_args(&["--scenario", "nope", "--out", o]), 2);
    assert_eq!(run_args(&["--bogus-flag"]), 2);
    assert_eq!(run_args(&["--scenario", "fig2-map", "--out", o, "--set", "params.alpha=3.0"]), 3);
    assert_eq!(run_args(&["--config", "/nonexistent/run.toml"]), 2);
    let missing = tmp.path().join("missing.csv");
    let code = run_args(&[
        "--scenario",
        "stark-fit",
        "--out",
        o,
        "--set",
        &format!("stark.input=\"{}\"", missing.display()),
    ]);
    assert_eq!(code, 6);
    // Unidentifiable data: the fit result and manifest are still written.
    let zeros = tmp.path().join("zeros.csv");
    fs::write(&zeros, "v,freq\n0,5200\n0,5200\n0,5200\n").unwrap();
    let code = run_args(&[
        "--scenario",
        "stark-fit",
        "--out",
        o,
        "--set",
        &format!("stark.input=\"{}\"", zeros.display()),
    ]);
    assert_eq!(code, 5);
    assert!(read(&out, "stark_fit.json").contains("error"));
    assert_eq!(manifest(&out)["fit_failures"].as_array().unwrap().len(), 1);
}

#[test]
fn integrator_abort_maps_to_its_code() {
    let e = crate::Error::IntegratorAbort {
        step: 1,
        time: 0.0,
        reason: "x".into(),
        suggested_dt: 1e-4,
    };
    assert_eq!(Category::of(&e).exit_code(), 4);
    assert_eq!(Category::of(&crate::Error::Io("x".into())).exit_code(), 6);
    assert_eq!(Category::of(&crate::Error::NoMinimum("x".into())).exit_code(), 5);
}
