use std::path::Path;
use std::process::{Command, Output};

use dimerfit::manifest::RunManifest;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_dimerfit"))
}

fn run(args: &[&str], cwd: &Path) -> Output {
    bin().args(args).current_dir(cwd).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn cost_line(o: &Output) -> f64 {
    stdout(o)
        .lines()
        .find_map(|l| l.strip_prefix("cost "))
        .expect("cost line")
        .trim()
        .parse()
        .unwrap()
}

const MONOMER: &str = "16120,1450,0.67,37,223";

fn synthetic_monomer(dir: &Path) {
    let o = run(&["simulate", "--monomer", MONOMER, "--out", "monomer.txt"], dir);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn uncoupled_dimer_reproduces_monomer_and_dimer0_does_not() {
    let dir = tempfile::tempdir().unwrap();
    synthetic_monomer(dir.path());
    let same = run(
        &["simulate", "--monomer", MONOMER, "--dimer", "0,0,90,223", "--reference", "monomer.txt"],
        dir.path(),
    );
    assert!(same.status.success());
    assert!(cost_line(&same) < 1e-6);
    let d0 = run(
        &["simulate", "--monomer", MONOMER, "--dimer", "755,-28,28,286", "--grid", "14000:21000:2001", "--reference", "monomer.txt"],
        dir.path(),
    );
    assert!(d0.status.success());
    assert!(cost_line(&d0) > 0.1);
}

#[test]
fn simulate_rejects_bad_parameters() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["simulate", "--monomer", "16120,1450,-0.5,37,223"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("huang_rhys"));
    let o = run(&["simulate", "--monomer", "1,2,3"], dir.path());
    assert_eq!(o.status.code(), Some(1));
}

fn write(dir: &Path, name: &str, text: &str) {
    std::fs::write(dir.join(name), text).unwrap();
}

const FIT: &str = r#"
stage = "monomer"
spectrum = "monomer.txt"
output_dir = "run"
seed = 4
budget = 24

[gpr.fit]
restarts = 2
evals_per_restart = 40

[landscape]
points = 6
"#;

#[test]
fn fit_is_deterministic_and_landscape_reuses_cache() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    synthetic_monomer(d);
    write(d, "fit.toml", FIT);
    for out in ["a", "b"] {
        let o = run(&["fit", "--config", "fit.toml", "--out", out, "--workers", "2"], d);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        assert!(stdout(&o).contains("best cost"));
    }
    let a = std::fs::read(d.join("a/history.tsv")).unwrap();
    let b = std::fs::read(d.join("b/history.tsv")).unwrap();
    assert_eq!(a, b);
    assert_eq!(String::from_utf8_lossy(&a).lines().count(), 25);

    let (m, _) = RunManifest::load(&d.join("a/manifest.json")).unwrap();
    assert_eq!(m.evaluations, 24);
    assert_eq!(m.seed, 4);
    assert_eq!(m.best.full_names.len(), 5);
    m.check_files(&d.join("a")).unwrap();

    let o = run(&["landscape", "--manifest", "a/manifest.json", "--exact-cuts"], d);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("omega_vib_huang_rhys"));
    let (m, _) = RunManifest::load(&d.join("a/manifest.json")).unwrap();
    assert_eq!(m.files.landscapes.len(), 3);
    m.check_files(&d.join("a")).unwrap();

    let o = run(&["landscape", "--manifest", "a/manifest.json", "--exact-cuts"], d);
    assert!(o.status.success());
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(d.join("a/landscape.json")).unwrap()).unwrap();
    let stats = &report["landscapes"][0]["exact_stats"];
    assert_eq!(stats["evaluated"], 0);
    assert_eq!(stats["cached"], 36);
}

#[test]
fn dimer_stage_needs_monomer_parameters() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    synthetic_monomer(d);
    write(d, "dimer.toml", "stage = \"dimer\"\nspectrum = \"monomer.txt\"\n");
    let o = run(&["fit", "--config", "dimer.toml"], d);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("monomer"));
}

#[test]
fn dimer_stage_reads_monomer_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    synthetic_monomer(d);
    write(d, "fit.toml", FIT);
    assert!(run(&["fit", "--config", "fit.toml"], d).status.success());
    let o = run(
        &["simulate", "--monomer", MONOMER, "--dimer", "755,-28,28,286", "--grid", "14000:21000:801", "--out", "dimer.txt"],
        d,
    );
    assert!(o.status.success());
    write(
        d,
        "dimer.toml",
        r#"
stage = "dimer"
spectrum = "dimer.txt"
output_dir = "dimer-run"
budget = 14
n_sc = [0, 20]

[monomer]
monomer_manifest = "run/manifest.json"

[simulation]
n_max = 4

[gpr.fit]
restarts = 2
evals_per_restart = 30
"#,
    );
    let o = run(&["fit", "--config", "dimer.toml"], d);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let (m, _) = RunManifest::load(&d.join("dimer-run/manifest.json")).unwrap();
    let (mono, _) = RunManifest::load(&d.join("run/manifest.json")).unwrap();
    assert_eq!(m.monomer.unwrap().to_vec(), mono.best.full_params);
    assert_eq!(m.evaluations, 14);
}

#[test]
fn validate_reports() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    synthetic_monomer(d);
    write(d, "ok.toml", FIT);
    let o = run(&["validate", "--config", "ok.toml"], d);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).trim_end().ends_with("ok"));

    write(d, "missing.toml", &FIT.replace("monomer.txt", "nowhere.txt"));
    let o = run(&["validate", "--config", "missing.toml"], d);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("FAILED   spectrum"), "{}", stdout(&o));

    write(d, "small.toml", &format!("{FIT}\n[simulation]\nn_max = 3\n"));
    let o = run(&["validate", "--config", "small.toml"], d);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("warning  basis"), "{}", stdout(&o));

    write(d, "typo.toml", &format!("{FIT}\nbudgte = 3\n"));
    let o = run(&["validate", "--config", "typo.toml"], d);
    assert_eq!(o.status.code(), Some(1));
    let o = run(&["fit", "--config", "typo.toml"], d);
    assert_eq!(o.status.code(), Some(1));
}
