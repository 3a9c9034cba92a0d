//! End-to-end tests of the `snls` binary and the harness library:
//! strict config parsing, atomic run directories, manifest checksums,
//! byte-level reproducibility, and the exit-code contract.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use snls_harness::config::parse_config;
use snls_harness::manifest::{sha256_hex, RunManifest, MANIFEST_FILE};

fn snls() -> Command {
    Command::new(env!("CARGO_BIN_EXE_snls"))
}

/// Writes `text` as a config file and returns its path.
fn write_config(dir: &Path, text: &str) -> PathBuf {
    let path = dir.join("config.toml");
    fs::write(&path, text).unwrap();
    path
}

fn run_snls(subcommand: &str, config: &Path, out: &Path, extra: &[&str]) -> Output {
    snls()
        .arg(subcommand)
        .arg("--config")
        .arg(config)
        .arg("--output-dir")
        .arg(out)
        .args(extra)
        .output()
        .expect("binary runs")
}

fn read_manifest(dir: &Path) -> RunManifest {
    let text = fs::read_to_string(dir.join(MANIFEST_FILE)).unwrap();
    serde_json::from_str(&text).unwrap()
}

/// Every checksum in the manifest must match the bytes on disk, and the
/// directory must contain exactly the listed outputs plus the manifest.
fn assert_manifest_consistent(dir: &Path) -> RunManifest {
    let manifest = read_manifest(dir);
    assert_eq!(manifest.status, "complete");
    assert!(manifest.finished_utc.is_some());
    for (name, expected) in &manifest.outputs {
        let bytes = fs::read(dir.join(name)).unwrap();
        assert_eq!(
            &sha256_hex(&bytes),
            expected,
            "checksum mismatch for {name}"
        );
    }
    let mut on_disk: Vec<String> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    on_disk.sort();
    let mut expected: Vec<String> = manifest.outputs.keys().cloned().collect();
    expected.push(MANIFEST_FILE.to_string());
    expected.sort();
    assert_eq!(
        on_disk,
        expected,
        "stray or missing files in {}",
        dir.display()
    );
    manifest
}

const SIMULATE_CONSTANT: &str = r#"
kind = "simulate"
seed = 11

[lattice]
cutoff = 2

[sim]
dt = 0.01
t-horizon = 0.2

[data]
kind = "constant"
amplitude = 0.4
"#;

#[test]
fn simulate_without_noise_keeps_mass_constant() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(tmp.path(), SIMULATE_CONSTANT);
    let out = tmp.path().join("run");
    let output = run_snls("simulate", &config, &out, &[]);
    assert!(
        output.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&output.stderr)
    );

    let manifest = assert_manifest_consistent(&out);
    assert_eq!(manifest.kind, "simulate");
    assert_eq!(manifest.seed, 11);
    assert!(manifest.outputs.contains_key("ledger.csv"));
    assert!(manifest.outputs.contains_key("config.toml"));

    let ledger = fs::read_to_string(out.join("ledger.csv")).unwrap();
    let mut lines = ledger.lines();
    assert_eq!(lines.next().unwrap(), "time,mass,energy,h1");
    let masses: Vec<f64> = lines
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert_eq!(
        masses.len(),
        21,
        "dt 0.01 over horizon 0.2, all steps stored"
    );
    let m0 = masses[0];
    assert!(
        (m0 - 0.16).abs() < 1e-12,
        "mass of constant data 0.4 is 0.16"
    );
    for m in &masses {
        assert!(
            (m - m0).abs() <= 1e-10 * m0,
            "deterministic mass drifted: {m} vs {m0}"
        );
    }
}

#[test]
fn identical_configs_give_identical_output_checksums() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(tmp.path(), SIMULATE_CONSTANT);
    let out_a = tmp.path().join("a");
    let out_b = tmp.path().join("b");
    assert!(run_snls("simulate", &config, &out_a, &[]).status.success());
    assert!(run_snls("simulate", &config, &out_b, &[]).status.success());

    let ma = assert_manifest_consistent(&out_a);
    let mb = assert_manifest_consistent(&out_b);
    assert_eq!(ma.config_sha256, mb.config_sha256);
    assert_eq!(ma.outputs, mb.outputs, "reruns must be byte-identical");
    for name in ma.outputs.keys() {
        assert_eq!(
            fs::read(out_a.join(name)).unwrap(),
            fs::read(out_b.join(name)).unwrap()
        );
    }
}

#[test]
fn seed_override_changes_the_config_hash_and_outputs() {
    let text = r#"
kind = "simulate"
seed = 1

[lattice]
cutoff = 2

[sim]
dt = 0.02
t-horizon = 0.1

[noise]
family = "single-mode"
mode = [1, 0, 0]
lambda = 0.5

[data]
kind = "gaussian"
h1 = 0.2
"#;
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(tmp.path(), text);
    let out_a = tmp.path().join("a");
    let out_b = tmp.path().join("b");
    assert!(run_snls("simulate", &config, &out_a, &[]).status.success());
    assert!(run_snls("simulate", &config, &out_b, &["--seed", "2"])
        .status
        .success());
    let ma = read_manifest(&out_a);
    let mb = read_manifest(&out_b);
    assert_eq!(ma.seed, 1);
    assert_eq!(mb.seed, 2);
    assert_ne!(ma.config_sha256, mb.config_sha256);
    assert_ne!(
        ma.outputs.get("ledger.csv"),
        mb.outputs.get("ledger.csv"),
        "different seeds must give different stochastic ledgers"
    );
}

#[test]
fn verify_estimates_emits_reports_and_raw_ratios() {
    let text = r#"
kind = "verify-estimates"
seed = 1

[estimates]
check = "strichartz"
cutoff = 4
p = 100.0
blocks = [1, 2, 4]
trials = 4
"#;
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(tmp.path(), text);
    let out = tmp.path().join("run");
    let output = run_snls("verify-estimates", &config, &out, &[]);
    assert!(
        output.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&output.stderr)
    );
    assert_manifest_consistent(&out);

    let reports = fs::read_to_string(out.join("reports.jsonl")).unwrap();
    let lines: Vec<&str> = reports.lines().collect();
    assert_eq!(lines.len(), 1);
    let report: serde_json::Value = serde_json::from_str(lines[0]).unwrap();
    assert_eq!(report["schema"], "snls.fit-report.v1");
    assert_eq!(report["check"], "strichartz p=100");
    let slope = report["slope"].as_f64().unwrap();
    // The cube-localization growth exponent for p = 100 is
    // 3/2 - 5/100 = 1.45; the audit must stay under it plus slack.
    assert!(slope <= 1.65, "strichartz p=100 slope {slope} exceeds 1.65");

    let raw = fs::read_to_string(out.join("raw.csv")).unwrap();
    let rows: Vec<&str> = raw.lines().collect();
    assert_eq!(rows[0], "check,x,trial,lhs,rhs,ratio");
    assert_eq!(rows.len(), 1 + 3 * 4, "3 blocks x 4 trials of raw samples");
    for row in &rows[1..] {
        assert!(row.starts_with("strichartz p=100,"));
    }
}

#[test]
fn noise_stats_emits_moment_reports_with_confidence_intervals() {
    let text = r#"
kind = "noise-stats"
seed = 5

[lattice]
cutoff = 2

[noise]
family = "power-law"
c = 0.4
alpha = 2.5

[noise-stats]
s = 1.0
p = 2.0
q = 6.0
r = 6.0
t-horizon = 0.25
n-steps = 4
ensemble = 100
"#;
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(tmp.path(), text);
    let out = tmp.path().join("run");
    let output = run_snls("noise-stats", &config, &out, &[]);
    assert!(
        output.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&output.stderr)
    );
    assert_manifest_consistent(&out);

    let moments = fs::read_to_string(out.join("moments.jsonl")).unwrap();
    let lines: Vec<serde_json::Value> = moments
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(lines.len(), 4);
    for line in &lines[..3] {
        assert_eq!(line["schema"], "snls.moment-report.v1");
        let mean = line["mean"].as_f64().unwrap();
        let ci = line["ci95"].as_array().unwrap();
        let lo = ci[0].as_f64().unwrap();
        let hi = ci[1].as_f64().unwrap();
        assert!(lo <= mean && mean <= hi, "mean outside its CI");
        assert_eq!(line["ensemble"], 100);
    }
    assert_eq!(lines[3]["schema"], "snls.operator-size.v1");
    assert!(lines[3]["value"].as_f64().unwrap() > 0.0);
}

#[test]
fn norms_and_windows_kinds_produce_their_documents() {
    let tmp = tempfile::tempdir().unwrap();

    let norms_text = r#"
kind = "norms"
seed = 9

[lattice]
cutoff = 2

[data]
kind = "gaussian"
h1 = 0.7

[norms]
s = 1.0
t-horizon = 0.5
n-steps = 8
"#;
    let config = write_config(tmp.path(), norms_text);
    let out = tmp.path().join("norms-run");
    let output = run_snls("norms", &config, &out, &[]);
    assert!(
        output.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&output.stderr)
    );
    assert_manifest_consistent(&out);
    let lines: Vec<serde_json::Value> = fs::read_to_string(out.join("norms.jsonl"))
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(lines.len(), 8);
    let mut names = Vec::new();
    for line in &lines {
        assert_eq!(line["schema"], "snls.norm-value.v1");
        let v = line["value"].as_f64().unwrap();
        assert!(v.is_finite() && v >= 0.0);
        names.push(line["name"].as_str().unwrap().to_string());
    }
    assert!(names.contains(&"sobolev-data".to_string()));
    assert!(names.contains(&"free-path-z".to_string()));
    // The data was rescaled to H^1 size 0.7 and the Sobolev record is
    // evaluated at s = 1, so it must reproduce that size.
    let sob = &lines[names.iter().position(|n| n == "sobolev-data").unwrap()];
    assert!((sob["value"].as_f64().unwrap() - 0.7).abs() < 1e-12);

    let windows_text = r#"
kind = "windows"
seed = 3

[lattice]
cutoff = 2

[noise]
family = "power-law"
c = 0.01
alpha = 3.0

[windows]
eta = 0.5
t-end = 0.5
n-steps = 8
data-h1 = 0.1
"#;
    let config = write_config(tmp.path(), windows_text);
    let out = tmp.path().join("windows-run");
    let output = run_snls("windows", &config, &out, &[]);
    assert!(
        output.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&output.stderr)
    );
    assert_manifest_consistent(&out);
    let plan: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("plan.json")).unwrap()).unwrap();
    assert_eq!(plan["schema"], "snls.window-plan.v1");
    assert_eq!(plan["eta"], 0.5);
    let windows = plan["windows"].as_array().unwrap();
    assert!(!windows.is_empty());
    assert_eq!(plan["t_start"].as_f64().unwrap(), 0.0);
    let last = windows.last().unwrap();
    assert!((last["end"].as_f64().unwrap() - 0.5).abs() < 1e-12);
}

#[test]
fn invalid_configs_exit_2_and_list_every_problem() {
    let text = r#"
kind = "simulate"
seed = 1
seeed = 2

[lattice]
cutoff = 2

[sim]
dt = -0.5
t-horizon = 0.1
dt-max = 1.0

[data]
kind = "constant"
amplitude = 0.1
"#;
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(tmp.path(), text);
    let out = tmp.path().join("run");
    let output = run_snls("simulate", &config, &out, &[]);
    assert_eq!(output.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("unknown key `seeed`"), "{stderr}");
    assert!(stderr.contains("unknown key `sim.dt-max`"), "{stderr}");
    assert!(!out.exists(), "a failed run must not create its directory");

    // The semantic problem surfaces once the unknown keys are fixed.
    let fixed = text
        .replace("seeed = 2\n", "")
        .replace("dt-max = 1.0\n", "");
    let problems = parse_config(&fixed).unwrap_err();
    assert!(problems
        .iter()
        .any(|p| p.contains("sim.dt must be positive")));
}

#[test]
fn mismatched_subcommand_and_missing_config_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(tmp.path(), SIMULATE_CONSTANT);
    let out = tmp.path().join("run");

    let output = run_snls("windows", &config, &out, &[]);
    assert_eq!(output.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("does not match config kind"), "{stderr}");
    assert!(!out.exists());

    let output = run_snls("simulate", &tmp.path().join("missing.toml"), &out, &[]);
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn existing_output_directory_is_refused_and_untouched() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(tmp.path(), SIMULATE_CONSTANT);
    let out = tmp.path().join("run");
    fs::create_dir(&out).unwrap();
    fs::write(out.join("precious.txt"), "do not clobber").unwrap();

    let output = run_snls("simulate", &config, &out, &[]);
    assert_eq!(output.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("already exists"), "{stderr}");
    assert_eq!(
        fs::read_to_string(out.join("precious.txt")).unwrap(),
        "do not clobber"
    );
    let entries = fs::read_dir(&out).unwrap().count();
    assert_eq!(entries, 1, "refused run must not add files");
}

#[test]
fn blow_up_exits_3_with_no_partial_outputs() {
    // Constant data with astronomical amplitude: the first nonlinear
    // substep overflows to non-finite values and trips the blow-up
    // guard.
    let text = r#"
kind = "simulate"
seed = 1

[lattice]
cutoff = 1

[sim]
dt = 0.01
t-horizon = 0.05

[data]
kind = "constant"
amplitude = 1e200
"#;
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(tmp.path(), text);
    let out = tmp.path().join("run");
    let output = run_snls("simulate", &config, &out, &[]);
    assert_eq!(output.status.code(), Some(3));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("numerical abort"), "{stderr}");
    assert!(!out.exists(), "aborted run must not leave a directory");
    let leftovers: Vec<String> = fs::read_dir(tmp.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter(|n| n != "config.toml")
        .collect();
    assert!(
        leftovers.is_empty(),
        "staging directories must be cleaned up: {leftovers:?}"
    );
}

#[test]
fn run_directory_config_reparses_to_the_resolved_config() {
    let tmp = tempfile::tempdir().unwrap();
    let config_path = write_config(tmp.path(), SIMULATE_CONSTANT);
    let out = tmp.path().join("run");
    assert!(run_snls("simulate", &config_path, &out, &["--seed", "77"])
        .status
        .success());
    let stored = fs::read_to_string(out.join("config.toml")).unwrap();
    let stored_config = parse_config(&stored).expect("stored config parses");
    assert_eq!(
        stored_config.seed, 77,
        "stored config reflects the override"
    );
    assert_eq!(
        stored_config.output_dir, None,
        "output location is stripped"
    );
    // Its hash is exactly the manifest's config hash.
    let manifest = read_manifest(&out);
    assert_eq!(manifest.config_sha256, sha256_hex(stored.as_bytes()));
}

#[test]
fn manifest_output_table_is_deterministically_ordered() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(tmp.path(), SIMULATE_CONSTANT);
    let out = tmp.path().join("run");
    assert!(run_snls("simulate", &config, &out, &[]).status.success());
    let text = fs::read_to_string(out.join(MANIFEST_FILE)).unwrap();
    let manifest: RunManifest = serde_json::from_str(&text).unwrap();
    let keys: Vec<&String> = manifest.outputs.keys().collect();
    let mut sorted = keys.clone();
    sorted.sort();
    assert_eq!(keys, sorted);
    let _: BTreeMap<String, String> = manifest.outputs;
}
