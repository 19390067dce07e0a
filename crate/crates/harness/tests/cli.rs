use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn ccmckp(args: &[&str], cwd: &Path) -> Output {
    let out = Command::new(env!("CARGO_BIN_EXE_ccmckp")).args(args).current_dir(cwd).output().unwrap();
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn golden(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures").join(name)
}

#[test]
fn gen_writes_the_golden_document() {
    let dir = tempfile::tempdir().unwrap();
    ccmckp(&["gen", "--benchmark", "lab", "--scale", "ls1", "--out", "inst"], dir.path());
    let written = std::fs::read(dir.path().join("inst/LAB-ls1.json")).unwrap();
    assert!(written == std::fs::read(golden("LAB-ls1.json")).unwrap());
}

#[test]
fn run_then_metrics_reproduces_the_results() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::copy(golden("LAB-ls1.json"), dir.path().join("lab.json")).unwrap();
    let plan = r#"
seed = 5
repetitions = 2
budget = { generations = 2 }
reference_samples = 20000

[[instances]]
path = "lab.json"

[[algorithms]]
variant = "full"
config = { population_size = 8, schedule = { cumulative_samples = [1000, 10000], thresholds = [0.999, "inf"] } }

[[algorithms]]
variant = "plain-nsga2"
config = { population_size = 8, schedule = { cumulative_samples = [1000, 10000], thresholds = [0.999, "inf"] } }
"#;
    std::fs::write(dir.path().join("plan.toml"), plan).unwrap();
    let out = ccmckp(&["run", "plan.toml", "--out", "res"], dir.path());
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("plain-nsga2"), "{stdout}");
    let res = dir.path().join("res");
    for f in ["results.csv", "summary.csv", "timing.csv", "manifest.json", "references.json"] {
        assert!(res.join(f).is_file(), "{f}");
    }
    ccmckp(&["metrics", "res"], dir.path());
    let results: Vec<Vec<String>> = read_csv(&res.join("results.csv"));
    let metrics: Vec<Vec<String>> = read_csv(&res.join("metrics.csv"));
    assert_eq!(metrics.len(), results.len());
}

#[test]
fn compare_mc_prints_a_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = ccmckp(
        &["compare-mc", "--solutions", "5", "--fixed", "2000", "--schedule", "1000:0.999,10000:inf"],
        dir.path(),
    );
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["solutions"], 5);
    assert!(report["opera_samples"].as_u64().unwrap() <= 5 * 10_000);
}

#[test]
fn bad_arguments_fail_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    for args in [&["gen", "--scale", "ls9"][..], &["run", "absent.toml"], &["compare-mc", "--solutions", "0"]] {
        let out = Command::new(env!("CARGO_BIN_EXE_ccmckp")).args(args).current_dir(dir.path()).output().unwrap();
        assert!(!out.status.success(), "{args:?}");
        assert!(!out.stderr.is_empty());
    }
}

fn read_csv(path: &Path) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_path(path).unwrap();
    r.records().map(|rec| rec.unwrap().iter().map(str::to_string).collect()).collect()
}
