use std::path::Path;
use std::process::{Command, Output};

use bayesbench::{run_experiment, ExperimentName, Overrides, RunManifest};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_bayesbench"));
    c.env_remove("BAYESBENCH_THREADS");
    c
}

fn write(path: &Path, text: &str) {
    std::fs::write(path, text).unwrap();
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn files_in(dir: &Path) -> Vec<String> {
    let mut v: Vec<String> =
        std::fs::read_dir(dir).unwrap().map(|e| e.unwrap().file_name().to_string_lossy().into_owned()).collect();
    v.sort();
    v
}

fn assert_same_dirs(a: &Path, b: &Path) {
    assert_eq!(files_in(a), files_in(b));
    for name in files_in(a) {
        let (x, y) = (std::fs::read(a.join(&name)).unwrap(), std::fs::read(b.join(&name)).unwrap());
        if name == "manifest.json" {
            let strip = |bytes: &[u8]| {
                let mut v: serde_json::Value = serde_json::from_slice(bytes).unwrap();
                v.as_object_mut().unwrap().remove("duration_seconds");
                v
            };
            assert_eq!(strip(&x), strip(&y));
        } else {
            assert!(x == y, "{name} differs");
        }
    }
}

#[test]
fn bf_consistency_writes_the_full_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("bf");
    let o = bin().args(["run", "bf-consistency", "--seed", "1", "--out"]).arg(&out).output().unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    let mut rdr = csv::Reader::from_path(out.join("log_bf.csv")).unwrap();
    assert_eq!(rdr.headers().unwrap(), vec!["model", "n", "replicate", "log_bf"]);
    let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 400);
    assert_eq!(&rows[0][0], "normal");
    assert_eq!(&rows[0][1], "50");
    assert_eq!(&rows[399][0], "laplace");
    assert_eq!(&rows[399][1], "200");
    assert_eq!(&rows[399][2], "99");
    let m = RunManifest::read(out.join("manifest.json")).unwrap();
    m.verify(&out).unwrap();
    assert_eq!(m.config["seed"], 1);
    assert_eq!(m.config["replicates"], 100);
}

#[test]
fn reruns_are_identical_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    write(&cfg, r#"{"replicates": 5, "iterations": 4000, "burn_in": 500, "exact_draws": 300}"#);
    let mut outs = Vec::new();
    for (k, threads) in [(0, "1"), (1, "1"), (2, "3")] {
        let out = dir.path().join(format!("r{k}"));
        let o = bin()
            .args(["run", "rwmh-vs-exact", "--seed", "17", "--threads", threads, "--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(&out)
            .output()
            .unwrap();
        assert!(o.status.success(), "{}", stderr(&o));
        outs.push(out);
    }
    assert_same_dirs(&outs[0], &outs[1]);
    assert_same_dirs(&outs[0], &outs[2]);
}

#[test]
fn environment_supplies_the_thread_count() {
    let dir = tempfile::tempdir().unwrap();
    let run = |env: &str, out: &Path| {
        bin()
            .env("BAYESBENCH_THREADS", env)
            .args(["run", "bf-consistency", "--seed", "3", "--replicates", "6", "--out"])
            .arg(out)
            .output()
            .unwrap()
    };
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert!(run("1", &a).status.success());
    assert!(run("2", &b).status.success());
    assert_same_dirs(&a, &b);
    let o = run("many", &dir.path().join("c"));
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("BAYESBENCH_THREADS"));
}

#[test]
fn unknown_config_key_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    write(&cfg, r#"{"seed": 1, "replicatse": 3}"#);
    let out = dir.path().join("o");
    let o = bin().args(["run", "bf-consistency", "--config"]).arg(&cfg).arg("--out").arg(&out).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("replicatse"), "{}", stderr(&o));
    assert!(!out.exists());
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    // no seed anywhere
    let o = bin().args(["run", "bf-consistency", "--out"]).arg(&out).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("seed"));
    // invalid value
    let cfg = dir.path().join("c.json");
    write(&cfg, r#"{"seed": 1, "sample_sizes": [0]}"#);
    let o = bin().args(["run", "bf-consistency", "--config"]).arg(&cfg).arg("--out").arg(&out).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    // malformed JSON, missing file, unknown experiment, zero threads
    write(&cfg, "{ not json");
    let o = bin().args(["run", "bf-consistency", "--config"]).arg(&cfg).arg("--out").arg(&out).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    let o = bin().args(["run", "bf-consistency", "--config", "/nonexistent/c.json", "--out"]).arg(&out).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    let o = bin().args(["run", "no-such-experiment", "--seed", "1", "--out"]).arg(&out).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    let o = bin().args(["run", "bf-consistency", "--seed", "1", "--threads", "0", "--out"]).arg(&out).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(!out.exists());
}

#[test]
fn unwritable_output_is_a_runtime_error_and_leaves_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    write(&blocker, "x");
    let out = blocker.join("sub").join("out");
    let o = bin().args(["run", "bf-consistency", "--seed", "1", "--replicates", "2", "--out"]).arg(&out).output().unwrap();
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert_eq!(files_in(dir.path()), vec!["file"]);
}

#[test]
fn manifest_reruns_reproduce_the_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    write(&cfg, r#"{"seed": 4, "replicates": 3, "n": 30, "draws": 1000, "posterior_draws": 200}"#);
    let first = dir.path().join("first");
    let m = run_experiment(ExperimentName::BridgeVsExact, Some(&cfg), &Overrides::default(), &first, Some(1)).unwrap();
    m.verify(&first).unwrap();
    assert_eq!(m.experiment, ExperimentName::BridgeVsExact);
    assert!(m.files.iter().any(|f| f.path == "iterates.csv" && f.rows.is_some()));
    assert_eq!(RunManifest::read(first.join("manifest.json")).unwrap(), m);

    let second = dir.path().join("second");
    let o = bin().args(["run", "bridge-vs-exact", "--config"]).arg(first.join("manifest.json")).arg("--out").arg(&second).output().unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    assert_same_dirs(&first, &second);

    // a manifest for a different experiment is rejected
    let o = bin().args(["run", "gibbs-growth", "--config"]).arg(first.join("manifest.json")).arg("--out").arg(dir.path().join("x")).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn verify_detects_tampering() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    let over = Overrides { seed: Some(5), replicates: Some(3) };
    let m = run_experiment(ExperimentName::BfConsistency, None, &over, &out, Some(1)).unwrap();
    let text = std::fs::read_to_string(out.join("log_bf.csv")).unwrap();
    let trimmed: Vec<&str> = text.lines().take(3).collect();
    write(&out.join("log_bf.csv"), &(trimmed.join("\n") + "\n"));
    assert!(m.verify(&out).is_err());
    std::fs::remove_file(out.join("log_bf.csv")).unwrap();
    assert!(m.verify(&out).is_err());
}

#[test]
fn rerun_into_an_existing_directory_replaces_the_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    std::fs::create_dir(&out).unwrap();
    write(&out.join("notes.txt"), "keep");
    for seed in [1, 2] {
        let over = Overrides { seed: Some(seed), replicates: Some(2) };
        run_experiment(ExperimentName::BfConsistency, None, &over, &out, Some(1)).unwrap();
    }
    let m = RunManifest::read(out.join("manifest.json")).unwrap();
    assert_eq!(m.config["seed"], 2);
    m.verify(&out).unwrap();
    assert_eq!(std::fs::read_to_string(out.join("notes.txt")).unwrap(), "keep");
    assert_eq!(files_in(dir.path()), vec!["o"]);
}

fn plot(csv: &Path, kind: &str, out: &Path) -> Output {
    bin().arg("plot").arg(csv).args(["--kind", kind, "--out"]).arg(out).output().unwrap()
}

fn assert_svg(path: &Path) -> String {
    let text = std::fs::read_to_string(path).unwrap();
    assert!(text.starts_with("<svg") || text.starts_with("<?xml"), "{text}");
    assert!(text.trim_end().ends_with("</svg>"));
    text
}

#[test]
fn plots_render_every_kind() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let cases = [
        ("trace", "iteration,component,value\n1,mu,0.1\n2,mu,0.3\n1,sigma,1\n2,sigma,1.2\n"),
        ("density", "group,x,density\nnormal,0,0.4\nnormal,1,0.24\nlaplace,0,0.7\nlaplace,1,0.17\n"),
        ("boxplot", "group,value\na,1\na,2\na,3\nb,5\nb,7\n"),
        ("convergence", "iteration,estimate,truth\n500,1.2,1.0\n1000,1.1,1.0\n"),
    ];
    for (kind, text) in cases {
        let csv = d.join(format!("{kind}.csv"));
        write(&csv, text);
        let svg = d.join(format!("{kind}.svg"));
        let o = plot(&csv, kind, &svg);
        assert!(o.status.success(), "{kind}: {}", stderr(&o));
        let body = assert_svg(&svg);
        match kind {
            "density" => assert!(body.contains("normal") && body.contains("laplace")),
            "convergence" => assert!(body.contains("stroke-dasharray")),
            "trace" => assert!(body.contains("sigma")),
            _ => {}
        }
    }
}

#[test]
fn convergence_without_truth_has_no_reference_line() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("c.csv");
    write(&csv, "iteration,estimate\n1,0.5\n2,0.6\n");
    let svg = dir.path().join("c.svg");
    assert!(plot(&csv, "convergence", &svg).status.success());
    assert!(!assert_svg(&svg).contains("stroke-dasharray"));
}

#[test]
fn header_only_csv_gives_empty_axes() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("e.csv");
    write(&csv, "group,x,density\n");
    let svg = dir.path().join("e.svg");
    let o = plot(&csv, "density", &svg);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_svg(&svg);
}

#[test]
fn plot_schema_mismatch_names_the_columns() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("bad.csv");
    write(&csv, "a,b\n1,2\n");
    let svg = dir.path().join("bad.svg");
    let o = plot(&csv, "trace", &svg);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("iteration") && err.contains("component"), "{err}");
    assert!(!svg.exists());
    // missing input is an I/O failure
    let o = plot(&dir.path().join("missing.csv"), "trace", &svg);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn experiment_outputs_feed_the_plotter() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    let over = Overrides { seed: Some(6), replicates: Some(4) };
    run_experiment(ExperimentName::BfConsistency, None, &over, &out, Some(1)).unwrap();
    let svg = dir.path().join("d.svg");
    assert!(plot(&out.join("log_bf_density.csv"), "density", &svg).status.success());
    assert!(assert_svg(&svg).contains("laplace n=200"));
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(bin().arg("--help").output().unwrap().status.code(), Some(0));
    assert_eq!(bin().arg("--version").output().unwrap().status.code(), Some(0));
    assert_eq!(bin().output().unwrap().status.code(), Some(2));
}
