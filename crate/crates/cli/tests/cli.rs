use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn aggan(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_aggan")).args(args).output().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

const BENCH: &str = r#"
kind = "bench"
seeds = 2
[dataset]
kind = "rings2"
n = 400
[trainer]
iterations = 25
generator_hidden = [8]
discriminator_hidden = [8]
[bench]
methods = ["cn", "aggan"]
irs = [10, 20]
coverage_samples = 400
[bench.classifier]
epochs = 2
"#;

fn run_bench(dir: &Path, out: &str) -> Output {
    let cfg = write(dir, "bench.toml", BENCH);
    aggan(&["bench", "--config", &cfg, "--out", dir.join(out).to_str().unwrap()])
}

#[test]
fn bench_writes_per_seed_and_mean_rows() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_bench(dir.path(), "out");
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let out = dir.path().join("out");
    let metrics = fs::read_to_string(out.join("metrics.csv")).unwrap();
    assert_eq!(metrics.lines().count(), 1 + 2 * 2 * 2);
    let means = fs::read_to_string(out.join("means.csv")).unwrap();
    let rows: Vec<&str> = means.lines().skip(1).collect();
    assert_eq!(rows.len(), 4);
    assert!(rows.iter().all(|r| r.split(',').nth(2) == Some("mean")));
    let manifest: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["status"], "complete");
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    assert!(run_bench(dir.path(), "a").status.success());
    assert!(run_bench(dir.path(), "b").status.success());
    for f in ["metrics.csv", "means.csv", "seed_1/metrics.csv", "seed_0/aggan_ir10/history.csv"] {
        assert_eq!(
            fs::read(dir.path().join("a").join(f)).unwrap(),
            fs::read(dir.path().join("b").join(f)).unwrap(),
            "{f}"
        );
    }
}

#[test]
fn existing_output_needs_overwrite() {
    let dir = tempfile::tempdir().unwrap();
    assert!(run_bench(dir.path(), "out").status.success());
    let again = run_bench(dir.path(), "out");
    assert_eq!(again.status.code(), Some(2));
    let cfg = dir.path().join("bench.toml");
    let o = aggan(&[
        "bench",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.path().join("out").to_str().unwrap(),
        "--overwrite",
        "--seeds",
        "3",
    ]);
    assert!(o.status.success());
    assert!(dir.path().join("out/seed_2").is_dir());

    // A directory that is not a run directory is never removed.
    let foreign = dir.path().join("foreign");
    fs::create_dir(&foreign).unwrap();
    fs::write(foreign.join("keep.txt"), "x").unwrap();
    let o = aggan(&["bench", "--config", cfg.to_str().unwrap(), "--out", foreign.to_str().unwrap(), "--overwrite"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(foreign.join("keep.txt").exists());
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let out = out.to_str().unwrap();
    let bad_key = write(dir.path(), "a.toml", "kind = \"train\"\n[trainer]\nlearning_rate = 1\n");
    let bad_value = write(dir.path(), "b.toml", "kind = \"train\"\n[trainer]\nalpha = 1.5\n");
    let bench = write(dir.path(), "c.toml", BENCH);
    for (sub, cfg) in [("train", &bad_key), ("train", &bad_value), ("train", &bench)] {
        let o = aggan(&[sub, "--config", cfg, "--out", out]);
        assert_eq!(o.status.code(), Some(2), "{cfg}: {}", String::from_utf8_lossy(&o.stderr));
    }
    let o = aggan(&["validate", "--config", &bad_key]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("learning_rate"));
}

#[test]
fn malformed_csv_is_a_runtime_error() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "bad.csv", "a,b,label\n1,x,0\n");
    let cfg = write(
        dir.path(),
        "a.toml",
        "kind = \"bench\"\n[dataset]\nkind = \"csv\"\npath = \"bad.csv\"\nminority = 1\nmajority = 0\n",
    );
    let o = aggan(&["bench", "--config", &cfg, "--out", dir.path().join("out").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn zero_budget_theory_reports_start_states() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "t.toml", "kind = \"theory\"\nseeds = 3\n[theory]\nbudget = 0\nruns = 4\n");
    let out = dir.path().join("out");
    let o = aggan(&["theory", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let summary = fs::read_to_string(out.join("summary.csv")).unwrap();
    let rows: Vec<Vec<&str>> = summary.lines().skip(1).map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 3);
    for r in rows {
        assert_eq!(r[1], r[2]);
        assert_eq!(r[4], "1");
    }
    let chains = fs::read_to_string(out.join("seed_0/chains.csv")).unwrap();
    assert_eq!(chains.lines().count(), 2);
}

#[test]
fn train_writes_snapshots_and_params() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "t.toml",
        "kind = \"train\"\n[dataset]\nkind = \"ring\"\n[trainer]\niterations = 30\nsnapshot_every = 10\nsamples = 50\n",
    );
    let out = dir.path().join("out");
    let o = aggan(&["train", "--config", &cfg, "--out", out.to_str().unwrap(), "--seeds", "4,7"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for s in ["seed_4", "seed_7"] {
        let d = out.join(s);
        for f in ["history.csv", "decisions.csv", "generator_final.params", "generator_elite.params", "samples_30.csv"] {
            assert!(d.join(f).exists(), "{s}/{f}");
        }
        assert_eq!(fs::read_to_string(d.join("history.csv")).unwrap().lines().count(), 31);
    }
    let scatter = aggan(&[
        "scatter",
        "--config",
        &cfg,
        "--out",
        dir.path().to_str().unwrap(),
        out.join("seed_4/samples_30.csv").to_str().unwrap(),
    ]);
    assert!(scatter.status.success(), "{}", String::from_utf8_lossy(&scatter.stderr));
    assert!(dir.path().join("samples_30_modes.csv").exists());
}

#[test]
fn shipped_configs_validate() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut seen = 0;
    for entry in fs::read_dir(&dir).unwrap() {
        let p = entry.unwrap().path();
        if p.extension().is_some_and(|e| e == "toml") {
            let o = aggan(&["validate", "--config", p.to_str().unwrap()]);
            assert!(o.status.success(), "{}: {}", p.display(), String::from_utf8_lossy(&o.stderr));
            seen += 1;
        }
    }
    assert!(seen >= 4);
}
