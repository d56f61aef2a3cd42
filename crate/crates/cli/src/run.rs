//! Executes a validated config into a run directory.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use aggan_core::bench::pipeline::{file_task, ring_task};
use aggan_core::bench::{self, aggregate_means, metrics_csv, mode_coverage, run_method, BenchTask, Dataset, Method, MetricsRow, MixtureSpec};
use aggan_core::nn::{checkpoint, RealMatrix};
use aggan_core::seeding::derive_seed;
use aggan_core::theory::{self, ChainConfig, Landscape};
use aggan_core::trainer::{self, convergence_iteration, TrainMode, Trainer, TrainerConfig};
use rayon::prelude::*;

use crate::config::{to_toml, DatasetSpec, ExperimentConfig, Kind};
use crate::manifest::{now, version, write_atomic, RunManifest, SeedEntry};

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Runtime(String),
}

fn runtime(e: impl std::fmt::Display) -> RunError {
    RunError::Runtime(e.to_string())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Complete,
    /// Some seeds failed.
    Partial,
    /// Every seed failed.
    Failed,
}

impl Outcome {
    pub fn as_str(self) -> &'static str {
        match self {
            Outcome::Complete => "complete",
            Outcome::Partial => "partial",
            Outcome::Failed => "failed",
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub out: PathBuf,
    pub overwrite: bool,
    pub jobs: usize,
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub outcome: Outcome,
    pub dir: PathBuf,
    pub seeds: Vec<SeedEntry>,
    pub aggregates: Vec<String>,
}

/// Creates (or, with `overwrite`, recreates) the output directory. Only a
/// directory holding a previous run's manifest is ever removed.
fn prepare_dir(opts: &RunOptions) -> Result<(), RunError> {
    let dir = &opts.out;
    if dir.exists() {
        let empty = fs::read_dir(dir).map_err(runtime)?.next().is_none();
        if !empty {
            if !opts.overwrite {
                return Err(RunError::Config(format!(
                    "output directory {} already exists; pass --overwrite to replace it",
                    dir.display()
                )));
            }
            if !dir.join("manifest.json").is_file() {
                return Err(RunError::Config(format!(
                    "refusing to overwrite {}: it does not look like a run directory",
                    dir.display()
                )));
            }
            fs::remove_dir_all(dir).map_err(runtime)?;
        }
    }
    fs::create_dir_all(dir).map_err(runtime)
}

/// A loaded dataset and, when known, the mixture its (minority) rows follow.
pub struct Loaded {
    pub data: Dataset,
    pub mixture: Option<MixtureSpec>,
    pub task: Option<BenchTask>,
}

pub fn load_dataset(spec: &DatasetSpec) -> Result<Loaded, RunError> {
    Ok(match spec {
        DatasetSpec::Ring { modes, radius, sigma, n, data_seed } => {
            let (data, mix) = bench::gaussian_ring(*modes, *radius, *sigma, *n, *data_seed).map_err(runtime)?;
            Loaded { data, mixture: Some(mix), task: None }
        }
        DatasetSpec::Grid { side, spacing, sigma, n, data_seed } => {
            let (data, mix) = bench::gaussian_grid(*side, *spacing, *sigma, *n, *data_seed).map_err(runtime)?;
            Loaded { data, mixture: Some(mix), task: None }
        }
        DatasetSpec::Rings2 { modes, radius, sigma, n, data_seed } => {
            let task = ring_task(*modes, *radius, *sigma, *n, *data_seed).map_err(runtime)?;
            Loaded {
                data: Dataset::new(task.data.rows_of(task.minority), vec![task.minority; task.data.class_counts()[&task.minority]], "rings2").map_err(runtime)?,
                mixture: task.minority_mixture.clone(),
                task: Some(task),
            }
        }
        DatasetSpec::Csv { path, minority, majority, rest, scale } => {
            let all = Dataset::load_csv(path).map_err(runtime)?;
            let task = match (minority, majority) {
                (Some(a), Some(b)) => Some(file_task(&path.display().to_string(), &all, *a, *b, *rest, *scale).map_err(runtime)?),
                _ => None,
            };
            let data = match minority {
                Some(c) => {
                    let rows = all.indices_of(*c);
                    if rows.is_empty() {
                        return Err(RunError::Config(format!("dataset.minority: class {c} is absent from {}", path.display())));
                    }
                    all.subset(&rows).map_err(runtime)?.scaled(*scale)
                }
                None => all.scaled(*scale),
            };
            Loaded { data, mixture: None, task }
        }
    })
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.6}")).unwrap_or_default()
}

fn samples_csv(x: &RealMatrix) -> String {
    let mut out = (0..x.cols()).map(|j| format!("f{j}")).collect::<Vec<_>>().join(",");
    out.push('\n');
    for row in x.iter_rows() {
        let line: Vec<String> = row.iter().map(|v| format!("{v:.10e}")).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

struct SeedJob {
    seed: u64,
    master: u64,
    rel: String,
}

/// Files written for one job and its aggregate rows.
#[derive(Default)]
struct JobOutput {
    files: Vec<String>,
    rows: Vec<MetricsRow>,
    summary: Vec<String>,
}

struct Writer<'a> {
    root: &'a Path,
    files: Vec<String>,
}

impl Writer<'_> {
    fn write(&mut self, rel: &str, contents: &str) -> Result<(), String> {
        let path = self.root.join(rel);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(|e| format!("{}: {e}", parent.display()))?;
        }
        fs::write(&path, contents).map_err(|e| format!("{}: {e}", path.display()))?;
        self.files.push(rel.to_string());
        Ok(())
    }
}

fn train_job(cfg: &ExperimentConfig, loaded: &Loaded, job: &SeedJob, root: &Path) -> Result<JobOutput, String> {
    let mut w = Writer { root, files: Vec::new() };
    let tcfg = TrainerConfig { seed: job.master, ..cfg.trainer.clone() };
    let mut tr = Trainer::new(tcfg, loaded.data.features().clone()).map_err(|e| e.to_string())?;
    let sample_seed = derive_seed(job.master, 0, "samples");
    let mut failure = None;
    while !tr.is_finished() {
        if let Err(e) = tr.step() {
            failure = Some(e.to_string());
            break;
        }
        let done = tr.iterations_done();
        if cfg.snapshot_every > 0 && done % cfg.snapshot_every == 0 && done < cfg.trainer.iterations {
            let s = tr.sample(&tr.state.generator.params, cfg.samples, sample_seed).map_err(|e| e.to_string())?;
            w.write(&format!("{}/samples_{done}.csv", job.rel), &samples_csv(&s))?;
        }
    }
    w.write(&format!("{}/history.csv", job.rel), &trainer::history_csv(&tr.state.history))?;
    w.write(&format!("{}/decisions.csv", job.rel), &trainer::decisions_csv(&tr.state.history))?;
    if let Some(e) = failure {
        return Err(e);
    }
    let out = tr.into_outcome();
    let ckpt = |spec, params| checkpoint::to_string(spec, params).map_err(|e| e.to_string());
    w.write(&format!("{}/generator_final.params", job.rel), &ckpt(&out.nets.generator, &out.final_generator)?)?;
    w.write(&format!("{}/generator_elite.params", job.rel), &ckpt(&out.nets.generator, &out.elite)?)?;
    w.write(&format!("{}/discriminator.params", job.rel), &ckpt(&out.nets.discriminator, &out.discriminator)?)?;
    let delivered = out.delivered(cfg.delivery);
    let samples = trainer::generate(&out.nets.generator, delivered, cfg.samples, sample_seed).map_err(|e| e.to_string())?;
    w.write(&format!("{}/samples_{}.csv", job.rel, cfg.trainer.iterations), &samples_csv(&samples))?;
    let cov = match &loaded.mixture {
        Some(mix) => {
            let big = trainer::generate(&out.nets.generator, delivered, cfg.bench.coverage_samples, derive_seed(job.master, 0, "coverage"))
                .map_err(|e| e.to_string())?;
            Some(mode_coverage(&big, mix, cfg.bench.min_per_mode).map_err(|e| e.to_string())?)
        }
        None => None,
    };
    let line = format!(
        "{},{},{},{},{},{},{}",
        job.seed,
        out.history.len(),
        fmt_opt(out.elite_fitness.map(|f| f.combined)),
        convergence_iteration(&out.history).map(|i| i.to_string()).unwrap_or_default(),
        fmt_opt(cov.as_ref().map(|c| c.covered as f64)),
        fmt_opt(cov.as_ref().map(|c| c.hq_ratio)),
        fmt_opt(cov.as_ref().map(|c| c.sym_kl)),
    );
    Ok(JobOutput { files: w.files, rows: Vec::new(), summary: vec![line] })
}

const TRAIN_SUMMARY_HEADER: &str = "seed,iterations,elite_fitness,convergence_epoch,modes,hq_ratio,sym_kl";

fn bench_job(cfg: &ExperimentConfig, task: &BenchTask, job: &SeedJob, root: &Path) -> Result<JobOutput, String> {
    let mut w = Writer { root, files: Vec::new() };
    let mut rows = Vec::new();
    for &method in &cfg.methods {
        for &ir in &cfg.irs {
            let run = run_method(task, method, ir, &job.seed.to_string(), job.master, &cfg.bench)
                .map_err(|e| format!("{method} at IR {ir}: {e}"))?;
            if let Some(t) = &run.training {
                let tag = format!("{}/{method}_ir{ir}", job.rel);
                w.write(&format!("{tag}/history.csv"), &trainer::history_csv(&t.history))?;
                w.write(&format!("{tag}/decisions.csv"), &trainer::decisions_csv(&t.history))?;
            }
            rows.push(run.row);
        }
    }
    w.write(&format!("{}/metrics.csv", job.rel), &metrics_csv(&rows))?;
    Ok(JobOutput { files: w.files, rows, summary: Vec::new() })
}

fn load_landscape(cfg: &ExperimentConfig) -> Result<Landscape, RunError> {
    let t = &cfg.theory;
    match t.landscape.as_str() {
        "rugged" => Landscape::rugged(t.states, t.landscape_seed).map_err(|e| RunError::Config(format!("theory: {e}"))),
        "trap" => Landscape::trap(t.states, t.landscape_seed).map_err(|e| RunError::Config(format!("theory: {e}"))),
        _ => {
            let path = t.path.as_ref().expect("validated");
            let text = fs::read_to_string(path).map_err(|e| RunError::Config(format!("theory.path: {}: {e}", path.display())))?;
            Landscape::from_csv(&text).map_err(|e| RunError::Config(format!("theory.path: {}: {e}", path.display())))
        }
    }
}

const HITPROB_HEADER: &str = "budget,runs,hits,fraction,std_error,ci_low,ci_high";

fn theory_job(cfg: &ExperimentConfig, land: &Landscape, job: &SeedJob, root: &Path) -> Result<JobOutput, String> {
    let mut w = Writer { root, files: Vec::new() };
    let chain = ChainConfig { seed: job.master, ..cfg.theory.chain.clone() };
    let traj = theory::run_chain(land, &chain).map_err(|e| e.to_string())?;
    w.write(&format!("{}/chains.csv", job.rel), &theory::trajectory_csv(land, &traj))?;
    let est = theory::estimate_hit_probability(land, &chain, cfg.theory.runs).map_err(|e| e.to_string())?;
    let mut budgets: Vec<usize> = (1..=10).map(|k| chain.budget * k / 10).collect();
    budgets.insert(0, 0);
    budgets.dedup();
    let mut hp = format!("{HITPROB_HEADER}\n");
    for b in budgets {
        let e = est.at_budget(b);
        let _ = writeln!(
            hp,
            "{b},{},{},{:.6},{:.6},{:.6},{:.6}",
            e.runs, e.hits, e.fraction, e.std_error, e.ci_low, e.ci_high
        );
    }
    w.write(&format!("{}/hitprob.csv", job.rel), &hp)?;
    let mono = theory::check_monotone(land, &traj.states);
    let last = traj.states.last().expect("initial state recorded");
    let line = format!(
        "{},{},{},{:.10e},{},{:.6}",
        job.seed,
        last.g,
        last.g_b,
        land.f(last.g_b),
        mono.monotone as u8,
        est.fraction
    );
    Ok(JobOutput { files: w.files, rows: Vec::new(), summary: vec![line] })
}

const THEORY_SUMMARY_HEADER: &str = "seed,final_g,final_g_b,f_b,monotone,hit_fraction";

/// One sweep cell row.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub t_init: f64,
    pub alpha: f64,
    pub seed: String,
    pub accuracy: f64,
    pub rec_min: f64,
    pub f1_min: f64,
    pub modes: Option<f64>,
    pub hq_ratio: Option<f64>,
    pub elite_fitness: f64,
    pub convergence_epoch: f64,
}

pub const SWEEP_HEADER: &str = "t_init,alpha,seed,accuracy,rec_min,f1_min,modes,hq_ratio,elite_fitness,convergence_epoch";

impl SweepRow {
    fn line(&self) -> String {
        format!(
            "{},{},{},{:.6},{:.6},{:.6},{},{},{:.6},{:.3}",
            self.t_init,
            self.alpha,
            self.seed,
            self.accuracy,
            self.rec_min,
            self.f1_min,
            fmt_opt(self.modes),
            fmt_opt(self.hq_ratio),
            self.elite_fitness,
            self.convergence_epoch
        )
    }
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = format!("{SWEEP_HEADER}\n");
    for r in rows {
        let _ = writeln!(out, "{}", r.line());
    }
    out
}

/// Means per (T, α) in grid order.
pub fn sweep_means(rows: &[SweepRow]) -> Vec<SweepRow> {
    let mut cells: Vec<((u64, u64), Vec<&SweepRow>)> = Vec::new();
    for r in rows {
        let key = (r.t_init.to_bits(), r.alpha.to_bits());
        match cells.iter_mut().find(|(k, _)| *k == key) {
            Some((_, v)) => v.push(r),
            None => cells.push((key, vec![r])),
        }
    }
    cells
        .into_iter()
        .map(|(_, v)| {
            let n = v.len() as f64;
            let mean = |f: fn(&SweepRow) -> f64| v.iter().map(|r| f(r)).sum::<f64>() / n;
            let mean_opt = |f: fn(&SweepRow) -> Option<f64>| v.iter().map(|r| f(r)).collect::<Option<Vec<_>>>().map(|x| x.iter().sum::<f64>() / n);
            SweepRow {
                t_init: v[0].t_init,
                alpha: v[0].alpha,
                seed: "mean".into(),
                accuracy: mean(|r| r.accuracy),
                rec_min: mean(|r| r.rec_min),
                f1_min: mean(|r| r.f1_min),
                modes: mean_opt(|r| r.modes),
                hq_ratio: mean_opt(|r| r.hq_ratio),
                elite_fitness: mean(|r| r.elite_fitness),
                convergence_epoch: mean(|r| r.convergence_epoch),
            }
        })
        .collect()
}

fn sweep_method(cfg: &ExperimentConfig) -> Method {
    match cfg.trainer.mode {
        TrainMode::Egan => Method::Egan,
        TrainMode::Fixed(_) => Method::FixedGan,
        _ => Method::Aggan,
    }
}

fn sweep_job(cfg: &ExperimentConfig, task: &BenchTask, cell: (f64, f64), job: &SeedJob, root: &Path) -> Result<(SweepRow, Vec<String>), String> {
    let mut w = Writer { root, files: Vec::new() };
    let (t_init, alpha) = cell;
    let mut opts = cfg.bench.clone();
    opts.trainer.t_init = t_init;
    opts.trainer.alpha = alpha;
    if let TrainMode::Fixed(o) = cfg.trainer.mode {
        opts.fixed_objective = o;
    }
    let ir = cfg.irs[0];
    let run = run_method(task, sweep_method(cfg), ir, &job.seed.to_string(), job.master, &opts).map_err(|e| e.to_string())?;
    let training = run.training.as_ref().expect("generative method");
    w.write(&format!("{}/history.csv", job.rel), &trainer::history_csv(&training.history))?;
    w.write(&format!("{}/metrics.csv", job.rel), &metrics_csv(std::slice::from_ref(&run.row)))?;
    let row = SweepRow {
        t_init,
        alpha,
        seed: job.seed.to_string(),
        accuracy: run.row.accuracy,
        rec_min: run.row.rec_min,
        f1_min: run.row.f1_min,
        modes: run.row.modes,
        hq_ratio: run.row.hq_ratio,
        elite_fitness: training.elite_fitness.map(|f| f.combined).unwrap_or(f64::NAN),
        convergence_epoch: convergence_iteration(&training.history).map(|i| i as f64).unwrap_or(0.0),
    };
    Ok((row, w.files))
}

fn pool(jobs: usize) -> Result<rayon::ThreadPool, RunError> {
    rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build().map_err(runtime)
}

fn outcome_of(entries: &[SeedEntry]) -> Outcome {
    let failed = entries.iter().filter(|e| e.status == "failed").count();
    match failed {
        0 => Outcome::Complete,
        f if f == entries.len() => Outcome::Failed,
        _ => Outcome::Partial,
    }
}

fn record_error(root: &Path, rel: &str, seed: u64, error: &str) -> String {
    let path = format!("{rel}/error.json");
    let body = serde_json::json!({ "seed": seed, "error": error });
    let full = root.join(&path);
    let _ = fs::create_dir_all(full.parent().expect("seed dir"));
    let _ = fs::write(full, format!("{body:#}\n"));
    path
}

/// Runs `cfg` into `opts.out`. Seed failures are recorded and do not stop
/// sibling seeds; aggregates are written once every job has finished.
pub fn run(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<RunReport, RunError> {
    let root = opts.out.as_path();
    prepare_dir(opts)?;
    let component = cfg.kind.as_str();
    let cells: Vec<Option<(f64, f64)>> = if cfg.kind == Kind::Sweep {
        cfg.sweep_cells().into_iter().map(Some).collect()
    } else {
        vec![None]
    };
    let jobs: Vec<(Option<(f64, f64)>, SeedJob)> = cells
        .iter()
        .flat_map(|cell| {
            cfg.seeds.iter().map(move |&seed| {
                let rel = match cell {
                    Some((t, a)) => format!("t{t}_a{a}/seed_{seed}"),
                    None => format!("seed_{seed}"),
                };
                (*cell, SeedJob { seed, master: derive_seed(cfg.seed, seed, component), rel })
            })
        })
        .collect();
    let mut manifest = RunManifest {
        version: version().to_string(),
        kind: component.to_string(),
        config: to_toml(cfg),
        started_at: now(),
        finished_at: None,
        status: "running".into(),
        seeds: jobs
            .iter()
            .map(|(_, j)| SeedEntry {
                seed: j.seed,
                master_seed: j.master,
                dir: j.rel.clone(),
                status: "pending".into(),
                outputs: Vec::new(),
                error: None,
            })
            .collect(),
        aggregates: Vec::new(),
    };
    manifest.save(root).map_err(runtime)?;
    write_atomic(&root.join("config.toml"), manifest.config.as_bytes()).map_err(runtime)?;

    let pool = pool(opts.jobs)?;
    let mut aggregates = Vec::new();
    let mut write_top = |name: &str, text: &str| -> Result<(), RunError> {
        write_atomic(&root.join(name), text.as_bytes()).map_err(runtime)?;
        aggregates.push(name.to_string());
        Ok(())
    };
    let results: Vec<Result<JobOutput, String>> = match cfg.kind {
        Kind::Train => {
            let loaded = load_dataset(&cfg.dataset)?;
            pool.install(|| jobs.par_iter().map(|(_, j)| train_job(cfg, &loaded, j, root)).collect())
        }
        Kind::Bench => {
            let loaded = load_dataset(&cfg.dataset)?;
            let task = loaded
                .task
                .as_ref()
                .ok_or_else(|| RunError::Config("dataset: bench needs minority and majority classes".into()))?;
            pool.install(|| jobs.par_iter().map(|(_, j)| bench_job(cfg, task, j, root)).collect())
        }
        Kind::Theory => {
            let land = load_landscape(cfg)?;
            write_top("landscape.csv", &land.to_csv())?;
            pool.install(|| jobs.par_iter().map(|(_, j)| theory_job(cfg, &land, j, root)).collect())
        }
        Kind::Sweep => {
            let loaded = load_dataset(&cfg.dataset)?;
            let task = loaded
                .task
                .as_ref()
                .ok_or_else(|| RunError::Config("dataset: sweep needs minority and majority classes".into()))?;
            let results: Vec<Result<(SweepRow, Vec<String>), String>> = pool.install(|| {
                jobs.par_iter()
                    .map(|(cell, j)| sweep_job(cfg, task, cell.expect("sweep cell"), j, root))
                    .collect()
            });
            let rows: Vec<SweepRow> = results.iter().filter_map(|r| r.as_ref().ok().map(|(row, _)| row.clone())).collect();
            if !rows.is_empty() {
                write_top("sweep.csv", &sweep_csv(&rows))?;
                write_top("sweep_means.csv", &sweep_csv(&sweep_means(&rows)))?;
            }
            results
                .into_iter()
                .map(|r| r.map(|(_, files)| JobOutput { files, ..JobOutput::default() }))
                .collect()
        }
    };

    let mut rows = Vec::new();
    let mut summary = Vec::new();
    for ((_, job), (entry, result)) in jobs.iter().zip(manifest.seeds.iter_mut().zip(results)) {
        match result {
            Ok(out) => {
                entry.status = "ok".into();
                entry.outputs = out.files;
                rows.extend(out.rows);
                summary.extend(out.summary);
            }
            Err(e) => {
                entry.status = "failed".into();
                entry.outputs = vec![record_error(root, &job.rel, job.seed, &e)];
                entry.error = Some(e);
            }
        }
    }
    match cfg.kind {
        Kind::Bench if !rows.is_empty() => {
            // Method, then IR, then seed.
            let order: BTreeMap<String, usize> = cfg.methods.iter().enumerate().map(|(i, m)| (m.to_string(), i)).collect();
            rows.sort_by(|a, b| {
                order[&a.method]
                    .cmp(&order[&b.method])
                    .then(a.ir.total_cmp(&b.ir))
                    .then(a.seed.parse::<u64>().unwrap_or(0).cmp(&b.seed.parse::<u64>().unwrap_or(0)))
            });
            write_top("metrics.csv", &metrics_csv(&rows))?;
            write_top("means.csv", &metrics_csv(&aggregate_means(&rows)))?;
        }
        Kind::Train if !summary.is_empty() => write_top("summary.csv", &format!("{TRAIN_SUMMARY_HEADER}\n{}\n", summary.join("\n")))?,
        Kind::Theory if !summary.is_empty() => write_top("summary.csv", &format!("{THEORY_SUMMARY_HEADER}\n{}\n", summary.join("\n")))?,
        _ => {}
    }
    let outcome = outcome_of(&manifest.seeds);
    manifest.status = outcome.as_str().into();
    manifest.finished_at = Some(now());
    manifest.aggregates = aggregates.clone();
    manifest.save(root).map_err(runtime)?;
    Ok(RunReport { outcome, dir: root.to_path_buf(), seeds: manifest.seeds, aggregates })
}

/// Re-emits 2-D sample files with the nearest mode and a high-quality flag.
pub fn scatter(mixture: &MixtureSpec, inputs: &[PathBuf], out: &Path) -> Result<Vec<PathBuf>, RunError> {
    fs::create_dir_all(out).map_err(runtime)?;
    let radius = bench::coverage::QUALITY_RADIUS * mixture.sigma();
    let mut written = Vec::new();
    for input in inputs {
        let mut reader = csv::Reader::from_path(input).map_err(|e| RunError::Config(format!("{}: {e}", input.display())))?;
        let headers = reader.headers().map_err(runtime)?.clone();
        let cols: Vec<usize> = headers.iter().enumerate().filter(|(_, h)| h.starts_with('f')).map(|(i, _)| i).collect();
        if cols.len() != mixture.dim() {
            return Err(RunError::Config(format!(
                "{}: {} feature columns but the dataset is {}-dimensional",
                input.display(),
                cols.len(),
                mixture.dim()
            )));
        }
        let mut text = cols.iter().map(|&i| headers[i].to_string()).collect::<Vec<_>>().join(",");
        text.push_str(",mode,hq\n");
        for (line, rec) in reader.records().enumerate() {
            let rec = rec.map_err(|e| RunError::Config(format!("{}: {e}", input.display())))?;
            let x = cols
                .iter()
                .map(|&i| rec[i].trim().parse::<f64>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| RunError::Config(format!("{} line {}: {e}", input.display(), line + 2)))?;
            let (k, d) = mixture.nearest(&x);
            let _ = writeln!(text, "{},{k},{}", cols.iter().map(|&i| rec[i].trim()).collect::<Vec<_>>().join(","), (d <= radius) as u8);
        }
        let stem = input.file_stem().and_then(|s| s.to_str()).unwrap_or("samples");
        let dest = out.join(format!("{stem}_modes.csv"));
        fs::write(&dest, text).map_err(runtime)?;
        written.push(dest);
    }
    Ok(written)
}
