//! Experiment configuration: a sectioned TOML file.
//!
//! ```toml
//! kind = "bench"          # train | bench | theory | sweep
//! seed = 0
//! seeds = 5               # a count (0..n) or an explicit list
//! output = "runs/bench"   # optional; --out wins
//!
//! [dataset]
//! kind = "rings2"         # ring | grid | rings2 | csv
//!
//! [trainer]
//! mode = "aggan"
//! iterations = 2000
//!
//! [bench]
//! methods = ["cn", "aggan"]
//! irs = [10, 100]
//! ```
//!
//! Every section is optional and every key has a default. Unknown keys are
//! rejected. Relative dataset paths resolve against the config file's directory.

use std::path::{Path, PathBuf};

use aggan_core::bench::{BenchOptions, ClassifierConfig, Method};
use aggan_core::losses::MutationObjective;
use aggan_core::nn::HiddenActivation;
use aggan_core::theory::{AcceptanceRule, ChainConfig, ParentRule};
use aggan_core::trainer::{Delivery, TrainMode, TrainerConfig};
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("{path}: {message}")]
    Syntax { path: String, message: String },
    #[error("{key}: {message}")]
    Invalid { key: String, message: String },
}

fn invalid(key: &str, message: impl std::fmt::Display) -> ConfigError {
    ConfigError::Invalid { key: key.into(), message: message.to_string() }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Train,
    Bench,
    Theory,
    Sweep,
}

impl Kind {
    pub fn as_str(self) -> &'static str {
        match self {
            Kind::Train => "train",
            Kind::Bench => "bench",
            Kind::Theory => "theory",
            Kind::Sweep => "sweep",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Seeds {
    Count(u64),
    List(Vec<u64>),
}

impl Seeds {
    pub fn values(&self) -> Vec<u64> {
        match self {
            Seeds::Count(n) => (0..*n).collect(),
            Seeds::List(v) => v.clone(),
        }
    }

    /// `"5"` means seeds 0..5; `"1,4,9"` is a list.
    pub fn parse_flag(s: &str) -> Result<Self, ConfigError> {
        let bad = |_| invalid("--seeds", format!("expected a count or a comma-separated list, got {s:?}"));
        if s.contains(',') {
            s.split(',').map(|p| p.trim().parse::<u64>().map_err(bad)).collect::<Result<_, _>>().map(Seeds::List)
        } else {
            s.trim().parse().map(Seeds::Count).map_err(bad)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub kind: Kind,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_seeds")]
    pub seeds: Seeds,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub dataset: DatasetSection,
    #[serde(default)]
    pub trainer: TrainerSection,
    #[serde(default)]
    pub bench: BenchSection,
    #[serde(default)]
    pub sweep: SweepSection,
    #[serde(default)]
    pub theory: TheorySection,
}

fn default_seeds() -> Seeds {
    Seeds::Count(1)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetSection {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modes: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub side: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spacing: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub minority: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub majority: Option<usize>,
    /// Pool every non-minority class into the majority.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rest: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub data_seed: Option<u64>,
}

impl Default for DatasetSection {
    fn default() -> Self {
        Self {
            kind: "ring".into(),
            modes: None,
            radius: None,
            sigma: None,
            n: None,
            side: None,
            spacing: None,
            path: None,
            minority: None,
            majority: None,
            rest: None,
            scale: None,
            data_seed: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainerSection {
    pub mode: String,
    pub objective: String,
    pub n_mutations: usize,
    pub offspring_steps: usize,
    pub batch_size: usize,
    pub eval_batch_size: usize,
    pub latent_dim: usize,
    pub t_init: f64,
    pub alpha: f64,
    pub fitness_weight: f64,
    pub g_lr: f64,
    pub d_lr: f64,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub d_steps: usize,
    pub iterations: usize,
    pub generator_hidden: Vec<usize>,
    pub discriminator_hidden: Vec<usize>,
    pub activation: String,
    pub delivery: String,
    /// Write `samples_<iter>.csv` every this many iterations (0: final only).
    pub snapshot_every: usize,
    pub samples: usize,
}

impl Default for TrainerSection {
    fn default() -> Self {
        let t = TrainerConfig::default();
        Self {
            mode: "aggan".into(),
            objective: "minimax".into(),
            n_mutations: t.n_mutations,
            offspring_steps: t.offspring_steps,
            batch_size: t.batch_size,
            eval_batch_size: t.eval_batch_size,
            latent_dim: t.latent_dim,
            t_init: t.t_init,
            alpha: t.alpha,
            fitness_weight: t.fitness_weight,
            g_lr: t.g_lr,
            d_lr: t.d_lr,
            adam_beta1: t.adam_beta1,
            adam_beta2: t.adam_beta2,
            d_steps: t.d_steps,
            iterations: t.iterations,
            generator_hidden: t.generator_hidden,
            discriminator_hidden: t.discriminator_hidden,
            activation: t.activation.to_string(),
            delivery: Delivery::default().to_string(),
            snapshot_every: 0,
            samples: 2000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ClassifierSection {
    pub hidden: Vec<usize>,
    pub activation: String,
    pub epochs: usize,
    pub batch_size: usize,
    pub lr: f64,
}

impl Default for ClassifierSection {
    fn default() -> Self {
        let c = ClassifierConfig::default();
        Self {
            hidden: c.hidden,
            activation: c.activation.to_string(),
            epochs: c.epochs,
            batch_size: c.batch_size,
            lr: c.lr,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BenchSection {
    pub methods: Vec<String>,
    pub irs: Vec<f64>,
    pub test_fraction: f64,
    pub coverage_samples: usize,
    pub min_per_mode: usize,
    pub fixed_objective: String,
    pub classifier: ClassifierSection,
}

impl Default for BenchSection {
    fn default() -> Self {
        let o = BenchOptions::default();
        Self {
            methods: Method::ALL.iter().map(|m| m.to_string()).collect(),
            irs: vec![10.0, 50.0, 100.0],
            test_fraction: o.test_fraction,
            coverage_samples: o.coverage_samples,
            min_per_mode: o.min_per_mode,
            fixed_objective: o.fixed_objective.to_string(),
            classifier: ClassifierSection::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    pub t_init: Vec<f64>,
    pub alpha: Vec<f64>,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            t_init: vec![100.0, 1000.0, 10000.0],
            alpha: vec![0.99, 0.999],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TheorySection {
    /// rugged | trap | file
    pub landscape: String,
    pub states: usize,
    pub landscape_seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    pub n_offspring: usize,
    pub t_init: f64,
    pub alpha: f64,
    pub parent: String,
    pub acceptance: String,
    pub budget: usize,
    /// Independent chains per seed for the hit-probability estimate.
    pub runs: usize,
}

impl Default for TheorySection {
    fn default() -> Self {
        let c = ChainConfig::default();
        Self {
            landscape: "rugged".into(),
            states: 64,
            landscape_seed: 0,
            path: None,
            n_offspring: c.n_offspring,
            t_init: c.t_init,
            alpha: c.alpha,
            parent: "current".into(),
            acceptance: "metropolis".into(),
            budget: c.budget,
            runs: 100,
        }
    }
}

/// Where training and benchmark rows come from.
#[derive(Debug, Clone, PartialEq)]
pub enum DatasetSpec {
    /// `modes` Gaussians on a circle, `n` points in total.
    Ring { modes: usize, radius: f64, sigma: f64, n: usize, data_seed: u64 },
    /// `side × side` Gaussians, `n` points in total.
    Grid { side: usize, spacing: f64, sigma: f64, n: usize, data_seed: u64 },
    /// Two interleaved rings, `n` points per class; class 1 is the minority.
    Rings2 { modes: usize, radius: f64, sigma: f64, n: usize, data_seed: u64 },
    /// Labelled CSV; `minority`/`majority` select classes, features are scaled.
    Csv { path: PathBuf, minority: Option<usize>, majority: Option<usize>, rest: bool, scale: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct TheorySpec {
    pub landscape: String,
    pub states: usize,
    pub landscape_seed: u64,
    pub path: Option<PathBuf>,
    pub chain: ChainConfig,
    pub runs: usize,
}

/// A validated configuration plus the normalized text it was built from.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub kind: Kind,
    pub seed: u64,
    pub seeds: Vec<u64>,
    pub output: Option<PathBuf>,
    pub dataset: DatasetSpec,
    pub trainer: TrainerConfig,
    pub delivery: Delivery,
    pub snapshot_every: usize,
    pub samples: usize,
    pub bench: BenchOptions,
    pub methods: Vec<Method>,
    pub irs: Vec<f64>,
    pub sweep_t: Vec<f64>,
    pub sweep_alpha: Vec<f64>,
    pub theory: TheorySpec,
    /// The raw config with every default filled in.
    pub raw: RawConfig,
}

pub fn parse_config(path: &Path) -> Result<ExperimentConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read { path: path.into(), source })?;
    parse_str(&text, &path.display().to_string(), path.parent())
}

/// Parses config text. `base` resolves relative dataset paths.
pub fn parse_str(text: &str, origin: &str, base: Option<&Path>) -> Result<ExperimentConfig, ConfigError> {
    let mut raw: RawConfig = toml::from_str(text).map_err(|e| ConfigError::Syntax {
        path: origin.into(),
        message: e.to_string().trim_end().to_string(),
    })?;
    if let (Some(base), Some(p)) = (base, raw.dataset.path.as_mut()) {
        if p.is_relative() && !base.as_os_str().is_empty() {
            *p = base.join(&*p);
        }
    }
    if let (Some(base), Some(p)) = (base, raw.theory.path.as_mut()) {
        if p.is_relative() && !base.as_os_str().is_empty() {
            *p = base.join(&*p);
        }
    }
    build(raw)
}

/// The normalized config as TOML; parsing it yields the same config.
pub fn to_toml(cfg: &ExperimentConfig) -> String {
    toml::to_string(&cfg.raw).expect("config serializes")
}

fn parse_key<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, ConfigError>
where
    T::Err: std::fmt::Display,
{
    value.parse().map_err(|e| invalid(key, e))
}

fn dataset_spec(d: &mut DatasetSection) -> Result<DatasetSpec, ConfigError> {
    let allowed: &[&str] = match d.kind.as_str() {
        "ring" | "rings2" => &["modes", "radius", "sigma", "n", "data_seed"],
        "grid" => &["side", "spacing", "sigma", "n", "data_seed"],
        "csv" => &["path", "minority", "majority", "rest", "scale"],
        other => {
            return Err(invalid("dataset.kind", format!("unknown dataset kind {other:?}; expected ring, grid, rings2 or csv")))
        }
    };
    let present = [
        ("modes", d.modes.is_some()),
        ("radius", d.radius.is_some()),
        ("sigma", d.sigma.is_some()),
        ("n", d.n.is_some()),
        ("side", d.side.is_some()),
        ("spacing", d.spacing.is_some()),
        ("path", d.path.is_some()),
        ("minority", d.minority.is_some()),
        ("majority", d.majority.is_some()),
        ("rest", d.rest.is_some()),
        ("scale", d.scale.is_some()),
        ("data_seed", d.data_seed.is_some()),
    ];
    if let Some((k, _)) = present.iter().find(|(k, p)| *p && !allowed.contains(k)) {
        return Err(invalid(&format!("dataset.{k}"), format!("not used by dataset kind {:?}", d.kind)));
    }
    let positive = |key: &str, v: f64| {
        if v > 0.0 && v.is_finite() {
            Ok(v)
        } else {
            Err(invalid(&format!("dataset.{key}"), "must be positive"))
        }
    };
    let count = |key: &str, v: usize| if v >= 1 { Ok(v) } else { Err(invalid(&format!("dataset.{key}"), "must be at least 1")) };
    Ok(match d.kind.as_str() {
        "ring" | "rings2" => {
            let modes = count("modes", *d.modes.get_or_insert(8))?;
            let radius = positive("radius", *d.radius.get_or_insert(2.0))?;
            let sigma = positive("sigma", *d.sigma.get_or_insert(0.04))?;
            let default_n = if d.kind == "ring" { 200 } else { 6250 };
            let n = count("n", *d.n.get_or_insert(default_n))?;
            let data_seed = *d.data_seed.get_or_insert(0);
            if d.kind == "ring" {
                DatasetSpec::Ring { modes, radius, sigma, n, data_seed }
            } else {
                DatasetSpec::Rings2 { modes, radius, sigma, n, data_seed }
            }
        }
        "grid" => DatasetSpec::Grid {
            side: count("side", *d.side.get_or_insert(5))?,
            spacing: positive("spacing", *d.spacing.get_or_insert(2.0))?,
            sigma: positive("sigma", *d.sigma.get_or_insert(0.05))?,
            n: count("n", *d.n.get_or_insert(200))?,
            data_seed: *d.data_seed.get_or_insert(0),
        },
        _ => {
            let path = d.path.clone().ok_or_else(|| invalid("dataset.path", "required for csv datasets"))?;
            if !path.is_file() {
                return Err(invalid("dataset.path", format!("{} does not exist", path.display())));
            }
            DatasetSpec::Csv {
                path,
                minority: d.minority,
                majority: d.majority,
                rest: d.rest.unwrap_or(false),
                scale: positive("scale", *d.scale.get_or_insert(1.0))?,
            }
        }
    })
}

fn trainer_config(t: &TrainerSection) -> Result<(TrainerConfig, Delivery), ConfigError> {
    let objective: MutationObjective = parse_key("trainer.objective", &t.objective)?;
    let mode = match t.mode.as_str() {
        "aggan" => TrainMode::Aggan,
        "egan" => TrainMode::Egan,
        "fixed" => TrainMode::Fixed(objective),
        "none" => TrainMode::None,
        other => return Err(invalid("trainer.mode", format!("unknown mode {other:?}; expected aggan, egan, fixed or none"))),
    };
    let cfg = TrainerConfig {
        mode,
        n_mutations: t.n_mutations,
        offspring_steps: t.offspring_steps,
        batch_size: t.batch_size,
        eval_batch_size: t.eval_batch_size,
        latent_dim: t.latent_dim,
        t_init: t.t_init,
        alpha: t.alpha,
        fitness_weight: t.fitness_weight,
        g_lr: t.g_lr,
        d_lr: t.d_lr,
        adam_beta1: t.adam_beta1,
        adam_beta2: t.adam_beta2,
        d_steps: t.d_steps,
        iterations: t.iterations,
        seed: 0,
        generator_hidden: t.generator_hidden.clone(),
        discriminator_hidden: t.discriminator_hidden.clone(),
        activation: parse_key::<HiddenActivation>("trainer.activation", &t.activation)?,
    };
    cfg.validate().map_err(|e| invalid("trainer", e))?;
    if t.samples == 0 {
        return Err(invalid("trainer.samples", "must be at least 1"));
    }
    Ok((cfg, parse_key("trainer.delivery", &t.delivery)?))
}

fn bench_options(b: &BenchSection, trainer: &TrainerConfig, delivery: Delivery) -> Result<(BenchOptions, Vec<Method>, Vec<f64>), ConfigError> {
    let methods = b
        .methods
        .iter()
        .map(|m| parse_key::<Method>("bench.methods", m))
        .collect::<Result<Vec<_>, _>>()?;
    if methods.is_empty() {
        return Err(invalid("bench.methods", "list must not be empty"));
    }
    if b.irs.is_empty() {
        return Err(invalid("bench.irs", "list must not be empty"));
    }
    if let Some(ir) = b.irs.iter().find(|ir| !(**ir >= 1.0 && ir.is_finite())) {
        return Err(invalid("bench.irs", format!("imbalance ratio must be at least 1, got {ir}")));
    }
    if !(b.test_fraction > 0.0 && b.test_fraction < 1.0) {
        return Err(invalid("bench.test_fraction", "must lie in (0,1)"));
    }
    if b.coverage_samples == 0 {
        return Err(invalid("bench.coverage_samples", "must be at least 1"));
    }
    let classifier = ClassifierConfig {
        hidden: b.classifier.hidden.clone(),
        activation: parse_key("bench.classifier.activation", &b.classifier.activation)?,
        epochs: b.classifier.epochs,
        batch_size: b.classifier.batch_size,
        lr: b.classifier.lr,
    };
    classifier.validate().map_err(|e| invalid("bench.classifier", e))?;
    if classifier.hidden.is_empty() || classifier.hidden.contains(&0) {
        return Err(invalid("bench.classifier.hidden", "needs at least one non-zero layer width"));
    }
    let opts = BenchOptions {
        trainer: trainer.clone(),
        classifier,
        fixed_objective: parse_key("bench.fixed_objective", &b.fixed_objective)?,
        test_fraction: b.test_fraction,
        coverage_samples: b.coverage_samples,
        min_per_mode: b.min_per_mode,
        delivery,
    };
    Ok((opts, methods, b.irs.clone()))
}

fn theory_spec(t: &TheorySection) -> Result<TheorySpec, ConfigError> {
    match t.landscape.as_str() {
        "rugged" if t.states < 3 => return Err(invalid("theory.states", "rugged landscapes need at least 3 states")),
        "trap" if t.states < 8 => return Err(invalid("theory.states", "trap landscapes need at least 8 states")),
        "rugged" | "trap" => {}
        "file" => match &t.path {
            Some(p) if p.is_file() => {}
            Some(p) => return Err(invalid("theory.path", format!("{} does not exist", p.display()))),
            None => return Err(invalid("theory.path", "required for file landscapes")),
        },
        other => return Err(invalid("theory.landscape", format!("unknown landscape {other:?}; expected rugged, trap or file"))),
    }
    let chain = ChainConfig {
        n_offspring: t.n_offspring,
        t_init: t.t_init,
        alpha: t.alpha,
        parent: match t.parent.as_str() {
            "current" => ParentRule::Current,
            "elite" => ParentRule::Elite,
            other => return Err(invalid("theory.parent", format!("unknown parent rule {other:?}; expected current or elite"))),
        },
        acceptance: match t.acceptance.as_str() {
            "metropolis" => AcceptanceRule::Metropolis,
            "greedy" => AcceptanceRule::Greedy,
            other => return Err(invalid("theory.acceptance", format!("unknown acceptance rule {other:?}; expected metropolis or greedy"))),
        },
        budget: t.budget,
        seed: 0,
        start: None,
    };
    if chain.n_offspring == 0 {
        return Err(invalid("theory.n_offspring", "must be at least 1"));
    }
    aggan_core::annealing::AnnealState::new(chain.t_init, chain.alpha).map_err(|e| invalid("theory", e))?;
    Ok(TheorySpec {
        landscape: t.landscape.clone(),
        states: t.states,
        landscape_seed: t.landscape_seed,
        path: t.path.clone(),
        chain,
        runs: t.runs,
    })
}

fn build(mut raw: RawConfig) -> Result<ExperimentConfig, ConfigError> {
    let seeds = raw.seeds.values();
    if seeds.is_empty() {
        return Err(invalid("seeds", "at least one seed is required"));
    }
    let mut sorted = seeds.clone();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != seeds.len() {
        return Err(invalid("seeds", "seeds must be distinct"));
    }
    let dataset = dataset_spec(&mut raw.dataset)?;
    let (trainer, delivery) = trainer_config(&raw.trainer)?;
    let (bench, methods, irs) = bench_options(&raw.bench, &trainer, delivery)?;
    if raw.kind == Kind::Sweep {
        if raw.sweep.t_init.is_empty() || raw.sweep.alpha.is_empty() {
            return Err(invalid("sweep", "grid must not be empty"));
        }
        for &t in &raw.sweep.t_init {
            for &a in &raw.sweep.alpha {
                aggan_core::annealing::AnnealState::new(t, a).map_err(|e| invalid("sweep", e))?;
            }
        }
    }
    if matches!(raw.kind, Kind::Bench | Kind::Sweep) && matches!(dataset, DatasetSpec::Ring { .. } | DatasetSpec::Grid { .. }) {
        return Err(invalid("dataset.kind", "bench and sweep need a two-class dataset (rings2 or csv)"));
    }
    let theory = theory_spec(&raw.theory)?;
    Ok(ExperimentConfig {
        kind: raw.kind,
        seed: raw.seed,
        seeds,
        output: raw.output.clone(),
        dataset,
        trainer,
        delivery,
        snapshot_every: raw.trainer.snapshot_every,
        samples: raw.trainer.samples,
        bench,
        methods,
        irs,
        sweep_t: raw.sweep.t_init.clone(),
        sweep_alpha: raw.sweep.alpha.clone(),
        theory,
        raw,
    })
}

impl ExperimentConfig {
    /// Replaces the seed list, as `--seeds` does.
    pub fn with_seeds(mut self, seeds: Seeds) -> Result<Self, ConfigError> {
        self.raw.seeds = seeds;
        build(self.raw)
    }

    /// Number of (T, α) cells in the sweep grid.
    pub fn sweep_cells(&self) -> Vec<(f64, f64)> {
        self.sweep_t.iter().flat_map(|&t| self.sweep_alpha.iter().map(move |&a| (t, a))).collect()
    }
}
