//! The evolutionary GAN training loop.
//!
//! Each iteration:
//! 1. scores the current generator against a frozen discriminator snapshot,
//! 2. breeds one offspring per mutation objective and keeps the fittest,
//! 3. adopts it outright if it is at least as fit, otherwise through a Metropolis
//!    test at the current temperature,
//! 4. updates the elite, cools, and trains the discriminator on the adopted
//!    generator's samples.
//!
//! Three independent random streams are used: `train` (latent and real batches for
//! gradient steps), `eval` (fitness batches) and `accept` (Metropolis draws). A run
//! with one objective and forced acceptance therefore consumes `train` exactly like
//! a plain GAN loop.

use std::fmt::Write as _;

use rand::Rng;

use crate::annealing::{self, AnnealState, MetropolisDecision};
use crate::error::{Error, Result};
use crate::losses::{self, FitnessScore, MutationObjective};
use crate::nn::{
    backward, forward, grad_norm, HiddenActivation, MlpSpec, OptState, OptimizerKind,
    OutputActivation, ParamSet, RealMatrix,
};
use crate::seeding::{self, Stream};

/// Which generator-update rule a run uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrainMode {
    /// Offspring under every objective, Metropolis adoption.
    Aggan,
    /// Offspring under every objective, best offspring always adopted.
    Egan,
    /// Conventional single-objective GAN.
    Fixed(MutationObjective),
    /// No training at all.
    None,
}

impl std::fmt::Display for TrainMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TrainMode::Aggan => f.write_str("aggan"),
            TrainMode::Egan => f.write_str("egan"),
            TrainMode::Fixed(o) => write!(f, "fixed({o})"),
            TrainMode::None => f.write_str("none"),
        }
    }
}

/// Which generator a finished run hands to downstream sampling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Delivery {
    /// The generator as it stands after the last iteration.
    #[default]
    Final,
    /// The best-fitness generator seen. Fitness is measured against the
    /// discriminator of its own iteration, so this tends to freeze early.
    Elite,
}

impl std::fmt::Display for Delivery {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Delivery::Final => "final",
            Delivery::Elite => "elite",
        })
    }
}

impl std::str::FromStr for Delivery {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "final" => Ok(Delivery::Final),
            "elite" => Ok(Delivery::Elite),
            _ => Err(Error::argument(format!("unknown delivery {s:?}; expected final or elite"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainerConfig {
    pub mode: TrainMode,
    /// Number of mutation objectives used when breeding (`n_m`).
    pub n_mutations: usize,
    /// Optimizer steps each offspring takes from its parent.
    pub offspring_steps: usize,
    pub batch_size: usize,
    pub eval_batch_size: usize,
    pub latent_dim: usize,
    pub t_init: f64,
    pub alpha: f64,
    /// Weight of the diversity term in the fitness.
    pub fitness_weight: f64,
    pub g_lr: f64,
    pub d_lr: f64,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub d_steps: usize,
    pub iterations: usize,
    pub seed: u64,
    pub generator_hidden: Vec<usize>,
    pub discriminator_hidden: Vec<usize>,
    pub activation: HiddenActivation,
}

impl Default for TrainerConfig {
    fn default() -> Self {
        Self {
            mode: TrainMode::Aggan,
            n_mutations: 3,
            offspring_steps: 1,
            batch_size: 64,
            eval_batch_size: 128,
            latent_dim: 4,
            t_init: 100.0,
            alpha: 0.99,
            fitness_weight: 0.5,
            g_lr: 1e-3,
            d_lr: 1e-3,
            adam_beta1: 0.5,
            adam_beta2: 0.999,
            d_steps: 1,
            iterations: 2000,
            seed: 0,
            generator_hidden: vec![64, 64],
            discriminator_hidden: vec![64, 64],
            activation: HiddenActivation::LeakyRelu(0.2),
        }
    }
}

impl TrainerConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("n_mutations", self.n_mutations),
            ("offspring_steps", self.offspring_steps),
            ("batch_size", self.batch_size),
            ("eval_batch_size", self.eval_batch_size),
            ("latent_dim", self.latent_dim),
            ("d_steps", self.d_steps),
        ];
        if let Some((name, _)) = positive.iter().find(|(_, v)| *v == 0) {
            return Err(Error::argument(format!("{name} must be at least 1")));
        }
        if self.n_mutations > MutationObjective::ALL.len() {
            return Err(Error::argument(format!(
                "n_mutations must not exceed {}",
                MutationObjective::ALL.len()
            )));
        }
        AnnealState::new(self.t_init, self.alpha)?;
        for (name, v) in [
            ("fitness_weight", self.fitness_weight),
            ("g_lr", self.g_lr),
            ("d_lr", self.d_lr),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::argument(format!("{name} must be finite and non-negative")));
            }
        }
        for (name, v) in [("adam_beta1", self.adam_beta1), ("adam_beta2", self.adam_beta2)] {
            if !(0.0..1.0).contains(&v) {
                return Err(Error::argument(format!("{name} must lie in [0,1)")));
            }
        }
        if self.generator_hidden.is_empty() || self.discriminator_hidden.is_empty() {
            return Err(Error::argument("networks need at least one hidden layer"));
        }
        Ok(())
    }

    /// Objectives bred each iteration, in index order.
    pub fn objectives(&self) -> Vec<MutationObjective> {
        match self.mode {
            TrainMode::Aggan | TrainMode::Egan => MutationObjective::ALL[..self.n_mutations].to_vec(),
            TrainMode::Fixed(o) => vec![o],
            TrainMode::None => Vec::new(),
        }
    }

    fn optimizer(&self, lr: f64) -> OptState {
        OptState::new(
            OptimizerKind::Adam {
                beta1: self.adam_beta1,
                beta2: self.adam_beta2,
                eps: 1e-8,
            },
            lr,
        )
    }
}

/// Generator and discriminator architectures for a data dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct Networks {
    pub generator: MlpSpec,
    pub discriminator: MlpSpec,
}

impl Networks {
    pub fn new(cfg: &TrainerConfig, data_dim: usize) -> Result<Self> {
        Ok(Self {
            generator: MlpSpec::uniform(
                cfg.latent_dim,
                &cfg.generator_hidden,
                data_dim,
                cfg.activation,
                OutputActivation::Identity,
            )?,
            discriminator: MlpSpec::uniform(
                data_dim,
                &cfg.discriminator_hidden,
                1,
                cfg.activation,
                OutputActivation::Sigmoid,
            )?,
        })
    }
}

/// A network together with its optimizer state.
#[derive(Debug, Clone, PartialEq)]
pub struct Individual {
    pub params: ParamSet,
    pub opt: OptState,
}

/// The per-purpose random streams of one run.
#[derive(Debug, Clone)]
pub struct Streams {
    pub train: Stream,
    pub eval: Stream,
    pub accept: Stream,
}

impl Streams {
    pub fn new(seed: u64) -> Self {
        Self {
            train: seeding::stream(seed, 0, "trainer/train"),
            eval: seeding::stream(seed, 0, "trainer/eval"),
            accept: seeding::stream(seed, 0, "trainer/accept"),
        }
    }

    /// Stream used once to initialize the networks.
    pub fn init(seed: u64) -> Stream {
        seeding::stream(seed, 0, "trainer/init")
    }
}

/// Standard-normal latent batch.
pub fn latent_batch<R: Rng + ?Sized>(rows: usize, latent_dim: usize, rng: &mut R) -> RealMatrix {
    RealMatrix::randn(rows, latent_dim, rng)
}

/// Rows drawn uniformly with replacement.
pub fn sample_batch<R: Rng + ?Sized>(data: &RealMatrix, rows: usize, rng: &mut R) -> RealMatrix {
    let idx: Vec<usize> = (0..rows).map(|_| rng.random_range(0..data.rows())).collect();
    data.select_rows(&idx)
}

fn column(m: &RealMatrix) -> Vec<f64> {
    m.data().to_vec()
}

fn as_column(values: Vec<f64>) -> RealMatrix {
    let n = values.len();
    RealMatrix::from_vec(n, 1, values).expect("finite loss partials")
}

/// One optimizer step of the generator on `objective`. Returns the loss before
/// the step.
pub fn generator_step(
    nets: &Networks,
    generator: &mut Individual,
    discriminator: &ParamSet,
    objective: MutationObjective,
    latent: &RealMatrix,
) -> Result<f64> {
    let (fakes, g_tape) = forward(&nets.generator, &generator.params, latent)?;
    let (d_fake, d_tape) = forward(&nets.discriminator, discriminator, &fakes)?;
    let loss = losses::gen_loss(objective, d_fake.data())?;
    if !loss.value.is_finite() || loss.grad.iter().any(|g| !g.is_finite()) {
        return Err(Error::Numeric(format!("{objective} generator loss")));
    }
    let (_, d_input) = backward(&nets.discriminator, discriminator, &d_tape, &as_column(loss.grad))?;
    let (g_grads, _) = backward(&nets.generator, &generator.params, &g_tape, &d_input)?;
    generator.opt.step(&mut generator.params, &g_grads)?;
    Ok(loss.value)
}

/// One optimizer step of the discriminator on real rows versus `G(latent)`.
/// Returns the loss before the step.
pub fn discriminator_step(
    nets: &Networks,
    discriminator: &mut Individual,
    generator: &ParamSet,
    reals: &RealMatrix,
    latent: &RealMatrix,
) -> Result<f64> {
    let (fakes, _) = forward(&nets.generator, generator, latent)?;
    let (d_real, real_tape) = forward(&nets.discriminator, &discriminator.params, reals)?;
    let (d_fake, fake_tape) = forward(&nets.discriminator, &discriminator.params, &fakes)?;
    let loss = losses::disc_loss(d_real.data(), d_fake.data())?;
    if !loss.value.is_finite() {
        return Err(Error::Numeric("discriminator loss".into()));
    }
    let (mut grads, _) = backward(
        &nets.discriminator,
        &discriminator.params,
        &real_tape,
        &as_column(loss.grad_real),
    )?;
    let (fake_grads, _) = backward(
        &nets.discriminator,
        &discriminator.params,
        &fake_tape,
        &as_column(loss.grad_fake),
    )?;
    grads.accumulate(&fake_grads)?;
    discriminator.opt.step(&mut discriminator.params, &grads)?;
    Ok(loss.value)
}

/// Deep copy of `parent` advanced by `steps` generator steps on `objective`,
/// all against the frozen `discriminator` and the same latent batch.
pub fn spawn_offspring(
    nets: &Networks,
    parent: &Individual,
    discriminator: &ParamSet,
    objective: MutationObjective,
    latent: &RealMatrix,
    steps: usize,
) -> Result<Individual> {
    if steps == 0 {
        return Err(Error::argument("offspring need at least one step"));
    }
    let mut child = parent.clone();
    for _ in 0..steps {
        generator_step(nets, &mut child, discriminator, objective, latent)?;
    }
    Ok(child)
}

/// Scores every candidate against the same discriminator and evaluation batches.
pub fn evaluate_offspring(
    nets: &Networks,
    candidates: &[&ParamSet],
    discriminator: &ParamSet,
    eval_latent: &RealMatrix,
    eval_reals: &RealMatrix,
    fitness_weight: f64,
) -> Result<Vec<FitnessScore>> {
    let (d_real, real_tape) = forward(&nets.discriminator, discriminator, eval_reals)?;
    let placeholder = vec![0.5; eval_latent.rows()];
    let real_partials = losses::disc_loss(d_real.data(), &placeholder)?.grad_real;
    let (real_grads, _) =
        backward(&nets.discriminator, discriminator, &real_tape, &as_column(real_partials))?;

    candidates
        .iter()
        .map(|g| {
            let (fakes, _) = forward(&nets.generator, g, eval_latent)?;
            let (d_fake, fake_tape) = forward(&nets.discriminator, discriminator, &fakes)?;
            let d_fake = column(&d_fake);
            let partials = losses::disc_loss(d_real.data(), &d_fake)?.grad_fake;
            let (mut grads, _) =
                backward(&nets.discriminator, discriminator, &fake_tape, &as_column(partials))?;
            grads.accumulate(&real_grads)?;
            Ok(losses::fitness(&d_fake, grad_norm(&grads), fitness_weight))
        })
        .collect()
}

/// Index of the highest combined fitness; ties go to the lowest index.
pub fn select_best(scores: &[FitnessScore]) -> Result<usize> {
    let first = scores
        .first()
        .ok_or_else(|| Error::argument("cannot select from an empty brood"))?;
    let mut best = (0, first.combined);
    for (i, s) in scores.iter().enumerate().skip(1) {
        if s.combined > best.1 {
            best = (i, s.combined);
        }
    }
    Ok(best.0)
}

/// What happened in one evolutionary iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub iteration: usize,
    /// Temperature used for this iteration's decision.
    pub temperature: f64,
    pub parent_fitness: FitnessScore,
    pub offspring: Vec<(MutationObjective, FitnessScore)>,
    pub chosen: MutationObjective,
    pub decision: MetropolisDecision,
    /// Elite fitness after this iteration.
    pub elite_fitness: f64,
    /// Mean discriminator loss over this iteration's discriminator steps.
    pub d_loss: f64,
}

impl IterationRecord {
    pub fn best_fitness(&self) -> FitnessScore {
        self.offspring
            .iter()
            .find(|(o, _)| *o == self.chosen)
            .map(|(_, f)| *f)
            .expect("chosen objective is in the brood")
    }
}

/// Everything that evolves during a run.
#[derive(Debug, Clone)]
pub struct EvoState {
    pub generator: Individual,
    pub elite: ParamSet,
    pub elite_fitness: Option<FitnessScore>,
    pub discriminator: Individual,
    pub anneal: AnnealState,
    pub history: Vec<IterationRecord>,
}

impl EvoState {
    pub fn init(cfg: &TrainerConfig, nets: &Networks) -> Result<Self> {
        let mut rng = Streams::init(cfg.seed);
        let g = nets.generator.init(&mut rng);
        let d = nets.discriminator.init(&mut rng);
        Ok(Self {
            elite: g.clone(),
            generator: Individual {
                params: g,
                opt: cfg.optimizer(cfg.g_lr),
            },
            elite_fitness: None,
            discriminator: Individual {
                params: d,
                opt: cfg.optimizer(cfg.d_lr),
            },
            anneal: AnnealState::new(cfg.t_init, cfg.alpha)?,
            history: Vec::new(),
        })
    }

    fn beats_elite(&self, score: &FitnessScore) -> bool {
        self.elite_fitness.is_none_or(|e| score.combined > e.combined)
    }
}

/// Runs one evolutionary iteration in place.
pub fn evolve_step(
    state: &mut EvoState,
    cfg: &TrainerConfig,
    nets: &Networks,
    data: &RealMatrix,
    streams: &mut Streams,
) -> Result<()> {
    let iteration = state.history.len();
    let objectives = cfg.objectives();
    if objectives.is_empty() {
        return Err(Error::argument(format!("mode {} does not train", cfg.mode)));
    }

    let eval_latent = latent_batch(cfg.eval_batch_size, cfg.latent_dim, &mut streams.eval);
    let eval_reals = sample_batch(data, cfg.eval_batch_size, &mut streams.eval);

    // Latent batches are drawn in objective order before any offspring trains.
    let latents: Vec<RealMatrix> = objectives
        .iter()
        .map(|_| latent_batch(cfg.batch_size, cfg.latent_dim, &mut streams.train))
        .collect();
    let disc = &state.discriminator.params;
    let brood = objectives
        .iter()
        .zip(&latents)
        .map(|(&o, z)| spawn_offspring(nets, &state.generator, disc, o, z, cfg.offspring_steps))
        .collect::<Result<Vec<_>>>()?;

    let mut candidates: Vec<&ParamSet> = vec![&state.generator.params];
    candidates.extend(brood.iter().map(|c| &c.params));
    let scores = evaluate_offspring(
        nets,
        &candidates,
        disc,
        &eval_latent,
        &eval_reals,
        cfg.fitness_weight,
    )?;
    let parent_fitness = scores[0];
    let offspring_scores = &scores[1..];
    let best = select_best(offspring_scores)?;
    let best_fitness = offspring_scores[best];

    let temperature = state.anneal.temperature();
    let decision = match cfg.mode {
        TrainMode::Aggan => annealing::metropolis(
            parent_fitness.combined,
            best_fitness.combined,
            temperature,
            &mut streams.accept,
        )?,
        _ => {
            let draw = annealing::accept(1.0, &mut streams.accept);
            MetropolisDecision {
                delta: (parent_fitness.combined - best_fitness.combined).max(0.0),
                probability: 1.0,
                draw: draw.draw,
                accepted: true,
            }
        }
    };

    // The parent counts as evaluated too, so the elite is the best of everything scored.
    if state.beats_elite(&parent_fitness) {
        state.elite = state.generator.params.clone();
        state.elite_fitness = Some(parent_fitness);
    }
    let mut brood = brood;
    let winner = brood.swap_remove(best);
    if state.beats_elite(&best_fitness) {
        state.elite = winner.params.clone();
        state.elite_fitness = Some(best_fitness);
    }
    if decision.accepted {
        state.generator = winner;
    }
    state.anneal = state.anneal.cool();

    let mut d_loss = 0.0;
    for _ in 0..cfg.d_steps {
        let reals = sample_batch(data, cfg.batch_size, &mut streams.train);
        let z = latent_batch(cfg.batch_size, cfg.latent_dim, &mut streams.train);
        d_loss += discriminator_step(
            nets,
            &mut state.discriminator,
            &state.generator.params,
            &reals,
            &z,
        )?;
    }

    state.history.push(IterationRecord {
        iteration,
        temperature,
        parent_fitness,
        offspring: objectives.iter().copied().zip(offspring_scores.iter().copied()).collect(),
        chosen: objectives[best],
        decision,
        elite_fitness: state.elite_fitness.map_or(f64::NEG_INFINITY, |e| e.combined),
        d_loss: d_loss / cfg.d_steps as f64,
    });
    Ok(())
}

/// A training run that can be stepped or driven to completion.
#[derive(Debug, Clone)]
pub struct Trainer {
    pub cfg: TrainerConfig,
    pub nets: Networks,
    pub state: EvoState,
    data: RealMatrix,
    streams: Streams,
}

impl Trainer {
    pub fn new(cfg: TrainerConfig, data: RealMatrix) -> Result<Self> {
        cfg.validate()?;
        if data.rows() == 0 || data.cols() == 0 {
            return Err(Error::argument("training data is empty"));
        }
        if !data.is_finite() {
            return Err(Error::Numeric("training data".into()));
        }
        let nets = Networks::new(&cfg, data.cols())?;
        let state = EvoState::init(&cfg, &nets)?;
        let streams = Streams::new(cfg.seed);
        Ok(Self {
            cfg,
            nets,
            state,
            data,
            streams,
        })
    }

    pub fn data(&self) -> &RealMatrix {
        &self.data
    }

    pub fn iterations_done(&self) -> usize {
        self.state.history.len()
    }

    pub fn is_finished(&self) -> bool {
        self.cfg.mode == TrainMode::None || self.iterations_done() >= self.cfg.iterations
    }

    pub fn step(&mut self) -> Result<()> {
        let iteration = self.iterations_done();
        evolve_step(&mut self.state, &self.cfg, &self.nets, &self.data, &mut self.streams).map_err(
            |e| Error::Iteration {
                iteration,
                source: Box::new(e),
            },
        )
    }

    pub fn run(&mut self) -> Result<()> {
        while !self.is_finished() {
            self.step()?;
        }
        Ok(())
    }

    /// `n` generator samples from `params`, with latents from a fresh stream.
    pub fn sample(&self, params: &ParamSet, n: usize, seed: u64) -> Result<RealMatrix> {
        generate(&self.nets.generator, params, n, seed)
    }

    pub fn into_outcome(self) -> TrainOutcome {
        TrainOutcome {
            nets: self.nets,
            final_generator: self.state.generator.params,
            elite: self.state.elite,
            elite_fitness: self.state.elite_fitness,
            discriminator: self.state.discriminator.params,
            history: self.state.history,
        }
    }
}

/// `n` samples `G(z)` with `z` drawn from the stream for `seed`.
pub fn generate(spec: &MlpSpec, params: &ParamSet, n: usize, seed: u64) -> Result<RealMatrix> {
    let mut rng = seeding::stream(seed, 0, "generate");
    let z = latent_batch(n, spec.input_width(), &mut rng);
    Ok(forward(spec, params, &z)?.0)
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub nets: Networks,
    pub final_generator: ParamSet,
    pub elite: ParamSet,
    pub elite_fitness: Option<FitnessScore>,
    pub discriminator: ParamSet,
    pub history: Vec<IterationRecord>,
}

impl TrainOutcome {
    pub fn delivered(&self, which: Delivery) -> &ParamSet {
        match which {
            Delivery::Final => &self.final_generator,
            Delivery::Elite => &self.elite,
        }
    }
}

/// A failed run with the history recorded before the failure.
#[derive(Debug)]
pub struct TrainFailure {
    pub error: Error,
    pub history: Vec<IterationRecord>,
}

impl std::fmt::Display for TrainFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} (after {} iterations)", self.error, self.history.len())
    }
}

impl std::error::Error for TrainFailure {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        Some(&self.error)
    }
}

/// Runs `cfg.iterations` iterations on `data`.
pub fn train(cfg: &TrainerConfig, data: &RealMatrix) -> Result<TrainOutcome, TrainFailure> {
    let mut trainer = Trainer::new(cfg.clone(), data.clone()).map_err(|error| TrainFailure {
        error,
        history: Vec::new(),
    })?;
    match trainer.run() {
        Ok(()) => Ok(trainer.into_outcome()),
        Err(error) => Err(TrainFailure {
            error,
            history: trainer.state.history,
        }),
    }
}

fn fmt_f(v: f64) -> String {
    format!("{v:.10e}")
}

/// `history.csv`: one row per iteration.
pub fn history_csv(history: &[IterationRecord]) -> String {
    let mut out = String::from("iteration,t,f_parent");
    for o in MutationObjective::ALL {
        let _ = write!(out, ",fit_{o}");
    }
    out.push_str(",chosen,delta,p,accepted,elite,d_loss\n");
    for r in history {
        let _ = write!(out, "{},{},{}", r.iteration, fmt_f(r.temperature), fmt_f(r.parent_fitness.combined));
        for o in MutationObjective::ALL {
            match r.offspring.iter().find(|(x, _)| *x == o) {
                Some((_, f)) => {
                    let _ = write!(out, ",{}", fmt_f(f.combined));
                }
                None => out.push(','),
            }
        }
        let _ = writeln!(
            out,
            ",{},{},{},{},{},{}",
            r.chosen,
            fmt_f(r.decision.delta),
            fmt_f(r.decision.probability),
            r.decision.accepted as u8,
            fmt_f(r.elite_fitness),
            fmt_f(r.d_loss)
        );
    }
    out
}

/// `decisions.csv`: the Metropolis trace.
pub fn decisions_csv(history: &[IterationRecord]) -> String {
    let mut out = String::from("iteration,t,f_parent,f_best_child,delta,p,gamma,accepted\n");
    for r in history {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.iteration,
            fmt_f(r.temperature),
            fmt_f(r.parent_fitness.combined),
            fmt_f(r.best_fitness().combined),
            fmt_f(r.decision.delta),
            fmt_f(r.decision.probability),
            fmt_f(r.decision.draw),
            r.decision.accepted as u8
        );
    }
    out
}

/// First iteration whose elite fitness is within 1% (of its magnitude) of the
/// final elite fitness.
pub fn convergence_iteration(history: &[IterationRecord]) -> Option<usize> {
    let last = history.last()?.elite_fitness;
    let target = last - 0.01 * last.abs();
    history.iter().position(|r| r.elite_fitness >= target)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn toy_data() -> RealMatrix {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let mut m = RealMatrix::randn(64, 2, &mut rng);
        m.data_mut().iter_mut().for_each(|v| *v = *v * 0.1 + 1.0);
        m
    }

    fn small_cfg() -> TrainerConfig {
        TrainerConfig {
            batch_size: 16,
            eval_batch_size: 16,
            latent_dim: 2,
            generator_hidden: vec![8],
            discriminator_hidden: vec![8],
            iterations: 5,
            ..TrainerConfig::default()
        }
    }

    fn score(c: f64) -> FitnessScore {
        FitnessScore::new(c, 0.0, 0.0)
    }

    #[test]
    fn select_best_examples() {
        assert_eq!(select_best(&[score(0.2), score(0.9), score(0.5)]).unwrap(), 1);
        assert_eq!(select_best(&[score(0.2)]).unwrap(), 0);
        assert_eq!(select_best(&[score(0.5), score(0.5)]).unwrap(), 0);
        assert!(select_best(&[]).is_err());
    }

    #[test]
    fn config_validation() {
        assert!(TrainerConfig { n_mutations: 4, ..small_cfg() }.validate().is_err());
        assert!(TrainerConfig { n_mutations: 0, ..small_cfg() }.validate().is_err());
        assert!(TrainerConfig { alpha: 1.5, ..small_cfg() }.validate().is_err());
        assert!(TrainerConfig { t_init: 0.0, ..small_cfg() }.validate().is_err());
        assert_eq!(
            TrainerConfig { mode: TrainMode::Fixed(MutationObjective::LeastSquares), ..small_cfg() }.objectives(),
            vec![MutationObjective::LeastSquares]
        );
        assert_eq!(TrainerConfig { n_mutations: 2, ..small_cfg() }.objectives().len(), 2);
    }

    #[test]
    fn zero_learning_rate_offspring_equals_parent() {
        let cfg = TrainerConfig { g_lr: 0.0, ..small_cfg() };
        let t = Trainer::new(cfg, toy_data()).unwrap();
        let z = latent_batch(16, 2, &mut rand_chacha::ChaCha8Rng::seed_from_u64(1));
        for o in MutationObjective::ALL {
            let child = spawn_offspring(&t.nets, &t.state.generator, &t.state.discriminator.params, o, &z, 3)
                .unwrap();
            assert_eq!(child.params, t.state.generator.params);
        }
    }

    #[test]
    fn offspring_leave_parent_untouched_and_differ() {
        let t = Trainer::new(small_cfg(), toy_data()).unwrap();
        let before = t.state.generator.params.checksum();
        let z = latent_batch(16, 2, &mut rand_chacha::ChaCha8Rng::seed_from_u64(1));
        let d = &t.state.discriminator.params;
        let a = spawn_offspring(&t.nets, &t.state.generator, d, MutationObjective::Minimax, &z, 1).unwrap();
        let b = spawn_offspring(&t.nets, &t.state.generator, d, MutationObjective::LeastSquares, &z, 1).unwrap();
        assert_eq!(t.state.generator.params.checksum(), before);
        assert_ne!(a.params, b.params);
        assert_ne!(a.params, t.state.generator.params);
    }

    #[test]
    fn duplicate_candidates_score_identically() {
        let t = Trainer::new(small_cfg(), toy_data()).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(8);
        let z = latent_batch(16, 2, &mut rng);
        let x = sample_batch(t.data(), 16, &mut rng);
        let g = &t.state.generator.params;
        let s = evaluate_offspring(&t.nets, &[g, g], &t.state.discriminator.params, &z, &x, 0.5).unwrap();
        assert_eq!(s[0], s[1]);
    }

    #[test]
    fn zero_iterations_returns_initial_parameters() {
        let cfg = TrainerConfig { iterations: 0, ..small_cfg() };
        let init = Trainer::new(cfg.clone(), toy_data()).unwrap().state;
        let out = train(&cfg, &toy_data()).unwrap();
        assert_eq!(out.final_generator, init.generator.params);
        assert_eq!(out.elite, init.generator.params);
        assert!(out.history.is_empty());
    }

    #[test]
    fn none_mode_skips_training() {
        let cfg = TrainerConfig { mode: TrainMode::None, ..small_cfg() };
        let out = train(&cfg, &toy_data()).unwrap();
        assert!(out.history.is_empty());
    }

    #[test]
    fn elite_is_monotone_and_history_complete() {
        let cfg = TrainerConfig { iterations: 40, t_init: 1e-3, ..small_cfg() };
        let out = train(&cfg, &toy_data()).unwrap();
        assert_eq!(out.history.len(), 40);
        for w in out.history.windows(2) {
            assert!(w[1].elite_fitness >= w[0].elite_fitness);
        }
        let max_seen = out
            .history
            .iter()
            .flat_map(|r| std::iter::once(r.parent_fitness.combined).chain(r.offspring.iter().map(|o| o.1.combined)))
            .fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(out.history.last().unwrap().elite_fitness, max_seen);
        let csv = history_csv(&out.history);
        assert_eq!(csv.lines().count(), 41);
        assert!(csv.starts_with("iteration,t,f_parent,fit_minimax,fit_nonsaturating,fit_leastsquares,chosen,"));
        assert_eq!(decisions_csv(&out.history).lines().count(), 41);
    }

    #[test]
    fn empty_data_is_rejected() {
        assert!(Trainer::new(small_cfg(), RealMatrix::zeros(0, 2)).is_err());
    }

    #[test]
    fn convergence_iteration_handles_signs() {
        let rec = |e: f64| IterationRecord {
            iteration: 0,
            temperature: 1.0,
            parent_fitness: score(0.0),
            offspring: vec![(MutationObjective::Minimax, score(0.0))],
            chosen: MutationObjective::Minimax,
            decision: MetropolisDecision { delta: 0.0, probability: 1.0, draw: 0.0, accepted: true },
            elite_fitness: e,
            d_loss: 0.0,
        };
        let h: Vec<_> = [-3.0, -2.0, -1.0, -1.0].into_iter().map(rec).collect();
        assert_eq!(convergence_iteration(&h), Some(2));
        let h: Vec<_> = [0.5, 1.0, 1.995, 2.0].into_iter().map(rec).collect();
        assert_eq!(convergence_iteration(&h), Some(2));
        assert_eq!(convergence_iteration(&[]), None);
    }
}
