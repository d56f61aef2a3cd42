//! Independent reference implementations shared by the integration suites.
#![allow(dead_code)]

use aggan_core::losses::MutationObjective;
use aggan_core::nn::{backward, forward, HiddenActivation, MlpSpec, OutputActivation, ParamSet, RealMatrix};
use aggan_core::seeding;
use aggan_core::trainer::{
    discriminator_step, generator_step, latent_batch, sample_batch, Individual, Networks, Streams, TrainerConfig,
};
use rand::Rng;

const H: f64 = 1e-5;

pub fn random_spec<R: Rng>(rng: &mut R) -> MlpSpec {
    let depth = rng.random_range(1..=3);
    let input = rng.random_range(1..=16);
    let hidden: Vec<usize> = (0..depth).map(|_| rng.random_range(1..=16)).collect();
    let acts: Vec<HiddenActivation> = (0..depth)
        .map(|_| match rng.random_range(0..3) {
            0 => HiddenActivation::Relu,
            1 => HiddenActivation::LeakyRelu(0.2),
            _ => HiddenActivation::Tanh,
        })
        .collect();
    let (output, out_w) = match rng.random_range(0..3) {
        0 => (OutputActivation::Identity, rng.random_range(1..=16)),
        1 => (OutputActivation::Sigmoid, rng.random_range(1..=4)),
        _ => (OutputActivation::Softmax, rng.random_range(2..=6)),
    };
    let mut widths = vec![input];
    widths.extend(&hidden);
    widths.push(out_w);
    MlpSpec::new(widths, acts, output).unwrap()
}

/// Scalar probe `Σ c ⊙ f(x)`.
fn probe(spec: &MlpSpec, p: &ParamSet, x: &RealMatrix, c: &RealMatrix) -> f64 {
    let (y, _) = forward(spec, p, x).unwrap();
    y.data().iter().zip(c.data()).map(|(a, b)| a * b).sum()
}

fn rel_err(a: f64, n: f64) -> f64 {
    // Guarded relative error; the floor keeps near-zero entries from amplifying
    // finite-difference round-off (about 1e-11 here).
    (a - n).abs() / a.abs().max(n.abs()).max(1e-5)
}

/// Worst guarded relative error between analytic and central-difference
/// gradients (parameters and inputs) on random network `seed`.
pub fn gradient_error(seed: u64) -> f64 {
    let mut rng = seeding::stream(seed, 0, "test/gradients");
    let spec = random_spec(&mut rng);
    let mut params = spec.init(&mut rng);
    // Zero biases behind a dead ReLU layer put the next pre-activation exactly
    // on a kink, where central differences are meaningless.
    for layer in params.layers.iter_mut() {
        layer.bias.iter_mut().for_each(|b| *b = 0.1 * rng.sample::<f64, _>(rand_distr::StandardNormal));
    }
    let rows = rng.random_range(1..=5);
    let x = RealMatrix::randn(rows, spec.input_width(), &mut rng);
    let c = RealMatrix::randn(rows, spec.output_width(), &mut rng);
    let (_, tape) = forward(&spec, &params, &x).unwrap();
    let (grads, dx) = backward(&spec, &params, &tape, &c).unwrap();

    let mut worst: f64 = 0.0;
    let analytic: Vec<f64> = grads.arrays().flat_map(|(_, a)| a.to_vec()).collect();
    let mut k = 0;
    let n_arrays = params.arrays().count();
    for arr in 0..n_arrays {
        let len = params.arrays().nth(arr).unwrap().1.len();
        for i in 0..len {
            let mut plus = params.clone();
            plus.arrays_mut().nth(arr).unwrap()[i] += H;
            let mut minus = params.clone();
            minus.arrays_mut().nth(arr).unwrap()[i] -= H;
            let fd = (probe(&spec, &plus, &x, &c) - probe(&spec, &minus, &x, &c)) / (2.0 * H);
            worst = worst.max(rel_err(analytic[k], fd));
            k += 1;
        }
    }
    for i in 0..x.data().len() {
        let mut plus = x.clone();
        plus.data_mut()[i] += H;
        let mut minus = x.clone();
        minus.data_mut()[i] -= H;
        let fd = (probe(&spec, &params, &plus, &c) - probe(&spec, &params, &minus, &c)) / (2.0 * H);
        worst = worst.max(rel_err(dx.data()[i], fd));
    }
    worst
}

/// A conventional GAN loop: one generator step on `objective`, then the
/// discriminator steps, all drawing from the training stream.
pub fn plain_gan(cfg: &TrainerConfig, objective: MutationObjective, data: &RealMatrix) -> (Individual, Individual) {
    let nets = Networks::new(cfg, data.cols()).unwrap();
    let mut init = Streams::init(cfg.seed);
    let g0 = nets.generator.init(&mut init);
    let d0 = nets.discriminator.init(&mut init);
    let adam = |lr| {
        aggan_core::nn::OptState::new(
            aggan_core::nn::OptimizerKind::Adam { beta1: cfg.adam_beta1, beta2: cfg.adam_beta2, eps: 1e-8 },
            lr,
        )
    };
    let mut g = Individual { params: g0, opt: adam(cfg.g_lr) };
    let mut d = Individual { params: d0, opt: adam(cfg.d_lr) };
    let mut rng = Streams::new(cfg.seed).train;
    for _ in 0..cfg.iterations {
        let z = latent_batch(cfg.batch_size, cfg.latent_dim, &mut rng);
        generator_step(&nets, &mut g, &d.params, objective, &z).unwrap();
        for _ in 0..cfg.d_steps {
            let x = sample_batch(data, cfg.batch_size, &mut rng);
            let z = latent_batch(cfg.batch_size, cfg.latent_dim, &mut rng);
            discriminator_step(&nets, &mut d, &g.params, &x, &z).unwrap();
        }
    }
    (g, d)
}
