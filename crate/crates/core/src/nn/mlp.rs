//! Multilayer perceptrons: architecture description, parameter storage, batched
//! forward evaluation and reverse-mode gradients.
//!
//! Layers compute `z = a·Wᵀ + b` followed by an element-wise (or, for softmax,
//! row-wise) activation. Weights are stored row-major with shape `(out, in)`.

use std::collections::hash_map::DefaultHasher;
use std::fmt;
use std::hash::Hasher;
use std::str::FromStr;

use rand::Rng;

use super::matrix::RealMatrix;
use crate::error::{Error, Result};

/// Lower/upper clamp applied to sigmoid outputs so that `log(d)` and `log(1 - d)`
/// stay finite.
pub const PROB_EPS: f64 = 1e-7;

/// Slope used when a leaky ReLU is requested without one.
pub const DEFAULT_LEAKY_SLOPE: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HiddenActivation {
    Relu,
    LeakyRelu(f64),
    Tanh,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputActivation {
    Sigmoid,
    Identity,
    Softmax,
}

impl HiddenActivation {
    #[inline]
    fn apply(self, z: f64) -> f64 {
        match self {
            HiddenActivation::Relu => z.max(0.0),
            HiddenActivation::LeakyRelu(s) => {
                if z > 0.0 {
                    z
                } else {
                    s * z
                }
            }
            HiddenActivation::Tanh => z.tanh(),
        }
    }

    /// Derivative expressed through the pre-activation `z` and output `a`.
    #[inline]
    fn derivative(self, z: f64, a: f64) -> f64 {
        match self {
            HiddenActivation::Relu => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            HiddenActivation::LeakyRelu(s) => {
                if z > 0.0 {
                    1.0
                } else {
                    s
                }
            }
            HiddenActivation::Tanh => 1.0 - a * a,
        }
    }
}

impl fmt::Display for HiddenActivation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HiddenActivation::Relu => write!(f, "relu"),
            HiddenActivation::LeakyRelu(s) => write!(f, "leaky_relu({s})"),
            HiddenActivation::Tanh => write!(f, "tanh"),
        }
    }
}

impl FromStr for HiddenActivation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "relu" => Ok(HiddenActivation::Relu),
            "tanh" => Ok(HiddenActivation::Tanh),
            "leaky_relu" => Ok(HiddenActivation::LeakyRelu(DEFAULT_LEAKY_SLOPE)),
            _ => {
                let slope = s
                    .strip_prefix("leaky_relu(")
                    .and_then(|r| r.strip_suffix(')'))
                    .and_then(|v| v.parse::<f64>().ok())
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| Error::argument(format!("unknown activation `{s}`")))?;
                Ok(HiddenActivation::LeakyRelu(slope))
            }
        }
    }
}

impl fmt::Display for OutputActivation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OutputActivation::Sigmoid => "sigmoid",
            OutputActivation::Identity => "identity",
            OutputActivation::Softmax => "softmax",
        })
    }
}

impl FromStr for OutputActivation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sigmoid" => Ok(OutputActivation::Sigmoid),
            "identity" => Ok(OutputActivation::Identity),
            "softmax" => Ok(OutputActivation::Softmax),
            _ => Err(Error::argument(format!("unknown output activation `{s}`"))),
        }
    }
}

/// Architecture of a fully connected network.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpSpec {
    widths: Vec<usize>,
    hidden: Vec<HiddenActivation>,
    output: OutputActivation,
}

impl MlpSpec {
    /// `widths` lists input, hidden and output widths; `hidden` holds one activation
    /// per hidden layer.
    pub fn new(
        widths: Vec<usize>,
        hidden: Vec<HiddenActivation>,
        output: OutputActivation,
    ) -> Result<Self> {
        if widths.len() < 3 {
            return Err(Error::argument("an MLP needs at least one hidden layer"));
        }
        if widths.contains(&0) {
            return Err(Error::argument("layer widths must be at least 1"));
        }
        if hidden.len() != widths.len() - 2 {
            return Err(Error::argument(format!(
                "{} hidden layers but {} hidden activations",
                widths.len() - 2,
                hidden.len()
            )));
        }
        Ok(Self {
            widths,
            hidden,
            output,
        })
    }

    /// Same activation on every hidden layer.
    pub fn uniform(
        input: usize,
        hidden_widths: &[usize],
        output_width: usize,
        activation: HiddenActivation,
        output: OutputActivation,
    ) -> Result<Self> {
        let mut widths = Vec::with_capacity(hidden_widths.len() + 2);
        widths.push(input);
        widths.extend_from_slice(hidden_widths);
        widths.push(output_width);
        Self::new(widths, vec![activation; hidden_widths.len()], output)
    }

    pub fn widths(&self) -> &[usize] {
        &self.widths
    }

    pub fn hidden_activations(&self) -> &[HiddenActivation] {
        &self.hidden
    }

    pub fn output_activation(&self) -> OutputActivation {
        self.output
    }

    pub fn input_width(&self) -> usize {
        self.widths[0]
    }

    pub fn output_width(&self) -> usize {
        *self.widths.last().unwrap()
    }

    pub fn n_layers(&self) -> usize {
        self.widths.len() - 1
    }

    pub fn param_count(&self) -> usize {
        self.widths.windows(2).map(|w| w[0] * w[1] + w[1]).sum()
    }

    /// Glorot-uniform weights in `±sqrt(6 / (fan_in + fan_out))`, zero biases.
    pub fn init<R: Rng + ?Sized>(&self, rng: &mut R) -> ParamSet {
        let layers = self
            .widths
            .windows(2)
            .map(|w| {
                let (fan_in, fan_out) = (w[0], w[1]);
                let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
                let data = (0..fan_in * fan_out)
                    .map(|_| rng.random_range(-limit..limit))
                    .collect();
                Layer {
                    weight: RealMatrix::from_vec(fan_out, fan_in, data)
                        .expect("finite initial weights"),
                    bias: vec![0.0; fan_out],
                }
            })
            .collect();
        ParamSet { layers }
    }

    /// All-zero parameters.
    pub fn zeros(&self) -> ParamSet {
        ParamSet {
            layers: self
                .widths
                .windows(2)
                .map(|w| Layer {
                    weight: RealMatrix::zeros(w[1], w[0]),
                    bias: vec![0.0; w[1]],
                })
                .collect(),
        }
    }

    /// Checks that `params` has the layer shapes this architecture requires.
    pub fn check(&self, params: &ParamSet) -> Result<()> {
        if params.layers.len() != self.n_layers() {
            return Err(Error::Shape(format!(
                "expected {} layers, got {}",
                self.n_layers(),
                params.layers.len()
            )));
        }
        for (l, (layer, w)) in params.layers.iter().zip(self.widths.windows(2)).enumerate() {
            if layer.weight.cols() != w[0] {
                return Err(Error::Dimension {
                    layer: l,
                    expected: w[0],
                    got: layer.weight.cols(),
                });
            }
            if layer.weight.rows() != w[1] || layer.bias.len() != w[1] {
                return Err(Error::Dimension {
                    layer: l,
                    expected: w[1],
                    got: layer.weight.rows(),
                });
            }
        }
        Ok(())
    }
}

/// Weight matrix `(out, in)` and bias vector `(out)` of one dense layer.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub weight: RealMatrix,
    pub bias: Vec<f64>,
}

impl Layer {
    fn zeros_like(&self) -> Self {
        Layer {
            weight: RealMatrix::zeros(self.weight.rows(), self.weight.cols()),
            bias: vec![0.0; self.bias.len()],
        }
    }
}

/// All weights of one network.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamSet {
    pub layers: Vec<Layer>,
}

/// Gradients congruent to a [`ParamSet`].
#[derive(Debug, Clone, PartialEq)]
pub struct GradSet {
    pub layers: Vec<Layer>,
}

fn named_arrays(layers: &[Layer]) -> impl Iterator<Item = (String, &[f64])> {
    layers.iter().enumerate().flat_map(|(l, layer)| {
        [
            (format!("layer{l}.weight"), layer.weight.data()),
            (format!("layer{l}.bias"), layer.bias.as_slice()),
        ]
    })
}

fn arrays_mut(layers: &mut [Layer]) -> impl Iterator<Item = &mut [f64]> {
    layers
        .iter_mut()
        .flat_map(|layer| [layer.weight.data_mut(), layer.bias.as_mut_slice()])
}

impl ParamSet {
    /// Arrays in canonical order with names `layer{i}.weight` / `layer{i}.bias`.
    pub fn arrays(&self) -> impl Iterator<Item = (String, &[f64])> {
        named_arrays(&self.layers)
    }

    pub fn arrays_mut(&mut self) -> impl Iterator<Item = &mut [f64]> {
        arrays_mut(&mut self.layers)
    }

    pub fn param_count(&self) -> usize {
        self.arrays().map(|(_, a)| a.len()).sum()
    }

    pub fn zeros_like(&self) -> GradSet {
        GradSet {
            layers: self.layers.iter().map(Layer::zeros_like).collect(),
        }
    }

    /// Hash over the exact bit patterns of every parameter.
    pub fn checksum(&self) -> u64 {
        // FNV-1a over 64-bit words; cheap enough to run on every forward pass.
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for (_, a) in self.arrays() {
            h = (h ^ a.len() as u64).wrapping_mul(0x0000_0100_0000_01b3);
            for v in a {
                h = (h ^ v.to_bits()).wrapping_mul(0x0000_0100_0000_01b3);
            }
        }
        h
    }
}

impl GradSet {
    pub fn arrays(&self) -> impl Iterator<Item = (String, &[f64])> {
        named_arrays(&self.layers)
    }

    pub fn arrays_mut(&mut self) -> impl Iterator<Item = &mut [f64]> {
        arrays_mut(&mut self.layers)
    }

    /// Element-wise `self += other`.
    pub fn accumulate(&mut self, other: &GradSet) -> Result<()> {
        if self.layers.len() != other.layers.len() {
            return Err(Error::Shape("gradient sets differ in layer count".into()));
        }
        for (dst, src) in self.arrays_mut().zip(other.arrays()) {
            if dst.len() != src.1.len() {
                return Err(Error::Shape(format!("gradient array {} differs in size", src.0)));
            }
            for (d, s) in dst.iter_mut().zip(src.1) {
                *d += s;
            }
        }
        Ok(())
    }
}

/// Cached activations from one forward pass.
#[derive(Debug, Clone)]
pub struct Tape {
    /// `activations[0]` is the input; `activations[l + 1]` is the output of layer `l`.
    activations: Vec<RealMatrix>,
    pre_activations: Vec<RealMatrix>,
    /// Which sigmoid outputs were clamped (zero local derivative).
    clamped: Vec<bool>,
    fingerprint: u64,
}

impl Tape {
    pub fn output(&self) -> &RealMatrix {
        self.activations.last().unwrap()
    }

    pub fn input(&self) -> &RealMatrix {
        &self.activations[0]
    }
}

fn fingerprint(spec: &MlpSpec, params: &ParamSet) -> u64 {
    let mut h = DefaultHasher::new();
    for w in &spec.widths {
        h.write_usize(*w);
    }
    h.write_u64(params.checksum());
    h.finish()
}

/// `C (m×n) = beta·C + A·B` where `A` and `B` may be read transposed.
fn gemm(m: usize, k: usize, n: usize, a: &[f64], a_t: bool, b: &[f64], b_t: bool, beta: f64, c: &mut [f64]) {
    debug_assert!(a.len() == m * k && b.len() == k * n && c.len() == m * n);
    if m == 0 || n == 0 {
        return;
    }
    // Row and column strides of A (m×k) and B (k×n) as stored.
    let (rsa, csa) = if a_t { (1, m as isize) } else { (k as isize, 1) };
    let (rsb, csb) = if b_t { (1, k as isize) } else { (n as isize, 1) };
    // SAFETY: the slices hold exactly the m×k, k×n and m×n elements the
    // strides address, and `c` does not alias `a` or `b`.
    unsafe {
        matrixmultiply::dgemm(
            m, k, n, 1.0, a.as_ptr(), rsa, csa, b.as_ptr(), rsb, csb, beta, c.as_mut_ptr(), n as isize, 1,
        );
    }
}

/// `out[r][o] = Σ_i a[r][i]·W[o][i] + b[o]`.
fn affine(input: &RealMatrix, layer: &Layer) -> RealMatrix {
    let (rows, out) = (input.rows(), layer.weight.rows());
    let mut z = RealMatrix::zeros(rows, out);
    for r in 0..rows {
        z.row_mut(r).copy_from_slice(&layer.bias);
    }
    gemm(rows, input.cols(), out, input.data(), false, layer.weight.data(), true, 1.0, z.data_mut());
    z
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

fn softmax_rows(z: &RealMatrix) -> RealMatrix {
    let mut out = z.clone();
    for r in 0..out.rows() {
        let row = out.row_mut(r);
        let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut sum = 0.0;
        for v in row.iter_mut() {
            *v = (*v - max).exp();
            sum += *v;
        }
        for v in row.iter_mut() {
            *v /= sum;
        }
    }
    out
}

/// Evaluates the network on a batch (one sample per row).
pub fn forward(spec: &MlpSpec, params: &ParamSet, input: &RealMatrix) -> Result<(RealMatrix, Tape)> {
    spec.check(params)?;
    if input.cols() != spec.input_width() {
        return Err(Error::Dimension {
            layer: 0,
            expected: spec.input_width(),
            got: input.cols(),
        });
    }
    let n = spec.n_layers();
    let mut activations = Vec::with_capacity(n + 1);
    let mut pre_activations = Vec::with_capacity(n);
    let mut clamped = Vec::new();
    activations.push(input.clone());
    for (l, layer) in params.layers.iter().enumerate() {
        let z = affine(&activations[l], layer);
        let a = if l + 1 < n {
            let act = spec.hidden[l];
            let mut a = z.clone();
            a.data_mut().iter_mut().for_each(|v| *v = act.apply(*v));
            a
        } else {
            match spec.output {
                OutputActivation::Identity => z.clone(),
                OutputActivation::Softmax => softmax_rows(&z),
                OutputActivation::Sigmoid => {
                    let mut a = z.clone();
                    clamped = vec![false; a.data().len()];
                    for (v, c) in a.data_mut().iter_mut().zip(clamped.iter_mut()) {
                        let s = sigmoid(*v);
                        let s_c = s.clamp(PROB_EPS, 1.0 - PROB_EPS);
                        *c = s_c != s;
                        *v = s_c;
                    }
                    a
                }
            }
        };
        if !a.is_finite() {
            return Err(Error::Numeric(format!("forward activations of layer {l}")));
        }
        pre_activations.push(z);
        activations.push(a);
    }
    let tape = Tape {
        activations,
        pre_activations,
        clamped,
        fingerprint: fingerprint(spec, params),
    };
    Ok((tape.output().clone(), tape))
}

/// Reverse-mode gradients of the scalar whose partials with respect to the network
/// output are `output_grad`. Returns parameter gradients and the input gradient.
pub fn backward(
    spec: &MlpSpec,
    params: &ParamSet,
    tape: &Tape,
    output_grad: &RealMatrix,
) -> Result<(GradSet, RealMatrix)> {
    if tape.fingerprint != fingerprint(spec, params) || tape.activations.len() != spec.n_layers() + 1 {
        return Err(Error::Tape(
            "tape was not produced by a forward pass of these parameters".into(),
        ));
    }
    let out = tape.output();
    if output_grad.rows() != out.rows() || output_grad.cols() != out.cols() {
        return Err(Error::Shape(format!(
            "output gradient is {}x{}, output is {}x{}",
            output_grad.rows(),
            output_grad.cols(),
            out.rows(),
            out.cols()
        )));
    }
    let n = spec.n_layers();
    let rows = out.rows();

    // Gradient with respect to the output layer pre-activation.
    let mut delta = match spec.output {
        OutputActivation::Identity => output_grad.clone(),
        OutputActivation::Sigmoid => {
            let mut d = output_grad.clone();
            for ((g, &s), &c) in d.data_mut().iter_mut().zip(out.data()).zip(&tape.clamped) {
                *g = if c { 0.0 } else { *g * s * (1.0 - s) };
            }
            d
        }
        OutputActivation::Softmax => {
            let mut d = output_grad.clone();
            for r in 0..rows {
                let s = out.row(r);
                let g = d.row_mut(r);
                let dot: f64 = g.iter().zip(s).map(|(a, b)| a * b).sum();
                for (gj, sj) in g.iter_mut().zip(s) {
                    *gj = sj * (*gj - dot);
                }
            }
            d
        }
    };

    let mut grads = params.zeros_like();
    for l in (0..n).rev() {
        let layer = &params.layers[l];
        let input = &tape.activations[l];
        let gl = &mut grads.layers[l];
        let (out_w, in_w) = (layer.weight.rows(), layer.weight.cols());
        for dr in delta.iter_rows() {
            for (b, d) in gl.bias.iter_mut().zip(dr) {
                *b += d;
            }
        }
        gemm(out_w, rows, in_w, delta.data(), true, input.data(), false, 0.0, gl.weight.data_mut());
        let mut prev = RealMatrix::zeros(rows, in_w);
        gemm(rows, out_w, in_w, delta.data(), false, layer.weight.data(), false, 0.0, prev.data_mut());
        if l > 0 {
            let act = spec.hidden[l - 1];
            let z = &tape.pre_activations[l - 1];
            let a = &tape.activations[l];
            for ((p, &zv), &av) in prev.data_mut().iter_mut().zip(z.data()).zip(a.data()) {
                *p *= act.derivative(zv, av);
            }
        }
        delta = prev;
    }
    if let Some((name, _)) = grads.arrays().find(|(_, a)| a.iter().any(|v| !v.is_finite())) {
        return Err(Error::Numeric(format!("gradient {name}")));
    }
    if !delta.is_finite() {
        return Err(Error::Numeric("input gradient".into()));
    }
    Ok((grads, delta))
}

/// Global L2 norm over every entry of every gradient array.
pub fn grad_norm(grads: &GradSet) -> f64 {
    grads
        .arrays()
        .flat_map(|(_, a)| a.iter())
        .map(|v| v * v)
        .sum::<f64>()
        .sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn scalar_net(w: f64, b: f64, out: OutputActivation) -> (MlpSpec, ParamSet) {
        // 1 -> 1 -> 1 with an identity-like hidden layer (leaky slope 1).
        let spec = MlpSpec::new(vec![1, 1, 1], vec![HiddenActivation::LeakyRelu(1.0)], out).unwrap();
        let mut p = spec.zeros();
        p.layers[0].weight.set(0, 0, 1.0);
        p.layers[1].weight.set(0, 0, w);
        p.layers[1].bias[0] = b;
        (spec, p)
    }

    #[test]
    fn zero_network_outputs_zero() {
        let spec = MlpSpec::uniform(3, &[4, 4], 2, HiddenActivation::Tanh, OutputActivation::Identity)
            .unwrap();
        let p = spec.zeros();
        let x = RealMatrix::from_rows(&[vec![1.0, -2.0, 3.0], vec![0.5, 0.5, 9.0]]).unwrap();
        let (y, _) = forward(&spec, &p, &x).unwrap();
        assert!(y.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn affine_scalar_map() {
        let (spec, p) = scalar_net(2.0, 1.0, OutputActivation::Identity);
        let x = RealMatrix::from_vec(1, 1, vec![3.0]).unwrap();
        let (y, _) = forward(&spec, &p, &x).unwrap();
        assert_eq!(y.data(), &[7.0]);
    }

    #[test]
    fn sigmoid_of_zero_is_half() {
        let (spec, p) = scalar_net(0.0, 0.0, OutputActivation::Sigmoid);
        let x = RealMatrix::from_vec(2, 1, vec![3.0, -100.0]).unwrap();
        let (y, _) = forward(&spec, &p, &x).unwrap();
        assert_eq!(y.data(), &[0.5, 0.5]);
    }

    #[test]
    fn sigmoid_output_is_clamped() {
        let (spec, p) = scalar_net(100.0, 0.0, OutputActivation::Sigmoid);
        let x = RealMatrix::from_vec(2, 1, vec![5.0, -5.0]).unwrap();
        let (y, _) = forward(&spec, &p, &x).unwrap();
        assert_eq!(y.data(), &[1.0 - PROB_EPS, PROB_EPS]);
        assert!(y.data().iter().all(|d| d.ln().is_finite() && (1.0 - d).ln().is_finite()));
    }

    #[test]
    fn product_rule_gradient() {
        let (spec, p) = scalar_net(2.5, 0.0, OutputActivation::Identity);
        let x = RealMatrix::from_vec(1, 1, vec![3.0]).unwrap();
        let (_, tape) = forward(&spec, &p, &x).unwrap();
        let g = RealMatrix::from_vec(1, 1, vec![1.0]).unwrap();
        let (grads, dx) = backward(&spec, &p, &tape, &g).unwrap();
        assert_eq!(grads.layers[1].weight.data(), &[3.0]);
        assert_eq!(dx.data(), &[2.5]);
    }

    #[test]
    fn zero_upstream_gives_zero_gradients() {
        let spec = MlpSpec::uniform(2, &[5], 3, HiddenActivation::Relu, OutputActivation::Softmax)
            .unwrap();
        let p = spec.init(&mut ChaCha8Rng::seed_from_u64(1));
        let x = RealMatrix::randn(4, 2, &mut ChaCha8Rng::seed_from_u64(2));
        let (y, tape) = forward(&spec, &p, &x).unwrap();
        let (grads, dx) = backward(&spec, &p, &tape, &RealMatrix::zeros(y.rows(), y.cols())).unwrap();
        assert_eq!(grad_norm(&grads), 0.0);
        assert!(dx.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn wrong_input_width_names_layer() {
        let spec = MlpSpec::uniform(2, &[3], 1, HiddenActivation::Relu, OutputActivation::Sigmoid)
            .unwrap();
        let p = spec.zeros();
        let err = forward(&spec, &p, &RealMatrix::zeros(1, 3)).unwrap_err();
        assert!(matches!(err, Error::Dimension { layer: 0, expected: 2, got: 3 }));
    }

    #[test]
    fn stale_tape_is_rejected() {
        let spec = MlpSpec::uniform(2, &[3], 1, HiddenActivation::Relu, OutputActivation::Sigmoid)
            .unwrap();
        let mut p = spec.init(&mut ChaCha8Rng::seed_from_u64(3));
        let (_, tape) = forward(&spec, &p, &RealMatrix::zeros(1, 2)).unwrap();
        p.layers[0].bias[0] += 1.0;
        let err = backward(&spec, &p, &tape, &RealMatrix::zeros(1, 1)).unwrap_err();
        assert!(matches!(err, Error::Tape(_)));
    }

    #[test]
    fn grad_norm_examples() {
        let spec = MlpSpec::new(vec![1, 1, 1], vec![HiddenActivation::Relu], OutputActivation::Identity)
            .unwrap();
        let mut g = spec.zeros().zeros_like();
        assert_eq!(grad_norm(&g), 0.0);
        g.layers[0].weight.set(0, 0, 3.0);
        g.layers[1].bias[0] = 4.0;
        assert_eq!(grad_norm(&g), 5.0);
    }

    #[test]
    fn mlp_spec_validation() {
        assert!(MlpSpec::new(vec![2, 1], vec![], OutputActivation::Identity).is_err());
        assert!(MlpSpec::new(vec![2, 0, 1], vec![HiddenActivation::Relu], OutputActivation::Identity).is_err());
        assert!(MlpSpec::new(vec![2, 3, 1], vec![], OutputActivation::Identity).is_err());
    }

    #[test]
    fn activation_names_round_trip() {
        for a in [HiddenActivation::Relu, HiddenActivation::Tanh, HiddenActivation::LeakyRelu(0.2)] {
            assert_eq!(a.to_string().parse::<HiddenActivation>().unwrap(), a);
        }
        assert_eq!("leaky_relu".parse::<HiddenActivation>().unwrap(), HiddenActivation::LeakyRelu(0.2));
        assert!("gelu".parse::<HiddenActivation>().is_err());
    }
}
