//! Plain-text parameter checkpoints.
//!
//! ```text
//! aggan-params v1 <w0,w1,...> <act1,...,output>
//! layer0.weight <rows>x<cols> v v v ...
//! layer0.bias <n> v v ...
//! ```
//!
//! Values use 17 significant digits so that a save/load cycle is bit-exact.

use std::fmt::Write as _;
use std::path::Path;

use super::matrix::RealMatrix;
use super::mlp::{HiddenActivation, Layer, MlpSpec, OutputActivation, ParamSet};
use crate::error::{Error, Result};

const MAGIC: &str = "aggan-params";
const VERSION: &str = "v1";

pub fn to_string(spec: &MlpSpec, params: &ParamSet) -> Result<String> {
    spec.check(params)?;
    let widths: Vec<String> = spec.widths().iter().map(ToString::to_string).collect();
    let mut acts: Vec<String> = spec.hidden_activations().iter().map(ToString::to_string).collect();
    acts.push(spec.output_activation().to_string());
    let mut out = format!("{MAGIC} {VERSION} {} {}\n", widths.join(","), acts.join(","));
    for (l, layer) in params.layers.iter().enumerate() {
        let _ = write!(out, "layer{l}.weight {}x{}", layer.weight.rows(), layer.weight.cols());
        for v in layer.weight.data() {
            let _ = write!(out, " {v:.16e}");
        }
        out.push('\n');
        let _ = write!(out, "layer{l}.bias {}", layer.bias.len());
        for v in &layer.bias {
            let _ = write!(out, " {v:.16e}");
        }
        out.push('\n');
    }
    Ok(out)
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

/// Splits `leaky_relu(0.2),tanh,sigmoid` on top-level commas.
fn split_activations(s: &str) -> Vec<&str> {
    let mut parts = Vec::new();
    let (mut depth, mut start) = (0usize, 0usize);
    for (i, c) in s.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth = depth.saturating_sub(1),
            ',' if depth == 0 => {
                parts.push(&s[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    parts.push(&s[start..]);
    parts
}

/// Parses the header into an architecture.
pub fn parse_header(line: &str) -> Result<MlpSpec> {
    let fields: Vec<&str> = line.split_whitespace().collect();
    if fields.len() != 4 || fields[0] != MAGIC {
        return Err(parse_err(1, "expected `aggan-params v1 <widths> <activations>`"));
    }
    if fields[1] != VERSION {
        return Err(parse_err(1, format!("unsupported version `{}`", fields[1])));
    }
    let widths = fields[2]
        .split(',')
        .map(|w| w.parse::<usize>().map_err(|_| parse_err(1, format!("bad width `{w}`"))))
        .collect::<Result<Vec<_>>>()?;
    let acts = split_activations(fields[3]);
    let (output, hidden) = acts
        .split_last()
        .ok_or_else(|| parse_err(1, "missing activations"))?;
    let hidden = hidden
        .iter()
        .map(|a| a.parse::<HiddenActivation>().map_err(|e| parse_err(1, e.to_string())))
        .collect::<Result<Vec<_>>>()?;
    let output = output
        .parse::<OutputActivation>()
        .map_err(|e| parse_err(1, e.to_string()))?;
    MlpSpec::new(widths, hidden, output).map_err(|e| parse_err(1, e.to_string()))
}

/// Parses a checkpoint, returning the architecture it declares and its parameters.
pub fn from_str(text: &str) -> Result<(MlpSpec, ParamSet)> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines.next().ok_or_else(|| parse_err(1, "empty checkpoint"))?;
    let spec = parse_header(header)?;
    let mut layers = Vec::with_capacity(spec.n_layers());
    let mut next_array = |expect_name: &str| -> Result<(usize, Vec<usize>, Vec<f64>)> {
        let (idx, line) = lines
            .next()
            .ok_or_else(|| parse_err(0, format!("missing array {expect_name}")))?;
        let lineno = idx + 1;
        let mut it = line.split_whitespace();
        let name = it.next().unwrap_or_default();
        if name != expect_name {
            return Err(parse_err(lineno, format!("expected {expect_name}, found `{name}`")));
        }
        let shape = it
            .next()
            .ok_or_else(|| parse_err(lineno, "missing shape"))?
            .split('x')
            .map(|d| d.parse::<usize>().map_err(|_| parse_err(lineno, format!("bad shape `{d}`"))))
            .collect::<Result<Vec<_>>>()?;
        let values = it
            .map(|v| v.parse::<f64>().map_err(|_| parse_err(lineno, format!("bad value `{v}`"))))
            .collect::<Result<Vec<_>>>()?;
        if values.len() != shape.iter().product::<usize>() {
            return Err(parse_err(
                lineno,
                format!("{expect_name}: shape {shape:?} but {} values", values.len()),
            ));
        }
        Ok((lineno, shape, values))
    };
    for (l, w) in spec.widths().windows(2).enumerate() {
        let (lineno, shape, values) = next_array(&format!("layer{l}.weight"))?;
        if shape != [w[1], w[0]] {
            return Err(parse_err(
                lineno,
                format!("layer{l}.weight has shape {shape:?}, architecture needs [{}, {}]", w[1], w[0]),
            ));
        }
        let weight = RealMatrix::from_vec(w[1], w[0], values)
            .map_err(|e| parse_err(lineno, e.to_string()))?;
        let (lineno, shape, bias) = next_array(&format!("layer{l}.bias"))?;
        if shape != [w[1]] {
            return Err(parse_err(lineno, format!("layer{l}.bias has shape {shape:?}")));
        }
        if bias.iter().any(|v| !v.is_finite()) {
            return Err(parse_err(lineno, "non-finite bias"));
        }
        layers.push(Layer { weight, bias });
    }
    let params = ParamSet { layers };
    spec.check(&params)?;
    Ok((spec, params))
}

pub fn save(path: &Path, spec: &MlpSpec, params: &ParamSet) -> Result<()> {
    std::fs::write(path, to_string(spec, params)?).map_err(|e| Error::io(path, e))
}

/// Loads a checkpoint and checks it against the expected architecture.
pub fn load(path: &Path, expected: &MlpSpec) -> Result<ParamSet> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let (spec, params) = from_str(&text)?;
    if &spec != expected {
        return Err(Error::Shape(format!(
            "{} holds a {:?} network, expected {:?}",
            path.display(),
            spec.widths(),
            expected.widths()
        )));
    }
    Ok(params)
}
