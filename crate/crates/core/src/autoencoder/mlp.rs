//! Small fully connected networks with hand-written backpropagation.

use std::io::{BufRead, Write};

use rand::Rng;

use crate::error::{invalid, Error, Result};
use crate::rng::rng_from_seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Relu,
    Tanh,
}

impl Activation {
    fn apply(self, v: f64) -> f64 {
        match self {
            Activation::Relu => v.max(0.0),
            Activation::Tanh => v.tanh(),
        }
    }

    /// Derivative expressed through the pre-activation `v` and output `a`.
    fn deriv(self, v: f64, a: f64) -> f64 {
        match self {
            Activation::Relu => {
                if v > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Tanh => 1.0 - a * a,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Activation::Relu => "relu",
            Activation::Tanh => "tanh",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "relu" => Ok(Activation::Relu),
            "tanh" => Ok(Activation::Tanh),
            other => Err(Error::Config(format!("unknown activation `{other}`"))),
        }
    }
}

/// Multilayer perceptron: activation on hidden layers, linear output.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    widths: Vec<usize>,
    /// Layer `l` weights, `widths[l+1] × widths[l]` row-major.
    weights: Vec<Vec<f64>>,
    biases: Vec<Vec<f64>>,
    activation: Activation,
    seed: u64,
}

/// Activations saved by [`Mlp::forward_cached`] for the backward pass.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    /// Layer inputs; `inputs[0]` is the network input.
    inputs: Vec<Vec<f64>>,
    /// Pre-activations of every layer.
    pre: Vec<Vec<f64>>,
    pub output: Vec<f64>,
}

impl Mlp {
    /// Glorot-uniform weights and zero biases.
    pub fn new(widths: &[usize], activation: Activation, seed: u64) -> Result<Self> {
        if widths.len() < 2 || widths.iter().any(|w| *w == 0) {
            return invalid("an MLP needs at least input and output widths, all positive");
        }
        let mut rng = rng_from_seed(seed);
        let mut weights = Vec::new();
        let mut biases = Vec::new();
        for l in 0..widths.len() - 1 {
            let (fan_in, fan_out) = (widths[l], widths[l + 1]);
            let bound = (6.0 / (fan_in + fan_out) as f64).sqrt();
            weights.push((0..fan_in * fan_out).map(|_| rng.random_range(-bound..bound)).collect());
            biases.push(vec![0.0; fan_out]);
        }
        Ok(Self {
            widths: widths.to_vec(),
            weights,
            biases,
            activation,
            seed,
        })
    }

    /// A `1 → hidden → 1` network computing (nearly) the identity.
    ///
    /// With ReLU the first two hidden units carry `x` and `−x` and the
    /// output is exactly `x`. With tanh one unit computes `tanh(sx)/s` with
    /// `s = 0.01`, within `s²|x|³/3` of `x`. Remaining units get small random
    /// input weights and zero output weights.
    pub fn near_identity(hidden: usize, activation: Activation, seed: u64) -> Result<Self> {
        if hidden < 2 {
            return invalid("near-identity net needs at least two hidden units");
        }
        let mut net = Self::new(&[1, hidden, 1], activation, seed)?;
        for w in net.weights[0].iter_mut() {
            *w *= 0.1;
        }
        net.weights[1].iter_mut().for_each(|w| *w = 0.0);
        match activation {
            Activation::Relu => {
                net.weights[0][0] = 1.0;
                net.weights[0][1] = -1.0;
                net.weights[1][0] = 1.0;
                net.weights[1][1] = -1.0;
            }
            Activation::Tanh => {
                let s = 0.01;
                net.weights[0][0] = s;
                net.weights[1][0] = 1.0 / s;
            }
        }
        Ok(net)
    }

    /// An affine `1 → 1` network `x ↦ a x + b` (no hidden layer).
    pub fn affine_1d(a: f64, b: f64) -> Self {
        Self {
            widths: vec![1, 1],
            weights: vec![vec![a]],
            biases: vec![vec![b]],
            activation: Activation::Tanh,
            seed: 0,
        }
    }

    pub fn widths(&self) -> &[usize] {
        &self.widths
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn input_dim(&self) -> usize {
        self.widths[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.widths.last().unwrap()
    }

    pub fn n_params(&self) -> usize {
        self.weights.iter().map(Vec::len).sum::<usize>() + self.biases.iter().map(Vec::len).sum::<usize>()
    }

    /// Parameters flattened layer by layer: weights then biases.
    pub fn params(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.n_params());
        for (w, b) in self.weights.iter().zip(&self.biases) {
            out.extend_from_slice(w);
            out.extend_from_slice(b);
        }
        out
    }

    pub fn set_params(&mut self, p: &[f64]) -> Result<()> {
        if p.len() != self.n_params() {
            return Err(Error::DimensionMismatch {
                expected: self.n_params(),
                got: p.len(),
            });
        }
        if p.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("network parameters".into()));
        }
        let mut k = 0;
        for (w, b) in self.weights.iter_mut().zip(self.biases.iter_mut()) {
            let (nw, nb) = (w.len(), b.len());
            w.copy_from_slice(&p[k..k + nw]);
            k += nw;
            b.copy_from_slice(&p[k..k + nb]);
            k += nb;
        }
        Ok(())
    }

    /// `θ ← θ − step · g`.
    pub fn sgd_step(&mut self, grad: &[f64], step: f64) -> Result<()> {
        let p: Vec<f64> = self.params().iter().zip(grad).map(|(t, g)| t - step * g).collect();
        self.set_params(&p)
    }

    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        let mut h = x.to_vec();
        let last = self.weights.len() - 1;
        for (l, (w, b)) in self.weights.iter().zip(&self.biases).enumerate() {
            let (n_in, n_out) = (self.widths[l], self.widths[l + 1]);
            let mut next = b.clone();
            for o in 0..n_out {
                let row = &w[o * n_in..(o + 1) * n_in];
                next[o] += row.iter().zip(&h).map(|(a, v)| a * v).sum::<f64>();
            }
            if l < last {
                next.iter_mut().for_each(|v| *v = self.activation.apply(*v));
            }
            h = next;
        }
        h
    }

    pub fn forward_1d(&self, x: f64) -> f64 {
        self.forward(&[x])[0]
    }

    pub fn forward_cached(&self, x: &[f64]) -> ForwardCache {
        let mut inputs = Vec::with_capacity(self.weights.len());
        let mut pre = Vec::with_capacity(self.weights.len());
        let mut h = x.to_vec();
        let last = self.weights.len() - 1;
        for (l, (w, b)) in self.weights.iter().zip(&self.biases).enumerate() {
            let (n_in, n_out) = (self.widths[l], self.widths[l + 1]);
            let mut z = b.clone();
            for o in 0..n_out {
                let row = &w[o * n_in..(o + 1) * n_in];
                z[o] += row.iter().zip(&h).map(|(a, v)| a * v).sum::<f64>();
            }
            let out: Vec<f64> = if l < last {
                z.iter().map(|v| self.activation.apply(*v)).collect()
            } else {
                z.clone()
            };
            inputs.push(std::mem::replace(&mut h, out));
            pre.push(z);
        }
        ForwardCache { inputs, pre, output: h }
    }

    /// Accumulate `∂L/∂θ` into `grad` (flat layout of [`Mlp::params`]) given
    /// `∂L/∂output`; returns `∂L/∂input`.
    pub fn backward(&self, cache: &ForwardCache, d_out: &[f64], grad: &mut [f64]) -> Vec<f64> {
        let layers = self.weights.len();
        let mut offsets = Vec::with_capacity(layers);
        let mut k = 0;
        for (w, b) in self.weights.iter().zip(&self.biases) {
            offsets.push(k);
            k += w.len() + b.len();
        }
        let mut delta = d_out.to_vec();
        for l in (0..layers).rev() {
            let (n_in, n_out) = (self.widths[l], self.widths[l + 1]);
            if l < layers - 1 {
                // Output of layer l went through the activation.
                let z = &cache.pre[l];
                let a = &cache.inputs[l + 1];
                for o in 0..n_out {
                    delta[o] *= self.activation.deriv(z[o], a[o]);
                }
            }
            let input = &cache.inputs[l];
            let w = &self.weights[l];
            let off = offsets[l];
            for o in 0..n_out {
                for i in 0..n_in {
                    grad[off + o * n_in + i] += delta[o] * input[i];
                }
                grad[off + n_in * n_out + o] += delta[o];
            }
            let mut d_in = vec![0.0; n_in];
            for o in 0..n_out {
                for i in 0..n_in {
                    d_in[i] += w[o * n_in + i] * delta[o];
                }
            }
            delta = d_in;
        }
        delta
    }

    /// Text format: `mlp <activation> <seed> <w0> <w1> …`, then per layer a
    /// `layer <l> <out> <in>` line, the weight rows and a bias row, all with
    /// 17 significant digits.
    pub fn write_text<W: Write>(&self, mut out: W) -> Result<()> {
        let widths: Vec<String> = self.widths.iter().map(|w| w.to_string()).collect();
        writeln!(out, "mlp {} {} {}", self.activation.name(), self.seed, widths.join(" "))?;
        for l in 0..self.weights.len() {
            let (n_in, n_out) = (self.widths[l], self.widths[l + 1]);
            writeln!(out, "layer {l} {n_out} {n_in}")?;
            for o in 0..n_out {
                let row: Vec<String> = self.weights[l][o * n_in..(o + 1) * n_in]
                    .iter()
                    .map(|v| format!("{v:.16e}"))
                    .collect();
                writeln!(out, "{}", row.join(" "))?;
            }
            let b: Vec<String> = self.biases[l].iter().map(|v| format!("{v:.16e}")).collect();
            writeln!(out, "{}", b.join(" "))?;
        }
        Ok(())
    }

    pub fn read_text<R: BufRead>(input: R) -> Result<Self> {
        let bad = |m: &str| Error::Config(format!("malformed network file: {m}"));
        let mut lines = input.lines();
        let head = lines.next().ok_or_else(|| bad("empty"))??;
        let mut tok = head.split_whitespace();
        if tok.next() != Some("mlp") {
            return Err(bad("missing `mlp` header"));
        }
        let activation = Activation::parse(tok.next().ok_or_else(|| bad("activation"))?)?;
        let seed: u64 = tok
            .next()
            .ok_or_else(|| bad("seed"))?
            .parse()
            .map_err(|_| bad("seed"))?;
        let widths: Vec<usize> = tok
            .map(|t| t.parse().map_err(|_| bad("width")))
            .collect::<Result<_>>()?;
        let mut net = Self::new(&widths, activation, seed)?;
        let parse_row = |line: Option<std::io::Result<String>>, len: usize| -> Result<Vec<f64>> {
            let line = line.ok_or_else(|| bad("truncated"))??;
            let v: Vec<f64> = line
                .split_whitespace()
                .map(|t| t.parse().map_err(|_| bad("number")))
                .collect::<Result<_>>()?;
            if v.len() != len {
                return Err(bad("row length"));
            }
            Ok(v)
        };
        let mut params = Vec::with_capacity(net.n_params());
        for l in 0..widths.len() - 1 {
            let (n_in, n_out) = (widths[l], widths[l + 1]);
            let hdr = lines.next().ok_or_else(|| bad("truncated"))??;
            if hdr.trim() != format!("layer {l} {n_out} {n_in}") {
                return Err(bad("layer header"));
            }
            for _ in 0..n_out {
                params.extend(parse_row(lines.next(), n_in)?);
            }
            params.extend(parse_row(lines.next(), n_out)?);
        }
        net.set_params(&params)?;
        Ok(net)
    }
}
