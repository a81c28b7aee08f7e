//! Minimal dense-network engine: exact reverse-mode gradients for small MLPs,
//! Adam, and uniform fan-based initialization. Everything is f64 and
//! deterministic given the RNG state.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::Tensor;

/// Discriminator outputs are clamped to [EPS, 1 - EPS] so log terms stay finite.
pub const SIGMOID_EPS: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Activation {
    Identity,
    /// Leaky ReLU with the given negative-side slope.
    LeakyRelu(f64),
    Tanh,
    Sigmoid,
}

impl Activation {
    fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Identity => x,
            Activation::LeakyRelu(a) => {
                if x >= 0.0 {
                    x
                } else {
                    a * x
                }
            }
            Activation::Tanh => x.tanh(),
            Activation::Sigmoid => (1.0 / (1.0 + (-x).exp())).clamp(SIGMOID_EPS, 1.0 - SIGMOID_EPS),
        }
    }

    /// d(post)/d(pre), evaluated from whichever of pre/post is cheaper.
    fn grad(self, pre: f64, post: f64) -> f64 {
        match self {
            Activation::Identity => 1.0,
            Activation::LeakyRelu(a) => {
                if pre >= 0.0 {
                    1.0
                } else {
                    a
                }
            }
            Activation::Tanh => 1.0 - post * post,
            Activation::Sigmoid => post * (1.0 - post),
        }
    }
}

/// One affine layer followed by an activation. Weight is [out x in], row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub weight: Tensor,
    pub bias: Tensor,
    pub activation: Activation,
}

impl Layer {
    pub fn in_dim(&self) -> usize {
        self.weight.ncols()
    }

    pub fn out_dim(&self) -> usize {
        self.weight.nrows()
    }
}

/// Feed-forward stack of dense layers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DenseNetRepr")]
pub struct DenseNet {
    layers: Vec<Layer>,
}

#[derive(Deserialize)]
struct DenseNetRepr {
    layers: Vec<Layer>,
}

impl TryFrom<DenseNetRepr> for DenseNet {
    type Error = String;

    fn try_from(raw: DenseNetRepr) -> std::result::Result<Self, String> {
        DenseNet::new(raw.layers).map_err(|e| e.to_string())
    }
}

impl DenseNet {
    /// Validates: at least one layer, chained dimensions, bias length matches,
    /// and sigmoid appears only as the final layer's activation.
    pub fn new(layers: Vec<Layer>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::Shape("network needs at least one layer".into()));
        }
        let last = layers.len() - 1;
        for (k, layer) in layers.iter().enumerate() {
            if layer.weight.shape().len() != 2 {
                return Err(Error::Shape(format!("layer {k}: weight must be a matrix")));
            }
            if layer.bias.shape() != [layer.out_dim()] {
                return Err(Error::Shape(format!(
                    "layer {k}: bias len {} != out dim {}",
                    layer.bias.len(),
                    layer.out_dim()
                )));
            }
            if k > 0 && layers[k - 1].out_dim() != layer.in_dim() {
                return Err(Error::Shape(format!(
                    "layer {k}: in dim {} != previous out dim {}",
                    layer.in_dim(),
                    layers[k - 1].out_dim()
                )));
            }
            if k != last && layer.activation == Activation::Sigmoid {
                return Err(Error::Shape(format!(
                    "layer {k}: sigmoid is only allowed on the final layer"
                )));
            }
        }
        Ok(DenseNet { layers })
    }

    /// Fully connected net with the given layer widths. Hidden layers use
    /// `hidden`, the last layer uses `output`. Weights are sampled uniformly
    /// from +-sqrt(6 / (fan_in + fan_out)); biases start at zero.
    pub fn mlp<R: Rng>(
        dims: &[usize],
        hidden: Activation,
        output: Activation,
        rng: &mut R,
    ) -> Result<DenseNet> {
        if dims.len() < 2 {
            return Err(Error::Shape("mlp needs input and output dims".into()));
        }
        if dims.iter().any(|&d| d == 0) {
            return Err(Error::Shape("zero-width layer".into()));
        }
        let mut layers = Vec::with_capacity(dims.len() - 1);
        for k in 0..dims.len() - 1 {
            let (fan_in, fan_out) = (dims[k], dims[k + 1]);
            let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
            let w: Vec<f64> = (0..fan_in * fan_out)
                .map(|_| rng.random_range(-limit..limit))
                .collect();
            layers.push(Layer {
                weight: Tensor::new(vec![fan_out, fan_in], w)?,
                bias: Tensor::zeros(vec![fan_out]),
                activation: if k == dims.len() - 2 { output } else { hidden },
            });
        }
        DenseNet::new(layers)
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn in_dim(&self) -> usize {
        self.layers[0].in_dim()
    }

    pub fn out_dim(&self) -> usize {
        self.layers.last().unwrap().out_dim()
    }

    pub fn has_sigmoid(&self) -> bool {
        self.layers.iter().any(|l| l.activation == Activation::Sigmoid)
    }

    pub fn final_activation(&self) -> Activation {
        self.layers.last().unwrap().activation
    }

    pub fn n_params(&self) -> usize {
        self.layers.iter().map(|l| l.weight.len() + l.bias.len()).sum()
    }

    /// Batch forward pass retaining every pre/post activation for backward.
    /// Input is [batch x in_dim]; errors on width mismatch or overflow to
    /// non-finite pre-activations.
    pub fn forward(&self, input: &Tensor) -> Result<ActivationTrace> {
        if input.ncols() != self.in_dim() {
            return Err(Error::Shape(format!(
                "forward: input width {} != net input dim {}",
                input.ncols(),
                self.in_dim()
            )));
        }
        let rows = input.nrows();
        let mut pre_all = Vec::with_capacity(self.layers.len());
        let mut post_all = Vec::with_capacity(self.layers.len());
        let mut cur = input.data().to_vec();
        for layer in &self.layers {
            let (in_d, out_d) = (layer.in_dim(), layer.out_dim());
            let w = layer.weight.data();
            let b = layer.bias.data();
            let mut pre = vec![0.0; rows * out_d];
            for r in 0..rows {
                let xr = &cur[r * in_d..(r + 1) * in_d];
                let pr = &mut pre[r * out_d..(r + 1) * out_d];
                for (o, p) in pr.iter_mut().enumerate() {
                    let wrow = &w[o * in_d..(o + 1) * in_d];
                    let mut acc = 0.0;
                    for (wv, xv) in wrow.iter().zip(xr) {
                        acc += wv * xv;
                    }
                    *p = acc + b[o];
                }
            }
            if pre.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite("pre-activation overflow in forward".into()));
            }
            let post: Vec<f64> = pre.iter().map(|&v| layer.activation.apply(v)).collect();
            cur = post.clone();
            pre_all.push(Tensor::new(vec![rows, out_d], pre)?);
            post_all.push(Tensor::new(vec![rows, out_d], post)?);
        }
        Ok(ActivationTrace {
            input: input.clone(),
            pre: pre_all,
            post: post_all,
        })
    }

    /// Exact reverse-mode gradients. `upstream` is dLoss/d(output), shaped like
    /// the trace output; no batch averaging happens here, the upstream carries
    /// any 1/batch factors.
    pub fn backward(&self, trace: &ActivationTrace, upstream: &Tensor) -> Result<Gradients> {
        let out = trace.output();
        if upstream.shape() != out.shape() {
            return Err(Error::Shape(format!(
                "backward: upstream shape {:?} != output shape {:?}",
                upstream.shape(),
                out.shape()
            )));
        }
        if trace.pre.len() != self.layers.len() || trace.input.ncols() != self.in_dim() {
            return Err(Error::Shape("backward: trace does not match network".into()));
        }
        let rows = trace.input.nrows();
        let mut grads: Vec<LayerGrads> = self
            .layers
            .iter()
            .map(|l| LayerGrads {
                weight: Tensor::zeros(vec![l.out_dim(), l.in_dim()]),
                bias: Tensor::zeros(vec![l.out_dim()]),
            })
            .collect();
        let mut d_out = upstream.data().to_vec();
        for k in (0..self.layers.len()).rev() {
            let layer = &self.layers[k];
            let (in_d, out_d) = (layer.in_dim(), layer.out_dim());
            let pre = trace.pre[k].data();
            let post = trace.post[k].data();
            let input = if k == 0 {
                trace.input.data()
            } else {
                trace.post[k - 1].data()
            };
            // dpre = d_out (elementwise) activation'
            let mut dpre = d_out;
            for (dp, (&p, &q)) in dpre.iter_mut().zip(pre.iter().zip(post)) {
                *dp *= layer.activation.grad(p, q);
            }
            let g = &mut grads[k];
            let dw = g.weight.data_mut();
            let db = g.bias.data_mut();
            let w = layer.weight.data();
            let mut d_in = vec![0.0; rows * in_d];
            for r in 0..rows {
                let dp = &dpre[r * out_d..(r + 1) * out_d];
                let xr = &input[r * in_d..(r + 1) * in_d];
                let di = &mut d_in[r * in_d..(r + 1) * in_d];
                for o in 0..out_d {
                    let dpo = dp[o];
                    db[o] += dpo;
                    let wrow = &w[o * in_d..(o + 1) * in_d];
                    let dwrow = &mut dw[o * in_d..(o + 1) * in_d];
                    for i in 0..in_d {
                        dwrow[i] += dpo * xr[i];
                        di[i] += dpo * wrow[i];
                    }
                }
            }
            d_out = d_in;
        }
        Ok(Gradients {
            layers: grads,
            input: Tensor::new(vec![rows, self.in_dim()], d_out)?,
        })
    }

    /// All parameters flattened in layer order, weights before biases.
    pub fn flat_params(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.n_params());
        for l in &self.layers {
            out.extend_from_slice(l.weight.data());
            out.extend_from_slice(l.bias.data());
        }
        out
    }

    /// Inverse of `flat_params`. Validates length and finiteness.
    pub fn set_flat_params(&mut self, flat: &[f64]) -> Result<()> {
        if flat.len() != self.n_params() {
            return Err(Error::Shape(format!(
                "set_flat_params: {} values for {} params",
                flat.len(),
                self.n_params()
            )));
        }
        if let Some(bad) = flat.iter().find(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("parameter value {bad}")));
        }
        let mut off = 0;
        for l in &mut self.layers {
            let nw = l.weight.len();
            l.weight.data_mut().copy_from_slice(&flat[off..off + nw]);
            off += nw;
            let nb = l.bias.len();
            l.bias.data_mut().copy_from_slice(&flat[off..off + nb]);
            off += nb;
        }
        Ok(())
    }

    /// One Adam step over all parameters with `grads` from `backward`.
    pub fn adam_step(&mut self, state: &mut AdamState, grads: &Gradients) -> Result<()> {
        let mut flat = self.flat_params();
        state.apply(&mut flat, &grads.flat())?;
        self.set_flat_params(&flat)
    }
}

/// Everything the forward pass saw: the batch input plus per-layer pre- and
/// post-activations. `output` is the final post-activation; `pre_logit_features`
/// is the input to the final layer (used by feature-matching scores).
#[derive(Debug, Clone)]
pub struct ActivationTrace {
    input: Tensor,
    pre: Vec<Tensor>,
    post: Vec<Tensor>,
}

impl ActivationTrace {
    pub fn input(&self) -> &Tensor {
        &self.input
    }

    pub fn output(&self) -> &Tensor {
        self.post.last().unwrap_or(&self.input)
    }

    pub fn pre_logit_features(&self) -> &Tensor {
        if self.post.len() >= 2 {
            &self.post[self.post.len() - 2]
        } else {
            &self.input
        }
    }
}

/// Per-layer weight/bias gradients plus the gradient w.r.t. the batch input.
#[derive(Debug, Clone)]
pub struct Gradients {
    pub layers: Vec<LayerGrads>,
    pub input: Tensor,
}

#[derive(Debug, Clone)]
pub struct LayerGrads {
    pub weight: Tensor,
    pub bias: Tensor,
}

impl Gradients {
    pub fn zeros_like(net: &DenseNet) -> Gradients {
        Gradients {
            layers: net
                .layers()
                .iter()
                .map(|l| LayerGrads {
                    weight: Tensor::zeros(vec![l.out_dim(), l.in_dim()]),
                    bias: Tensor::zeros(vec![l.out_dim()]),
                })
                .collect(),
            input: Tensor::zeros(vec![0, net.in_dim()]),
        }
    }

    /// Parameter gradients flattened to match `DenseNet::flat_params` order.
    pub fn flat(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for l in &self.layers {
            out.extend_from_slice(l.weight.data());
            out.extend_from_slice(l.bias.data());
        }
        out
    }

    /// Accumulate another gradient set (parameter part only) into this one.
    pub fn add_assign(&mut self, other: &Gradients) {
        assert_eq!(self.layers.len(), other.layers.len(), "gradient layer count");
        for (a, b) in self.layers.iter_mut().zip(&other.layers) {
            for (x, y) in a.weight.data_mut().iter_mut().zip(b.weight.data()) {
                *x += y;
            }
            for (x, y) in a.bias.data_mut().iter_mut().zip(b.bias.data()) {
                *x += y;
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamParams {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamParams {
    fn default() -> Self {
        AdamParams {
            lr: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

/// Adam with bias-corrected first and second moments.
#[derive(Debug, Clone)]
pub struct AdamState {
    pub hp: AdamParams,
    step: u64,
    m: Vec<f64>,
    v: Vec<f64>,
}

impl AdamState {
    pub fn new(hp: AdamParams, n_params: usize) -> AdamState {
        AdamState {
            hp,
            step: 0,
            m: vec![0.0; n_params],
            v: vec![0.0; n_params],
        }
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }

    /// In-place update: p -= lr * m_hat / (sqrt(v_hat) + eps).
    pub fn apply(&mut self, params: &mut [f64], grads: &[f64]) -> Result<()> {
        if params.len() != self.m.len() || grads.len() != self.m.len() {
            return Err(Error::Shape(format!(
                "adam: {} params / {} grads for state of {}",
                params.len(),
                grads.len(),
                self.m.len()
            )));
        }
        if let Some(bad) = grads.iter().find(|g| !g.is_finite()) {
            return Err(Error::NonFinite(format!("gradient value {bad}")));
        }
        self.step += 1;
        let t = self.step as i32;
        let AdamParams {
            lr,
            beta1,
            beta2,
            epsilon,
        } = self.hp;
        let bc1 = 1.0 - beta1.powi(t);
        let bc2 = 1.0 - beta2.powi(t);
        for i in 0..params.len() {
            let g = grads[i];
            self.m[i] = beta1 * self.m[i] + (1.0 - beta1) * g;
            self.v[i] = beta2 * self.v[i] + (1.0 - beta2) * g * g;
            let m_hat = self.m[i] / bc1;
            let v_hat = self.v[i] / bc2;
            params[i] -= lr * m_hat / (v_hat.sqrt() + epsilon);
        }
        Ok(())
    }
}
