use crate::numerics::RngStream;
use crate::{Error, Result};

use super::layer::{ConvSpec, Layer};

/// Feed-forward network over a flat parameter vector.
///
/// Data between layers is a flat `Vec<f64>`; convolutional layers read it as
/// channel-major `[channels][length]`. A [`Layer::Concat`] splices the side
/// input (the action, for critics) into the stream.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    layers: Vec<Layer>,
    params: Vec<f64>,
    input_len: usize,
    side_len: usize,
}

/// Activations recorded by [`Network::forward_trace`]; `acts[0]` is the
/// input and `acts[i + 1]` the output of layer `i`.
#[derive(Debug, Clone)]
pub struct Trace {
    acts: Vec<Vec<f64>>,
}

impl Trace {
    pub fn output(&self) -> &[f64] {
        self.acts.last().expect("trace holds at least the input")
    }
}

/// Gradients with respect to a network's two inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct InputGrads {
    pub input: Vec<f64>,
    pub side: Vec<f64>,
}

impl Network {
    /// Assembles a network from explicit layers and parameters, checking
    /// that shapes chain and offsets tile the parameter vector.
    pub fn from_parts(layers: Vec<Layer>, params: Vec<f64>, input_len: usize, side_len: usize) -> Result<Self> {
        let mut len = input_len;
        let mut offset = 0;
        let mut concat = 0;
        for (i, layer) in layers.iter().enumerate() {
            if layer.input_len() != len {
                return Err(Error::dims(
                    "Network::from_parts",
                    format!("layer {i} expects {} inputs, receives {len}", layer.input_len()),
                ));
            }
            if let Some(o) = layer.param_offset() {
                if o != offset {
                    return Err(Error::Checkpoint(format!("layer {i} offset {o}, expected {offset}")));
                }
                offset += layer.param_count();
            }
            if let Layer::Conv1d { spec, in_len, out_len, .. } = *layer {
                if spec.output_len(in_len)? != out_len {
                    return Err(Error::Checkpoint(format!("layer {i} conv length inconsistent")));
                }
            }
            if let Layer::Concat { extra, .. } = *layer {
                if extra != side_len {
                    return Err(Error::dims("Network::from_parts", "concat width differs from side input"));
                }
                concat += 1;
            }
            len = layer.output_len();
        }
        if offset != params.len() {
            return Err(Error::Checkpoint(format!(
                "{} parameters for layers needing {offset}",
                params.len()
            )));
        }
        if concat > 1 || (side_len > 0 && concat == 0) {
            return Err(Error::dims("Network::from_parts", "side input must be concatenated exactly once"));
        }
        Ok(Network {
            layers,
            params,
            input_len,
            side_len,
        })
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn param_count(&self) -> usize {
        self.params.len()
    }

    pub fn input_len(&self) -> usize {
        self.input_len
    }

    pub fn side_len(&self) -> usize {
        self.side_len
    }

    pub fn output_len(&self) -> usize {
        self.layers.last().map_or(self.input_len, Layer::output_len)
    }

    /// Output for `input` (and `side`, if the network takes one).
    pub fn forward(&self, input: &[f64], side: &[f64]) -> Vec<f64> {
        self.forward_with(&self.params, input, side)
    }

    /// Forward pass with an alternative parameter vector of the same shape.
    pub fn forward_with(&self, params: &[f64], input: &[f64], side: &[f64]) -> Vec<f64> {
        assert_eq!(input.len(), self.input_len, "network input length");
        assert_eq!(side.len(), self.side_len, "network side input length");
        assert_eq!(params.len(), self.params.len(), "parameter vector length");
        let mut cur = input.to_vec();
        let mut next = Vec::new();
        for layer in &self.layers {
            layer.forward(params, &cur, side, &mut next);
            std::mem::swap(&mut cur, &mut next);
        }
        cur
    }

    pub fn forward_trace(&self, input: &[f64], side: &[f64]) -> Trace {
        assert_eq!(input.len(), self.input_len, "network input length");
        assert_eq!(side.len(), self.side_len, "network side input length");
        let mut acts = Vec::with_capacity(self.layers.len() + 1);
        acts.push(input.to_vec());
        for layer in &self.layers {
            let mut out = Vec::new();
            layer.forward(&self.params, acts.last().unwrap(), side, &mut out);
            acts.push(out);
        }
        Trace { acts }
    }

    /// Backpropagates `grad_out` (gradient of a scalar loss with respect to
    /// the output) through a recorded pass. Parameter gradients are added to
    /// `param_grads` when supplied.
    pub fn backward(&self, trace: &Trace, grad_out: &[f64], mut param_grads: Option<&mut [f64]>) -> InputGrads {
        assert_eq!(grad_out.len(), self.output_len(), "output gradient length");
        if let Some(pg) = param_grads.as_deref() {
            assert_eq!(pg.len(), self.params.len(), "gradient buffer length");
        }
        let mut side = vec![0.0; self.side_len];
        let mut grad = grad_out.to_vec();
        for (i, layer) in self.layers.iter().enumerate().rev() {
            grad = layer.backward(
                &self.params,
                &trace.acts[i],
                &trace.acts[i + 1],
                &grad,
                param_grads.as_deref_mut(),
                &mut side,
            );
        }
        InputGrads { input: grad, side }
    }
}

/// Weight initialization of a parameterized layer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Init {
    /// `U(-1/sqrt(fan_in), 1/sqrt(fan_in))` for weights and biases.
    FanIn,
    /// `U(-limit, limit)`.
    Uniform(f64),
    Zeros,
}

/// Incremental network construction with shape tracking.
#[derive(Debug, Clone)]
pub struct NetworkBuilder {
    input_len: usize,
    side_len: usize,
    channels: usize,
    len: usize,
    layers: Vec<(Layer, Init)>,
    params: usize,
}

impl NetworkBuilder {
    /// Starts from a single-channel input of `input_len` values.
    pub fn new(input_len: usize) -> Self {
        NetworkBuilder {
            input_len,
            side_len: 0,
            channels: 1,
            len: input_len,
            layers: Vec::new(),
            params: 0,
        }
    }

    fn width(&self) -> usize {
        self.channels * self.len
    }

    fn push(mut self, layer: Layer, init: Init) -> Self {
        self.params += layer.param_count();
        self.layers.push((layer, init));
        self
    }

    /// Adds a 1-D convolution over the current `[channels][len]` signal.
    /// Fails when the output length is not a positive integer.
    pub fn conv1d(mut self, out_channels: usize, kernel: usize, stride: usize, padding: usize) -> Result<Self> {
        let spec = ConvSpec {
            in_channels: self.channels,
            out_channels,
            kernel,
            stride,
            padding,
        };
        let out_len = spec.output_len(self.len)?;
        let layer = Layer::Conv1d {
            spec,
            in_len: self.len,
            out_len,
            offset: self.params,
        };
        self.channels = out_channels;
        self.len = out_len;
        Ok(self.push(layer, Init::FanIn))
    }

    pub fn dense(self, outputs: usize) -> Self {
        self.dense_init(outputs, Init::FanIn)
    }

    pub fn dense_init(mut self, outputs: usize, init: Init) -> Self {
        let layer = Layer::Dense {
            inputs: self.width(),
            outputs,
            offset: self.params,
        };
        self.channels = 1;
        self.len = outputs;
        self.push(layer, init)
    }

    pub fn tanh(self) -> Self {
        let len = self.width();
        self.push(Layer::Tanh { len }, Init::Zeros)
    }

    pub fn relu(self) -> Self {
        let len = self.width();
        self.push(Layer::Relu { len }, Init::Zeros)
    }

    /// Flattens the signal and appends a side input of `extra` values.
    pub fn concat(mut self, extra: usize) -> Self {
        let len = self.width();
        self.side_len = extra;
        self.channels = 1;
        self.len = len + extra;
        self.push(Layer::Concat { len, extra }, Init::Zeros)
    }

    pub fn build(self, rng: &mut RngStream) -> Network {
        let mut params = Vec::with_capacity(self.params);
        let mut layers = Vec::with_capacity(self.layers.len());
        for (layer, init) in self.layers {
            if layer.param_count() > 0 {
                let fan_in = match layer {
                    Layer::Dense { inputs, .. } => inputs,
                    Layer::Conv1d { spec, .. } => spec.in_channels * spec.kernel,
                    _ => unreachable!(),
                };
                let limit = match init {
                    Init::FanIn => 1.0 / (fan_in as f64).sqrt(),
                    Init::Uniform(l) => l,
                    Init::Zeros => 0.0,
                };
                params.extend((0..layer.param_count()).map(|_| rng.uniform_range(-limit, limit)));
            }
            layers.push(layer);
        }
        Network {
            layers,
            params,
            input_len: self.input_len,
            side_len: self.side_len,
        }
    }
}

/// `target <- (1 - tau) target + tau train`, parameter by parameter.
pub fn soft_update(target: &mut Network, train: &Network, tau: f64) {
    assert_eq!(target.layers, train.layers, "soft update between different architectures");
    for (t, &s) in target.params.iter_mut().zip(&train.params) {
        *t = (1.0 - tau) * *t + tau * s;
    }
}
