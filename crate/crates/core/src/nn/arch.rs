use crate::numerics::RngStream;
use crate::Result;

use super::network::{Init, Network, NetworkBuilder};

/// Half-width of the uniform init of output layers, keeping initial actions
/// near zero and initial Q estimates small.
pub const FINAL_INIT: f64 = 3e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CriticArch {
    /// State and action enter the dense stack directly.
    Plain,
    /// State passes a 1-D convolution stack first.
    Conv,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CriticSpec {
    pub arch: CriticArch,
    pub conv_channels: Vec<usize>,
    pub kernel: usize,
    pub padding: usize,
    pub stride: usize,
    pub hidden: Vec<usize>,
}

impl CriticSpec {
    pub fn conv(conv_channels: Vec<usize>, hidden: Vec<usize>) -> Self {
        CriticSpec {
            arch: CriticArch::Conv,
            conv_channels,
            kernel: 1,
            padding: 0,
            stride: 1,
            hidden,
        }
    }

    pub fn plain(hidden: Vec<usize>) -> Self {
        CriticSpec {
            arch: CriticArch::Plain,
            conv_channels: Vec::new(),
            kernel: 1,
            padding: 0,
            stride: 1,
            hidden,
        }
    }
}

/// Actor: tanh hidden layers and a tanh output, so every output lies in
/// (-1, 1).
pub fn build_actor(state_dim: usize, action_dim: usize, hidden: &[usize], rng: &mut RngStream) -> Network {
    let mut b = NetworkBuilder::new(state_dim);
    for &h in hidden {
        b = b.dense(h).tanh();
    }
    b.dense_init(action_dim, Init::Uniform(FINAL_INIT)).tanh().build(rng)
}

/// Critic `Q(s, a)` with a scalar output.
pub fn build_critic(state_dim: usize, action_dim: usize, spec: &CriticSpec, rng: &mut RngStream) -> Result<Network> {
    let mut b = NetworkBuilder::new(state_dim);
    if spec.arch == CriticArch::Conv {
        for &c in &spec.conv_channels {
            b = b.conv1d(c, spec.kernel, spec.stride, spec.padding)?.relu();
        }
    }
    b = b.concat(action_dim);
    for &h in &spec.hidden {
        b = b.dense(h).tanh();
    }
    Ok(b.dense_init(1, Init::Uniform(FINAL_INIT)).build(rng))
}
