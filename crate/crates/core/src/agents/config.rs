use std::fmt;
use std::str::FromStr;

use crate::nn::{CriticArch, CriticSpec};
use crate::{Error, Result};

/// Learning algorithm.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    /// Plain critic, no exploration perturbation unless configured.
    Ddpg,
    /// Convolutional critic with decaying Gaussian perturbation.
    CaDdpg,
    /// Twin critics, delayed policy updates, target smoothing.
    Td3,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Ddpg => "ddpg",
            Algorithm::CaDdpg => "ca-ddpg",
            Algorithm::Td3 => "td3",
        }
    }

    /// Initial exploration scale used when none is configured.
    pub fn default_eta0(self) -> f64 {
        match self {
            Algorithm::Ddpg => 0.0,
            Algorithm::CaDdpg | Algorithm::Td3 => 0.5,
        }
    }

    pub fn critic_arch(self) -> CriticArch {
        match self {
            Algorithm::CaDdpg => CriticArch::Conv,
            Algorithm::Ddpg | Algorithm::Td3 => CriticArch::Plain,
        }
    }

    pub fn critic_count(self) -> usize {
        if self == Algorithm::Td3 {
            2
        } else {
            1
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ddpg" => Ok(Algorithm::Ddpg),
            "ca-ddpg" | "caddpg" | "ca_ddpg" => Ok(Algorithm::CaDdpg),
            "td3" => Ok(Algorithm::Td3),
            other => Err(Error::Config(format!("unknown algorithm `{other}`"))),
        }
    }
}

/// Hyperparameters of a learner.
#[derive(Debug, Clone, PartialEq)]
pub struct AgentConfig {
    pub algorithm: Algorithm,
    /// Discount factor λ.
    pub discount: f64,
    /// Soft-update coefficient τ.
    pub tau: f64,
    pub actor_lr: f64,
    pub critic_lr: f64,
    pub actor_decay: f64,
    pub critic_decay: f64,
    pub batch_size: usize,
    /// Target networks are blended every `sync_period` updates.
    pub sync_period: usize,
    pub buffer_capacity: usize,
    /// Transitions stored before updates begin; `None` means
    /// `max(batch_size, 500)`.
    pub warmup: Option<usize>,
    pub eta0: f64,
    /// Decay constant of the exploration scale, in steps.
    pub eta_horizon: f64,
    pub policy_delay: usize,
    pub target_noise: f64,
    pub target_noise_clip: f64,
    pub actor_hidden: Vec<usize>,
    pub critic_conv_channels: Vec<usize>,
    pub critic_hidden: Vec<usize>,
    pub kernel_size: usize,
    pub padding: usize,
    pub stride: usize,
}

impl AgentConfig {
    pub fn new(algorithm: Algorithm) -> Self {
        AgentConfig {
            algorithm,
            discount: 0.8,
            tau: 0.001,
            actor_lr: 1e-3,
            critic_lr: 1e-3,
            actor_decay: 1e-5,
            critic_decay: 1e-5,
            batch_size: 16,
            sync_period: 1,
            buffer_capacity: 80_000,
            warmup: None,
            eta0: algorithm.default_eta0(),
            eta_horizon: 80_000.0 / 4.0,
            policy_delay: 2,
            target_noise: 0.2,
            target_noise_clip: 0.5,
            actor_hidden: vec![256, 256],
            critic_conv_channels: vec![32, 32],
            critic_hidden: vec![256, 256],
            kernel_size: 1,
            padding: 0,
            stride: 1,
        }
    }

    pub fn warmup_len(&self) -> usize {
        self.warmup.unwrap_or(500).max(self.batch_size)
    }

    pub fn critic_spec(&self) -> CriticSpec {
        CriticSpec {
            arch: self.algorithm.critic_arch(),
            conv_channels: self.critic_conv_channels.clone(),
            kernel: self.kernel_size,
            padding: self.padding,
            stride: self.stride,
            hidden: self.critic_hidden.clone(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if !(self.discount > 0.0 && self.discount <= 1.0) {
            return bad(format!("lambda must lie in (0, 1], got {}", self.discount));
        }
        if !(self.tau > 0.0 && self.tau <= 1.0) {
            return bad(format!("tau must lie in (0, 1], got {}", self.tau));
        }
        for (name, v) in [
            ("actor_lr", self.actor_lr),
            ("critic_lr", self.critic_lr),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return bad(format!("{name} must be positive, got {v}"));
            }
        }
        for (name, v) in [
            ("actor_decay", self.actor_decay),
            ("critic_decay", self.critic_decay),
            ("eta0", self.eta0),
            ("target_noise", self.target_noise),
            ("target_noise_clip", self.target_noise_clip),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return bad(format!("{name} must be nonnegative, got {v}"));
            }
        }
        if !(self.eta_horizon > 0.0) {
            return bad(format!("eta_horizon must be positive, got {}", self.eta_horizon));
        }
        if self.batch_size == 0 || self.sync_period == 0 || self.policy_delay == 0 {
            return bad("batch_size, sync_period and policy_delay must be at least 1".into());
        }
        if self.buffer_capacity < self.warmup_len() {
            return bad(format!(
                "buffer_size {} is smaller than the warm-up length {}",
                self.buffer_capacity,
                self.warmup_len()
            ));
        }
        if self.actor_hidden.contains(&0) || self.critic_hidden.contains(&0) || self.critic_conv_channels.contains(&0) {
            return bad("layer widths must be positive".into());
        }
        if self.kernel_size == 0 || self.stride == 0 {
            return bad("kernel_size and stride must be positive".into());
        }
        Ok(())
    }
}

impl Default for AgentConfig {
    fn default() -> Self {
        AgentConfig::new(Algorithm::CaDdpg)
    }
}
