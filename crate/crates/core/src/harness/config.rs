use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::agents::{AgentConfig, Algorithm};
use crate::env::SystemConfig;
use crate::numerics::{db_to_linear, dbm_to_watts};
use crate::{Error, Result};

/// What drives the actions of an experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Learner(Algorithm),
    /// Uniform raw actions, no learning.
    Random,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Method::Learner(a) => a.fmt(f),
            Method::Random => f.write_str("random"),
        }
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.trim().eq_ignore_ascii_case("random") {
            Ok(Method::Random)
        } else {
            s.parse().map(Method::Learner)
        }
    }
}

/// A full experiment: scenario, learner, run lengths, seeds and output.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub system: SystemConfig,
    pub agent: AgentConfig,
    pub method: Method,
    /// Overrides the algorithm's default exploration scale.
    pub eta0: Option<f64>,
    /// Overrides the default decay constant of a quarter episode.
    pub eta_horizon: Option<f64>,
    pub episodes: u64,
    pub steps: u64,
    pub seeds: Vec<u64>,
    /// CSI uncertainty of the observations.
    pub delta: f64,
    pub output: PathBuf,
    /// Record wall-clock time per step; makes CSV output run-dependent.
    pub timing: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            system: SystemConfig::default(),
            agent: AgentConfig::new(Algorithm::CaDdpg),
            method: Method::Learner(Algorithm::CaDdpg),
            eta0: None,
            eta_horizon: None,
            episodes: 1,
            steps: 80_000,
            seeds: vec![0],
            delta: 0.0,
            output: PathBuf::from("results"),
            timing: false,
        }
    }
}

/// Keys accepted by [`ExperimentConfig::set`].
pub const KEYS: &[&str] = &[
    "M", "N", "K", "Pt_dB", "noise_dBm", "bs_x", "bs_y", "bs_height", "uav_height", "uav_x0",
    "uav_y0", "uav_x_min", "uav_x_max", "uav_y_min", "uav_y_max", "reflect_users",
    "transmit_users", "ref_gain_dB", "pathloss_exp_bs_ris", "pathloss_exp_ris_user", "algo",
    "lambda", "tau", "lr", "actor_lr", "critic_lr", "decay", "actor_decay", "critic_decay",
    "batch_size", "sync_period", "buffer_size", "warmup", "eta0", "eta_horizon", "policy_delay",
    "target_noise", "target_noise_clip", "actor_hidden", "critic_conv_channels", "critic_hidden",
    "kernel_size", "padding", "stride", "episodes", "steps", "seeds", "delta", "output", "timing",
];

fn num<T: FromStr>(v: &str) -> std::result::Result<T, String> {
    v.trim().parse().map_err(|_| format!("cannot parse `{}`", v.trim()))
}

fn list<T: FromStr>(v: &str) -> std::result::Result<Vec<T>, String> {
    v.split(',').filter(|s| !s.trim().is_empty()).map(num).collect()
}

fn points(v: &str) -> std::result::Result<Vec<[f64; 2]>, String> {
    v.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|p| {
            let (x, y) = p.split_once(':').ok_or_else(|| format!("expected x:y, got `{}`", p.trim()))?;
            Ok([num(x)?, num(y)?])
        })
        .collect()
}

fn flag(v: &str) -> std::result::Result<bool, String> {
    match v.trim().to_ascii_lowercase().as_str() {
        "1" | "true" | "yes" | "on" => Ok(true),
        "0" | "false" | "no" | "off" => Ok(false),
        other => Err(format!("expected a boolean, got `{other}`")),
    }
}

impl ExperimentConfig {
    /// Assigns one key. Unknown keys and unparsable values are rejected.
    pub fn set(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        let canonical = KEYS
            .iter()
            .find(|k| k.eq_ignore_ascii_case(key.trim()))
            .ok_or_else(|| "unknown key".to_string())?;
        let s = &mut self.system;
        let a = &mut self.agent;
        match *canonical {
            "M" => s.antennas = num(value)?,
            "N" => s.elements = num(value)?,
            "K" => s.users = num(value)?,
            "Pt_dB" => s.max_power = db_to_linear(num(value)?),
            "noise_dBm" => s.noise_power = dbm_to_watts(num(value)?),
            "bs_x" => s.bs_xy[0] = num(value)?,
            "bs_y" => s.bs_xy[1] = num(value)?,
            "bs_height" => s.bs_height = num(value)?,
            "uav_height" => s.uav_height = num(value)?,
            "uav_x0" => s.uav_start[0] = num(value)?,
            "uav_y0" => s.uav_start[1] = num(value)?,
            "uav_x_min" => s.uav_bounds.x_min = num(value)?,
            "uav_x_max" => s.uav_bounds.x_max = num(value)?,
            "uav_y_min" => s.uav_bounds.y_min = num(value)?,
            "uav_y_max" => s.uav_bounds.y_max = num(value)?,
            "reflect_users" => s.reflect_users = points(value)?,
            "transmit_users" => s.transmit_users = points(value)?,
            "ref_gain_dB" => s.ref_gain = db_to_linear(num(value)?),
            "pathloss_exp_bs_ris" => s.exponent_bs_ris = num(value)?,
            "pathloss_exp_ris_user" => s.exponent_ris_user = num(value)?,
            "algo" => {
                self.method = value.parse().map_err(|e: Error| e.to_string())?;
                if let Method::Learner(alg) = self.method {
                    a.algorithm = alg;
                }
            }
            "lambda" => a.discount = num(value)?,
            "tau" => a.tau = num(value)?,
            "lr" => {
                a.actor_lr = num(value)?;
                a.critic_lr = a.actor_lr;
            }
            "actor_lr" => a.actor_lr = num(value)?,
            "critic_lr" => a.critic_lr = num(value)?,
            "decay" => {
                a.actor_decay = num(value)?;
                a.critic_decay = a.actor_decay;
            }
            "actor_decay" => a.actor_decay = num(value)?,
            "critic_decay" => a.critic_decay = num(value)?,
            "batch_size" => a.batch_size = num(value)?,
            "sync_period" => a.sync_period = num(value)?,
            "buffer_size" => a.buffer_capacity = num(value)?,
            "warmup" => a.warmup = Some(num(value)?),
            "eta0" => self.eta0 = Some(num(value)?),
            "eta_horizon" => self.eta_horizon = Some(num(value)?),
            "policy_delay" => a.policy_delay = num(value)?,
            "target_noise" => a.target_noise = num(value)?,
            "target_noise_clip" => a.target_noise_clip = num(value)?,
            "actor_hidden" => a.actor_hidden = list(value)?,
            "critic_conv_channels" => a.critic_conv_channels = list(value)?,
            "critic_hidden" => a.critic_hidden = list(value)?,
            "kernel_size" => a.kernel_size = num(value)?,
            "padding" => a.padding = num(value)?,
            "stride" => a.stride = num(value)?,
            "episodes" => self.episodes = num(value)?,
            "steps" => self.steps = num(value)?,
            "seeds" => self.seeds = list(value)?,
            "delta" => self.delta = num(value)?,
            "output" => self.output = PathBuf::from(value.trim()),
            "timing" => self.timing = flag(value)?,
            _ => unreachable!("key table and match arms disagree"),
        }
        Ok(())
    }

    /// Learner hyperparameters with algorithm-dependent defaults resolved.
    pub fn agent_config(&self) -> AgentConfig {
        let mut a = self.agent.clone();
        if let Method::Learner(alg) = self.method {
            a.algorithm = alg;
        }
        a.eta0 = self.eta0.unwrap_or(a.algorithm.default_eta0());
        a.eta_horizon = self.eta_horizon.unwrap_or(self.steps as f64 / 4.0);
        a
    }

    /// Replicates a single user position to `K` users when the user count
    /// changed, then checks every invariant.
    pub fn finalize(&mut self) -> Result<()> {
        let k = self.system.users;
        for users in [&mut self.system.reflect_users, &mut self.system.transmit_users] {
            if users.len() != k && !users.is_empty() && users.iter().all(|u| *u == users[0]) {
                let first = users[0];
                *users = vec![first; k];
            }
        }
        self.validate()
    }

    pub fn validate(&self) -> Result<()> {
        self.system.validate()?;
        self.agent_config().validate()?;
        if !(0.0..1.0).contains(&self.delta) {
            return Err(Error::Config(format!("delta must lie in [0, 1), got {}", self.delta)));
        }
        if self.episodes == 0 || self.steps == 0 {
            return Err(Error::Config("episodes and steps must be at least 1".into()));
        }
        if self.seeds.is_empty() {
            return Err(Error::Config("at least one seed is required".into()));
        }
        Ok(())
    }

    /// Parses `key = value` lines over the defaults. `origin` names the
    /// source in diagnostics.
    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let mut cfg = ExperimentConfig::default();
        cfg.apply_text(text, origin)?;
        cfg.finalize().map_err(|e| Error::Config(format!("{origin}: {e}")))?;
        Ok(cfg)
    }

    /// Applies `key = value` lines without finalizing.
    pub fn apply_text(&mut self, text: &str, origin: &str) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let diag = |key: &str, msg: String| Error::ConfigLine {
                path: origin.to_string(),
                line: i + 1,
                key: key.to_string(),
                msg,
            };
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| diag(line, "expected `key = value`".into()))?;
            let key = key.trim();
            self.set(key, value).map_err(|msg| diag(key, msg))?;
            self.check_key(key).map_err(|e| diag(key, e.to_string()))?;
        }
        Ok(())
    }

    /// Range checks tied to one key, so diagnostics can name the line.
    fn check_key(&self, key: &str) -> Result<()> {
        let a = self.agent_config();
        match key.to_ascii_lowercase().as_str() {
            "lambda" | "tau" | "lr" | "actor_lr" | "critic_lr" | "decay" | "actor_decay"
            | "critic_decay" | "batch_size" | "sync_period" | "policy_delay" | "eta0"
            | "eta_horizon" | "target_noise" | "target_noise_clip" | "kernel_size" | "stride" => {
                // buffer/warm-up consistency is checked once the whole file is read
                let mut probe = a;
                probe.buffer_capacity = probe.buffer_capacity.max(probe.warmup_len());
                probe.validate()
            }
            "delta" if !(0.0..1.0).contains(&self.delta) => {
                Err(Error::Config(format!("must lie in [0, 1), got {}", self.delta)))
            }
            "pt_db" | "noise_dbm" | "ref_gain_db" => {
                let s = &self.system;
                if s.max_power.is_finite() && s.noise_power.is_finite() && s.ref_gain.is_finite() {
                    Ok(())
                } else {
                    Err(Error::Config("value out of range".into()))
                }
            }
            _ => Ok(()),
        }
    }
}

/// Reads an experiment file over the defaults.
pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let text = String::from_utf8(bytes).map_err(|_| Error::Config(format!("{}: not UTF-8", path.display())))?;
    ExperimentConfig::parse(&text, &path.display().to_string())
}
