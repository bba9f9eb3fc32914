use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::nn::checkpoint::{read_network, write_network};
use crate::nn::{build_actor, build_critic, soft_update, Adam, Network};
use crate::numerics::RngStream;
use crate::{Error, Result};

use super::config::{AgentConfig, Algorithm};
use super::learner::{actor_update, critic_target, critic_update, Smoothing};
use super::noise::NoiseSchedule;
use super::replay::{ReplayBuffer, Transition};

const AGENT_MAGIC: &[u8; 4] = b"SRAG";

/// Statistics of one learning update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UpdateStats {
    /// Mean critic loss over the critics, before their step.
    pub critic_loss: f64,
    /// Mean value of the actor's actions, when the actor was updated.
    pub actor_value: Option<f64>,
}

/// Actor-critic learner with target networks and replay memory.
#[derive(Debug, Clone)]
pub struct Agent {
    cfg: AgentConfig,
    actor: Network,
    actor_target: Network,
    actor_opt: Adam,
    critics: Vec<Network>,
    critic_targets: Vec<Network>,
    critic_opts: Vec<Adam>,
    buffer: ReplayBuffer,
    noise: NoiseSchedule,
    explore_rng: RngStream,
    sample_rng: RngStream,
    smooth_rng: RngStream,
    updates: u64,
}

impl Agent {
    pub fn new(state_dim: usize, action_dim: usize, cfg: AgentConfig, rng: &RngStream) -> Result<Self> {
        cfg.validate()?;
        let mut init = rng.derive(10);
        let actor = build_actor(state_dim, action_dim, &cfg.actor_hidden, &mut init);
        let spec = cfg.critic_spec();
        let critics = (0..cfg.algorithm.critic_count())
            .map(|_| build_critic(state_dim, action_dim, &spec, &mut init))
            .collect::<Result<Vec<_>>>()?;
        let critic_opts = critics
            .iter()
            .map(|c| Adam::new(c.param_count(), cfg.critic_lr, cfg.critic_decay))
            .collect();
        Ok(Agent {
            actor_target: actor.clone(),
            actor_opt: Adam::new(actor.param_count(), cfg.actor_lr, cfg.actor_decay),
            actor,
            critic_targets: critics.clone(),
            critics,
            critic_opts,
            buffer: ReplayBuffer::new(cfg.buffer_capacity),
            noise: NoiseSchedule::new(cfg.eta0, cfg.eta_horizon),
            explore_rng: rng.derive(11),
            sample_rng: rng.derive(12),
            smooth_rng: rng.derive(13),
            updates: 0,
            cfg,
        })
    }

    pub fn config(&self) -> &AgentConfig {
        &self.cfg
    }

    pub fn algorithm(&self) -> Algorithm {
        self.cfg.algorithm
    }

    pub fn actor(&self) -> &Network {
        &self.actor
    }

    pub fn actor_target(&self) -> &Network {
        &self.actor_target
    }

    pub fn critics(&self) -> &[Network] {
        &self.critics
    }

    pub fn critic_targets(&self) -> &[Network] {
        &self.critic_targets
    }

    pub fn buffer(&self) -> &ReplayBuffer {
        &self.buffer
    }

    pub fn updates(&self) -> u64 {
        self.updates
    }

    /// Exploration scale the next call to [`Agent::explore`] will use.
    pub fn eta(&self) -> f64 {
        self.noise.eta()
    }

    pub fn critic_lr(&self) -> f64 {
        self.critic_opts[0].effective_lr()
    }

    /// Deterministic policy output for a normalized state.
    pub fn act(&self, state: &[f64]) -> Vec<f64> {
        self.actor.forward(state, &[])
    }

    /// Policy output plus exploration noise; advances the noise schedule.
    pub fn explore(&mut self, state: &[f64]) -> Vec<f64> {
        let a = self.act(state);
        self.noise.explore(&a, &mut self.explore_rng)
    }

    pub fn remember(&mut self, t: Transition) {
        self.buffer.push(t);
    }

    pub fn is_warm(&self) -> bool {
        self.buffer.len() >= self.cfg.warmup_len()
    }

    /// One learning update, or `None` during warm-up.
    pub fn update(&mut self) -> Option<UpdateStats> {
        if !self.is_warm() {
            return None;
        }
        let idx = self.buffer.sample_indices(self.cfg.batch_size, &mut self.sample_rng)?;
        let batch: Vec<&Transition> = idx.iter().map(|&i| self.buffer.get(i).unwrap()).collect();
        let smoothing = (self.cfg.algorithm == Algorithm::Td3).then(|| Smoothing {
            sigma: self.cfg.target_noise,
            clip: self.cfg.target_noise_clip,
            rng: &mut self.smooth_rng,
        });
        let y = critic_target(&batch, &self.actor_target, &self.critic_targets, self.cfg.discount, smoothing);
        let mut loss = 0.0;
        for (critic, opt) in self.critics.iter_mut().zip(&mut self.critic_opts) {
            loss += critic_update(critic, opt, &batch, &y);
        }
        loss /= self.critics.len() as f64;
        self.updates += 1;

        let delay = if self.cfg.algorithm == Algorithm::Td3 {
            self.cfg.policy_delay as u64
        } else {
            1
        };
        let mut actor_value = None;
        if self.updates % delay == 0 {
            actor_value = Some(actor_update(&mut self.actor, &mut self.actor_opt, &self.critics[0], &batch));
            if (self.updates / delay) % self.cfg.sync_period as u64 == 0 {
                let tau = self.cfg.tau;
                soft_update(&mut self.actor_target, &self.actor, tau);
                for (t, c) in self.critic_targets.iter_mut().zip(&self.critics) {
                    soft_update(t, c, tau);
                }
            }
        }
        Some(UpdateStats {
            critic_loss: loss,
            actor_value,
        })
    }

    fn networks(&self) -> Vec<&Network> {
        let mut v = vec![&self.actor, &self.actor_target];
        for (c, t) in self.critics.iter().zip(&self.critic_targets) {
            v.push(c);
            v.push(t);
        }
        v
    }

    /// Writes actor, target actor and every critic/target pair.
    ///
    /// Layout (little-endian): `b"SRAG"`, network count `u32`, then each
    /// network in the `nn` checkpoint format.
    pub fn write_checkpoint<W: Write>(&self, w: &mut W) -> Result<()> {
        let nets = self.networks();
        w.write_all(AGENT_MAGIC)
            .and_then(|_| w.write_all(&(nets.len() as u32).to_le_bytes()))
            .map_err(|e| Error::Checkpoint(e.to_string()))?;
        for n in nets {
            write_network(w, n)?;
        }
        Ok(())
    }

    /// Restores network parameters; architectures must match this agent.
    pub fn read_checkpoint<R: Read>(&mut self, r: &mut R) -> Result<()> {
        let mut head = [0u8; 8];
        r.read_exact(&mut head).map_err(|e| Error::Checkpoint(e.to_string()))?;
        if &head[..4] != AGENT_MAGIC {
            return Err(Error::Checkpoint("not an agent checkpoint".into()));
        }
        let count = u32::from_le_bytes(head[4..].try_into().unwrap()) as usize;
        let expected = self.networks().len();
        if count != expected {
            return Err(Error::Checkpoint(format!("{count} networks stored, agent has {expected}")));
        }
        let mut loaded = Vec::with_capacity(count);
        for current in self.networks() {
            let net = read_network(r)?;
            if net.layers() != current.layers() || net.side_len() != current.side_len() {
                return Err(Error::Checkpoint("stored architecture differs from the agent".into()));
            }
            loaded.push(net);
        }
        let mut it = loaded.into_iter();
        self.actor = it.next().unwrap();
        self.actor_target = it.next().unwrap();
        for (c, t) in self.critics.iter_mut().zip(self.critic_targets.iter_mut()) {
            *c = it.next().unwrap();
            *t = it.next().unwrap();
        }
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        self.write_checkpoint(&mut w)?;
        w.flush().map_err(|e| Error::io(path, e))
    }

    pub fn load(&mut self, path: &Path) -> Result<()> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        self.read_checkpoint(&mut BufReader::new(file))
    }
}
