use crate::numerics::RngStream;
use crate::Result;

use super::{
    corrupt_csi, encode_state, project_action, sum_rate, Action, ChannelSet, ChannelSource,
    Fading, Observation, RateReport, SystemConfig,
};

/// Outcome of executing one action.
#[derive(Debug, Clone)]
pub struct StepResult {
    pub next_obs: Observation,
    /// Sum rate of the executed action on the true channels, bit/s/Hz.
    pub reward: f64,
    /// Sum rate of the executed action as the BS evaluates it on its channel
    /// estimate. Equals `reward` under perfect CSI.
    pub estimated_reward: f64,
    pub rates: RateReport,
    pub action: Action,
}

/// The downlink environment.
///
/// Small-scale fading is drawn at [`Environment::reset`] and held for the
/// episode; the large-scale gains follow the executed UAV position. With a
/// nonzero CSI uncertainty the BS only sees a fresh channel estimate each
/// step: the observation and the estimated reward are built from it, while
/// the reported reward is the rate actually delivered on the true channels.
#[derive(Debug, Clone)]
pub struct Environment {
    cfg: SystemConfig,
    csi_delta: f64,
    fading_rng: RngStream,
    csi_rng: RngStream,
    init_rng: RngStream,
    fading: Fading,
    prev: Action,
    obs: Observation,
}

impl Environment {
    pub fn new(cfg: SystemConfig, csi_delta: f64, rng: &RngStream) -> Result<Self> {
        cfg.validate()?;
        if !(0.0..1.0).contains(&csi_delta) {
            return Err(crate::Error::Config(format!(
                "CSI uncertainty must lie in [0, 1), got {csi_delta}"
            )));
        }
        let mut fading_rng = rng.derive(1);
        let csi_rng = rng.derive(2);
        let mut init_rng = rng.derive(3);
        let fading = Fading::draw(&cfg, &mut fading_rng)?;
        let prev = Action::random_initial(&cfg, &mut init_rng)?;
        let obs = encode_state(&prev, &fading.channels_at(&cfg, prev.uav_xy))?;
        let mut env = Environment {
            cfg,
            csi_delta,
            fading_rng,
            csi_rng,
            init_rng,
            fading,
            prev,
            obs,
        };
        env.obs = env.observe()?;
        Ok(env)
    }

    pub fn config(&self) -> &SystemConfig {
        &self.cfg
    }

    pub fn csi_delta(&self) -> f64 {
        self.csi_delta
    }

    pub fn fading(&self) -> &Fading {
        &self.fading
    }

    pub fn observation(&self) -> &Observation {
        &self.obs
    }

    pub fn last_action(&self) -> &Action {
        &self.prev
    }

    /// True channels at the current UAV position.
    pub fn channels(&self) -> ChannelSet {
        self.fading.channels_at(&self.cfg, self.prev.uav_xy)
    }

    /// Starts a new episode: new fading draw and a fresh initial action.
    pub fn reset(&mut self) -> Result<Observation> {
        self.fading = Fading::draw(&self.cfg, &mut self.fading_rng)?;
        self.prev = Action::random_initial(&self.cfg, &mut self.init_rng)?;
        self.obs = self.observe()?;
        Ok(self.obs.clone())
    }

    fn observe(&mut self) -> Result<Observation> {
        let truth = self.channels();
        let seen = corrupt_csi(&truth, self.csi_delta, &mut self.csi_rng)?;
        encode_state(&self.prev, &seen)
    }

    /// Projects and executes `raw`, returning the sum-rate reward and the
    /// next observation.
    pub fn step(&mut self, raw: &[f64]) -> Result<StepResult> {
        let action = project_action(raw, &self.cfg)?;
        let truth = self.fading.channels_at(&self.cfg, action.uav_xy);
        let (reward, rates) = sum_rate(&truth, &action, self.cfg.noise_power)?;
        self.prev = action.clone();
        self.obs = self.observe()?;
        let estimated_reward = if self.csi_delta == 0.0 {
            reward
        } else {
            sum_rate(&self.obs.parts.channels, &action, self.cfg.noise_power)?.0
        };
        Ok(StepResult {
            next_obs: self.obs.clone(),
            reward,
            estimated_reward,
            rates,
            action,
        })
    }
}
