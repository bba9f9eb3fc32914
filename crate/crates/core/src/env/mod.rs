//! The STAR-RIS-UAV downlink: geometry, channels, rates, action projection
//! and state encoding.

mod action;
mod channel;
mod config;
mod environment;
mod rate;
mod state;

pub use action::{action_dim, project_action, Action, ActionLayout, PhaseProfile, Side};
pub use channel::{corrupt_csi, generate_channels, ChannelSet, ChannelSource, Fading};
pub use config::{
    large_scale_gain, SystemConfig, UavBounds, DEFAULT_NOISE_DBM, DEFAULT_PT_DB,
    DEFAULT_REF_GAIN_DB,
};
pub use environment::{Environment, StepResult};
pub use rate::{effective_channel, sinr, sum_rate, RateReport};
pub use state::{
    desired_amplitudes, encode_state, reference_state_dim, state_dim, Observation,
    StateNormalizer, StateParts,
};
