//! Replay memory, exploration noise and the actor-critic learners.

mod agent;
mod config;
pub mod learner;
mod noise;
mod replay;
mod train;

pub use agent::{Agent, UpdateStats};
pub use config::{AgentConfig, Algorithm};
pub use noise::{perturb, NoiseSchedule};
pub use replay::{ReplayBuffer, Transition};
pub use train::{train, train_collect, StepRecord};
