//! Simulator and deep-RL optimizers for a STAR-RIS-equipped UAV relaying a
//! multi-user MISO downlink.
//!
//! The crate is split along the data flow of a training run:
//!
//! - [`numerics`]: dense complex matrices and a seedable random stream.
//! - [`env`]: geometry, Rayleigh channels, SINR and sum rate, action
//!   projection onto the feasible set, and state encoding.
//! - [`nn`]: a small dense/1-D-convolutional network with manual
//!   backpropagation, Adam, gradient checking and checkpoints.
//! - [`agents`]: replay buffer, exploration noise and the DDPG, CA-DDPG and
//!   TD3 learners.
//! - [`harness`]: experiment configuration, baselines, metrics CSV output and
//!   parameter sweeps.

pub mod agents;
pub mod env;
pub mod error;
pub mod harness;
pub mod nn;
pub mod numerics;

pub use error::{Error, Result};
