//! Dense and 1-D convolutional networks with manual backpropagation, Adam,
//! finite-difference verification and binary checkpoints.

mod adam;
mod arch;
pub mod checkpoint;
pub mod gradcheck;
mod layer;
mod network;

pub use adam::Adam;
pub use arch::{build_actor, build_critic, CriticArch, CriticSpec, FINAL_INIT};
pub use gradcheck::{finite_diff_check, GradCheckReport};
pub use layer::{ConvSpec, Layer};
pub use network::{soft_update, Init, InputGrads, Network, NetworkBuilder, Trace};
