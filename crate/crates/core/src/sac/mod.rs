//! Soft Actor-Critic on small dense networks.
//!
//! Gradients are computed by hand: every network records its layer inputs
//! on a tape during the forward pass and [`DenseNet::backward`] walks it in
//! reverse. Training runs in `f32`; everything is generic over [`Real`] so
//! gradient checks can run in `f64`.

mod agent;
mod net;
mod policy;
mod replay;
mod train;

pub use agent::{Sac, SacAgent, SacConfig, UpdateStats};
pub use net::{Adam, DenseNet, Real, Tape};
pub use policy::{
    action_log_prob, squashed_log_prob, GaussianPolicy, PolicySample, LOG_STD_MAX, LOG_STD_MIN, SQUASH_EPS,
};
pub use replay::{Batch, ReplayBuffer};
pub use train::{train, Environment, TrainReport, Transition};
