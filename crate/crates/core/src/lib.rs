//! Planar deformable-linear-object following benchmark.
//!
//! The crate is layered bottom-up:
//!
//! * [`rope`]: position-based dynamics for an anchored particle chain.
//! * [`gripper`]: two-finger gripper whose closure scales the inverse mass of
//!   the particles it holds.
//! * [`perception`]: tactile, visual and kinematic observations distilled
//!   from simulator state, plus the masked observation vector.
//! * [`env`]: the finite-horizon MDP with randomization, reward, termination,
//!   outcome classification and trajectory dumps.
//! * [`sac`]: dense networks with hand-written reverse-mode gradients and a
//!   Soft Actor-Critic learner.
//! * [`harness`]: evaluation, multi-seed studies, aggregation and export.
//!
//! Data-parallel loops go through [`parallel::Execution`]; with the
//! `parallel` feature disabled every path runs sequentially.

pub mod env;
pub mod error;
pub mod geom;
pub mod gripper;
pub mod harness;
pub mod parallel;
pub mod perception;
pub mod rope;
pub mod sac;

pub use error::{Error, Result};
pub use geom::Vec2;
