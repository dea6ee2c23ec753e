//! Combinatorial semi-bandit simulation.
//!
//! Thompson-sampling policies (Beta and Gaussian priors, clipped and
//! correlated variants) and UCB baselines over structured action spaces,
//! with exact linear-maximization oracles and a seeded, parallel regret
//! harness.

pub mod environments;
pub mod error;
pub mod harness;
pub mod model;
pub mod numerics;
pub mod oracles;
pub mod policies;

pub use error::{CmabError, Result};
pub use model::{
    linear_reward, update_counters, Action, BanditInstance, CounterState, MeanVector, RegretTrace,
};
pub use oracles::{ActionSpace, Sense};
