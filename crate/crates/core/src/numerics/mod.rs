//! Scalar and matrix kernels shared by the policies and environments.

mod kl;
mod linalg;
mod rate;
mod sampling;

pub use kl::{bernoulli_kl, klucb_index, KLUCB_MAX_ITERATIONS};
pub use linalg::{cholesky, Matrix, PIVOT_TOLERANCE};
pub use rate::ExplorationRate;
pub use sampling::{beta_sample, standard_normal, stream_rng, uniform, SimRng};
