//! Random generators and independent reference oracles.
//!
//! The oracles deliberately avoid the algorithms of `sasv`: certain answers
//! come from a bounded chase, query answers from naive backtracking or
//! exhaustive assignment, CTL truth from path-based recursion.

pub mod brute;
pub mod chase;
pub mod ctl;
pub mod gen;
pub mod ground;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

pub fn rng(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
