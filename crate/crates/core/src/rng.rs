//! Per-trial random streams.
//!
//! Every trial draws from ChaCha8 streams keyed by the experiment seed
//! and addressed by `(salt, trial)` through the cipher's 64-bit stream id, so
//! the numbers a trial sees never depend on which worker ran it or in what
//! order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream family for the main configuration of a trial.
pub const SALT_CONFIG: u32 = 0;
/// Stream family for the left half of a two-sided configuration.
pub const SALT_LEFT: u32 = 1;
/// Stream family for the site at the origin of a two-sided configuration.
pub const SALT_CENTER: u32 = 2;
/// Stream family for auxiliary draws, such as the cut points of invariant checks.
pub const SALT_AUX: u32 = 3;

/// Returns the generator for `trial` within stream family `salt`.
pub fn trial_stream(seed: u64, salt: u32, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (u64::from(salt) << 56).rotate_left(3));
    rng.set_stream(trial);
    rng
}
