//! Named random streams.
//!
//! Every seed used by a trial or a sweep is derived from its parent seed by
//! hashing a canonical field list: the fields are joined with `/`, hashed with
//! SHA-256, and the first eight digest bytes are read as a little-endian u64.

use sha2::{Digest, Sha256};

pub fn derive_seed(fields: &[&str]) -> u64 {
    let digest = Sha256::digest(fields.join("/").as_bytes());
    u64::from_le_bytes(digest[..8].try_into().unwrap())
}

/// Seed of the solver stream of a trial.
pub fn solver_seed(trial_seed: u64) -> u64 {
    derive_seed(&[&trial_seed.to_string(), "solver"])
}

/// Seed of one agent's private solver stream (naive strategy).
pub fn agent_solver_seed(trial_seed: u64, agent: u32) -> u64 {
    derive_seed(&[&trial_seed.to_string(), "solver", &agent.to_string()])
}
