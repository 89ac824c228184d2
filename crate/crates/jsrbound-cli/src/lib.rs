//! Support library for the `jsrbound` binary: experiment configuration,
//! seeded validation and sweep harnesses, and the built-in networked-plant
//! demo. Kept as a library so integration tests drive the same code paths
//! as the executable.

pub mod config;
pub mod error;
pub mod harness;
pub mod netctl;
