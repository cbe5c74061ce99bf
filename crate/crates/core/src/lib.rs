//! Lattice random interlacements, Gaussian fields and renormalized
//! intersection local times: samplers, exact moment oracles and the
//! symbolic identities that tie them together.

pub mod continuum;
pub mod field;
pub mod lattice;
pub mod oracle;
pub mod quad;
pub mod rng;
pub mod sim;
pub mod stats;
pub mod acceptance;
pub mod algebra;
pub mod poly;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
