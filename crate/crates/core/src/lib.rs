//! Interference alignment feasibility for channels with finite diversity
//! order: channel families, a numerical alignment solver, support-based
//! counting arguments, lifted-system checks, and closed-form bounds.

pub mod bounds;
pub mod channel;
pub mod error;
pub mod io;
pub mod lifted;
pub mod linalg;
pub mod plot;
pub mod rng;
pub mod solver;
pub mod support;
pub mod sweep;

pub use channel::{build_blocks, sample_instance, BuildingBlocks, ChannelFamily, ChannelInstance};
pub use error::{Error, Result};
pub use solver::{solve, verify, BeamformerSet, FeasibilityReport, SolverConfig, Verdict};
