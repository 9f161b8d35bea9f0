//! Concrete simulator-contract implementations: a synthetic geological lobe
//! simulator and a tiny discrete simulator whose posterior is exactly
//! enumerable.

pub mod lobe;
pub mod oracle;
pub mod welllog;

pub use lobe::{EmissionSegment, LobeConfig, LobeParams, LobeSimulator, LobeState, SyntheticTruth};
pub use oracle::{enumerate_posterior, DiscreteOracle, OracleData, PosteriorTable};
pub use welllog::{PorositySample, WellLog, WellLogSet};
