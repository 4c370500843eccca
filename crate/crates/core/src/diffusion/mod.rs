//! Group-level engagement analytics: interaction CCDFs, partisanship,
//! sentiment breakdowns and population extrapolation.

pub mod ccdf;
pub mod extrapolate;
pub mod faction;
pub mod volume;

pub use ccdf::*;
pub use extrapolate::*;
pub use faction::*;
pub use volume::*;

#[derive(Debug, thiserror::Error)]
pub enum DiffusionError {
    #[error("empty input")]
    EmptyInput,
    #[error("values must be finite and non-negative")]
    InvalidValue,
    #[error("no activity stratum has labelled sample users")]
    InsufficientStrata,
    #[error("{0}")]
    Config(String),
}
