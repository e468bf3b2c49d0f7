pub mod belief;
pub mod cli;
pub mod data;
pub mod error;
pub mod eval;
pub mod logit;
pub mod mass;
pub mod pipeline;
pub mod search;
pub mod woe;

pub use belief::{combine, combine_all, BeliefInterval, CombinationReport, Frame, MassFunction, OutcomeSet};
pub use error::{Error, Result};
