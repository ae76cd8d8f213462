//! Exact measures, density verdicts and Wadge-style set constructions on Cantor space.

pub mod error;
pub mod cli;
pub mod games;
pub mod measure;
pub mod rational;
pub mod reductions;
pub mod schedule;
pub mod sets;
pub mod word;

pub use error::{Error, Result};
pub use rational::{MeasureInterval, Q};
pub use sets::expr::{Expr, SetExpr};
pub use word::{Lasso, Word};
