//! Lipschitz and Wadge games, the reduction strategies and the Banach–Mazur simulator.

pub mod bm;
pub mod engine;
pub mod strategies;
pub mod verify;

pub use bm::{banach_mazur_simulate, Adversary, Ball, BmTarget, BmTrace};
pub use engine::{play, GameConfig, GameKind, GameSet, Move, PlayerI, Strategy, Transcript};
pub use strategies::{builtin_reduction, builtin_strategy, Reduction, StrategyParams, BUILTIN_NAMES};
pub use verify::{catalog_points, verify, verify_reduction, ReductionReport};
