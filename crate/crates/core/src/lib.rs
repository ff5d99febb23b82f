//! Exact decision engine for dynamic probability logic.

pub mod rational;
pub mod canonical;
pub mod decide;
pub mod generate;
pub mod linarith;
pub mod models;
pub mod proof;
pub mod syntax;

pub use rational::Rational;
pub use syntax::{Formula, PropId};
