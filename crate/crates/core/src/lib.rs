//! Operation programs for math word problems.
//!
//! A program is a sequence of operation calls whose arguments are numbers
//! from the problem text, named constants, or outputs of earlier calls.
//! This crate parses, validates and executes such programs, derives them
//! from worked solutions by search, categorizes problems, matches executed
//! values against multiple-choice options, and provides dataset tooling.

pub mod annotate;
pub mod categorize;
pub mod datakit;
pub mod evalkit;
pub mod opcore;
pub mod textnum;
mod tolerance;

pub use categorize::Category;
pub use tolerance::Tolerance;
