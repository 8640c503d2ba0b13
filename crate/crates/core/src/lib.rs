//! Cop vs. gambler pursuit on connected graphs.
//!
//! A cop walks the graph; the gambler draws his position afresh each step
//! from a fixed distribution. This crate builds the cop strategies, computes
//! expected capture times exactly, solves for optimal play against a known
//! gamble, and simulates plays reproducibly.

pub mod capture;
pub mod experiment;
pub mod gamble;
pub mod generate;
pub mod graph;
pub mod rational;
pub mod sim;
pub mod solver;
pub mod strategies;

pub use capture::{
    expected_capture_meta, expected_capture_randomized, expected_capture_time, survival_probability, Expectation,
    RandomizedStrategy, Tail, Walk,
};
pub use gamble::{Gamble, MetaGamble};
pub use graph::{Graph, RootedTree};
pub use rational::Rational;
