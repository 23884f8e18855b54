//! Independent oracles shared by the oracle tests and the acceptance suite.

pub mod movegen;
pub mod scoring;
