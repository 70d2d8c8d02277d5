//! Möbius-inversion decompositions of subsystem potentials over poset grids.

pub mod adaptive;
pub mod cost;
pub mod error;
pub mod expansions;
pub mod fragment;
pub mod graph;
pub mod poset;
pub mod potentials;
pub mod sum;
pub mod verify;

pub use error::{Error, Result};
