//! Random walks on infinite, locally finite graphs, classified three ways:
//!
//! * **locally** — recurrent or transient, via return probabilities and
//!   electrical-network capacity;
//! * **on the average** — ROA or TOA, via the lower limit of averaged
//!   first-return probabilities under a sequence of probability measures;
//! * **thermodynamically** — ROA_t or TOA_t, via the double limit of the
//!   averaged return generating function (which may fail to exist).
//!
//! The crate provides lazily generated graph families, exact dynamic
//! programming for n-step and first-return probabilities, averaging
//! machinery over measure sequences (balls, increasing covering families,
//! custom weights), minimum-energy flow solves on truncations, and a
//! verdict engine that combines the evidence while enforcing the
//! implication lattice between the classifications.

pub mod avg;
pub mod classify;
pub mod demo;
pub mod electro;
pub mod error;
pub mod graph;
pub mod io;
pub mod kernel;

pub use error::{Error, Result};
pub use graph::{Ball, Family, GraphSpec, LazyGraph, Vertex};
