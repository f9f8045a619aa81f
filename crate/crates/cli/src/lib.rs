//! Library surface of the `gridflow` command-line front end: the run
//! configuration and the on-disk model bundle. The binary in `main.rs` wires
//! these to the engine crate.

pub mod config;
pub mod model;
