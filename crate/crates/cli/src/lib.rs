//! Library surface of the dirac-edge command-line driver: configuration
//! parsing and the experiment catalogue with its run loop. The binary in
//! `main.rs` is a thin clap wrapper around these.

pub mod config;
pub mod experiments;
