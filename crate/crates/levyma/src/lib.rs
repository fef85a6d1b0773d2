//! Monte Carlo harness, file formats and command-line interface around
//! [`levyma_core`].

pub mod cli;
pub mod config;
pub mod experiment;
pub mod io;
pub mod scenario;
pub mod stats;
