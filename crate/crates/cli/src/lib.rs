//! Command-line front end for the flux-qubit-cantilever library.

pub mod commands;
pub mod config;
pub mod reference;
