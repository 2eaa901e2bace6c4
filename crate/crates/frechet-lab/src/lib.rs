//! Experiment driver and file formats around `frechet-core`.
//!
//! The core crate computes; this crate runs batches and talks to the file
//! system: structured-text density and experiment configs, JSON/CSV result
//! emission, static SVG plots, a worker pool over replicates, and the
//! built-in verification suites behind the `frechet-lab verify` subcommand.
//! Everything here is deliberately thin — each piece parses or formats and
//! then delegates to the core crate, so the scientific behaviour has exactly
//! one implementation.

pub mod formats;
pub mod plots;
pub mod runner;
pub mod verify;
