//! Experiment tooling around the `pbil-core` simulation and calculators:
//! seeded trial grids with CSV persistence, per-cell summaries, scaling
//! fits, margin-failure probes, SVG plots, and the `pbil` command-line
//! front end.

pub mod cli;
pub mod csvio;
pub mod failure;
pub mod fit;
pub mod plot;
pub mod stats;
pub mod sweep;
