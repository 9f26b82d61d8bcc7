//! Reduced-order thermal model of a hybrid liquid/PCM battery module.

pub mod cli;
pub mod config;
pub mod control;
pub mod error;
pub mod heatgen;
pub mod materials;
pub mod metrics;
pub mod network;
pub mod presets;
pub mod solver;
