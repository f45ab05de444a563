//! Companion crate of `gtl-core`: JSON file formats, synthetic data generators, parallel
//! evaluation helpers and the `gtl` command-line tool.

pub mod datagen;
pub mod io;
pub mod par;
