//! Experiment runner for `metacloud-core`: configs, parallel cloud
//! generation, CSV/SVG/binary outputs and the acceptance suite.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod acceptance;
pub mod config;
pub mod error;
pub mod experiment;
pub mod generate;
pub mod models;
pub mod report;
pub mod svg;

pub use error::{Error, Result};
