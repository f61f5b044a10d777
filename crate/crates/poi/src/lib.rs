//! File formats and command-line front end for `poi-core`.
//!
//! [`io`] reads and writes every on-disk artifact: trajectory and exemplar CSV,
//! `point_index,label` files, condensed tree and stability JSON, scene specifications,
//! and sweep reports. [`cli`] wires them to the clustering pipeline.

pub mod cli;
mod error;
pub mod io;

pub use error::{PoiError, Result};
