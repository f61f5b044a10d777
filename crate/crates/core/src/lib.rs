//! Intrinsic point-of-interest discovery over trajectory exemplars.
//!
//! The pipeline runs in four stages:
//!
//! 1. [`trajectory`] aggregates raw trajectories into exemplars (stay points by default).
//! 2. [`clustertree`] builds the Robust Single Linkage hierarchy over the exemplar
//!    positions and condenses it into a cluster tree indexed by density level `λ = 1/r`.
//! 3. [`stability`] scores every condensed cluster by its relative excess of mass and
//!    selects one cluster per branch so that total stability is maximal.
//! 4. [`eval`] and [`sweep`] compare the resulting flat clustering against a ground truth
//!    and against the [`baselines`].
//!
//! The crate is `no_std` and only needs `alloc`. File formats and the command line
//! live in the companion `poi` crate.
#![no_std]
#![forbid(unsafe_code)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod baselines;
pub mod clustertree;
mod error;
pub mod eval;
pub mod spatial;
pub mod stability;
pub mod sweep;
pub mod synth;
pub mod trajectory;
mod unionfind;

pub use error::{Error, Result};
pub use spatial::PointSet;
pub use stability::FlatClustering;

/// Label reserved for points that belong to no cluster.
pub const NOISE: usize = 0;
