//! Instance segmentation from pixel-pair affinity pyramids.
//!
//! The crate covers everything after the network: synthetic scenes and
//! simulated predictions, ground-truth affinity pyramids, multicut graph
//! partitioning (greedy contraction plus an exhaustive oracle), the
//! coarse-to-fine cascade with super-node contraction, semantic refinement of
//! the final partition, and AP / PQ evaluation.

pub mod affinity;
pub mod bench;
pub mod cascade;
pub mod config;
pub mod error;
pub mod eval;
pub mod grid;
pub mod instances;
pub mod io;
pub mod morphology;
pub mod partition;
pub mod pipeline;
pub mod refine;
pub mod render;
pub mod rng;
pub mod synth;
pub mod tensor;

pub use error::{Error, Result};
