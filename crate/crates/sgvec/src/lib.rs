//! Whole-graph vector representations of signed networks.
//!
//! Three method families produce one fixed-size vector per graph:
//!
//! - `embed`: Weisfeiler-Lehman relabeling (unsigned and two signed
//!   variants) feeding a PV-DBOW embedding over rooted-subgraph labels.
//! - `wsgcn`: signed graph convolution with dual positive/negative
//!   hidden states, extended with master nodes for whole-graph readout.
//! - `sine`: a triad-based vertex embedding baseline aggregated by sum
//!   or average.
//!
//! `eval` provides a stratified cross-validation harness with a linear
//! max-margin classifier, `data` collection persistence and a planted
//! partition generator, and the `sgvec` binary ties it all together.

pub mod balance;
pub mod data;
pub mod embed;
pub mod error;
pub mod eval;
pub mod graph;
mod opt;
pub mod seeds;
pub mod sine;
pub mod wl;
pub mod wsgcn;

pub use error::{Result, SgError};
