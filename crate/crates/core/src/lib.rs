//! Similarity walks through embedding spaces and mean-squared-displacement
//! analysis of the trajectories they trace.
//!
//! The pieces compose in a line: load an [`EmbeddingSet`], walk it with
//! [`walker`] (or turn a document into sentence vectors with [`document`]),
//! then measure the resulting [`Trajectory`] with [`msd`]. [`synthetic`]
//! supplies trajectories with known answers for checking the analysis.

pub mod document;
pub mod embedding;
pub mod error;
pub mod msd;
pub mod projection;
pub mod rng;
pub mod similarity;
pub mod synthetic;
pub mod walker;

pub use embedding::{EmbeddingSet, TokenRef};
pub use error::{Error, Result};
pub use msd::{MsdCurve, Trajectory};
