//! Polysemy detection from raw text.
//!
//! For a target term, the context words found near it are embedded in the
//! plane by classical scaling of their co-occurrence dissimilarities. The
//! angular distribution of that embedding is then fitted with a single-peaked
//! curve; how badly it fits is the term's polysemy index.

pub mod context;
pub mod corpus;
pub mod embedding;
pub mod error;
pub mod pipeline;
pub mod profile;
pub mod synth;
pub mod unimodal;

pub use context::{ContextParams, DistanceMatrix, RelevantSet};
pub use corpus::{CorpusIndex, TermId, Token};
pub use embedding::Embedding2D;
pub use error::{Error, Result};
pub use pipeline::{PipelineConfig, PolysemyReport};
pub use profile::RadialProfile;
pub use unimodal::{CircularFit, MonotoneFit, UnimodalFit};
