//! Credal-set uncertainty quantification for open-ended text generation.
//!
//! Populations of continuations (human-written, or sampled from a model under
//! one decoding configuration) are summarised per prompt as a diversity vector
//! `[semantic, lexical, syntactic]`. The convex hull of those vectors in a
//! shared standardized PCA space is the population's credal set. Model credal
//! sets are then scored against the human one (overlap, centroid distance,
//! volume ratio, Hausdorff distance, per-dimension Wasserstein distance), and
//! each model's variation is split into a between-strategy (epistemic) and a
//! within-strategy (aleatoric) part.
//!
//! The crate is organised by pipeline stage:
//!
//! - [`corpus`]: ingest, MD5 deduplication, length filtering, prompt selection
//! - [`features`]: vocabulary sets, POS bigram sets, embedding sidecars
//! - [`diversity`]: the three pairwise diversity metrics
//! - [`geometry`]: standardization, PCA, Quickhull, Hausdorff, overlap
//! - [`calibration`]: per-configuration reports, Wasserstein, ranking
//! - [`decomposition`]: epistemic/aleatoric variance split
//! - [`stats`]: Spearman, Mann-Whitney, t-test, ANOVA and special functions
//! - [`pipeline`]: end-to-end orchestration and artifact emission
//!
//! See the `examples/` directory for one runnable program per capability.

pub mod calibration;
pub mod corpus;
pub mod decomposition;
pub mod diversity;
mod error;
mod io;
pub mod features;
pub mod geometry;
pub mod pipeline;
pub mod stats;
pub mod synthetic;

pub use error::{Error, Result};

/// Tool version stamped into every artifact.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
