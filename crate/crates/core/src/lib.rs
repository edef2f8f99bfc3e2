//! Modularity metrics (fan-in, fan-out, Jaccard similarity, LCOM, CBO) over a
//! language-neutral facts model, computed sequentially or by a data-parallel
//! engine, and move-method suggestions that improve both the origin and the
//! destination class.
//!
//! The pipeline is: [`ingest`] reads or generates a system, [`metrics`] and
//! [`parallel`] evaluate it, and [`proponent`] proposes moves.

pub mod canonical;
pub mod cli;
pub mod error;
pub mod ingest;
pub mod metrics;
pub mod model;
pub mod parallel;
pub mod proponent;

pub use error::{ConfigError, IngestError, ModelError};
pub use metrics::{MetricsReport, SimilarityEntry, WorkloadEstimate};
pub use model::{AttrId, ClassId, ClassRecord, DependencyTable, MethodId, SystemModel};
