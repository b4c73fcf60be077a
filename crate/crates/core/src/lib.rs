//! Unsupervised instance matching between RDF datasets.
//!
//! Source instances of a chosen class are labelled through their most
//! informative literal property, looked up in the target by label, and the
//! resulting candidate sets are disambiguated by how much each candidate
//! resembles the candidates of the other sets.

pub mod candidates;
pub mod endpoint;
pub mod eval;
pub mod index;
pub mod model;
pub mod ntriples;
pub mod pipeline;
pub mod profile;
pub mod rds;
pub mod similarity;
pub mod target;

pub use index::Dataset;
pub use model::{Literal, Term, Triple};
pub use pipeline::{run, AlignmentLink, PipelineConfig};
pub use target::TargetStore;
