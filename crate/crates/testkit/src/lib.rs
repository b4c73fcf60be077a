//! Test support shared by the rdflink crates.
//!
//! Nothing here depends on `rdflink-core`: fixtures are plain triples and
//! N-Triples text, and the oracle recomputes every score from raw triples
//! so it can be compared against the indexed implementation.

pub mod corpus;
pub mod mock;
pub mod oracle;
pub mod raw;

pub use raw::{Obj, RawTriple};
