//! Where target descriptions come from: a local dataset or a SPARQL endpoint.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::endpoint::EndpointError;
use crate::index::{Dataset, Description, LiteralHit};
use crate::model::Term;
use crate::profile::{self, LabelProfile, ProfileError, ProfileOptions};

#[derive(Debug, Error)]
pub enum TargetError {
    #[error(transparent)]
    Endpoint(#[from] EndpointError),
    #[error(transparent)]
    Profile(#[from] ProfileError),
}

/// The operations the matcher needs from the target dataset.
pub trait TargetStore: Sync {
    fn search_literals(
        &self,
        query: &str,
        predicates: &BTreeSet<Term>,
        pool_cap: usize,
    ) -> Result<Vec<LiteralHit>, TargetError>;

    /// One description per subject, in the order given.
    fn describe(&self, subjects: &[Term]) -> Result<Vec<Description>, TargetError>;

    fn label_profile(&self, opts: &ProfileOptions) -> Result<LabelProfile, TargetError>;

    /// Human-readable location, echoed into run manifests.
    fn location(&self) -> String;
}

impl TargetStore for Dataset {
    fn search_literals(
        &self,
        query: &str,
        predicates: &BTreeSet<Term>,
        pool_cap: usize,
    ) -> Result<Vec<LiteralHit>, TargetError> {
        Ok(Dataset::search_literals(self, query, predicates, pool_cap))
    }

    fn describe(&self, subjects: &[Term]) -> Result<Vec<Description>, TargetError> {
        Ok(self.df(subjects))
    }

    fn label_profile(&self, opts: &ProfileOptions) -> Result<LabelProfile, TargetError> {
        Ok(profile::build_target_profile(self, opts)?)
    }

    fn location(&self) -> String {
        format!("in-memory dataset ({} triples)", self.len())
    }
}
