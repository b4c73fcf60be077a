//! RDF terms and triples.

use std::fmt;

use thiserror::Error;

pub mod vocab {
    pub const RDF_TYPE: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";
    pub const RDFS_LABEL: &str = "http://www.w3.org/2000/01/rdf-schema#label";
    pub const OWL_SAME_AS: &str = "http://www.w3.org/2002/07/owl#sameAs";
    pub const XSD_STRING: &str = "http://www.w3.org/2001/XMLSchema#string";
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("IRI must not be empty")]
    EmptyIri,
    #[error("blank node label must not be empty")]
    EmptyBlankNode,
    #[error("triple subject must be an IRI or a blank node, got {0}")]
    LiteralSubject(String),
    #[error("triple predicate must be an IRI, got {0}")]
    NonIriPredicate(String),
}

/// A literal value. The constructors guarantee that at most one of
/// datatype and language tag is set.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Literal {
    lexical: String,
    datatype: Option<String>,
    language: Option<String>,
}

impl Literal {
    pub fn simple(lexical: impl Into<String>) -> Self {
        Self { lexical: lexical.into(), datatype: None, language: None }
    }

    pub fn typed(lexical: impl Into<String>, datatype: impl Into<String>) -> Self {
        Self { lexical: lexical.into(), datatype: Some(datatype.into()), language: None }
    }

    pub fn lang(lexical: impl Into<String>, language: impl Into<String>) -> Self {
        Self { lexical: lexical.into(), datatype: None, language: Some(language.into()) }
    }

    pub fn lexical(&self) -> &str {
        &self.lexical
    }

    pub fn datatype(&self) -> Option<&str> {
        self.datatype.as_deref()
    }

    pub fn language(&self) -> Option<&str> {
        self.language.as_deref()
    }
}

/// An RDF term. Ordering is by variant (IRIs first) and then by value,
/// which gives the lexicographic IRI order used for tie-breaking.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Iri(String),
    BlankNode(String),
    Literal(Literal),
}

impl Term {
    pub fn iri(value: impl Into<String>) -> Result<Self, ModelError> {
        let value = value.into();
        if value.is_empty() {
            return Err(ModelError::EmptyIri);
        }
        Ok(Term::Iri(value))
    }

    pub fn blank(label: impl Into<String>) -> Result<Self, ModelError> {
        let label = label.into();
        if label.is_empty() {
            return Err(ModelError::EmptyBlankNode);
        }
        Ok(Term::BlankNode(label))
    }

    pub fn literal(literal: Literal) -> Self {
        Term::Literal(literal)
    }

    pub fn is_iri(&self) -> bool {
        matches!(self, Term::Iri(_))
    }

    pub fn is_literal(&self) -> bool {
        matches!(self, Term::Literal(_))
    }

    pub fn is_blank(&self) -> bool {
        matches!(self, Term::BlankNode(_))
    }

    pub fn as_iri(&self) -> Option<&str> {
        match self {
            Term::Iri(v) => Some(v),
            _ => None,
        }
    }

    pub fn as_literal(&self) -> Option<&Literal> {
        match self {
            Term::Literal(l) => Some(l),
            _ => None,
        }
    }

    /// The string used to compare objects across resources: the lexical
    /// form for literals (datatype and language ignored), the IRI for IRIs
    /// and the label for blank nodes.
    pub fn key(&self) -> &str {
        match self {
            Term::Iri(v) => v,
            Term::BlankNode(v) => v,
            Term::Literal(l) => &l.lexical,
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        crate::ntriples::write_term(f, self)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Triple {
    subject: Term,
    predicate: Term,
    object: Term,
}

impl Triple {
    pub fn new(subject: Term, predicate: Term, object: Term) -> Result<Self, ModelError> {
        if subject.is_literal() {
            return Err(ModelError::LiteralSubject(subject.to_string()));
        }
        if !predicate.is_iri() {
            return Err(ModelError::NonIriPredicate(predicate.to_string()));
        }
        Ok(Self { subject, predicate, object })
    }

    pub fn subject(&self) -> &Term {
        &self.subject
    }

    pub fn predicate(&self) -> &Term {
        &self.predicate
    }

    pub fn object(&self) -> &Term {
        &self.object
    }

    pub fn into_parts(self) -> (Term, Term, Term) {
        (self.subject, self.predicate, self.object)
    }
}

impl fmt::Display for Triple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {} .", self.subject, self.predicate, self.object)
    }
}
