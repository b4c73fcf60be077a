//! SPARQL protocol client for remote target datasets.
//!
//! Only `SELECT` queries are issued and results are read in the
//! `application/sparql-results+json` encoding. Every generated query is
//! logged at debug level.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Condvar, Mutex};
use std::thread;
use std::time::Duration;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;
use thiserror::Error;

use crate::index::{cap_pool, tokenize, Description, LiteralHit};
use crate::model::{Literal, Term, Triple};
use crate::profile::{profile_observations, LabelProfile, Observations, ProfileOptions};
use crate::target::{TargetError, TargetStore};

/// Environment variable holding an optional bearer token.
pub const TOKEN_ENV: &str = "RDFLINK_ENDPOINT_TOKEN";
/// Maximum number of subjects per describe request.
pub const DESCRIBE_BATCH: usize = 50;

const RESULTS_JSON: &str = "application/sparql-results+json";
const MAX_GET_QUERY_LEN: usize = 2000;

#[derive(Debug, Error)]
pub enum EndpointError {
    #[error("endpoint answered HTTP {status}")]
    Http { status: u16 },
    #[error("request timed out")]
    Timeout,
    #[error("malformed SPARQL results: {0}")]
    MalformedResults(String),
    #[error("transport error: {0}")]
    Transport(String),
    #[error("target endpoint exposes no literal-valued predicates")]
    EmptyTarget,
    #[error("invalid endpoint configuration: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone)]
pub struct EndpointConfig {
    pub base_url: String,
    pub timeout: Duration,
    pub max_retries: u32,
    /// Rows per request.
    pub page_size: usize,
    pub max_in_flight: usize,
    /// First retry delay; doubles on every further attempt.
    pub backoff: Duration,
    /// A literal search stops paging once this many distinct subjects
    /// have been seen.
    pub scan_cap: usize,
}

impl EndpointConfig {
    pub fn new(base_url: impl Into<String>) -> Self {
        Self {
            base_url: base_url.into(),
            timeout: Duration::from_secs(60),
            max_retries: 3,
            page_size: 1000,
            max_in_flight: 4,
            backoff: Duration::from_millis(250),
            scan_cap: 10_000,
        }
    }

    pub fn validate(&self) -> Result<(), EndpointError> {
        if !(self.base_url.starts_with("http://") || self.base_url.starts_with("https://")) {
            return Err(EndpointError::InvalidConfig(format!("{} is not an HTTP(S) URL", self.base_url)));
        }
        if self.page_size == 0 {
            return Err(EndpointError::InvalidConfig("page size must be at least 1".into()));
        }
        if self.max_in_flight == 0 {
            return Err(EndpointError::InvalidConfig("at least one request must be allowed in flight".into()));
        }
        Ok(())
    }
}

/// Counting semaphore capping concurrent requests.
struct Permits {
    free: Mutex<usize>,
    cv: Condvar,
}

impl Permits {
    fn new(n: usize) -> Self {
        Self { free: Mutex::new(n), cv: Condvar::new() }
    }

    fn acquire(&self) -> PermitGuard<'_> {
        let mut free = self.free.lock().expect("permit lock");
        while *free == 0 {
            free = self.cv.wait(free).expect("permit lock");
        }
        *free -= 1;
        PermitGuard(self)
    }
}

struct PermitGuard<'a>(&'a Permits);

impl Drop for PermitGuard<'_> {
    fn drop(&mut self) {
        *self.0.free.lock().expect("permit lock") += 1;
        self.0.cv.notify_one();
    }
}

pub struct SparqlEndpoint {
    config: EndpointConfig,
    client: reqwest::blocking::Client,
    token: Option<String>,
    permits: Permits,
    requests: AtomicUsize,
}

impl std::fmt::Debug for SparqlEndpoint {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SparqlEndpoint").field("config", &self.config).finish_non_exhaustive()
    }
}

/// One solution of a `SELECT` query.
pub type Binding = HashMap<String, Term>;

impl SparqlEndpoint {
    /// Reads the bearer token from [`TOKEN_ENV`] when set.
    pub fn new(config: EndpointConfig) -> Result<Self, EndpointError> {
        let token = std::env::var(TOKEN_ENV).ok().filter(|t| !t.is_empty());
        Self::with_token(config, token)
    }

    pub fn with_token(config: EndpointConfig, token: Option<String>) -> Result<Self, EndpointError> {
        config.validate()?;
        let client = reqwest::blocking::Client::builder()
            .timeout(config.timeout)
            .user_agent(concat!("rdflink/", env!("CARGO_PKG_VERSION")))
            .build()
            .map_err(|e| EndpointError::Transport(e.to_string()))?;
        let permits = Permits::new(config.max_in_flight);
        Ok(Self { config, client, token, permits, requests: AtomicUsize::new(0) })
    }

    pub fn config(&self) -> &EndpointConfig {
        &self.config
    }

    /// HTTP requests issued so far, retries included.
    pub fn request_count(&self) -> usize {
        self.requests.load(Ordering::Relaxed)
    }

    /// Runs a `SELECT` query, retrying failures with exponential backoff.
    pub fn select(&self, query: &str) -> Result<Vec<Binding>, EndpointError> {
        log::debug!("sparql query: {query}");
        let mut attempt = 0;
        loop {
            match self.select_once(query) {
                Ok(rows) => return Ok(rows),
                Err(e) if attempt < self.config.max_retries => {
                    let delay = self.config.backoff * 2u32.saturating_pow(attempt);
                    log::warn!("sparql request failed ({e}), retry {} in {delay:?}", attempt + 1);
                    thread::sleep(delay);
                    attempt += 1;
                }
                Err(e) => return Err(e),
            }
        }
    }

    fn select_once(&self, query: &str) -> Result<Vec<Binding>, EndpointError> {
        let _permit = self.permits.acquire();
        self.requests.fetch_add(1, Ordering::Relaxed);
        let request = if query.len() <= MAX_GET_QUERY_LEN {
            self.client.get(&self.config.base_url).query(&[("query", query)])
        } else {
            self.client.post(&self.config.base_url).form(&[("query", query)])
        };
        let request = match &self.token {
            Some(t) => request.bearer_auth(t),
            None => request,
        };
        let response = request.header(reqwest::header::ACCEPT, RESULTS_JSON).send().map_err(|e| {
            if e.is_timeout() {
                EndpointError::Timeout
            } else {
                EndpointError::Transport(e.to_string())
            }
        })?;
        let status = response.status();
        if !status.is_success() {
            return Err(EndpointError::Http { status: status.as_u16() });
        }
        let body = response.text().map_err(|e| {
            if e.is_timeout() {
                EndpointError::Timeout
            } else {
                EndpointError::Transport(e.to_string())
            }
        })?;
        parse_select_results(&body)
    }

    /// Runs `query` page by page (`LIMIT`/`OFFSET` appended) until a short
    /// page arrives or `keep_going` returns false.
    fn select_paged<F>(&self, query: &str, mut keep_going: F) -> Result<Vec<Binding>, EndpointError>
    where
        F: FnMut(&[Binding]) -> bool,
    {
        let page = self.config.page_size;
        let mut all = Vec::new();
        let mut offset = 0;
        loop {
            let rows = self.select(&format!("{query}\nLIMIT {page} OFFSET {offset}"))?;
            let n = rows.len();
            all.extend(rows);
            if n < page || !keep_going(&all) {
                return Ok(all);
            }
            offset += page;
        }
    }

    /// Literal search with the same matching rule as the local index: the
    /// endpoint pre-filters by token containment, the client keeps exact
    /// token overlaps and applies the pool cap.
    pub fn remote_search_literals(
        &self,
        query_label: &str,
        predicates: &BTreeSet<Term>,
        pool_cap: usize,
    ) -> Result<Vec<LiteralHit>, EndpointError> {
        let tokens: BTreeSet<String> = tokenize(query_label).into_iter().collect();
        let predicates: Vec<&str> = predicates.iter().filter_map(Term::as_iri).collect();
        if tokens.is_empty() || predicates.is_empty() {
            return Ok(Vec::new());
        }
        let query = search_query(&tokens, &predicates);
        let scan_cap = self.config.scan_cap.max(pool_cap);
        let rows = self.select_paged(&query, |rows| {
            rows.iter().filter_map(|b| b.get("s")).collect::<BTreeSet<_>>().len() < scan_cap
        })?;
        let mut hits = Vec::new();
        for b in rows {
            let (Some(s), Some(p), Some(Term::Literal(o))) = (b.get("s"), b.get("p"), b.get("o")) else {
                return Err(EndpointError::MalformedResults("search row lacks ?s ?p ?o".into()));
            };
            let shared = tokenize(o.lexical()).into_iter().collect::<BTreeSet<_>>().intersection(&tokens).count();
            if shared > 0 {
                let hit = LiteralHit { subject: s.clone(), predicate: p.clone(), literal: o.lexical().to_owned() };
                hits.push((hit, shared));
            }
        }
        Ok(cap_pool(hits, pool_cap))
    }

    /// All outgoing triples of the given IRIs, fetched in batches of at
    /// most [`DESCRIBE_BATCH`] subjects.
    pub fn remote_describe(&self, subjects: &[Term]) -> Result<Vec<Triple>, EndpointError> {
        let iris: Vec<&str> = subjects.iter().filter_map(Term::as_iri).collect::<BTreeSet<_>>().into_iter().collect();
        let mut triples = Vec::new();
        for batch in iris.chunks(DESCRIBE_BATCH) {
            let rows = self.select_paged(&describe_query(batch), |_| true)?;
            for b in rows {
                let (Some(s), Some(p), Some(o)) = (b.get("s"), b.get("p"), b.get("o")) else {
                    return Err(EndpointError::MalformedResults("describe row lacks ?s ?p ?o".into()));
                };
                let t = Triple::new(s.clone(), p.clone(), o.clone())
                    .map_err(|e| EndpointError::MalformedResults(e.to_string()))?;
                triples.push(t);
            }
        }
        Ok(triples)
    }

    /// Profiles the endpoint's literal predicates. Predicates with more
    /// than `sample_cap` literal triples are profiled on a window of
    /// `sample_cap` rows at an offset drawn from `seed`.
    pub fn remote_profile(&self, max_len: usize, sample_cap: usize, seed: u64) -> Result<LabelProfile, TargetError> {
        let counts = self.select_paged(&predicate_census_query(), |_| true)?;
        let mut census: Vec<(Term, usize)> = Vec::new();
        for b in counts {
            let (Some(p), Some(n)) = (b.get("p"), b.get("n")) else {
                return Err(EndpointError::MalformedResults("census row lacks ?p ?n".into()).into());
            };
            let n: usize = n
                .key()
                .parse()
                .map_err(|_| EndpointError::MalformedResults(format!("count {:?} is not a number", n.key())))?;
            census.push((p.clone(), n));
        }
        census.sort();
        if census.is_empty() {
            return Err(EndpointError::EmptyTarget.into());
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut obs: Observations = BTreeMap::new();
        for (p, n) in census {
            let Some(iri) = p.as_iri() else { continue };
            let window = n.min(sample_cap.max(1));
            let offset = if n > window { rng.random_range(0..=n - window) } else { 0 };
            let mut values = Vec::with_capacity(window);
            let mut fetched = 0;
            while fetched < window {
                let limit = (window - fetched).min(self.config.page_size);
                let q = format!("{}\nLIMIT {limit} OFFSET {}", sample_query(iri), offset + fetched);
                let rows = self.select(&q)?;
                if rows.is_empty() {
                    break;
                }
                fetched += rows.len();
                for b in rows {
                    let (Some(s), Some(Term::Literal(o))) = (b.get("s"), b.get("o")) else {
                        return Err(EndpointError::MalformedResults("sample row lacks ?s ?o".into()).into());
                    };
                    values.push((s.clone(), o.lexical().to_owned()));
                }
            }
            obs.insert(p, values);
        }
        Ok(profile_observations(&obs, max_len)?)
    }
}

impl TargetStore for SparqlEndpoint {
    fn search_literals(
        &self,
        query: &str,
        predicates: &BTreeSet<Term>,
        pool_cap: usize,
    ) -> Result<Vec<LiteralHit>, TargetError> {
        Ok(self.remote_search_literals(query, predicates, pool_cap)?)
    }

    fn describe(&self, subjects: &[Term]) -> Result<Vec<Description>, TargetError> {
        let triples = self.remote_describe(subjects)?;
        let mut by_subject: HashMap<Term, Vec<(Term, Term)>> = HashMap::new();
        for t in triples {
            let (s, p, o) = t.into_parts();
            by_subject.entry(s).or_default().push((p, o));
        }
        Ok(subjects
            .iter()
            .map(|s| Description { subject: s.clone(), statements: by_subject.get(s).cloned().unwrap_or_default() })
            .collect())
    }

    fn label_profile(&self, opts: &ProfileOptions) -> Result<LabelProfile, TargetError> {
        let cap = opts.sample_cap.unwrap_or(usize::MAX);
        self.remote_profile(opts.max_len, cap, opts.seed)
    }

    fn location(&self) -> String {
        self.config.base_url.clone()
    }
}

fn iri_ref(iri: &str) -> String {
    // IRIs from parsed data never contain '>' or spaces; escape anyway
    let mut s = String::with_capacity(iri.len() + 2);
    s.push('<');
    for c in iri.chars() {
        match c {
            '<' | '>' | '"' | '{' | '}' | '|' | '^' | '`' | '\\' => s.push_str(&format!("\\u{:04X}", c as u32)),
            c if c <= ' ' => s.push_str(&format!("\\u{:04X}", c as u32)),
            c => s.push(c),
        }
    }
    s.push('>');
    s
}

fn string_literal(value: &str) -> String {
    let mut s = String::with_capacity(value.len() + 2);
    s.push('"');
    for c in value.chars() {
        match c {
            '"' => s.push_str("\\\""),
            '\\' => s.push_str("\\\\"),
            '\n' => s.push_str("\\n"),
            '\r' => s.push_str("\\r"),
            c => s.push(c),
        }
    }
    s.push('"');
    s
}

pub(crate) fn search_query(tokens: &BTreeSet<String>, predicates: &[&str]) -> String {
    let values: Vec<String> = predicates.iter().map(|p| iri_ref(p)).collect();
    let filters: Vec<String> = tokens.iter().map(|t| format!("CONTAINS(?norm, {})", string_literal(t))).collect();
    format!(
        "SELECT ?s ?p ?o WHERE {{\n  VALUES ?p {{ {} }}\n  ?s ?p ?o .\n  FILTER(isLiteral(?o))\n  \
         BIND(REPLACE(LCASE(STR(?o)), \"[^\\\\p{{L}}\\\\p{{N}}\\\\s]\", \"\") AS ?norm)\n  FILTER({})\n}}\nORDER BY ?s ?p ?o",
        values.join(" "),
        filters.join(" || ")
    )
}

pub(crate) fn describe_query(subjects: &[&str]) -> String {
    let values: Vec<String> = subjects.iter().map(|s| iri_ref(s)).collect();
    format!("SELECT ?s ?p ?o WHERE {{\n  VALUES ?s {{ {} }}\n  ?s ?p ?o .\n}}\nORDER BY ?s ?p ?o", values.join(" "))
}

pub(crate) fn predicate_census_query() -> String {
    "SELECT ?p (COUNT(*) AS ?n) WHERE {\n  ?s ?p ?o .\n  FILTER(isLiteral(?o))\n}\nGROUP BY ?p\nORDER BY ?p".to_owned()
}

pub(crate) fn sample_query(predicate: &str) -> String {
    format!("SELECT ?s ?o WHERE {{\n  ?s {} ?o .\n  FILTER(isLiteral(?o))\n}}\nORDER BY ?s ?o", iri_ref(predicate))
}

#[derive(Deserialize)]
struct ResultsDocument {
    results: ResultsBody,
}

#[derive(Deserialize)]
struct ResultsBody {
    bindings: Vec<HashMap<String, JsonTerm>>,
}

#[derive(Deserialize)]
#[serde(tag = "type")]
enum JsonTerm {
    #[serde(rename = "uri")]
    Uri { value: String },
    #[serde(rename = "literal", alias = "typed-literal")]
    Literal {
        value: String,
        #[serde(rename = "xml:lang")]
        lang: Option<String>,
        datatype: Option<String>,
    },
    #[serde(rename = "bnode")]
    BlankNode { value: String },
}

impl TryFrom<JsonTerm> for Term {
    type Error = EndpointError;

    fn try_from(t: JsonTerm) -> Result<Self, Self::Error> {
        let malformed = |e: crate::model::ModelError| EndpointError::MalformedResults(e.to_string());
        match t {
            JsonTerm::Uri { value } => Term::iri(value).map_err(malformed),
            JsonTerm::BlankNode { value } => Term::blank(value).map_err(malformed),
            JsonTerm::Literal { value, lang: Some(lang), .. } => Ok(Term::literal(Literal::lang(value, lang))),
            JsonTerm::Literal { value, datatype: Some(dt), .. } => Ok(Term::literal(Literal::typed(value, dt))),
            JsonTerm::Literal { value, .. } => Ok(Term::literal(Literal::simple(value))),
        }
    }
}

/// Parses a SPARQL JSON results document into bindings.
pub fn parse_select_results(body: &str) -> Result<Vec<Binding>, EndpointError> {
    let doc: ResultsDocument =
        serde_json::from_str(body).map_err(|e| EndpointError::MalformedResults(e.to_string()))?;
    doc.results
        .bindings
        .into_iter()
        .map(|row| row.into_iter().map(|(k, v)| Term::try_from(v).map(|t| (k, t))).collect())
        .collect()
}
