use std::collections::BTreeSet;
use std::time::Duration;

use rdflink_core::endpoint::{EndpointConfig, EndpointError, SparqlEndpoint};
use rdflink_core::ntriples::{parse_ntriples_str, Mode};
use rdflink_core::pipeline::{run, PipelineConfig};
use rdflink_core::profile::{build_target_profile, ProfileOptions};
use rdflink_core::target::{TargetError, TargetStore};
use rdflink_core::{Dataset, Term, Triple};
use rdflink_testkit::corpus::{countries, synthetic};
use rdflink_testkit::mock::MockSparql;

fn load(text: &str) -> Dataset {
    Dataset::load(parse_ntriples_str(text, Mode::Strict).unwrap().triples)
}

fn client(mock: &MockSparql) -> SparqlEndpoint {
    let mut config = EndpointConfig::new(mock.url());
    config.backoff = Duration::from_millis(5);
    config.page_size = 37;
    SparqlEndpoint::with_token(config, None).unwrap()
}

#[test]
fn search_and_describe_agree_with_the_local_index() {
    let corpus = synthetic(3, 60);
    let text = corpus.target_nt();
    let local = load(&text);
    let mock = MockSparql::start(&text);
    let remote = client(&mock);

    let profile = build_target_profile(&local, &ProfileOptions::default()).unwrap();
    let predicates = profile.predicates();
    assert!(!predicates.is_empty());
    let mut queries: Vec<String> =
        corpus.source_labels("http://source.example/name").into_iter().map(|(_, l)| l).collect();
    queries.extend(["no such label".to_owned(), "Kalo-mi!".to_owned()]);
    for q in &queries {
        for cap in [500, 2] {
            let want = local.search_literals(q, &predicates, cap);
            let got = remote.remote_search_literals(q, &predicates, cap).unwrap();
            assert_eq!(got, want, "query {q:?} cap {cap}");
        }
    }

    let subjects: Vec<Term> = local.subjects().cloned().collect();
    let mut got: Vec<Triple> = remote.remote_describe(&subjects).unwrap();
    got.sort();
    let mut want: Vec<Triple> = local.triples().to_vec();
    want.sort();
    assert_eq!(got, want);

    let unknown = Term::iri("http://nowhere.example/x").unwrap();
    assert!(remote.remote_describe(std::slice::from_ref(&unknown)).unwrap().is_empty());
    let d = TargetStore::describe(&remote, std::slice::from_ref(&unknown)).unwrap();
    assert_eq!(d.len(), 1);
    assert!(d[0].statements.is_empty());
}

#[test]
fn describe_batches_at_most_fifty_subjects() {
    let corpus = synthetic(4, 60);
    let text = corpus.target_nt();
    let local = load(&text);
    let mock = MockSparql::start(&text);
    let remote = client(&mock);
    let subjects: Vec<Term> = local.subjects().take(120).cloned().collect();
    assert_eq!(subjects.len(), 120);
    let before = mock.request_count();
    remote.remote_describe(&subjects).unwrap();
    assert!(mock.request_count() - before >= 3);
}

#[test]
fn retries_after_a_503() {
    let mock = MockSparql::start(&countries().target_nt());
    let remote = client(&mock);
    mock.fail_next(1);
    let rows = remote.select("SELECT ?s WHERE { ?s ?p ?o } LIMIT 3").unwrap();
    assert_eq!(rows.len(), 3);
    assert_eq!(mock.request_count(), 2);

    mock.fail_next(10);
    match remote.select("SELECT ?s WHERE { ?s ?p ?o } LIMIT 3") {
        Err(EndpointError::Http { status: 503 }) => {}
        other => panic!("expected HTTP 503, got {other:?}"),
    }
    // one attempt plus three retries
    assert_eq!(mock.request_count(), 6);
}

#[test]
fn long_queries_are_posted() {
    let mock = MockSparql::start(&countries().target_nt());
    let remote = client(&mock);
    let padding = "# ".to_owned() + &"x".repeat(3000);
    let rows = remote.select(&format!("{padding}\nSELECT ?s WHERE {{ ?s ?p ?o }} LIMIT 2")).unwrap();
    assert_eq!(rows.len(), 2);
}

#[test]
fn remote_profile_of_a_single_label_predicate() {
    let text = "<http://t/a> <http://t/label> \"Alpha\" .\n\
                <http://t/b> <http://t/label> \"Beta\" .\n\
                <http://t/c> <http://t/label> \"Gamma\" .\n\
                <http://t/a> <http://t/next> <http://t/b> .\n";
    let mock = MockSparql::start(text);
    let remote = client(&mock);
    let profile = remote.remote_profile(200, 100, 1).unwrap();
    assert_eq!(profile.len(), 1);
    assert_eq!(profile.ranked[0].predicate, Term::iri("http://t/label").unwrap());
    assert!((profile.ranked[0].entropy - 3f64.log2()).abs() < 1e-9);

    let empty = MockSparql::start("<http://t/a> <http://t/next> <http://t/b> .\n");
    match client(&empty).remote_profile(200, 100, 1) {
        Err(TargetError::Endpoint(EndpointError::EmptyTarget)) => {}
        other => panic!("expected EmptyTarget, got {other:?}"),
    }
}

#[test]
fn sampled_remote_profile_is_deterministic() {
    let corpus = synthetic(9, 80);
    let mock = MockSparql::start(&corpus.target_nt());
    let remote = client(&mock);
    let a = remote.remote_profile(200, 20, 42).unwrap();
    let b = remote.remote_profile(200, 20, 42).unwrap();
    assert_eq!(a, b);
}

#[test]
fn pipeline_over_the_endpoint_matches_local_run() {
    let corpus = countries();
    let source = load(&corpus.source_nt());
    let local = load(&corpus.target_nt());
    let mock = MockSparql::start(&corpus.target_nt());
    let remote = client(&mock);
    let config = PipelineConfig::new(Term::iri(&corpus.class).unwrap());
    let a = run(&source, &local, &config).unwrap();
    let b = run(&source, &remote, &config).unwrap();
    assert_eq!(a.links, b.links);
    let linked: BTreeSet<(String, String)> =
        b.links.iter().map(|l| (l.source.key().to_owned(), l.target.key().to_owned())).collect();
    assert_eq!(linked, corpus.gold.iter().cloned().collect());
}
