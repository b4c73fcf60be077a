//! A local SPARQL endpoint over an in-memory store.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::thread::{self, JoinHandle};

use oxigraph::io::RdfFormat;
use oxigraph::sparql::results::{QueryResultsFormat, QueryResultsSerializer};
use oxigraph::sparql::{QueryResults, SparqlEvaluator};
use oxigraph::store::Store;
use tiny_http::{Header, Method, Response, Server};

pub struct MockSparql {
    url: String,
    server: Arc<Server>,
    state: Arc<State>,
    worker: Option<JoinHandle<()>>,
}

struct State {
    store: Store,
    requests: AtomicUsize,
    fail_next: AtomicUsize,
    queries: Mutex<Vec<String>>,
}

impl MockSparql {
    /// Serves the given N-Triples document at `http://127.0.0.1:<port>/sparql`.
    pub fn start(ntriples: &str) -> Self {
        let store = Store::new().expect("in-memory store");
        store.load_from_reader(RdfFormat::NTriples, ntriples.as_bytes()).expect("fixture must be valid N-Triples");
        let server = Arc::new(Server::http("127.0.0.1:0").expect("bind mock server"));
        let port = server.server_addr().to_ip().expect("ip listener").port();
        let state = Arc::new(State {
            store,
            requests: AtomicUsize::new(0),
            fail_next: AtomicUsize::new(0),
            queries: Mutex::new(Vec::new()),
        });
        let worker = {
            let server = server.clone();
            let state = state.clone();
            thread::spawn(move || {
                for request in server.incoming_requests() {
                    handle(&state, request);
                }
            })
        };
        Self { url: format!("http://127.0.0.1:{port}/sparql"), server, state, worker: Some(worker) }
    }

    pub fn url(&self) -> &str {
        &self.url
    }

    pub fn request_count(&self) -> usize {
        self.state.requests.load(Ordering::SeqCst)
    }

    /// The next `n` requests are answered with HTTP 503.
    pub fn fail_next(&self, n: usize) {
        self.state.fail_next.store(n, Ordering::SeqCst);
    }

    /// Query strings received so far, failed ones included.
    pub fn queries(&self) -> Vec<String> {
        self.state.queries.lock().unwrap().clone()
    }
}

impl Drop for MockSparql {
    fn drop(&mut self) {
        self.server.unblock();
        if let Some(w) = self.worker.take() {
            let _ = w.join();
        }
    }
}

fn extract_query(request: &mut tiny_http::Request) -> Option<String> {
    let find = |encoded: &str| {
        url::form_urlencoded::parse(encoded.as_bytes()).find(|(k, _)| k == "query").map(|(_, v)| v.into_owned())
    };
    match request.method() {
        Method::Get => request.url().split_once('?').and_then(|(_, q)| find(q)),
        Method::Post => {
            let mut body = String::new();
            request.as_reader().read_to_string(&mut body).ok()?;
            find(&body)
        }
        _ => None,
    }
}

fn handle(state: &State, mut request: tiny_http::Request) {
    state.requests.fetch_add(1, Ordering::SeqCst);
    let query = extract_query(&mut request);
    if let Some(q) = &query {
        state.queries.lock().unwrap().push(q.clone());
    }
    let failing = state.fail_next.fetch_update(Ordering::SeqCst, Ordering::SeqCst, |n| n.checked_sub(1)).is_ok();
    let response = if failing {
        Response::from_string("unavailable").with_status_code(503)
    } else {
        match query.map(|q| evaluate(&state.store, &q)) {
            Some(Ok(body)) => Response::from_data(body).with_header(
                Header::from_bytes("Content-Type", "application/sparql-results+json").expect("static header"),
            ),
            Some(Err(e)) => Response::from_string(e).with_status_code(400),
            None => Response::from_string("missing query").with_status_code(400),
        }
    };
    let _ = request.respond(response);
}

fn evaluate(store: &Store, query: &str) -> Result<Vec<u8>, String> {
    let prepared = SparqlEvaluator::new().parse_query(query).map_err(|e| e.to_string())?;
    let results = prepared.on_store(store).execute().map_err(|e| e.to_string())?;
    let QueryResults::Solutions(solutions) = results else {
        return Err("only SELECT is supported".into());
    };
    let serializer = QueryResultsSerializer::from_format(QueryResultsFormat::Json);
    let mut writer = serializer
        .serialize_solutions_to_writer(Vec::new(), solutions.variables().to_vec())
        .map_err(|e| e.to_string())?;
    for solution in solutions {
        let solution = solution.map_err(|e| e.to_string())?;
        writer.serialize(&solution).map_err(|e| e.to_string())?;
    }
    writer.finish().map_err(|e| e.to_string())
}
