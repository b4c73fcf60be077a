use std::collections::BTreeSet;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rdflink_core::model::{Literal, Term, Triple};
use rdflink_core::ntriples::{parse_ntriples_str, to_ntriples_string, Mode, ParseError};

const TRICKY: &[&str] = &[
    "plain",
    "with \"quotes\"",
    "back\\slash",
    "line\nbreak",
    "tab\there",
    "carriage\rreturn",
    "São Paulo",
    "日本語",
    "emoji 🦀",
    "",
    "trailing space ",
];

fn random_term(rng: &mut ChaCha8Rng, allow_literal: bool) -> Term {
    match rng.random_range(0..if allow_literal { 6 } else { 2 }) {
        0 => Term::iri(format!("http://ex.org/r/{}", rng.random_range(0..5000))).unwrap(),
        1 => Term::blank(format!("b{}", rng.random_range(0..300))).unwrap(),
        2 => Term::literal(Literal::simple(*TRICKY.choose(rng).unwrap())),
        3 => Term::literal(Literal::typed(
            rng.random_range(-1000..1000).to_string(),
            "http://www.w3.org/2001/XMLSchema#integer",
        )),
        4 => Term::literal(Literal::lang(*TRICKY.choose(rng).unwrap(), *["en", "pt-BR", "ja"].choose(rng).unwrap())),
        _ => Term::iri(format!("urn:x-test:{}#frag", rng.random_range(0..100))).unwrap(),
    }
}

fn corpus(n: usize) -> Vec<Triple> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    (0..n)
        .map(|_| {
            let s = random_term(&mut rng, false);
            let p = Term::iri(format!("http://ex.org/p/{}", rng.random_range(0..40))).unwrap();
            let o = random_term(&mut rng, true);
            Triple::new(s, p, o).unwrap()
        })
        .collect()
}

#[test]
fn round_trip_of_ten_thousand_triples() {
    let triples = corpus(12_000);
    let text = to_ntriples_string(&triples);
    let parsed = parse_ntriples_str(&text, Mode::Strict).unwrap();
    assert!(parsed.skipped.is_empty());
    assert_eq!(parsed.triples, triples);
    assert_eq!(to_ntriples_string(&parsed.triples), text);
}

const CORRUPTIONS: &[&str] = &[
    "<http://ex.org/a> <http://ex.org/p> <http://ex.org/b>",
    "<http://ex.org/a> <http://ex.org/p> \"unterminated .",
    "<relative> <http://ex.org/p> <http://ex.org/b> .",
    "\"literal\" <http://ex.org/p> <http://ex.org/b> .",
    "<http://ex.org/a> _:b1 <http://ex.org/b> .",
    "<http://ex.org/a> <http://ex.org/p> \"x\"@ .",
    "garbage",
];

#[test]
fn lenient_mode_skips_exactly_the_corrupted_lines() {
    let triples = corpus(10_000);
    let mut lines: Vec<String> = to_ntriples_string(&triples).lines().map(str::to_owned).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut corrupted = BTreeSet::new();
    while corrupted.len() < 57 {
        corrupted.insert(rng.random_range(0..lines.len()));
    }
    for &i in &corrupted {
        lines[i] = CORRUPTIONS.choose(&mut rng).unwrap().to_string();
    }
    let text = lines.join("\n");

    let parsed = parse_ntriples_str(&text, Mode::Lenient).unwrap();
    let skipped: BTreeSet<usize> = parsed.skipped.iter().map(|s| s.line - 1).collect();
    assert_eq!(skipped, corrupted);
    let expected: Vec<Triple> =
        triples.iter().enumerate().filter(|(i, _)| !corrupted.contains(i)).map(|(_, t)| t.clone()).collect();
    assert_eq!(parsed.triples, expected);

    let first = *corrupted.first().unwrap() + 1;
    match parse_ntriples_str(&text, Mode::Strict) {
        Err(ParseError::MalformedLine { line, .. }) => assert_eq!(line, first),
        other => panic!("strict parse should fail at line {first}, got {other:?}"),
    }
}
