//! Generated source/target dataset pairs with known gold alignments.

use std::collections::BTreeSet;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::raw::{to_ntriples, RawTriple, RDF_TYPE};

pub const SRC: &str = "http://source.example/";
pub const TGT: &str = "http://target.example/resource/";
pub const ONT: &str = "http://target.example/ontology/";
pub const RDFS_LABEL: &str = "http://www.w3.org/2000/01/rdf-schema#label";

#[derive(Debug, Clone)]
pub struct Corpus {
    pub source: Vec<RawTriple>,
    pub target: Vec<RawTriple>,
    /// Class of interest in the source.
    pub class: String,
    pub gold: Vec<(String, String)>,
}

impl Corpus {
    pub fn source_nt(&self) -> String {
        to_ntriples(&self.source)
    }

    pub fn target_nt(&self) -> String {
        to_ntriples(&self.target)
    }

    /// Source label of every instance of the class, keyed by subject.
    pub fn source_labels(&self, label_predicate: &str) -> Vec<(String, String)> {
        let mut out: Vec<(String, String)> = self
            .source
            .iter()
            .filter(|t| t.p == label_predicate)
            .map(|t| (t.s.clone(), t.o.key().to_owned()))
            .collect();
        out.sort();
        out
    }
}

fn ont(local: &str) -> String {
    format!("{ONT}{local}")
}

fn tgt(local: &str) -> String {
    format!("{TGT}{local}")
}

struct Builder {
    triples: Vec<RawTriple>,
}

impl Builder {
    fn new() -> Self {
        Self { triples: Vec::new() }
    }

    fn typed(&mut self, s: &str, class: &str) {
        self.triples.push(RawTriple::iri(s, RDF_TYPE, &ont(class)));
    }

    fn label(&mut self, s: &str, label: &str) {
        self.triples.push(RawTriple::lit(s, RDFS_LABEL, label));
    }

    fn link(&mut self, s: &str, p: &str, o: &str) {
        self.triples.push(RawTriple::iri(s, &ont(p), &tgt(o)));
    }

    fn value(&mut self, s: &str, p: &str, v: &str) {
        self.triples.push(RawTriple::lit(s, &ont(p), v));
    }
}

/// Three country names, each shared in the target by the country and by
/// one or two rivers or towns of the same name.
pub fn countries() -> Corpus {
    let class = format!("{SRC}Country");
    let name = format!("{SRC}name");
    let mut source = Vec::new();
    for (i, label) in ["Brazil", "Portugal", "Spain"].iter().enumerate() {
        let s = format!("{SRC}country/{}", i + 1);
        source.push(RawTriple::iri(&s, RDF_TYPE, &class));
        source.push(RawTriple::lit(&s, &name, label));
    }

    let mut b = Builder::new();
    let country = |b: &mut Builder, id: &str, label: &str, facts: &[(&str, &str)]| {
        let s = tgt(id);
        b.typed(&s, "Country");
        b.label(&s, label);
        for (p, o) in facts {
            b.link(&s, p, o);
        }
        s
    };
    let brazil = country(
        &mut b,
        "Brazil",
        "Brazil",
        &[
            ("capital", "Brasilia"),
            ("currency", "Brazilian_real"),
            ("officialLanguage", "Portuguese_language"),
            ("continent", "South_America"),
            ("memberOf", "United_Nations"),
            ("governmentType", "Federal_republic"),
        ],
    );
    let portugal = country(
        &mut b,
        "Portugal",
        "Portugal",
        &[
            ("capital", "Lisbon"),
            ("currency", "Euro"),
            ("officialLanguage", "Portuguese_language"),
            ("continent", "Europe"),
            ("memberOf", "United_Nations"),
            ("memberOf", "European_Union"),
            ("governmentType", "Unitary_republic"),
        ],
    );
    let spain = country(
        &mut b,
        "Spain",
        "Spain",
        &[
            ("capital", "Madrid"),
            ("currency", "Euro"),
            ("officialLanguage", "Spanish_language"),
            ("continent", "Europe"),
            ("memberOf", "United_Nations"),
            ("memberOf", "European_Union"),
            ("governmentType", "Constitutional_monarchy"),
        ],
    );

    let s = tgt("Brazil_River");
    b.typed(&s, "River");
    b.label(&s, "Brazil");
    b.link(&s, "mouth", "Atlantic_Ocean");
    b.link(&s, "country", "United_States");
    b.value(&s, "length", "42");

    let s = tgt("Brazil,_Indiana");
    b.typed(&s, "City");
    b.label(&s, "Brazil");
    b.link(&s, "country", "United_States");
    b.link(&s, "state", "Indiana");
    b.link(&s, "timeZone", "Eastern_Time_Zone");

    let s = tgt("Portugal_Cove");
    b.typed(&s, "City");
    b.label(&s, "Portugal");
    b.link(&s, "country", "Canada");
    b.link(&s, "timeZone", "Newfoundland_Time_Zone");

    let s = tgt("Spain_River");
    b.typed(&s, "River");
    b.label(&s, "Spain");
    b.link(&s, "mouth", "Atlantic_Ocean");
    b.link(&s, "country", "United_States");
    b.value(&s, "length", "17");

    let s = tgt("Spain,_Texas");
    b.typed(&s, "City");
    b.label(&s, "Spain");
    b.link(&s, "country", "United_States");
    b.link(&s, "state", "Texas");
    b.link(&s, "timeZone", "Central_Time_Zone");

    // unrelated resources
    let s = tgt("Lisbon");
    b.typed(&s, "City");
    b.label(&s, "Lisbon");
    b.link(&s, "country", "Portugal");

    let gold = vec![
        (format!("{SRC}country/1"), brazil),
        (format!("{SRC}country/2"), portugal),
        (format!("{SRC}country/3"), spain),
    ];
    Corpus { source, target: b.triples, class, gold }
}

const SYLLABLES: &[&str] = &[
    "ka", "lo", "mi", "ra", "ten", "vo", "sa", "bel", "dor", "an", "qui", "zu", "fe", "gra", "mon", "ti", "pel", "ros",
    "va", "nor", "est", "li", "bra", "cun",
];

fn unique_names(rng: &mut ChaCha8Rng, n: usize) -> Vec<String> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let k = rng.random_range(2..=3);
        let word: String = (0..k).map(|_| *SYLLABLES.choose(rng).unwrap()).collect();
        if seen.insert(word.clone()) {
            let mut chars = word.chars();
            let first = chars.next().unwrap().to_ascii_uppercase();
            out.push(format!("{first}{}", chars.as_str()));
        }
    }
    out
}

/// Opaque target identifiers so IRI order carries no hint.
fn opaque_ids(rng: &mut ChaCha8Rng, n: usize) -> Vec<String> {
    let mut ids: Vec<usize> = (0..n).collect();
    ids.shuffle(rng);
    ids.into_iter().map(|i| tgt(&format!("r{i:05}"))).collect()
}

fn swap_inner(name: &str) -> String {
    let mut chars: Vec<char> = name.chars().collect();
    let n = chars.len();
    if n >= 4 {
        chars.swap(1, n - 2);
    }
    chars.into_iter().collect()
}

/// Settlements linked to a target where most names are shared with people,
/// films, bands or rivers. A few settlements are missing from the target
/// and a few carry a misspelled name there, so perfect scores are out of
/// reach.
pub fn synthetic(seed: u64, n: usize) -> Corpus {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let names = unique_names(&mut rng, n);
    let mut ids = opaque_ids(&mut rng, n * 5).into_iter();
    let class = format!("{SRC}Place");
    let name_p = format!("{SRC}name");
    let region_p = format!("{SRC}region");
    let mut source = Vec::new();
    let mut b = Builder::new();
    let mut gold = Vec::new();
    let abstract_text = "A settlement described at length for readers who want the whole story, \
        with far more words than any name would ever need, so that this text stays well beyond \
        the length any label property could plausibly have in practice.";

    for (i, name) in names.iter().enumerate() {
        let s = format!("{SRC}place/{i:03}");
        source.push(RawTriple::iri(&s, RDF_TYPE, &class));
        source.push(RawTriple::lit(&s, &name_p, name));
        source.push(RawTriple::lit(&s, &region_p, ["north", "south"][i % 2]));

        let roll: f64 = rng.random();
        if roll >= 0.06 {
            let t = ids.next().unwrap();
            let label = if roll < 0.11 { swap_inner(name) } else { name.clone() };
            b.typed(&t, "Settlement");
            b.label(&t, &label);
            b.link(&t, "country", &format!("Country_{}", rng.random_range(0..6)));
            b.link(&t, "timeZone", &format!("Zone_{}", rng.random_range(0..4)));
            b.value(&t, "population", &rng.random_range(500..900_000).to_string());
            b.value(&t, "elevation", &rng.random_range(0..2500).to_string());
            b.value(&t, "abstract", abstract_text);
            let mut attrs: Vec<usize> = (0..12).collect();
            attrs.shuffle(&mut rng);
            for a in attrs.into_iter().take(rng.random_range(2..=4)) {
                b.link(&t, &format!("attr{a}"), &format!("Value_{a}_{}", rng.random_range(0..3)));
            }
            gold.push((s.clone(), t));
        }

        for _ in 0..rng.random_range(0..=3) {
            let h = ids.next().unwrap();
            b.label(&h, name);
            match rng.random_range(0..4) {
                0 => {
                    b.typed(&h, "Person");
                    b.link(&h, "occupation", &format!("Occupation_{}", rng.random_range(0..6)));
                    b.value(&h, "birthYear", &rng.random_range(1900..2000).to_string());
                    b.link(&h, "nationality", &format!("Country_{}", rng.random_range(0..6)));
                }
                1 => {
                    b.typed(&h, "Film");
                    b.link(&h, "director", &format!("Director_{}", rng.random_range(0..30)));
                    b.link(&h, "genre", &format!("Genre_{}", rng.random_range(0..6)));
                    b.value(&h, "releaseYear", &rng.random_range(1950..2020).to_string());
                }
                2 => {
                    b.typed(&h, "Band");
                    b.link(&h, "genre", &format!("Genre_{}", rng.random_range(0..6)));
                    b.link(&h, "hometown", &format!("Town_{}", rng.random_range(0..40)));
                    b.value(&h, "activeSince", &rng.random_range(1960..2020).to_string());
                }
                _ => {
                    b.typed(&h, "River");
                    b.link(&h, "mouth", &format!("Sea_{}", rng.random_range(0..4)));
                    b.link(&h, "country", &format!("Country_{}", rng.random_range(0..6)));
                    b.value(&h, "length", &rng.random_range(5..3000).to_string());
                }
            }
        }
    }
    Corpus { source, target: b.triples, class, gold }
}

/// Every set holds one city with a large, mostly individual description
/// and several identical small film descriptions. Cities share more
/// features with each other in absolute terms, the films share a larger
/// fraction of theirs.
pub fn index_comparison(seed: u64, sets: usize, decoys_per_set: usize) -> Corpus {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let names = unique_names(&mut rng, sets);
    let mut ids = opaque_ids(&mut rng, sets * (decoys_per_set + 1)).into_iter();
    let class = format!("{SRC}City");
    let name_p = format!("{SRC}name");
    let mut source = Vec::new();
    let mut b = Builder::new();
    let mut gold = Vec::new();
    for (i, name) in names.iter().enumerate() {
        let s = format!("{SRC}city/{i:03}");
        source.push(RawTriple::iri(&s, RDF_TYPE, &class));
        source.push(RawTriple::lit(&s, &name_p, name));

        let city = ids.next().unwrap();
        b.typed(&city, "City");
        b.label(&city, name);
        b.link(&city, "country", "Country_0");
        let mut pool: Vec<usize> = (0..600).collect();
        pool.shuffle(&mut rng);
        for a in pool.into_iter().take(60) {
            b.link(&city, &format!("feature{a}"), &format!("Feature_{a}_{}", rng.random_range(0..2)));
        }
        gold.push((s, city));

        for _ in 0..decoys_per_set {
            let d = ids.next().unwrap();
            b.typed(&d, "Film");
            b.label(&d, name);
            b.link(&d, "director", "Director_0");
            b.link(&d, "genre", "Genre_0");
            b.value(&d, "releaseYear", "1999");
        }
    }
    Corpus { source, target: b.triples, class, gold }
}

/// A random scoring problem: sets of target resources, their triples and
/// pivot resources.
#[derive(Debug, Clone)]
pub struct MicroInstance {
    pub triples: Vec<RawTriple>,
    pub sets: Vec<Vec<String>>,
    pub pivots: Vec<String>,
}

/// At most 5 sets of at most 5 members, at most 10 triples per resource.
/// Some resources repeat one predicate often enough to trip the noise
/// filter; some appear in two sets.
pub fn micro_instance(rng: &mut ChaCha8Rng) -> MicroInstance {
    let resources: Vec<String> = (0..12).map(|i| format!("http://micro.example/r{i}")).collect();
    let predicates: Vec<String> = (0..4).map(|i| format!("http://micro.example/p{i}")).collect();
    let mut triples = Vec::new();
    for r in &resources {
        let n = rng.random_range(0..=10);
        let noisy = rng.random_bool(0.2);
        for k in 0..n {
            let p = if noisy && k < 7 { &predicates[0] } else { predicates.choose(rng).unwrap() };
            let t = if rng.random_bool(0.5) {
                RawTriple::iri(r, p, &format!("http://micro.example/o{}", rng.random_range(0..5)))
            } else {
                RawTriple::lit(r, p, &format!("v{}", rng.random_range(0..5)))
            };
            triples.push(t);
        }
    }
    let set_count = rng.random_range(1..=5);
    let sets = (0..set_count)
        .map(|_| {
            let size = rng.random_range(1..=5);
            let mut members: Vec<String> = resources.choose_multiple(rng, size).cloned().collect();
            members.sort();
            members
        })
        .collect();
    let pivots = (0..rng.random_range(0..=2)).map(|_| resources.choose(rng).unwrap().clone()).collect();
    MicroInstance { triples, sets, pivots }
}
