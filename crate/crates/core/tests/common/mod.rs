//! Generated graphs and tables shared by the integration tests.
#![allow(dead_code)]

use std::collections::{BTreeSet, HashSet};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tabmatch::similarity::levenshtein;
use tabmatch::KnowledgeGraph;

pub const RES: &str = "http://example.org/resource/";
pub const ONT: &str = "http://dbpedia.org/ontology/";
pub const RDF_TYPE: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";
pub const SUBCLASS: &str = "http://www.w3.org/2000/01/rdf-schema#subClassOf";
pub const LABEL: &str = "http://www.w3.org/2000/01/rdf-schema#label";
const XSD: &str = "http://www.w3.org/2001/XMLSchema#";

pub fn ont(local: &str) -> String {
    format!("{ONT}{local}")
}

/// Pronounceable names, pairwise at least `min_dist` edits apart
/// (case-insensitive) and never a prefix of one another.
pub struct NameGen {
    rng: ChaCha8Rng,
    used: Vec<String>,
    seen: HashSet<String>,
    min_dist: usize,
}

impl NameGen {
    pub fn new(seed: u64, min_dist: usize) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
            used: Vec::new(),
            seen: HashSet::new(),
            min_dist,
        }
    }

    fn word(&mut self, syllables: usize) -> String {
        const C: &[u8] = b"bdfgklmnprstvz";
        const V: &[u8] = b"aeiou";
        let mut w = String::new();
        for _ in 0..syllables {
            w.push(*C.choose(&mut self.rng).unwrap() as char);
            w.push(*V.choose(&mut self.rng).unwrap() as char);
        }
        let mut cs = w.chars();
        let first = cs.next().unwrap().to_ascii_uppercase();
        std::iter::once(first).chain(cs).collect()
    }

    fn accept(&mut self, candidate: String) -> Option<String> {
        let lc = candidate.to_lowercase();
        if self.min_dist <= 1 {
            // Uniqueness only; cheap enough for large graphs.
            return self.seen.insert(lc).then_some(candidate);
        }
        let clash = self
            .used
            .iter()
            .any(|u| levenshtein(u, &lc) < self.min_dist || u.starts_with(&lc) || lc.starts_with(u.as_str()));
        if clash {
            None
        } else {
            self.used.push(lc);
            Some(candidate)
        }
    }

    /// A single word of 3 or 4 syllables.
    pub fn single(&mut self) -> String {
        loop {
            let n = self.rng.random_range(3..=4);
            let w = self.word(n);
            if let Some(w) = self.accept(w) {
                return w;
            }
        }
    }

    /// Two words, like a person's name.
    pub fn double(&mut self) -> String {
        loop {
            let (a, b) = (self.rng.random_range(2..=3), self.rng.random_range(3..=4));
            let w = format!("{} {}", self.word(a), self.word(b));
            if let Some(w) = self.accept(w) {
                return w;
            }
        }
    }
}

pub fn iri(label: &str) -> String {
    format!("{RES}{}", label.replace(' ', "_"))
}

#[derive(Debug, Clone)]
pub struct FixtureTable {
    pub id: String,
    pub rows: Vec<Vec<String>>,
    /// Gold entity per `(row, col)`.
    pub cea: Vec<(usize, usize, String)>,
    /// Gold exact class per column.
    pub cta: Vec<(usize, String)>,
    /// Gold relation per `(head, tail)`.
    pub cpa: Vec<(usize, usize, String)>,
}

#[derive(Debug, Clone)]
pub struct Fixture {
    pub ntriples: String,
    pub graph: KnowledgeGraph,
    pub tables: Vec<FixtureTable>,
    /// Every entity label.
    pub labels: Vec<(String, String)>,
}

struct City {
    name: String,
    country: usize,
    population: u64,
    area: f64,
    leader: Option<usize>,
}

struct Country {
    name: String,
    capital: usize,
    population: u64,
    area: f64,
}

struct Person {
    name: String,
    birth_place: usize,
    nationality: usize,
    birth_year: u32,
}

fn push(nt: &mut String, s: &str, p: &str, o: &str) {
    writeln!(nt, "<{s}> <{p}> {o} .").unwrap();
}

fn lit(s: &str) -> String {
    format!("\"{s}\"")
}

fn typed(s: impl std::fmt::Display, dt: &str) -> String {
    format!("\"{s}\"^^<{XSD}{dt}>")
}

/// The toy graph: 10 countries, 25 cities, 15 people; classes Agent >
/// Person and Place > Settlement > City, Place > Country; eight relations.
/// Labels are unique and well separated, so exact-label lookup is
/// unambiguous.
pub fn fixture() -> Fixture {
    let mut rng = ChaCha8Rng::seed_from_u64(2019);
    let mut names = NameGen::new(7, 4);
    let countries_n = 10;
    let cities_n = 25;
    let people_n = 15;

    let mut countries: Vec<Country> = (0..countries_n)
        .map(|_| Country {
            name: names.single(),
            capital: 0,
            population: rng.random_range(1_000_000..90_000_000),
            area: f64::from(rng.random_range(20_000..900_000)),
        })
        .collect();
    let mut cities: Vec<City> = (0..cities_n)
        .map(|i| City {
            name: names.single(),
            country: i % countries_n,
            population: rng.random_range(20_000..900_000),
            area: f64::from(rng.random_range(500..9_000)) / 10.0,
            leader: None,
        })
        .collect();
    for (i, c) in countries.iter_mut().enumerate() {
        c.capital = i;
    }
    let people: Vec<Person> = (0..people_n)
        .map(|i| Person {
            name: names.double(),
            birth_place: (i * 7) % cities_n,
            nationality: (i * 3) % countries_n,
            birth_year: rng.random_range(1900..2000),
        })
        .collect();
    for (i, c) in cities.iter_mut().enumerate().take(people_n) {
        c.leader = Some((i * 4) % people_n);
    }

    let mut nt = String::new();
    for (child, parent) in [
        ("Person", "Agent"),
        ("Settlement", "Place"),
        ("City", "Settlement"),
        ("Country", "Place"),
    ] {
        push(&mut nt, &ont(child), SUBCLASS, &format!("<{}>", ont(parent)));
    }
    for class in ["Agent", "Person", "Place", "Settlement", "City", "Country"] {
        push(&mut nt, &ont(class), LABEL, &lit(class));
    }
    let mut labels = Vec::new();
    for c in &countries {
        let e = iri(&c.name);
        push(&mut nt, &e, RDF_TYPE, &format!("<{}>", ont("Country")));
        push(&mut nt, &e, LABEL, &format!("\"{}\"@en", c.name));
        push(
            &mut nt,
            &e,
            &ont("capital"),
            &format!("<{}>", iri(&cities[c.capital].name)),
        );
        push(&mut nt, &e, &ont("populationTotal"), &typed(c.population, "integer"));
        push(&mut nt, &e, &ont("areaTotal"), &typed(c.area, "double"));
        labels.push((e, c.name.clone()));
    }
    for c in &cities {
        let e = iri(&c.name);
        push(&mut nt, &e, RDF_TYPE, &format!("<{}>", ont("City")));
        push(&mut nt, &e, LABEL, &format!("\"{}\"@en", c.name));
        push(
            &mut nt,
            &e,
            &ont("country"),
            &format!("<{}>", iri(&countries[c.country].name)),
        );
        push(&mut nt, &e, &ont("populationTotal"), &typed(c.population, "integer"));
        push(&mut nt, &e, &ont("areaTotal"), &typed(c.area, "double"));
        if let Some(l) = c.leader {
            push(&mut nt, &e, &ont("leaderName"), &format!("<{}>", iri(&people[l].name)));
        }
        labels.push((e, c.name.clone()));
    }
    for p in &people {
        let e = iri(&p.name);
        push(&mut nt, &e, RDF_TYPE, &format!("<{}>", ont("Person")));
        push(&mut nt, &e, LABEL, &format!("\"{}\"@en", p.name));
        push(
            &mut nt,
            &e,
            &ont("birthPlace"),
            &format!("<{}>", iri(&cities[p.birth_place].name)),
        );
        push(
            &mut nt,
            &e,
            &ont("nationality"),
            &format!("<{}>", iri(&countries[p.nationality].name)),
        );
        push(&mut nt, &e, &ont("birthYear"), &typed(p.birth_year, "gYear"));
        labels.push((e, p.name.clone()));
    }

    // Column spec: (header, value of record, gold class if entity column,
    // gold relation from the subject column).
    type Col<'a, T> = (
        &'a str,
        Box<dyn Fn(&T) -> String + 'a>,
        Option<&'a str>,
        Option<&'a str>,
    );

    fn build<T>(id: &str, records: &[&T], cols: &[Col<'_, T>]) -> FixtureTable {
        let mut rows = vec![cols.iter().map(|c| c.0.to_string()).collect::<Vec<_>>()];
        let mut cea = Vec::new();
        for (i, r) in records.iter().enumerate() {
            let row: Vec<String> = cols.iter().map(|c| (c.1)(r)).collect();
            for (j, c) in cols.iter().enumerate() {
                if c.2.is_some() {
                    cea.push((i + 1, j, iri(&row[j])));
                }
            }
            rows.push(row);
        }
        let cta = cols
            .iter()
            .enumerate()
            .filter_map(|(j, c)| c.2.map(|t| (j, ont(t))))
            .collect();
        let cpa = cols
            .iter()
            .enumerate()
            .skip(1)
            .filter_map(|(j, c)| c.3.map(|r| (0, j, ont(r))))
            .collect();
        FixtureTable {
            id: id.to_string(),
            rows,
            cea,
            cta,
            cpa,
        }
    }

    fn pick<T>(items: &[T], idx: impl Iterator<Item = usize>) -> Vec<&T> {
        idx.map(|i| &items[i]).collect()
    }

    let cn = |c: &City| countries[c.country].name.clone();
    let mut tables = vec![build(
        "cities_country",
        &pick(&cities, 0..12),
        &[
            ("City", Box::new(|c: &City| c.name.clone()), Some("City"), None),
            ("Country", Box::new(cn), Some("Country"), Some("country")),
            (
                "Population",
                Box::new(|c: &City| c.population.to_string()),
                None,
                Some("populationTotal"),
            ),
        ],
    )];
    tables.push(build(
        "cities_numbers",
        &pick(&cities, 10..22),
        &[
            ("City", Box::new(|c: &City| c.name.clone()), Some("City"), None),
            (
                "Population",
                Box::new(|c: &City| c.population.to_string()),
                None,
                Some("populationTotal"),
            ),
            ("Area", Box::new(|c: &City| c.area.to_string()), None, Some("areaTotal")),
        ],
    ));
    tables.push(build(
        "countries_capitals",
        &pick(&countries, 0..10),
        &[
            ("Country", Box::new(|c: &Country| c.name.clone()), Some("Country"), None),
            (
                "Capital",
                Box::new(|c: &Country| cities[c.capital].name.clone()),
                Some("City"),
                Some("capital"),
            ),
            (
                "Population",
                Box::new(|c: &Country| c.population.to_string()),
                None,
                Some("populationTotal"),
            ),
        ],
    ));
    tables.push(build(
        "countries_area",
        &pick(&countries, (0..10).rev()),
        &[
            ("Nation", Box::new(|c: &Country| c.name.clone()), Some("Country"), None),
            (
                "Area",
                Box::new(|c: &Country| c.area.to_string()),
                None,
                Some("areaTotal"),
            ),
        ],
    ));
    let pn = |p: &Person| p.name.clone();
    let place = |p: &Person| cities[p.birth_place].name.clone();
    let nat = |p: &Person| countries[p.nationality].name.clone();
    tables.push(build(
        "people_origin",
        &pick(&people, 0..12),
        &[
            ("Person", Box::new(pn), Some("Person"), None),
            ("Birth place", Box::new(place), Some("City"), Some("birthPlace")),
            ("Nationality", Box::new(nat), Some("Country"), Some("nationality")),
        ],
    ));
    tables.push(build(
        "people_years",
        &pick(&people, 3..15),
        &[
            ("Name", Box::new(pn), Some("Person"), None),
            (
                "Born",
                Box::new(|p: &Person| p.birth_year.to_string()),
                None,
                Some("birthYear"),
            ),
            ("Nationality", Box::new(nat), Some("Country"), Some("nationality")),
        ],
    ));
    tables.push(build(
        "mayors",
        &pick(&cities, 0..15),
        &[
            ("City", Box::new(|c: &City| c.name.clone()), Some("City"), None),
            (
                "Leader",
                Box::new(|c: &City| people[c.leader.unwrap()].name.clone()),
                Some("Person"),
                Some("leaderName"),
            ),
            ("Country", Box::new(cn), Some("Country"), Some("country")),
        ],
    ));
    tables.push(build(
        "cities_area",
        &pick(&cities, 13..25),
        &[
            ("Town", Box::new(|c: &City| c.name.clone()), Some("City"), None),
            ("Area", Box::new(|c: &City| c.area.to_string()), None, Some("areaTotal")),
            ("Country", Box::new(cn), Some("Country"), Some("country")),
        ],
    ));
    tables.push(build(
        "people_birth",
        &pick(&people, (0..15).step_by(2).chain((1..15).step_by(4))),
        &[
            ("Person", Box::new(pn), Some("Person"), None),
            ("Birth place", Box::new(place), Some("City"), Some("birthPlace")),
            (
                "Year",
                Box::new(|p: &Person| p.birth_year.to_string()),
                None,
                Some("birthYear"),
            ),
        ],
    ));
    tables.push(build(
        "capital_cities",
        &pick(&cities, 0..10),
        &[
            ("Capital", Box::new(|c: &City| c.name.clone()), Some("City"), None),
            ("Country", Box::new(cn), Some("Country"), Some("country")),
            (
                "Inhabitants",
                Box::new(|c: &City| c.population.to_string()),
                None,
                Some("populationTotal"),
            ),
        ],
    ));

    let graph = KnowledgeGraph::from_ntriples_str(&nt).expect("fixture graph loads");
    Fixture {
        ntriples: nt,
        graph,
        tables,
        labels,
    }
}

/// One random edit (insert, delete, or substitute a lowercase letter) per
/// data cell with probability `p`. Returns the edited tables and how many
/// cells were edited.
pub fn perturb(tables: &[FixtureTable], seed: u64, p: f64) -> (Vec<FixtureTable>, usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edited = 0;
    let out = tables
        .iter()
        .map(|t| {
            let mut t = t.clone();
            for row in t.rows.iter_mut().skip(1) {
                for cell in row.iter_mut() {
                    if rng.random_bool(p) {
                        *cell = random_edit(cell, &mut rng);
                        edited += 1;
                    }
                }
            }
            t
        })
        .collect();
    (out, edited)
}

fn random_edit(s: &str, rng: &mut ChaCha8Rng) -> String {
    let mut chars: Vec<char> = s.chars().collect();
    let letter = (b'a' + rng.random_range(0..26u8)) as char;
    match rng.random_range(0..3) {
        0 => {
            let at = rng.random_range(0..=chars.len());
            chars.insert(at, letter);
        }
        1 if chars.len() > 1 => {
            let at = rng.random_range(0..chars.len());
            chars.remove(at);
        }
        _ => {
            let at = rng.random_range(0..chars.len());
            if chars[at].to_ascii_lowercase() == letter {
                chars[at] = if letter == 'z' { 'y' } else { 'z' };
            } else {
                chars[at] = letter;
            }
        }
    }
    chars.into_iter().collect()
}

/// Paths of a fixture written to disk.
pub struct FixtureFiles {
    pub tables: PathBuf,
    pub triples: PathBuf,
    pub targets_cea: PathBuf,
    pub targets_cta: PathBuf,
    pub targets_cpa: PathBuf,
    pub gold_cea: PathBuf,
    pub gold_cta: PathBuf,
    pub gold_cpa: PathBuf,
}

fn write_csv(path: &Path, rows: impl IntoIterator<Item = Vec<String>>) {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_path(path).unwrap();
    for r in rows {
        w.write_record(&r).unwrap();
    }
    w.flush().unwrap();
}

/// Writes tables, triples, target files, and gold answer files under `dir`.
pub fn write_fixture(dir: &Path, ntriples: &str, tables: &[FixtureTable]) -> FixtureFiles {
    let files = FixtureFiles {
        tables: dir.join("tables"),
        triples: dir.join("graph.nt"),
        targets_cea: dir.join("targets_cea.csv"),
        targets_cta: dir.join("targets_cta.csv"),
        targets_cpa: dir.join("targets_cpa.csv"),
        gold_cea: dir.join("gold_cea.csv"),
        gold_cta: dir.join("gold_cta.csv"),
        gold_cpa: dir.join("gold_cpa.csv"),
    };
    std::fs::create_dir_all(&files.tables).unwrap();
    std::fs::write(&files.triples, ntriples).unwrap();
    for t in tables {
        write_csv(&files.tables.join(format!("{}.csv", t.id)), t.rows.clone());
    }
    let s = |x: usize| x.to_string();
    write_csv(
        &files.targets_cea,
        tables
            .iter()
            .flat_map(|t| t.cea.iter().map(|(r, c, _)| vec![t.id.clone(), s(*c), s(*r)])),
    );
    write_csv(
        &files.gold_cea,
        tables.iter().flat_map(|t| {
            t.cea
                .iter()
                .map(|(r, c, e)| vec![t.id.clone(), s(*c), s(*r), e.clone()])
        }),
    );
    write_csv(
        &files.targets_cta,
        tables
            .iter()
            .flat_map(|t| t.cta.iter().map(|(c, _)| vec![t.id.clone(), s(*c)])),
    );
    write_csv(
        &files.gold_cta,
        tables
            .iter()
            .flat_map(|t| t.cta.iter().map(|(c, k)| vec![t.id.clone(), s(*c), k.clone()])),
    );
    write_csv(
        &files.targets_cpa,
        tables
            .iter()
            .flat_map(|t| t.cpa.iter().map(|(h, c, _)| vec![t.id.clone(), s(*h), s(*c)])),
    );
    write_csv(
        &files.gold_cpa,
        tables.iter().flat_map(|t| {
            t.cpa
                .iter()
                .map(|(h, c, r)| vec![t.id.clone(), s(*h), s(*c), r.clone()])
        }),
    );
    files
}

/// A random graph of about `n_triples` triples: 1,000 entities, 30 classes
/// in a random DAG, 20 relations, plus types, labels, and literals.
pub fn random_graph(seed: u64, n_triples: usize) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut nt = String::new();
    let n_classes = 30;
    let n_entities = 1000;
    let mut count = 0;
    for c in 1..n_classes {
        let parents = rng.random_range(0..=2);
        let mut ps = BTreeSet::new();
        for _ in 0..parents {
            ps.insert(rng.random_range(0..c));
        }
        for p in ps {
            push(&mut nt, &format!("c:C{c}"), SUBCLASS, &format!("<c:C{p}>"));
            count += 1;
        }
    }
    while count < n_triples {
        let s = format!("e:E{}", rng.random_range(0..n_entities));
        match rng.random_range(0..10) {
            0 | 1 => push(
                &mut nt,
                &s,
                RDF_TYPE,
                &format!("<c:C{}>", rng.random_range(0..n_classes)),
            ),
            2 => push(
                &mut nt,
                &s,
                LABEL,
                &lit(&format!("label {}", rng.random_range(0..5000))),
            ),
            3..=6 => push(
                &mut nt,
                &s,
                &format!("r:R{}", rng.random_range(0..20)),
                &format!("<e:E{}>", rng.random_range(0..n_entities)),
            ),
            7 | 8 => push(
                &mut nt,
                &s,
                &format!("r:R{}", rng.random_range(0..20)),
                &typed(rng.random_range(0..100_000), "integer"),
            ),
            _ => push(
                &mut nt,
                &s,
                &format!("r:R{}", rng.random_range(0..20)),
                &lit(&format!("text {}", rng.random_range(0..100))),
            ),
        }
        count += 1;
    }
    nt
}

/// A graph of `n` people-and-places entities with labels, types, links, and
/// literals, and a 100-row, 5-column table drawn from it.
pub fn large_graph_and_table(n: usize, seed: u64) -> (String, Vec<Vec<String>>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut names = NameGen::new(seed, 1);
    let mut nt = String::new();
    for (child, parent) in [("City", "Place"), ("Country", "Place"), ("Person", "Agent")] {
        push(&mut nt, &ont(child), SUBCLASS, &format!("<{}>", ont(parent)));
    }
    let n_countries = n / 20;
    let n_cities = n / 4;
    let labels: Vec<String> = (0..n).map(|_| names.single()).collect();
    let class_of = |i: usize| {
        if i < n_countries {
            "Country"
        } else if i < n_countries + n_cities {
            "City"
        } else {
            "Person"
        }
    };
    for (i, l) in labels.iter().enumerate() {
        let e = iri(l);
        push(&mut nt, &e, RDF_TYPE, &format!("<{}>", ont(class_of(i))));
        push(&mut nt, &e, LABEL, &lit(l));
        match class_of(i) {
            "Country" => {
                push(
                    &mut nt,
                    &e,
                    &ont("populationTotal"),
                    &typed(rng.random_range(1_000_000..90_000_000), "integer"),
                );
            }
            "City" => {
                let c = rng.random_range(0..n_countries);
                push(&mut nt, &e, &ont("country"), &format!("<{}>", iri(&labels[c])));
                push(
                    &mut nt,
                    &e,
                    &ont("populationTotal"),
                    &typed(rng.random_range(10_000..5_000_000), "integer"),
                );
            }
            _ => {
                let c = rng.random_range(n_countries..n_countries + n_cities);
                push(&mut nt, &e, &ont("birthPlace"), &format!("<{}>", iri(&labels[c])));
                push(
                    &mut nt,
                    &e,
                    &ont("birthYear"),
                    &typed(rng.random_range(1900..2000), "gYear"),
                );
            }
        }
    }
    let mut people: Vec<usize> = (n_countries + n_cities..n).collect();
    people.shuffle(&mut rng);
    let kg = KnowledgeGraph::from_ntriples_str(&nt).unwrap();
    let mut rows = vec![vec![
        "Person".to_string(),
        "Birth place".to_string(),
        "Country".to_string(),
        "Born".to_string(),
        "City population".to_string(),
    ]];
    for &p in people.iter().take(100) {
        let person = iri(&labels[p]);
        let city = kg
            .links_from(&person)
            .iter()
            .find(|(r, _)| r.ends_with("birthPlace"))
            .unwrap()
            .1
            .clone();
        let country = kg
            .links_from(&city)
            .iter()
            .find(|(r, _)| r.ends_with("country"))
            .unwrap()
            .1
            .clone();
        let year = kg.literal_attributes(&person)[0].as_text();
        let pop = kg.literal_attributes(&city)[0].as_text();
        rows.push(vec![
            labels[p].clone(),
            kg.labels(&city)[0].clone(),
            kg.labels(&country)[0].clone(),
            year,
            pop,
        ]);
    }
    (nt, rows)
}
