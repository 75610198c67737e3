//! In-memory knowledge graph loaded from N-Triples.
//!
//! `rdf:type`, `rdfs:subClassOf`, and `rdfs:label` are recognized (as full
//! IRIs or in the `rdf:` / `rdfs:` prefixed spelling); every other predicate
//! is a relation. IRI objects produce entity-entity triples, literal objects
//! produce entity-literal triples. The graph is immutable once built.

pub mod index_dir;
pub mod ntriples;
mod search;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::{BufRead, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

pub use ntriples::{Term, Triple};
pub use search::{LabelIndex, FUZZY_FLOOR};

use crate::error::{Error, Result};
use crate::similarity::parse_number;

pub const RDF_TYPE: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";
pub const RDFS_SUBCLASS_OF: &str = "http://www.w3.org/2000/01/rdf-schema#subClassOf";
pub const RDFS_LABEL: &str = "http://www.w3.org/2000/01/rdf-schema#label";
const XSD: &str = "http://www.w3.org/2001/XMLSchema#";

fn is_type_predicate(p: &str) -> bool {
    p == RDF_TYPE || p == "rdf:type"
}

fn is_subclass_predicate(p: &str) -> bool {
    p == RDFS_SUBCLASS_OF || p == "rdfs:subClassOf"
}

fn is_label_predicate(p: &str) -> bool {
    p == RDFS_LABEL || p == "rdfs:label"
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LiteralKind {
    Textual,
    Numerical,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum LiteralValue {
    Text(String),
    Number(f64),
}

/// One `(relation, value)` pair of an entity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LiteralAttribute {
    pub relation: String,
    pub value: LiteralValue,
}

impl LiteralAttribute {
    pub fn kind(&self) -> LiteralKind {
        match self.value {
            LiteralValue::Text(_) => LiteralKind::Textual,
            LiteralValue::Number(_) => LiteralKind::Numerical,
        }
    }

    pub fn as_number(&self) -> Option<f64> {
        match self.value {
            LiteralValue::Number(v) => Some(v),
            LiteralValue::Text(_) => None,
        }
    }

    /// The value as it would be compared against a cell string.
    pub fn as_text(&self) -> String {
        match &self.value {
            LiteralValue::Text(s) => s.clone(),
            LiteralValue::Number(v) => format_number(*v),
        }
    }
}

fn format_number(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v}")
    }
}

/// Numeric iff the datatype says so (or, for plain literals and unknown
/// datatypes, iff the lexical form parses as a finite number).
fn literal_value(lexical: &str, lang: Option<&str>, datatype: Option<&str>) -> LiteralValue {
    let text = || LiteralValue::Text(lexical.to_string());
    if lang.is_some() {
        return text();
    }
    if let Some(local) = datatype.and_then(|d| d.strip_prefix(XSD).or_else(|| d.strip_prefix("xsd:"))) {
        let numeric = matches!(
            local,
            "integer"
                | "int"
                | "long"
                | "short"
                | "byte"
                | "decimal"
                | "double"
                | "float"
                | "nonNegativeInteger"
                | "positiveInteger"
                | "negativeInteger"
                | "nonPositiveInteger"
                | "unsignedLong"
                | "unsignedInt"
                | "unsignedShort"
                | "unsignedByte"
                | "gYear"
        );
        if !numeric {
            return text();
        }
    }
    match parse_number(lexical) {
        Some(v) => LiteralValue::Number(v),
        None => text(),
    }
}

/// Local name of an IRI with underscores as spaces, used as a label when an
/// entity or class has none.
pub fn local_name(iri: &str) -> String {
    let tail = iri.rsplit(['/', '#', ':']).next().unwrap_or(iri);
    let tail = if tail.is_empty() { iri } else { tail };
    tail.replace('_', " ")
}

static EMPTY_SET: BTreeSet<String> = BTreeSet::new();

#[derive(Debug, Clone, Default)]
pub struct KnowledgeGraph {
    triples: Vec<Triple>,
    entities: BTreeSet<String>,
    classes: BTreeSet<String>,
    relations: BTreeSet<String>,
    labels: HashMap<String, Vec<String>>,
    direct_types: HashMap<String, BTreeSet<String>>,
    parents: HashMap<String, BTreeSet<String>>,
    /// Strict ancestors of each class.
    ancestors: HashMap<String, BTreeSet<String>>,
    depth: HashMap<String, usize>,
    /// Direct types closed under subclass edges.
    entity_types: HashMap<String, BTreeSet<String>>,
    ee_by_pair: HashMap<String, HashMap<String, BTreeSet<String>>>,
    ee_out: HashMap<String, Vec<(String, String)>>,
    ee_in: HashMap<String, Vec<(String, String)>>,
    el_by_subject: HashMap<String, Vec<LiteralAttribute>>,
    relation_types: HashMap<String, BTreeSet<String>>,
    label_index: LabelIndex,
}

impl KnowledgeGraph {
    pub fn load(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::from_reader(std::io::BufReader::new(file))
    }

    pub fn from_reader<R: BufRead>(reader: R) -> Result<Self> {
        Self::from_triples(ntriples::read_triples(reader)?)
    }

    pub fn from_ntriples_str(s: &str) -> Result<Self> {
        Self::from_reader(s.as_bytes())
    }

    /// Builds all indexes. Fails if subclass edges contain a cycle.
    pub fn from_triples(triples: Vec<Triple>) -> Result<Self> {
        let mut g = KnowledgeGraph::default();
        let mut nodes: BTreeSet<String> = BTreeSet::new();

        for t in &triples {
            let subject = t.subject.node_id().expect("subjects are never literals");
            let p = t.predicate.as_str();
            if is_type_predicate(p) {
                if let Some(class) = t.object.node_id() {
                    g.classes.insert(class.clone());
                    g.direct_types.entry(subject.clone()).or_default().insert(class);
                    nodes.insert(subject);
                    continue;
                }
            } else if is_subclass_predicate(p) {
                if let Some(parent) = t.object.node_id() {
                    g.classes.insert(subject.clone());
                    g.classes.insert(parent.clone());
                    g.parents.entry(subject).or_default().insert(parent);
                    continue;
                }
            } else if is_label_predicate(p) {
                if let Term::Literal { lexical, .. } = &t.object {
                    g.labels.entry(subject.clone()).or_default().push(lexical.clone());
                    nodes.insert(subject);
                    continue;
                }
            }
            // Ordinary relation (or a special predicate used with an
            // unexpected object kind, kept as a plain relation).
            g.relations.insert(t.predicate.clone());
            nodes.insert(subject.clone());
            match &t.object {
                Term::Literal {
                    lexical,
                    lang,
                    datatype,
                } => {
                    g.el_by_subject.entry(subject).or_default().push(LiteralAttribute {
                        relation: t.predicate.clone(),
                        value: literal_value(lexical, lang.as_deref(), datatype.as_deref()),
                    });
                }
                obj => {
                    let object = obj.node_id().expect("non-literal");
                    nodes.insert(object.clone());
                    g.ee_by_pair
                        .entry(subject.clone())
                        .or_default()
                        .entry(object.clone())
                        .or_default()
                        .insert(t.predicate.clone());
                    g.ee_out
                        .entry(subject.clone())
                        .or_default()
                        .push((t.predicate.clone(), object.clone()));
                    g.ee_in.entry(object).or_default().push((t.predicate.clone(), subject));
                }
            }
        }

        g.entities = nodes
            .into_iter()
            .filter(|n| !g.classes.contains(n) && !g.relations.contains(n))
            .collect();
        g.check_acyclic()?;
        g.close_hierarchy();

        for (e, direct) in &g.direct_types {
            let mut all = direct.clone();
            for c in direct {
                all.extend(g.ancestors.get(c).into_iter().flatten().cloned());
            }
            g.entity_types.insert(e.clone(), all);
        }

        let mut relation_types: HashMap<String, BTreeSet<String>> = HashMap::new();
        let subjects_by_relation = g
            .ee_out
            .iter()
            .flat_map(|(s, outs)| outs.iter().map(move |(r, _)| (r, s)))
            .chain(
                g.el_by_subject
                    .iter()
                    .flat_map(|(s, attrs)| attrs.iter().map(move |a| (&a.relation, s))),
            );
        for (r, s) in subjects_by_relation {
            let entry = relation_types.entry(r.clone()).or_default();
            if let Some(ts) = g.entity_types.get(s) {
                entry.extend(ts.iter().cloned());
            }
        }
        relation_types.retain(|_, v| !v.is_empty());
        g.relation_types = relation_types;

        let entries = g
            .entities
            .iter()
            .flat_map(|e| g.display_labels(e).into_iter().map(move |l| (e.clone(), l)))
            .collect::<Vec<_>>();
        g.label_index = LabelIndex::build(entries);
        g.triples = triples;
        Ok(g)
    }

    fn check_acyclic(&self) -> Result<()> {
        // 0 = unvisited, 1 = on stack, 2 = done
        let mut state: HashMap<&str, u8> = HashMap::new();
        for start in self.parents.keys() {
            if state.get(start.as_str()).copied().unwrap_or(0) != 0 {
                continue;
            }
            let mut stack: Vec<(&str, Vec<&str>)> = vec![(start, self.parent_list(start))];
            state.insert(start, 1);
            while let Some(top) = stack.last_mut() {
                let node = top.0;
                match top.1.pop() {
                    Some(next) => match state.get(next).copied().unwrap_or(0) {
                        0 => {
                            state.insert(next, 1);
                            let ps = self.parent_list(next);
                            stack.push((next, ps));
                        }
                        1 => return Err(Error::SubclassCycle(next.to_string())),
                        _ => {}
                    },
                    None => {
                        state.insert(node, 2);
                        stack.pop();
                    }
                }
            }
        }
        Ok(())
    }

    fn parent_list(&self, c: &str) -> Vec<&str> {
        self.parents
            .get(c)
            .map(|ps| ps.iter().map(String::as_str).collect())
            .unwrap_or_default()
    }

    fn close_hierarchy(&mut self) {
        fn visit(
            c: &str,
            parents: &HashMap<String, BTreeSet<String>>,
            ancestors: &mut HashMap<String, BTreeSet<String>>,
            depth: &mut HashMap<String, usize>,
        ) {
            if ancestors.contains_key(c) {
                return;
            }
            let mut anc = BTreeSet::new();
            let mut d = 0;
            for p in parents.get(c).into_iter().flatten() {
                visit(p, parents, ancestors, depth);
                anc.insert(p.clone());
                anc.extend(ancestors[p.as_str()].iter().cloned());
                d = d.max(depth[p.as_str()] + 1);
            }
            ancestors.insert(c.to_string(), anc);
            depth.insert(c.to_string(), d);
        }
        let mut ancestors = HashMap::new();
        let mut depth = HashMap::new();
        for c in &self.classes {
            visit(c, &self.parents, &mut ancestors, &mut depth);
        }
        self.ancestors = ancestors;
        self.depth = depth;
    }

    pub fn entities(&self) -> &BTreeSet<String> {
        &self.entities
    }

    pub fn classes(&self) -> &BTreeSet<String> {
        &self.classes
    }

    pub fn relations(&self) -> &BTreeSet<String> {
        &self.relations
    }

    pub fn triples(&self) -> &[Triple] {
        &self.triples
    }

    pub fn is_entity(&self, id: &str) -> bool {
        self.entities.contains(id)
    }

    /// Labels as stored (`rdfs:label` literals, any language).
    pub fn labels(&self, id: &str) -> &[String] {
        self.labels.get(id).map_or(&[], Vec::as_slice)
    }

    /// Stored labels, or the IRI local name when there are none.
    pub fn display_labels(&self, id: &str) -> Vec<String> {
        match self.labels.get(id) {
            Some(ls) if !ls.is_empty() => ls.clone(),
            _ => vec![local_name(id)],
        }
    }

    pub fn direct_types(&self, e: &str) -> &BTreeSet<String> {
        self.direct_types.get(e).unwrap_or(&EMPTY_SET)
    }

    /// Direct `rdf:type` classes of `e` closed under subclass edges; empty
    /// for unknown ids.
    pub fn types_of(&self, e: &str) -> &BTreeSet<String> {
        self.entity_types.get(e).unwrap_or(&EMPTY_SET)
    }

    pub fn parents(&self, class: &str) -> &BTreeSet<String> {
        self.parents.get(class).unwrap_or(&EMPTY_SET)
    }

    pub fn ancestors(&self, class: &str) -> &BTreeSet<String> {
        self.ancestors.get(class).unwrap_or(&EMPTY_SET)
    }

    /// Longest subclass path from `class` up to a root; roots have depth 0.
    pub fn depth(&self, class: &str) -> usize {
        self.depth.get(class).copied().unwrap_or(0)
    }

    /// `class` followed by its strict ancestors ordered root-ward (deeper
    /// first, ties by id). Every parent appears after its children.
    pub fn with_ancestors(&self, class: &str) -> Vec<String> {
        let mut anc: Vec<&String> = self.ancestors(class).iter().collect();
        anc.sort_by(|a, b| self.depth(b).cmp(&self.depth(a)).then_with(|| a.cmp(b)));
        std::iter::once(class.to_string())
            .chain(anc.into_iter().cloned())
            .collect()
    }

    /// Relations `r` with a triple `e1 r e2`.
    pub fn relations_between(&self, e1: &str, e2: &str) -> &BTreeSet<String> {
        self.ee_by_pair.get(e1).and_then(|m| m.get(e2)).unwrap_or(&EMPTY_SET)
    }

    /// Outgoing `(relation, object)` entity links of `e`.
    pub fn links_from(&self, e: &str) -> &[(String, String)] {
        self.ee_out.get(e).map_or(&[], Vec::as_slice)
    }

    /// Incoming `(relation, subject)` entity links of `e`.
    pub fn links_to(&self, e: &str) -> &[(String, String)] {
        self.ee_in.get(e).map_or(&[], Vec::as_slice)
    }

    pub fn literal_attributes(&self, e: &str) -> &[LiteralAttribute] {
        self.el_by_subject.get(e).map_or(&[], Vec::as_slice)
    }

    /// Classes (with ancestors) of the subjects that use `r`.
    pub fn types_for_relation(&self, r: &str) -> &BTreeSet<String> {
        self.relation_types.get(r).unwrap_or(&EMPTY_SET)
    }

    pub fn label_index(&self) -> &LabelIndex {
        &self.label_index
    }

    /// Writes every stored triple, in load order.
    pub fn write_ntriples<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for t in &self.triples {
            writeln!(w, "{t}")?;
        }
        Ok(())
    }

    /// Count of triples per kind, for manifests and reports.
    pub fn stats(&self) -> BTreeMap<&'static str, usize> {
        let mut m = BTreeMap::new();
        m.insert("triples", self.triples.len());
        m.insert("entities", self.entities.len());
        m.insert("classes", self.classes.len());
        m.insert("relations", self.relations.len());
        m.insert("entity_entity_triples", self.ee_out.values().map(Vec::len).sum());
        m.insert(
            "entity_literal_triples",
            self.el_by_subject.values().map(Vec::len).sum(),
        );
        m.insert("type_triples", self.direct_types.values().map(BTreeSet::len).sum());
        m.insert("label_triples", self.labels.values().map(Vec::len).sum());
        m
    }
}
