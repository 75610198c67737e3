//! Relation candidates for an ordered pair of columns `(head, tail)`.
//!
//! Entity-entity pairs count, per row, whether any head candidate links to
//! any tail candidate through a relation. Entity-literal pairs compare each
//! head candidate's literal attributes against the tail cell and aggregate the
//! relevance of the pairs that clear `beta`.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use serde::{Deserialize, Serialize};

use crate::distribution::{combine_signals, Aggregation, CandidateDistribution, Signal};
use crate::error::Result;
use crate::kg::{KnowledgeGraph, LiteralValue};
use crate::similarity::{normalized_levenshtein_ci, parse_number};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PairKind {
    EntityEntity,
    EntityLiteral,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnPairRelations {
    pub head: usize,
    pub tail: usize,
    pub kind: PairKind,
    pub distribution: CandidateDistribution,
}

/// How the kept scores of one row are combined per relation before summing
/// over rows.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PairAggregation {
    /// Best kept score among the row's candidates.
    #[default]
    Max,
    /// Sum of every kept score of the row.
    Sum,
}

/// Relevance of two numbers: `1 - |c - v| / max(|c|, |v|)`, with both zero
/// counting as a perfect match.
pub fn numeric_relevance(c: f64, v: f64) -> f64 {
    let scale = c.abs().max(v.abs());
    let diff = (c - v).abs();
    if scale == 0.0 {
        if diff == 0.0 {
            1.0
        } else {
            0.0
        }
    } else {
        (1.0 - diff / scale).clamp(0.0, 1.0)
    }
}

/// Relevance of a KG literal to a cell string. Numbers are compared
/// numerically when the cell parses as a number; everything else by
/// case-insensitive normalized Levenshtein similarity.
pub fn literal_relevance(value: &LiteralValue, cell: &str) -> f64 {
    match value {
        LiteralValue::Number(v) => match parse_number(cell) {
            Some(c) => numeric_relevance(c, *v),
            None => normalized_levenshtein_ci(&number_text(*v), cell.trim()),
        },
        LiteralValue::Text(s) => match (parse_number(s), parse_number(cell)) {
            (Some(v), Some(c)) => numeric_relevance(c, v),
            _ => normalized_levenshtein_ci(s.trim(), cell.trim()),
        },
    }
}

fn number_text(v: f64) -> String {
    crate::kg::LiteralAttribute {
        relation: String::new(),
        value: LiteralValue::Number(v),
    }
    .as_text()
}

/// Pr(r | head, tail) for two entity columns. Rows are aligned by index. A
/// relation scores one per row in which any head candidate links to any
/// tail candidate through it (head to tail only).
pub fn relation_entity_entity(
    head_cands: &[&CandidateDistribution],
    tail_cands: &[&CandidateDistribution],
    kg: &KnowledgeGraph,
) -> CandidateDistribution {
    let mut counts: BTreeMap<String, f64> = BTreeMap::new();
    for (h, t) in head_cands.iter().zip(tail_cands) {
        if h.is_empty() || t.is_empty() {
            continue;
        }
        let tails: HashSet<&str> = t.ids().collect();
        let mut fired: BTreeSet<&str> = BTreeSet::new();
        for e1 in h.ids() {
            for (r, e2) in kg.links_from(e1) {
                if tails.contains(e2.as_str()) {
                    fired.insert(r);
                }
            }
        }
        for r in fired {
            *counts.entry(r.to_string()).or_insert(0.0) += 1.0;
        }
    }
    CandidateDistribution::from_scores(counts)
}

/// Relevance scores above `beta` for each relation of one row, over all head
/// candidates, combined per `mode`.
pub fn row_literal_scores(
    head: &CandidateDistribution,
    cell: &str,
    kg: &KnowledgeGraph,
    beta: f64,
    mode: PairAggregation,
) -> BTreeMap<String, f64> {
    let mut row: BTreeMap<String, f64> = BTreeMap::new();
    if cell.trim().is_empty() {
        return row;
    }
    for e in head.ids() {
        for attr in kg.literal_attributes(e) {
            let s = literal_relevance(&attr.value, cell);
            if s > beta {
                let slot = row.entry(attr.relation.clone()).or_insert(0.0);
                match mode {
                    PairAggregation::Max => *slot = slot.max(s),
                    PairAggregation::Sum => *slot += s,
                }
            }
        }
    }
    row
}

/// Pr(r | head, tail) for an entity head and a literal tail.
pub fn relation_entity_literal(
    head_cands: &[&CandidateDistribution],
    tail_values: &[&str],
    kg: &KnowledgeGraph,
    beta: f64,
    mode: PairAggregation,
) -> CandidateDistribution {
    let mut acc: BTreeMap<String, f64> = BTreeMap::new();
    for (h, cell) in head_cands.iter().zip(tail_values) {
        for (r, s) in row_literal_scores(h, cell, kg, beta, mode) {
            *acc.entry(r).or_insert(0.0) += s;
        }
    }
    CandidateDistribution::from_scores(acc)
}

/// Weighted combination of value-matching and numeric-labeling relation
/// distributions. An empty input is simply left out.
pub fn combine_numeric_relations(
    pr_el: &CandidateDistribution,
    pr_num: &CandidateDistribution,
    w_match: f64,
    w_numeric: f64,
    aggregation: Aggregation,
) -> Result<CandidateDistribution> {
    combine_signals(
        &[Signal::new(w_match, pr_el), Signal::new(w_numeric, pr_num)],
        aggregation,
        None,
    )
}
