//! Re-scoring of a cell's entity candidates from four signals: the lookup
//! distribution, consistency with the column types, string similarity to the
//! cell, and agreement with the rest of the row.

use std::collections::{BTreeMap, HashSet};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::distribution::{combine_signals, Aggregation, CandidateDistribution, Signal};
use crate::error::Result;
use crate::kg::KnowledgeGraph;
use crate::relation::literal_relevance;
use crate::similarity::normalized_levenshtein_ci;

const STOPWORDS: [&str; 5] = ["of", "the", "a", "an", "and"];
const HONORIFICS: [&str; 4] = ["mr", "mrs", "dr", "prof"];
const DATE_FORMATS: [&str; 9] = [
    "%Y-%m-%d",
    "%Y/%m/%d",
    "%d.%m.%Y",
    "%m/%d/%Y",
    "%d %B %Y",
    "%d %b %Y",
    "%B %d, %Y",
    "%b %d, %Y",
    "%B %d %Y",
];

/// Which column-type distribution feeds the type-consistency signal.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TypeSource {
    /// Types aggregated from lookup candidates only.
    #[default]
    Lookup,
    /// The fused column type distribution.
    Fused,
}

/// Pr(e | column): each candidate scores the highest column-type
/// probability among its types.
pub fn signal_type_consistency(
    candidates: &CandidateDistribution,
    col_types: &CandidateDistribution,
    kg: &KnowledgeGraph,
) -> CandidateDistribution {
    if col_types.is_empty() {
        return CandidateDistribution::empty();
    }
    CandidateDistribution::from_scores(candidates.ids().map(|e| {
        let best = kg.types_of(e).iter().map(|t| col_types.get(t)).fold(0.0, f64::max);
        (e.to_string(), best)
    }))
}

/// Lowercased alphanumerics only.
fn fold(s: &str) -> String {
    s.chars()
        .filter(|c| c.is_alphanumeric())
        .flat_map(char::to_lowercase)
        .collect()
}

fn words(s: &str) -> impl Iterator<Item = &str> {
    s.split(|c: char| !c.is_alphanumeric()).filter(|w| !w.is_empty())
}

/// First letters of the label's words, stopwords skipped, lowercased.
pub fn initials(label: &str) -> String {
    words(label)
        .filter(|w| !STOPWORDS.contains(&w.to_lowercase().as_str()))
        .filter_map(|w| w.chars().next())
        .flat_map(char::to_lowercase)
        .collect()
}

/// ISO-8601 form of a date written in one of a few common patterns.
pub fn normalize_date(s: &str) -> Option<String> {
    let s = s.trim();
    DATE_FORMATS
        .iter()
        .find_map(|f| NaiveDate::parse_from_str(s, f).ok())
        .map(|d| d.format("%Y-%m-%d").to_string())
}

/// The text with one leading honorific removed.
pub fn strip_title(s: &str) -> &str {
    let t = s.trim_start();
    let first = t.split_whitespace().next().unwrap_or("");
    let bare = first.trim_end_matches('.').to_lowercase();
    if HONORIFICS.contains(&bare.as_str()) && t.len() > first.len() {
        t[first.len()..].trim_start()
    } else {
        t
    }
}

/// True when the cell abbreviates the label: initials, the same date in
/// another format, or equality once honorifics are stripped.
pub fn abbreviation_match(cell: &str, label: &str) -> bool {
    let folded = fold(cell);
    if folded.chars().count() >= 2 && initials(label) == folded {
        return true;
    }
    if let (Some(a), Some(b)) = (normalize_date(cell), normalize_date(label)) {
        if a == b {
            return true;
        }
    }
    let (a, b) = (fold(strip_title(cell)), fold(strip_title(label)));
    !a.is_empty() && a == b
}

/// Raw string score of one candidate: best label similarity, averaged with 1
/// when an abbreviation rule fires.
pub fn string_score(cell: &str, labels: &[String]) -> f64 {
    let cell = cell.trim();
    let lev = labels
        .iter()
        .map(|l| normalized_levenshtein_ci(cell, l.trim()))
        .fold(0.0, f64::max);
    if labels.iter().any(|l| abbreviation_match(cell, l)) {
        (lev + 1.0) / 2.0
    } else {
        lev
    }
}

/// Pr(e | cell) from [`string_score`] over each candidate's labels.
pub fn signal_string_similarity(
    candidates: &CandidateDistribution,
    cell: &str,
    kg: &KnowledgeGraph,
) -> CandidateDistribution {
    if cell.trim().is_empty() {
        return CandidateDistribution::empty();
    }
    CandidateDistribution::from_scores(
        candidates
            .ids()
            .map(|e| (e.to_string(), string_score(cell, &kg.display_labels(e)))),
    )
}

/// Another cell of the same row as seen by the row-context signal.
#[derive(Debug, Clone, Copy)]
pub enum RowCell<'a> {
    /// A cell of an entity column, given by its lookup candidates.
    Entity(&'a CandidateDistribution),
    /// A cell of a literal column.
    Literal(&'a str),
}

/// Mean agreement of `candidate` with the other cells of its row, each in
/// [0, 1]: best literal relevance for literal cells; 1 if the candidate is
/// linked (either direction) to any candidate of an entity cell. `None`
/// when the row has no other cells.
pub fn signal_row_context(candidate: &str, row: &[RowCell<'_>], kg: &KnowledgeGraph) -> Option<f64> {
    if row.is_empty() {
        return None;
    }
    let mut neighbours: Option<HashSet<&str>> = None;
    let mut total = 0.0;
    for cell in row {
        total += match cell {
            RowCell::Literal(value) => kg
                .literal_attributes(candidate)
                .iter()
                .map(|a| literal_relevance(&a.value, value))
                .fold(0.0, f64::max),
            RowCell::Entity(cands) => {
                let n = neighbours.get_or_insert_with(|| {
                    kg.links_from(candidate)
                        .iter()
                        .chain(kg.links_to(candidate))
                        .map(|(_, e)| e.as_str())
                        .collect()
                });
                if cands.ids().any(|e| n.contains(e)) {
                    1.0
                } else {
                    0.0
                }
            }
        };
    }
    Some(total / row.len() as f64)
}

/// Pr(e | row) over a cell's candidates; empty when the row has no other
/// cells or no candidate agrees with any.
pub fn row_context_distribution(
    candidates: &CandidateDistribution,
    row: &[RowCell<'_>],
    kg: &KnowledgeGraph,
) -> CandidateDistribution {
    let scores: BTreeMap<String, f64> = candidates
        .ids()
        .filter_map(|e| signal_row_context(e, row, kg).map(|s| (e.to_string(), s)))
        .collect();
    CandidateDistribution::from_scores(scores)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EntitySignalBundle {
    pub lookup: CandidateDistribution,
    pub type_consistency: CandidateDistribution,
    pub string_similarity: CandidateDistribution,
    pub row_context: CandidateDistribution,
    pub weights: [f64; 4],
    pub aggregation: Aggregation,
}

/// Pr(e | signals): weighted combination of the non-empty signals,
/// restricted to the lookup candidates. Empty if lookup found nothing.
pub fn reestimate(bundle: &EntitySignalBundle) -> Result<CandidateDistribution> {
    if bundle.lookup.is_empty() {
        return Ok(CandidateDistribution::empty());
    }
    let w = bundle.weights;
    let combined = combine_signals(
        &[
            Signal::new(w[0], &bundle.lookup),
            Signal::new(w[1], &bundle.type_consistency),
            Signal::new(w[2], &bundle.string_similarity),
            Signal::new(w[3], &bundle.row_context),
        ],
        bundle.aggregation,
        None,
    )?;
    Ok(combined.restricted(|e| bundle.lookup.contains(e)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::similarity::levenshtein;

    const KG: &str = r#"
<e:Tokyo> <rdf:type> <c:City> .
<e:Japan> <rdf:type> <c:Country> .
<c:City> <rdfs:subClassOf> <c:Place> .
<c:Country> <rdfs:subClassOf> <c:Place> .
<e:USA> <rdfs:label> "United States of America" .
<e:USA> <rdf:type> <c:Country> .
<e:Tokyo> <rdfs:label> "Tokyo" .
<e:Tokyo> <p:country> <e:Japan> .
<e:Tokyo> <p:population> "100" .
<e:Kyoto> <rdfs:label> "Kyoto" .
"#;

    fn kg() -> KnowledgeGraph {
        KnowledgeGraph::from_ntriples_str(KG).unwrap()
    }

    #[test]
    fn type_consistency() {
        let kg = kg();
        let one = CandidateDistribution::from_scores([("e:Tokyo", 1.0)]);
        let types = CandidateDistribution::from_scores([("c:City", 0.6), ("c:Country", 0.2), ("c:Other", 0.2)]);
        assert_eq!(signal_type_consistency(&one, &types, &kg).get("e:Tokyo"), 1.0);

        let two = CandidateDistribution::from_scores([("e:Tokyo", 1.0), ("e:Japan", 1.0)]);
        let d = signal_type_consistency(&two, &types, &kg);
        assert!((d.get("e:Tokyo") - 0.75).abs() < 1e-12);
        assert!((d.get("e:Japan") - 0.25).abs() < 1e-12);
        assert!(signal_type_consistency(&two, &CandidateDistribution::empty(), &kg).is_empty());
    }

    #[test]
    fn abbreviation_rules() {
        assert_eq!(initials("United States of America"), "usa");
        assert!(abbreviation_match("USA", "United States of America"));
        assert!(abbreviation_match("U.S.A.", "United States of America"));
        assert!(abbreviation_match("1990-01-05", "5 January 1990"));
        assert!(abbreviation_match("Dr. John Smith", "John Smith"));
        assert!(!abbreviation_match("T", "Tokyo"));
        assert!(!abbreviation_match("xyz", "abc"));
        assert_eq!(normalize_date("Jan 5, 1990").as_deref(), Some("1990-01-05"));
        assert_eq!(normalize_date("not a date"), None);
        assert_eq!(strip_title("Prof Ada Lovelace"), "Ada Lovelace");
        assert_eq!(strip_title("Drake"), "Drake");
    }

    #[test]
    fn string_similarity_examples() {
        let kg = kg();
        let one = CandidateDistribution::from_scores([("e:Tokyo", 1.0)]);
        assert_eq!(string_score("Tokyo", &kg.display_labels("e:Tokyo")), 1.0);
        assert_eq!(signal_string_similarity(&one, "Tokyo", &kg).get("e:Tokyo"), 1.0);

        let label = "United States of America";
        let lev = 1.0 - levenshtein("usa", &label.to_lowercase()) as f64 / label.chars().count() as f64;
        assert!((string_score("USA", &[label.to_string()]) - (lev + 1.0) / 2.0).abs() < 1e-12);

        assert_eq!(string_score("xyz", &["abc".to_string()]), 0.0);
    }

    #[test]
    fn row_context_examples() {
        let kg = kg();
        let japan = CandidateDistribution::from_scores([("e:Japan", 1.0)]);
        assert_eq!(
            signal_row_context("e:Tokyo", &[RowCell::Literal("100")], &kg),
            Some(1.0)
        );
        assert_eq!(
            signal_row_context("e:Tokyo", &[RowCell::Entity(&japan), RowCell::Literal("50")], &kg),
            Some(0.75)
        );
        assert_eq!(
            signal_row_context("e:Kyoto", &[RowCell::Literal("100")], &kg),
            Some(0.0)
        );
        assert_eq!(signal_row_context("e:Tokyo", &[], &kg), None);
        let tokyo = CandidateDistribution::from_scores([("e:Tokyo", 1.0)]);
        assert_eq!(
            signal_row_context("e:Japan", &[RowCell::Entity(&tokyo)], &kg),
            Some(1.0)
        );
    }

    fn bundle(s7: &[(&str, f64)], s9: &[(&str, f64)], weights: [f64; 4]) -> EntitySignalBundle {
        EntitySignalBundle {
            lookup: CandidateDistribution::from_scores(s7.iter().copied()),
            type_consistency: CandidateDistribution::empty(),
            string_similarity: CandidateDistribution::from_scores(s9.iter().copied()),
            row_context: CandidateDistribution::empty(),
            weights,
            aggregation: Aggregation::Sum,
        }
    }

    #[test]
    fn reestimate_examples() {
        let only = bundle(&[("e1", 0.6), ("e2", 0.4)], &[], [1.0; 4]);
        assert_eq!(reestimate(&only).unwrap(), only.lookup);

        let d = reestimate(&bundle(&[("e1", 0.6), ("e2", 0.4)], &[("e1", 1.0)], [1.0; 4])).unwrap();
        assert!((d.get("e1") - 0.8).abs() < 1e-12);
        assert!((d.get("e2") - 0.2).abs() < 1e-12);

        let d = reestimate(&bundle(
            &[("e1", 0.6), ("e2", 0.4)],
            &[("e2", 1.0)],
            [0.0, 0.0, 1.0, 0.0],
        ))
        .unwrap();
        assert_eq!(d.get("e2"), 1.0);

        let none = bundle(&[], &[("e1", 1.0)], [1.0; 4]);
        assert!(reestimate(&none).unwrap().is_empty());
    }
}
