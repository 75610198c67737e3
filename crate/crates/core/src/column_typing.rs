//! Column kinds and column type candidates.
//!
//! Columns are split into entity and literal columns by majority vote over
//! their data cells. Each entity column then gets four type signals (types
//! inferred from numeric columns, types of lookup candidates, NER-mapped
//! classes, header similarity to class labels) which are fused into
//! Pr(t | column).

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::distribution::{combine_signals, Aggregation, CandidateDistribution, Signal};
use crate::error::Result;
use crate::ingest::{CellContext, DataType, NerTag, Table};
use crate::kg::KnowledgeGraph;
use crate::similarity::normalized_levenshtein_ci;

/// Header-to-class-label similarity needed to keep a class.
pub const HEADER_FLOOR: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ColumnKind {
    Entity,
    Literal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LiteralSubkind {
    Numerical,
    Textual,
    OtherTag,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnClass {
    pub column: usize,
    pub kind: ColumnKind,
    /// Set iff `kind` is `Literal`.
    pub literal_subkind: Option<LiteralSubkind>,
}

impl ColumnClass {
    pub fn entity(column: usize) -> Self {
        Self {
            column,
            kind: ColumnKind::Entity,
            literal_subkind: None,
        }
    }

    pub fn is_entity(&self) -> bool {
        self.kind == ColumnKind::Entity
    }

    pub fn is_numerical(&self) -> bool {
        self.literal_subkind == Some(LiteralSubkind::Numerical)
    }
}

/// The vote one cell casts. Entity votes sort first so they win ties.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum CellVote {
    Entity,
    Literal(LiteralSubkind),
}

fn datatype_subkind(dt: DataType) -> LiteralSubkind {
    if dt.is_numerical() {
        return LiteralSubkind::Numerical;
    }
    match dt {
        DataType::Email | DataType::Url | DataType::PhoneNumber | DataType::CreditCardNumber => LiteralSubkind::Textual,
        _ => LiteralSubkind::OtherTag,
    }
}

fn cell_vote(cell: &CellContext) -> Option<CellVote> {
    if cell.is_empty() {
        return None;
    }
    if cell.datatype != DataType::Text {
        return Some(CellVote::Literal(datatype_subkind(cell.datatype)));
    }
    let tag = cell.entity_type;
    if tag == NerTag::Text || tag.is_entity_related() {
        Some(CellVote::Entity)
    } else if tag.is_numerical() {
        Some(CellVote::Literal(LiteralSubkind::Numerical))
    } else {
        Some(CellVote::Literal(LiteralSubkind::OtherTag))
    }
}

/// Kind of every column by majority vote over its non-empty data cells.
/// Text and entity-related NER tags vote for an entity column; every other
/// tag votes for a literal column of the matching subkind. Ties favor
/// entity. A column with no non-empty data cell is an entity column.
pub fn classify_columns(table: &Table) -> Vec<ColumnClass> {
    (0..table.n_cols())
        .map(|col| {
            let mut votes: BTreeMap<CellVote, usize> = BTreeMap::new();
            for (_, cell) in table.column(col) {
                if let Some(v) = cell_vote(cell) {
                    *votes.entry(v).or_insert(0) += 1;
                }
            }
            // First maximum in key order, so Entity wins ties.
            let winner = votes
                .iter()
                .fold(None::<(CellVote, usize)>, |best, (&v, &n)| match best {
                    Some((_, bn)) if bn >= n => best,
                    _ => Some((v, n)),
                })
                .map(|(v, _)| v)
                .unwrap_or(CellVote::Entity);
            match winner {
                CellVote::Entity => ColumnClass::entity(col),
                CellVote::Literal(sub) => ColumnClass {
                    column: col,
                    kind: ColumnKind::Literal,
                    literal_subkind: Some(sub),
                },
            }
        })
        .collect()
}

/// Pr(t | column, lookup): each cell spreads the mass of its candidates over
/// their types (with ancestors); cell scores are summed and normalized.
pub fn signal_lookup_types<'a, I>(cells: I, kg: &KnowledgeGraph) -> CandidateDistribution
where
    I: IntoIterator<Item = &'a CandidateDistribution>,
{
    let mut acc: BTreeMap<&str, f64> = BTreeMap::new();
    for cell in cells {
        for (e, p) in cell.iter() {
            for t in kg.types_of(e) {
                *acc.entry(t.as_str()).or_insert(0.0) += p;
            }
        }
    }
    CandidateDistribution::from_scores(acc.into_iter().map(|(t, s)| (t.to_string(), s)))
}

/// Pr(t | column, NER): vote share of each mapped class across cells.
pub fn signal_ner_types<'a, I>(cells: I) -> CandidateDistribution
where
    I: IntoIterator<Item = &'a CellContext>,
{
    let mut votes: BTreeMap<&str, f64> = BTreeMap::new();
    for cell in cells {
        for c in &cell.mapped_classes {
            *votes.entry(c.as_str()).or_insert(0.0) += 1.0;
        }
    }
    CandidateDistribution::from_scores(votes.into_iter().map(|(c, n)| (c.to_string(), n)))
}

/// Pr(t | header): normalized Levenshtein similarity between the header and
/// each class label, keeping classes at or above [`HEADER_FLOOR`].
pub fn signal_header_types(header: &str, kg: &KnowledgeGraph) -> CandidateDistribution {
    let header = header.trim();
    if header.is_empty() {
        return CandidateDistribution::empty();
    }
    let scores = kg.classes().iter().filter_map(|c| {
        let sim = kg
            .display_labels(c)
            .iter()
            .map(|l| normalized_levenshtein_ci(header, l.trim()))
            .fold(0.0, f64::max);
        (sim >= HEADER_FLOOR).then(|| (c.clone(), sim))
    });
    CandidateDistribution::from_scores(scores)
}

/// The four type signals of one entity column with their weights.
#[derive(Debug, Clone, PartialEq)]
pub struct TypeSignalBundle {
    /// Types inferred from the table's numeric columns.
    pub numeric: CandidateDistribution,
    pub lookup: CandidateDistribution,
    pub ner: CandidateDistribution,
    pub header: CandidateDistribution,
    pub weights: [f64; 4],
    pub beta: f64,
    pub aggregation: Aggregation,
}

/// Pr(t | column): per-candidate values below `beta` are dropped, signals
/// left empty are omitted, and the rest are combined and normalized.
pub fn aggregate_type_signals(bundle: &TypeSignalBundle) -> Result<CandidateDistribution> {
    let w = bundle.weights;
    combine_signals(
        &[
            Signal::new(w[0], &bundle.numeric),
            Signal::new(w[1], &bundle.lookup),
            Signal::new(w[2], &bundle.ner),
            Signal::new(w[3], &bundle.header),
        ],
        bundle.aggregation,
        Some(bundle.beta),
    )
}
