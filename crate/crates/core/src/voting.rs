//! Final answers: the best entity per cell, then column types and column-pair
//! relations re-derived by majority vote over the chosen entities.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::distribution::CandidateDistribution;
use crate::kg::KnowledgeGraph;

/// Scores closer than this are treated as tied.
const TIE_EPS: f64 = 1e-12;

/// How much each chosen entity's vote counts.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VoteWeighting {
    #[default]
    Uniform,
    /// Weighted by the entity's final probability.
    Probability,
}

impl VoteWeighting {
    pub fn weight(self, probability: f64) -> f64 {
        match self {
            VoteWeighting::Uniform => 1.0,
            VoteWeighting::Probability => probability,
        }
    }
}

/// Entity with the highest final probability. Ties go to the higher lookup
/// probability, then to the smaller id.
pub fn finalize_cea(fin: &CandidateDistribution, lookup: &CandidateDistribution) -> Option<String> {
    let mut best: Option<(&str, f64)> = None;
    for (e, p) in fin.iter() {
        best = match best {
            None => Some((e, p)),
            Some((b, bp)) => {
                let better = if (p - bp).abs() > TIE_EPS {
                    p > bp
                } else {
                    let (l, bl) = (lookup.get(e), lookup.get(b));
                    if (l - bl).abs() > TIE_EPS {
                        l > bl
                    } else {
                        e < b
                    }
                };
                if better {
                    Some((e, p))
                } else {
                    Some((b, bp))
                }
            }
        };
    }
    best.map(|(e, _)| e.to_string())
}

/// Classes of `e` that are not an ancestor of another of its classes.
pub fn most_specific_types<'a>(e: &str, kg: &'a KnowledgeGraph) -> Vec<&'a String> {
    let types = kg.types_of(e);
    types
        .iter()
        .filter(|t| !types.iter().any(|u| kg.ancestors(u).contains(t.as_str())))
        .collect()
}

/// Highest score, then deepest class, then smallest id.
fn pick_class<'a>(scores: impl IntoIterator<Item = (&'a str, f64)>, kg: &KnowledgeGraph) -> Option<&'a str> {
    scores
        .into_iter()
        .fold(None::<(&str, f64)>, |best, (c, s)| match best {
            None => Some((c, s)),
            Some((b, bs)) => {
                let better = if (s - bs).abs() > TIE_EPS {
                    s > bs
                } else if kg.depth(c) != kg.depth(b) {
                    kg.depth(c) > kg.depth(b)
                } else {
                    c < b
                };
                Some(if better { (c, s) } else { (b, bs) })
            }
        })
        .map(|(c, _)| c)
}

/// Column type list: the class most voted for by the winners' most specific
/// types, followed by its ancestors root-ward. With no winners, falls back to
/// the column type distribution. Empty when both are empty.
pub fn revote_cta(
    winners: &[(&str, f64)],
    fallback: &CandidateDistribution,
    kg: &KnowledgeGraph,
    weighting: VoteWeighting,
) -> Vec<String> {
    let mut votes: BTreeMap<&str, f64> = BTreeMap::new();
    for &(e, p) in winners {
        for t in most_specific_types(e, kg) {
            *votes.entry(t.as_str()).or_insert(0.0) += weighting.weight(p);
        }
    }
    let chosen = if votes.values().any(|v| *v > 0.0) {
        pick_class(votes, kg)
    } else {
        pick_class(fallback.iter(), kg)
    };
    chosen.map(|c| kg.with_ancestors(c)).unwrap_or_default()
}

/// Column-pair relation by majority vote over per-row relation sets. Ties are
/// settled by the pair's relation distribution, then by id; with no votes,
/// the distribution's best relation wins.
pub fn revote_cpa(row_votes: &[(BTreeSet<String>, f64)], step4: &CandidateDistribution) -> Option<String> {
    let mut votes: BTreeMap<&str, f64> = BTreeMap::new();
    for (rels, w) in row_votes {
        for r in rels {
            *votes.entry(r.as_str()).or_insert(0.0) += w;
        }
    }
    let top = votes.values().copied().fold(0.0, f64::max);
    if top <= 0.0 {
        return step4.argmax().map(|(r, _)| r.to_string());
    }
    let tied: Vec<&str> = votes
        .iter()
        .filter(|(_, v)| (top - **v).abs() <= TIE_EPS)
        .map(|(r, _)| *r)
        .collect();
    tied.iter()
        .copied()
        .fold(None::<&str>, |best, r| match best {
            None => Some(r),
            Some(b) => {
                let (pr, pb) = (step4.get(r), step4.get(b));
                let better = if (pr - pb).abs() > TIE_EPS { pr > pb } else { r < b };
                Some(if better { r } else { b })
            }
        })
        .map(str::to_string)
}
