//! Semantic labeling of numeric columns.
//!
//! Every KG relation with numeric literal objects gets a profile: the sorted
//! sample of its values. A column of numbers is compared against every
//! profile and the relations are ranked by distribution similarity. The
//! default labeler uses the two-sample Kolmogorov-Smirnov statistic; any
//! other [`NumericLabeler`] can be plugged in. Types are then inferred from
//! the subject classes of the ranked relations.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::IteratorRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::distribution::CandidateDistribution;
use crate::kg::KnowledgeGraph;

/// Columns with fewer numbers than this are not labeled.
pub const MIN_COLUMN_VALUES: usize = 10;
/// Largest sample kept per relation.
pub const PROFILE_CAP: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NumericProfile {
    pub relation: String,
    /// Sorted ascending, finite, nonempty.
    pub sample: Vec<f64>,
    /// Distinct `(entity, value)` pairs seen before sampling.
    pub population: usize,
}

/// One profile per relation with at least one numeric literal, sorted by
/// relation id. Values are deduplicated per `(entity, relation)`; relations
/// with more than `cap` values are reservoir-sampled with `seed`.
pub fn build_numeric_profiles(kg: &KnowledgeGraph, seed: u64, cap: usize) -> Vec<NumericProfile> {
    let mut values: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    for e in kg.entities() {
        let mut seen: BTreeSet<(&str, u64)> = BTreeSet::new();
        for attr in kg.literal_attributes(e) {
            let Some(v) = attr.as_number() else { continue };
            if !v.is_finite() {
                continue;
            }
            let v = if v == 0.0 { 0.0 } else { v };
            if seen.insert((attr.relation.as_str(), v.to_bits())) {
                values.entry(attr.relation.as_str()).or_default().push(v);
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    values
        .into_iter()
        .map(|(relation, vals)| {
            let population = vals.len();
            let mut sample = if population > cap {
                vals.into_iter().choose_multiple(&mut rng, cap)
            } else {
                vals
            };
            sample.sort_by(f64::total_cmp);
            NumericProfile {
                relation: relation.to_string(),
                sample,
                population,
            }
        })
        .collect()
}

/// Two-sample Kolmogorov-Smirnov statistic: the largest gap between the
/// empirical CDFs. Both inputs must be sorted ascending. Returns 1 if either
/// side is empty.
pub fn ks_statistic(a: &[f64], b: &[f64]) -> f64 {
    if a.is_empty() || b.is_empty() {
        return 1.0;
    }
    let (n, m) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    d
}

/// Ranks relations for a column of numbers. Implementations return at most
/// `limit` relation ids, most similar first.
pub trait NumericLabeler: Send + Sync {
    fn method(&self) -> &str;

    fn rank(&self, values: &[f64], profiles: &[NumericProfile], limit: usize) -> Vec<String>;
}

/// Orders relations by ascending KS statistic; ties go to the profile whose
/// sample size is closer to the column's, then to the smaller relation id.
#[derive(Debug, Clone, Copy, Default)]
pub struct KsLabeler;

impl NumericLabeler for KsLabeler {
    fn method(&self) -> &str {
        "ks-two-sample"
    }

    fn rank(&self, values: &[f64], profiles: &[NumericProfile], limit: usize) -> Vec<String> {
        let mut col: Vec<f64> = values.iter().copied().filter(|v| v.is_finite()).collect();
        col.sort_by(f64::total_cmp);
        let mut scored: Vec<(f64, usize, &str)> = profiles
            .iter()
            .map(|p| {
                (
                    ks_statistic(&col, &p.sample),
                    p.sample.len().abs_diff(col.len()),
                    p.relation.as_str(),
                )
            })
            .collect();
        scored.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(b.2)));
        scored.into_iter().take(limit).map(|(_, _, r)| r.to_string()).collect()
    }
}

/// Relations ranked for one numeric column. `relations[k]` has raw score
/// `alpha - k`; `distribution` is the normalized form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelationRanking {
    pub column: usize,
    pub alpha: usize,
    pub relations: Vec<String>,
    pub distribution: CandidateDistribution,
}

impl RelationRanking {
    pub fn empty(column: usize, alpha: usize) -> Self {
        Self {
            column,
            alpha,
            relations: Vec::new(),
            distribution: CandidateDistribution::empty(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.relations.is_empty()
    }

    pub fn raw_scores(&self) -> impl Iterator<Item = (&str, f64)> {
        self.relations
            .iter()
            .enumerate()
            .map(|(k, r)| (r.as_str(), (self.alpha - k) as f64))
    }
}

/// Pr(r | column). Empty when the column has fewer than
/// [`MIN_COLUMN_VALUES`] finite numbers or there are no profiles.
pub fn label_numeric_column(
    column: usize,
    values: &[f64],
    profiles: &[NumericProfile],
    labeler: &dyn NumericLabeler,
    alpha: usize,
) -> RelationRanking {
    let finite = values.iter().filter(|v| v.is_finite()).count();
    if finite < MIN_COLUMN_VALUES || profiles.is_empty() || alpha == 0 {
        return RelationRanking::empty(column, alpha);
    }
    let mut relations = labeler.rank(values, profiles, alpha);
    let mut seen = BTreeSet::new();
    relations.retain(|r| seen.insert(r.clone()));
    relations.truncate(alpha);
    let mut ranking = RelationRanking {
        column,
        alpha,
        relations,
        distribution: CandidateDistribution::empty(),
    };
    ranking.distribution = CandidateDistribution::from_scores(
        ranking
            .raw_scores()
            .map(|(r, s)| (r.to_string(), s))
            .collect::<Vec<_>>(),
    );
    ranking
}

/// Pr(t | numeric columns). A type's raw score is the best raw score of any
/// ranked relation (over all given columns) whose subjects carry that type;
/// the result is normalized jointly.
pub fn infer_types_from_relations(rankings: &[RelationRanking], kg: &KnowledgeGraph) -> CandidateDistribution {
    let mut best: BTreeMap<&str, f64> = BTreeMap::new();
    for ranking in rankings {
        for (r, s) in ranking.raw_scores() {
            for t in kg.types_for_relation(r) {
                let slot = best.entry(t.as_str()).or_insert(s);
                if s > *slot {
                    *slot = s;
                }
            }
        }
    }
    CandidateDistribution::from_scores(best.into_iter().map(|(t, s)| (t.to_string(), s)))
}
