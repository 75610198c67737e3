//! Normalized candidate distributions and the weighted signal combination
//! shared by column typing, relation estimation, and entity re-estimation.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A probability map from candidate ids (entities, classes, or relations)
/// to scores in `[0, 1]` summing to one. May be empty.
///
/// Only strictly positive scores are kept, so every present candidate has
/// nonzero mass.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CandidateDistribution {
    items: BTreeMap<String, f64>,
}

impl CandidateDistribution {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Builds a distribution from raw non-negative scores by dividing each by
    /// their sum. Duplicate ids accumulate. Non-positive and non-finite
    /// scores are dropped.
    pub fn from_scores<I, K>(scores: I) -> Self
    where
        I: IntoIterator<Item = (K, f64)>,
        K: Into<String>,
    {
        let mut items: BTreeMap<String, f64> = BTreeMap::new();
        for (k, v) in scores {
            if v.is_finite() && v > 0.0 {
                *items.entry(k.into()).or_insert(0.0) += v;
            }
        }
        let total: f64 = items.values().sum();
        if total > 0.0 {
            for v in items.values_mut() {
                *v /= total;
            }
        }
        Self { items }
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// Probability of `id`, 0 when absent.
    pub fn get(&self, id: &str) -> f64 {
        self.items.get(id).copied().unwrap_or(0.0)
    }

    pub fn contains(&self, id: &str) -> bool {
        self.items.contains_key(id)
    }

    /// Iterates in candidate id order.
    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.items.iter().map(|(k, v)| (k.as_str(), *v))
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.items.keys().map(String::as_str)
    }

    pub fn total(&self) -> f64 {
        self.items.values().sum()
    }

    /// Highest-probability candidate; equal scores resolve to the
    /// lexicographically smallest id.
    pub fn argmax(&self) -> Option<(&str, f64)> {
        let mut best: Option<(&str, f64)> = None;
        for (k, v) in self.iter() {
            match best {
                Some((_, bv)) if v <= bv => {}
                _ => best = Some((k, v)),
            }
        }
        best
    }

    /// Candidates sorted by descending probability, ties by id.
    pub fn ranked(&self) -> Vec<(&str, f64)> {
        let mut v: Vec<_> = self.iter().collect();
        v.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        v
    }

    /// Keeps only the candidates accepted by `keep`, renormalizing.
    pub fn restricted<F: Fn(&str) -> bool>(&self, keep: F) -> Self {
        Self::from_scores(self.iter().filter(|(k, _)| keep(k)).map(|(k, v)| (k.to_string(), v)))
    }
}

impl<K: Into<String>> FromIterator<(K, f64)> for CandidateDistribution {
    fn from_iter<T: IntoIterator<Item = (K, f64)>>(iter: T) -> Self {
        Self::from_scores(iter)
    }
}

/// How surviving signals are combined.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Aggregation {
    /// `sum_k w_k * Pr_k(x)` over surviving signals.
    #[default]
    Sum,
    /// `prod_k w_k * Pr_k(x)`; a candidate missing from any surviving signal
    /// gets zero.
    Product,
}

/// One weighted input to [`combine_signals`].
#[derive(Debug, Clone, Copy)]
pub struct Signal<'a> {
    pub weight: f64,
    pub dist: &'a CandidateDistribution,
}

impl<'a> Signal<'a> {
    pub fn new(weight: f64, dist: &'a CandidateDistribution) -> Self {
        Self { weight, dist }
    }
}

/// Combines weighted signals into one normalized distribution.
///
/// With `beta = Some(b)`, every per-candidate probability below `b` is zeroed
/// first; a signal left with no mass is omitted. Empty signals are always
/// omitted. Errors when the weights are negative, non-finite, or all zero.
pub fn combine_signals(signals: &[Signal<'_>], mode: Aggregation, beta: Option<f64>) -> Result<CandidateDistribution> {
    if signals.iter().any(|s| !s.weight.is_finite() || s.weight < 0.0) {
        return Err(Error::Config("signal weights must be finite and non-negative".into()));
    }
    if !signals.is_empty() && signals.iter().all(|s| s.weight == 0.0) {
        return Err(Error::Config("at least one signal weight must be positive".into()));
    }

    let surviving: Vec<(f64, BTreeMap<&str, f64>)> = signals
        .iter()
        .map(|s| {
            let kept: BTreeMap<&str, f64> = s.dist.iter().filter(|(_, p)| beta.is_none_or(|b| *p >= b)).collect();
            (s.weight, kept)
        })
        .filter(|(_, kept)| !kept.is_empty())
        .collect();

    if surviving.is_empty() {
        return Ok(CandidateDistribution::empty());
    }

    let mut out: BTreeMap<&str, f64> = BTreeMap::new();
    match mode {
        Aggregation::Sum => {
            for (w, kept) in &surviving {
                for (k, p) in kept {
                    *out.entry(k).or_insert(0.0) += w * p;
                }
            }
        }
        Aggregation::Product => {
            let (first_w, first) = &surviving[0];
            'cand: for (k, p) in first {
                let mut acc = first_w * p;
                for (w, kept) in &surviving[1..] {
                    match kept.get(k) {
                        Some(q) => acc *= w * q,
                        None => continue 'cand,
                    }
                }
                out.insert(k, acc);
            }
        }
    }
    Ok(CandidateDistribution::from_scores(
        out.into_iter().map(|(k, v)| (k.to_string(), v)),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dist(pairs: &[(&str, f64)]) -> CandidateDistribution {
        CandidateDistribution::from_scores(pairs.iter().map(|(k, v)| (k.to_string(), *v)))
    }

    #[test]
    fn normalizes_and_drops_zeros() {
        let d = dist(&[("a", 3.0), ("b", 1.0), ("c", 0.0), ("d", f64::NAN)]);
        assert_eq!(d.len(), 2);
        assert_eq!(d.get("a"), 0.75);
        assert_eq!(d.get("b"), 0.25);
        assert_eq!(d.get("c"), 0.0);
        assert!(CandidateDistribution::from_scores(Vec::<(String, f64)>::new()).is_empty());
    }

    #[test]
    fn argmax_tie_is_lexicographic() {
        let d = dist(&[("b", 1.0), ("a", 1.0)]);
        assert_eq!(d.argmax().unwrap().0, "a");
        assert_eq!(d.ranked()[0].0, "a");
    }

    #[test]
    fn beta_thresholding_then_sum() {
        let s = dist(&[("A", 0.6), ("B", 0.4)]);
        let out = combine_signals(
            &[Signal::new(1.0, &s), Signal::new(1.0, &s)],
            Aggregation::Sum,
            Some(0.5),
        )
        .unwrap();
        assert_eq!(out, dist(&[("A", 1.0)]));
    }

    #[test]
    fn zero_weights_rejected() {
        let s = dist(&[("A", 1.0)]);
        assert!(combine_signals(&[Signal::new(0.0, &s)], Aggregation::Sum, None).is_err());
        assert!(combine_signals(&[Signal::new(-1.0, &s)], Aggregation::Sum, None).is_err());
    }

    #[test]
    fn product_requires_presence_in_every_signal() {
        let a = dist(&[("x", 0.5), ("y", 0.5)]);
        let b = dist(&[("x", 1.0)]);
        let out = combine_signals(
            &[Signal::new(1.0, &a), Signal::new(2.0, &b)],
            Aggregation::Product,
            None,
        )
        .unwrap();
        assert_eq!(out, dist(&[("x", 1.0)]));
    }

    #[test]
    fn all_signals_omitted_gives_empty() {
        let a = dist(&[("x", 0.3), ("y", 0.3), ("z", 0.4)]);
        let out = combine_signals(&[Signal::new(1.0, &a)], Aggregation::Sum, Some(0.5)).unwrap();
        assert!(out.is_empty());
    }
}
