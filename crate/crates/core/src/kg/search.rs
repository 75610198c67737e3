//! Tiered label search: exact, then prefix, then fuzzy.
//!
//! Matching is case-insensitive. Fuzzy candidates come from a padded bigram
//! inverted index and are filtered with the q-gram count bound before the
//! exact Levenshtein check, so the tier returns exactly the labels whose
//! normalized similarity reaches [`FUZZY_FLOOR`].

use std::collections::{HashMap, HashSet};

use crate::similarity::levenshtein_chars;

/// Minimum normalized Levenshtein similarity for the fuzzy tier.
pub const FUZZY_FLOOR: f64 = 0.6;

const PAD_START: char = '\u{2}';
const PAD_END: char = '\u{3}';

#[derive(Debug, Clone)]
struct Entry {
    entity: String,
    folded: String,
    chars: Vec<char>,
}

#[derive(Debug, Clone, Default)]
pub struct LabelIndex {
    entries: Vec<Entry>,
    exact: HashMap<String, Vec<u32>>,
    /// Entry ids sorted by folded label, for prefix ranges.
    sorted: Vec<u32>,
    bigrams: HashMap<(char, char), Vec<(u32, u16)>>,
}

/// A ranked hit with the tier it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelHit {
    pub entity: String,
    pub tier: MatchTier,
    pub similarity: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum MatchTier {
    Exact,
    Prefix,
    Fuzzy,
}

fn bigram_counts(chars: &[char]) -> HashMap<(char, char), u16> {
    let mut m = HashMap::new();
    let padded: Vec<char> = std::iter::once(PAD_START)
        .chain(chars.iter().copied())
        .chain(std::iter::once(PAD_END))
        .collect();
    for w in padded.windows(2) {
        *m.entry((w[0], w[1])).or_insert(0u16) += 1;
    }
    m
}

impl LabelIndex {
    pub fn build(labels: Vec<(String, String)>) -> Self {
        let mut entries = Vec::with_capacity(labels.len());
        let mut seen = HashSet::new();
        for (entity, label) in labels {
            let folded = label.trim().to_lowercase();
            if folded.is_empty() || !seen.insert((entity.clone(), folded.clone())) {
                continue;
            }
            let chars = folded.chars().collect();
            entries.push(Entry { entity, folded, chars });
        }
        let mut exact: HashMap<String, Vec<u32>> = HashMap::new();
        let mut bigrams: HashMap<(char, char), Vec<(u32, u16)>> = HashMap::new();
        for (i, e) in entries.iter().enumerate() {
            exact.entry(e.folded.clone()).or_default().push(i as u32);
            for (g, c) in bigram_counts(&e.chars) {
                bigrams.entry(g).or_default().push((i as u32, c));
            }
        }
        let mut sorted: Vec<u32> = (0..entries.len() as u32).collect();
        sorted.sort_by(|&a, &b| entries[a as usize].folded.cmp(&entries[b as usize].folded));
        Self {
            entries,
            exact,
            sorted,
            bigrams,
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Up to `limit` entities, exact matches first, then prefix matches, then
    /// fuzzy matches. Within a tier: higher similarity first, then entity id.
    /// An entity appears once, in its best tier.
    pub fn search(&self, query: &str, limit: usize) -> Vec<LabelHit> {
        let q = query.trim().to_lowercase();
        if q.is_empty() || limit == 0 {
            return Vec::new();
        }
        let qc: Vec<char> = q.chars().collect();
        let mut best: HashMap<&str, (MatchTier, f64)> = HashMap::new();
        fn offer<'a>(best: &mut HashMap<&'a str, (MatchTier, f64)>, entity: &'a str, tier: MatchTier, sim: f64) {
            let slot = best.entry(entity).or_insert((tier, sim));
            if tier < slot.0 || (tier == slot.0 && sim > slot.1) {
                *slot = (tier, sim);
            }
        }

        if let Some(ids) = self.exact.get(&q) {
            for &i in ids {
                offer(&mut best, &self.entries[i as usize].entity, MatchTier::Exact, 1.0);
            }
        }

        let start = self
            .sorted
            .partition_point(|&i| self.entries[i as usize].folded.as_str() < q.as_str());
        for &i in &self.sorted[start..] {
            let e = &self.entries[i as usize];
            if !e.folded.starts_with(&q) {
                break;
            }
            if e.chars.len() > qc.len() {
                let sim = qc.len() as f64 / e.chars.len() as f64;
                offer(&mut best, &e.entity, MatchTier::Prefix, sim);
            }
        }

        let mut common: HashMap<u32, u32> = HashMap::new();
        for (g, qcount) in bigram_counts(&qc) {
            if let Some(postings) = self.bigrams.get(&g) {
                for &(i, c) in postings {
                    *common.entry(i).or_insert(0) += u32::from(qcount.min(c));
                }
            }
        }
        for (i, shared) in common {
            let e = &self.entries[i as usize];
            let longest = qc.len().max(e.chars.len());
            let max_dist = (0.4 * longest as f64 + 1e-9).floor() as usize;
            if qc.len().abs_diff(e.chars.len()) > max_dist {
                continue;
            }
            if (shared as usize) + 2 * max_dist < longest + 1 {
                continue;
            }
            let d = levenshtein_chars(&qc, &e.chars);
            let sim = 1.0 - d as f64 / longest as f64;
            if sim >= FUZZY_FLOOR {
                offer(&mut best, &e.entity, MatchTier::Fuzzy, sim);
            }
        }

        let mut hits: Vec<LabelHit> = best
            .into_iter()
            .map(|(entity, (tier, similarity))| LabelHit {
                entity: entity.to_string(),
                tier,
                similarity,
            })
            .collect();
        hits.sort_by(|a, b| {
            a.tier
                .cmp(&b.tier)
                .then_with(|| b.similarity.total_cmp(&a.similarity))
                .then_with(|| a.entity.cmp(&b.entity))
        });
        hits.truncate(limit);
        hits
    }
}
