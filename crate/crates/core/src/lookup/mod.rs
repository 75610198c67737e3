//! Entity lookup over several services and fusion of their rankings into a
//! per-cell entity candidate distribution.
//!
//! Each service returns a ranked list of at most `alpha` entity ids. The
//! entity at zero-based rank `k` scores `alpha - k`; an entity's fused score
//! is its maximum over services, and the fused scores are divided by their
//! sum.

pub mod cache;
pub mod remote;

use std::collections::{BTreeMap, HashSet};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use tracing::warn;

use crate::distribution::CandidateDistribution;
use crate::error::Result;
use crate::ingest::LanguageGuess;
use crate::kg::KnowledgeGraph;

pub use cache::CachedService;
pub use remote::{LookupApiService, SparqlService, WikiApiService};

/// The ordered answer of one service to one query. Rank 0 is the most
/// relevant entity. Holds no duplicates.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ServiceRanking {
    pub service_id: String,
    pub query: String,
    pub entities: Vec<String>,
}

impl ServiceRanking {
    /// Drops repeated entities (keeping the first occurrence) and truncates
    /// to `limit`.
    pub fn new(service_id: impl Into<String>, query: impl Into<String>, entities: Vec<String>, limit: usize) -> Self {
        let mut seen = HashSet::new();
        let entities = entities
            .into_iter()
            .filter(|e| seen.insert(e.clone()))
            .take(limit)
            .collect();
        Self {
            service_id: service_id.into(),
            query: query.into(),
            entities,
        }
    }

    pub fn empty(service_id: impl Into<String>, query: impl Into<String>) -> Self {
        Self {
            service_id: service_id.into(),
            query: query.into(),
            entities: Vec::new(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.entities.is_empty()
    }
}

/// Raw score `alpha - rank` for each entity of the ranking. Entities ranked
/// at `alpha` or beyond are ignored, so every score is positive.
pub fn rank_score(ranking: &ServiceRanking, alpha: usize) -> BTreeMap<String, f64> {
    ranking
        .entities
        .iter()
        .take(alpha)
        .enumerate()
        .map(|(rank, e)| (e.clone(), (alpha - rank) as f64))
        .collect()
}

/// Max-fused raw scores over all rankings.
pub fn fuse_max(rankings: &[ServiceRanking], alpha: usize) -> BTreeMap<String, f64> {
    let mut fused: BTreeMap<String, f64> = BTreeMap::new();
    for r in rankings {
        for (e, s) in rank_score(r, alpha) {
            let slot = fused.entry(e).or_insert(s);
            if s > *slot {
                *slot = s;
            }
        }
    }
    fused
}

/// Pr(e | Q): max-fused rank scores normalized to sum to one.
pub fn fuse_and_normalize(rankings: &[ServiceRanking], alpha: usize) -> CandidateDistribution {
    CandidateDistribution::from_scores(fuse_max(rankings, alpha))
}

/// A backend that answers a text query with a relevance-ranked list of
/// entity ids.
pub trait LookupService: Send + Sync {
    fn id(&self) -> &str;

    fn search(&self, query: &str, limit: usize, language: &str) -> Result<Vec<String>>;
}

/// Label search over the loaded graph. Always available.
#[derive(Debug, Clone)]
pub struct LocalService {
    kg: Arc<KnowledgeGraph>,
}

impl LocalService {
    pub const ID: &'static str = "local";

    pub fn new(kg: Arc<KnowledgeGraph>) -> Self {
        Self { kg }
    }
}

impl LookupService for LocalService {
    fn id(&self) -> &str {
        Self::ID
    }

    fn search(&self, query: &str, limit: usize, language: &str) -> Result<Vec<String>> {
        Ok(self.kg.search_label(query, limit, language).entities)
    }
}

impl KnowledgeGraph {
    /// Ranks up to `limit` entities by label: exact case-insensitive matches,
    /// then prefix matches, then fuzzy matches (normalized Levenshtein
    /// similarity of at least 0.6). Labels of every language are searched.
    pub fn search_label(&self, query: &str, limit: usize, _language: &str) -> ServiceRanking {
        let entities = self
            .label_index()
            .search(query, limit)
            .into_iter()
            .map(|h| h.entity)
            .collect();
        ServiceRanking::new(LocalService::ID, query, entities, limit)
    }
}

/// Language passed to the services for one cell: the cell's own guess wins
/// when it is at least as confident as the table's.
pub fn choose_language<'a>(cell: &'a LanguageGuess, table: &'a LanguageGuess) -> &'a str {
    if !cell.fallback && cell.confidence >= table.confidence {
        &cell.code
    } else {
        &table.code
    }
}

/// Sends `query` to every service. A failing service contributes an empty
/// ranking and a warning; it never fails the call. Rankings come back in
/// service order.
pub fn query_services(
    query: &str,
    language: &str,
    services: &[Arc<dyn LookupService>],
    alpha: usize,
) -> Vec<ServiceRanking> {
    let run = |s: &Arc<dyn LookupService>| match s.search(query, alpha, language) {
        Ok(entities) => ServiceRanking::new(s.id(), query, entities, alpha),
        Err(e) => {
            warn!(service = s.id(), query, "lookup failed: {e}");
            ServiceRanking::empty(s.id(), query)
        }
    };
    if services.len() <= 1 {
        return services.iter().map(run).collect();
    }
    std::thread::scope(|scope| {
        let handles: Vec<_> = services.iter().map(|s| scope.spawn(move || run(s))).collect();
        handles
            .into_iter()
            .zip(services)
            .map(|(h, s)| h.join().unwrap_or_else(|_| ServiceRanking::empty(s.id(), query)))
            .collect()
    })
}
