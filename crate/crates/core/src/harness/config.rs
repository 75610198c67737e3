//! Run configuration, read from a TOML file.
//!
//! ```toml
//! alpha = 100
//! beta = 0.5
//! aggregation = "sum"          # or "product"
//! pair_aggregation = "max"     # or "sum"
//! s8_source = "lookup"         # or "fused"
//! vote_weighting = "uniform"   # or "probability"
//! seed = 42
//! workers = 4
//! cache_dir = "cache"
//! ner_mapping = "ner_mapping.csv"  # ner_tag,class_iri rows; builtin if unset
//! weights.w1 = 1.0             # ... through weights.w10
//!
//! [services.dbpedia]
//! kind = "lookup-api"          # local | sparql | lookup-api | wiki-api
//! endpoint = "https://lookup.dbpedia.org/api/search"
//! timeout_secs = 10
//! enabled = true
//! ```
//!
//! The local label search over the loaded graph is always used; entries
//! with `kind = "local"` only exist so it can be listed explicitly.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::distribution::Aggregation;
use crate::error::{Error, Result};
use crate::kg::KnowledgeGraph;
use crate::lookup::{CachedService, LocalService, LookupApiService, LookupService, SparqlService, WikiApiService};
use crate::reestimate::TypeSource;
use crate::relation::PairAggregation;
use crate::voting::VoteWeighting;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Weights {
    pub w1: f64,
    pub w2: f64,
    pub w3: f64,
    pub w4: f64,
    pub w5: f64,
    pub w6: f64,
    pub w7: f64,
    pub w8: f64,
    pub w9: f64,
    pub w10: f64,
}

impl Default for Weights {
    fn default() -> Self {
        Self {
            w1: 1.0,
            w2: 1.0,
            w3: 1.0,
            w4: 1.0,
            w5: 1.0,
            w6: 1.0,
            w7: 1.0,
            w8: 1.0,
            w9: 1.0,
            w10: 1.0,
        }
    }
}

impl Weights {
    /// Column type signals: numeric, lookup, NER, header.
    pub fn column_types(&self) -> [f64; 4] {
        [self.w1, self.w2, self.w3, self.w4]
    }

    /// Value matching, numeric labeling.
    pub fn numeric_relations(&self) -> (f64, f64) {
        (self.w5, self.w6)
    }

    /// Entity signals: lookup, type consistency, string similarity, row.
    pub fn entity(&self) -> [f64; 4] {
        [self.w7, self.w8, self.w9, self.w10]
    }

    fn all(&self) -> [(&'static str, f64); 10] {
        [
            ("w1", self.w1),
            ("w2", self.w2),
            ("w3", self.w3),
            ("w4", self.w4),
            ("w5", self.w5),
            ("w6", self.w6),
            ("w7", self.w7),
            ("w8", self.w8),
            ("w9", self.w9),
            ("w10", self.w10),
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ServiceKind {
    Local,
    Sparql,
    LookupApi,
    WikiApi,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ServiceConfig {
    pub kind: ServiceKind,
    #[serde(default)]
    pub endpoint: Option<String>,
    #[serde(default = "default_timeout")]
    pub timeout_secs: f64,
    #[serde(default = "default_true")]
    pub enabled: bool,
}

fn default_timeout() -> f64 {
    10.0
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub alpha: usize,
    pub beta: f64,
    pub weights: Weights,
    pub aggregation: Aggregation,
    pub pair_aggregation: PairAggregation,
    pub s8_source: TypeSource,
    pub vote_weighting: VoteWeighting,
    pub services: BTreeMap<String, ServiceConfig>,
    pub cache_dir: Option<PathBuf>,
    /// CSV of `ner_tag,class_iri` rows replacing the builtin mapping.
    pub ner_mapping: Option<PathBuf>,
    pub seed: u64,
    /// Worker threads for table-level parallelism; `None` uses all cores.
    pub workers: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            alpha: 100,
            beta: 0.5,
            weights: Weights::default(),
            aggregation: Aggregation::Sum,
            pair_aggregation: PairAggregation::Max,
            s8_source: TypeSource::Lookup,
            vote_weighting: VoteWeighting::Uniform,
            services: BTreeMap::new(),
            cache_dir: None,
            ner_mapping: None,
            seed: 42,
            workers: None,
        }
    }
}

impl RunConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::from_toml_str(&text)?;
        if let Some(base) = path.parent() {
            for p in [cfg.cache_dir.as_mut(), cfg.ner_mapping.as_mut()].into_iter().flatten() {
                if p.is_relative() {
                    *p = base.join(&*p);
                }
            }
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.alpha == 0 {
            return bad("alpha must be at least 1".into());
        }
        if !(0.0..=1.0).contains(&self.beta) {
            return bad(format!("beta must lie in [0, 1], got {}", self.beta));
        }
        for (name, w) in self.weights.all() {
            if !w.is_finite() || w < 0.0 {
                return bad(format!("weights.{name} must be a non-negative number, got {w}"));
            }
        }
        let w = &self.weights;
        for (group, ws) in [
            ("w1..w4", &w.column_types()[..]),
            ("w5..w6", &[w.w5, w.w6][..]),
            ("w7..w10", &w.entity()[..]),
        ] {
            if ws.iter().all(|x| *x == 0.0) {
                return bad(format!("at least one of weights {group} must be positive"));
            }
        }
        if self.workers == Some(0) {
            return bad("workers must be at least 1".into());
        }
        for (id, s) in &self.services {
            if s.kind != ServiceKind::Local && s.enabled && s.endpoint.is_none() {
                return bad(format!("services.{id} needs an endpoint"));
            }
            if !(s.timeout_secs.is_finite() && s.timeout_secs > 0.0) {
                return bad(format!("services.{id}.timeout_secs must be positive"));
            }
        }
        Ok(())
    }

    /// The local service followed by every enabled remote service, each
    /// wrapped in the response cache when `cache_dir` is set.
    pub fn build_services(&self, kg: Arc<KnowledgeGraph>) -> Result<Vec<Arc<dyn LookupService>>> {
        let mut out: Vec<Arc<dyn LookupService>> = vec![Arc::new(LocalService::new(kg))];
        for (id, s) in &self.services {
            if !s.enabled || s.kind == ServiceKind::Local {
                continue;
            }
            let endpoint = s.endpoint.clone().unwrap_or_default();
            let timeout = Duration::from_secs_f64(s.timeout_secs);
            let svc: Arc<dyn LookupService> = match s.kind {
                ServiceKind::Sparql => Arc::new(SparqlService::new(id, endpoint, timeout)?),
                ServiceKind::LookupApi => Arc::new(LookupApiService::new(id, endpoint, timeout)?),
                ServiceKind::WikiApi => Arc::new(WikiApiService::new(id, endpoint, timeout)?),
                ServiceKind::Local => unreachable!(),
            };
            out.push(match &self.cache_dir {
                Some(dir) => Arc::new(CachedService::new(svc, dir.clone())),
                None => svc,
            });
        }
        Ok(out)
    }
}
