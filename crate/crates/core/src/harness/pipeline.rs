//! The full annotation pipeline for one table, and a run over a directory
//! of tables.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use tracing::{info, warn};

use super::config::RunConfig;
use super::io::{AnnotationSet, Annotations, TableTargets, TargetSet};
use crate::column_typing::{
    aggregate_type_signals, classify_columns, signal_header_types, signal_lookup_types, signal_ner_types, ColumnClass,
    TypeSignalBundle,
};
use crate::distribution::CandidateDistribution;
use crate::error::{Error, Result};
use crate::ingest::{CellAnnotator, DataType, NerMapping, Table};
use crate::kg::KnowledgeGraph;
use crate::lookup::{choose_language, fuse_and_normalize, query_services, LookupService};
use crate::numeric::{
    infer_types_from_relations, label_numeric_column, KsLabeler, NumericLabeler, NumericProfile, RelationRanking,
};
use crate::reestimate::{
    reestimate, row_context_distribution, signal_string_similarity, signal_type_consistency, EntitySignalBundle,
    RowCell, TypeSource,
};
use crate::relation::{
    combine_numeric_relations, literal_relevance, relation_entity_entity, relation_entity_literal, ColumnPairRelations,
    PairKind,
};
use crate::similarity::{extract_number, parse_number};
use crate::voting::{finalize_cea, revote_cpa, revote_cta};

/// Lookup, type, string, and row signals of one cell.
type CellSignals = ((usize, usize), [CandidateDistribution; 4]);

/// Id, outcome, warnings, and milliseconds of one table.
type TableResult = (String, std::result::Result<TableOutput, Error>, Vec<String>, u128);

/// Every distribution produced while annotating one table, labeled by step
/// and coordinates.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub entries: Vec<(String, CandidateDistribution)>,
}

struct Recorder<'a>(Option<&'a mut Trace>);

impl Recorder<'_> {
    fn record(&mut self, label: impl FnOnce() -> String, d: &CandidateDistribution) {
        if let Some(t) = self.0.as_mut() {
            t.entries.push((label(), d.clone()));
        }
    }
}

/// Per-step counts for the run report.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepCounts {
    pub rows: usize,
    pub columns: usize,
    pub entity_columns: usize,
    pub numeric_columns: usize,
    pub lookup_queries: usize,
    pub fallback_queries: usize,
    pub cells_with_candidates: usize,
    pub candidates: usize,
    pub labeled_numeric_columns: usize,
    pub column_pairs: usize,
    pub cea_answers: usize,
    pub cta_answers: usize,
    pub cpa_answers: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TableOutput {
    pub annotations: AnnotationSet,
    pub counts: StepCounts,
    pub columns: Vec<ColumnClass>,
}

/// Shared, read-only state for annotating tables.
pub struct Annotator {
    kg: Arc<KnowledgeGraph>,
    profiles: Arc<Vec<NumericProfile>>,
    services: Vec<Arc<dyn LookupService>>,
    cells: CellAnnotator,
    labeler: Arc<dyn NumericLabeler>,
    cfg: RunConfig,
}

impl Annotator {
    /// Uses the services and NER mapping described by `cfg` (always
    /// including the local label search).
    pub fn new(kg: Arc<KnowledgeGraph>, profiles: Vec<NumericProfile>, cfg: RunConfig) -> Result<Self> {
        cfg.validate()?;
        let services = cfg.build_services(kg.clone())?;
        let mut cells = CellAnnotator::default();
        if let Some(path) = &cfg.ner_mapping {
            cells = cells.with_mapping(NerMapping::load(path)?);
        }
        Ok(Self {
            kg,
            profiles: Arc::new(profiles),
            services,
            cells,
            labeler: Arc::new(KsLabeler),
            cfg,
        })
    }

    pub fn with_services(mut self, services: Vec<Arc<dyn LookupService>>) -> Self {
        self.services = services;
        self
    }

    pub fn with_labeler(mut self, labeler: Arc<dyn NumericLabeler>) -> Self {
        self.labeler = labeler;
        self
    }

    pub fn with_cell_annotator(mut self, cells: CellAnnotator) -> Self {
        self.cells = cells;
        self
    }

    pub fn config(&self) -> &RunConfig {
        &self.cfg
    }

    pub fn graph(&self) -> &KnowledgeGraph {
        &self.kg
    }

    pub fn cell_annotator(&self) -> &CellAnnotator {
        &self.cells
    }

    pub fn annotate(&self, table: &Table, targets: &TableTargets) -> Result<TableOutput> {
        self.run(table, targets, Recorder(None))
    }

    /// Like [`Annotator::annotate`], also returning every intermediate
    /// distribution.
    pub fn annotate_traced(&self, table: &Table, targets: &TableTargets) -> Result<(TableOutput, Trace)> {
        let mut trace = Trace::default();
        let out = self.run(table, targets, Recorder(Some(&mut trace)))?;
        Ok((out, trace))
    }

    fn lookup_cell(&self, table: &Table, row: usize, col: usize) -> (CandidateDistribution, usize, bool) {
        let cells = &table.cells[row];
        let cell = &cells[col];
        let lang = choose_language(&cell.language, &table.language);
        let alpha = self.cfg.alpha;
        let rankings = query_services(&cell.value, lang, &self.services, alpha);
        let fused = fuse_and_normalize(&rankings, alpha);
        if !fused.is_empty() {
            return (fused, 1, false);
        }
        let context: Vec<&str> = cells
            .iter()
            .enumerate()
            .filter(|(j, c)| *j != col && !c.is_empty() && c.datatype == DataType::Text)
            .map(|(_, c)| c.value.as_str())
            .collect();
        if context.is_empty() {
            return (fused, 1, false);
        }
        let query = std::iter::once(cell.value.as_str())
            .chain(context)
            .collect::<Vec<_>>()
            .join(" ");
        let rankings = query_services(&query, lang, &self.services, alpha);
        (fuse_and_normalize(&rankings, alpha), 2, true)
    }

    fn run(&self, table: &Table, targets: &TableTargets, mut rec: Recorder<'_>) -> Result<TableOutput> {
        let kg = &*self.kg;
        let cfg = &self.cfg;
        let (n_rows, n_cols) = (table.n_rows(), table.n_cols());
        let mut counts = StepCounts {
            rows: n_rows.saturating_sub(1),
            columns: n_cols,
            ..StepCounts::default()
        };

        // Column kinds. Columns holding CEA targets are always entity columns.
        let mut columns = classify_columns(table);
        for &(_, col) in &targets.cea {
            if col < n_cols && !columns[col].is_entity() {
                columns[col] = ColumnClass::entity(col);
            }
        }
        let entity_cols: Vec<usize> = columns.iter().filter(|c| c.is_entity()).map(|c| c.column).collect();
        counts.entity_columns = entity_cols.len();

        // Lookup and fusion for every non-empty entity cell.
        let cells: Vec<(usize, usize)> = (1..n_rows)
            .flat_map(|r| entity_cols.iter().map(move |&c| (r, c)))
            .filter(|&(r, c)| !table.cells[r][c].is_empty())
            .collect();
        let mut by_query: HashMap<(&str, &str), Vec<(usize, usize)>> = HashMap::new();
        for &(r, c) in &cells {
            let cell = &table.cells[r][c];
            let lang = choose_language(&cell.language, &table.language);
            by_query.entry((cell.value.as_str(), lang)).or_default().push((r, c));
        }
        // One lookup per distinct (value, language) unless the fallback query
        // (which depends on the row) is needed.
        let firsts: Vec<(usize, usize)> = {
            let mut v: Vec<_> = by_query.values().map(|cs| cs[0]).collect();
            v.sort_unstable();
            v
        };
        let first_results: HashMap<(usize, usize), (CandidateDistribution, usize, bool)> = firsts
            .par_iter()
            .map(|&(r, c)| ((r, c), self.lookup_cell(table, r, c)))
            .collect();
        let mut lookups: Vec<Vec<CandidateDistribution>> = vec![vec![CandidateDistribution::empty(); n_cols]; n_rows];
        let mut refetch = Vec::new();
        for group in by_query.values() {
            let (dist, queries, fallback) = &first_results[&group[0]];
            counts.lookup_queries += queries;
            counts.fallback_queries += usize::from(*fallback);
            for &(r, c) in group {
                if *fallback && (r, c) != group[0] {
                    refetch.push((r, c));
                } else {
                    lookups[r][c] = dist.clone();
                }
            }
        }
        refetch.sort_unstable();
        let refetched: Vec<_> = refetch
            .par_iter()
            .map(|&(r, c)| self.lookup_cell(table, r, c))
            .collect();
        for (&(r, c), (dist, queries, fallback)) in refetch.iter().zip(refetched) {
            counts.lookup_queries += queries;
            counts.fallback_queries += usize::from(fallback);
            lookups[r][c] = dist;
        }
        for &(r, c) in &cells {
            rec.record(|| format!("lookup r{r} c{c}"), &lookups[r][c]);
            if !lookups[r][c].is_empty() {
                counts.cells_with_candidates += 1;
                counts.candidates += lookups[r][c].len();
            }
        }

        // Numeric columns.
        let mut numeric: BTreeMap<usize, RelationRanking> = BTreeMap::new();
        for c in columns.iter().filter(|c| c.is_numerical()) {
            counts.numeric_columns += 1;
            let values: Vec<f64> = table
                .column(c.column)
                .filter_map(|(_, cell)| parse_number(&cell.value).or_else(|| extract_number(&cell.value)))
                .collect();
            let ranking = label_numeric_column(c.column, &values, &self.profiles, &*self.labeler, cfg.alpha);
            rec.record(|| format!("numeric-relations c{}", c.column), &ranking.distribution);
            if !ranking.is_empty() {
                counts.labeled_numeric_columns += 1;
                numeric.insert(c.column, ranking);
            }
        }
        let numeric_types = infer_types_from_relations(&numeric.values().cloned().collect::<Vec<_>>(), kg);
        rec.record(|| "numeric-types".into(), &numeric_types);

        // Column types.
        let mut lookup_types: BTreeMap<usize, CandidateDistribution> = BTreeMap::new();
        let mut fused_types: BTreeMap<usize, CandidateDistribution> = BTreeMap::new();
        for &col in &entity_cols {
            let lookup = signal_lookup_types((1..n_rows).map(|r| &lookups[r][col]), kg);
            let ner = signal_ner_types(table.column(col).map(|(_, c)| c));
            let header = signal_header_types(table.header(col), kg);
            let bundle = TypeSignalBundle {
                numeric: numeric_types.clone(),
                lookup,
                ner,
                header,
                weights: cfg.weights.column_types(),
                beta: cfg.beta,
                aggregation: cfg.aggregation,
            };
            let fused = aggregate_type_signals(&bundle)?;
            rec.record(|| format!("types-lookup c{col}"), &bundle.lookup);
            rec.record(|| format!("types-ner c{col}"), &bundle.ner);
            rec.record(|| format!("types-header c{col}"), &bundle.header);
            rec.record(|| format!("types c{col}"), &fused);
            lookup_types.insert(col, bundle.lookup);
            fused_types.insert(col, fused);
        }

        // Column pairs: the subject column with every other column, plus
        // every targeted pair with an entity head.
        let mut pairs: BTreeSet<(usize, usize)> = BTreeSet::new();
        if let Some(&subject) = entity_cols.first() {
            pairs.extend((0..n_cols).filter(|&j| j != subject).map(|j| (subject, j)));
        }
        pairs.extend(
            targets
                .cpa
                .iter()
                .copied()
                .filter(|&(h, t)| h != t && h < n_cols && t < n_cols && columns[h].is_entity()),
        );
        counts.column_pairs = pairs.len();
        let (w_match, w_numeric) = cfg.weights.numeric_relations();
        let mut pair_relations: BTreeMap<(usize, usize), ColumnPairRelations> = BTreeMap::new();
        for &(h, t) in &pairs {
            let heads: Vec<&CandidateDistribution> = (1..n_rows).map(|r| &lookups[r][h]).collect();
            let tail_values: Vec<&str> = (1..n_rows).map(|r| table.cells[r][t].value.as_str()).collect();
            let literal = |kg| relation_entity_literal(&heads, &tail_values, kg, cfg.beta, cfg.pair_aggregation);
            let (kind, distribution) = if columns[t].is_entity() {
                let tails: Vec<&CandidateDistribution> = (1..n_rows).map(|r| &lookups[r][t]).collect();
                let d = relation_entity_entity(&heads, &tails, kg);
                if d.is_empty() {
                    (PairKind::EntityLiteral, literal(kg))
                } else {
                    (PairKind::EntityEntity, d)
                }
            } else {
                let el = literal(kg);
                let d = match numeric.get(&t) {
                    Some(num) => {
                        combine_numeric_relations(&el, &num.distribution, w_match, w_numeric, cfg.aggregation)?
                    }
                    None => el,
                };
                (PairKind::EntityLiteral, d)
            };
            rec.record(|| format!("relations c{h} c{t}"), &distribution);
            pair_relations.insert(
                (h, t),
                ColumnPairRelations {
                    head: h,
                    tail: t,
                    kind,
                    distribution,
                },
            );
        }

        // Entity re-estimation and final choice per cell.
        let empty = CandidateDistribution::empty();
        let estimates: Vec<Result<CellSignals>> = cells
            .par_iter()
            .filter(|&&(r, c)| !lookups[r][c].is_empty())
            .map(|&(r, c)| {
                let s7 = &lookups[r][c];
                let col_types = match cfg.s8_source {
                    TypeSource::Lookup => lookup_types.get(&c),
                    TypeSource::Fused => fused_types.get(&c),
                }
                .unwrap_or(&empty);
                let s8 = signal_type_consistency(s7, col_types, kg);
                let s9 = signal_string_similarity(s7, &table.cells[r][c].value, kg);
                let row: Vec<RowCell<'_>> = (0..n_cols)
                    .filter(|&j| j != c && !table.cells[r][j].is_empty())
                    .filter_map(|j| {
                        if columns[j].is_entity() {
                            (!lookups[r][j].is_empty()).then_some(RowCell::Entity(&lookups[r][j]))
                        } else {
                            Some(RowCell::Literal(table.cells[r][j].value.as_str()))
                        }
                    })
                    .collect();
                let s10 = row_context_distribution(s7, &row, kg);
                let bundle = EntitySignalBundle {
                    lookup: s7.clone(),
                    type_consistency: s8,
                    string_similarity: s9,
                    row_context: s10,
                    weights: cfg.weights.entity(),
                    aggregation: cfg.aggregation,
                };
                let fin = reestimate(&bundle)?;
                Ok((
                    (r, c),
                    [
                        bundle.type_consistency,
                        bundle.string_similarity,
                        bundle.row_context,
                        fin,
                    ],
                ))
            })
            .collect();
        let mut winners: BTreeMap<(usize, usize), (String, f64)> = BTreeMap::new();
        for est in estimates {
            let ((r, c), [s8, s9, s10, fin]) = est?;
            rec.record(|| format!("type-consistency r{r} c{c}"), &s8);
            rec.record(|| format!("string-similarity r{r} c{c}"), &s9);
            rec.record(|| format!("row-context r{r} c{c}"), &s10);
            rec.record(|| format!("entity r{r} c{c}"), &fin);
            if let Some(e) = finalize_cea(&fin, &lookups[r][c]) {
                let p = fin.get(&e);
                winners.insert((r, c), (e, p));
            }
        }

        let mut out = AnnotationSet::default();
        for &(r, c) in &targets.cea {
            if let Some((e, _)) = winners.get(&(r, c)) {
                out.cea.insert((r, c), e.clone());
            }
        }

        // Column types by vote over the chosen entities.
        for &col in &targets.cta {
            if col >= n_cols || !columns[col].is_entity() {
                continue;
            }
            let votes: Vec<(&str, f64)> = (1..n_rows)
                .filter_map(|r| winners.get(&(r, col)).map(|(e, p)| (e.as_str(), *p)))
                .collect();
            let classes = revote_cta(&votes, &fused_types[&col], kg, cfg.vote_weighting);
            if !classes.is_empty() {
                out.cta.insert(col, classes);
            }
        }

        // Column-pair relations by vote over the chosen entities.
        for &(h, t) in &targets.cpa {
            let Some(step4) = pair_relations.get(&(h, t)) else {
                continue;
            };
            let mut votes = Vec::new();
            for r in 1..n_rows {
                let Some((head, p)) = winners.get(&(r, h)) else {
                    continue;
                };
                let rels: BTreeSet<String> = match step4.kind {
                    PairKind::EntityEntity => match winners.get(&(r, t)) {
                        Some((tail, _)) => kg.relations_between(head, tail).clone(),
                        None => continue,
                    },
                    PairKind::EntityLiteral => {
                        let cell = table.cells[r][t].value.as_str();
                        if cell.is_empty() {
                            continue;
                        }
                        kg.literal_attributes(head)
                            .iter()
                            .filter(|a| literal_relevance(&a.value, cell) > cfg.beta)
                            .map(|a| a.relation.clone())
                            .collect()
                    }
                };
                votes.push((rels, cfg.vote_weighting.weight(*p)));
            }
            if let Some(r) = revote_cpa(&votes, &step4.distribution) {
                out.cpa.insert((h, t), r);
            }
        }

        counts.cea_answers = out.cea.len();
        counts.cta_answers = out.cta.len();
        counts.cpa_answers = out.cpa.len();
        Ok(TableOutput {
            annotations: out,
            counts,
            columns,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableReport {
    pub table: String,
    pub millis: u128,
    pub error: Option<String>,
    pub warnings: Vec<String>,
    pub counts: Option<StepCounts>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub config: RunConfig,
    pub tables: Vec<TableReport>,
    pub errors: usize,
    pub millis: u128,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub annotations: Annotations,
    pub report: RunReport,
}

/// Annotates every table referenced by `targets`, reading
/// `<tables_dir>/<table_id>.csv`. A table that cannot be read or annotated
/// is recorded in the report and skipped.
pub fn run_pipeline(tables_dir: &Path, targets: &TargetSet, annotator: &Annotator) -> Result<RunOutput> {
    let started = Instant::now();
    let by_table: Vec<(String, TableTargets)> = targets.by_table().into_iter().collect();
    let work = || -> Vec<TableResult> {
        by_table
            .par_iter()
            .map(|(id, t)| {
                let t0 = Instant::now();
                let path = tables_dir.join(format!("{id}.csv"));
                let mut warnings = Vec::new();
                let result = annotator.cells.ingest_table(&path).and_then(|table| {
                    warnings.clone_from(&table.warnings);
                    annotator.annotate(&table, t)
                });
                (id.clone(), result, warnings, t0.elapsed().as_millis())
            })
            .collect()
    };
    let results = match annotator.cfg.workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Config(e.to_string()))?
            .install(work),
        None => work(),
    };

    let mut annotations = Annotations::new();
    let mut tables = Vec::new();
    let mut errors = 0;
    for (id, result, warnings, millis) in results {
        match result {
            Ok(out) => {
                info!(table = %id, millis, cea = out.counts.cea_answers, "annotated");
                tables.push(TableReport {
                    table: id.clone(),
                    millis,
                    error: None,
                    warnings,
                    counts: Some(out.counts),
                });
                if !out.annotations.is_empty() {
                    annotations.insert(id, out.annotations);
                }
            }
            Err(e) => {
                warn!(table = %id, "skipped: {e}");
                errors += 1;
                tables.push(TableReport {
                    table: id,
                    millis,
                    error: Some(e.to_string()),
                    warnings,
                    counts: None,
                });
            }
        }
    }
    Ok(RunOutput {
        annotations,
        report: RunReport {
            config: annotator.cfg.clone(),
            tables,
            errors,
            millis: started.elapsed().as_millis(),
        },
    })
}
