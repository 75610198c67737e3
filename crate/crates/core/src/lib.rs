//! Annotating tables with knowledge graph entities, classes, and relations.
//!
//! Given a set of vertical relational tables (first row is the header) and a
//! knowledge graph loaded from N-Triples, the pipeline produces three kinds of
//! annotations:
//!
//! * **CEA**: a KG entity for a table cell,
//! * **CTA**: a KG class (plus its ancestors) for a column,
//! * **CPA**: a KG property for an ordered pair of columns.
//!
//! Every step produces [`CandidateDistribution`]s which later steps fuse by
//! weighted aggregation. The steps run in order:
//!
//! 1. [`ingest`]: decode text, tag cells with language / data type / NER type,
//!    then query the [`lookup`] services.
//! 2. [`lookup::fuse_and_normalize`]: rank scores, max-fusion, normalization.
//! 3. [`column_typing`] and [`numeric`]: column kinds and type candidates.
//! 4. [`relation`]: relation candidates for column pairs.
//! 5. [`reestimate`]: entity re-estimation from four signals.
//! 6. and 7. [`voting`]: final entities, then types and relations by majority vote.
//!
//! The [`harness`] module wires the steps together, reads and writes target and
//! annotation files, and scores submissions.

pub mod column_typing;
pub mod distribution;
pub mod error;
pub mod harness;
pub mod ingest;
pub mod kg;
pub mod lookup;
pub mod numeric;
pub mod reestimate;
pub mod relation;
pub mod similarity;
pub mod voting;

pub use distribution::CandidateDistribution;
pub use error::{Error, Result};
pub use kg::KnowledgeGraph;
