//! Target and annotation files.
//!
//! All files are header-less CSV with zero-based indices; row 0 of a table
//! is its header row.
//!
//! | file          | target columns                  | annotation adds          |
//! |---------------|---------------------------------|--------------------------|
//! | CEA           | `table_id,col_id,row_id`        | `,entity_iri`            |
//! | CTA           | `table_id,col_id`               | `,class_iris` (space-separated, most specific first) |
//! | CPA           | `table_id,head_col_id,tail_col_id` | `,property_iri`       |

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::path::Path;

use serde::{Deserialize, Serialize};
use tracing::warn;

use crate::error::{Error, Result};

pub const CEA_FILE: &str = "cea.csv";
pub const CTA_FILE: &str = "cta.csv";
pub const CPA_FILE: &str = "cpa.csv";

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CeaTarget {
    pub table: String,
    pub col: usize,
    pub row: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CtaTarget {
    pub table: String,
    pub col: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CpaTarget {
    pub table: String,
    pub head: usize,
    pub tail: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TargetSet {
    pub cea: Vec<CeaTarget>,
    pub cta: Vec<CtaTarget>,
    pub cpa: Vec<CpaTarget>,
}

/// The targets of one table, as coordinates.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TableTargets {
    /// `(row, col)` pairs.
    pub cea: BTreeSet<(usize, usize)>,
    pub cta: BTreeSet<usize>,
    /// `(head, tail)` pairs.
    pub cpa: BTreeSet<(usize, usize)>,
}

impl TableTargets {
    pub fn is_empty(&self) -> bool {
        self.cea.is_empty() && self.cta.is_empty() && self.cpa.is_empty()
    }
}

impl TargetSet {
    pub fn is_empty(&self) -> bool {
        self.cea.is_empty() && self.cta.is_empty() && self.cpa.is_empty()
    }

    /// Every table id mentioned by any target.
    pub fn tables(&self) -> BTreeSet<String> {
        self.cea
            .iter()
            .map(|t| &t.table)
            .chain(self.cta.iter().map(|t| &t.table))
            .chain(self.cpa.iter().map(|t| &t.table))
            .cloned()
            .collect()
    }

    pub fn by_table(&self) -> BTreeMap<String, TableTargets> {
        let mut out: BTreeMap<String, TableTargets> = BTreeMap::new();
        for t in &self.cea {
            out.entry(t.table.clone()).or_default().cea.insert((t.row, t.col));
        }
        for t in &self.cta {
            out.entry(t.table.clone()).or_default().cta.insert(t.col);
        }
        for t in &self.cpa {
            out.entry(t.table.clone()).or_default().cpa.insert((t.head, t.tail));
        }
        out
    }

    /// Reads whichever target files are given.
    pub fn read(cea: Option<&Path>, cta: Option<&Path>, cpa: Option<&Path>) -> Result<Self> {
        Ok(Self {
            cea: cea.map(read_cea_targets).transpose()?.unwrap_or_default(),
            cta: cta.map(read_cta_targets).transpose()?.unwrap_or_default(),
            cpa: cpa.map(read_cpa_targets).transpose()?.unwrap_or_default(),
        })
    }
}

/// A parsed CSV record with its 1-based line number.
struct Record {
    line: u64,
    fields: Vec<String>,
}

fn read_records(path: &Path) -> Result<Vec<Record>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(file);
    let mut out = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| Error::Csv {
            path: path.to_path_buf(),
            source: e,
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        let fields: Vec<String> = rec.iter().map(|f| f.trim().to_string()).collect();
        if fields.iter().all(String::is_empty) {
            continue;
        }
        out.push(Record { line, fields });
    }
    Ok(out)
}

fn parse_err(path: &Path, line: u64, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line: line as usize,
        message: message.into(),
    }
}

fn index(path: &Path, rec: &Record, i: usize, what: &str) -> Result<usize> {
    rec.fields[i].parse().map_err(|_| {
        parse_err(
            path,
            rec.line,
            format!("{what} `{}` is not a non-negative integer", rec.fields[i]),
        )
    })
}

fn expect_fields(path: &Path, rec: &Record, n: usize) -> Result<()> {
    if rec.fields.len() != n {
        return Err(parse_err(
            path,
            rec.line,
            format!("expected {n} fields, found {}", rec.fields.len()),
        ));
    }
    if rec.fields[0].is_empty() {
        return Err(parse_err(path, rec.line, "empty table id"));
    }
    Ok(())
}

fn dedup<T: Ord + Clone>(path: &Path, items: Vec<T>) -> Vec<T> {
    let mut seen = BTreeSet::new();
    let before = items.len();
    let out: Vec<T> = items.into_iter().filter(|t| seen.insert(t.clone())).collect();
    if out.len() < before {
        warn!(path = %path.display(), "dropped {} duplicate rows", before - out.len());
    }
    out
}

pub fn read_cea_targets(path: &Path) -> Result<Vec<CeaTarget>> {
    let mut out = Vec::new();
    for rec in read_records(path)? {
        expect_fields(path, &rec, 3)?;
        out.push(CeaTarget {
            table: rec.fields[0].clone(),
            col: index(path, &rec, 1, "column")?,
            row: index(path, &rec, 2, "row")?,
        });
    }
    Ok(dedup(path, out))
}

pub fn read_cta_targets(path: &Path) -> Result<Vec<CtaTarget>> {
    let mut out = Vec::new();
    for rec in read_records(path)? {
        expect_fields(path, &rec, 2)?;
        out.push(CtaTarget {
            table: rec.fields[0].clone(),
            col: index(path, &rec, 1, "column")?,
        });
    }
    Ok(dedup(path, out))
}

pub fn read_cpa_targets(path: &Path) -> Result<Vec<CpaTarget>> {
    let mut out = Vec::new();
    for rec in read_records(path)? {
        expect_fields(path, &rec, 3)?;
        out.push(CpaTarget {
            table: rec.fields[0].clone(),
            head: index(path, &rec, 1, "head column")?,
            tail: index(path, &rec, 2, "tail column")?,
        });
    }
    Ok(dedup(path, out))
}

/// Answers for one table. Missing keys mean "no annotation".
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotationSet {
    /// `(row, col)` to entity id.
    pub cea: BTreeMap<(usize, usize), String>,
    /// Column to classes, most specific first.
    pub cta: BTreeMap<usize, Vec<String>>,
    /// `(head, tail)` to relation id.
    pub cpa: BTreeMap<(usize, usize), String>,
}

impl AnnotationSet {
    pub fn is_empty(&self) -> bool {
        self.cea.is_empty() && self.cta.is_empty() && self.cpa.is_empty()
    }
}

/// Annotations of a whole run, by table id.
pub type Annotations = BTreeMap<String, AnnotationSet>;

fn csv_writer(path: &Path) -> Result<csv::Writer<File>> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::WriterBuilder::new().has_headers(false).from_writer(file))
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> Error + '_ {
    move |e| Error::Csv {
        path: path.to_path_buf(),
        source: e,
    }
}

/// Writes `cea.csv`, `cta.csv`, and `cpa.csv` into `dir`.
pub fn write_annotations(dir: &Path, annotations: &Annotations) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;

    let path = dir.join(CEA_FILE);
    let mut w = csv_writer(&path)?;
    for (table, a) in annotations {
        for ((row, col), e) in &a.cea {
            w.write_record([table.as_str(), &col.to_string(), &row.to_string(), e])
                .map_err(csv_err(&path))?;
        }
    }
    w.flush().map_err(|e| Error::io(&path, e))?;

    let path = dir.join(CTA_FILE);
    let mut w = csv_writer(&path)?;
    for (table, a) in annotations {
        for (col, classes) in &a.cta {
            w.write_record([table.as_str(), &col.to_string(), &classes.join(" ")])
                .map_err(csv_err(&path))?;
        }
    }
    w.flush().map_err(|e| Error::io(&path, e))?;

    let path = dir.join(CPA_FILE);
    let mut w = csv_writer(&path)?;
    for (table, a) in annotations {
        for ((head, tail), r) in &a.cpa {
            w.write_record([table.as_str(), &head.to_string(), &tail.to_string(), r])
                .map_err(csv_err(&path))?;
        }
    }
    w.flush().map_err(|e| Error::io(&path, e))
}

/// CEA answers keyed by `(table, col, row)`. A gold file may list several
/// acceptable entities separated by spaces.
pub type CeaAnswers = BTreeMap<(String, usize, usize), Vec<String>>;
/// CTA answers keyed by `(table, col)`.
pub type CtaAnswers = BTreeMap<(String, usize), Vec<String>>;
/// CPA answers keyed by `(table, head, tail)`.
pub type CpaAnswers = BTreeMap<(String, usize, usize), Vec<String>>;

fn split_ids(path: &Path, rec: &Record, i: usize) -> Result<Vec<String>> {
    let ids: Vec<String> = rec.fields[i].split_whitespace().map(str::to_string).collect();
    if ids.is_empty() {
        return Err(parse_err(path, rec.line, "empty answer"));
    }
    Ok(ids)
}

fn insert_answer<K: Ord>(map: &mut BTreeMap<K, Vec<String>>, path: &Path, line: u64, key: K, ids: Vec<String>) {
    match map.entry(key) {
        std::collections::btree_map::Entry::Occupied(_) => {
            warn!(path = %path.display(), line, "duplicate answer ignored");
        }
        std::collections::btree_map::Entry::Vacant(slot) => {
            slot.insert(ids);
        }
    }
}

pub fn read_cea_answers(path: &Path) -> Result<CeaAnswers> {
    let mut out = CeaAnswers::new();
    for rec in read_records(path)? {
        expect_fields(path, &rec, 4)?;
        let key = (
            rec.fields[0].clone(),
            index(path, &rec, 1, "column")?,
            index(path, &rec, 2, "row")?,
        );
        let ids = split_ids(path, &rec, 3)?;
        insert_answer(&mut out, path, rec.line, key, ids);
    }
    Ok(out)
}

pub fn read_cta_answers(path: &Path) -> Result<CtaAnswers> {
    let mut out = CtaAnswers::new();
    for rec in read_records(path)? {
        expect_fields(path, &rec, 3)?;
        let key = (rec.fields[0].clone(), index(path, &rec, 1, "column")?);
        let ids = split_ids(path, &rec, 2)?;
        insert_answer(&mut out, path, rec.line, key, ids);
    }
    Ok(out)
}

pub fn read_cpa_answers(path: &Path) -> Result<CpaAnswers> {
    let mut out = CpaAnswers::new();
    for rec in read_records(path)? {
        expect_fields(path, &rec, 4)?;
        let key = (
            rec.fields[0].clone(),
            index(path, &rec, 1, "head column")?,
            index(path, &rec, 2, "tail column")?,
        );
        let ids = split_ids(path, &rec, 3)?;
        insert_answer(&mut out, path, rec.line, key, ids);
    }
    Ok(out)
}

/// Reads the three annotation files written by [`write_annotations`].
pub fn read_annotations(dir: &Path) -> Result<Annotations> {
    let mut out = Annotations::new();
    for ((table, col, row), ids) in read_cea_answers(&dir.join(CEA_FILE))? {
        out.entry(table).or_default().cea.insert((row, col), ids.join(" "));
    }
    for ((table, col), ids) in read_cta_answers(&dir.join(CTA_FILE))? {
        out.entry(table).or_default().cta.insert(col, ids);
    }
    for ((table, head, tail), ids) in read_cpa_answers(&dir.join(CPA_FILE))? {
        out.entry(table).or_default().cpa.insert((head, tail), ids.join(" "));
    }
    Ok(out)
}
