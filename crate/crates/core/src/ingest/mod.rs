//! Table reading and per-cell preprocessing.
//!
//! Every cell is decoded and then tagged with a language guess, a
//! [`DataType`], and a [`NerTag`] together with the KG classes the tag maps
//! to. The detectors are pluggable through [`CellAnnotator`].

pub mod datatype;
pub mod decode;
pub mod language;
pub mod ner;

use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};
use tracing::warn;

pub use datatype::{predict_datatype, DataType};
pub use decode::{clean_text, decode_text};
pub use language::{LanguageDetector, LanguageGuess, NgramLanguageDetector};
pub use ner::{EntityTagger, HeuristicTagger, NerMapping, NerTag};

use crate::error::{Error, Result};

/// One tagged cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellContext {
    pub value: String,
    pub language: LanguageGuess,
    pub datatype: DataType,
    pub entity_type: NerTag,
    /// KG classes mapped from `entity_type`; empty unless the tag is one of
    /// the entity-related categories.
    pub mapped_classes: BTreeSet<String>,
}

impl CellContext {
    pub fn is_empty(&self) -> bool {
        self.value.is_empty()
    }
}

/// A rectangular table. Row 0 is the header; rows `1..n_rows` hold data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub id: String,
    pub cells: Vec<Vec<CellContext>>,
    /// Language of all cell values concatenated.
    pub language: LanguageGuess,
    pub warnings: Vec<String>,
}

impl Table {
    pub fn n_rows(&self) -> usize {
        self.cells.len()
    }

    pub fn n_cols(&self) -> usize {
        self.cells.first().map_or(0, Vec::len)
    }

    pub fn cell(&self, row: usize, col: usize) -> Option<&CellContext> {
        self.cells.get(row).and_then(|r| r.get(col))
    }

    pub fn header(&self, col: usize) -> &str {
        self.cell(0, col).map_or("", |c| c.value.as_str())
    }

    /// Data rows, i.e. everything after the header, with their row index.
    pub fn data_rows(&self) -> impl Iterator<Item = (usize, &[CellContext])> {
        self.cells.iter().enumerate().skip(1).map(|(i, r)| (i, r.as_slice()))
    }

    /// The data cells of column `col`, header excluded.
    pub fn column(&self, col: usize) -> impl Iterator<Item = (usize, &CellContext)> {
        self.data_rows().map(move |(i, r)| (i, &r[col]))
    }
}

/// Holds the pluggable per-cell detectors.
pub struct CellAnnotator {
    pub language: Box<dyn LanguageDetector>,
    pub tagger: Box<dyn EntityTagger>,
    pub mapping: NerMapping,
}

impl Default for CellAnnotator {
    fn default() -> Self {
        Self {
            language: Box::new(NgramLanguageDetector::default()),
            tagger: Box::new(HeuristicTagger::builtin()),
            mapping: NerMapping::builtin(),
        }
    }
}

impl std::fmt::Debug for CellAnnotator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CellAnnotator")
            .field("mapping", &self.mapping)
            .finish_non_exhaustive()
    }
}

impl CellAnnotator {
    pub fn with_mapping(mut self, mapping: NerMapping) -> Self {
        self.mapping = mapping;
        self
    }

    pub fn predict_language(&self, text: &str) -> LanguageGuess {
        self.language.detect(text)
    }

    /// NER tag plus the classes it maps to.
    pub fn predict_entity_type(&self, value: &str) -> (NerTag, BTreeSet<String>) {
        let tag = self.tagger.tag(value);
        let classes = if tag.is_entity_related() {
            self.mapping.classes_for(tag)
        } else {
            BTreeSet::new()
        };
        (tag, classes)
    }

    pub fn annotate_cell(&self, value: String) -> CellContext {
        let (entity_type, mapped_classes) = self.predict_entity_type(&value);
        CellContext {
            language: self.language.detect(&value),
            datatype: predict_datatype(&value),
            entity_type,
            mapped_classes,
            value,
        }
    }

    /// Builds a table from raw rows. Short rows are padded with empty cells
    /// and a warning is recorded; the width is the longest row.
    pub fn build_table(&self, id: &str, rows: Vec<Vec<Vec<u8>>>) -> Result<Table> {
        let decoded = rows
            .into_iter()
            .map(|r| r.iter().map(|c| decode_text(c)).collect())
            .collect();
        self.build_table_from_strings(id, decoded)
    }

    pub fn build_table_from_strings(&self, id: &str, mut rows: Vec<Vec<String>>) -> Result<Table> {
        if rows.is_empty() {
            return Err(Error::EmptyTable(id.to_string()));
        }
        let width = rows.iter().map(Vec::len).max().unwrap_or(0);
        let mut warnings = Vec::new();
        for (i, row) in rows.iter_mut().enumerate() {
            if row.len() < width {
                let msg = format!("table {id}: row {i} has {} of {width} cells, padded", row.len());
                warn!("{msg}");
                warnings.push(msg);
                row.resize(width, String::new());
            }
            for v in row.iter_mut() {
                *v = clean_text(v);
            }
        }
        let joined = rows
            .iter()
            .flatten()
            .filter(|v| !v.is_empty())
            .cloned()
            .collect::<Vec<_>>()
            .join(" ");
        let language = self.language.detect(&joined);
        let cells = rows
            .into_iter()
            .map(|r| r.into_iter().map(|v| self.annotate_cell(v)).collect())
            .collect();
        Ok(Table {
            id: id.to_string(),
            cells,
            language,
            warnings,
        })
    }

    /// Reads a CSV file (RFC 4180 quoting, no header handling: the first
    /// record becomes row 0). The table id is the file stem.
    pub fn ingest_table(&self, path: &Path) -> Result<Table> {
        let id = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .from_reader(file);
        let mut rows = Vec::new();
        for rec in rdr.byte_records() {
            let rec = rec.map_err(|e| Error::Csv {
                path: path.to_path_buf(),
                source: e,
            })?;
            rows.push(rec.iter().map(<[u8]>::to_vec).collect());
        }
        self.build_table(&id, rows)
    }
}

/// Convenience wrapper using the default detectors.
pub fn ingest_table(path: &Path) -> Result<Table> {
    CellAnnotator::default().ingest_table(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_csv(contents: &[u8]) -> tempfile::NamedTempFile {
        let mut f = tempfile::Builder::new().suffix(".csv").tempfile().unwrap();
        f.write_all(contents).unwrap();
        f
    }

    #[test]
    fn three_by_two() {
        let f = write_csv(b"City,Country\nTokyo,Japan\nParis,France\n");
        let t = ingest_table(f.path()).unwrap();
        assert_eq!((t.n_rows(), t.n_cols()), (3, 2));
        assert_eq!(t.header(0), "City");
        assert_eq!(t.cell(1, 0).unwrap().value, "Tokyo");
        assert!(t.warnings.is_empty());
    }

    #[test]
    fn ragged_rows_padded() {
        let f = write_csv(b"a,b,c\n1,2\n3,4,5\n");
        let t = ingest_table(f.path()).unwrap();
        assert_eq!(t.n_cols(), 3);
        assert_eq!(t.cell(1, 2).unwrap().value, "");
        assert_eq!(t.cell(1, 2).unwrap().datatype, DataType::Text);
        assert_eq!(t.warnings.len(), 1);
    }

    #[test]
    fn quoted_fields_and_mojibake() {
        let f = write_csv("name,desc\n\"Caf\u{c3}\u{a9}, Ltd\",\"x\"\"y\"\n".as_bytes());
        let t = ingest_table(f.path()).unwrap();
        assert_eq!(t.cell(1, 0).unwrap().value, "Café, Ltd");
        assert_eq!(t.cell(1, 1).unwrap().value, "x\"y");
    }

    #[test]
    fn empty_file_is_error() {
        let f = write_csv(b"");
        assert!(matches!(ingest_table(f.path()), Err(Error::EmptyTable(_))));
    }

    #[test]
    fn missing_file_is_io_error() {
        assert!(matches!(
            ingest_table(Path::new("/nonexistent/t.csv")),
            Err(Error::Io { .. })
        ));
    }

    #[test]
    fn english_place_names() {
        let f = write_csv(b"City,Country\nNew York,United States\nLondon,United Kingdom\nThe Hague,the Netherlands\n");
        let t = ingest_table(f.path()).unwrap();
        assert_eq!(t.language.code, "en");
        assert!(t.language.confidence > 0.5);
    }

    #[test]
    fn every_cell_tagged_and_mapping_consistent() {
        let f = write_csv(b"City,Pop,When\nTokyo,13929286,1984\nBerlin,3644826,2001\n");
        let t = ingest_table(f.path()).unwrap();
        for (_, row) in t.data_rows() {
            for c in row {
                assert!(c.mapped_classes.is_empty() || c.entity_type.is_entity_related());
            }
        }
        let tokyo = t.cell(1, 0).unwrap();
        assert_eq!(tokyo.entity_type, NerTag::Gpe);
        assert!(tokyo.mapped_classes.contains("http://dbpedia.org/ontology/Place"));
        assert_eq!(t.cell(1, 1).unwrap().datatype, DataType::Number);
        assert_eq!(t.cell(1, 2).unwrap().entity_type, NerTag::Date);
    }
}
