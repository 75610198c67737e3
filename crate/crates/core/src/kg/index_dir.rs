//! Prebuilt index directory.
//!
//! ```text
//! <dir>/manifest.json   format version, seed, numeric method, counts
//! <dir>/graph.nt        the triples, re-serialized
//! <dir>/profiles.json   numeric relation profiles
//! ```
//!
//! Loading re-parses `graph.nt` (the in-memory indexes are cheap to rebuild)
//! but reuses the stored profiles, which are the expensive, seed-dependent
//! part.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::KnowledgeGraph;
use crate::error::{Error, Result};
use crate::numeric::{build_numeric_profiles, NumericLabeler, NumericProfile, PROFILE_CAP};

pub const FORMAT_VERSION: u32 = 1;
pub const MANIFEST_FILE: &str = "manifest.json";
pub const GRAPH_FILE: &str = "graph.nt";
pub const PROFILES_FILE: &str = "profiles.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub format_version: u32,
    pub seed: u64,
    pub similarity_method: String,
    pub profile_cap: usize,
    pub counts: BTreeMap<String, usize>,
}

#[derive(Debug, Clone)]
pub struct KgIndex {
    pub manifest: Manifest,
    pub graph: KnowledgeGraph,
    pub profiles: Vec<NumericProfile>,
}

/// Builds numeric profiles for `graph` and writes the whole index to `dir`.
pub fn write_index(dir: &Path, graph: &KnowledgeGraph, seed: u64, labeler: &dyn NumericLabeler) -> Result<Manifest> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let profiles = build_numeric_profiles(graph, seed, PROFILE_CAP);
    let mut counts: BTreeMap<String, usize> = graph.stats().into_iter().map(|(k, v)| (k.to_string(), v)).collect();
    counts.insert("numeric_profiles".into(), profiles.len());
    let manifest = Manifest {
        format_version: FORMAT_VERSION,
        seed,
        similarity_method: labeler.method().to_string(),
        profile_cap: PROFILE_CAP,
        counts,
    };

    let graph_path = dir.join(GRAPH_FILE);
    let file = File::create(&graph_path).map_err(|e| Error::io(&graph_path, e))?;
    let mut w = BufWriter::new(file);
    graph
        .write_ntriples(&mut w)
        .and_then(|_| w.flush())
        .map_err(|e| Error::io(&graph_path, e))?;

    write_json(&dir.join(PROFILES_FILE), &profiles)?;
    write_json(&dir.join(MANIFEST_FILE), &manifest)?;
    Ok(manifest)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer(&mut w, value)?;
    w.flush().map_err(|e| Error::io(path, e))
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_reader(BufReader::new(file)).map_err(|e| Error::Index {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

/// Loads an index written by [`write_index`].
pub fn load_index(dir: &Path) -> Result<KgIndex> {
    let manifest: Manifest = read_json(&dir.join(MANIFEST_FILE))?;
    if manifest.format_version != FORMAT_VERSION {
        return Err(Error::Index {
            path: dir.to_path_buf(),
            message: format!(
                "index format {} is not supported (expected {FORMAT_VERSION})",
                manifest.format_version
            ),
        });
    }
    let graph = KnowledgeGraph::load(&dir.join(GRAPH_FILE))?;
    let profiles = read_json(&dir.join(PROFILES_FILE))?;
    Ok(KgIndex {
        manifest,
        graph,
        profiles,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::KsLabeler;

    #[test]
    fn round_trip() {
        let nt = "<e:A> <rdfs:label> \"A\" .\n<e:A> <p:pop> \"10\" .\n<e:A> <rdf:type> <c:City> .\n";
        let kg = KnowledgeGraph::from_ntriples_str(nt).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let m = write_index(dir.path(), &kg, 11, &KsLabeler).unwrap();
        assert_eq!(m.counts["numeric_profiles"], 1);
        assert_eq!(m.similarity_method, "ks-two-sample");
        let idx = load_index(dir.path()).unwrap();
        assert_eq!(idx.manifest, m);
        assert_eq!(idx.graph.triples(), kg.triples());
        assert_eq!(idx.profiles[0].sample, [10.0]);
    }

    #[test]
    fn version_mismatch_and_missing_dir() {
        let kg = KnowledgeGraph::default();
        let dir = tempfile::tempdir().unwrap();
        let mut m = write_index(dir.path(), &kg, 1, &KsLabeler).unwrap();
        m.format_version = 99;
        write_json(&dir.path().join(MANIFEST_FILE), &m).unwrap();
        assert!(matches!(load_index(dir.path()), Err(Error::Index { .. })));
        assert!(matches!(load_index(&dir.path().join("nope")), Err(Error::Io { .. })));
    }
}
