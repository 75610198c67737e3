//! Named-entity type tagging for cells and the tag-to-class mapping.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::io::Read;
use std::path::Path;
use std::str::FromStr;
use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use super::datatype::{predict_datatype, DataType};
use crate::error::{Error, Result};

/// The eighteen OntoNotes entity categories plus `Text` for untagged cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum NerTag {
    Person,
    Norp,
    Fac,
    Org,
    Gpe,
    Loc,
    Product,
    Event,
    WorkOfArt,
    Law,
    Language,
    Date,
    Time,
    Percent,
    Money,
    Quantity,
    Ordinal,
    Cardinal,
    Text,
}

impl NerTag {
    pub const ALL: [NerTag; 19] = [
        NerTag::Person,
        NerTag::Norp,
        NerTag::Fac,
        NerTag::Org,
        NerTag::Gpe,
        NerTag::Loc,
        NerTag::Product,
        NerTag::Event,
        NerTag::WorkOfArt,
        NerTag::Law,
        NerTag::Language,
        NerTag::Date,
        NerTag::Time,
        NerTag::Percent,
        NerTag::Money,
        NerTag::Quantity,
        NerTag::Ordinal,
        NerTag::Cardinal,
        NerTag::Text,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            NerTag::Person => "PERSON",
            NerTag::Norp => "NORP",
            NerTag::Fac => "FAC",
            NerTag::Org => "ORG",
            NerTag::Gpe => "GPE",
            NerTag::Loc => "LOC",
            NerTag::Product => "PRODUCT",
            NerTag::Event => "EVENT",
            NerTag::WorkOfArt => "WORK_OF_ART",
            NerTag::Law => "LAW",
            NerTag::Language => "LANGUAGE",
            NerTag::Date => "DATE",
            NerTag::Time => "TIME",
            NerTag::Percent => "PERCENT",
            NerTag::Money => "MONEY",
            NerTag::Quantity => "QUANTITY",
            NerTag::Ordinal => "ORDINAL",
            NerTag::Cardinal => "CARDINAL",
            NerTag::Text => "TEXT",
        }
    }

    /// The eleven categories that denote entities and may map to KG classes.
    pub fn is_entity_related(self) -> bool {
        matches!(
            self,
            NerTag::Person
                | NerTag::Norp
                | NerTag::Fac
                | NerTag::Org
                | NerTag::Gpe
                | NerTag::Loc
                | NerTag::Product
                | NerTag::Event
                | NerTag::WorkOfArt
                | NerTag::Law
                | NerTag::Language
        )
    }

    pub fn is_numerical(self) -> bool {
        matches!(
            self,
            NerTag::Percent | NerTag::Money | NerTag::Quantity | NerTag::Cardinal
        )
    }
}

impl fmt::Display for NerTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for NerTag {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let upper = s.trim().to_ascii_uppercase();
        NerTag::ALL
            .into_iter()
            .find(|t| t.as_str() == upper)
            .ok_or_else(|| format!("unknown NER tag {s:?}"))
    }
}

/// Maps entity-related NER tags to KG class ids.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct NerMapping {
    classes: BTreeMap<NerTag, BTreeSet<String>>,
}

const DEFAULT_MAPPING: &str = include_str!("../../data/ner_mapping.csv");

impl NerMapping {
    /// The mapping shipped with the crate (DBpedia ontology classes).
    pub fn builtin() -> Self {
        Self::from_reader(DEFAULT_MAPPING.as_bytes(), Path::new("<builtin ner_mapping.csv>"))
            .expect("builtin mapping is valid")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::from_reader(file, path)
    }

    /// Parses `ner_tag,class_iri` rows (with that header line). A tag may
    /// appear on several rows.
    pub fn from_reader<R: Read>(reader: R, origin: &Path) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let mut classes: BTreeMap<NerTag, BTreeSet<String>> = BTreeMap::new();
        for (i, rec) in rdr.records().enumerate() {
            let line = i + 2;
            let rec = rec.map_err(|e| Error::Csv {
                path: origin.to_path_buf(),
                source: e,
            })?;
            let parse_err = |message: String| Error::Parse {
                path: origin.to_path_buf(),
                line,
                message,
            };
            if rec.len() != 2 {
                return Err(parse_err(format!("expected 2 fields, found {}", rec.len())));
            }
            let tag: NerTag = rec[0].parse().map_err(parse_err)?;
            if !tag.is_entity_related() {
                return Err(parse_err(format!(
                    "{tag} is not an entity-related tag and cannot map to a class"
                )));
            }
            if rec[1].is_empty() {
                return Err(parse_err("empty class iri".into()));
            }
            classes.entry(tag).or_default().insert(rec[1].to_string());
        }
        Ok(Self { classes })
    }

    pub fn classes_for(&self, tag: NerTag) -> BTreeSet<String> {
        self.classes.get(&tag).cloned().unwrap_or_default()
    }

    pub fn mapped_tags(&self) -> impl Iterator<Item = NerTag> + '_ {
        self.classes.keys().copied()
    }
}

/// A named-entity tagger for single cell values.
pub trait EntityTagger: Send + Sync {
    fn tag(&self, value: &str) -> NerTag;
}

const DEFAULT_GAZETTEER: &str = include_str!("../../data/gazetteer.csv");

const ORG_SUFFIXES: &[&str] = &[
    "inc",
    "corp",
    "corporation",
    "ltd",
    "llc",
    "plc",
    "gmbh",
    "ag",
    "sa",
    "co",
    "company",
    "group",
    "university",
    "college",
    "institute",
    "bank",
    "fc",
    "club",
    "association",
    "society",
    "foundation",
    "party",
    "airlines",
    "records",
    "agency",
    "council",
    "school",
];
const FAC_KEYWORDS: &[&str] = &[
    "airport",
    "bridge",
    "stadium",
    "tower",
    "station",
    "museum",
    "cathedral",
    "church",
    "castle",
    "palace",
    "arena",
    "hospital",
    "temple",
    "dam",
    "highway",
];
const LOC_KEYWORDS: &[&str] = &[
    "river",
    "mountain",
    "mount",
    "lake",
    "ocean",
    "sea",
    "island",
    "islands",
    "valley",
    "desert",
    "bay",
    "peninsula",
    "forest",
    "gulf",
];
const GPE_KEYWORDS: &[&str] = &[
    "city",
    "county",
    "province",
    "republic",
    "kingdom",
    "state",
    "prefecture",
    "district",
    "municipality",
    "town",
    "village",
];
const EVENT_KEYWORDS: &[&str] = &[
    "war",
    "olympics",
    "championship",
    "cup",
    "festival",
    "revolution",
    "election",
    "battle",
    "games",
    "tournament",
    "expo",
];
const LAW_KEYWORDS: &[&str] = &["act", "treaty", "constitution", "amendment", "convention", "code"];
const HONORIFICS: &[&str] = &["mr", "mrs", "ms", "dr", "prof", "sir", "lady", "lord", "st"];
const GIVEN_NAMES: &[&str] = &[
    "john",
    "james",
    "robert",
    "michael",
    "william",
    "david",
    "richard",
    "joseph",
    "thomas",
    "charles",
    "mary",
    "patricia",
    "jennifer",
    "linda",
    "elizabeth",
    "barbara",
    "susan",
    "jessica",
    "sarah",
    "karen",
    "george",
    "paul",
    "peter",
    "anna",
    "maria",
    "hans",
    "pierre",
    "jean",
    "carlos",
    "juan",
    "luis",
    "giovanni",
    "marco",
    "hiroshi",
    "yuki",
    "ali",
    "ahmed",
];
const CONNECTORS: &[&str] = &["of", "the", "and", "de", "la", "von", "van", "del", "du", "for", "&"];

static YEAR: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^(1[0-9]{3}|20[0-9]{2}|2100)$").unwrap());
static CLOCK: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?i)^\d{1,2}(?::\d{2}){1,2}\s*(?:am|pm)?$|^\d{1,2}\s*(?:am|pm)$").unwrap());
static PERCENT: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?i)^[-+]?\d+(?:[.,]\d+)?\s*(?:%|percent|per cent)$").unwrap());

/// Gazetteer lookup followed by pattern and keyword heuristics.
#[derive(Debug, Clone)]
pub struct HeuristicTagger {
    gazetteer: HashMap<String, NerTag>,
}

impl Default for HeuristicTagger {
    fn default() -> Self {
        Self::builtin()
    }
}

impl HeuristicTagger {
    /// Tagger with the shipped gazetteer of countries, cities, regions,
    /// nationalities, and languages.
    pub fn builtin() -> Self {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .from_reader(DEFAULT_GAZETTEER.as_bytes());
        let entries = rdr
            .records()
            .map(|r| r.expect("builtin gazetteer is valid csv"))
            .map(|r| (r[0].to_string(), r[1].parse().expect("builtin gazetteer tag")));
        Self::with_gazetteer(entries)
    }

    /// Tagger with no gazetteer entries.
    pub fn empty() -> Self {
        Self {
            gazetteer: HashMap::new(),
        }
    }

    pub fn with_gazetteer<I, S>(entries: I) -> Self
    where
        I: IntoIterator<Item = (S, NerTag)>,
        S: AsRef<str>,
    {
        Self {
            gazetteer: entries
                .into_iter()
                .map(|(s, t)| (s.as_ref().to_lowercase(), t))
                .collect(),
        }
    }

    pub fn insert(&mut self, surface: &str, tag: NerTag) {
        self.gazetteer.insert(surface.to_lowercase(), tag);
    }
}

impl EntityTagger for HeuristicTagger {
    fn tag(&self, value: &str) -> NerTag {
        let v = value.trim();
        if v.is_empty() {
            return NerTag::Text;
        }
        if let Some(&t) = self.gazetteer.get(&v.to_lowercase()) {
            return t;
        }
        if YEAR.is_match(v) {
            return NerTag::Date;
        }
        if CLOCK.is_match(v) {
            return NerTag::Time;
        }
        if PERCENT.is_match(v) {
            return NerTag::Percent;
        }
        match predict_datatype(v) {
            DataType::Time | DataType::Duration => return NerTag::Date,
            DataType::AmountOfMoney => return NerTag::Money,
            DataType::Quantity | DataType::Distance | DataType::Volume | DataType::Temperature => {
                return NerTag::Quantity
            }
            DataType::Ordinal => return NerTag::Ordinal,
            DataType::Number => return NerTag::Cardinal,
            _ => {}
        }
        capitalized_phrase_tag(v).unwrap_or(NerTag::Text)
    }
}

fn capitalized_phrase_tag(v: &str) -> Option<NerTag> {
    let words: Vec<&str> = v.split_whitespace().collect();
    let is_cap = |w: &str| w.chars().next().is_some_and(char::is_uppercase);
    let folded: Vec<String> = words
        .iter()
        .map(|w| {
            w.trim_matches(|c: char| !c.is_alphanumeric() && c != '&')
                .to_lowercase()
        })
        .collect();
    let all_capitalized = words
        .iter()
        .zip(&folded)
        .all(|(w, f)| is_cap(w) || CONNECTORS.contains(&f.as_str()));
    if words.is_empty() || !all_capitalized || !is_cap(words[0]) {
        return None;
    }
    let has = |list: &[&str]| folded.iter().any(|f| list.contains(&f.as_str()));
    let last = folded.last().map(String::as_str).unwrap_or("");
    if ORG_SUFFIXES.contains(&last) || (words.len() > 1 && has(&["university", "bank", "institute"])) {
        return Some(NerTag::Org);
    }
    if has(FAC_KEYWORDS) {
        return Some(NerTag::Fac);
    }
    if has(LOC_KEYWORDS) {
        return Some(NerTag::Loc);
    }
    if has(EVENT_KEYWORDS) {
        return Some(NerTag::Event);
    }
    if words.len() > 1 && has(LAW_KEYWORDS) {
        return Some(NerTag::Law);
    }
    if has(GPE_KEYWORDS) {
        return Some(NerTag::Gpe);
    }
    if HONORIFICS.contains(&folded[0].as_str()) && words.len() > 1 {
        return Some(NerTag::Person);
    }
    let name_shaped = (2..=3).contains(&words.len())
        && words.iter().all(|w| {
            w.chars()
                .all(|c| c.is_alphabetic() || c == '-' || c == '.' || c == '\'')
        });
    if name_shaped && GIVEN_NAMES.contains(&folded[0].as_str()) {
        return Some(NerTag::Person);
    }
    None
}
