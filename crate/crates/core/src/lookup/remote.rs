//! HTTP lookup adapters: a SPARQL endpoint, a JSON lookup API, and a wiki
//! search API with redirect and interlanguage-link resolution.
//!
//! Every adapter uses a blocking client with a per-request timeout. Response
//! parsing lives in free functions so it can be tested without a network.

use std::collections::HashMap;
use std::time::Duration;

use reqwest::blocking::Client;
use serde_json::Value;

use super::LookupService;
use crate::error::{Error, Result};

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(10);
pub const DBPEDIA_RESOURCE: &str = "http://dbpedia.org/resource/";

fn client(timeout: Duration) -> Result<Client> {
    Client::builder()
        .timeout(timeout)
        .user_agent(concat!("tabmatch/", env!("CARGO_PKG_VERSION")))
        .build()
        .map_err(|e| Error::Service {
            service: "http".into(),
            message: e.to_string(),
        })
}

fn service_err(id: &str, e: impl std::fmt::Display) -> Error {
    Error::Service {
        service: id.to_string(),
        message: e.to_string(),
    }
}

fn valid_language(code: &str) -> bool {
    !code.is_empty() && code.len() <= 12 && code.chars().all(|c| c.is_ascii_alphanumeric() || c == '-')
}

fn get_json(client: &Client, id: &str, url: &str, query: &[(&str, String)]) -> Result<Value> {
    let resp = client
        .get(url)
        .query(query)
        .header("Accept", "application/json")
        .send()
        .map_err(|e| service_err(id, e))?;
    if !resp.status().is_success() {
        return Err(service_err(id, format!("HTTP {}", resp.status())));
    }
    resp.json().map_err(|e| service_err(id, e))
}

/// Exact-label lookup against a SPARQL endpoint. Matches labels in the
/// query language and in English.
pub struct SparqlService {
    id: String,
    endpoint: String,
    client: Client,
}

impl SparqlService {
    pub fn new(id: impl Into<String>, endpoint: impl Into<String>, timeout: Duration) -> Result<Self> {
        Ok(Self {
            id: id.into(),
            endpoint: endpoint.into(),
            client: client(timeout)?,
        })
    }
}

fn sparql_string(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '"' => out.push_str("\\\""),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

pub fn sparql_label_query(query: &str, language: &str, limit: usize) -> String {
    let lit = sparql_string(query);
    let lang = if valid_language(language) { language } else { "en" };
    let mut q =
        format!("SELECT DISTINCT ?s WHERE {{ {{ ?s <http://www.w3.org/2000/01/rdf-schema#label> {lit}@{lang} }}");
    if lang != "en" {
        q.push_str(&format!(
            " UNION {{ ?s <http://www.w3.org/2000/01/rdf-schema#label> {lit}@en }}"
        ));
    }
    q.push_str(&format!(" }} LIMIT {limit}"));
    q
}

/// Subject IRIs from a `application/sparql-results+json` body.
pub fn parse_sparql_results(body: &Value) -> Vec<String> {
    body["results"]["bindings"]
        .as_array()
        .into_iter()
        .flatten()
        .filter_map(|b| {
            let s = &b["s"];
            (s["type"] == "uri").then(|| s["value"].as_str().map(str::to_string))?
        })
        .collect()
}

impl LookupService for SparqlService {
    fn id(&self) -> &str {
        &self.id
    }

    fn search(&self, query: &str, limit: usize, language: &str) -> Result<Vec<String>> {
        let resp = self
            .client
            .post(&self.endpoint)
            .header("Accept", "application/sparql-results+json")
            .form(&[("query", sparql_label_query(query, language, limit))])
            .send()
            .map_err(|e| service_err(&self.id, e))?;
        if !resp.status().is_success() {
            return Err(service_err(&self.id, format!("HTTP {}", resp.status())));
        }
        let body: Value = resp.json().map_err(|e| service_err(&self.id, e))?;
        Ok(parse_sparql_results(&body))
    }
}

/// Keyword lookup API returning JSON (`docs[].resource[]` or
/// `results[].uri`).
pub struct LookupApiService {
    id: String,
    endpoint: String,
    client: Client,
}

impl LookupApiService {
    pub fn new(id: impl Into<String>, endpoint: impl Into<String>, timeout: Duration) -> Result<Self> {
        Ok(Self {
            id: id.into(),
            endpoint: endpoint.into(),
            client: client(timeout)?,
        })
    }
}

pub fn parse_lookup_results(body: &Value) -> Vec<String> {
    let mut out = Vec::new();
    if let Some(docs) = body["docs"].as_array() {
        for d in docs {
            match &d["resource"] {
                Value::Array(rs) => out.extend(rs.iter().filter_map(|r| r.as_str().map(str::to_string)).take(1)),
                Value::String(r) => out.push(r.clone()),
                _ => {}
            }
        }
    } else if let Some(results) = body["results"].as_array() {
        out.extend(results.iter().filter_map(|r| r["uri"].as_str().map(str::to_string)));
    }
    out
}

impl LookupService for LookupApiService {
    fn id(&self) -> &str {
        &self.id
    }

    fn search(&self, query: &str, limit: usize, language: &str) -> Result<Vec<String>> {
        let body = get_json(
            &self.client,
            &self.id,
            &self.endpoint,
            &[
                ("query", query.to_string()),
                ("maxResults", limit.to_string()),
                ("format", "JSON".to_string()),
                ("lang", language.to_string()),
            ],
        )?;
        Ok(parse_lookup_results(&body))
    }
}

/// Full-text search on a MediaWiki API. Titles are resolved through
/// redirects and, for non-English wikis, through English interlanguage
/// links, then mapped to resource IRIs under `resource_base`. Titles with no
/// English counterpart are dropped.
pub struct WikiApiService {
    id: String,
    /// Endpoint with an optional `{lang}` placeholder.
    endpoint_template: String,
    resource_base: String,
    client: Client,
}

impl WikiApiService {
    pub fn new(id: impl Into<String>, endpoint_template: impl Into<String>, timeout: Duration) -> Result<Self> {
        Ok(Self {
            id: id.into(),
            endpoint_template: endpoint_template.into(),
            resource_base: DBPEDIA_RESOURCE.to_string(),
            client: client(timeout)?,
        })
    }

    pub fn with_resource_base(mut self, base: impl Into<String>) -> Self {
        self.resource_base = base.into();
        self
    }

    fn endpoint(&self, language: &str) -> String {
        let lang = if valid_language(language) { language } else { "en" };
        self.endpoint_template.replace("{lang}", lang)
    }
}

pub fn parse_wiki_search(body: &Value) -> Vec<String> {
    body["query"]["search"]
        .as_array()
        .into_iter()
        .flatten()
        .filter_map(|h| h["title"].as_str().map(str::to_string))
        .collect()
}

/// Maps each requested title to its canonical English title using the
/// `redirects`, `normalized`, and `langlinks` parts of a `query` response.
/// English wikis map titles to their redirect targets.
pub fn resolve_wiki_titles(titles: &[String], body: &Value, english: bool) -> Vec<Option<String>> {
    let pairs = |key: &str| -> HashMap<String, String> {
        body["query"][key]
            .as_array()
            .into_iter()
            .flatten()
            .filter_map(|m| Some((m["from"].as_str()?.to_string(), m["to"].as_str()?.to_string())))
            .collect()
    };
    let normalized = pairs("normalized");
    let redirects = pairs("redirects");
    let mut en_link: HashMap<String, String> = HashMap::new();
    if let Some(pages) = body["query"]["pages"].as_object() {
        for page in pages.values() {
            let Some(title) = page["title"].as_str() else { continue };
            let link = page["langlinks"]
                .as_array()
                .into_iter()
                .flatten()
                .find(|l| l["lang"] == "en")
                .and_then(|l| l["*"].as_str().or_else(|| l["title"].as_str()));
            if let Some(l) = link {
                en_link.insert(title.to_string(), l.to_string());
            }
        }
    }
    titles
        .iter()
        .map(|t| {
            let t = normalized.get(t).unwrap_or(t);
            let t = redirects.get(t).unwrap_or(t);
            if english {
                Some(t.clone())
            } else {
                en_link.get(t).cloned()
            }
        })
        .collect()
}

pub fn title_to_resource(base: &str, title: &str) -> String {
    format!("{base}{}", title.trim().replace(' ', "_"))
}

impl LookupService for WikiApiService {
    fn id(&self) -> &str {
        &self.id
    }

    fn search(&self, query: &str, limit: usize, language: &str) -> Result<Vec<String>> {
        let endpoint = self.endpoint(language);
        let found = get_json(
            &self.client,
            &self.id,
            &endpoint,
            &[
                ("action", "query".into()),
                ("list", "search".into()),
                ("srsearch", query.to_string()),
                ("srlimit", limit.clamp(1, 500).to_string()),
                ("format", "json".into()),
            ],
        )?;
        let titles = parse_wiki_search(&found);
        if titles.is_empty() {
            return Ok(Vec::new());
        }
        let english = !valid_language(language) || language == "en";
        let mut out = Vec::with_capacity(titles.len());
        for chunk in titles.chunks(50) {
            let mut params = vec![
                ("action", "query".to_string()),
                ("redirects", "1".to_string()),
                ("titles", chunk.join("|")),
                ("format", "json".to_string()),
            ];
            if !english {
                params.push(("prop", "langlinks".into()));
                params.push(("lllang", "en".into()));
                params.push(("lllimit", "max".into()));
            }
            let resolved = get_json(&self.client, &self.id, &endpoint, &params)?;
            out.extend(
                resolve_wiki_titles(chunk, &resolved, english)
                    .into_iter()
                    .flatten()
                    .map(|t| title_to_resource(&self.resource_base, &t)),
            );
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn sparql_query_escapes_and_limits() {
        let q = sparql_label_query("Say \"hi\"\\", "de", 5);
        assert!(q.contains(r#""Say \"hi\"\\"@de"#));
        assert!(q.contains("@en"));
        assert!(q.ends_with("LIMIT 5"));
        let injected = sparql_label_query("x", "en} DROP", 5);
        assert!(!injected.contains("DROP"));
    }

    #[test]
    fn sparql_results() {
        let body = json!({"results": {"bindings": [
            {"s": {"type": "uri", "value": "http://dbpedia.org/resource/Tokyo"}},
            {"s": {"type": "bnode", "value": "b0"}},
        ]}});
        assert_eq!(parse_sparql_results(&body), ["http://dbpedia.org/resource/Tokyo"]);
        assert!(parse_sparql_results(&json!({})).is_empty());
    }

    #[test]
    fn lookup_results_both_shapes() {
        let new = json!({"docs": [{"resource": ["http://dbpedia.org/resource/Tokyo"]}, {"resource": "http://dbpedia.org/resource/Kyoto"}]});
        assert_eq!(
            parse_lookup_results(&new),
            ["http://dbpedia.org/resource/Tokyo", "http://dbpedia.org/resource/Kyoto"]
        );
        let old = json!({"results": [{"uri": "http://dbpedia.org/resource/Japan"}]});
        assert_eq!(parse_lookup_results(&old), ["http://dbpedia.org/resource/Japan"]);
    }

    #[test]
    fn wiki_redirects_and_langlinks() {
        let search = json!({"query": {"search": [{"title": "東京"}, {"title": "東京都"}]}});
        let titles = parse_wiki_search(&search);
        assert_eq!(titles, ["東京", "東京都"]);
        let resolved = json!({"query": {
            "redirects": [{"from": "東京", "to": "東京都"}],
            "pages": {"1": {"title": "東京都", "langlinks": [{"lang": "en", "*": "Tokyo"}]}}
        }});
        let got = resolve_wiki_titles(&titles, &resolved, false);
        assert_eq!(got, [Some("Tokyo".to_string()), Some("Tokyo".to_string())]);
        assert_eq!(
            title_to_resource(DBPEDIA_RESOURCE, "New York City"),
            "http://dbpedia.org/resource/New_York_City"
        );

        let en = json!({"query": {"normalized": [{"from": "tokyo", "to": "Tokyo"}], "redirects": [{"from": "Tokyo", "to": "Tokyo Metropolis"}]}});
        assert_eq!(
            resolve_wiki_titles(&["tokyo".into()], &en, true),
            [Some("Tokyo Metropolis".to_string())]
        );
    }

    #[test]
    fn unreachable_endpoint_is_an_error_not_a_panic() {
        let s = LookupApiService::new("api", "http://127.0.0.1:9/lookup", Duration::from_millis(300)).unwrap();
        assert!(matches!(s.search("Tokyo", 5, "en"), Err(Error::Service { .. })));
    }
}
