//! Language identification from character trigram profiles.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

/// A predicted language with its confidence in `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LanguageGuess {
    /// ISO-639-1 code.
    pub code: String,
    pub confidence: f64,
    /// Set when the input carried no usable signal and `code` is the
    /// default.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub fallback: bool,
}

impl LanguageGuess {
    pub const DEFAULT_CODE: &'static str = "en";

    pub fn fallback() -> Self {
        Self {
            code: Self::DEFAULT_CODE.to_string(),
            confidence: 0.0,
            fallback: true,
        }
    }
}

/// Anything that can guess the language of a text.
pub trait LanguageDetector: Send + Sync {
    fn detect(&self, text: &str) -> LanguageGuess;
}

const PROFILES: [(&str, &str); 5] = [
    ("en", include_str!("../../data/lang/en.txt")),
    ("de", include_str!("../../data/lang/de.txt")),
    ("fr", include_str!("../../data/lang/fr.txt")),
    ("es", include_str!("../../data/lang/es.txt")),
    ("it", include_str!("../../data/lang/it.txt")),
];

/// Multinomial naive Bayes over padded character trigrams with add-one
/// smoothing and a uniform prior. Confidence is the posterior of the winner.
#[derive(Debug, Clone)]
pub struct NgramLanguageDetector {
    languages: Vec<LanguageModel>,
    vocabulary: usize,
}

#[derive(Debug, Clone)]
struct LanguageModel {
    code: String,
    counts: HashMap<String, u32>,
    total: u64,
}

impl Default for NgramLanguageDetector {
    fn default() -> Self {
        Self::from_samples(PROFILES.iter().map(|(c, t)| (c.to_string(), t.to_string())))
    }
}

impl NgramLanguageDetector {
    /// Trains one profile per `(code, sample text)` pair.
    pub fn from_samples<I: IntoIterator<Item = (String, String)>>(samples: I) -> Self {
        let mut languages = Vec::new();
        let mut vocab: std::collections::HashSet<String> = std::collections::HashSet::new();
        for (code, text) in samples {
            let mut counts: HashMap<String, u32> = HashMap::new();
            for g in trigrams(&text) {
                vocab.insert(g.clone());
                *counts.entry(g).or_insert(0) += 1;
            }
            let total = counts.values().map(|&c| c as u64).sum();
            languages.push(LanguageModel { code, counts, total });
        }
        Self {
            languages,
            vocabulary: vocab.len().max(1),
        }
    }

    pub fn codes(&self) -> impl Iterator<Item = &str> {
        self.languages.iter().map(|l| l.code.as_str())
    }

    fn log_likelihoods(&self, grams: &[String]) -> Vec<f64> {
        self.languages
            .iter()
            .map(|lang| {
                let denom = (lang.total + self.vocabulary as u64) as f64;
                grams
                    .iter()
                    .map(|g| {
                        let c = lang.counts.get(g).copied().unwrap_or(0) as f64;
                        ((c + 1.0) / denom).ln()
                    })
                    .sum()
            })
            .collect()
    }
}

impl LanguageDetector for NgramLanguageDetector {
    fn detect(&self, text: &str) -> LanguageGuess {
        let grams = trigrams(text);
        if grams.is_empty() || self.languages.is_empty() {
            return LanguageGuess::fallback();
        }
        let ll = self.log_likelihoods(&grams);
        let max = ll.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let weights: Vec<f64> = ll.iter().map(|v| (v - max).exp()).collect();
        let total: f64 = weights.iter().sum();
        let (best, _) = weights.iter().enumerate().fold(
            (0, f64::NEG_INFINITY),
            |acc, (i, &w)| if w > acc.1 { (i, w) } else { acc },
        );
        LanguageGuess {
            code: self.languages[best].code.clone(),
            confidence: weights[best] / total,
            fallback: false,
        }
    }
}

/// Lowercased letter trigrams of each word, padded with one space on both
/// sides. Non-letters separate words.
pub(crate) fn trigrams(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let lowered = text.to_lowercase();
    for word in lowered.split(|c: char| !c.is_alphabetic()).filter(|w| !w.is_empty()) {
        let padded: Vec<char> = std::iter::once(' ')
            .chain(word.chars())
            .chain(std::iter::once(' '))
            .collect();
        for w in padded.windows(3) {
            out.push(w.iter().collect());
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_input_falls_back() {
        let d = NgramLanguageDetector::default();
        assert_eq!(d.detect(""), LanguageGuess::fallback());
        assert_eq!(d.detect("12.5 %"), LanguageGuess::fallback());
    }

    #[test]
    fn trigram_padding() {
        assert_eq!(trigrams("Ab"), vec![" ab", "ab "]);
        assert_eq!(trigrams("a-b"), vec![" a ", " b "]);
    }

    #[test]
    fn detects_each_shipped_language() {
        let d = NgramLanguageDetector::default();
        for (code, text) in [
            ("en", "the quick brown fox jumps"),
            ("de", "der schnelle braune Fuchs"),
            ("fr", "le renard et le chien de la maison"),
            ("es", "el perro de los niños en la casa"),
            ("it", "il cane della famiglia nella città"),
        ] {
            let g = d.detect(text);
            assert_eq!(g.code, code, "{text}");
            assert!(g.confidence > 0.5, "{text}: {}", g.confidence);
            assert!(g.confidence <= 1.0);
        }
    }
}
