//! Scoring of submitted annotations against gold answers.
//!
//! CEA and CPA use precision (correct / submitted), recall (correct /
//! targets), and their harmonic mean. CTA uses the hierarchy score AH: each
//! distinct submitted class of a target column is perfect (+1) when it is
//! the gold class, okay (+0.5) when it is a strict ancestor of it, and wrong
//! (-1) otherwise; the sum is divided by the number of target columns. The
//! target set is the set of gold keys; predictions for other keys are
//! ignored.

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::io::{read_cea_answers, read_cpa_answers, read_cta_answers, CtaAnswers};
use crate::error::{Error, Result};
use crate::kg::KnowledgeGraph;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Cea,
    Cta,
    Cpa,
}

impl FromStr for Task {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "cea" => Ok(Task::Cea),
            "cta" => Ok(Task::Cta),
            "cpa" => Ok(Task::Cpa),
            other => Err(format!("unknown task `{other}` (expected cea, cta, or cpa)")),
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Task::Cea => "cea",
            Task::Cta => "cta",
            Task::Cpa => "cpa",
        })
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    pub targets: usize,
    /// Predictions for target keys.
    pub submitted: usize,
    /// Predictions for keys outside the target set.
    pub ignored: usize,
    pub correct: usize,
    pub perfect: usize,
    pub okay: usize,
    pub wrong: usize,
    /// Targets with no prediction.
    pub missing: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub task: Task,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub f1: Option<f64>,
    /// Hierarchy score (CTA).
    pub ah: Option<f64>,
    /// Share of submitted classes that are perfect (CTA).
    pub ap: Option<f64>,
    pub counts: Counts,
}

fn ratio(a: usize, b: usize) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

/// Harmonic mean of precision and recall; zero when both are zero.
pub fn f1_score(precision: f64, recall: f64) -> f64 {
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

/// Precision, recall, and F1 from raw counts.
pub fn prf(correct: usize, submitted: usize, targets: usize) -> (f64, f64, f64) {
    let p = ratio(correct, submitted);
    let r = ratio(correct, targets);
    (p, r, f1_score(p, r))
}

/// Exact-match scoring: a prediction is correct when its first id is one of
/// the gold ids for that key.
pub fn score_exact<K: Ord>(
    task: Task,
    gold: &std::collections::BTreeMap<K, Vec<String>>,
    pred: &std::collections::BTreeMap<K, Vec<String>>,
) -> EvalReport {
    let mut c = Counts {
        targets: gold.len(),
        ..Counts::default()
    };
    for (k, p) in pred {
        match gold.get(k) {
            None => c.ignored += 1,
            Some(g) => {
                c.submitted += 1;
                if p.first().is_some_and(|p| g.contains(p)) {
                    c.correct += 1;
                } else {
                    c.wrong += 1;
                }
            }
        }
    }
    c.missing = gold.keys().filter(|k| !pred.contains_key(k)).count();
    c.perfect = c.correct;
    let (p, r, f) = prf(c.correct, c.submitted, c.targets);
    EvalReport {
        task,
        precision: Some(p),
        recall: Some(r),
        f1: Some(f),
        ah: None,
        ap: None,
        counts: c,
    }
}

/// AH and AP for column types. The first gold id of a column is its exact
/// class.
pub fn score_cta(gold: &CtaAnswers, pred: &CtaAnswers, kg: &KnowledgeGraph) -> EvalReport {
    let mut c = Counts {
        targets: gold.len(),
        ..Counts::default()
    };
    let mut submitted_classes = 0usize;
    for (k, p) in pred {
        let Some(g) = gold.get(k) else {
            c.ignored += 1;
            continue;
        };
        c.submitted += 1;
        let exact = &g[0];
        let mut seen = BTreeSet::new();
        for class in p.iter().filter(|x| seen.insert(x.as_str())) {
            submitted_classes += 1;
            if class == exact {
                c.perfect += 1;
            } else if kg.ancestors(exact).contains(class) {
                c.okay += 1;
            } else {
                c.wrong += 1;
            }
        }
        if p.iter().any(|x| x == exact) {
            c.correct += 1;
        }
    }
    c.missing = gold.keys().filter(|k| !pred.contains_key(k)).count();
    let ah = if c.targets == 0 {
        0.0
    } else {
        (c.perfect as f64 + 0.5 * c.okay as f64 - c.wrong as f64) / c.targets as f64
    };
    EvalReport {
        task: Task::Cta,
        precision: None,
        recall: None,
        f1: None,
        ah: Some(ah),
        ap: Some(ratio(c.perfect, submitted_classes)),
        counts: c,
    }
}

/// Scores a prediction file against a gold file. CTA needs the graph for
/// ancestor checks.
pub fn evaluate(task: Task, gold: &Path, pred: &Path, kg: Option<&KnowledgeGraph>) -> Result<EvalReport> {
    Ok(match task {
        Task::Cea => score_exact(Task::Cea, &read_cea_answers(gold)?, &read_cea_answers(pred)?),
        Task::Cpa => score_exact(Task::Cpa, &read_cpa_answers(gold)?, &read_cpa_answers(pred)?),
        Task::Cta => {
            let kg = kg.ok_or_else(|| Error::Config("CTA evaluation needs a knowledge graph".into()))?;
            score_cta(&read_cta_answers(gold)?, &read_cta_answers(pred)?, kg)
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;

    fn cta(entries: &[(usize, &[&str])]) -> CtaAnswers {
        entries
            .iter()
            .map(|(c, ids)| (("t".to_string(), *c), ids.iter().map(|s| s.to_string()).collect()))
            .collect()
    }

    fn kg() -> KnowledgeGraph {
        KnowledgeGraph::from_ntriples_str("<c:City> <rdfs:subClassOf> <c:Place> .\n").unwrap()
    }

    #[test]
    fn ah_hand_example() {
        let gold = cta(&[(0, &["c:City"])]);
        let pred = cta(&[(0, &["c:City", "c:Place"])]);
        let r = score_cta(&gold, &pred, &kg());
        assert_eq!(r.ah, Some(1.5));
        assert_eq!((r.counts.perfect, r.counts.okay, r.counts.wrong), (1, 1, 0));
        assert_eq!(r.ap, Some(0.5));
    }

    #[test]
    fn ah_wrong_missing_and_exact_only() {
        let gold = cta(&[(0, &["c:City"]), (1, &["c:Place"])]);
        let r = score_cta(&gold, &cta(&[(0, &["c:Person"])]), &kg());
        assert_eq!(r.ah, Some(-0.5));
        assert_eq!(r.counts.missing, 1);
        assert_eq!(score_cta(&gold, &gold, &kg()).ah, Some(1.0));
        assert_eq!(score_cta(&gold, &CtaAnswers::new(), &kg()).ah, Some(0.0));
    }

    #[test]
    fn exact_scores() {
        let key = |r: usize| ("t".to_string(), 0usize, r);
        let gold: BTreeMap<_, _> = (1..=4).map(|r| (key(r), vec![format!("e{r}")])).collect();
        let full = score_exact(Task::Cea, &gold, &gold);
        assert_eq!(full.f1, Some(1.0));

        let mut pred = BTreeMap::new();
        pred.insert(key(1), vec!["e1".to_string()]);
        pred.insert(key(2), vec!["x".to_string()]);
        pred.insert(key(9), vec!["e9".to_string()]);
        let r = score_exact(Task::Cea, &gold, &pred);
        assert_eq!(r.precision, Some(0.5));
        assert_eq!(r.recall, Some(0.25));
        assert_eq!(r.counts.ignored, 1);
        assert_eq!(r.counts.missing, 2);

        let empty = score_exact(Task::Cea, &gold, &BTreeMap::new());
        assert_eq!((empty.recall, empty.f1), (Some(0.0), Some(0.0)));
    }

    #[test]
    fn gold_may_list_alternatives() {
        let mut gold = BTreeMap::new();
        gold.insert(
            ("t".to_string(), 0usize, 1usize),
            vec!["a".to_string(), "b".to_string()],
        );
        let mut pred = BTreeMap::new();
        pred.insert(("t".to_string(), 0usize, 1usize), vec!["b".to_string()]);
        assert_eq!(score_exact(Task::Cpa, &gold, &pred).f1, Some(1.0));
    }

    #[test]
    fn task_names() {
        assert_eq!("CEA".parse::<Task>(), Ok(Task::Cea));
        assert!("x".parse::<Task>().is_err());
        assert_eq!(Task::Cpa.to_string(), "cpa");
    }
}
