//! Token-level precision/recall/F1 against aligned gold data, error
//! analysis and the noise-ratio and context-window sweeps.

mod sweep;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::corpus::TweetPair;
use crate::error::{Error, Result};

pub use sweep::{
    oov_accuracy, sweep_ngram, sweep_noise_ratio, unseen_pairs, NgramSweepSetup, NoiseSweepSetup,
    SweepResult, SweepRow, CSV_HEADER,
};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalResult {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub tp: usize,
    pub proposed: usize,
    pub needed: usize,
}

impl EvalResult {
    /// Precision is 1 when nothing was proposed, recall 1 when nothing was
    /// needed, F1 0 when both are 0.
    pub fn from_counts(tp: usize, proposed: usize, needed: usize) -> Self {
        let precision = if proposed == 0 { 1.0 } else { tp as f64 / proposed as f64 };
        let recall = if needed == 0 { 1.0 } else { tp as f64 / needed as f64 };
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        EvalResult {
            precision,
            recall,
            f1,
            tp,
            proposed,
            needed,
        }
    }
}

fn canon(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ").to_lowercase()
}

fn check_lengths(predictions: &[Vec<String>], gold: &[TweetPair]) -> Result<()> {
    if predictions.len() != gold.len() {
        return Err(Error::Argument(format!(
            "{} predictions for {} gold tweets",
            predictions.len(),
            gold.len()
        )));
    }
    for (p, g) in predictions.iter().zip(gold) {
        if p.len() != g.len() {
            return Err(Error::Alignment {
                tid: g.tid.clone(),
                message: format!("{} predictions for {} source tokens", p.len(), g.len()),
            });
        }
    }
    Ok(())
}

/// Score one predicted string per gold source token. A token is needed when
/// its gold target differs from the source, proposed when the prediction
/// does, and a true positive when a proposed prediction equals the target.
/// Comparisons are lowercase with whitespace collapsed.
pub fn score(predictions: &[Vec<String>], gold: &[TweetPair]) -> Result<EvalResult> {
    check_lengths(predictions, gold)?;
    let (mut tp, mut proposed, mut needed) = (0, 0, 0);
    for (pred, g) in predictions.iter().zip(gold) {
        for (i, p) in pred.iter().enumerate() {
            let src = canon(&g.input[i]);
            let tgt = canon(&g.target_text(i));
            let p = canon(p);
            needed += usize::from(tgt != src);
            if p != src {
                proposed += 1;
                tp += usize::from(p == tgt);
            }
        }
    }
    Ok(EvalResult::from_counts(tp, proposed, needed))
}

/// Aggregate for one source token.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorEntry {
    pub source: String,
    pub targets: BTreeSet<String>,
    pub count: usize,
    /// Occurrences of the source token in the gold data.
    pub frequency: usize,
    /// Occurrences the system left unchanged.
    pub unchanged: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorReport {
    /// Needed changes predicted exactly, most frequent first.
    pub correct: Vec<ErrorEntry>,
    /// Predictions that differ from the gold target, most frequent first.
    pub incorrect: Vec<ErrorEntry>,
}

impl ErrorReport {
    pub fn to_text(&self, top: usize) -> String {
        let mut out = String::new();
        for (title, rows) in [("correct", &self.correct), ("incorrect", &self.incorrect)] {
            out.push_str(&format!("# {title}\n"));
            for e in rows.iter().take(top) {
                let targets: Vec<&str> = e.targets.iter().map(String::as_str).collect();
                out.push_str(&format!(
                    "{}\t{{{}}}\t{}\t{} ({})\n",
                    e.source,
                    targets.join(", "),
                    e.count,
                    e.frequency,
                    e.unchanged
                ));
            }
        }
        out
    }
}

pub fn error_analysis(predictions: &[Vec<String>], gold: &[TweetPair]) -> Result<ErrorReport> {
    check_lengths(predictions, gold)?;
    let mut frequency: BTreeMap<String, usize> = BTreeMap::new();
    let mut unchanged: BTreeMap<String, usize> = BTreeMap::new();
    let mut correct: BTreeMap<String, (BTreeSet<String>, usize)> = BTreeMap::new();
    let mut incorrect: BTreeMap<String, (BTreeSet<String>, usize)> = BTreeMap::new();
    for (pred, g) in predictions.iter().zip(gold) {
        for (i, p) in pred.iter().enumerate() {
            let src = canon(&g.input[i]);
            let tgt = canon(&g.target_text(i));
            let p = canon(p);
            *frequency.entry(src.clone()).or_default() += 1;
            if p == src {
                *unchanged.entry(src.clone()).or_default() += 1;
            }
            let bucket = if p != tgt {
                &mut incorrect
            } else if tgt != src {
                &mut correct
            } else {
                continue;
            };
            let e = bucket.entry(src).or_default();
            e.0.insert(tgt);
            e.1 += 1;
        }
    }
    let rank = |m: BTreeMap<String, (BTreeSet<String>, usize)>| {
        let mut rows: Vec<ErrorEntry> = m
            .into_iter()
            .map(|(source, (targets, count))| ErrorEntry {
                frequency: frequency[&source],
                unchanged: unchanged.get(&source).copied().unwrap_or(0),
                source,
                targets,
                count,
            })
            .collect();
        rows.sort_by(|a, b| b.count.cmp(&a.count).then_with(|| a.source.cmp(&b.source)));
        rows
    };
    Ok(ErrorReport {
        correct: rank(correct),
        incorrect: rank(incorrect),
    })
}

/// Run a tweet normalizer over every gold source sequence.
pub fn predict_corpus<F>(gold: &[TweetPair], mut normalize: F) -> Result<Vec<Vec<String>>>
where
    F: FnMut(&[String]) -> Result<Vec<String>>,
{
    gold.iter().map(|g| normalize(&g.input)).collect()
}
