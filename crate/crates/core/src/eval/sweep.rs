use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::{predict_corpus, score, EvalResult};
use crate::corpus::{extract_word_pairs, preprocess_corpus, split_ngrams, TweetPair, WordPair};
use crate::error::{Error, Result};
use crate::models::{
    normalize_word_s2s, train_seq2seq, word_examples, HybridModel, HyperParams, Seq2Seq, SeqExample,
};
use crate::noise::{generate_tagged, KeyboardLayout, NoiseConfig};

pub const CSV_HEADER: &str = "knob,precision,recall,f1,total_examples,noise_examples";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub knob: String,
    pub result: EvalResult,
    /// Training examples used for this row.
    pub total_examples: usize,
    /// Synthetic examples among them.
    pub noise_examples: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    /// Percentages with two decimals, one row per knob value.
    pub fn to_csv(&self) -> String {
        let mut out = format!("{CSV_HEADER}\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{:.2},{:.2},{:.2},{},{}\n",
                r.knob,
                100.0 * r.result.precision,
                100.0 * r.result.recall,
                100.0 * r.result.f1,
                r.total_examples,
                r.noise_examples
            ));
        }
        out
    }
}

/// Inputs for the noise-ratio sweep. The word model is shared by every row.
pub struct NoiseSweepSetup<'a> {
    pub train: &'a [TweetPair],
    pub test: &'a [TweetPair],
    pub word: &'a Seq2Seq,
    pub char_hyper: HyperParams,
    pub tau: f64,
    pub seed: u64,
    pub k_max: usize,
    pub layout: KeyboardLayout,
}

/// For each ratio: regenerate synthetic pairs, retrain the character model
/// from scratch, rebuild the hybrid and score it on the test set.
pub fn sweep_noise_ratio(ratios: &[f64], setup: &NoiseSweepSetup<'_>) -> Result<SweepResult> {
    if ratios.iter().any(|r| !(*r > 0.0 && *r <= 1.0)) {
        return Err(Error::Argument("noise ratios must lie in (0, 1]".into()));
    }
    if ratios.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Argument("noise ratios must be strictly increasing".into()));
    }
    let pairs = extract_word_pairs(&preprocess_corpus(setup.train));
    let mut out = SweepResult::default();
    for &ratio in ratios {
        let config = NoiseConfig {
            ratio,
            seed: setup.seed,
            k_max: setup.k_max,
        };
        let tagged = generate_tagged(&pairs, &config, &setup.layout)?;
        let examples: Vec<SeqExample> = tagged
            .iter()
            .map(|t| SeqExample::chars(&t.pair.source, &t.pair.target))
            .collect();
        let (chars, _) = train_seq2seq(&examples, &setup.char_hyper)?;
        let hybrid = HybridModel::new(setup.word.clone(), chars, setup.tau)?;
        let preds = predict_corpus(setup.test, |t| hybrid.normalize(t))?;
        out.rows.push(SweepRow {
            knob: format!("{ratio}"),
            result: score(&preds, setup.test)?,
            total_examples: tagged.len(),
            noise_examples: tagged.iter().filter(|t| t.noise.is_some()).count(),
        });
    }
    Ok(out)
}

pub struct NgramSweepSetup<'a> {
    pub train: &'a [TweetPair],
    pub test: &'a [TweetPair],
    pub word_hyper: HyperParams,
}

/// Train a word model per window size (`None` = whole tweets) and score it.
pub fn sweep_ngram(ns: &[Option<usize>], setup: &NgramSweepSetup<'_>) -> Result<SweepResult> {
    let key = |n: &Option<usize>| n.unwrap_or(usize::MAX);
    if ns.windows(2).any(|w| key(&w[0]) >= key(&w[1])) {
        return Err(Error::Argument("window sizes must be strictly increasing".into()));
    }
    let corpus = preprocess_corpus(setup.train);
    let mut out = SweepResult::default();
    for n in ns {
        let view = match n {
            Some(n) => split_ngrams(&corpus, *n)?,
            None => corpus.clone(),
        };
        let examples = word_examples(&view);
        let (model, _) = train_seq2seq(&examples, &setup.word_hyper)?;
        let preds = predict_corpus(setup.test, |t| normalize_word_s2s(&model, t))?;
        out.rows.push(SweepRow {
            knob: n.map_or("full".to_string(), |n| n.to_string()),
            result: score(&preds, setup.test)?,
            total_examples: examples.len(),
            noise_examples: 0,
        });
    }
    Ok(out)
}

/// Test word pairs whose source never occurs as a training source.
pub fn unseen_pairs(train: &[WordPair], test: &[WordPair]) -> Vec<WordPair> {
    let seen: HashSet<&str> = train.iter().map(|p| p.source.as_str()).collect();
    test.iter().filter(|p| !seen.contains(p.source.as_str())).cloned().collect()
}

/// Fraction of pairs whose greedy character decode equals the target
/// exactly (1 for an empty set).
pub fn oov_accuracy(model: &Seq2Seq, pairs: &[WordPair]) -> Result<f64> {
    if pairs.is_empty() {
        return Ok(1.0);
    }
    let mut hits = 0;
    for p in pairs {
        if model.decode_word(&p.source)?.0 == p.target {
            hits += 1;
        }
    }
    Ok(hits as f64 / pairs.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair(src: &[&str], tgt: &[&str]) -> TweetPair {
        let s = |xs: &[&str]| xs.iter().map(|x| x.to_string()).collect::<Vec<_>>();
        TweetPair::from_slots("t", s(src), &s(tgt)).unwrap()
    }

    fn tiny() -> HyperParams {
        HyperParams {
            epochs: 2,
            batch_size: 8,
            patience: None,
            ..HyperParams::word().tiny()
        }
    }

    #[test]
    fn csv_shape() {
        let r = SweepResult {
            rows: vec![SweepRow {
                knob: "0.1".into(),
                result: EvalResult::from_counts(1, 2, 4),
                total_examples: 10,
                noise_examples: 1,
            }],
        };
        assert_eq!(r.to_csv(), format!("{CSV_HEADER}\n0.1,50.00,25.00,33.33,10,1\n"));
    }

    #[test]
    fn single_row_sweeps() {
        let train = vec![pair(&["u", "ok"], &["you", "ok"]), pair(&["cool", "u"], &["cool", "you"])];
        let ng = sweep_ngram(&[None], &NgramSweepSetup { train: &train, test: &train, word_hyper: tiny() }).unwrap();
        assert_eq!(ng.rows.len(), 1);
        assert_eq!(ng.rows[0].knob, "full");

        let (word, _) = train_seq2seq(&word_examples(&preprocess_corpus(&train)), &tiny()).unwrap();
        let setup = NoiseSweepSetup {
            train: &train,
            test: &train,
            word: &word,
            char_hyper: HyperParams { granularity: crate::models::Granularity::Char, ..tiny() },
            tau: 0.5,
            seed: 1,
            k_max: 6,
            layout: KeyboardLayout::qwerty(),
        };
        let r = sweep_noise_ratio(&[0.5], &setup).unwrap();
        assert_eq!(r.rows.len(), 1);
        assert!(r.rows[0].noise_examples > 0);
        assert!(sweep_noise_ratio(&[0.5, 0.2], &setup).is_err());
        assert!(sweep_noise_ratio(&[0.0], &setup).is_err());
    }

    #[test]
    fn unseen_filter_and_trivial_accuracy() {
        let train = vec![WordPair::real("u", "you")];
        let test = vec![WordPair::real("u", "you"), WordPair::real("tmrw", "tomorrow")];
        assert_eq!(unseen_pairs(&train, &test), vec![WordPair::real("tmrw", "tomorrow")]);
        let (m, _) = train_seq2seq(&[SeqExample::chars("ab", "ab")], &tiny()).unwrap();
        assert_eq!(oov_accuracy(&m, &[]).unwrap(), 1.0);
    }
}
