//! Dictionary baselines learned from aligned training pairs.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::corpus::TweetPair;
use crate::error::{Error, Result};

/// Observed source-to-canonical mappings. Keys are lowercased sources.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DictLexicon {
    /// Sources seen with exactly one target: `(target, count)`.
    pub unique: BTreeMap<String, (String, usize)>,
    /// Sources seen with several targets, most frequent first.
    pub multi: BTreeMap<String, Vec<(String, usize)>>,
}

impl DictLexicon {
    fn from_counts(counts: BTreeMap<String, BTreeMap<String, usize>>) -> Self {
        let mut lex = DictLexicon::default();
        for (source, targets) in counts {
            let mut targets: Vec<(String, usize)> = targets.into_iter().filter(|(_, c)| *c > 0).collect();
            targets.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
            match targets.len() {
                0 => {}
                1 => {
                    let t = targets.pop().expect("one entry");
                    lex.unique.insert(source, t);
                }
                _ => {
                    lex.multi.insert(source, targets);
                }
            }
        }
        lex
    }

    pub fn is_empty(&self) -> bool {
        self.unique.is_empty() && self.multi.is_empty()
    }

    pub fn unique_target(&self, token: &str) -> Option<&str> {
        self.unique.get(&token.to_lowercase()).map(|(t, _)| t.as_str())
    }

    pub fn candidates(&self, token: &str) -> Option<&[(String, usize)]> {
        self.multi.get(&token.to_lowercase()).map(Vec::as_slice)
    }

    /// TSV lines `source<TAB>target<TAB>count`.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for (s, (t, c)) in &self.unique {
            out.push_str(&format!("{s}\t{t}\t{c}\n"));
        }
        for (s, ts) in &self.multi {
            for (t, c) in ts {
                out.push_str(&format!("{s}\t{t}\t{c}\n"));
            }
        }
        out
    }

    pub fn from_tsv(text: &str) -> Result<Self> {
        let mut counts: BTreeMap<String, BTreeMap<String, usize>> = BTreeMap::new();
        for (i, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let cols: Vec<&str> = line.split('\t').collect();
            let parsed = match cols.as_slice() {
                [s, t, c] => c.parse::<usize>().ok().map(|c| (*s, *t, c)),
                _ => None,
            };
            let (s, t, c) = parsed.ok_or_else(|| Error::Parse {
                index: i,
                message: format!("expected 'source<TAB>target<TAB>count', got {line:?}"),
            })?;
            *counts.entry(s.to_string()).or_default().entry(t.to_string()).or_insert(0) += c;
        }
        Ok(Self::from_counts(counts))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_tsv()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_tsv(&text)
    }
}

/// Count every (source, target) mapping of the corpus, unchanged ones
/// included.
pub fn build_lexicon(corpus: &[TweetPair]) -> DictLexicon {
    let mut counts: BTreeMap<String, BTreeMap<String, usize>> = BTreeMap::new();
    for pair in corpus {
        for i in 0..pair.len() {
            let source = pair.input[i].to_lowercase();
            let target = pair.target_text(i).to_lowercase();
            *counts.entry(source).or_default().entry(target).or_insert(0) += 1;
        }
    }
    DictLexicon::from_counts(counts)
}

/// Replace tokens with a unique mapping; copy everything else.
pub fn dict1_normalize<S: AsRef<str>>(lexicon: &DictLexicon, tokens: &[S]) -> Vec<String> {
    tokens
        .iter()
        .map(|t| {
            let t = t.as_ref();
            lexicon.unique_target(t).map_or_else(|| t.to_string(), str::to_string)
        })
        .collect()
}

/// Dict1, plus a uniform random choice among the targets of ambiguous
/// tokens.
pub fn dict2_normalize<S: AsRef<str>, R: Rng>(lexicon: &DictLexicon, tokens: &[S], rng: &mut R) -> Vec<String> {
    tokens
        .iter()
        .map(|t| {
            let t = t.as_ref();
            if let Some(u) = lexicon.unique_target(t) {
                return u.to_string();
            }
            match lexicon.candidates(t).and_then(|c| c.choose(rng)) {
                Some((target, _)) => target.clone(),
                None => t.to_string(),
            }
        })
        .collect()
}
