use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::preprocess::PreprocessedPair;
use super::special;

/// Shared source/target token-id map. Reserved symbols take the lowest ids in
/// the order of [`special::ALL`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "Vec<String>", into = "Vec<String>")]
pub struct Vocabulary {
    tokens: Vec<String>,
    index: HashMap<String, usize>,
}

impl From<Vec<String>> for Vocabulary {
    fn from(tokens: Vec<String>) -> Self {
        let index = tokens.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
        Vocabulary { tokens, index }
    }
}

impl From<Vocabulary> for Vec<String> {
    fn from(v: Vocabulary) -> Self {
        v.tokens
    }
}

impl Vocabulary {
    pub const PAD: usize = 0;
    pub const UNK: usize = 1;
    pub const BOS: usize = 2;
    pub const EOS: usize = 3;

    /// Specials followed by `tokens` ordered by descending count, ties broken
    /// lexicographically; tokens below `min_frequency` are dropped.
    pub fn from_counts(counts: &HashMap<String, usize>, min_frequency: usize) -> Self {
        let mut kept: Vec<(&String, usize)> = counts
            .iter()
            .filter(|(t, &c)| c >= min_frequency && !special::is_special(t))
            .map(|(t, &c)| (t, c))
            .collect();
        kept.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        let tokens = special::ALL
            .iter()
            .map(|s| s.to_string())
            .chain(kept.into_iter().map(|(t, _)| t.clone()))
            .collect::<Vec<_>>();
        Vocabulary::from(tokens)
    }

    pub fn specials_only() -> Self {
        Self::from_counts(&HashMap::new(), 1)
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn get(&self, token: &str) -> Option<usize> {
        self.index.get(token).copied()
    }

    pub fn contains(&self, token: &str) -> bool {
        self.index.contains_key(token)
    }

    /// Id of `token`, or UNK.
    pub fn id(&self, token: &str) -> usize {
        self.get(token).unwrap_or(Self::UNK)
    }

    pub fn token(&self, id: usize) -> &str {
        &self.tokens[id]
    }

    pub fn encode<S: AsRef<str>>(&self, tokens: &[S]) -> Vec<usize> {
        tokens.iter().map(|t| self.id(t.as_ref())).collect()
    }

    pub fn special_id(&self, token: &str) -> usize {
        self.get(token).expect("specials are always present")
    }
}

pub fn count_tokens<'a>(tokens: impl IntoIterator<Item = &'a String>) -> HashMap<String, usize> {
    let mut counts = HashMap::new();
    for t in tokens {
        *counts.entry(t.clone()).or_insert(0) += 1;
    }
    counts
}

/// One vocabulary over source and target tokens of the corpus.
pub fn build_vocab(corpus: &[PreprocessedPair], min_frequency: usize) -> Vocabulary {
    let counts = count_tokens(corpus.iter().flat_map(|p| p.pair.input.iter().chain(&p.pair.output)));
    Vocabulary::from_counts(&counts, min_frequency)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{preprocess, TweetPair};

    fn corpus(src: &[&str]) -> Vec<PreprocessedPair> {
        let toks: Vec<String> = src.iter().map(|s| s.to_string()).collect();
        vec![preprocess(&TweetPair::from_slots("1", toks.clone(), &toks).unwrap())]
    }

    #[test]
    fn frequency_then_lexicographic() {
        let v = build_vocab(&corpus(&["a", "a", "b"]), 1);
        let n = special::ALL.len();
        assert_eq!(v.len(), n + 2);
        assert_eq!(v.token(n), "a");
        assert_eq!(v.token(n + 1), "b");
        assert_eq!(v.token(Vocabulary::PAD), special::PAD);
        assert_eq!(v.token(Vocabulary::UNK), special::UNK);
    }

    #[test]
    fn high_cutoff_leaves_specials() {
        let v = build_vocab(&corpus(&["a", "a", "b"]), 100);
        assert_eq!(v.len(), special::ALL.len());
    }

    #[test]
    fn ties_are_lexicographic() {
        let v = build_vocab(&corpus(&["zeta", "alpha", "mid"]), 1);
        let n = special::ALL.len();
        assert_eq!(&v.tokens()[n..], &["alpha", "mid", "zeta"]);
    }

    #[test]
    fn serde_roundtrip_keeps_ids() {
        let v = build_vocab(&corpus(&["x", "y", "y"]), 1);
        let json = serde_json::to_string(&v).unwrap();
        let back: Vocabulary = serde_json::from_str(&json).unwrap();
        assert_eq!(back.id("y"), v.id("y"));
    }
}
