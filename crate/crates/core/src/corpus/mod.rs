//! LexNorm ingestion, preprocessing, vocabularies and training views.

mod lexnorm;
mod pair;
mod preprocess;
mod views;
mod vocab;

pub use lexnorm::{
    load_lexnorm, parse_lexnorm, parse_records, write_lexnorm, CorpusStats, LexNormRecord,
};
pub use pair::{AlignEntry, TweetPair, WordPair};
pub use preprocess::{
    deanonymize, deanonymize_slots, preprocess, preprocess_tokens, AnonymizationRecord,
    PlaceholderKind, PreprocessedPair,
};
pub use views::{extract_word_pairs, make_self_targets, split_ngrams};
pub use vocab::{build_vocab, count_tokens, Vocabulary};

/// Reserved symbols.
pub mod special {
    pub const PAD: &str = "<pad>";
    pub const UNK: &str = "<unk>";
    pub const BOS: &str = "<s>";
    pub const EOS: &str = "</s>";
    pub const MENTION: &str = "<mention>";
    pub const URL: &str = "<url>";
    pub const HASH: &str = "<hash>";
    pub const SELF: &str = "@self";

    /// Vocabulary order; index equals id.
    pub const ALL: [&str; 8] = [PAD, UNK, BOS, EOS, MENTION, URL, HASH, SELF];

    pub fn is_special(token: &str) -> bool {
        ALL.contains(&token)
    }

    pub fn is_framing(token: &str) -> bool {
        token == BOS || token == EOS
    }

    pub fn is_placeholder(token: &str) -> bool {
        token == MENTION || token == URL || token == HASH
    }
}

/// Preprocess a whole corpus.
pub fn preprocess_corpus(pairs: &[TweetPair]) -> Vec<PreprocessedPair> {
    pairs.iter().map(preprocess).collect()
}
