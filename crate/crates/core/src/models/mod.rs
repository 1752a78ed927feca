//! Word, character and hybrid normalizers and the dictionary baselines.

mod align;
mod hyper;
mod lexicon;
mod normalize;
mod seq2seq;
mod train;

pub use align::{align_output, content_attention};
pub use hyper::{Granularity, HyperParams};
pub use lexicon::{build_lexicon, dict1_normalize, dict2_normalize, DictLexicon};
pub use normalize::{
    char_eligible, char_sentence_examples, char_units, multi_examples, normalize_hybrid,
    normalize_word_s2s, s2schar_normalize, s2smulti_normalize, s2sself_normalize, self_examples,
    HybridModel, HYBRID_KIND,
};
pub use seq2seq::{confidence, split_chars, DecodeResult, Seq2Seq, Seq2SeqNet, SeqExample, MODEL_KIND};
pub use train::{
    example_vocab, mean_loss, token_accuracy, train_seq2seq, train_seq2seq_with, word_examples,
    EpochLog, TrainReport,
};
