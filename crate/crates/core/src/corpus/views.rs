//! Derived training views of a preprocessed corpus.

use super::pair::{AlignEntry, TweetPair, WordPair};
use super::preprocess::{PlaceholderKind, PreprocessedPair};
use super::special;
use crate::error::{Error, Result};

/// Replace every content target span that equals its source token by `@self`.
pub fn make_self_targets(pp: &PreprocessedPair) -> PreprocessedPair {
    let p = &pp.pair;
    let last = p.input.len() - 1;
    let mut output = Vec::with_capacity(p.output.len());
    let mut alignment = Vec::with_capacity(p.alignment.len());
    for (i, a) in p.alignment.iter().enumerate() {
        let span = &p.output[a.span()];
        let start = output.len();
        let framing = i == 0 || i == last;
        if !framing && span.len() == 1 && span[0] == p.input[i] {
            output.push(special::SELF.to_string());
        } else {
            output.extend(span.iter().cloned());
        }
        alignment.push(AlignEntry {
            source: i,
            start,
            end: output.len(),
        });
    }
    PreprocessedPair {
        pair: TweetPair {
            tid: p.tid.clone(),
            input: p.input.clone(),
            output,
            alignment,
        },
        record: pp.record.clone(),
    }
}

/// Cut each pair into consecutive windows of `n` content tokens with their
/// aligned target spans, each re-framed. A short trailing window is kept.
pub fn split_ngrams(corpus: &[PreprocessedPair], n: usize) -> Result<Vec<PreprocessedPair>> {
    if n == 0 {
        return Err(Error::Argument("n-gram window must be at least 1".into()));
    }
    let mut out = Vec::new();
    for pp in corpus {
        let len = pp.content_len();
        if n >= len {
            out.push(pp.clone());
            continue;
        }
        let mut record_cursor = 0;
        for (w, start) in (1..=len).step_by(n).enumerate() {
            let end = (start + n).min(len + 1);
            let p = &pp.pair;
            let mut input = vec![special::BOS.to_string()];
            input.extend(p.input[start..end].iter().cloned());
            input.push(special::EOS.to_string());

            let mut output = vec![special::BOS.to_string()];
            let mut alignment = vec![AlignEntry { source: 0, start: 0, end: 1 }];
            for (k, i) in (start..end).enumerate() {
                let s = output.len();
                output.extend(p.target_span(i).iter().cloned());
                alignment.push(AlignEntry {
                    source: k + 1,
                    start: s,
                    end: output.len(),
                });
            }
            output.push(special::EOS.to_string());
            alignment.push(AlignEntry {
                source: input.len() - 1,
                start: output.len() - 1,
                end: output.len(),
            });

            let placeholders = p.input[start..end]
                .iter()
                .filter(|t| PlaceholderKind::of_placeholder(t).is_some())
                .count();
            let record = pp.record[record_cursor..record_cursor + placeholders].to_vec();
            record_cursor += placeholders;

            out.push(PreprocessedPair {
                pair: TweetPair {
                    tid: format!("{}#{w}", p.tid),
                    input,
                    output,
                    alignment,
                },
                record,
            });
        }
    }
    Ok(out)
}

/// One real word pair per 1:1 content alignment entry. Placeholders and
/// framing symbols are skipped.
pub fn extract_word_pairs(corpus: &[PreprocessedPair]) -> Vec<WordPair> {
    let mut out = Vec::new();
    for pp in corpus {
        for i in 0..pp.content_len() {
            let src = &pp.content_input()[i];
            let tgt = pp.content_target(i);
            if tgt.len() != 1 || special::is_special(src) || special::is_special(&tgt[0]) {
                continue;
            }
            out.push(WordPair::real(src.clone(), tgt[0].clone()));
        }
    }
    out
}
