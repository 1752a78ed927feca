//! LexNorm 2015 JSON ingestion.

use std::cell::Cell;
use std::fmt;
use std::fs;
use std::path::Path;

use serde::de::{DeserializeSeed, SeqAccess, Visitor};
use serde::{Deserialize, Deserializer, Serialize};

use super::pair::TweetPair;
use crate::error::{Error, Result};

/// One record of the shared-task file. `input` and `output` are equal length;
/// a multi-word `output` slot is a 1:N normalization.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LexNormRecord {
    pub tid: String,
    #[serde(default)]
    pub index: String,
    pub input: Vec<String>,
    pub output: Vec<String>,
}

impl LexNormRecord {
    pub fn into_pair(self) -> Result<TweetPair> {
        TweetPair::from_slots(self.tid, self.input, &self.output)
    }

    pub fn from_pair(pair: &TweetPair, index: usize) -> Self {
        LexNormRecord {
            tid: pair.tid.clone(),
            index: index.to_string(),
            input: pair.input.clone(),
            output: pair.slots(),
        }
    }
}

struct RecordSeq<'a>(&'a Cell<usize>);

impl<'de> DeserializeSeed<'de> for RecordSeq<'_> {
    type Value = Vec<LexNormRecord>;

    fn deserialize<D: Deserializer<'de>>(self, d: D) -> std::result::Result<Self::Value, D::Error> {
        d.deserialize_seq(self)
    }
}

impl<'de> Visitor<'de> for RecordSeq<'_> {
    type Value = Vec<LexNormRecord>;

    fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.write_str("a JSON array of LexNorm records")
    }

    fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> std::result::Result<Self::Value, A::Error> {
        let mut out = Vec::new();
        while let Some(rec) = seq.next_element::<LexNormRecord>()? {
            out.push(rec);
            self.0.set(out.len());
        }
        Ok(out)
    }
}

/// Parse the records of a LexNorm file; errors carry the index of the first
/// record that failed.
pub fn parse_records(text: &str) -> Result<Vec<LexNormRecord>> {
    let parsed = Cell::new(0);
    let mut de = serde_json::Deserializer::from_str(text);
    let records = RecordSeq(&parsed)
        .deserialize(&mut de)
        .and_then(|r| de.end().map(|_| r))
        .map_err(|e| Error::Parse {
            index: parsed.get(),
            message: e.to_string(),
        })?;
    Ok(records)
}

pub fn parse_lexnorm(text: &str) -> Result<Vec<TweetPair>> {
    parse_records(text)?
        .into_iter()
        .map(LexNormRecord::into_pair)
        .collect()
}

pub fn load_lexnorm(path: impl AsRef<Path>) -> Result<Vec<TweetPair>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_lexnorm(&text)
}

pub fn write_lexnorm(path: impl AsRef<Path>, pairs: &[TweetPair]) -> Result<()> {
    let path = path.as_ref();
    let records: Vec<_> = pairs
        .iter()
        .enumerate()
        .map(|(i, p)| LexNormRecord::from_pair(p, i))
        .collect();
    let text = serde_json::to_string_pretty(&records)?;
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Ingest summary, emitted as `{"pairs":N,"tokens":N,"vocab":N}`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub pairs: usize,
    pub tokens: usize,
    pub vocab: usize,
}

impl CorpusStats {
    /// Pair and source-token counts; `vocab` is filled in by the caller.
    pub fn of(pairs: &[TweetPair]) -> Self {
        CorpusStats {
            pairs: pairs.len(),
            tokens: pairs.iter().map(TweetPair::len).sum(),
            vocab: 0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_array_is_empty_corpus() {
        let pairs = parse_lexnorm("[]").unwrap();
        assert!(pairs.is_empty());
        assert_eq!(CorpusStats::of(&pairs), CorpusStats::default());
    }

    #[test]
    fn malformed_record_reports_index() {
        let text = r#"[
            {"tid":"1","index":"0","input":["a"],"output":["a"]},
            {"tid":"2","index":"1","input":["b"],"output":["b"]},
            {"tid":"3","index":"2","input":["c"],"output":7}
        ]"#;
        match parse_lexnorm(text) {
            Err(Error::Parse { index, .. }) => assert_eq!(index, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn truncated_file_is_parse_error() {
        let text = r#"[{"tid":"1","index":"0","input":["a"],"output":["a"]}, {"tid":"#;
        assert!(matches!(parse_lexnorm(text), Err(Error::Parse { index: 1, .. })));
    }

    #[test]
    fn misaligned_record_names_tid() {
        let text = r#"[{"tid":"abc","index":"0","input":["a","b"],"output":["a"]}]"#;
        match parse_lexnorm(text) {
            Err(Error::Alignment { tid, .. }) => assert_eq!(tid, "abc"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn stats_count_source_tokens() {
        let text = r#"[{"tid":"1","index":"0","input":["omw","now"],"output":["on my way","now"]}]"#;
        let pairs = parse_lexnorm(text).unwrap();
        let stats = CorpusStats::of(&pairs);
        assert_eq!((stats.pairs, stats.tokens), (1, 2));
    }
}
