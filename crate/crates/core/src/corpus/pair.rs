use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Source tokens, flattened target tokens, and for every source position the
/// contiguous (possibly empty) range of target tokens it maps to.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TweetPair {
    pub tid: String,
    pub input: Vec<String>,
    pub output: Vec<String>,
    pub alignment: Vec<AlignEntry>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlignEntry {
    pub source: usize,
    pub start: usize,
    pub end: usize,
}

impl AlignEntry {
    pub fn span(&self) -> Range<usize> {
        self.start..self.end
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }
}

impl TweetPair {
    /// Build from per-source target slots; each slot is split on whitespace
    /// (`"on my way"` becomes a three-token span, `""` an empty one).
    pub fn from_slots(tid: impl Into<String>, input: Vec<String>, slots: &[String]) -> Result<Self> {
        let tid = tid.into();
        if input.len() != slots.len() {
            return Err(Error::Alignment {
                tid,
                message: format!("{} input tokens but {} output slots", input.len(), slots.len()),
            });
        }
        let mut output = Vec::new();
        let mut alignment = Vec::with_capacity(input.len());
        for (i, slot) in slots.iter().enumerate() {
            let start = output.len();
            output.extend(slot.split_whitespace().map(str::to_string));
            alignment.push(AlignEntry {
                source: i,
                start,
                end: output.len(),
            });
        }
        Ok(TweetPair {
            tid,
            input,
            output,
            alignment,
        })
    }

    pub fn len(&self) -> usize {
        self.input.len()
    }

    pub fn is_empty(&self) -> bool {
        self.input.is_empty()
    }

    pub fn target_span(&self, i: usize) -> &[String] {
        &self.output[self.alignment[i].span()]
    }

    /// Target tokens of source `i` joined by single spaces.
    pub fn target_text(&self, i: usize) -> String {
        self.target_span(i).join(" ")
    }

    /// One target string per source token.
    pub fn slots(&self) -> Vec<String> {
        (0..self.len()).map(|i| self.target_text(i)).collect()
    }

    /// Check that alignment covers each source index once, in order, with
    /// contiguous ordered spans that tile the output.
    pub fn validate(&self) -> Result<()> {
        let err = |message: String| Error::Alignment {
            tid: self.tid.clone(),
            message,
        };
        if self.alignment.len() != self.input.len() {
            return Err(err(format!(
                "{} alignment entries for {} source tokens",
                self.alignment.len(),
                self.input.len()
            )));
        }
        let mut cursor = 0;
        for (i, a) in self.alignment.iter().enumerate() {
            if a.source != i {
                return Err(err(format!("entry {i} points at source {}", a.source)));
            }
            if a.start != cursor || a.end < a.start {
                return Err(err(format!("span {:?} of source {i} is not contiguous", a.span())));
            }
            cursor = a.end;
        }
        if cursor != self.output.len() {
            return Err(err("spans do not cover the output".into()));
        }
        Ok(())
    }
}

/// Self-contained training item.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WordPair {
    pub source: String,
    pub target: String,
    pub synthetic: bool,
}

impl WordPair {
    pub fn real(source: impl Into<String>, target: impl Into<String>) -> Self {
        WordPair {
            source: source.into(),
            target: target.into(),
            synthetic: false,
        }
    }

    /// A real pair whose source needs no correction.
    pub fn is_unchanged(&self) -> bool {
        !self.synthetic && self.source == self.target
    }
}
