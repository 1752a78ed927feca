use serde::{Deserialize, Serialize};

use super::pair::{AlignEntry, TweetPair};
use super::special;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PlaceholderKind {
    Mention,
    Url,
    Hash,
}

impl PlaceholderKind {
    pub const ALL: [PlaceholderKind; 3] = [PlaceholderKind::Mention, PlaceholderKind::Url, PlaceholderKind::Hash];

    pub fn token(self) -> &'static str {
        match self {
            PlaceholderKind::Mention => special::MENTION,
            PlaceholderKind::Url => special::URL,
            PlaceholderKind::Hash => special::HASH,
        }
    }

    /// Classify a raw token: `@name` mentions, `#tag` hashtags, and tokens
    /// with a URL scheme or a `www.` prefix.
    pub fn detect(token: &str) -> Option<Self> {
        let lower = token.to_lowercase();
        if lower.starts_with("http://") || lower.starts_with("https://") || lower.starts_with("www.") {
            Some(PlaceholderKind::Url)
        } else if lower.len() > 1 && lower.starts_with('@') {
            Some(PlaceholderKind::Mention)
        } else if lower.len() > 1 && lower.starts_with('#') {
            Some(PlaceholderKind::Hash)
        } else {
            None
        }
    }

    /// Kind of a placeholder symbol.
    pub fn of_placeholder(token: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.token() == token)
    }

    fn slot(self) -> usize {
        self as usize
    }
}

pub type AnonymizationRecord = Vec<(PlaceholderKind, String)>;

/// Lowercased, anonymized pair framed with `<s>` / `</s>` on both sides.
/// Alignment entry 0 and the last entry map the framing symbols onto each
/// other.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PreprocessedPair {
    pub pair: TweetPair,
    pub record: AnonymizationRecord,
}

impl PreprocessedPair {
    /// Source tokens without framing.
    pub fn content_input(&self) -> &[String] {
        let n = self.pair.input.len();
        &self.pair.input[1..n - 1]
    }

    /// Target tokens without framing.
    pub fn content_output(&self) -> &[String] {
        let n = self.pair.output.len();
        &self.pair.output[1..n - 1]
    }

    pub fn content_len(&self) -> usize {
        self.pair.input.len() - 2
    }

    /// Target span of content position `i` (0-based, excluding `<s>`).
    pub fn content_target(&self, i: usize) -> &[String] {
        self.pair.target_span(i + 1)
    }
}

fn normalize_token(token: &str, record: Option<&mut AnonymizationRecord>) -> String {
    let lower = token.to_lowercase();
    match PlaceholderKind::detect(&lower) {
        Some(kind) => {
            if let Some(r) = record {
                r.push((kind, lower));
            }
            kind.token().to_string()
        }
        None => lower,
    }
}

/// Lowercase, anonymize and frame a raw token sequence.
pub fn preprocess_tokens(tokens: &[String]) -> (Vec<String>, AnonymizationRecord) {
    let mut record = Vec::new();
    let mut out = Vec::with_capacity(tokens.len() + 2);
    out.push(special::BOS.to_string());
    out.extend(tokens.iter().map(|t| normalize_token(t, Some(&mut record))));
    out.push(special::EOS.to_string());
    (out, record)
}

pub fn preprocess(pair: &TweetPair) -> PreprocessedPair {
    let (input, record) = preprocess_tokens(&pair.input);
    let mut output = Vec::with_capacity(pair.output.len() + 2);
    output.push(special::BOS.to_string());
    output.extend(pair.output.iter().map(|t| normalize_token(t, None)));
    output.push(special::EOS.to_string());

    let mut alignment = Vec::with_capacity(pair.alignment.len() + 2);
    alignment.push(AlignEntry { source: 0, start: 0, end: 1 });
    alignment.extend(pair.alignment.iter().map(|a| AlignEntry {
        source: a.source + 1,
        start: a.start + 1,
        end: a.end + 1,
    }));
    let last = output.len();
    alignment.push(AlignEntry {
        source: input.len() - 1,
        start: last - 1,
        end: last,
    });
    PreprocessedPair {
        pair: TweetPair {
            tid: pair.tid.clone(),
            input,
            output,
            alignment,
        },
        record,
    }
}

/// Restore placeholders positionally per kind and strip framing. Extra
/// placeholders with no recorded original are kept verbatim.
pub fn deanonymize(tokens: &[String], record: &AnonymizationRecord) -> Vec<String> {
    let mut restorer = Restorer::new(record);
    tokens
        .iter()
        .filter(|t| !special::is_framing(t))
        .map(|t| restorer.restore(t))
        .collect()
}

/// De-anonymize per-source prediction strings (possibly multi-word) with
/// the same positional rule, counting placeholders across slots in order.
pub fn deanonymize_slots(slots: &[String], record: &AnonymizationRecord) -> Vec<String> {
    let mut restorer = Restorer::new(record);
    slots
        .iter()
        .map(|slot| {
            slot.split_whitespace()
                .filter(|t| !special::is_framing(t))
                .map(|t| restorer.restore(t))
                .collect::<Vec<_>>()
                .join(" ")
        })
        .collect()
}

struct Restorer<'a> {
    by_kind: [Vec<&'a str>; 3],
    next: [usize; 3],
}

impl<'a> Restorer<'a> {
    fn new(record: &'a AnonymizationRecord) -> Self {
        let mut by_kind: [Vec<&str>; 3] = Default::default();
        for (kind, original) in record {
            by_kind[kind.slot()].push(original);
        }
        Restorer { by_kind, next: [0; 3] }
    }

    fn restore(&mut self, token: &str) -> String {
        match PlaceholderKind::of_placeholder(token) {
            Some(kind) => {
                let k = kind.slot();
                match self.by_kind[k].get(self.next[k]) {
                    Some(orig) => {
                        self.next[k] += 1;
                        orig.to_string()
                    }
                    None => token.to_string(),
                }
            }
            None => token.to_string(),
        }
    }
}
