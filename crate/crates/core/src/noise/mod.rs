//! Synthetic adversarial word pairs for the character-level model.
//!
//! Each generator corrupts the source side of a clean word; the target stays
//! the clean word.

mod keyboard;

use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use rand::seq::IteratorRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use keyboard::{keyboard_neighbors, KeyboardLayout};

use crate::corpus::WordPair;
use crate::error::{Error, Result};

const LASTCHAR_ENDINGS: [char; 7] = ['u', 'y', 's', 'r', 'a', 'o', 'i'];
const VOWELS: [char; 5] = ['a', 'e', 'i', 'o', 'u'];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseType {
    Del,
    Swap,
    LastChar,
    Punct,
    Keyboard,
    Elong,
}

impl NoiseType {
    pub const ALL: [NoiseType; 6] = [
        NoiseType::Del,
        NoiseType::Swap,
        NoiseType::LastChar,
        NoiseType::Punct,
        NoiseType::Keyboard,
        NoiseType::Elong,
    ];

    pub fn name(self) -> &'static str {
        match self {
            NoiseType::Del => "del",
            NoiseType::Swap => "swap",
            NoiseType::LastChar => "lastchar",
            NoiseType::Punct => "punct",
            NoiseType::Keyboard => "keyboard",
            NoiseType::Elong => "elong",
        }
    }
}

impl fmt::Display for NoiseType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for NoiseType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        NoiseType::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| Error::Argument(format!("unknown noise type '{s}'")))
    }
}

/// The word does not meet the generator's precondition; callers skip this
/// type for this word.
#[derive(Clone, Copy, Debug, PartialEq, Eq, thiserror::Error)]
#[error("noise type {0} is inapplicable to this word")]
pub struct Inapplicable(pub NoiseType);

/// A concrete corruption, expressed over character positions.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NoiseEdit {
    Delete { pos: usize },
    SwapAdjacent { pos: usize },
    /// Insert `extra` further copies of the character at `pos`.
    Repeat { pos: usize, extra: usize },
    Replace { pos: usize, with: char },
    Move { from: usize, to: usize },
}

impl NoiseEdit {
    pub fn apply(&self, word: &str) -> String {
        let mut chars: Vec<char> = word.chars().collect();
        match *self {
            NoiseEdit::Delete { pos } => {
                chars.remove(pos);
            }
            NoiseEdit::SwapAdjacent { pos } => chars.swap(pos, pos + 1),
            NoiseEdit::Repeat { pos, extra } => {
                let c = chars[pos];
                chars.splice(pos..pos, std::iter::repeat_n(c, extra));
            }
            NoiseEdit::Replace { pos, with } => chars[pos] = with,
            NoiseEdit::Move { from, to } => {
                let c = chars.remove(from);
                chars.insert(to, c);
            }
        }
        chars.into_iter().collect()
    }
}

/// Generator parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NoiseConfig {
    pub ratio: f64,
    pub seed: u64,
    pub k_max: usize,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        NoiseConfig {
            ratio: 0.1,
            seed: 0,
            k_max: 6,
        }
    }
}

impl NoiseConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.ratio) {
            return Err(Error::Argument(format!("noise ratio {} outside [0, 1]", self.ratio)));
        }
        if self.k_max == 0 {
            return Err(Error::Argument("k_max must be at least 1".into()));
        }
        Ok(())
    }
}

fn positions(chars: &[char], pred: impl Fn(usize, char) -> bool) -> Vec<usize> {
    chars.iter().enumerate().filter(|&(i, &c)| pred(i, c)).map(|(i, _)| i).collect()
}

/// Whether `kind` has at least one valid edit on `word`.
pub fn is_applicable(word: &str, kind: NoiseType, layout: &KeyboardLayout) -> bool {
    let chars: Vec<char> = word.chars().collect();
    candidate_sites(&chars, kind, layout).is_some_and(|s| !s.is_empty())
}

fn candidate_sites(chars: &[char], kind: NoiseType, layout: &KeyboardLayout) -> Option<Vec<usize>> {
    if chars.is_empty() {
        return None;
    }
    let sites = match kind {
        NoiseType::Del if chars.len() >= 2 => (0..chars.len()).collect(),
        NoiseType::Swap if chars.len() >= 2 => positions(&chars[..chars.len() - 1], |i, c| c != chars[i + 1]),
        NoiseType::LastChar if LASTCHAR_ENDINGS.contains(chars.last()?) => vec![chars.len() - 1],
        NoiseType::Punct if chars.len() >= 2 => positions(chars, |_, c| c == '\''),
        NoiseType::Keyboard => positions(chars, |_, c| layout.has_neighbors(c)),
        NoiseType::Elong => positions(chars, |_, c| VOWELS.contains(&c)),
        _ => Vec::new(),
    };
    Some(sites)
}

/// Draw one corruption of `kind` for `word`.
pub fn sample_edit<R: Rng>(
    word: &str,
    kind: NoiseType,
    layout: &KeyboardLayout,
    k_max: usize,
    rng: &mut R,
) -> std::result::Result<NoiseEdit, Inapplicable> {
    let chars: Vec<char> = word.chars().collect();
    let sites = candidate_sites(&chars, kind, layout).unwrap_or_default();
    let &pos = sites.iter().choose(rng).ok_or(Inapplicable(kind))?;
    let k_max = k_max.max(1);
    Ok(match kind {
        NoiseType::Del => NoiseEdit::Delete { pos },
        NoiseType::Swap => NoiseEdit::SwapAdjacent { pos },
        NoiseType::LastChar | NoiseType::Elong => NoiseEdit::Repeat {
            pos,
            extra: rng.gen_range(1..=k_max),
        },
        NoiseType::Punct => {
            // Drop the apostrophe, or shift it one slot (left when possible).
            let movable_left = pos > 0 && chars[pos - 1] != '\'';
            let movable_right = pos + 1 < chars.len() && chars[pos + 1] != '\'';
            if rng.gen_bool(0.5) {
                NoiseEdit::Delete { pos }
            } else if movable_left {
                NoiseEdit::Move { from: pos, to: pos - 1 }
            } else if movable_right {
                NoiseEdit::Move { from: pos, to: pos + 1 }
            } else {
                NoiseEdit::Delete { pos }
            }
        }
        NoiseType::Keyboard => {
            let with = layout
                .neighbors(chars[pos])
                .into_iter()
                .choose(rng)
                .expect("site has neighbours");
            NoiseEdit::Replace { pos, with }
        }
    })
}

/// Corrupt `word` with one edit of `kind`. The result always differs from
/// the input.
pub fn apply_noise<R: Rng>(
    word: &str,
    kind: NoiseType,
    layout: &KeyboardLayout,
    k_max: usize,
    rng: &mut R,
) -> std::result::Result<String, Inapplicable> {
    let edit = sample_edit(word, kind, layout, k_max, rng)?;
    let out = edit.apply(word);
    debug_assert_ne!(out, word);
    Ok(out)
}

/// A word pair with the generator that produced it (`None` for real pairs).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TaggedPair {
    pub pair: WordPair,
    pub noise: Option<NoiseType>,
}

/// Number of (unchanged pair, applicable type) slots eligible for injection.
pub fn applicable_slots(pairs: &[WordPair], layout: &KeyboardLayout) -> usize {
    pairs
        .iter()
        .filter(|p| p.is_unchanged())
        .map(|p| NoiseType::ALL.iter().filter(|&&t| is_applicable(&p.source, t, layout)).count())
        .sum()
}

/// All input pairs followed by synthetic ones: for every unchanged pair and
/// every applicable noise type, a corrupted copy is injected independently
/// with probability `config.ratio`.
pub fn generate_tagged(pairs: &[WordPair], config: &NoiseConfig, layout: &KeyboardLayout) -> Result<Vec<TaggedPair>> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut out: Vec<TaggedPair> = pairs
        .iter()
        .map(|p| TaggedPair {
            pair: p.clone(),
            noise: None,
        })
        .collect();
    if config.ratio <= 0.0 {
        return Ok(out);
    }
    for p in pairs.iter().filter(|p| p.is_unchanged()) {
        for kind in NoiseType::ALL {
            if !is_applicable(&p.source, kind, layout) {
                continue;
            }
            if rng.gen::<f64>() >= config.ratio {
                continue;
            }
            let noised = apply_noise(&p.source, kind, layout, config.k_max, &mut rng)
                .expect("applicability checked");
            out.push(TaggedPair {
                pair: WordPair {
                    source: noised,
                    target: p.target.clone(),
                    synthetic: true,
                },
                noise: Some(kind),
            });
        }
    }
    Ok(out)
}

pub fn generate_adversarial(pairs: &[WordPair], config: &NoiseConfig, layout: &KeyboardLayout) -> Result<Vec<WordPair>> {
    Ok(generate_tagged(pairs, config, layout)?
        .into_iter()
        .map(|t| t.pair)
        .collect())
}

/// Seed for shard `index` of a run seeded with `base`.
pub fn derive_seed(base: u64, index: u64) -> u64 {
    // splitmix64 finalizer
    let mut z = base ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// TSV lines `noised<TAB>clean<TAB>type`; real pairs carry type `real`.
pub fn to_tsv(pairs: &[TaggedPair]) -> String {
    let mut out = String::new();
    for t in pairs {
        let kind = t.noise.map_or("real", NoiseType::name);
        out.push_str(&format!("{}\t{}\t{}\n", t.pair.source, t.pair.target, kind));
    }
    out
}

pub fn from_tsv(text: &str) -> Result<Vec<TaggedPair>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, line)| {
            let cols: Vec<&str> = line.split('\t').collect();
            if cols.len() != 3 || cols[0].is_empty() || cols[1].is_empty() {
                return Err(Error::Parse {
                    index: i,
                    message: format!("expected 'noised<TAB>clean<TAB>type', got {line:?}"),
                });
            }
            let noise = match cols[2] {
                "real" => None,
                other => Some(other.parse::<NoiseType>()?),
            };
            Ok(TaggedPair {
                pair: WordPair {
                    source: cols[0].to_string(),
                    target: cols[1].to_string(),
                    synthetic: noise.is_some(),
                },
                noise,
            })
        })
        .collect()
}

pub fn write_tsv(path: impl AsRef<Path>, pairs: &[TaggedPair]) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, to_tsv(pairs)).map_err(|e| Error::io(path, e))
}

pub fn read_tsv(path: impl AsRef<Path>) -> Result<Vec<TaggedPair>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    from_tsv(&text)
}
