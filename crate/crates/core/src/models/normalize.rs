//! Tweet normalizers. Each takes raw source tokens and returns one
//! prediction string per token (multi-word predictions joined by spaces).

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::align::{align_output, content_attention};
use super::lexicon::{dict1_normalize, DictLexicon};
use super::seq2seq::{DecodeResult, Seq2Seq, SeqExample};
use crate::corpus::{
    deanonymize_slots, make_self_targets, preprocess_tokens, special, PreprocessedPair, Vocabulary,
};
use crate::error::{Error, Result};
use crate::neural::serialize::{Manifest, FORMAT_VERSION, MANIFEST_FILE};

/// Whether the character model may rewrite `token`: placeholders,
/// punctuation-only tokens and single characters are always copied.
pub fn char_eligible(token: &str) -> bool {
    !special::is_special(token) && token.chars().count() > 1 && token.chars().any(char::is_alphanumeric)
}

/// Lowercased, anonymized content tokens and their record.
fn prepare(tokens: &[String]) -> (Vec<String>, crate::corpus::AnonymizationRecord) {
    let (mut framed, record) = preprocess_tokens(tokens);
    framed.pop();
    framed.remove(0);
    (framed, record)
}

/// Per-source slots to final strings: placeholders are kept verbatim, stray
/// special symbols are dropped, empty or unresolved slots copy the source,
/// then placeholders are restored.
fn finalize(
    content: &[String],
    slots: Vec<Vec<String>>,
    record: &crate::corpus::AnonymizationRecord,
) -> Vec<String> {
    let joined: Vec<String> = content
        .iter()
        .zip(slots)
        .map(|(src, slot)| {
            if special::is_placeholder(src) {
                return src.clone();
            }
            let kept: Vec<String> = slot.into_iter().filter(|t| !special::is_special(t)).collect();
            if kept.is_empty() {
                src.clone()
            } else {
                kept.join(" ")
            }
        })
        .collect();
    deanonymize_slots(&joined, record)
}

/// Decode `content`, resolve each UNK emission through `on_unk(k)` where
/// `k` is the attended source position, and align the result to sources.
fn decode_slots<F>(model: &Seq2Seq, content: &[String], mut on_unk: F) -> Result<(Vec<Vec<String>>, DecodeResult)>
where
    F: FnMut(usize) -> Result<String>,
{
    let result = model.decode(content)?;
    let mut tokens = Vec::with_capacity(result.tokens.len());
    for (j, t) in result.tokens.iter().enumerate() {
        if result.ids[j] == Vocabulary::UNK {
            match result.attended_source(j, content.len()) {
                Some(k) => tokens.push(on_unk(k)?),
                None => continue,
            }
        } else {
            tokens.push(t.clone());
        }
    }
    let attention = content_attention(&result.attention, content.len());
    Ok((align_output(content, &tokens, &attention), result))
}

/// Word Seq2Seq: unknown words are copied from the attended source.
pub fn normalize_word_s2s(model: &Seq2Seq, tokens: &[String]) -> Result<Vec<String>> {
    let (content, record) = prepare(tokens);
    if content.is_empty() {
        return Ok(Vec::new());
    }
    let (slots, _) = decode_slots(model, &content, |k| Ok(content[k].clone()))?;
    Ok(finalize(&content, slots, &record))
}

/// Word model with a confidence-gated character fallback for unknown words.
#[derive(Clone, Debug)]
pub struct HybridModel {
    pub word: Seq2Seq,
    pub chars: Seq2Seq,
    /// Confidence threshold; `1.0` disables the character model.
    pub tau: f64,
}

#[derive(Serialize, Deserialize)]
struct HybridConfig {
    tau: f64,
    word: String,
    chars: String,
}

pub const HYBRID_KIND: &str = "hybrid";

impl HybridModel {
    pub fn new(word: Seq2Seq, chars: Seq2Seq, tau: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&tau) {
            return Err(Error::Argument(format!("threshold {tau} outside [0, 1]")));
        }
        Ok(HybridModel { word, chars, tau })
    }

    /// Character-model rewrite of an unknown word, or the word itself when
    /// the gate stays closed.
    pub fn correct_oov(&self, word: &str) -> Result<String> {
        if !char_eligible(word) || self.tau >= 1.0 {
            return Ok(word.to_string());
        }
        let (candidate, conf) = self.chars.decode_word(word)?;
        if conf >= self.tau && !candidate.is_empty() {
            Ok(candidate)
        } else {
            Ok(word.to_string())
        }
    }

    pub fn normalize(&self, tokens: &[String]) -> Result<Vec<String>> {
        let (content, record) = prepare(tokens);
        if content.is_empty() {
            return Ok(Vec::new());
        }
        let (mut slots, _) = decode_slots(&self.word, &content, |k| {
            let w = &content[k];
            if self.word.vocab().contains(w) {
                Ok(w.clone())
            } else {
                self.correct_oov(w)
            }
        })?;
        // unknown words the decoder dropped get the same fallback
        for (w, slot) in content.iter().zip(slots.iter_mut()) {
            let dropped = slot.iter().all(|t| special::is_special(t));
            if dropped && !special::is_placeholder(w) && !self.word.vocab().contains(w) {
                *slot = vec![self.correct_oov(w)?];
            }
        }
        Ok(finalize(&content, slots, &record))
    }

    /// Writes `word/`, `char/` and a manifest holding the threshold.
    pub fn save(&self, dir: &Path) -> Result<()> {
        self.word.save(&dir.join("word"))?;
        self.chars.save(&dir.join("char"))?;
        let mut manifest = Manifest::new(
            HYBRID_KIND,
            serde_json::to_value(HybridConfig {
                tau: self.tau,
                word: "word".into(),
                chars: "char".into(),
            })?,
            Vec::new(),
        );
        manifest.format_version = FORMAT_VERSION;
        let path = dir.join(MANIFEST_FILE);
        fs::write(&path, serde_json::to_string_pretty(&manifest)?).map_err(|e| Error::io(&path, e))
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let manifest = crate::neural::serialize::read_manifest(dir)?;
        if manifest.kind != HYBRID_KIND {
            return Err(Error::Format(format!("{}: not a hybrid model", dir.display())));
        }
        let cfg: HybridConfig = serde_json::from_value(manifest.hyperparameters)?;
        Self::new(Seq2Seq::load(&dir.join(&cfg.word))?, Seq2Seq::load(&dir.join(&cfg.chars))?, cfg.tau)
    }
}

pub fn normalize_hybrid(model: &HybridModel, tokens: &[String]) -> Result<Vec<String>> {
    model.normalize(tokens)
}

/// Training view for the `@self` model.
pub fn self_examples(corpus: &[PreprocessedPair]) -> Vec<SeqExample> {
    corpus
        .iter()
        .map(|p| {
            let s = make_self_targets(p);
            SeqExample::new(s.content_input().to_vec(), s.content_output().to_vec())
        })
        .collect()
}

/// Model trained to emit `@self` for unchanged tokens. Each `@self` is
/// replaced by the source token at its position, or at the attended
/// position when output and source lengths differ.
pub fn s2sself_normalize(model: &Seq2Seq, tokens: &[String]) -> Result<Vec<String>> {
    let (content, record) = prepare(tokens);
    if content.is_empty() {
        return Ok(Vec::new());
    }
    let result = model.decode(&content)?;
    let positional = result.tokens.len() == content.len();
    let mut out = Vec::with_capacity(result.tokens.len());
    for (j, t) in result.tokens.iter().enumerate() {
        let copy = result.ids[j] == Vocabulary::UNK || t == special::SELF;
        if copy {
            let k = if positional { Some(j) } else { result.attended_source(j, content.len()) };
            if let Some(k) = k {
                out.push(content[k].clone());
            }
        } else {
            out.push(t.clone());
        }
    }
    let attention = content_attention(&result.attention, content.len());
    let slots = align_output(&content, &out, &attention);
    Ok(finalize(&content, slots, &record))
}

/// Source side after the unique-mapping pass: each token expands to the
/// words of its Dict1 output. Returns the words and their owning token.
fn dict1_expand(lexicon: &DictLexicon, content: &[String]) -> (Vec<String>, Vec<usize>) {
    let mut words = Vec::new();
    let mut owner = Vec::new();
    for (i, t) in dict1_normalize(lexicon, content).into_iter().enumerate() {
        let parts: Vec<String> = t.split_whitespace().map(String::from).collect();
        let parts = if parts.is_empty() { vec![content[i].clone()] } else { parts };
        owner.extend(std::iter::repeat_n(i, parts.len()));
        words.extend(parts);
    }
    (words, owner)
}

/// Training view for the multi-mapping model: sources pre-corrected by the
/// unique lexicon.
pub fn multi_examples(corpus: &[PreprocessedPair], lexicon: &DictLexicon) -> Vec<SeqExample> {
    corpus
        .iter()
        .map(|p| SeqExample::new(dict1_expand(lexicon, p.content_input()).0, p.content_output().to_vec()))
        .collect()
}

/// Unique mappings from the lexicon, then a word model for the rest.
pub fn s2smulti_normalize(lexicon: &DictLexicon, model: &Seq2Seq, tokens: &[String]) -> Result<Vec<String>> {
    let (content, record) = prepare(tokens);
    if content.is_empty() {
        return Ok(Vec::new());
    }
    let (words, owner) = dict1_expand(lexicon, &content);
    let (slots, _) = decode_slots(model, &words, |k| Ok(words[k].clone()))?;
    let mut merged: Vec<Vec<String>> = vec![Vec::new(); content.len()];
    for (k, slot) in slots.into_iter().enumerate() {
        let slot = if slot.iter().all(|t| special::is_special(t)) { vec![words[k].clone()] } else { slot };
        merged[owner[k]].extend(slot);
    }
    for (i, m) in merged.iter_mut().enumerate() {
        if let Some(u) = lexicon.unique_target(&content[i]) {
            *m = u.split_whitespace().map(String::from).collect();
        }
    }
    Ok(finalize(&content, merged, &record))
}

/// Character units of a token sequence: placeholders stay whole, tokens
/// are separated by a single space unit. Also returns the owning token of
/// each unit (`None` for separators).
pub fn char_units(tokens: &[String]) -> (Vec<String>, Vec<Option<usize>>) {
    let mut units = Vec::new();
    let mut owner = Vec::new();
    for (i, t) in tokens.iter().enumerate() {
        if i > 0 {
            units.push(" ".to_string());
            owner.push(None);
        }
        if special::is_special(t) {
            units.push(t.clone());
            owner.push(Some(i));
        } else {
            for c in t.chars() {
                units.push(c.to_string());
                owner.push(Some(i));
            }
        }
    }
    (units, owner)
}

/// Training view for the sentence-level character model.
pub fn char_sentence_examples(corpus: &[PreprocessedPair]) -> Vec<SeqExample> {
    corpus
        .iter()
        .map(|p| SeqExample::new(char_units(p.content_input()).0, char_units(p.content_output()).0))
        .collect()
}

/// Sentence-level character model. Output words are aligned to source
/// tokens with character attention summed per token.
pub fn s2schar_normalize(model: &Seq2Seq, tokens: &[String]) -> Result<Vec<String>> {
    let (content, record) = prepare(tokens);
    if content.is_empty() {
        return Ok(Vec::new());
    }
    let (units, owner) = char_units(&content);
    let result = model.decode(&units)?;
    let unit_att = content_attention(&result.attention, units.len());

    let mut words: Vec<String> = Vec::new();
    let mut word_att: Vec<Vec<f64>> = Vec::new();
    let mut current = String::new();
    let mut att = vec![0.0; content.len()];
    let flush = |current: &mut String, att: &mut Vec<f64>, words: &mut Vec<String>, word_att: &mut Vec<Vec<f64>>| {
        if !current.is_empty() {
            words.push(std::mem::take(current));
            let s: f64 = att.iter().sum();
            word_att.push(att.iter().map(|v| if s > 0.0 { v / s } else { 0.0 }).collect());
        }
        att.iter_mut().for_each(|v| *v = 0.0);
    };
    for (j, unit) in result.tokens.iter().enumerate() {
        if unit.chars().all(char::is_whitespace) {
            flush(&mut current, &mut att, &mut words, &mut word_att);
            continue;
        }
        let piece = if result.ids[j] == Vocabulary::UNK {
            match result.attended_source(j, units.len()) {
                Some(k) => units[k].clone(),
                None => continue,
            }
        } else {
            unit.clone()
        };
        current.push_str(&piece);
        for (k, w) in unit_att[j].iter().enumerate() {
            if let Some(i) = owner[k] {
                att[i] += w;
            }
        }
    }
    flush(&mut current, &mut att, &mut words, &mut word_att);
    let slots = align_output(&content, &words, &word_att);
    Ok(finalize(&content, slots, &record))
}
