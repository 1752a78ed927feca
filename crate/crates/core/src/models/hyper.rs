use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Token unit a sequence model reads and writes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Granularity {
    Word,
    Char,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HyperParams {
    pub granularity: Granularity,
    pub embedding_dim: usize,
    pub hidden_dim: usize,
    pub layers: usize,
    pub dropout: f64,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub clip_norm: f64,
    pub init_range: f64,
    /// Probability of feeding the gold previous token, linearly decayed from
    /// `teacher_start` to `teacher_end` over the run.
    pub teacher_start: f64,
    pub teacher_end: f64,
    /// Epochs without validation improvement before stopping; `None` trains
    /// for the full budget.
    pub patience: Option<usize>,
    pub validation_fraction: f64,
    /// Tokens counted fewer times (source and target together) map to UNK.
    pub min_frequency: usize,
    pub max_decode_len: usize,
    pub beam_width: usize,
    pub seed: u64,
}

impl Default for HyperParams {
    fn default() -> Self {
        Self::word()
    }
}

impl HyperParams {
    /// Word-level model.
    pub fn word() -> Self {
        HyperParams {
            granularity: Granularity::Word,
            embedding_dim: 100,
            hidden_dim: 200,
            layers: 3,
            dropout: 0.5,
            learning_rate: 0.01,
            batch_size: 32,
            epochs: 30,
            clip_norm: 5.0,
            init_range: 0.08,
            teacher_start: 1.0,
            teacher_end: 0.5,
            patience: Some(5),
            validation_fraction: 0.1,
            min_frequency: 3,
            max_decode_len: 60,
            beam_width: 1,
            seed: 0,
        }
    }

    /// Secondary character model trained on word pairs.
    pub fn char_secondary() -> Self {
        HyperParams {
            granularity: Granularity::Char,
            embedding_dim: 256,
            hidden_dim: 500,
            layers: 3,
            dropout: 0.5,
            learning_rate: 0.001,
            batch_size: 500,
            epochs: 30,
            min_frequency: 1,
            max_decode_len: 40,
            ..Self::word()
        }
    }

    /// Character model over whole tweets.
    pub fn char_sentence() -> Self {
        HyperParams {
            granularity: Granularity::Char,
            embedding_dim: 256,
            hidden_dim: 512,
            layers: 3,
            dropout: 0.2,
            learning_rate: 0.001,
            batch_size: 32,
            epochs: 30,
            min_frequency: 1,
            max_decode_len: 400,
            ..Self::word()
        }
    }

    /// Shrink dimensions for quick experiments; keeps the rest.
    pub fn tiny(mut self) -> Self {
        self.embedding_dim = 16;
        self.hidden_dim = 32;
        self.layers = 1;
        self.dropout = 0.0;
        self.min_frequency = 1;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Argument(format!("hyperparameters: {m}")));
        if self.embedding_dim == 0 || self.hidden_dim == 0 || self.layers == 0 {
            return bad("dimensions and layer count must be positive");
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return bad("dropout must be in [0, 1)");
        }
        if self.learning_rate.is_nan() || self.learning_rate <= 0.0 || self.clip_norm.is_nan() || self.clip_norm <= 0.0 {
            return bad("learning rate and clip norm must be positive");
        }
        if self.batch_size == 0 || self.beam_width == 0 {
            return bad("batch size and beam width must be positive");
        }
        for p in [self.teacher_start, self.teacher_end] {
            if !(0.0..=1.0).contains(&p) {
                return bad("teacher forcing probabilities must be in [0, 1]");
            }
        }
        if !(0.0..1.0).contains(&self.validation_fraction) {
            return bad("validation fraction must be in [0, 1)");
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_match_reference_settings() {
        let w = HyperParams::word();
        assert_eq!((w.embedding_dim, w.hidden_dim, w.layers, w.batch_size), (100, 200, 3, 32));
        assert_eq!((w.dropout, w.learning_rate), (0.5, 0.01));
        let c = HyperParams::char_secondary();
        assert_eq!((c.embedding_dim, c.hidden_dim, c.layers, c.batch_size), (256, 500, 3, 500));
        assert_eq!((c.dropout, c.learning_rate), (0.5, 0.001));
        let s = HyperParams::char_sentence();
        assert_eq!((s.embedding_dim, s.hidden_dim, s.layers), (256, 512, 3));
        assert_eq!((s.dropout, s.learning_rate), (0.2, 0.001));
        for h in [w, c, s] {
            h.validate().unwrap();
            assert_eq!(h.clip_norm, 5.0);
            assert_eq!(h.beam_width, 1);
        }
    }

    #[test]
    fn partial_json_fills_defaults() {
        let h: HyperParams = serde_json::from_str(r#"{"hidden_dim": 8}"#).unwrap();
        assert_eq!(h.hidden_dim, 8);
        assert_eq!(h.embedding_dim, 100);
    }

    #[test]
    fn invalid_rejected() {
        let mut h = HyperParams::word();
        h.dropout = 1.0;
        assert!(h.validate().is_err());
        let mut h = HyperParams::word();
        h.layers = 0;
        assert!(h.validate().is_err());
    }
}
