use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::hyper::HyperParams;
use super::seq2seq::{Seq2Seq, SeqExample};
use crate::corpus::{count_tokens, PreprocessedPair, Vocabulary};
use crate::error::{Error, Result};
use crate::neural::{clip_grad_norm, teacher_schedule, Adam, Graph};

/// One row of the training log.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochLog {
    pub epoch: usize,
    pub train_loss: f64,
    pub valid_loss: Option<f64>,
    pub p_teacher: f64,
    pub examples: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub epochs: Vec<EpochLog>,
    /// Epoch whose parameters were kept (best validation loss, or last).
    pub best_epoch: usize,
    pub stopped_early: bool,
}

impl TrainReport {
    /// CSV with header `epoch,train_loss,valid_loss,p_teacher,examples`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("epoch,train_loss,valid_loss,p_teacher,examples\n");
        for e in &self.epochs {
            let valid = e.valid_loss.map_or(String::new(), |v| format!("{v:.6}"));
            out.push_str(&format!(
                "{},{:.6},{},{:.4},{}\n",
                e.epoch, e.train_loss, valid, e.p_teacher, e.examples
            ));
        }
        out
    }
}

/// Shared source/target vocabulary over a set of examples.
pub fn example_vocab(examples: &[SeqExample], min_frequency: usize) -> Vocabulary {
    let counts = count_tokens(examples.iter().flat_map(|e| e.source.iter().chain(&e.target)));
    Vocabulary::from_counts(&counts, min_frequency)
}

/// Word-level examples: content tokens of each preprocessed pair.
pub fn word_examples(corpus: &[PreprocessedPair]) -> Vec<SeqExample> {
    corpus
        .iter()
        .map(|p| SeqExample::new(p.content_input().to_vec(), p.content_output().to_vec()))
        .collect()
}

pub fn train_seq2seq(examples: &[SeqExample], hyper: &HyperParams) -> Result<(Seq2Seq, TrainReport)> {
    train_seq2seq_with(examples, hyper, |_, _| Ok(()))
}

/// Train a fresh model. `on_epoch` sees every finished epoch together with
/// the current parameters.
pub fn train_seq2seq_with<F>(examples: &[SeqExample], hyper: &HyperParams, mut on_epoch: F) -> Result<(Seq2Seq, TrainReport)>
where
    F: FnMut(&EpochLog, &Seq2Seq) -> Result<()>,
{
    if examples.is_empty() {
        return Err(Error::Argument("empty corpus".into()));
    }
    hyper.validate()?;
    let vocab = example_vocab(examples, hyper.min_frequency);
    let mut model = Seq2Seq::<f32>::new(vocab, hyper.clone())?;
    let mut rng = ChaCha8Rng::seed_from_u64(hyper.seed.wrapping_add(1));

    let mut order: Vec<usize> = (0..examples.len()).collect();
    let use_validation = hyper.patience.is_some() && hyper.validation_fraction > 0.0 && examples.len() >= 10;
    let valid: Vec<SeqExample> = if use_validation {
        order.shuffle(&mut rng);
        let n = ((examples.len() as f64 * hyper.validation_fraction).round() as usize).max(1);
        order.drain(..n).map(|i| examples[i].clone()).collect()
    } else {
        Vec::new()
    };

    let mut adam = Adam::new(&model.store, hyper.learning_rate);
    let mut report = TrainReport::default();
    let mut best: Option<(f64, usize, crate::neural::ParamStore<f32>)> = None;
    let mut since_best = 0;

    for epoch in 0..hyper.epochs {
        let p_teacher = teacher_schedule(epoch, hyper.epochs, hyper.teacher_start, hyper.teacher_end);
        order.shuffle(&mut rng);
        let (mut loss_sum, mut tokens) = (0.0, 0usize);
        for chunk in order.chunks(hyper.batch_size) {
            let batch: Vec<SeqExample> = chunk.iter().map(|&i| examples[i].clone()).collect();
            model.store.zero_grad();
            let (value, count, grads) = {
                let mut g = Graph::new(&model.store);
                let (loss, count) = model.net.batch_loss(&mut g, &batch, p_teacher, Some(&mut rng))?;
                let value = g.value(loss).data()[0] as f64;
                if !value.is_finite() {
                    return Err(Error::Divergence {
                        epoch,
                        message: format!("loss became {value}"),
                    });
                }
                (value, count, g.backward(loss)?)
            };
            model.store.accumulate(&grads);
            clip_grad_norm(&mut model.store, hyper.clip_norm);
            adam.step(&mut model.store).map_err(|e| Error::Divergence {
                epoch,
                message: e.to_string(),
            })?;
            loss_sum += value * count as f64;
            tokens += count;
        }
        let valid_loss = if valid.is_empty() {
            None
        } else {
            Some(mean_loss(&model, &valid, hyper.batch_size)?)
        };
        let log = EpochLog {
            epoch,
            train_loss: loss_sum / tokens.max(1) as f64,
            valid_loss,
            p_teacher,
            examples: order.len(),
        };
        on_epoch(&log, &model)?;
        report.epochs.push(log);
        report.best_epoch = epoch;

        if let (Some(v), Some(patience)) = (valid_loss, hyper.patience) {
            if best.as_ref().is_none_or(|(b, _, _)| v < *b) {
                best = Some((v, epoch, model.store.clone()));
                since_best = 0;
            } else {
                since_best += 1;
                if since_best >= patience {
                    report.stopped_early = true;
                    break;
                }
            }
        }
    }
    if let Some((_, epoch, store)) = best {
        model.store = store;
        report.best_epoch = epoch;
    }
    Ok((model, report))
}

/// Token-weighted teacher-forced loss over `examples`.
pub fn mean_loss(model: &Seq2Seq, examples: &[SeqExample], batch_size: usize) -> Result<f64> {
    let (mut sum, mut n) = (0.0, 0usize);
    for chunk in examples.chunks(batch_size.max(1)) {
        let count: usize = chunk.iter().map(|e| e.target.len() + 1).sum();
        sum += model.eval_loss(chunk)? * count as f64;
        n += count;
    }
    Ok(sum / n.max(1) as f64)
}

/// Fraction of target positions (including the end symbol) that greedy
/// decoding reproduces.
pub fn token_accuracy(model: &Seq2Seq, examples: &[SeqExample]) -> Result<f64> {
    let (mut hit, mut total) = (0usize, 0usize);
    for e in examples {
        let out = model.greedy_decode(&e.source, e.target.len() + 5)?;
        let gold = model.net.target_ids(&e.target);
        let mut pred = out.ids.clone();
        pred.push(Vocabulary::EOS);
        hit += gold.iter().zip(&pred).filter(|(a, b)| a == b).count();
        total += gold.len();
    }
    Ok(if total == 0 { 1.0 } else { hit as f64 / total as f64 })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ex(s: &str, t: &str) -> SeqExample {
        SeqExample::new(
            s.split_whitespace().map(String::from).collect(),
            t.split_whitespace().map(String::from).collect(),
        )
    }

    fn small() -> HyperParams {
        HyperParams {
            epochs: 40,
            batch_size: 4,
            patience: None,
            learning_rate: 0.02,
            teacher_end: 1.0,
            ..HyperParams::word().tiny()
        }
    }

    #[test]
    fn empty_corpus_is_error() {
        assert!(matches!(train_seq2seq(&[], &small()), Err(Error::Argument(_))));
    }

    #[test]
    fn learns_a_substitution() {
        let data = vec![ex("u", "you"), ex("see u", "see you"), ex("ok", "ok"), ex("u ok", "you ok")];
        let (model, report) = train_seq2seq(&data, &small()).unwrap();
        assert!(report.epochs.last().unwrap().train_loss < report.epochs[0].train_loss);
        let out = model.greedy_decode(&["u"], 5).unwrap();
        assert_eq!(out.tokens, vec!["you"]);
        assert!(out.confidence > 0.9, "{}", out.confidence);
    }

    #[test]
    fn same_seed_same_parameters() {
        let data = vec![ex("a b", "a c"), ex("b", "c")];
        let h = HyperParams { epochs: 1, ..small() };
        let (a, _) = train_seq2seq(&data, &h).unwrap();
        let (b, _) = train_seq2seq(&data, &h).unwrap();
        for ((_, x), (_, y)) in a.store.iter().zip(b.store.iter()) {
            assert_eq!(x.value.data(), y.value.data());
        }
    }

    #[test]
    fn inference_is_repeatable() {
        let data = vec![ex("a b", "a c")];
        let h = HyperParams { epochs: 2, dropout: 0.5, ..small() };
        let (m, _) = train_seq2seq(&data, &h).unwrap();
        assert_eq!(m.greedy_decode(&["a", "b"], 4).unwrap(), m.greedy_decode(&["a", "b"], 4).unwrap());
    }

    #[test]
    fn csv_log_has_one_row_per_epoch() {
        let data = vec![ex("a", "b")];
        let (_, r) = train_seq2seq(&data, &HyperParams { epochs: 3, ..small() }).unwrap();
        assert_eq!(r.to_csv().lines().count(), 4);
    }
}
