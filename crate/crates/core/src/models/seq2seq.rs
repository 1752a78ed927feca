//! Attention-based encoder-decoder over word or character tokens.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::hyper::{Granularity, HyperParams};
use crate::corpus::Vocabulary;
use crate::error::{Error, Result};
use crate::neural::serialize::{self, Manifest};
use crate::neural::{
    affine, scheduled_sample, softmax, BiEncoder, Decoder, Graph, ParamId, ParamStore, Scalar,
    Var,
};

/// One training pair of unframed token sequences.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeqExample {
    pub source: Vec<String>,
    pub target: Vec<String>,
}

impl SeqExample {
    pub fn new(source: Vec<String>, target: Vec<String>) -> Self {
        SeqExample { source, target }
    }

    /// Character pair from two words.
    pub fn chars(source: &str, target: &str) -> Self {
        SeqExample {
            source: split_chars(source),
            target: split_chars(target),
        }
    }
}

pub fn split_chars(word: &str) -> Vec<String> {
    word.chars().map(String::from).collect()
}

/// Output of greedy or beam decoding.
#[derive(Clone, Debug, PartialEq)]
pub struct DecodeResult {
    /// Emitted tokens, without the end symbol.
    pub tokens: Vec<String>,
    pub ids: Vec<usize>,
    /// Probability of each emitted token.
    pub step_probs: Vec<f64>,
    /// Attention over framed source positions at each emitted step.
    pub attention: Vec<Vec<f64>>,
    pub confidence: f64,
}

impl DecodeResult {
    /// Content source index (unframed) most attended at `step`.
    pub fn attended_source(&self, step: usize, content_len: usize) -> Option<usize> {
        if content_len == 0 {
            return None;
        }
        let row = &self.attention[step];
        (0..content_len).max_by(|&a, &b| row[a + 1].total_cmp(&row[b + 1]).then(b.cmp(&a)))
    }
}

/// Geometric mean of per-step probabilities; 1 for an empty sequence.
pub fn confidence(step_probs: &[f64]) -> f64 {
    if step_probs.is_empty() {
        return 1.0;
    }
    let mean_log = step_probs.iter().map(|p| p.max(f64::MIN_POSITIVE).ln()).sum::<f64>() / step_probs.len() as f64;
    mean_log.exp()
}

/// Parameter layout. Holds ids only; values live in a [`ParamStore`].
#[derive(Clone, Debug)]
pub struct Seq2SeqNet {
    pub vocab: Vocabulary,
    pub hyper: HyperParams,
    pub embedding: ParamId,
    pub encoder: BiEncoder,
    /// Per decoder layer: affine map from the final forward encoder state.
    pub bridge: Vec<(ParamId, ParamId)>,
    pub decoder: Decoder,
}

struct EncodedBatch {
    keys: Vec<Var>,
    mask: Vec<bool>,
    states: Vec<Var>,
}

impl Seq2SeqNet {
    fn build<T: Scalar, R: Rng>(vocab: Vocabulary, hyper: HyperParams, store: &mut ParamStore<T>, rng: &mut R) -> Self {
        let h = &hyper;
        let embedding = store.add_uniform("embedding", &[vocab.len(), h.embedding_dim], h.init_range, rng);
        let encoder = BiEncoder::new(store, "encoder", h.embedding_dim, h.hidden_dim, h.layers, h.init_range, rng);
        let bridge = (0..h.layers)
            .map(|l| {
                (
                    store.add_uniform(format!("bridge.l{l}.w"), &[h.hidden_dim, h.hidden_dim], h.init_range, rng),
                    store.add_uniform(format!("bridge.l{l}.b"), &[h.hidden_dim], h.init_range, rng),
                )
            })
            .collect();
        let decoder = Decoder::new(
            store,
            "decoder",
            embedding,
            h.embedding_dim,
            2 * h.hidden_dim,
            h.hidden_dim,
            h.layers,
            vocab.len(),
            h.init_range,
            rng,
        );
        Seq2SeqNet {
            vocab,
            hyper,
            embedding,
            encoder,
            bridge,
            decoder,
        }
    }

    /// `<s> source </s>` as ids.
    pub fn source_ids<S: AsRef<str>>(&self, source: &[S]) -> Vec<usize> {
        let mut ids = Vec::with_capacity(source.len() + 2);
        ids.push(Vocabulary::BOS);
        ids.extend(self.vocab.encode(source));
        ids.push(Vocabulary::EOS);
        ids
    }

    /// `target </s>` as ids.
    pub fn target_ids<S: AsRef<str>>(&self, target: &[S]) -> Vec<usize> {
        let mut ids = self.vocab.encode(target);
        ids.push(Vocabulary::EOS);
        ids
    }

    fn encode_batch<T: Scalar, R: Rng>(
        &self,
        g: &mut Graph<'_, T>,
        sources: &[Vec<usize>],
        dropout: f64,
        rng: Option<&mut R>,
    ) -> Result<EncodedBatch> {
        let steps = sources.iter().map(Vec::len).max().unwrap_or(0);
        if sources.is_empty() || steps == 0 {
            return Err(Error::Argument("cannot encode an empty batch".into()));
        }
        let emb = g.param(self.embedding);
        let mut inputs = Vec::with_capacity(steps);
        let mut valid = Vec::with_capacity(steps);
        for t in 0..steps {
            let ids: Vec<usize> = sources.iter().map(|s| s.get(t).copied().unwrap_or(Vocabulary::PAD)).collect();
            inputs.push(g.gather(emb, &ids)?);
            valid.push(sources.iter().map(|s| t < s.len()).collect::<Vec<bool>>());
        }
        let enc = self.encoder.encode(g, &inputs, &valid, dropout, rng)?;
        let mask = (0..sources.len())
            .flat_map(|b| valid.iter().map(move |v| v[b]))
            .collect();
        let states = enc
            .final_forward
            .iter()
            .zip(&self.bridge)
            .map(|(&h, &(w, b))| affine(g, h, w, b))
            .collect::<Result<_>>()?;
        Ok(EncodedBatch {
            keys: enc.states,
            mask,
            states,
        })
    }

    /// Mean per-token negative log-likelihood of a batch. With `rng`,
    /// dropout is active and previous tokens are drawn by scheduled sampling
    /// with gold probability `p_teacher`; without it the pass is
    /// deterministic and teacher-forced.
    pub fn batch_loss<T: Scalar, R: Rng>(
        &self,
        g: &mut Graph<'_, T>,
        batch: &[SeqExample],
        p_teacher: f64,
        mut rng: Option<&mut R>,
    ) -> Result<(Var, usize)> {
        let sources: Vec<_> = batch.iter().map(|e| self.source_ids(&e.source)).collect();
        let targets: Vec<_> = batch.iter().map(|e| self.target_ids(&e.target)).collect();
        let dropout = if rng.is_some() { self.hyper.dropout } else { 0.0 };
        let enc = self.encode_batch(g, &sources, dropout, rng.as_deref_mut())?;
        let mut states = enc.states;
        let emb = g.param(self.embedding);
        let steps = targets.iter().map(Vec::len).max().unwrap_or(0);
        let mut prev = vec![Vocabulary::BOS; batch.len()];
        let mut losses = Vec::with_capacity(steps);
        let mut count = 0;
        for j in 0..steps {
            let x = g.gather(emb, &prev)?;
            let out = self
                .decoder
                .step(g, &states, x, &enc.keys, &enc.mask, dropout, rng.as_deref_mut())?;
            let gold: Vec<Option<usize>> = targets.iter().map(|t| t.get(j).copied()).collect();
            count += gold.iter().flatten().count();
            losses.push(g.softmax_xent(out.logits, &gold)?);
            for (b, p) in prev.iter_mut().enumerate() {
                let y = gold[b].unwrap_or(Vocabulary::PAD);
                *p = match rng.as_deref_mut() {
                    Some(r) if p_teacher < 1.0 => {
                        let pred = g.value(out.logits).argmax_row(b);
                        scheduled_sample(y, pred, p_teacher, r)
                    }
                    _ => y,
                };
            }
            states = out.states;
        }
        let total = g.sum(&losses)?;
        let mean = g.scale(total, T::from_f64(1.0 / count.max(1) as f64));
        Ok((mean, count))
    }

    /// Beam search (`width == 1` is greedy argmax decoding).
    pub fn decode<T: Scalar, S: AsRef<str>>(
        &self,
        store: &ParamStore<T>,
        source: &[S],
        max_len: usize,
        width: usize,
    ) -> Result<DecodeResult> {
        if max_len == 0 {
            return Ok(DecodeResult {
                tokens: Vec::new(),
                ids: Vec::new(),
                step_probs: Vec::new(),
                attention: Vec::new(),
                confidence: 1.0,
            });
        }
        let width = width.max(1);
        let mut g = Graph::new(store);
        let src = self.source_ids(source);
        let enc = self.encode_batch::<T, ChaCha8Rng>(&mut g, &[src], 0.0, None)?;
        let emb = g.param(self.embedding);

        #[derive(Clone)]
        struct Hyp {
            ids: Vec<usize>,
            probs: Vec<f64>,
            attention: Vec<Vec<f64>>,
            logp: f64,
            states: Vec<Var>,
            done: bool,
        }
        let score = |h: &Hyp| h.logp / (h.ids.len() + usize::from(h.done)) as f64;

        let mut beam = vec![Hyp {
            ids: Vec::new(),
            probs: Vec::new(),
            attention: Vec::new(),
            logp: 0.0,
            states: enc.states,
            done: false,
        }];
        for _ in 0..max_len {
            if beam.iter().all(|h| h.done) {
                break;
            }
            let mut cands: Vec<Hyp> = Vec::new();
            for h in &beam {
                if h.done {
                    cands.push(h.clone());
                    continue;
                }
                let last = h.ids.last().copied().unwrap_or(Vocabulary::BOS);
                let x = g.gather(emb, &[last])?;
                let out = self
                    .decoder
                    .step::<T, ChaCha8Rng>(&mut g, &h.states, x, &enc.keys, &enc.mask, 0.0, None)?;
                let probs: Vec<f64> = softmax(g.value(out.logits).row(0)).iter().map(|p| p.as_f64()).collect();
                let alpha: Vec<f64> = g.value(out.alpha).row(0).iter().map(|a| a.as_f64()).collect();
                let mut order: Vec<usize> = (0..probs.len()).collect();
                order.sort_by(|&a, &b| probs[b].total_cmp(&probs[a]).then(a.cmp(&b)));
                for &id in order.iter().take(width) {
                    let p = probs[id];
                    let mut next = h.clone();
                    next.logp += p.max(f64::MIN_POSITIVE).ln();
                    next.states = out.states.clone();
                    if id == Vocabulary::EOS {
                        next.done = true;
                    } else {
                        next.ids.push(id);
                        next.probs.push(p);
                        next.attention.push(alpha.clone());
                    }
                    cands.push(next);
                }
            }
            cands.sort_by(|a, b| b.logp.total_cmp(&a.logp));
            cands.truncate(width);
            beam = cands;
        }
        let best = beam
            .into_iter()
            .max_by(|a, b| score(a).total_cmp(&score(b)))
            .expect("beam is never empty");
        Ok(DecodeResult {
            tokens: best.ids.iter().map(|&i| self.vocab.token(i).to_string()).collect(),
            confidence: confidence(&best.probs),
            ids: best.ids,
            step_probs: best.probs,
            attention: best.attention,
        })
    }

    /// Decode length cap for a source of `len` tokens.
    pub fn max_len_for(&self, len: usize) -> usize {
        self.hyper.max_decode_len.min(2 * len + 5)
    }
}

/// A network layout together with its parameter values.
#[derive(Clone, Debug)]
pub struct Seq2Seq<T: Scalar = f32> {
    pub net: Seq2SeqNet,
    pub store: ParamStore<T>,
}

pub const MODEL_KIND: &str = "seq2seq";

impl<T: Scalar> Seq2Seq<T> {
    /// Fresh model with uniformly initialized parameters (seeded by
    /// `hyper.seed`).
    pub fn new(vocab: Vocabulary, hyper: HyperParams) -> Result<Self> {
        hyper.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(hyper.seed);
        let mut store = ParamStore::new();
        let net = Seq2SeqNet::build(vocab, hyper, &mut store, &mut rng);
        Ok(Seq2Seq { net, store })
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.net.vocab
    }

    pub fn hyper(&self) -> &HyperParams {
        &self.net.hyper
    }

    pub fn granularity(&self) -> Granularity {
        self.net.hyper.granularity
    }

    /// Decode with the configured beam width and length cap.
    pub fn decode<S: AsRef<str>>(&self, source: &[S]) -> Result<DecodeResult> {
        let max_len = self.net.max_len_for(source.len());
        self.net.decode(&self.store, source, max_len, self.net.hyper.beam_width)
    }

    pub fn greedy_decode<S: AsRef<str>>(&self, source: &[S], max_len: usize) -> Result<DecodeResult> {
        self.net.decode(&self.store, source, max_len, 1)
    }

    pub fn beam_decode<S: AsRef<str>>(&self, source: &[S], max_len: usize, width: usize) -> Result<DecodeResult> {
        self.net.decode(&self.store, source, max_len, width)
    }

    /// Character model convenience: decode one word.
    pub fn decode_word(&self, word: &str) -> Result<(String, f64)> {
        let r = self.decode(&split_chars(word))?;
        Ok((r.tokens.concat(), r.confidence))
    }

    /// Deterministic teacher-forced loss over `batch`.
    pub fn eval_loss(&self, batch: &[SeqExample]) -> Result<f64> {
        let mut g = Graph::new(&self.store);
        let (loss, _) = self.net.batch_loss::<T, ChaCha8Rng>(&mut g, batch, 1.0, None)?;
        Ok(g.value(loss).data()[0].as_f64())
    }

    pub fn cast<U: Scalar>(&self) -> Seq2Seq<U> {
        Seq2Seq {
            net: self.net.clone(),
            store: self.store.cast(),
        }
    }

    pub fn save(&self, dir: &Path) -> Result<()> {
        let manifest = Manifest::new(
            MODEL_KIND,
            serde_json::to_value(&self.net.hyper)?,
            self.net.vocab.tokens().to_vec(),
        );
        serialize::save_model(dir, manifest, &self.store)
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let manifest = serialize::read_manifest(dir)?;
        if manifest.kind != MODEL_KIND {
            return Err(Error::Format(format!(
                "{}: expected a {MODEL_KIND} model, found '{}'",
                dir.display(),
                manifest.kind
            )));
        }
        let hyper: HyperParams = serde_json::from_value(manifest.hyperparameters.clone())?;
        let vocab = Vocabulary::from(manifest.vocabulary.clone());
        let mut model = Self::new(vocab, hyper)?;
        serialize::load_weights(dir, &manifest, &mut model.store)?;
        Ok(model)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::count_tokens;
    use crate::neural::finite_diff_check;

    fn toks(s: &str) -> Vec<String> {
        s.split_whitespace().map(String::from).collect()
    }

    fn tiny_vocab(words: &str) -> Vocabulary {
        let t = toks(words);
        Vocabulary::from_counts(&count_tokens(&t), 1)
    }

    fn tiny_hyper() -> HyperParams {
        HyperParams {
            embedding_dim: 4,
            hidden_dim: 3,
            layers: 2,
            dropout: 0.0,
            ..HyperParams::word()
        }
    }

    #[test]
    fn confidence_geometric_mean() {
        assert_eq!(confidence(&[]), 1.0);
        assert_eq!(confidence(&[1.0, 1.0]), 1.0);
        assert!((confidence(&[0.25, 1.0]) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn tied_projection_is_embedding() {
        let m = Seq2Seq::<f32>::new(tiny_vocab("a b c"), tiny_hyper()).unwrap();
        assert_eq!(m.net.decoder.embedding, m.net.embedding);
        let mut g = Graph::new(&m.store);
        assert_eq!(g.param(m.net.embedding), g.param(m.net.decoder.embedding));
    }

    #[test]
    fn zero_decoder_gives_uniform_distribution() {
        let mut m = Seq2Seq::<f64>::new(tiny_vocab("a b c"), tiny_hyper()).unwrap();
        for p in m.store.iter_mut() {
            p.value.fill(0.0);
        }
        let r = m.greedy_decode(&toks("a b"), 1).unwrap();
        let v = m.vocab().len() as f64;
        assert!((r.step_probs[0] - 1.0 / v).abs() < 1e-12);
    }

    #[test]
    fn max_len_zero_is_empty() {
        let m = Seq2Seq::<f32>::new(tiny_vocab("a b"), tiny_hyper()).unwrap();
        let r = m.greedy_decode(&toks("a"), 0).unwrap();
        assert!(r.tokens.is_empty());
        assert_eq!(r.confidence, 1.0);
    }

    #[test]
    fn attention_rows_are_distributions() {
        let m = Seq2Seq::<f32>::new(tiny_vocab("a b c d"), tiny_hyper()).unwrap();
        let r = m.greedy_decode(&toks("a b c"), 4).unwrap();
        for row in &r.attention {
            assert_eq!(row.len(), 5);
            assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-5);
            assert!(row.iter().all(|&a| a >= 0.0));
        }
    }

    #[test]
    fn padded_batch_matches_unpadded() {
        let m = Seq2Seq::<f64>::new(tiny_vocab("a b c d"), tiny_hyper()).unwrap();
        let short = SeqExample::new(toks("a"), toks("b"));
        let long = SeqExample::new(toks("a b c d"), toks("d c b a"));
        let count = |e: &SeqExample| (e.target.len() + 1) as f64;
        let alone = m.eval_loss(std::slice::from_ref(&short)).unwrap() * count(&short);
        let other = m.eval_loss(std::slice::from_ref(&long)).unwrap() * count(&long);
        let both = m.eval_loss(&[short.clone(), long.clone()]).unwrap() * (count(&short) + count(&long));
        assert!((both - alone - other).abs() < 1e-10, "{both} vs {}", alone + other);
    }

    #[test]
    fn gradients_match_finite_differences() {
        let mut m = Seq2Seq::<f64>::new(tiny_vocab("a b c d e f g"), tiny_hyper()).unwrap();
        let batch = vec![
            SeqExample::new(toks("a b c"), toks("d e")),
            SeqExample::new(toks("f"), toks("g a b")),
        ];
        let net = m.net.clone();
        let report = finite_diff_check(
            &mut m.store,
            |g| Ok(net.batch_loss::<f64, ChaCha8Rng>(g, &batch, 1.0, None)?.0),
            1e-5,
            Some(300),
            3,
        )
        .unwrap();
        assert!(report.max_rel_error < 1e-4, "{report:?}");
    }

    #[test]
    fn save_load_roundtrip() {
        let m = Seq2Seq::<f32>::new(tiny_vocab("x y"), tiny_hyper()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        m.save(dir.path()).unwrap();
        let back = Seq2Seq::<f32>::load(dir.path()).unwrap();
        assert_eq!(back.vocab(), m.vocab());
        for ((_, a), (_, b)) in m.store.iter().zip(back.store.iter()) {
            assert_eq!(a.value, b.value);
        }
        let src = toks("x y");
        assert_eq!(m.greedy_decode(&src, 3).unwrap(), back.greedy_decode(&src, 3).unwrap());
    }

    #[test]
    fn wider_beam_never_scores_lower_on_first_step() {
        let m = Seq2Seq::<f64>::new(tiny_vocab("a b c"), tiny_hyper()).unwrap();
        let greedy = m.greedy_decode(&toks("a b"), 1).unwrap();
        let beam = m.beam_decode(&toks("a b"), 1, 3).unwrap();
        assert_eq!(greedy.tokens, beam.tokens);
    }
}
