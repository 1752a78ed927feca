//! Recurrent building blocks assembled on a [`Graph`].

use rand::Rng;

use super::graph::{Graph, Var};
use super::param::{ParamId, ParamStore};
use super::tensor::{Scalar, Tensor};
use crate::error::{Error, Result};

/// Gated recurrent unit:
///
/// ```text
/// z  = sigmoid(W_z [x; h] + b_z)
/// r  = sigmoid(W_r [x; h] + b_r)
/// h~ = tanh(W_h [x; r*h] + b_h)
/// h' = (1 - z) * h + z * h~
/// ```
#[derive(Clone, Debug)]
pub struct GruCell {
    pub w_z: ParamId,
    pub b_z: ParamId,
    pub w_r: ParamId,
    pub b_r: ParamId,
    pub w_h: ParamId,
    pub b_h: ParamId,
    pub input_dim: usize,
    pub hidden_dim: usize,
}

impl GruCell {
    pub fn new<T: Scalar, R: Rng>(
        store: &mut ParamStore<T>,
        name: &str,
        input_dim: usize,
        hidden_dim: usize,
        init_range: f64,
        rng: &mut R,
    ) -> Self {
        let joint = [input_dim + hidden_dim, hidden_dim];
        let mut mk = |suffix: &str, shape: &[usize]| {
            store.add_uniform(format!("{name}.{suffix}"), shape, init_range, rng)
        };
        GruCell {
            w_z: mk("w_z", &joint),
            b_z: mk("b_z", &[hidden_dim]),
            w_r: mk("w_r", &joint),
            b_r: mk("b_r", &[hidden_dim]),
            w_h: mk("w_h", &joint),
            b_h: mk("b_h", &[hidden_dim]),
            input_dim,
            hidden_dim,
        }
    }

    /// One recurrent update for a batch: `x` is `[B, input]`, `h` is `[B, hidden]`.
    pub fn step<T: Scalar>(&self, g: &mut Graph<'_, T>, x: Var, h: Var) -> Result<Var> {
        let (xs, hs) = (g.value(x).shape().to_vec(), g.value(h).shape().to_vec());
        if xs.len() != 2 || xs[1] != self.input_dim || hs != [xs[0], self.hidden_dim] {
            return Err(Error::Dimension(format!(
                "gru cell ({} -> {}) got x {xs:?}, h {hs:?}",
                self.input_dim, self.hidden_dim
            )));
        }
        let xh = g.concat(&[x, h])?;
        let z = affine(g, xh, self.w_z, self.b_z)?;
        let z = g.sigmoid(z);
        let r = affine(g, xh, self.w_r, self.b_r)?;
        let r = g.sigmoid(r);
        let rh = g.mul(r, h)?;
        let xrh = g.concat(&[x, rh])?;
        let cand = affine(g, xrh, self.w_h, self.b_h)?;
        let cand = g.tanh(cand);
        // h + z * (cand - h)
        let diff = g.sub(cand, h)?;
        let upd = g.mul(z, diff)?;
        g.add(h, upd)
    }
}

/// `x W + b`
pub fn affine<T: Scalar>(g: &mut Graph<'_, T>, x: Var, w: ParamId, b: ParamId) -> Result<Var> {
    let w = g.param(w);
    let b = g.param(b);
    let xw = g.matmul(x, w)?;
    g.add_bias(xw, b)
}

/// Inverted dropout; identity when `rng` is `None` or `p == 0`.
pub fn dropout<T: Scalar, R: Rng>(
    g: &mut Graph<'_, T>,
    x: Var,
    p: f64,
    rng: Option<&mut R>,
) -> Result<Var> {
    let Some(rng) = rng else { return Ok(x) };
    if p <= 0.0 {
        return Ok(x);
    }
    let shape = g.value(x).shape().to_vec();
    let keep = 1.0 - p;
    let n: usize = shape.iter().product();
    let mask = (0..n)
        .map(|_| {
            if rng.gen::<f64>() < keep {
                T::from_f64(1.0 / keep)
            } else {
                T::zero()
            }
        })
        .collect();
    let m = g.input(Tensor::from_vec(&shape, mask)?);
    g.mul(x, m)
}

/// Padding mask for one time step as a `[B, width]` constant.
fn step_mask<T: Scalar>(g: &mut Graph<'_, T>, valid: &[bool], width: usize) -> Var {
    let data = valid
        .iter()
        .flat_map(|&v| std::iter::repeat_n(if v { T::one() } else { T::zero() }, width))
        .collect();
    g.input(Tensor::from_vec(&[valid.len(), width], data).expect("mask shape"))
}

/// `h_prev + m * (h_new - h_prev)`: padded rows keep their previous state.
fn masked_update<T: Scalar>(
    g: &mut Graph<'_, T>,
    h_prev: Var,
    h_new: Var,
    valid: &[bool],
) -> Result<Var> {
    if valid.iter().all(|&v| v) {
        return Ok(h_new);
    }
    let width = g.value(h_prev).cols();
    let m = step_mask(g, valid, width);
    let diff = g.sub(h_new, h_prev)?;
    let upd = g.mul(m, diff)?;
    g.add(h_prev, upd)
}

/// Stacked bidirectional GRU encoder. Layer `l > 0` reads the concatenated
/// forward/backward states of layer `l - 1`.
#[derive(Clone, Debug)]
pub struct BiEncoder {
    pub layers: Vec<(GruCell, GruCell)>,
}

pub struct Encoded {
    /// Per time step `[B, 2 * hidden]`.
    pub states: Vec<Var>,
    /// Final forward state of each layer (at each row's last valid step).
    pub final_forward: Vec<Var>,
}

impl BiEncoder {
    pub fn new<T: Scalar, R: Rng>(
        store: &mut ParamStore<T>,
        name: &str,
        input_dim: usize,
        hidden_dim: usize,
        layers: usize,
        init_range: f64,
        rng: &mut R,
    ) -> Self {
        let layers = (0..layers)
            .map(|l| {
                let in_dim = if l == 0 { input_dim } else { 2 * hidden_dim };
                (
                    GruCell::new(store, &format!("{name}.l{l}.fwd"), in_dim, hidden_dim, init_range, rng),
                    GruCell::new(store, &format!("{name}.l{l}.bwd"), in_dim, hidden_dim, init_range, rng),
                )
            })
            .collect();
        BiEncoder { layers }
    }

    pub fn hidden_dim(&self) -> usize {
        self.layers[0].0.hidden_dim
    }

    /// Encode a padded batch. `inputs[t]` is `[B, input]`; `valid[t][b]` marks
    /// real (non-pad) positions, which must form a prefix of each row.
    pub fn encode<T: Scalar, R: Rng>(
        &self,
        g: &mut Graph<'_, T>,
        inputs: &[Var],
        valid: &[Vec<bool>],
        dropout_p: f64,
        mut rng: Option<&mut R>,
    ) -> Result<Encoded> {
        if inputs.is_empty() {
            return Err(Error::Argument("cannot encode an empty sequence".into()));
        }
        let bsz = g.value(inputs[0]).rows();
        let hidden = self.hidden_dim();
        let mut layer_in = inputs.to_vec();
        let mut final_forward = Vec::with_capacity(self.layers.len());
        for (l, (fwd, bwd)) in self.layers.iter().enumerate() {
            if l > 0 {
                layer_in = layer_in
                    .into_iter()
                    .map(|x| dropout(g, x, dropout_p, rng.as_deref_mut()))
                    .collect::<Result<_>>()?;
            }
            let steps = layer_in.len();
            let zero = g.input(Tensor::zeros(&[bsz, hidden]));
            let mut h = zero;
            let mut fwd_states = Vec::with_capacity(steps);
            for t in 0..steps {
                let cand = fwd.step(g, layer_in[t], h)?;
                h = masked_update(g, h, cand, &valid[t])?;
                fwd_states.push(h);
            }
            final_forward.push(h);
            // Walking backwards over right padding leaves the state at zero
            // until each row's last real token.
            let mut h = zero;
            let mut bwd_states = vec![zero; steps];
            for t in (0..steps).rev() {
                let cand = bwd.step(g, layer_in[t], h)?;
                h = masked_update(g, h, cand, &valid[t])?;
                bwd_states[t] = h;
            }
            layer_in = fwd_states
                .into_iter()
                .zip(bwd_states)
                .map(|(f, b)| g.concat(&[f, b]))
                .collect::<Result<_>>()?;
        }
        Ok(Encoded {
            states: layer_in,
            final_forward,
        })
    }
}

/// General (bilinear) attention: `score(s, h_k) = s^T W h_k`, softmax over
/// valid source positions, context `c = sum_k alpha_k h_k`.
///
/// `mask` is `[B * T]`, row-major over batch then time.
pub fn attention<T: Scalar>(
    g: &mut Graph<'_, T>,
    s_prev: Var,
    keys: &[Var],
    w: Var,
    mask: &[bool],
) -> Result<(Var, Var)> {
    let sw = g.matmul(s_prev, w)?;
    let scores = g.attn_scores(sw, keys)?;
    let alpha = g.masked_softmax(scores, mask)?;
    let context = g.attn_context(alpha, keys)?;
    Ok((alpha, context))
}

/// Stacked GRU decoder with general attention and an output layer tied to
/// the target embedding table.
#[derive(Clone, Debug)]
pub struct Decoder {
    pub layers: Vec<GruCell>,
    pub attn_w: ParamId,
    pub proj_w: ParamId,
    pub proj_b: ParamId,
    pub out_b: ParamId,
    /// Shared with the embedding lookup; the output projection is its transpose.
    pub embedding: ParamId,
}

pub struct DecoderOutput {
    pub states: Vec<Var>,
    pub logits: Var,
    pub alpha: Var,
}

impl Decoder {
    #[allow(clippy::too_many_arguments)]
    pub fn new<T: Scalar, R: Rng>(
        store: &mut ParamStore<T>,
        name: &str,
        embedding: ParamId,
        emb_dim: usize,
        context_dim: usize,
        hidden_dim: usize,
        layers: usize,
        vocab_size: usize,
        init_range: f64,
        rng: &mut R,
    ) -> Self {
        let cells = (0..layers)
            .map(|l| {
                let in_dim = if l == 0 { emb_dim + context_dim } else { hidden_dim };
                GruCell::new(store, &format!("{name}.l{l}"), in_dim, hidden_dim, init_range, rng)
            })
            .collect();
        let attn_w = store.add_uniform(format!("{name}.attn_w"), &[hidden_dim, context_dim], init_range, rng);
        let proj_w = store.add_uniform(format!("{name}.proj_w"), &[hidden_dim, emb_dim], init_range, rng);
        let proj_b = store.add_uniform(format!("{name}.proj_b"), &[emb_dim], init_range, rng);
        let out_b = store.add_uniform(format!("{name}.out_b"), &[vocab_size], init_range, rng);
        Decoder {
            layers: cells,
            attn_w,
            proj_w,
            proj_b,
            out_b,
            embedding,
        }
    }

    /// One decoding step. `states` holds the per-layer previous states
    /// (`s_{j-1}`); attention is driven by the top layer.
    #[allow(clippy::too_many_arguments)]
    pub fn step<T: Scalar, R: Rng>(
        &self,
        g: &mut Graph<'_, T>,
        states: &[Var],
        y_prev_emb: Var,
        keys: &[Var],
        mask: &[bool],
        dropout_p: f64,
        mut rng: Option<&mut R>,
    ) -> Result<DecoderOutput> {
        let w = g.param(self.attn_w);
        let top = *states.last().expect("at least one decoder layer");
        let (alpha, context) = attention(g, top, keys, w, mask)?;
        let mut x = g.concat(&[y_prev_emb, context])?;
        let mut next = Vec::with_capacity(self.layers.len());
        for (l, cell) in self.layers.iter().enumerate() {
            if l > 0 {
                x = dropout(g, x, dropout_p, rng.as_deref_mut())?;
            }
            let s = cell.step(g, x, states[l])?;
            next.push(s);
            x = s;
        }
        let logits = self.logits(g, x)?;
        Ok(DecoderOutput {
            states: next,
            logits,
            alpha,
        })
    }

    /// `psi(s) = (s P + p) E^T + b` with `E` the shared embedding table.
    pub fn logits<T: Scalar>(&self, g: &mut Graph<'_, T>, s: Var) -> Result<Var> {
        let z = affine(g, s, self.proj_w, self.proj_b)?;
        let e = g.param(self.embedding);
        let scores = g.matmul_bt(z, e)?;
        let b = g.param(self.out_b);
        g.add_bias(scores, b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn zero_cell(store: &mut ParamStore<f64>, input: usize, hidden: usize) -> GruCell {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        GruCell::new(store, "c", input, hidden, 0.0, &mut rng)
    }

    #[test]
    fn zero_weights_halve_the_state() {
        let mut store = ParamStore::<f64>::new();
        let cell = zero_cell(&mut store, 3, 2);
        let mut g = Graph::new(&store);
        let x = g.input(Tensor::zeros(&[1, 3]));
        let h = g.input(Tensor::full(&[1, 2], 1.0));
        let out = cell.step(&mut g, x, h).unwrap();
        assert_eq!(g.value(out).data(), &[0.5, 0.5]);
    }

    #[test]
    fn bias_only_update() {
        let mut store = ParamStore::<f64>::new();
        let cell = zero_cell(&mut store, 2, 2);
        store.set_value(cell.b_z, Tensor::from_vec(&[2], vec![0.3, -1.2]).unwrap()).unwrap();
        store.set_value(cell.b_h, Tensor::from_vec(&[2], vec![0.7, 0.1]).unwrap()).unwrap();
        store.set_value(cell.b_r, Tensor::from_vec(&[2], vec![5.0, 5.0]).unwrap()).unwrap();
        let mut g = Graph::new(&store);
        let x = g.input(Tensor::zeros(&[1, 2]));
        let h = g.input(Tensor::zeros(&[1, 2]));
        let out = cell.step(&mut g, x, h).unwrap();
        let sig = |v: f64| 1.0 / (1.0 + (-v).exp());
        let expected = [sig(0.3) * 0.7f64.tanh(), sig(-1.2) * 0.1f64.tanh()];
        for (a, b) in g.value(out).data().iter().zip(expected) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn cell_rejects_wrong_input_width() {
        let mut store = ParamStore::<f64>::new();
        let cell = zero_cell(&mut store, 3, 2);
        let mut g = Graph::new(&store);
        let x = g.input(Tensor::zeros(&[1, 4]));
        let h = g.input(Tensor::zeros(&[1, 2]));
        assert!(matches!(cell.step(&mut g, x, h), Err(Error::Dimension(_))));
    }

    #[test]
    fn empty_sequence_is_rejected() {
        let mut store = ParamStore::<f64>::new();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let enc = BiEncoder::new(&mut store, "enc", 2, 3, 1, 0.1, &mut rng);
        let mut g = Graph::new(&store);
        let r = enc.encode::<f64, ChaCha8Rng>(&mut g, &[], &[], 0.0, None);
        assert!(matches!(r, Err(Error::Argument(_))));
    }
}
