use rand::Rng;

use super::param::ParamStore;
use super::tensor::{Scalar, Tensor};
use crate::error::{Error, Result};

/// Adam with bias correction.
#[derive(Clone, Debug)]
pub struct Adam<T> {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    step: u64,
    m: Vec<Tensor<T>>,
    v: Vec<Tensor<T>>,
}

impl<T: Scalar> Adam<T> {
    pub fn new(store: &ParamStore<T>, lr: f64) -> Self {
        let zeros = |s: &ParamStore<T>| s.iter().map(|(_, p)| Tensor::zeros(p.value.shape())).collect();
        Adam {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            step: 0,
            m: zeros(store),
            v: zeros(store),
        }
    }

    pub fn steps(&self) -> u64 {
        self.step
    }

    /// Apply one update from the accumulated gradients. Fails without
    /// touching the store if any updated value would be non-finite.
    pub fn step(&mut self, store: &mut ParamStore<T>) -> Result<()> {
        let t = self.step + 1;
        let (b1, b2) = (self.beta1, self.beta2);
        let c1 = 1.0 - b1.powi(t as i32);
        let c2 = 1.0 - b2.powi(t as i32);
        let mut updates = Vec::with_capacity(store.len());
        for (i, p) in store.iter_mut().enumerate() {
            let (m, v) = (&mut self.m[i], &mut self.v[i]);
            let mut next = p.value.clone();
            for (((w, &g), mv), vv) in next
                .data_mut()
                .iter_mut()
                .zip(p.grad.data())
                .zip(m.data_mut())
                .zip(v.data_mut())
            {
                let g = g.as_f64();
                let mn = b1 * mv.as_f64() + (1.0 - b1) * g;
                let vn = b2 * vv.as_f64() + (1.0 - b2) * g * g;
                *mv = T::from_f64(mn);
                *vv = T::from_f64(vn);
                let upd = self.lr * (mn / c1) / ((vn / c2).sqrt() + self.eps);
                *w = T::from_f64(w.as_f64() - upd);
            }
            if !next.is_finite() {
                return Err(Error::NonFinite(p.name.clone()));
            }
            updates.push(next);
        }
        for (p, next) in store.iter_mut().zip(updates) {
            p.value = next;
        }
        self.step = t;
        Ok(())
    }
}

/// Rescale all gradients so their global L2 norm is at most `max_norm`.
/// Returns the factor applied (1 when unchanged).
pub fn clip_grad_norm<T: Scalar>(store: &mut ParamStore<T>, max_norm: f64) -> f64 {
    let norm = store.grad_norm();
    if norm <= max_norm || norm == 0.0 {
        return 1.0;
    }
    let scale = max_norm / norm;
    let s = T::from_f64(scale);
    for p in store.iter_mut() {
        p.grad.data_mut().iter_mut().for_each(|g| *g = *g * s);
    }
    scale
}

/// Choose the next decoder input: gold with probability `p_teacher`,
/// otherwise the model's own previous argmax.
pub fn scheduled_sample<R: Rng>(gold: usize, predicted: usize, p_teacher: f64, rng: &mut R) -> usize {
    if p_teacher >= 1.0 {
        return gold;
    }
    if p_teacher <= 0.0 {
        return predicted;
    }
    if rng.gen::<f64>() < p_teacher {
        gold
    } else {
        predicted
    }
}

/// Linear decay of the teacher-forcing probability from `start` (first epoch)
/// to `end` (last epoch).
pub fn teacher_schedule(epoch: usize, total_epochs: usize, start: f64, end: f64) -> f64 {
    if total_epochs <= 1 {
        return start;
    }
    let frac = epoch as f64 / (total_epochs - 1) as f64;
    start + (end - start) * frac.clamp(0.0, 1.0)
}
