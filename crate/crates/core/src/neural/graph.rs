//! Define-by-run reverse-mode differentiation over dense tensors.
//!
//! Every operation evaluates eagerly and appends a node to the tape. Node ids
//! grow monotonically, so creation order is a topological order and the
//! backward pass is a single reverse sweep.

use std::collections::HashMap;

use super::param::{Gradients, ParamId, ParamStore};
use super::tensor::{softmax_in_place, Scalar, Tensor};
use crate::error::{Error, Result};

/// Handle to a node in a [`Graph`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Var(usize);

#[derive(Debug)]
enum Op<T> {
    Input,
    Param(ParamId),
    MatMul(Var, Var),
    MatMulBt(Var, Var),
    AddBias(Var, Var),
    Add(Var, Var),
    Sub(Var, Var),
    Mul(Var, Var),
    Scale(Var, T),
    Sigmoid(Var),
    Tanh(Var),
    Concat(Vec<Var>),
    Gather(Var, Vec<usize>),
    AttnScores(Var, Vec<Var>),
    MaskedSoftmax(Var, Vec<bool>),
    AttnContext(Var, Vec<Var>),
    SoftmaxXent(Var, Vec<Option<usize>>),
    Sum(Vec<Var>),
}

struct Node<T> {
    op: Op<T>,
    /// `None` for parameter leaves, whose values live in the store.
    value: Option<Tensor<T>>,
    /// Forward cache needed by the backward rule (softmax probabilities).
    cache: Option<Tensor<T>>,
}

pub struct Graph<'p, T: Scalar> {
    store: &'p ParamStore<T>,
    nodes: Vec<Node<T>>,
    param_vars: HashMap<ParamId, Var>,
}

fn dim_err(op: &str, a: &[usize], b: &[usize]) -> Error {
    Error::Dimension(format!("{op}: incompatible shapes {a:?} and {b:?}"))
}

impl<'p, T: Scalar> Graph<'p, T> {
    pub fn new(store: &'p ParamStore<T>) -> Self {
        Graph {
            store,
            nodes: Vec::new(),
            param_vars: HashMap::new(),
        }
    }

    pub fn store(&self) -> &'p ParamStore<T> {
        self.store
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn value(&self, v: Var) -> &Tensor<T> {
        let node = &self.nodes[v.0];
        match (&node.value, &node.op) {
            (Some(t), _) => t,
            (None, Op::Param(id)) => self.store.value(*id),
            _ => unreachable!("node without value"),
        }
    }

    fn push(&mut self, op: Op<T>, value: Tensor<T>) -> Var {
        self.nodes.push(Node {
            op,
            value: Some(value),
            cache: None,
        });
        Var(self.nodes.len() - 1)
    }

    /// Constant leaf; receives no gradient.
    pub fn input(&mut self, value: Tensor<T>) -> Var {
        self.push(Op::Input, value)
    }

    /// Leaf bound to a stored parameter. Repeated calls return the same node,
    /// so tied uses of one parameter accumulate into a single gradient.
    pub fn param(&mut self, id: ParamId) -> Var {
        if let Some(&v) = self.param_vars.get(&id) {
            return v;
        }
        self.nodes.push(Node {
            op: Op::Param(id),
            value: None,
            cache: None,
        });
        let v = Var(self.nodes.len() - 1);
        self.param_vars.insert(id, v);
        v
    }

    /// `[m,k] x [k,n]`
    pub fn matmul(&mut self, a: Var, b: Var) -> Result<Var> {
        let (ta, tb) = (self.value(a), self.value(b));
        let (m, k, n) = (ta.rows(), ta.cols(), tb.cols());
        if tb.shape().len() != 2 || tb.rows() != k {
            return Err(dim_err("matmul", ta.shape(), tb.shape()));
        }
        let mut out = Tensor::zeros(&[m, n]);
        T::gemm(
            m,
            k,
            n,
            ta.data(),
            (k as isize, 1),
            tb.data(),
            (n as isize, 1),
            T::zero(),
            out.data_mut(),
        );
        Ok(self.push(Op::MatMul(a, b), out))
    }

    /// `[m,k] x [n,k]^T`
    pub fn matmul_bt(&mut self, a: Var, b: Var) -> Result<Var> {
        let (ta, tb) = (self.value(a), self.value(b));
        let (m, k, n) = (ta.rows(), ta.cols(), tb.rows());
        if tb.shape().len() != 2 || tb.cols() != k {
            return Err(dim_err("matmul_bt", ta.shape(), tb.shape()));
        }
        let mut out = Tensor::zeros(&[m, n]);
        T::gemm(
            m,
            k,
            n,
            ta.data(),
            (k as isize, 1),
            tb.data(),
            (1, k as isize),
            T::zero(),
            out.data_mut(),
        );
        Ok(self.push(Op::MatMulBt(a, b), out))
    }

    /// Row-broadcast bias: `x[m,n] + b[n]`.
    pub fn add_bias(&mut self, x: Var, b: Var) -> Result<Var> {
        let (tx, tb) = (self.value(x), self.value(b));
        if tb.len() != tx.cols() {
            return Err(dim_err("add_bias", tx.shape(), tb.shape()));
        }
        let mut out = tx.clone();
        let n = tb.len();
        for row in out.data_mut().chunks_mut(n) {
            for (o, &bv) in row.iter_mut().zip(tb.data()) {
                *o += bv;
            }
        }
        Ok(self.push(Op::AddBias(x, b), out))
    }

    fn zip_with(&mut self, a: Var, b: Var, name: &str, f: impl Fn(T, T) -> T) -> Result<Tensor<T>> {
        let (ta, tb) = (self.value(a), self.value(b));
        if ta.shape() != tb.shape() {
            return Err(dim_err(name, ta.shape(), tb.shape()));
        }
        let data = ta
            .data()
            .iter()
            .zip(tb.data())
            .map(|(&x, &y)| f(x, y))
            .collect();
        Tensor::from_vec(ta.shape(), data)
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var> {
        let out = self.zip_with(a, b, "add", |x, y| x + y)?;
        Ok(self.push(Op::Add(a, b), out))
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Result<Var> {
        let out = self.zip_with(a, b, "sub", |x, y| x - y)?;
        Ok(self.push(Op::Sub(a, b), out))
    }

    /// Elementwise product.
    pub fn mul(&mut self, a: Var, b: Var) -> Result<Var> {
        let out = self.zip_with(a, b, "mul", |x, y| x * y)?;
        Ok(self.push(Op::Mul(a, b), out))
    }

    pub fn scale(&mut self, a: Var, c: T) -> Var {
        let out = self.value(a).map(|x| x * c);
        self.push(Op::Scale(a, c), out)
    }

    pub fn sigmoid(&mut self, a: Var) -> Var {
        let out = self.value(a).map(|x| T::one() / (T::one() + (-x).exp()));
        self.push(Op::Sigmoid(a), out)
    }

    pub fn tanh(&mut self, a: Var) -> Var {
        let out = self.value(a).map(|x| x.tanh());
        self.push(Op::Tanh(a), out)
    }

    /// Column-wise concatenation of matrices with equal row counts.
    pub fn concat(&mut self, xs: &[Var]) -> Result<Var> {
        let rows = self.value(xs[0]).rows();
        let mut width = 0;
        for &x in xs {
            let t = self.value(x);
            if t.rows() != rows {
                return Err(dim_err("concat", self.value(xs[0]).shape(), t.shape()));
            }
            width += t.cols();
        }
        let mut out = Tensor::zeros(&[rows, width]);
        for r in 0..rows {
            let mut offset = 0;
            for &x in xs {
                let t = self.value(x);
                let c = t.cols();
                out.row_mut(r)[offset..offset + c].copy_from_slice(t.row(r));
                offset += c;
            }
        }
        Ok(self.push(Op::Concat(xs.to_vec()), out))
    }

    /// Select rows of a `[V,e]` table.
    pub fn gather(&mut self, table: Var, ids: &[usize]) -> Result<Var> {
        let t = self.value(table);
        let (v, e) = (t.rows(), t.cols());
        let mut out = Tensor::zeros(&[ids.len(), e]);
        for (r, &id) in ids.iter().enumerate() {
            if id >= v {
                return Err(Error::Argument(format!("row {id} out of range for table of {v}")));
            }
            out.row_mut(r).copy_from_slice(t.row(id));
        }
        Ok(self.push(Op::Gather(table, ids.to_vec()), out))
    }

    /// Bilinear-score dot products: `out[b,t] = q[b,:] . keys[t][b,:]`.
    pub fn attn_scores(&mut self, q: Var, keys: &[Var]) -> Result<Var> {
        let tq = self.value(q);
        let bsz = tq.rows();
        let steps = keys.len();
        let mut out = Tensor::zeros(&[bsz, steps]);
        for (t, &k) in keys.iter().enumerate() {
            let tk = self.value(k);
            if tk.shape() != tq.shape() {
                return Err(dim_err("attn_scores", tq.shape(), tk.shape()));
            }
            for b in 0..bsz {
                let s: T = tq.row(b).iter().zip(tk.row(b)).map(|(&x, &y)| x * y).sum();
                out.data_mut()[b * steps + t] = s;
            }
        }
        Ok(self.push(Op::AttnScores(q, keys.to_vec()), out))
    }

    /// Row softmax restricted to positions where `mask` is true; masked
    /// entries get probability zero.
    pub fn masked_softmax(&mut self, x: Var, mask: &[bool]) -> Result<Var> {
        let tx = self.value(x);
        if mask.len() != tx.len() {
            return Err(dim_err("masked_softmax", tx.shape(), &[mask.len()]));
        }
        let cols = tx.cols();
        let mut out = Tensor::zeros(tx.shape());
        for r in 0..tx.rows() {
            let row_mask = &mask[r * cols..(r + 1) * cols];
            let valid: Vec<T> = tx
                .row(r)
                .iter()
                .zip(row_mask)
                .filter(|(_, &m)| m)
                .map(|(&v, _)| v)
                .collect();
            if valid.is_empty() {
                return Err(Error::Argument("masked_softmax: fully masked row".into()));
            }
            let mut probs = valid;
            softmax_in_place(&mut probs);
            let mut it = probs.into_iter();
            for (o, &m) in out.row_mut(r).iter_mut().zip(row_mask) {
                if m {
                    *o = it.next().expect("one prob per valid slot");
                }
            }
        }
        Ok(self.push(Op::MaskedSoftmax(x, mask.to_vec()), out))
    }

    /// Convex combination of per-step values: `out[b,:] = sum_t alpha[b,t] values[t][b,:]`.
    pub fn attn_context(&mut self, alpha: Var, values: &[Var]) -> Result<Var> {
        let ta = self.value(alpha);
        if ta.cols() != values.len() {
            return Err(dim_err("attn_context", ta.shape(), &[values.len()]));
        }
        let bsz = ta.rows();
        let e = self.value(values[0]).cols();
        let mut out = Tensor::zeros(&[bsz, e]);
        for (t, &v) in values.iter().enumerate() {
            let tv = self.value(v);
            if tv.rows() != bsz || tv.cols() != e {
                return Err(dim_err("attn_context", &[bsz, e], tv.shape()));
            }
            for b in 0..bsz {
                let w = ta.get(b, t);
                for (o, &x) in out.row_mut(b).iter_mut().zip(tv.row(b)) {
                    *o += w * x;
                }
            }
        }
        Ok(self.push(Op::AttnContext(alpha, values.to_vec()), out))
    }

    /// Summed negative log-likelihood of `targets` under `softmax(logits)`.
    /// Rows whose target is `None` are masked out.
    pub fn softmax_xent(&mut self, logits: Var, targets: &[Option<usize>]) -> Result<Var> {
        let tl = self.value(logits);
        let (rows, v) = (tl.rows(), tl.cols());
        if targets.len() != rows {
            return Err(dim_err("softmax_xent", tl.shape(), &[targets.len()]));
        }
        let mut probs = tl.clone();
        let mut loss = T::zero();
        for (r, target) in targets.iter().enumerate() {
            let row = probs.row_mut(r);
            softmax_in_place(row);
            if let Some(y) = *target {
                if y >= v {
                    return Err(Error::Argument(format!(
                        "target id {y} out of vocabulary range {v}"
                    )));
                }
                loss += -row[y].max(T::min_positive_value()).ln();
            }
        }
        let var = self.push(Op::SoftmaxXent(logits, targets.to_vec()), Tensor::scalar(loss));
        self.nodes[var.0].cache = Some(probs);
        Ok(var)
    }

    /// Sum of scalar nodes.
    pub fn sum(&mut self, xs: &[Var]) -> Result<Var> {
        let mut total = T::zero();
        for &x in xs {
            let t = self.value(x);
            if t.len() != 1 {
                return Err(Error::Dimension(format!("sum expects scalars, got {:?}", t.shape())));
            }
            total += t.data()[0];
        }
        Ok(self.push(Op::Sum(xs.to_vec()), Tensor::scalar(total)))
    }

    /// Reverse sweep from a scalar output. Returns gradients for every
    /// parameter reached from `output`.
    pub fn backward(&self, output: Var) -> Result<Gradients<T>> {
        if self.value(output).len() != 1 {
            return Err(Error::Dimension("backward needs a scalar output".into()));
        }
        let mut grads: Vec<Option<Tensor<T>>> = (0..self.nodes.len()).map(|_| None).collect();
        grads[output.0] = Some(Tensor::scalar(T::one()));
        let mut params: Vec<Option<Tensor<T>>> = (0..self.store.len()).map(|_| None).collect();

        for i in (0..=output.0).rev() {
            let Some(g) = grads[i].take() else { continue };
            let node = &self.nodes[i];
            match &node.op {
                Op::Input => {}
                Op::Param(id) => params[id.0] = Some(g),
                op => self.backprop(op, node, &g, &mut grads),
            }
        }
        Ok(Gradients { params })
    }

    fn backprop(&self, op: &Op<T>, node: &Node<T>, g: &Tensor<T>, grads: &mut [Option<Tensor<T>>]) {
        let mut acc = |v: Var, delta: Tensor<T>| match &mut grads[v.0] {
            Some(existing) => existing.add_assign(&delta),
            slot @ None => *slot = Some(delta),
        };
        match op {
            Op::Input | Op::Param(_) => {}
            Op::MatMul(a, b) => {
                let (ta, tb) = (self.value(*a), self.value(*b));
                let (m, k, n) = (ta.rows(), ta.cols(), tb.cols());
                // da = g b^T ; db = a^T g
                let mut da = Tensor::zeros(ta.shape());
                T::gemm(m, n, k, g.data(), (n as isize, 1), tb.data(), (1, n as isize), T::zero(), da.data_mut());
                let mut db = Tensor::zeros(tb.shape());
                T::gemm(k, m, n, ta.data(), (1, k as isize), g.data(), (n as isize, 1), T::zero(), db.data_mut());
                acc(*a, da);
                acc(*b, db);
            }
            Op::MatMulBt(a, b) => {
                let (ta, tb) = (self.value(*a), self.value(*b));
                let (m, k, n) = (ta.rows(), ta.cols(), tb.rows());
                // da = g b ; db = g^T a
                let mut da = Tensor::zeros(ta.shape());
                T::gemm(m, n, k, g.data(), (n as isize, 1), tb.data(), (k as isize, 1), T::zero(), da.data_mut());
                let mut db = Tensor::zeros(tb.shape());
                T::gemm(n, m, k, g.data(), (1, n as isize), ta.data(), (k as isize, 1), T::zero(), db.data_mut());
                acc(*a, da);
                acc(*b, db);
            }
            Op::AddBias(x, b) => {
                let tb = self.value(*b);
                let mut db = Tensor::zeros(tb.shape());
                for row in g.data().chunks(tb.len()) {
                    for (d, &v) in db.data_mut().iter_mut().zip(row) {
                        *d += v;
                    }
                }
                acc(*x, g.clone());
                acc(*b, db);
            }
            Op::Add(a, b) => {
                acc(*a, g.clone());
                acc(*b, g.clone());
            }
            Op::Sub(a, b) => {
                acc(*a, g.clone());
                acc(*b, g.map(|v| -v));
            }
            Op::Mul(a, b) => {
                let (ta, tb) = (self.value(*a), self.value(*b));
                let da = zip(g, tb, |x, y| x * y);
                let db = zip(g, ta, |x, y| x * y);
                acc(*a, da);
                acc(*b, db);
            }
            Op::Scale(a, c) => acc(*a, g.map(|v| v * *c)),
            Op::Sigmoid(a) => {
                let y = node.value.as_ref().expect("value");
                acc(*a, zip(g, y, |gv, s| gv * s * (T::one() - s)));
            }
            Op::Tanh(a) => {
                let y = node.value.as_ref().expect("value");
                acc(*a, zip(g, y, |gv, t| gv * (T::one() - t * t)));
            }
            Op::Concat(xs) => {
                let rows = g.rows();
                let mut offset = 0;
                for &x in xs {
                    let c = self.value(x).cols();
                    let mut dx = Tensor::zeros(self.value(x).shape());
                    for r in 0..rows {
                        dx.row_mut(r).copy_from_slice(&g.row(r)[offset..offset + c]);
                    }
                    offset += c;
                    acc(x, dx);
                }
            }
            Op::Gather(table, ids) => {
                let mut dt = Tensor::zeros(self.value(*table).shape());
                for (r, &id) in ids.iter().enumerate() {
                    for (d, &v) in dt.row_mut(id).iter_mut().zip(g.row(r)) {
                        *d += v;
                    }
                }
                acc(*table, dt);
            }
            Op::AttnScores(q, keys) => {
                let tq = self.value(*q);
                let steps = keys.len();
                let mut dq = Tensor::zeros(tq.shape());
                for (t, &k) in keys.iter().enumerate() {
                    let tk = self.value(k);
                    let mut dk = Tensor::zeros(tk.shape());
                    for b in 0..tq.rows() {
                        let gv = g.data()[b * steps + t];
                        for ((dqv, dkv), (&qv, &kv)) in dq
                            .row_mut(b)
                            .iter_mut()
                            .zip(dk.row_mut(b).iter_mut())
                            .zip(tq.row(b).iter().zip(tk.row(b)))
                        {
                            *dqv += gv * kv;
                            *dkv += gv * qv;
                        }
                    }
                    acc(k, dk);
                }
                acc(*q, dq);
            }
            Op::MaskedSoftmax(x, mask) => {
                let p = node.value.as_ref().expect("value");
                let cols = p.cols();
                let mut dx = Tensor::zeros(p.shape());
                for r in 0..p.rows() {
                    let dot: T = p.row(r).iter().zip(g.row(r)).map(|(&a, &b)| a * b).sum();
                    for c in 0..cols {
                        if mask[r * cols + c] {
                            dx.data_mut()[r * cols + c] = p.get(r, c) * (g.get(r, c) - dot);
                        }
                    }
                }
                acc(*x, dx);
            }
            Op::AttnContext(alpha, values) => {
                let ta = self.value(*alpha);
                let mut da = Tensor::zeros(ta.shape());
                for (t, &v) in values.iter().enumerate() {
                    let tv = self.value(v);
                    let mut dv = Tensor::zeros(tv.shape());
                    for b in 0..ta.rows() {
                        let w = ta.get(b, t);
                        let mut dot = T::zero();
                        for ((d, &gv), &xv) in dv.row_mut(b).iter_mut().zip(g.row(b)).zip(tv.row(b)) {
                            *d = w * gv;
                            dot += gv * xv;
                        }
                        da.data_mut()[b * values.len() + t] = dot;
                    }
                    acc(v, dv);
                }
                acc(*alpha, da);
            }
            Op::SoftmaxXent(logits, targets) => {
                let probs = node.cache.as_ref().expect("softmax cache");
                let scale = g.data()[0];
                let mut dl = Tensor::zeros(probs.shape());
                for (r, target) in targets.iter().enumerate() {
                    if let Some(y) = *target {
                        let row = dl.row_mut(r);
                        row.copy_from_slice(probs.row(r));
                        row[y] = row[y] - T::one();
                        row.iter_mut().for_each(|v| *v = *v * scale);
                    }
                }
                acc(*logits, dl);
            }
            Op::Sum(xs) => {
                for &x in xs {
                    acc(x, g.clone());
                }
            }
        }
    }
}

fn zip<T: Scalar>(a: &Tensor<T>, b: &Tensor<T>, f: impl Fn(T, T) -> T) -> Tensor<T> {
    let data = a.data().iter().zip(b.data()).map(|(&x, &y)| f(x, y)).collect();
    Tensor::from_vec(a.shape(), data).expect("same shape")
}
