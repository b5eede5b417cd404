use super::{gemm, Tensor};
use crate::error::{Error, Result};

/// Handle to a node on a [`Tape`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Var(pub(crate) usize);

#[derive(Debug)]
pub(crate) enum Op {
    Leaf,
    MatMul(usize, usize),
    Add(usize, usize),
    AddBias(usize, usize),
    Mul(usize, usize),
    Scale(usize, f64),
    Concat(Vec<usize>),
    Slice { input: usize, start: usize },
    Embedding { table: usize, ids: Vec<usize> },
    LayerNorm { x: usize, gamma: usize, beta: usize, xhat: Vec<f64>, rstd: Vec<f64> },
    Softmax(usize),
    LogSoftmax(usize),
    Gelu(usize),
    Tanh(usize),
    Cos(usize),
    Log(usize),
    Sum(usize),
    SumRows(usize),
    Reshape(usize),
    MaskedFill { input: usize, mask: Vec<bool> },
    Gather { input: usize, idx: Vec<usize> },
    Attention { q: usize, k: usize, v: usize, seq: usize, heads: usize, probs: Vec<f64> },
}

#[derive(Debug)]
pub(crate) struct Node {
    pub op: Op,
    pub value: Tensor,
    pub param: bool,
    /// Whether any parameter lies upstream of this node.
    pub grad: bool,
}

/// Ordered record of a computation. Inputs of a node always precede it.
#[derive(Debug, Default)]
pub struct Tape {
    pub(crate) nodes: Vec<Node>,
}

/// Gradients of the parameters of a tape.
#[derive(Debug)]
pub struct Gradients {
    grads: Vec<Option<Tensor>>,
}

impl Gradients {
    /// `None` for constants and for parameters the output does not reach.
    pub fn get(&self, v: Var) -> Option<&Tensor> {
        self.grads.get(v.0).and_then(|g| g.as_ref())
    }

    pub fn take(&mut self, v: Var) -> Option<Tensor> {
        self.grads.get_mut(v.0).and_then(|g| g.take())
    }
}

impl Tape {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// A constant input; no gradient is reported for it.
    pub fn constant(&mut self, t: Tensor) -> Var {
        self.push_node(Op::Leaf, t, false)
    }

    /// A differentiable input.
    pub fn param(&mut self, t: Tensor) -> Var {
        self.push_node(Op::Leaf, t, true)
    }

    pub fn value(&self, v: Var) -> &Tensor {
        &self.nodes[v.0].value
    }

    fn push_node(&mut self, op: Op, value: Tensor, param: bool) -> Var {
        self.nodes.push(Node {
            op,
            value,
            grad: param,
            param,
        });
        Var(self.nodes.len() - 1)
    }

    pub(crate) fn push(&mut self, op: Op, value: Tensor) -> Var {
        let grad = op_inputs(&op).iter().any(|&i| self.nodes[i].grad);
        self.nodes.push(Node {
            op,
            value,
            param: false,
            grad,
        });
        Var(self.nodes.len() - 1)
    }

    /// Gradients of the scalar `output` with respect to every parameter.
    pub fn backward(&self, output: Var) -> Result<Gradients> {
        let value = &self.nodes[output.0].value;
        if value.len() != 1 {
            return Err(Error::Shape {
                op: "backward",
                detail: format!("output has shape {:?}, expected a scalar", value.shape()),
            });
        }
        self.backward_seeded(&[(output, Tensor::raw(value.shape().to_vec(), vec![1.0]))])
    }

    /// Vector-Jacobian product: propagates the given upstream gradients
    /// from (possibly non-scalar) nodes back to the parameters.
    pub fn backward_seeded(&self, seeds: &[(Var, Tensor)]) -> Result<Gradients> {
        let n = self.nodes.len();
        let mut grads: Vec<Option<Vec<f64>>> = vec![None; n];
        let mut last = 0;
        for (v, g) in seeds {
            let node = &self.nodes[v.0];
            if g.len() != node.value.len() {
                return Err(Error::Shape {
                    op: "backward",
                    detail: format!(
                        "seed of length {} for node of shape {:?}",
                        g.len(),
                        node.value.shape()
                    ),
                });
            }
            accumulate(&mut grads, v.0, node.value.len(), |d| {
                for (d, s) in d.iter_mut().zip(g.data()) {
                    *d += s;
                }
            });
            last = last.max(v.0);
        }
        let mut out: Vec<Option<Tensor>> = (0..n).map(|_| None).collect();
        for i in (0..=last.min(n.saturating_sub(1))).rev() {
            let node = &self.nodes[i];
            if !node.grad {
                continue;
            }
            let Some(g) = grads[i].take() else { continue };
            if node.param {
                out[i] = Some(Tensor::raw(node.value.shape().to_vec(), g));
                continue;
            }
            self.propagate(i, &g, &mut grads);
        }
        Ok(Gradients { grads: out })
    }

    fn needs(&self, i: usize) -> bool {
        self.nodes[i].grad
    }

    fn len_of(&self, i: usize) -> usize {
        self.nodes[i].value.len()
    }

    fn propagate(&self, i: usize, g: &[f64], grads: &mut [Option<Vec<f64>>]) {
        let node = &self.nodes[i];
        let y = node.value.data();
        match &node.op {
            Op::Leaf => {}
            Op::MatMul(a, b) => {
                let (m, k) = self.nodes[*a].value.dims();
                let n = self.nodes[*b].value.dims().1;
                if self.needs(*a) {
                    let bv = self.nodes[*b].value.data();
                    accumulate(grads, *a, m * k, |d| gemm(m, n, k, 1.0, g, false, bv, true, 1.0, d));
                }
                if self.needs(*b) {
                    let av = self.nodes[*a].value.data();
                    accumulate(grads, *b, k * n, |d| gemm(k, m, n, 1.0, av, true, g, false, 1.0, d));
                }
            }
            Op::Add(a, b) => {
                for &x in [a, b] {
                    if self.needs(x) {
                        accumulate(grads, x, g.len(), |d| add_into(d, g));
                    }
                }
            }
            Op::AddBias(a, b) => {
                if self.needs(*a) {
                    accumulate(grads, *a, g.len(), |d| add_into(d, g));
                }
                if self.needs(*b) {
                    let n = self.len_of(*b);
                    accumulate(grads, *b, n, |d| {
                        for row in g.chunks(n) {
                            add_into(d, row);
                        }
                    });
                }
            }
            Op::Mul(a, b) => {
                let av = self.nodes[*a].value.data();
                let bv = self.nodes[*b].value.data();
                if self.needs(*a) {
                    accumulate(grads, *a, g.len(), |d| {
                        for j in 0..g.len() {
                            d[j] += g[j] * bv[j];
                        }
                    });
                }
                if self.needs(*b) {
                    accumulate(grads, *b, g.len(), |d| {
                        for j in 0..g.len() {
                            d[j] += g[j] * av[j];
                        }
                    });
                }
            }
            Op::Scale(a, c) => {
                accumulate(grads, *a, g.len(), |d| {
                    for (d, g) in d.iter_mut().zip(g) {
                        *d += c * g;
                    }
                });
            }
            Op::Concat(parts) => {
                let (rows, cols) = node.value.dims();
                let mut offset = 0;
                for &p in parts {
                    let w = self.nodes[p].value.dims().1;
                    if self.needs(p) {
                        accumulate(grads, p, rows * w, |d| {
                            for r in 0..rows {
                                add_into(&mut d[r * w..(r + 1) * w], &g[r * cols + offset..r * cols + offset + w]);
                            }
                        });
                    }
                    offset += w;
                }
            }
            Op::Slice { input, start } => {
                let (rows, w) = node.value.dims();
                let cols = self.nodes[*input].value.dims().1;
                accumulate(grads, *input, rows * cols, |d| {
                    for r in 0..rows {
                        add_into(&mut d[r * cols + start..r * cols + start + w], &g[r * w..(r + 1) * w]);
                    }
                });
            }
            Op::Embedding { table, ids } => {
                let w = node.value.dims().1;
                let n = self.len_of(*table);
                accumulate(grads, *table, n, |d| {
                    for (r, &id) in ids.iter().enumerate() {
                        add_into(&mut d[id * w..(id + 1) * w], &g[r * w..(r + 1) * w]);
                    }
                });
            }
            Op::LayerNorm { x, gamma, beta, xhat, rstd } => {
                let (rows, cols) = node.value.dims();
                let gv = self.nodes[*gamma].value.data();
                if self.needs(*x) {
                    accumulate(grads, *x, rows * cols, |d| {
                        let nf = cols as f64;
                        for r in 0..rows {
                            let gr = &g[r * cols..(r + 1) * cols];
                            let xr = &xhat[r * cols..(r + 1) * cols];
                            let mut s1 = 0.0;
                            let mut s2 = 0.0;
                            for j in 0..cols {
                                let dh = gr[j] * gv[j];
                                s1 += dh;
                                s2 += dh * xr[j];
                            }
                            for j in 0..cols {
                                let dh = gr[j] * gv[j];
                                d[r * cols + j] += rstd[r] * (dh - s1 / nf - xr[j] * s2 / nf);
                            }
                        }
                    });
                }
                if self.needs(*gamma) {
                    accumulate(grads, *gamma, cols, |d| {
                        for r in 0..rows {
                            for j in 0..cols {
                                d[j] += g[r * cols + j] * xhat[r * cols + j];
                            }
                        }
                    });
                }
                if self.needs(*beta) {
                    accumulate(grads, *beta, cols, |d| {
                        for row in g.chunks(cols) {
                            add_into(d, row);
                        }
                    });
                }
            }
            Op::Softmax(a) => {
                let cols = node.value.dims().1;
                accumulate(grads, *a, g.len(), |d| {
                    for ((dr, gr), yr) in d.chunks_mut(cols).zip(g.chunks(cols)).zip(y.chunks(cols)) {
                        let dot: f64 = gr.iter().zip(yr).map(|(g, y)| g * y).sum();
                        for j in 0..cols {
                            dr[j] += yr[j] * (gr[j] - dot);
                        }
                    }
                });
            }
            Op::LogSoftmax(a) => {
                let cols = node.value.dims().1;
                accumulate(grads, *a, g.len(), |d| {
                    for ((dr, gr), yr) in d.chunks_mut(cols).zip(g.chunks(cols)).zip(y.chunks(cols)) {
                        let total: f64 = gr.iter().sum();
                        for j in 0..cols {
                            dr[j] += gr[j] - yr[j].exp() * total;
                        }
                    }
                });
            }
            Op::Gelu(a) => {
                let xv = self.nodes[*a].value.data();
                accumulate(grads, *a, g.len(), |d| {
                    for j in 0..g.len() {
                        d[j] += g[j] * gelu_grad(xv[j]);
                    }
                });
            }
            Op::Tanh(a) => {
                accumulate(grads, *a, g.len(), |d| {
                    for j in 0..g.len() {
                        d[j] += g[j] * (1.0 - y[j] * y[j]);
                    }
                });
            }
            Op::Cos(a) => {
                let xv = self.nodes[*a].value.data();
                accumulate(grads, *a, g.len(), |d| {
                    for j in 0..g.len() {
                        d[j] -= g[j] * xv[j].sin();
                    }
                });
            }
            Op::Log(a) => {
                let xv = self.nodes[*a].value.data();
                accumulate(grads, *a, g.len(), |d| {
                    for j in 0..g.len() {
                        d[j] += g[j] / xv[j];
                    }
                });
            }
            Op::Sum(a) => {
                let n = self.len_of(*a);
                accumulate(grads, *a, n, |d| d.iter_mut().for_each(|d| *d += g[0]));
            }
            Op::SumRows(a) => {
                let (rows, cols) = self.nodes[*a].value.dims();
                accumulate(grads, *a, rows * cols, |d| {
                    for r in 0..rows {
                        d[r * cols..(r + 1) * cols].iter_mut().for_each(|d| *d += g[r]);
                    }
                });
            }
            Op::Reshape(a) => accumulate(grads, *a, g.len(), |d| add_into(d, g)),
            Op::MaskedFill { input, mask } => {
                accumulate(grads, *input, g.len(), |d| {
                    for j in 0..g.len() {
                        if !mask[j] {
                            d[j] += g[j];
                        }
                    }
                });
            }
            Op::Gather { input, idx } => {
                let (rows, cols) = self.nodes[*input].value.dims();
                accumulate(grads, *input, rows * cols, |d| {
                    for (r, &c) in idx.iter().enumerate() {
                        d[r * cols + c] += g[r];
                    }
                });
            }
            Op::Attention { q, k, v, seq, heads, probs } => {
                self.attention_backward(g, grads, (*q, *k, *v), *seq, *heads, probs);
            }
        }
    }

    fn attention_backward(
        &self,
        g: &[f64],
        grads: &mut [Option<Vec<f64>>],
        (q, k, v): (usize, usize, usize),
        t: usize,
        heads: usize,
        probs: &[f64],
    ) {
        let (rows, d) = self.nodes[q].value.dims();
        let dh = d / heads;
        let scale = 1.0 / (dh as f64).sqrt();
        let qv = self.nodes[q].value.data();
        let kv = self.nodes[k].value.data();
        let vv = self.nodes[v].value.data();
        let mut dq = vec![0.0; rows * d];
        let mut dk = vec![0.0; rows * d];
        let mut dv = vec![0.0; rows * d];
        let mut ds = vec![0.0; t];
        for b in 0..rows / t {
            for h in 0..heads {
                let p = &probs[(b * heads + h) * t * t..(b * heads + h + 1) * t * t];
                let col = h * dh;
                for i in 0..t {
                    let gi = &g[(b * t + i) * d + col..(b * t + i) * d + col + dh];
                    let mut dot = 0.0;
                    for s in 0..=i {
                        let pv = p[i * t + s];
                        let vs = &vv[(b * t + s) * d + col..(b * t + s) * d + col + dh];
                        let dp: f64 = gi.iter().zip(vs).map(|(a, b)| a * b).sum();
                        ds[s] = dp;
                        dot += pv * dp;
                        let dvs = &mut dv[(b * t + s) * d + col..(b * t + s) * d + col + dh];
                        for j in 0..dh {
                            dvs[j] += pv * gi[j];
                        }
                    }
                    for s in 0..=i {
                        let sc = p[i * t + s] * (ds[s] - dot) * scale;
                        for j in 0..dh {
                            dq[(b * t + i) * d + col + j] += sc * kv[(b * t + s) * d + col + j];
                            dk[(b * t + s) * d + col + j] += sc * qv[(b * t + i) * d + col + j];
                        }
                    }
                }
            }
        }
        for (idx, src) in [(q, dq), (k, dk), (v, dv)] {
            if self.needs(idx) {
                accumulate(grads, idx, rows * d, |dst| add_into(dst, &src));
            }
        }
    }
}

pub(crate) fn op_inputs(op: &Op) -> Vec<usize> {
    match op {
        Op::Leaf => Vec::new(),
        Op::MatMul(a, b) | Op::Add(a, b) | Op::AddBias(a, b) | Op::Mul(a, b) => vec![*a, *b],
        Op::Scale(a, _)
        | Op::Softmax(a)
        | Op::LogSoftmax(a)
        | Op::Gelu(a)
        | Op::Tanh(a)
        | Op::Cos(a)
        | Op::Log(a)
        | Op::Sum(a)
        | Op::SumRows(a)
        | Op::Reshape(a) => vec![*a],
        Op::Concat(parts) => parts.clone(),
        Op::Slice { input, .. } | Op::MaskedFill { input, .. } | Op::Gather { input, .. } => vec![*input],
        Op::Embedding { table, .. } => vec![*table],
        Op::LayerNorm { x, gamma, beta, .. } => vec![*x, *gamma, *beta],
        Op::Attention { q, k, v, .. } => vec![*q, *k, *v],
    }
}

fn accumulate(grads: &mut [Option<Vec<f64>>], i: usize, len: usize, f: impl FnOnce(&mut [f64])) {
    let slot = grads[i].get_or_insert_with(|| vec![0.0; len]);
    f(slot);
}

fn add_into(dst: &mut [f64], src: &[f64]) {
    for (d, s) in dst.iter_mut().zip(src) {
        *d += s;
    }
}

const GELU_C: f64 = 0.797_884_560_802_865_4;
const GELU_A: f64 = 0.044_715;

/// Tanh approximation of the Gaussian error linear unit.
pub(crate) fn gelu(x: f64) -> f64 {
    0.5 * x * (1.0 + (GELU_C * (x + GELU_A * x * x * x)).tanh())
}

fn gelu_grad(x: f64) -> f64 {
    let t = (GELU_C * (x + GELU_A * x * x * x)).tanh();
    0.5 * (1.0 + t) + 0.5 * x * (1.0 - t * t) * GELU_C * (1.0 + 3.0 * GELU_A * x * x)
}
