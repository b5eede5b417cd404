use super::tape::{gelu, Op};
use super::{gemm, Tape, Tensor, Var, LAYER_NORM_EPS};
use crate::error::{Error, Result};

fn mismatch(op: &'static str, detail: String) -> Error {
    Error::Shape { op, detail }
}

impl Tape {
    fn dims(&self, v: Var) -> (usize, usize) {
        self.value(v).dims()
    }

    fn data(&self, v: Var) -> &[f64] {
        self.value(v).data()
    }

    fn unary(&mut self, a: Var, op: Op, f: impl Fn(f64) -> f64) -> Var {
        let t = self.value(a);
        let out = Tensor::raw(t.shape().to_vec(), t.data().iter().map(|&x| f(x)).collect());
        self.push(op, out)
    }

    fn same_shape(&self, op: &'static str, a: Var, b: Var) -> Result<()> {
        if self.value(a).shape() != self.value(b).shape() {
            return Err(mismatch(
                op,
                format!("{:?} vs {:?}", self.value(a).shape(), self.value(b).shape()),
            ));
        }
        Ok(())
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> Result<Var> {
        let (m, k) = self.dims(a);
        let (k2, n) = self.dims(b);
        if k != k2 {
            return Err(mismatch("matmul", format!("{m}×{k} · {k2}×{n}")));
        }
        let mut out = vec![0.0; m * n];
        gemm(m, k, n, 1.0, self.data(a), false, self.data(b), false, 0.0, &mut out);
        Ok(self.push(Op::MatMul(a.0, b.0), Tensor::raw(vec![m, n], out)))
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var> {
        self.same_shape("add", a, b)?;
        let data = self.data(a).iter().zip(self.data(b)).map(|(x, y)| x + y).collect();
        let shape = self.value(a).shape().to_vec();
        Ok(self.push(Op::Add(a.0, b.0), Tensor::raw(shape, data)))
    }

    /// Adds the vector `bias` to every row of `a`.
    pub fn add_bias(&mut self, a: Var, bias: Var) -> Result<Var> {
        let (rows, cols) = self.dims(a);
        if self.value(bias).len() != cols {
            return Err(mismatch(
                "add_bias",
                format!("bias of shape {:?} for {rows}×{cols}", self.value(bias).shape()),
            ));
        }
        let b = self.data(bias);
        let mut data = self.data(a).to_vec();
        for row in data.chunks_mut(cols.max(1)) {
            for (x, y) in row.iter_mut().zip(b) {
                *x += y;
            }
        }
        let shape = self.value(a).shape().to_vec();
        Ok(self.push(Op::AddBias(a.0, bias.0), Tensor::raw(shape, data)))
    }

    /// Elementwise product.
    pub fn multiply(&mut self, a: Var, b: Var) -> Result<Var> {
        self.same_shape("multiply", a, b)?;
        let data = self.data(a).iter().zip(self.data(b)).map(|(x, y)| x * y).collect();
        let shape = self.value(a).shape().to_vec();
        Ok(self.push(Op::Mul(a.0, b.0), Tensor::raw(shape, data)))
    }

    pub fn scale(&mut self, a: Var, c: f64) -> Var {
        self.unary(a, Op::Scale(a.0, c), |x| c * x)
    }

    /// Joins matrices with equal row counts side by side.
    pub fn concat(&mut self, parts: &[Var]) -> Result<Var> {
        let Some(&first) = parts.first() else {
            return Err(mismatch("concat", "no inputs".into()));
        };
        let rows = self.dims(first).0;
        let mut cols = 0;
        for &p in parts {
            let (r, c) = self.dims(p);
            if r != rows {
                return Err(mismatch("concat", format!("row counts {rows} and {r}")));
            }
            cols += c;
        }
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for &p in parts {
                data.extend_from_slice(self.value(p).row(r));
            }
        }
        let op = Op::Concat(parts.iter().map(|p| p.0).collect());
        Ok(self.push(op, Tensor::raw(vec![rows, cols], data)))
    }

    /// Columns `start..start + len` of `a`.
    pub fn slice(&mut self, a: Var, start: usize, len: usize) -> Result<Var> {
        let (rows, cols) = self.dims(a);
        if start + len > cols {
            return Err(mismatch("slice", format!("columns {start}..{} of {cols}", start + len)));
        }
        let mut data = Vec::with_capacity(rows * len);
        for r in 0..rows {
            data.extend_from_slice(&self.value(a).row(r)[start..start + len]);
        }
        Ok(self.push(Op::Slice { input: a.0, start }, Tensor::raw(vec![rows, len], data)))
    }

    /// Rows of `table` selected by `ids`.
    pub fn embedding_lookup(&mut self, table: Var, ids: &[usize]) -> Result<Var> {
        let (n, w) = self.dims(table);
        if let Some(&bad) = ids.iter().find(|&&i| i >= n) {
            return Err(mismatch("embedding_lookup", format!("id {bad} in a table of {n} rows")));
        }
        let mut data = Vec::with_capacity(ids.len() * w);
        for &i in ids {
            data.extend_from_slice(self.value(table).row(i));
        }
        let op = Op::Embedding {
            table: table.0,
            ids: ids.to_vec(),
        };
        Ok(self.push(op, Tensor::raw(vec![ids.len(), w], data)))
    }

    /// Row-wise normalisation followed by the affine map `γ·x̂ + β`.
    pub fn layer_norm(&mut self, x: Var, gamma: Var, beta: Var) -> Result<Var> {
        let (rows, cols) = self.dims(x);
        if self.value(gamma).len() != cols || self.value(beta).len() != cols {
            return Err(mismatch(
                "layer_norm",
                format!(
                    "gamma {:?} and beta {:?} for {rows}×{cols}",
                    self.value(gamma).shape(),
                    self.value(beta).shape()
                ),
            ));
        }
        let xv = self.data(x);
        let (gv, bv) = (self.data(gamma), self.data(beta));
        let mut xhat = Vec::with_capacity(rows * cols);
        let mut rstd = Vec::with_capacity(rows);
        let mut out = Vec::with_capacity(rows * cols);
        for row in xv.chunks(cols) {
            let mean = row.iter().sum::<f64>() / cols as f64;
            let var = row.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / cols as f64;
            let r = 1.0 / (var + LAYER_NORM_EPS).sqrt();
            rstd.push(r);
            for (j, v) in row.iter().enumerate() {
                let h = (v - mean) * r;
                xhat.push(h);
                out.push(gv[j] * h + bv[j]);
            }
        }
        let op = Op::LayerNorm {
            x: x.0,
            gamma: gamma.0,
            beta: beta.0,
            xhat,
            rstd,
        };
        let shape = self.value(x).shape().to_vec();
        Ok(self.push(op, Tensor::raw(shape, out)))
    }

    pub fn softmax_rows(&mut self, a: Var) -> Var {
        let (_, cols) = self.dims(a);
        let mut data = self.data(a).to_vec();
        for row in data.chunks_mut(cols.max(1)) {
            let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let mut total = 0.0;
            for v in row.iter_mut() {
                *v = (*v - max).exp();
                total += *v;
            }
            row.iter_mut().for_each(|v| *v /= total);
        }
        let shape = self.value(a).shape().to_vec();
        self.push(Op::Softmax(a.0), Tensor::raw(shape, data))
    }

    /// Row-wise `x − log Σ exp(x)`.
    pub fn log_softmax_rows(&mut self, a: Var) -> Var {
        let (_, cols) = self.dims(a);
        let mut data = self.data(a).to_vec();
        for row in data.chunks_mut(cols.max(1)) {
            let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let lse = max + row.iter().map(|v| (v - max).exp()).sum::<f64>().ln();
            row.iter_mut().for_each(|v| *v -= lse);
        }
        let shape = self.value(a).shape().to_vec();
        self.push(Op::LogSoftmax(a.0), Tensor::raw(shape, data))
    }

    pub fn gelu(&mut self, a: Var) -> Var {
        self.unary(a, Op::Gelu(a.0), gelu)
    }

    pub fn tanh(&mut self, a: Var) -> Var {
        self.unary(a, Op::Tanh(a.0), f64::tanh)
    }

    pub fn cos(&mut self, a: Var) -> Var {
        self.unary(a, Op::Cos(a.0), f64::cos)
    }

    pub fn log(&mut self, a: Var) -> Var {
        self.unary(a, Op::Log(a.0), f64::ln)
    }

    pub fn sum(&mut self, a: Var) -> Var {
        let total = self.data(a).iter().sum();
        self.push(Op::Sum(a.0), Tensor::raw(Vec::new(), vec![total]))
    }

    /// Per-row sums as a column.
    pub fn sum_rows(&mut self, a: Var) -> Var {
        let (rows, cols) = self.dims(a);
        let data = (0..rows)
            .map(|r| self.data(a)[r * cols..(r + 1) * cols].iter().sum())
            .collect();
        self.push(Op::SumRows(a.0), Tensor::raw(vec![rows, 1], data))
    }

    pub fn reshape(&mut self, a: Var, shape: &[usize]) -> Result<Var> {
        let size: usize = shape.iter().product();
        if size != self.value(a).len() || shape.len() > 2 {
            return Err(mismatch(
                "reshape",
                format!("{:?} to {shape:?}", self.value(a).shape()),
            ));
        }
        let data = self.data(a).to_vec();
        Ok(self.push(Op::Reshape(a.0), Tensor::raw(shape.to_vec(), data)))
    }

    /// Replaces the entries where `mask` is true by `value`; they carry no
    /// gradient.
    pub fn masked_fill(&mut self, a: Var, mask: &[bool], value: f64) -> Result<Var> {
        if mask.len() != self.value(a).len() {
            return Err(mismatch(
                "masked_fill",
                format!("mask of length {} for {:?}", mask.len(), self.value(a).shape()),
            ));
        }
        let data = self
            .data(a)
            .iter()
            .zip(mask)
            .map(|(&x, &m)| if m { value } else { x })
            .collect();
        let shape = self.value(a).shape().to_vec();
        let op = Op::MaskedFill {
            input: a.0,
            mask: mask.to_vec(),
        };
        Ok(self.push(op, Tensor::raw(shape, data)))
    }

    /// Picks column `idx[r]` from each row `r`, giving a column vector.
    pub fn gather(&mut self, a: Var, idx: &[usize]) -> Result<Var> {
        let (rows, cols) = self.dims(a);
        if idx.len() != rows || idx.iter().any(|&c| c >= cols) {
            return Err(mismatch(
                "gather",
                format!("{} indices into {rows}×{cols}", idx.len()),
            ));
        }
        let data = idx.iter().enumerate().map(|(r, &c)| self.data(a)[r * cols + c]).collect();
        let op = Op::Gather {
            input: a.0,
            idx: idx.to_vec(),
        };
        Ok(self.push(op, Tensor::raw(vec![rows, 1], data)))
    }

    /// Causal multi-head scaled dot-product attention.
    ///
    /// `q`, `k` and `v` stack sequences of length `seq` row-wise; head `h`
    /// owns columns `h·d/heads .. (h+1)·d/heads`. Position `i` attends to
    /// positions `0..=i` of its own sequence.
    pub fn causal_attention(&mut self, q: Var, k: Var, v: Var, seq: usize, heads: usize) -> Result<Var> {
        let (rows, d) = self.dims(q);
        if self.dims(k) != (rows, d) || self.dims(v) != (rows, d) {
            return Err(mismatch(
                "causal_attention",
                format!("q {rows}×{d}, k {:?}, v {:?}", self.dims(k), self.dims(v)),
            ));
        }
        if seq == 0 || rows % seq != 0 || heads == 0 || d % heads != 0 {
            return Err(mismatch(
                "causal_attention",
                format!("{rows}×{d} with sequence length {seq} and {heads} heads"),
            ));
        }
        let dh = d / heads;
        let scale = 1.0 / (dh as f64).sqrt();
        let (qv, kv, vv) = (self.data(q), self.data(k), self.data(v));
        let mut probs = vec![0.0; rows / seq * heads * seq * seq];
        let mut out = vec![0.0; rows * d];
        for b in 0..rows / seq {
            for h in 0..heads {
                let p = &mut probs[(b * heads + h) * seq * seq..(b * heads + h + 1) * seq * seq];
                let col = h * dh;
                for i in 0..seq {
                    let qi = &qv[(b * seq + i) * d + col..(b * seq + i) * d + col + dh];
                    let mut max = f64::NEG_INFINITY;
                    for s in 0..=i {
                        let ks = &kv[(b * seq + s) * d + col..(b * seq + s) * d + col + dh];
                        let score = scale * qi.iter().zip(ks).map(|(a, b)| a * b).sum::<f64>();
                        p[i * seq + s] = score;
                        max = max.max(score);
                    }
                    let mut total = 0.0;
                    for s in 0..=i {
                        let e = (p[i * seq + s] - max).exp();
                        p[i * seq + s] = e;
                        total += e;
                    }
                    let oi = &mut out[(b * seq + i) * d + col..(b * seq + i) * d + col + dh];
                    for s in 0..=i {
                        p[i * seq + s] /= total;
                        let w = p[i * seq + s];
                        let vs = &vv[(b * seq + s) * d + col..(b * seq + s) * d + col + dh];
                        for j in 0..dh {
                            oi[j] += w * vs[j];
                        }
                    }
                }
            }
        }
        let op = Op::Attention {
            q: q.0,
            k: k.0,
            v: v.0,
            seq,
            heads,
            probs,
        };
        Ok(self.push(op, Tensor::raw(vec![rows, d], out)))
    }
}
