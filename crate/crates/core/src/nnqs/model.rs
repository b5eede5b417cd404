use num_complex::Complex64;
use rayon::prelude::*;

use super::config::Slot;
use super::{sector_mask, tokenize, ModelParams, BEGIN, MASKED_LOGIT};
use crate::autodiff::{Tape, Tensor, Var};
use crate::error::{Error, Result};
use crate::extraction::{
    enumerate_sector, Configuration, TableMeta, TableSource, WavefunctionTable,
};

/// Configurations scored per tape when batches are split across threads.
pub(crate) const SHARD: usize = 64;

/// Largest sector that may be scored exhaustively.
pub const ENUMERATION_LIMIT: usize = 100_000;

/// A recorded forward pass over a batch of in-sector configurations.
pub struct Forward {
    tape: Tape,
    log_prob: Var,
    phase: Var,
    slots: Vec<(Var, Slot)>,
    n_params: usize,
}

impl Forward {
    /// `log p(x)` per configuration.
    pub fn log_probs(&self) -> &[f64] {
        self.tape.value(self.log_prob).data()
    }

    /// `φ(x)` per configuration.
    pub fn phases(&self) -> &[f64] {
        self.tape.value(self.phase).data()
    }

    /// Flat gradient of `Σ_i (a_i·log p_i + b_i·φ_i)`.
    pub fn gradient(&self, d_log_prob: &[f64], d_phase: &[f64]) -> Result<Vec<f64>> {
        let b = self.log_probs().len();
        let seed = |v: &[f64]| Tensor::matrix(b, 1, v.to_vec());
        let mut grads = self
            .tape
            .backward_seeded(&[(self.log_prob, seed(d_log_prob)?), (self.phase, seed(d_phase)?)])?;
        let mut flat = vec![0.0; self.n_params];
        for &(v, slot) in &self.slots {
            if let Some(g) = grads.take(v) {
                flat[slot.range()].copy_from_slice(g.data());
            }
        }
        Ok(flat)
    }
}

impl ModelParams {
    fn leaf(&self, tape: &mut Tape, slot: Slot, grad: bool, slots: &mut Vec<(Var, Slot)>) -> Var {
        let t = Tensor::raw(vec![slot.rows, slot.cols], self.values()[slot.range()].to_vec());
        if grad {
            let v = tape.param(t);
            slots.push((v, slot));
            v
        } else {
            tape.constant(t)
        }
    }

    /// Masked log-conditionals `[B·n, 4]` for token rows `tokens`, each of
    /// length `n_orb`. Rows are only read up to the position being scored,
    /// so trailing padding is harmless.
    fn decoder(&self, tape: &mut Tape, tokens: &[Vec<u8>], grad: bool, slots: &mut Vec<(Var, Slot)>) -> Result<Var> {
        let cfg = self.config();
        let n = cfg.n_orb;
        let lay = self.layout.clone();
        let mut inputs = Vec::with_capacity(tokens.len() * n);
        let mut positions = Vec::with_capacity(tokens.len() * n);
        let mut mask = Vec::with_capacity(tokens.len() * n * 4);
        for seq in tokens {
            let mut used = (0, 0);
            for p in 0..n {
                inputs.push(if p == 0 { BEGIN } else { seq[p - 1] as usize });
                positions.push(p);
                let allowed = sector_mask(used, p, n, cfg.sector);
                mask.extend(allowed.iter().map(|a| !a));
                used.0 += (seq[p] & 1) as usize;
                used.1 += (seq[p] >> 1) as usize;
            }
        }
        let tok = self.leaf(tape, lay.token_embedding, grad, slots);
        let pos = self.leaf(tape, lay.position_embedding, grad, slots);
        let a = tape.embedding_lookup(tok, &inputs)?;
        let b = tape.embedding_lookup(pos, &positions)?;
        let mut x = tape.add(a, b)?;
        let d = cfg.d_model;
        for l in &lay.layers {
            let mut p = |s: Slot| self.leaf(tape, s, grad, slots);
            let (g1, b1, wqkv, bqkv, wo, bo) = (p(l.ln1.0), p(l.ln1.1), p(l.qkv.0), p(l.qkv.1), p(l.proj.0), p(l.proj.1));
            let (g2, b2, w1, c1, w2, c2) = (p(l.ln2.0), p(l.ln2.1), p(l.ff1.0), p(l.ff1.1), p(l.ff2.0), p(l.ff2.1));
            let h = tape.layer_norm(x, g1, b1)?;
            let qkv = tape.matmul(h, wqkv)?;
            let qkv = tape.add_bias(qkv, bqkv)?;
            let q = tape.slice(qkv, 0, d)?;
            let k = tape.slice(qkv, d, d)?;
            let v = tape.slice(qkv, 2 * d, d)?;
            let att = tape.causal_attention(q, k, v, n, cfg.n_heads)?;
            let o = tape.matmul(att, wo)?;
            let o = tape.add_bias(o, bo)?;
            x = tape.add(x, o)?;
            let h = tape.layer_norm(x, g2, b2)?;
            let f = tape.matmul(h, w1)?;
            let f = tape.add_bias(f, c1)?;
            let f = tape.gelu(f);
            let f = tape.matmul(f, w2)?;
            let f = tape.add_bias(f, c2)?;
            x = tape.add(x, f)?;
        }
        let gf = self.leaf(tape, lay.ln_final.0, grad, slots);
        let bf = self.leaf(tape, lay.ln_final.1, grad, slots);
        let wh = self.leaf(tape, lay.head.0, grad, slots);
        let bh = self.leaf(tape, lay.head.1, grad, slots);
        let x = tape.layer_norm(x, gf, bf)?;
        let logits = tape.matmul(x, wh)?;
        let logits = tape.add_bias(logits, bh)?;
        let logits = tape.masked_fill(logits, &mask, MASKED_LOGIT)?;
        Ok(tape.log_softmax_rows(logits))
    }

    fn phase_net(&self, tape: &mut Tape, tokens: &[Vec<u8>], grad: bool, slots: &mut Vec<(Var, Slot)>) -> Result<Var> {
        let n = self.config().n_orb;
        let mut input = Vec::with_capacity(tokens.len() * 2 * n);
        for seq in tokens {
            for &t in seq {
                input.push(1.0 - 2.0 * (t & 1) as f64);
                input.push(1.0 - 2.0 * (t >> 1) as f64);
            }
        }
        let mut h = tape.constant(Tensor::raw(vec![tokens.len(), 2 * n], input));
        let last = self.layout.phase.len() - 1;
        for (i, &(w, b)) in self.layout.phase.iter().enumerate() {
            let w = self.leaf(tape, w, grad, slots);
            let b = self.leaf(tape, b, grad, slots);
            let z = tape.matmul(h, w)?;
            let z = tape.add_bias(z, b)?;
            h = if i < last { tape.tanh(z) } else { z };
        }
        Ok(tape.sum_rows(h))
    }

    fn record(&self, tokens: &[Vec<u8>], grad: bool) -> Result<Forward> {
        let n = self.config().n_orb;
        let mut tape = Tape::new();
        let mut slots = Vec::new();
        let lsm = self.decoder(&mut tape, tokens, grad, &mut slots)?;
        let picks: Vec<usize> = tokens.iter().flat_map(|s| s.iter().map(|&t| t as usize)).collect();
        let picked = tape.gather(lsm, &picks)?;
        let picked = tape.reshape(picked, &[tokens.len(), n])?;
        let log_prob = tape.sum_rows(picked);
        let phase = self.phase_net(&mut tape, tokens, grad, &mut slots)?;
        Ok(Forward {
            tape,
            log_prob,
            phase,
            slots,
            n_params: self.len(),
        })
    }

    fn tokens_in_sector(&self, configs: &[Configuration]) -> Result<Vec<Vec<u8>>> {
        let cfg = self.config();
        configs
            .iter()
            .map(|c| {
                if c.len() != cfg.n_qubits() {
                    return Err(Error::domain(format!(
                        "configuration {c} has length {}, model expects {}",
                        c.len(),
                        cfg.n_qubits()
                    )));
                }
                if !c.in_sector(cfg.sector.0, cfg.sector.1) {
                    return Err(Error::domain(format!("configuration {c} is outside the model sector")));
                }
                tokenize(c)
            })
            .collect()
    }

    /// Records a differentiable forward pass over in-sector configurations.
    pub fn forward(&self, configs: &[Configuration]) -> Result<Forward> {
        if configs.is_empty() {
            return Err(Error::domain("empty batch"));
        }
        self.record(&self.tokens_in_sector(configs)?, true)
    }

    /// `(log p(x), φ(x))` per configuration. Out-of-sector configurations
    /// score `log p = −∞`.
    pub fn evaluate(&self, configs: &[Configuration]) -> Result<Vec<(f64, f64)>> {
        let cfg = self.config();
        let mut out = vec![(f64::NEG_INFINITY, 0.0); configs.len()];
        let mut inside = Vec::new();
        for (i, c) in configs.iter().enumerate() {
            if c.len() != cfg.n_qubits() {
                return Err(Error::domain(format!(
                    "configuration {c} has length {}, model expects {}",
                    c.len(),
                    cfg.n_qubits()
                )));
            }
            if c.in_sector(cfg.sector.0, cfg.sector.1) {
                inside.push(i);
            }
        }
        let tokens: Vec<Vec<u8>> = inside.iter().map(|&i| tokenize(&configs[i])).collect::<Result<_>>()?;
        let scored: Vec<Vec<(f64, f64)>> = tokens
            .par_chunks(SHARD)
            .map(|chunk| {
                let f = self.record(chunk, false)?;
                Ok(f.log_probs().iter().cloned().zip(f.phases().iter().cloned()).collect())
            })
            .collect::<Result<_>>()?;
        for (&i, v) in inside.iter().zip(scored.into_iter().flatten()) {
            out[i] = v;
        }
        Ok(out)
    }

    pub fn log_prob_and_phase(&self, config: &Configuration) -> Result<(f64, f64)> {
        Ok(self.evaluate(std::slice::from_ref(config))?[0])
    }

    /// `√p(x)·e^{iφ(x)}` per configuration.
    pub fn amplitudes(&self, configs: &[Configuration]) -> Result<Vec<Complex64>> {
        Ok(self
            .evaluate(configs)?
            .into_iter()
            .map(|(lp, ph)| Complex64::from_polar((0.5 * lp).exp(), ph))
            .collect())
    }

    /// Conditional probabilities of the four tokens at `position` given
    /// each prefix (of length at least `position`).
    pub fn conditionals(&self, prefixes: &[Vec<u8>], position: usize) -> Result<Vec<[f64; 4]>> {
        let n = self.config().n_orb;
        if position >= n {
            return Err(Error::domain(format!("position {position} beyond {n} orbitals")));
        }
        let padded: Vec<Vec<u8>> = prefixes
            .iter()
            .map(|p| {
                let mut s = p[..position].to_vec();
                s.resize(n, 0);
                s
            })
            .collect();
        let rows: Vec<Vec<[f64; 4]>> = padded
            .par_chunks(SHARD)
            .map(|chunk| {
                let mut tape = Tape::new();
                let lsm = self.decoder(&mut tape, chunk, false, &mut Vec::new())?;
                let v = tape.value(lsm).data();
                Ok((0..chunk.len())
                    .map(|b| {
                        let r = &v[(b * n + position) * 4..(b * n + position + 1) * 4];
                        [r[0].exp(), r[1].exp(), r[2].exp(), r[3].exp()]
                    })
                    .collect())
            })
            .collect::<Result<_>>()?;
        Ok(rows.into_iter().flatten().collect())
    }

    /// Exhaustive scoring of the sector as a table tagged `model-dump`.
    pub fn to_table(&self) -> Result<WavefunctionTable> {
        let cfg = self.config();
        let dim = crate::extraction::sector_dimension(cfg.n_orb, cfg.sector.0, cfg.sector.1);
        if dim > ENUMERATION_LIMIT {
            return Err(Error::EnumerationLimit {
                dim,
                limit: ENUMERATION_LIMIT,
            });
        }
        let configs = enumerate_sector(cfg.n_orb, cfg.sector.0, cfg.sector.1)?;
        let amps = self.amplitudes(&configs)?;
        let meta = TableMeta {
            source: TableSource::ModelDump,
            n_qubits: cfg.n_qubits(),
            n_alpha: cfg.sector.0,
            n_beta: cfg.sector.1,
        };
        let mut entries: Vec<_> = configs.into_iter().zip(amps).filter(|(_, a)| a.norm_sqr() > 0.0).collect();
        let total: f64 = entries.iter().map(|(_, a)| a.norm_sqr()).sum();
        // rounding can push the sum a hair above one
        if total > 1.0 {
            let s = total.sqrt();
            entries.iter_mut().for_each(|(_, a)| *a /= s);
        }
        let mut table = WavefunctionTable::new(meta, entries)?;
        table.sort_by_magnitude();
        Ok(table)
    }
}
