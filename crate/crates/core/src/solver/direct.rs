//! String-driven direct CI: `σ = Hc` without storing the Hamiltonian.

use std::collections::HashMap;

use crate::extraction::{combinations, interleave};
use crate::integrals::IntegralSet;

/// `E_pq |J⟩ = sign |K⟩` for one spin channel.
#[derive(Clone, Copy)]
struct StringExcitation {
    pq: u32,
    target: u32,
    sign: f64,
}

pub(crate) struct DirectCi {
    n_orb: usize,
    pub alpha: Vec<u64>,
    pub beta: Vec<u64>,
    exc_alpha: Vec<Vec<StringExcitation>>,
    exc_beta: Vec<Vec<StringExcitation>>,
    /// `k_pq = h_pq − ½ Σ_r (pr|rq)`.
    k1: Vec<f64>,
    /// `½ (pq|rs)` laid out `[rs][pq]`.
    w: Vec<f64>,
    e_core: f64,
    d: Vec<f64>,
    g: Vec<f64>,
}

fn string_excitations(strings: &[u64], n_orb: usize) -> Vec<Vec<StringExcitation>> {
    let index: HashMap<u64, u32> = strings.iter().enumerate().map(|(i, &s)| (s, i as u32)).collect();
    strings
        .iter()
        .map(|&s| {
            let mut out = Vec::new();
            for q in 0..n_orb {
                if s >> q & 1 == 0 {
                    continue;
                }
                let below_q = (s & ((1u64 << q) - 1)).count_ones();
                let t = s ^ (1 << q);
                for p in 0..n_orb {
                    if t >> p & 1 == 1 {
                        continue;
                    }
                    let below_p = (t & ((1u64 << p) - 1)).count_ones();
                    let sign = if (below_q + below_p) % 2 == 0 { 1.0 } else { -1.0 };
                    out.push(StringExcitation {
                        pq: (p * n_orb + q) as u32,
                        target: index[&(t | (1 << p))],
                        sign,
                    });
                }
            }
            out
        })
        .collect()
}

impl DirectCi {
    pub fn new(ints: &IntegralSet, n_alpha: usize, n_beta: usize) -> Self {
        let n = ints.n_orb;
        let alpha = combinations(n, n_alpha);
        let beta = combinations(n, n_beta);
        let exc_alpha = string_excitations(&alpha, n);
        let exc_beta = string_excitations(&beta, n);
        let n2 = n * n;
        let mut k1 = vec![0.0; n2];
        let mut w = vec![0.0; n2 * n2];
        for p in 0..n {
            for q in 0..n {
                let mut v = ints.h1(p, q);
                for r in 0..n {
                    v -= 0.5 * ints.h2(p, r, r, q);
                }
                k1[p * n + q] = v;
                for r in 0..n {
                    for s in 0..n {
                        w[(r * n + s) * n2 + p * n + q] = 0.5 * ints.h2(p, q, r, s);
                    }
                }
            }
        }
        let dim = alpha.len() * beta.len();
        Self {
            n_orb: n,
            alpha,
            beta,
            exc_alpha,
            exc_beta,
            k1,
            w,
            e_core: ints.e_core,
            d: vec![0.0; dim * n2],
            g: vec![0.0; dim * n2],
        }
    }

    pub fn dim(&self) -> usize {
        self.alpha.len() * self.beta.len()
    }

    /// Sign relating the blocked `α…β` product to the interleaved ascending
    /// product for the same occupation.
    pub fn interleave_sign(&self, a: u64, b: u64) -> f64 {
        let mut crossings = 0;
        for q in 0..self.n_orb {
            if b >> q & 1 == 1 {
                crossings += (a >> (q + 1)).count_ones();
            }
        }
        if crossings % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    }

    pub fn interleaved_bits(&self, ia: usize, ib: usize) -> u64 {
        interleave(self.alpha[ia], self.beta[ib], self.n_orb)
    }

    /// Applies `E_pq` to `c`, writing the `n²` results per determinant into
    /// `out[det * n² + pq]` (accumulating).
    fn scatter(&self, c: &[f64], out: &mut [f64]) {
        let n2 = self.n_orb * self.n_orb;
        let nb = self.beta.len();
        for (ja, exc) in self.exc_alpha.iter().enumerate() {
            for e in exc {
                let ka = e.target as usize;
                let pq = e.pq as usize;
                let src = &c[ja * nb..(ja + 1) * nb];
                for (ib, &v) in src.iter().enumerate() {
                    out[(ka * nb + ib) * n2 + pq] += e.sign * v;
                }
            }
        }
        for ia in 0..self.alpha.len() {
            for (jb, exc) in self.exc_beta.iter().enumerate() {
                let v = c[ia * nb + jb];
                if v == 0.0 {
                    continue;
                }
                for e in exc {
                    out[(ia * nb + e.target as usize) * n2 + e.pq as usize] += e.sign * v;
                }
            }
        }
    }

    /// Transpose of [`scatter`]: `σ(I) += Σ_pq Σ_K ⟨I|E_pq|K⟩ g(K, pq)`.
    fn gather(&self, g: &[f64], sigma: &mut [f64]) {
        let n2 = self.n_orb * self.n_orb;
        let nb = self.beta.len();
        for (ka, exc) in self.exc_alpha.iter().enumerate() {
            for e in exc {
                let ia = e.target as usize;
                let pq = e.pq as usize;
                for ib in 0..nb {
                    sigma[ia * nb + ib] += e.sign * g[(ka * nb + ib) * n2 + pq];
                }
            }
        }
        for ia in 0..self.alpha.len() {
            for (kb, exc) in self.exc_beta.iter().enumerate() {
                let row = &g[(ia * nb + kb) * n2..(ia * nb + kb + 1) * n2];
                for e in exc {
                    sigma[ia * nb + e.target as usize] += e.sign * row[e.pq as usize];
                }
            }
        }
    }

    pub fn matvec(&mut self, c: &[f64], sigma: &mut [f64]) {
        let dim = self.dim();
        let n2 = self.n_orb * self.n_orb;
        let mut d = std::mem::take(&mut self.d);
        let mut g = std::mem::take(&mut self.g);
        d.iter_mut().for_each(|x| *x = 0.0);
        self.scatter(c, &mut d);
        for i in 0..dim {
            let row = &d[i * n2..(i + 1) * n2];
            sigma[i] = self.e_core * c[i] + row.iter().zip(&self.k1).map(|(a, b)| a * b).sum::<f64>();
        }
        // g = d · w
        unsafe {
            matrixmultiply::dgemm(
                dim,
                n2,
                n2,
                1.0,
                d.as_ptr(),
                n2 as isize,
                1,
                self.w.as_ptr(),
                n2 as isize,
                1,
                0.0,
                g.as_mut_ptr(),
                n2 as isize,
                1,
            );
        }
        self.gather(&g, sigma);
        self.d = d;
        self.g = g;
    }
}
