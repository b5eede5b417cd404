//! Configurations, sparse wavefunction tables and extraction of important
//! configurations from a converged statevector.

mod configuration;
mod full;
mod monte_carlo;
mod table;

pub use configuration::{Configuration, MAX_SPIN_ORBITALS};
pub use full::{extract_full, DEFAULT_CUTOFF, DEFAULT_ENUMERATION_LIMIT};
pub use monte_carlo::{extract_mc, McEvent, McExtraction, McSettings};
pub use table::{TableMeta, TableSource, WavefunctionTable};

use crate::error::{Error, Result};

/// Number of configurations with the given spin populations.
pub fn sector_dimension(n_orb: usize, n_alpha: usize, n_beta: usize) -> usize {
    binomial(n_orb, n_alpha).saturating_mul(binomial(n_orb, n_beta))
}

pub(crate) fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc.min(usize::MAX as u128) as usize
}

/// All `n`-bit masks with exactly `k` bits set, ascending.
pub(crate) fn combinations(n: usize, k: usize) -> Vec<u64> {
    if k > n {
        return Vec::new();
    }
    if k == 0 {
        return vec![0];
    }
    let mut out = Vec::with_capacity(binomial(n, k));
    let mut v: u64 = (1u64 << k) - 1;
    let limit = if n == 64 { u64::MAX } else { 1u64 << n };
    while v < limit {
        out.push(v);
        // Gosper's hack
        let c = v & v.wrapping_neg();
        let r = v + c;
        if r == 0 {
            break;
        }
        v = (((r ^ v) >> 2) / c) | r;
    }
    out
}

/// Interleaves per-spin orbital masks into a spin-orbital bitstring.
pub(crate) fn interleave(alpha: u64, beta: u64, n_orb: usize) -> u64 {
    let mut bits = 0u64;
    for p in 0..n_orb {
        bits |= ((alpha >> p) & 1) << (2 * p);
        bits |= ((beta >> p) & 1) << (2 * p + 1);
    }
    bits
}

/// Every configuration of the `(n_alpha, n_beta)` sector in lexicographic
/// order of the bitstring.
pub fn enumerate_sector(n_orb: usize, n_alpha: usize, n_beta: usize) -> Result<Vec<Configuration>> {
    if n_alpha > n_orb || n_beta > n_orb {
        return Err(Error::domain(format!(
            "sector ({n_alpha}, {n_beta}) does not fit in {n_orb} orbitals"
        )));
    }
    if 2 * n_orb > MAX_SPIN_ORBITALS {
        return Err(Error::domain(format!("{n_orb} orbitals exceed the bitstring width")));
    }
    let alphas = combinations(n_orb, n_alpha);
    let betas = combinations(n_orb, n_beta);
    let mut out = Vec::with_capacity(alphas.len() * betas.len());
    for &a in &alphas {
        for &b in &betas {
            out.push(Configuration::from_bits(interleave(a, b, n_orb), 2 * n_orb));
        }
    }
    out.sort();
    Ok(out)
}
