use crate::error::{Error, Result};
use crate::extraction::Configuration;
use crate::integrals::IntegralSet;

/// Annihilates spin orbital `k` in the ascending-product convention.
pub(crate) fn annihilate(bits: u64, k: usize) -> Option<(u64, f64)> {
    if bits >> k & 1 == 0 {
        return None;
    }
    let below = (bits & ((1u64 << k) - 1)).count_ones();
    Some((bits ^ (1 << k), if below % 2 == 0 { 1.0 } else { -1.0 }))
}

pub(crate) fn create(bits: u64, k: usize) -> Option<(u64, f64)> {
    if bits >> k & 1 == 1 {
        return None;
    }
    let below = (bits & ((1u64 << k) - 1)).count_ones();
    Some((bits | (1 << k), if below % 2 == 0 { 1.0 } else { -1.0 }))
}

/// Sign `s` with `a†_{ops[0]} … |b⟩ = s |…⟩`; ops are applied right to left
/// and each entry is `(mode, dagger)`.
fn ladder_sign(mut bits: u64, ops: &[(usize, bool)]) -> Option<f64> {
    let mut sign = 1.0;
    for &(k, dagger) in ops.iter().rev() {
        let (b, s) = if dagger { create(bits, k)? } else { annihilate(bits, k)? };
        bits = b;
        sign *= s;
    }
    Some(sign)
}

fn iter_bits(mut bits: u64) -> impl Iterator<Item = usize> {
    std::iter::from_fn(move || {
        if bits == 0 {
            None
        } else {
            let k = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            Some(k)
        }
    })
}

/// `⟨a|Ĥ|b⟩` by the Slater–Condon rules, including `e_core` on the diagonal.
pub fn hamiltonian_element(ints: &IntegralSet, a: &Configuration, b: &Configuration) -> Result<f64> {
    if a.len() != ints.n_qubits() || b.len() != ints.n_qubits() {
        return Err(Error::domain(format!(
            "configurations of length {}/{} for {} spin orbitals",
            a.len(),
            b.len(),
            ints.n_qubits()
        )));
    }
    if a.n_alpha() != b.n_alpha() || a.n_beta() != b.n_beta() {
        return Err(Error::domain(format!("{a} and {b} lie in different sectors")));
    }
    Ok(element_bits(ints, a.bits(), b.bits()))
}

pub(crate) fn element_bits(ints: &IntegralSet, a: u64, b: u64) -> f64 {
    let created = a & !b;
    let removed = b & !a;
    match created.count_ones() {
        0 => diagonal(ints, a),
        1 => {
            let i = created.trailing_zeros() as usize;
            let j = removed.trailing_zeros() as usize;
            if i % 2 != j % 2 {
                return 0.0;
            }
            let Some(s) = ladder_sign(b, &[(i, true), (j, false)]) else {
                return 0.0;
            };
            let (pi, pj) = (i / 2, j / 2);
            let mut v = ints.h1(pi, pj);
            for k in iter_bits(a & b) {
                let pk = k / 2;
                v += ints.h2(pi, pj, pk, pk);
                if k % 2 == i % 2 {
                    v -= ints.h2(pi, pk, pk, pj);
                }
            }
            s * v
        }
        2 => {
            let mut c = iter_bits(created);
            let (i, k) = (c.next().unwrap(), c.next().unwrap());
            let mut r = iter_bits(removed);
            let (j, l) = (r.next().unwrap(), r.next().unwrap());
            let Some(s) = ladder_sign(b, &[(i, true), (k, true), (l, false), (j, false)]) else {
                return 0.0;
            };
            let mut v = 0.0;
            if i % 2 == j % 2 && k % 2 == l % 2 {
                v += ints.h2(i / 2, j / 2, k / 2, l / 2);
            }
            if i % 2 == l % 2 && k % 2 == j % 2 {
                v -= ints.h2(i / 2, l / 2, k / 2, j / 2);
            }
            s * v
        }
        _ => 0.0,
    }
}

fn diagonal(ints: &IntegralSet, a: u64) -> f64 {
    let mut e = ints.e_core;
    for i in iter_bits(a) {
        let pi = i / 2;
        e += ints.h1(pi, pi);
        for j in iter_bits(a) {
            let pj = j / 2;
            e += 0.5 * ints.h2(pi, pi, pj, pj);
            if i % 2 == j % 2 {
                e -= 0.5 * ints.h2(pi, pj, pj, pi);
            }
        }
    }
    e
}

/// Every determinant reachable from `bits` by a spin-conserving single or
/// double excitation within `n_qubits` spin orbitals.
pub(crate) fn excitations(bits: u64, n_qubits: usize, out: &mut Vec<u64>) {
    out.clear();
    let full = if n_qubits == 64 { u64::MAX } else { (1u64 << n_qubits) - 1 };
    let occ: Vec<usize> = iter_bits(bits).collect();
    let virt: Vec<usize> = iter_bits(full & !bits).collect();
    for &i in &occ {
        for &a in &virt {
            if i % 2 == a % 2 {
                out.push(bits ^ (1 << i) ^ (1 << a));
            }
        }
    }
    for (x, &i) in occ.iter().enumerate() {
        for &j in &occ[x + 1..] {
            for (y, &a) in virt.iter().enumerate() {
                for &b in &virt[y + 1..] {
                    // spin of the removed pair must equal spin of the added pair
                    if (i % 2 + j % 2) == (a % 2 + b % 2)
                        && ((i % 2 == a % 2 && j % 2 == b % 2) || (i % 2 == b % 2 && j % 2 == a % 2))
                    {
                        out.push(bits ^ (1 << i) ^ (1 << j) ^ (1 << a) ^ (1 << b));
                    }
                }
            }
        }
    }
}
