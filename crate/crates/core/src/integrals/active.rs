use super::IntegralSet;
use crate::error::{Error, Result};

/// Partition of spatial orbitals into frozen (doubly occupied), active and
/// discarded virtual orbitals.
///
/// Orbitals listed in neither `frozen` nor `active` are dropped as empty
/// virtuals; with an empty discard set this is the usual frozen-core split.
#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct ActiveSpace {
    pub frozen: Vec<usize>,
    pub active: Vec<usize>,
    pub n_active_elec: usize,
}

impl ActiveSpace {
    /// Freeze the `k` lowest orbitals and keep every other orbital active.
    pub fn freeze_lowest(ints: &IntegralSet, k: usize) -> Result<Self> {
        Self::new(ints, (0..k).collect(), (k..ints.n_orb).collect())
    }

    /// Freeze the `k` lowest orbitals and keep the next `n_active` orbitals.
    pub fn freeze_lowest_truncated(ints: &IntegralSet, k: usize, n_active: usize) -> Result<Self> {
        Self::new(ints, (0..k).collect(), (k..k + n_active).collect())
    }

    pub fn new(ints: &IntegralSet, frozen: Vec<usize>, active: Vec<usize>) -> Result<Self> {
        let mut used = vec![false; ints.n_orb];
        for &p in frozen.iter().chain(&active) {
            if p >= ints.n_orb {
                return Err(Error::domain(format!(
                    "orbital index {p} out of range for {} orbitals",
                    ints.n_orb
                )));
            }
            if used[p] {
                return Err(Error::domain(format!(
                    "orbital {p} appears more than once in the active-space partition"
                )));
            }
            used[p] = true;
        }
        let n_active_elec = ints
            .n_elec
            .checked_sub(2 * frozen.len())
            .ok_or_else(|| {
                Error::domain(format!(
                    "freezing {} orbitals needs {} electrons, only {} available",
                    frozen.len(),
                    2 * frozen.len(),
                    ints.n_elec
                ))
            })?;
        if n_active_elec > 2 * active.len() {
            return Err(Error::domain(format!(
                "{n_active_elec} active electrons do not fit in {} active orbitals",
                active.len()
            )));
        }
        Ok(Self {
            frozen,
            active,
            n_active_elec,
        })
    }

    pub fn n_active(&self) -> usize {
        self.active.len()
    }
}

/// Folds frozen orbitals into the core energy and one-electron integrals and
/// restricts everything to the active orbitals, relabeled in list order.
pub fn apply_active_space(ints: &IntegralSet, space: &ActiveSpace) -> Result<IntegralSet> {
    // re-validate: the space may have been deserialized or built for another set
    let space = ActiveSpace::new(ints, space.frozen.clone(), space.active.clone())?;
    let frozen = &space.frozen;
    let active = &space.active;

    let mut e_frozen = 0.0;
    for &i in frozen {
        e_frozen += 2.0 * ints.h1(i, i);
    }
    for &i in frozen {
        for &j in frozen {
            e_frozen += 2.0 * ints.h2(i, i, j, j) - ints.h2(i, j, j, i);
        }
    }

    let n = active.len();
    let mut out = IntegralSet::zeros(n, space.n_active_elec, ints.ms2)?;
    out.e_core = if frozen.is_empty() {
        ints.e_core
    } else {
        ints.e_core + e_frozen
    };
    for (a, &p) in active.iter().enumerate() {
        for (b, &q) in active.iter().enumerate() {
            let mut v = ints.h1(p, q);
            for &i in frozen {
                v += 2.0 * ints.h2(p, q, i, i) - ints.h2(p, i, i, q);
            }
            out.h1[a * n + b] = v;
        }
    }
    for (a, &p) in active.iter().enumerate() {
        for (b, &q) in active.iter().enumerate() {
            for (c, &r) in active.iter().enumerate() {
                for (d, &s) in active.iter().enumerate() {
                    out.h2[((a * n + b) * n + c) * n + d] = ints.h2(p, q, r, s);
                }
            }
        }
    }
    Ok(out)
}
