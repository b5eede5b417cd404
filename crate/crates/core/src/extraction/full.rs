use rayon::prelude::*;

use super::{enumerate_sector, sector_dimension, TableMeta, TableSource, WavefunctionTable};
use crate::error::{Error, Result};
use crate::simulator::Statevector;

/// Entries with `|c|` below this are treated as numerical noise.
pub const DEFAULT_CUTOFF: f64 = 1e-8;

/// Largest sector `extract_full` will enumerate by default.
pub const DEFAULT_ENUMERATION_LIMIT: usize = 1_000_000;

/// Reads the amplitude of every sector configuration and keeps those with
/// `|c| ≥ cutoff`, sorted by descending magnitude and gauge-fixed.
pub fn extract_full(
    state: &Statevector,
    sector: (usize, usize),
    cutoff: f64,
    limit: usize,
) -> Result<WavefunctionTable> {
    let n_qubits = state.n_qubits();
    if n_qubits % 2 != 0 {
        return Err(Error::domain(format!("odd register size {n_qubits}")));
    }
    if !(cutoff >= 0.0) {
        return Err(Error::domain(format!("cutoff {cutoff} must be non-negative")));
    }
    let n_orb = n_qubits / 2;
    let dim = sector_dimension(n_orb, sector.0, sector.1);
    if dim > limit {
        return Err(Error::EnumerationLimit { dim, limit });
    }
    let amps = state.amps();
    let entries: Vec<_> = enumerate_sector(n_orb, sector.0, sector.1)?
        .into_par_iter()
        .filter_map(|c| {
            let a = amps[c.bits() as usize];
            (a.norm() >= cutoff).then_some((c, a))
        })
        .collect();
    let mut table = WavefunctionTable::new(
        TableMeta {
            source: TableSource::VqeExtractFull,
            n_qubits,
            n_alpha: sector.0,
            n_beta: sector.1,
        },
        entries,
    )?;
    table.sort_by_magnitude();
    table.gauge_fix();
    Ok(table)
}
