//! Autoregressive transformer wavefunction over orbital-occupation tokens.
//!
//! Orbital `p` becomes the token `α_p + 2·β_p`. A causal decoder reads
//! `[BEGIN, t_0, …, t_{n−2}]` and yields a sector-masked conditional
//! distribution over the four tokens at each position; an MLP on the ±1
//! occupation vector gives the phase. The amplitude is `√p(x)·e^{iφ(x)}`.

mod config;
mod model;
mod params;
mod sampler;

pub use config::ModelConfig;
pub use model::{Forward, ENUMERATION_LIMIT};
pub use params::ModelParams;
pub use sampler::{Sample, SampleBatch};

use crate::error::{Error, Result};
use crate::extraction::Configuration;

/// Token id fed at the first position.
pub const BEGIN: usize = 4;

/// Logit written over sector-infeasible tokens.
pub(crate) const MASKED_LOGIT: f64 = -1e30;

/// Pair-encodes each spatial orbital: `α + 2·β`.
pub fn tokenize(config: &Configuration) -> Result<Vec<u8>> {
    if config.len() % 2 != 0 {
        return Err(Error::domain(format!(
            "configuration of odd length {} has no orbital pairing",
            config.len()
        )));
    }
    Ok((0..config.len() / 2)
        .map(|p| (config.occupied(2 * p) as u8) + 2 * (config.occupied(2 * p + 1) as u8))
        .collect())
}

pub fn detokenize(tokens: &[u8]) -> Result<Configuration> {
    let mut bits = 0u64;
    for (p, &t) in tokens.iter().enumerate() {
        if t > 3 {
            return Err(Error::domain(format!("token {t} at position {p} is not an occupation")));
        }
        bits |= ((t & 1) as u64) << (2 * p) | (((t >> 1) & 1) as u64) << (2 * p + 1);
    }
    Configuration::new(bits, 2 * tokens.len())
}

/// Tokens allowed at `position` after a prefix that placed `used` =
/// `(α, β)` electrons, for a sector of `sector` electrons over `n_orb`
/// orbitals.
pub fn sector_mask(used: (usize, usize), position: usize, n_orb: usize, sector: (usize, usize)) -> [bool; 4] {
    let remaining = n_orb.saturating_sub(position + 1);
    let mut allowed = [false; 4];
    for (t, slot) in allowed.iter_mut().enumerate() {
        let a = used.0 + (t & 1);
        let b = used.1 + (t >> 1);
        *slot = a <= sector.0 && b <= sector.1 && sector.0 - a <= remaining && sector.1 - b <= remaining;
    }
    allowed
}
