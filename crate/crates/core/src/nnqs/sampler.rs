use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};

use super::{detokenize, ModelParams};
use crate::error::{Error, Result};
use crate::extraction::Configuration;

#[derive(Clone, Debug, PartialEq)]
pub struct Sample {
    pub config: Configuration,
    pub count: u64,
    pub log_prob: f64,
    pub phase: f64,
}

/// Unique configurations drawn from the model with their multiplicities.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleBatch {
    pub entries: Vec<Sample>,
    pub total: u64,
}

impl SampleBatch {
    pub fn configs(&self) -> Vec<Configuration> {
        self.entries.iter().map(|s| s.config).collect()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Generator for the branch at `prefix`: a function of the seed and the
/// prefix alone, so results do not depend on how branches are scheduled.
fn branch_rng(seed: u64, prefix: &[u8]) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (prefix.len() as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    let key = prefix.iter().fold(0u64, |k, &t| (k << 2) | t as u64);
    rng.set_stream(key);
    rng
}

/// Splits `count` draws over `probs` by sequential binomials.
fn multinomial(rng: &mut ChaCha8Rng, count: u64, probs: &[f64; 4]) -> [u64; 4] {
    let mut out = [0u64; 4];
    let mut left = count;
    let mut mass: f64 = probs.iter().sum();
    let last = probs.iter().rposition(|&p| p > 0.0).unwrap_or(3);
    for t in 0..4 {
        if left == 0 || probs[t] <= 0.0 {
            continue;
        }
        if t == last {
            out[t] = left;
            break;
        }
        let p = (probs[t] / mass).clamp(0.0, 1.0);
        let k = Binomial::new(left, p).expect("probability clamped to [0, 1]").sample(rng);
        out[t] = k;
        left -= k;
        mass -= probs[t];
    }
    out
}

impl ModelParams {
    /// Tree-splitting autoregressive sampler.
    ///
    /// All `n_samples` draws start on the empty prefix; at each position
    /// the multiplicity of every prefix is split over the four tokens by a
    /// multinomial draw from the model conditional, and empty branches are
    /// dropped.
    pub fn sample_batch(&self, n_samples: u64, seed: u64) -> Result<SampleBatch> {
        if n_samples == 0 {
            return Err(Error::domain("n_samples must be at least 1"));
        }
        let n = self.config().n_orb;
        let mut branches: Vec<(Vec<u8>, u64)> = vec![(Vec::new(), n_samples)];
        for position in 0..n {
            let prefixes: Vec<Vec<u8>> = branches
                .iter()
                .map(|(p, _)| {
                    let mut padded = p.clone();
                    padded.resize(n, 0);
                    padded
                })
                .collect();
            let probs = self.conditionals(&prefixes, position)?;
            let mut next = Vec::with_capacity(branches.len() * 2);
            for ((prefix, count), p) in branches.iter().zip(&probs) {
                let mut rng = branch_rng(seed, prefix);
                let split = multinomial(&mut rng, *count, p);
                for (t, &k) in split.iter().enumerate() {
                    if k > 0 {
                        let mut child = prefix.clone();
                        child.push(t as u8);
                        next.push((child, k));
                    }
                }
            }
            branches = next;
        }
        let mut leaves: Vec<(Configuration, u64)> = branches
            .iter()
            .map(|(t, k)| Ok((detokenize(t)?, *k)))
            .collect::<Result<_>>()?;
        leaves.sort_by(|a, b| a.0.cmp(&b.0));
        let configs: Vec<Configuration> = leaves.iter().map(|l| l.0).collect();
        let scores = self.evaluate(&configs)?;
        let entries = leaves
            .into_iter()
            .zip(scores)
            .map(|((config, count), (log_prob, phase))| Sample {
                config,
                count,
                log_prob,
                phase,
            })
            .collect();
        Ok(SampleBatch {
            entries,
            total: n_samples,
        })
    }
}
