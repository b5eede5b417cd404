use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Shape of the transformer and phase network.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub n_orb: usize,
    pub d_model: usize,
    pub n_heads: usize,
    pub n_layers: usize,
    pub d_ff: usize,
    pub phase_hidden: Vec<usize>,
    pub sector: (usize, usize),
}

/// A named block of the flat parameter vector.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) struct Slot {
    pub offset: usize,
    pub rows: usize,
    pub cols: usize,
}

impl Slot {
    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    pub fn range(&self) -> std::ops::Range<usize> {
        self.offset..self.offset + self.len()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub(crate) struct LayerSlots {
    pub ln1: (Slot, Slot),
    pub qkv: (Slot, Slot),
    pub proj: (Slot, Slot),
    pub ln2: (Slot, Slot),
    pub ff1: (Slot, Slot),
    pub ff2: (Slot, Slot),
}

#[derive(Clone, Debug, PartialEq)]
pub(crate) struct Layout {
    pub token_embedding: Slot,
    pub position_embedding: Slot,
    pub layers: Vec<LayerSlots>,
    pub ln_final: (Slot, Slot),
    pub head: (Slot, Slot),
    /// `(weight, bias)` per phase layer; the last maps to four outputs.
    pub phase: Vec<(Slot, Slot)>,
    pub total: usize,
}

impl ModelConfig {
    /// Default widths: `d_model` 32, 4 heads, 4 layers, `d_ff` 128 and a
    /// `512 × 512` phase network.
    pub fn new(n_orb: usize, sector: (usize, usize)) -> Self {
        Self {
            n_orb,
            d_model: 32,
            n_heads: 4,
            n_layers: 4,
            d_ff: 128,
            phase_hidden: vec![512, 512],
            sector,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_orb == 0 || 2 * self.n_orb > crate::extraction::MAX_SPIN_ORBITALS {
            return Err(Error::domain(format!("unsupported orbital count {}", self.n_orb)));
        }
        if self.d_model == 0 || self.n_heads == 0 || self.d_model % self.n_heads != 0 {
            return Err(Error::domain(format!(
                "d_model {} is not divisible by {} heads",
                self.d_model, self.n_heads
            )));
        }
        if self.d_ff == 0 || self.phase_hidden.contains(&0) {
            return Err(Error::domain("layer widths must be positive"));
        }
        if self.sector.0 > self.n_orb || self.sector.1 > self.n_orb {
            return Err(Error::domain(format!(
                "sector {:?} does not fit in {} orbitals",
                self.sector, self.n_orb
            )));
        }
        Ok(())
    }

    pub fn n_qubits(&self) -> usize {
        2 * self.n_orb
    }

    /// Number of real parameters.
    pub fn n_params(&self) -> usize {
        self.layout().total
    }

    pub(crate) fn layout(&self) -> Layout {
        let mut offset = 0;
        let mut slot = |rows: usize, cols: usize| {
            let s = Slot { offset, rows, cols };
            offset += rows * cols;
            s
        };
        let d = self.d_model;
        let token_embedding = slot(super::BEGIN + 1, d);
        let position_embedding = slot(self.n_orb, d);
        let layers = (0..self.n_layers)
            .map(|_| LayerSlots {
                ln1: (slot(1, d), slot(1, d)),
                qkv: (slot(d, 3 * d), slot(1, 3 * d)),
                proj: (slot(d, d), slot(1, d)),
                ln2: (slot(1, d), slot(1, d)),
                ff1: (slot(d, self.d_ff), slot(1, self.d_ff)),
                ff2: (slot(self.d_ff, d), slot(1, d)),
            })
            .collect();
        let ln_final = (slot(1, d), slot(1, d));
        let head = (slot(d, 4), slot(1, 4));
        let mut width = self.n_qubits();
        let mut phase = Vec::new();
        for &h in self.phase_hidden.iter().chain(std::iter::once(&4)) {
            phase.push((slot(width, h), slot(1, h)));
            width = h;
        }
        Layout {
            token_embedding,
            position_embedding,
            layers,
            ln_final,
            head,
            phase,
            total: offset,
        }
    }
}
