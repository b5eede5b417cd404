use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AdamSettings {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl AdamSettings {
    pub fn with_lr(lr: f64) -> Self {
        Self {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

impl Default for AdamSettings {
    fn default() -> Self {
        Self::with_lr(0.05)
    }
}

/// Adam with a separate step counter per coordinate, so updating disjoint
/// groups in turn matches updating everything at once when there is a
/// single group.
#[derive(Clone, Debug)]
pub struct Adam {
    pub settings: AdamSettings,
    m: Vec<f64>,
    v: Vec<f64>,
    t: Vec<u32>,
}

impl Adam {
    pub fn new(n: usize, settings: AdamSettings) -> Self {
        Self {
            settings,
            m: vec![0.0; n],
            v: vec![0.0; n],
            t: vec![0; n],
        }
    }

    /// Descends along `grad[j]` for each `j` in `indices`.
    pub fn step_subset(&mut self, params: &mut [f64], grad: &[f64], indices: &[usize]) {
        for &j in indices {
            self.update(params, grad, j);
        }
    }

    pub fn step(&mut self, params: &mut [f64], grad: &[f64]) {
        for j in 0..params.len() {
            self.update(params, grad, j);
        }
    }

    #[inline]
    fn update(&mut self, params: &mut [f64], grad: &[f64], j: usize) {
        let AdamSettings {
            lr,
            beta1,
            beta2,
            eps,
        } = self.settings;
        self.t[j] += 1;
        let t = self.t[j] as i32;
        self.m[j] = beta1 * self.m[j] + (1.0 - beta1) * grad[j];
        self.v[j] = beta2 * self.v[j] + (1.0 - beta2) * grad[j] * grad[j];
        let m_hat = self.m[j] / (1.0 - beta1.powi(t));
        let v_hat = self.v[j] / (1.0 - beta2.powi(t));
        params[j] -= lr * m_hat / (v_hat.sqrt() + eps);
    }
}
