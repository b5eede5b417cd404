use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct LanczosSettings {
    /// Krylov basis size before a restart.
    pub krylov: usize,
    pub max_restarts: usize,
    pub tol: f64,
}

impl Default for LanczosSettings {
    fn default() -> Self {
        Self {
            krylov: 60,
            max_restarts: 40,
            tol: 1e-9,
        }
    }
}

pub(crate) struct Eigenpair {
    pub value: f64,
    pub vector: Vec<f64>,
    pub residual: f64,
    pub matvecs: usize,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

fn normalize(v: &mut [f64]) -> f64 {
    let n = dot(v, v).sqrt();
    if n > 0.0 {
        v.iter_mut().for_each(|x| *x /= n);
    }
    n
}

/// Lowest eigenpair of a symmetric operator by restarted Lanczos with full
/// reorthogonalization. Converged when `‖Hx − θx‖ < tol`.
pub(crate) fn lowest_eigenpair(
    dim: usize,
    mut matvec: impl FnMut(&[f64], &mut [f64]),
    start: Vec<f64>,
    settings: &LanczosSettings,
) -> Result<Eigenpair> {
    assert_eq!(start.len(), dim);
    let mut x = start;
    if normalize(&mut x) == 0.0 {
        return Err(Error::domain("Lanczos start vector is zero"));
    }
    let m_max = settings.krylov.min(dim).max(1);
    let mut matvecs = 0;
    let mut w = vec![0.0; dim];
    let mut residual = f64::INFINITY;
    for _ in 0..settings.max_restarts.max(1) {
        let mut basis: Vec<Vec<f64>> = vec![x.clone()];
        let mut alpha = Vec::with_capacity(m_max);
        let mut beta: Vec<f64> = Vec::with_capacity(m_max);
        let mut hx_last: Option<Vec<f64>> = None;
        for j in 0..m_max {
            matvec(&basis[j], &mut w);
            matvecs += 1;
            if j == 0 {
                hx_last = Some(w.clone());
            }
            let a = dot(&basis[j], &w);
            alpha.push(a);
            // two passes of Gram–Schmidt against the whole basis
            for _ in 0..2 {
                for v in &basis {
                    let c = dot(v, &w);
                    axpy(-c, v, &mut w);
                }
            }
            let b = normalize(&mut w);
            if j + 1 == m_max || b < 1e-14 {
                break;
            }
            beta.push(b);
            basis.push(w.clone());
        }
        // the first restart vector's residual is available for free
        if let Some(hx) = &hx_last {
            let theta = alpha[0];
            let r: f64 = hx
                .iter()
                .zip(&x)
                .map(|(h, v)| (h - theta * v).powi(2))
                .sum::<f64>()
                .sqrt();
            residual = r;
            if r < settings.tol {
                return Ok(Eigenpair {
                    value: theta,
                    vector: x,
                    residual: r,
                    matvecs,
                });
            }
        }
        let m = alpha.len();
        let mut t = DMatrix::<f64>::zeros(m, m);
        for i in 0..m {
            t[(i, i)] = alpha[i];
            if i + 1 < m {
                t[(i, i + 1)] = beta[i];
                t[(i + 1, i)] = beta[i];
            }
        }
        let eig = SymmetricEigen::new(t);
        let k = eig.eigenvalues.argmin().0;
        let y = eig.eigenvectors.column(k);
        let mut next = vec![0.0; dim];
        for (i, v) in basis.iter().enumerate().take(m) {
            axpy(y[i], v, &mut next);
        }
        normalize(&mut next);
        x = next;
    }
    Err(Error::NotConverged {
        residual,
        iterations: matvecs,
    })
}
