//! Independent dense-matrix oracles and fixture loading for the test suites.
#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64;

use nqsvqe::integrals::{read_fcidump, IntegralSet};
use nqsvqe::simulator::{Gate, GateKind};

pub type CMatrix = DMatrix<Complex64>;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn fixture(name: &str) -> IntegralSet {
    let path = format!("{}/../../fixtures/{name}.fcidump", env!("CARGO_MANIFEST_DIR"));
    read_fcidump(path).unwrap()
}

pub fn fixture_text(name: &str) -> String {
    let path = format!("{}/../../fixtures/{name}", env!("CARGO_MANIFEST_DIR"));
    std::fs::read_to_string(path).unwrap()
}

pub fn single_qubit(letter: char) -> CMatrix {
    let z = c(0.0, 0.0);
    let o = c(1.0, 0.0);
    let i = c(0.0, 1.0);
    let m = match letter {
        'I' => [o, z, z, o],
        'X' => [z, o, o, z],
        'Y' => [z, -i, i, z],
        'Z' => [o, z, z, -o],
        _ => panic!("bad letter {letter}"),
    };
    CMatrix::from_row_slice(2, 2, &m)
}

/// Dense matrix of a Pauli string printed qubit 0 first; qubit 0 is the
/// least significant bit of the row index.
pub fn pauli_matrix(s: &str) -> CMatrix {
    let mut m = CMatrix::from_element(1, 1, c(1.0, 0.0));
    for letter in s.chars() {
        m = single_qubit(letter).kronecker(&m);
    }
    m
}

/// Embeds a 2×2 matrix acting on qubit `q` of an `n`-qubit register.
pub fn embed_1q(u: &CMatrix, q: usize, n: usize) -> CMatrix {
    let dim = 1 << n;
    CMatrix::from_fn(dim, dim, |r, col| {
        if (r ^ col) & !(1 << q) != 0 {
            c(0.0, 0.0)
        } else {
            u[((r >> q) & 1, (col >> q) & 1)]
        }
    })
}

pub fn rotation(p: &CMatrix, theta: f64) -> CMatrix {
    let dim = p.nrows();
    CMatrix::identity(dim, dim) * c((theta / 2.0).cos(), 0.0) - p * c(0.0, (theta / 2.0).sin())
}

/// Dense unitary of one gate built from textbook matrices.
pub fn gate_matrix(g: &Gate, angle: f64, n: usize) -> CMatrix {
    let dim = 1 << n;
    let s = std::f64::consts::FRAC_1_SQRT_2;
    match &g.kind {
        GateKind::X => embed_1q(&single_qubit('X'), g.targets[0], n),
        GateKind::H => embed_1q(
            &CMatrix::from_row_slice(2, 2, &[c(s, 0.0), c(s, 0.0), c(s, 0.0), c(-s, 0.0)]),
            g.targets[0],
            n,
        ),
        GateKind::RX => embed_1q(&rotation(&single_qubit('X'), angle), g.targets[0], n),
        GateKind::RY => embed_1q(&rotation(&single_qubit('Y'), angle), g.targets[0], n),
        GateKind::RZ => embed_1q(&rotation(&single_qubit('Z'), angle), g.targets[0], n),
        GateKind::CNOT => {
            let (ctl, tgt) = (g.targets[0], g.targets[1]);
            CMatrix::from_fn(dim, dim, |r, col| {
                let image = if col >> ctl & 1 == 1 { col ^ (1 << tgt) } else { col };
                if r == image { c(1.0, 0.0) } else { c(0.0, 0.0) }
            })
        }
        GateKind::CZ => {
            let (a, b) = (g.targets[0], g.targets[1]);
            CMatrix::from_fn(dim, dim, |r, col| {
                if r != col {
                    c(0.0, 0.0)
                } else if (col >> a) & (col >> b) & 1 == 1 {
                    c(-1.0, 0.0)
                } else {
                    c(1.0, 0.0)
                }
            })
        }
        GateKind::PauliRotation(w) => rotation(&pauli_matrix(&w.to_string(n)), angle),
    }
}

pub fn dense_hamiltonian(h: &nqsvqe::integrals::QubitHamiltonian) -> CMatrix {
    let dim = 1 << h.n_qubits;
    let mut m = CMatrix::zeros(dim, dim);
    for t in &h.terms {
        m += pauli_matrix(&t.word.to_string(h.n_qubits)) * c(t.coeff, 0.0);
    }
    m
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let mut v: Vec<f64> = m.clone().symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

/// Matrix exponential by scaling and squaring with a Taylor core.
pub fn expm(a: &CMatrix) -> CMatrix {
    let norm = a.iter().map(|x| x.norm()).sum::<f64>();
    let mut squarings = 0;
    let mut scale = 1.0;
    while norm * scale > 0.25 {
        scale *= 0.5;
        squarings += 1;
    }
    let x = a * c(scale, 0.0);
    let n = a.nrows();
    let mut term = CMatrix::identity(n, n);
    let mut sum = CMatrix::identity(n, n);
    for k in 1..30 {
        term = &term * &x * c(1.0 / k as f64, 0.0);
        sum += &term;
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}

pub fn max_abs_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}
