mod common;

use common::*;
use proptest::prelude::*;

use nqsvqe::extraction::enumerate_sector;
use nqsvqe::integrals::{
    apply_active_space, jordan_wigner, parse_fcidump, tailor, write_fcidump, ActiveSpace, IntegralSet,
    QubitHamiltonian,
};

fn sector_matrix(h: &QubitHamiltonian, n_orb: usize, na: usize, nb: usize) -> CMatrix {
    let basis: Vec<u64> = enumerate_sector(n_orb, na, nb).unwrap().iter().map(|c| c.bits()).collect();
    let n = basis.len();
    CMatrix::from_row_slice(n, n, &h.projected_matrix(&basis))
}

fn sector_min(h: &QubitHamiltonian, n_orb: usize, na: usize, nb: usize) -> f64 {
    hermitian_eigenvalues(&sector_matrix(h, n_orb, na, nb))[0]
}

/// Number and Sz operators as diagonal matrices.
fn number_and_sz(n_qubits: usize) -> (CMatrix, CMatrix) {
    let dim = 1 << n_qubits;
    let mut n = CMatrix::zeros(dim, dim);
    let mut sz = CMatrix::zeros(dim, dim);
    for b in 0..dim {
        let na = (0..n_qubits).step_by(2).filter(|q| b >> q & 1 == 1).count() as f64;
        let nbeta = (1..n_qubits).step_by(2).filter(|q| b >> q & 1 == 1).count() as f64;
        n[(b, b)] = c(na + nbeta, 0.0);
        sz[(b, b)] = c(0.5 * (na - nbeta), 0.0);
    }
    (n, sz)
}

fn check_symmetries(h: &QubitHamiltonian) {
    let m = dense_hamiltonian(h);
    assert!((&m - m.adjoint()).norm() < 1e-10);
    let (n, sz) = number_and_sz(h.n_qubits);
    assert!((&m * &n - &n * &m).norm() < 1e-10);
    assert!((&m * &sz - &sz * &m).norm() < 1e-10);
}

#[test]
fn lih_fixture_has_twelve_qubits() {
    let ints = fixture("lih_2.6");
    assert_eq!((ints.n_orb, ints.n_elec, ints.ms2), (6, 4, 0));
    assert_eq!(jordan_wigner(&ints).n_qubits, 12);
}

#[test]
fn core_energy_only() {
    let ints = parse_fcidump("&FCI NORB=1,NELEC=2,MS2=0,\n&END\n0.7137 0 0 0 0\n").unwrap();
    assert_eq!(ints.e_core, 0.7137);
    assert_eq!(ints.h1(0, 0), 0.0);
    assert_eq!(ints.h2(0, 0, 0, 0), 0.0);
}

#[test]
fn one_orbital_ci_matches_hand_value() {
    let text = "&FCI NORB=1,NELEC=2,MS2=0,\n&END\n0.6 1 1 1 1\n-1.2 1 1 0 0\n0.5 0 0 0 0\n";
    let ints = parse_fcidump(text).unwrap();
    let h = jordan_wigner(&ints);
    // the single determinant |11⟩ spans the sector
    let e = sector_min(&h, 1, 1, 1);
    assert!((e - (2.0 * -1.2 + 0.6 + 0.5)).abs() < 1e-14);
}

#[test]
fn f2_freeze_four_gives_twelve_qubits() {
    let ints = fixture("f2_1.0");
    let space = ActiveSpace::freeze_lowest(&ints, 4).unwrap();
    let act = apply_active_space(&ints, &space).unwrap();
    assert_eq!((act.n_orb, act.n_elec), (6, 10));
    assert_eq!(jordan_wigner(&act).n_qubits, 12);
}

#[test]
fn frozen_core_equals_restricted_diagonalization() {
    let ints = IntegralSet::random(3, 4, 0, 17).unwrap();
    let act = apply_active_space(&ints, &ActiveSpace::freeze_lowest(&ints, 1).unwrap()).unwrap();
    let reduced = sector_min(&jordan_wigner(&act), 2, 1, 1);
    // full-space determinants with orbital 0 doubly occupied
    let h = jordan_wigner(&ints);
    let basis: Vec<u64> = enumerate_sector(3, 2, 2)
        .unwrap()
        .iter()
        .map(|c| c.bits())
        .filter(|b| b & 0b11 == 0b11)
        .collect();
    let n = basis.len();
    assert_eq!(n, 4);
    let restricted = hermitian_eigenvalues(&CMatrix::from_row_slice(n, n, &h.projected_matrix(&basis)))[0];
    assert!((reduced - restricted).abs() < 1e-12, "{reduced} vs {restricted}");
}

#[test]
fn frozen_index_out_of_range_is_rejected() {
    let ints = fixture("h4_1.23");
    assert!(ActiveSpace::new(&ints, vec![4], vec![0, 1, 2]).is_err());
}

#[test]
fn lih_sector_minimum_is_fci() {
    let h = jordan_wigner(&fixture("lih_2.6"));
    // reference FCI energy
    assert!((sector_min(&h, 6, 2, 2) - -7.81739992).abs() < 1e-8);
}

#[test]
fn small_fixtures_are_hermitian_and_conserve_symmetries() {
    check_symmetries(&jordan_wigner(&fixture("h2_0.74")));
    check_symmetries(&jordan_wigner(&fixture("h4_1.23")));
}

#[test]
fn tailoring_lih_respects_dropped_weight() {
    let h = jordan_wigner(&fixture("lih_2.6"));
    let (t, dropped) = tailor(&h, 1e-4).unwrap();
    assert!(t.len() < h.len());
    assert!(dropped > 0.0);
    let full = sector_min(&h, 6, 2, 2);
    let cut = sector_min(&t, 6, 2, 2);
    assert!((full - cut).abs() <= dropped, "{} > {dropped}", (full - cut).abs());
}

#[test]
fn tailor_edges() {
    let h = jordan_wigner(&fixture("h4_1.23"));
    assert_eq!(tailor(&h, 0.0).unwrap().0, h);
    let (only, _) = tailor(&h, f64::INFINITY).unwrap();
    assert_eq!(only.len(), 1);
    assert!(only.terms[0].word.is_identity());
    assert!(tailor(&h, -1e-3).is_err());
}

#[test]
fn hamiltonian_json_round_trip() {
    let h = jordan_wigner(&fixture("h2_0.74"));
    let text = h.to_json().unwrap();
    assert!(text.contains("\"paulis\""));
    assert_eq!(QubitHamiltonian::from_json(&text).unwrap(), h);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn fcidump_round_trip(seed in 0u64..10_000, n_orb in 1usize..5) {
        let ints = IntegralSet::random(n_orb, n_orb, (n_orb % 2) as i64, seed).unwrap();
        let back = parse_fcidump(&write_fcidump(&ints)).unwrap();
        prop_assert_eq!((back.n_orb, back.n_elec, back.ms2), (ints.n_orb, ints.n_elec, ints.ms2));
        prop_assert!((back.e_core - ints.e_core).abs() <= 1e-15);
        for (a, b) in back.h1_matrix().iter().zip(ints.h1_matrix()) {
            prop_assert!((a - b).abs() <= 1e-15);
        }
        for (a, b) in back.h2_tensor().iter().zip(ints.h2_tensor()) {
            prop_assert!((a - b).abs() <= 1e-15);
        }
    }

    #[test]
    fn random_hamiltonians_conserve_symmetries(seed in 0u64..10_000, n_orb in 1usize..4) {
        check_symmetries(&jordan_wigner(&IntegralSet::random(n_orb, n_orb, (n_orb % 2) as i64, seed).unwrap()));
    }

    #[test]
    fn freezes_compose(seed in 0u64..10_000) {
        let ints = IntegralSet::random(5, 6, 0, seed).unwrap();
        let both = apply_active_space(&ints, &ActiveSpace::freeze_lowest(&ints, 2).unwrap()).unwrap();
        let first = apply_active_space(&ints, &ActiveSpace::new(&ints, vec![1], vec![0, 2, 3, 4]).unwrap()).unwrap();
        let second = apply_active_space(&first, &ActiveSpace::freeze_lowest(&first, 1).unwrap()).unwrap();
        prop_assert!((both.e_core - second.e_core).abs() < 1e-12);
        for (a, b) in both.h1_matrix().iter().zip(second.h1_matrix()) {
            prop_assert!((a - b).abs() < 1e-12);
        }
        prop_assert_eq!(both.h2_tensor(), second.h2_tensor());
        let same = apply_active_space(&ints, &ActiveSpace::freeze_lowest(&ints, 0).unwrap()).unwrap();
        prop_assert_eq!(same, ints);
    }

    #[test]
    fn tailor_is_idempotent_and_monotone(a in 0.0f64..0.05, b in 0.0f64..0.05) {
        let h = jordan_wigner(&fixture("h4_1.23"));
        let (lo, hi) = (a.min(b), a.max(b));
        let (t_lo, _) = tailor(&h, lo).unwrap();
        let (t_hi, _) = tailor(&h, hi).unwrap();
        prop_assert!(t_hi.len() <= t_lo.len());
        prop_assert_eq!(tailor(&t_lo, lo).unwrap().0, t_lo);
    }
}
