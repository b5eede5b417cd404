mod common;

use common::*;
use proptest::prelude::*;

use nqsvqe::extraction::{enumerate_sector, Configuration};
use nqsvqe::integrals::{apply_active_space, jordan_wigner, ActiveSpace, IntegralSet};
use nqsvqe::solver::{hamiltonian_element, hartree_fock_energy, solve, CiSpace, LanczosSettings};

fn fci(ints: &IntegralSet) -> nqsvqe::solver::CiSolution {
    solve(ints, &CiSpace::fci(ints).unwrap(), &LanczosSettings::default()).unwrap()
}

fn cisd(ints: &IntegralSet) -> nqsvqe::solver::CiSolution {
    solve(ints, &CiSpace::cisd(ints).unwrap(), &LanczosSettings::default()).unwrap()
}

fn f2_active(name: &str) -> IntegralSet {
    let ints = fixture(name);
    apply_active_space(&ints, &ActiveSpace::freeze_lowest(&ints, 4).unwrap()).unwrap()
}

#[test]
fn h4_fci_reference_energy() {
    assert!((fci(&fixture("h4_1.23")).energy - -1.9695121652).abs() < 5e-6);
}

#[test]
fn lih_hf_and_cisd_reference_energies() {
    let ints = fixture("lih_2.6");
    assert!((hartree_fock_energy(&ints).unwrap() - -7.75840439).abs() < 1e-8);
    let e = cisd(&ints).energy;
    assert!((e - -7.81734514).abs() < 5e-6, "CISD {e}");
}

#[test]
fn variational_hierarchy_on_fixtures() {
    let sets = [
        fixture("h2_0.74"),
        fixture("h4_1.23"),
        fixture("lih_2.6"),
        fixture("lih_3.0"),
        f2_active("f2_1.0"),
        f2_active("f2_2.0"),
        f2_active("f2_3.0"),
    ];
    for ints in &sets {
        let hf = hartree_fock_energy(ints).unwrap();
        let ci = cisd(ints);
        let full = fci(ints);
        assert!(full.energy <= ci.energy + 1e-12 && ci.energy <= hf + 1e-12);
        assert!(full.residual < 1e-8 && ci.residual < 1e-8);
        full.table.check_normalized().unwrap();
        ci.table.check_normalized().unwrap();
    }
}

#[test]
fn fci_agrees_with_qubit_hamiltonian() {
    for ints in [fixture("h2_0.74"), fixture("h4_1.23"), fixture("lih_2.6"), f2_active("f2_2.0")] {
        let h = jordan_wigner(&ints);
        let basis: Vec<u64> = enumerate_sector(ints.n_orb, ints.n_alpha(), ints.n_beta())
            .unwrap()
            .iter()
            .map(|c| c.bits())
            .collect();
        let n = basis.len();
        let m = CMatrix::from_row_slice(n, n, &h.projected_matrix(&basis));
        let e = hermitian_eigenvalues(&m)[0];
        let sol = fci(&ints);
        assert!((sol.energy - e).abs() < 1e-9, "{} vs {e}", sol.energy);
        // the emitted vector is an eigenvector of the qubit operator too
        let v = sol.table.to_statevector().unwrap();
        assert!((v.expectation(&h).unwrap() - e).abs() < 1e-9);
    }
}

#[test]
fn triple_excitations_vanish() {
    let ints = fixture("h4_1.23");
    let a: Configuration = "11110000".parse().unwrap();
    let b: Configuration = "00001111".parse().unwrap();
    assert_eq!(hamiltonian_element(&ints, &a, &b).unwrap(), 0.0);
    let c3: Configuration = "10101000".parse().unwrap();
    assert!(hamiltonian_element(&ints, &a, &c3).is_err());
}

#[test]
fn oversized_space_is_rejected() {
    let ints = IntegralSet::zeros(30, 30, 0).unwrap();
    assert!(matches!(CiSpace::fci(&ints), Err(nqsvqe::Error::Capacity { .. })));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn slater_condon_matches_pauli_oracle(seed in 0u64..10_000, i in 0usize..36, j in 0usize..36) {
        let ints = IntegralSet::random(4, 4, 0, seed).unwrap();
        let dets = enumerate_sector(4, 2, 2).unwrap();
        let h = jordan_wigner(&ints);
        let sc = hamiltonian_element(&ints, &dets[i], &dets[j]).unwrap();
        let pauli = if i == j {
            h.projected_matrix(&[dets[i].bits()])[0]
        } else {
            h.projected_matrix(&[dets[i].bits(), dets[j].bits()])[1]
        };
        prop_assert!((pauli.re - sc).abs() < 1e-10 && pauli.im.abs() < 1e-12);
    }
}
