mod common;

use common::*;
use nalgebra::DVector;
use num_complex::Complex64;
use proptest::prelude::*;

use nqsvqe::extraction::Configuration;
use nqsvqe::integrals::{jordan_wigner, PauliString, PauliWord, QubitHamiltonian};
use nqsvqe::simulator::{Circuit, Gate, GateKind, Statevector};
use nqsvqe::solver::{hartree_fock_energy, solve, CiSpace, LanczosSettings};
use nqsvqe::vqe::*;

fn h4() -> (QubitHamiltonian, AnsatzSpec) {
    let h = jordan_wigner(&fixture("h4_1.23"));
    (h, AnsatzSpec::uccsd(Configuration::hartree_fock(4, 2, 2).unwrap()))
}

#[test]
fn h4_uccsd_has_26_parameters() {
    let (_, spec) = h4();
    let c = spec.build().unwrap();
    // eight singles and eighteen doubles
    assert_eq!(c.n_params, 26);
    let excitations = uccsd_excitations(&spec.reference);
    assert_eq!(excitations.iter().filter(|e| e.occ.len() == 1).count(), 8);
    assert_eq!(excitations[0], Excitation { occ: vec![0], virt: vec![4] });
    assert_eq!(excitations[8], Excitation { occ: vec![0, 1], virt: vec![4, 5] });
}

#[test]
fn zero_parameters_return_reference() {
    let (_, spec) = h4();
    let c = spec.build().unwrap();
    let s = Statevector::zero(8).unwrap().apply(&c, &vec![0.0; 26]).unwrap();
    let r = Statevector::basis_state(8, &spec.reference).unwrap();
    assert!(max_abs_diff(s.amps(), r.amps()) < 1e-15);

    let hea = AnsatzSpec::hea(spec.reference, 2);
    let ch = hea.build().unwrap();
    let s = Statevector::zero(8).unwrap().apply(&ch, &vec![0.0; ch.n_params]).unwrap();
    assert!(max_abs_diff(s.amps(), r.amps()) < 1e-15);
}

/// Dense `T − T†` for an excitation, built from explicit ladder matrices.
fn dense_generator(e: &Excitation, n: usize) -> CMatrix {
    let ladder = |mode: usize, dagger: bool| -> CMatrix {
        // a_k = Z_{<k} (X + iY)/2
        let mut s = String::new();
        for q in 0..n {
            s.push(if q < mode { 'Z' } else { 'I' });
        }
        let z = pauli_matrix(&s);
        let mut xs: Vec<char> = vec!['I'; n];
        xs[mode] = 'X';
        let mut ys = xs.clone();
        ys[mode] = 'Y';
        let x = pauli_matrix(&xs.iter().collect::<String>());
        let y = pauli_matrix(&ys.iter().collect::<String>());
        let a = &z * (x + y * c(0.0, 1.0)) * c(0.5, 0.0);
        if dagger { a.adjoint() } else { a }
    };
    let mut t = CMatrix::identity(1 << n, 1 << n);
    for &a in e.virt.iter().rev() {
        t *= ladder(a, true);
    }
    for &i in &e.occ {
        t *= ladder(i, false);
    }
    &t - t.adjoint()
}

#[test]
fn two_orbital_toy_matches_matrix_exponential() {
    let reference = Configuration::hartree_fock(2, 1, 1).unwrap();
    let spec = AnsatzSpec::uccsd(reference);
    let circuit = spec.build().unwrap();
    let excitations = uccsd_excitations(&reference);
    assert_eq!(excitations.len(), 3);
    let start = Statevector::basis_state(4, &reference).unwrap();
    let psi0 = DVector::from_vec(start.amps().to_vec());
    // one excitation at a time is exact
    for (j, e) in excitations.iter().enumerate() {
        let theta = 0.37 + 0.2 * j as f64;
        let mut params = vec![0.0; 3];
        params[j] = theta;
        let s = Statevector::zero(4).unwrap().apply(&circuit, &params).unwrap();
        let expect = expm(&(dense_generator(e, 4) * c(theta, 0.0))) * &psi0;
        assert!(max_abs_diff(s.amps(), expect.as_slice()) < 1e-10);
    }
    // the full circuit is the ordered product: doubles, then singles
    let params = [0.3, -0.5, 0.8];
    let u = expm(&(dense_generator(&excitations[0], 4) * c(params[0], 0.0)))
        * expm(&(dense_generator(&excitations[1], 4) * c(params[1], 0.0)))
        * expm(&(dense_generator(&excitations[2], 4) * c(params[2], 0.0)));
    let s = Statevector::zero(4).unwrap().apply(&circuit, &params).unwrap();
    let expect = u * &psi0;
    assert!(max_abs_diff(s.amps(), expect.as_slice()) < 1e-10);
}

#[test]
fn hea_layout() {
    let spec = AnsatzSpec::hea("10".parse().unwrap(), 1);
    let c = build_hea(2, &spec).unwrap();
    assert_eq!(c.n_params, 4);
    let kinds: Vec<&GateKind> = c.gates().iter().map(|g| &g.kind).collect();
    assert_eq!(
        kinds,
        [&GateKind::X, &GateKind::RY, &GateKind::RY, &GateKind::CZ, &GateKind::RY, &GateKind::RY]
    );
    assert!(build_hea(2, &AnsatzSpec::hea("10".parse().unwrap(), 0)).is_err());
    assert!(build_uccsd(1, (1, 0), &spec).is_err());
}

#[test]
fn reference_must_occupy_lowest_orbitals() {
    let spec = AnsatzSpec::uccsd("0011".parse().unwrap());
    assert!(spec.build().is_err());
    let ok = AnsatzSpec::uccsd("1100".parse().unwrap());
    assert!(build_uccsd(2, (1, 0), &ok).is_err());
}

#[test]
#[ignore = "a single RY/CZ layer cannot represent the H2 ground state in the interleaved ordering; it stalls at the Hartree-Fock energy"]
fn hea_on_h2_reaches_exact_ground_state() {
    let h = jordan_wigner(&fixture("h2_0.74"));
    let exact = hermitian_eigenvalues(&dense_hamiltonian(&h))[0];
    let spec = AnsatzSpec::hea(Configuration::hartree_fock(2, 1, 1).unwrap(), 1);
    let opt = VqeSettings { max_iters: 3000, ..Default::default() };
    let r = run_vqe(&h, &spec, &opt, 7).unwrap();
    assert!((r.energy - exact).abs() < 1e-6, "{} vs {exact}", r.energy);
}

#[test]
fn hea_on_h2_single_layer_stalls_and_two_layers_suffice() {
    let h = jordan_wigner(&fixture("h2_0.74"));
    let exact = hermitian_eigenvalues(&dense_hamiltonian(&h))[0];
    let hf = hartree_fock_energy(&fixture("h2_0.74")).unwrap();
    let reference = Configuration::hartree_fock(2, 1, 1).unwrap();
    let opt = VqeSettings { max_iters: 3000, gradient: GradientMethod::Adjoint, ..Default::default() };
    let one = run_vqe(&h, &AnsatzSpec::hea(reference, 1), &opt, 7).unwrap();
    assert!(one.energy >= exact - 1e-9);
    assert!((one.energy - hf).abs() < 1e-5, "single layer reached {}", one.energy);
    let best = (0..6)
        .map(|seed| run_vqe(&h, &AnsatzSpec::hea(reference, 2), &opt, seed).unwrap().energy)
        .fold(f64::INFINITY, f64::min);
    assert!((best - exact).abs() < 1e-6, "{best} vs {exact}");
}

#[test]
fn shift_rule_single_rotation() {
    let h = QubitHamiltonian::from_terms(1, [PauliString { word: PauliWord::parse("Z").unwrap(), coeff: 1.0 }]).unwrap();
    let mut c = Circuit::new(1, 1);
    c.push(Gate::ry(0, 0.0).with_param(0, 1.0)).unwrap();
    let zero = Statevector::zero(1).unwrap();
    for theta in [-2.0, -0.3, 0.0, 0.9, 2.7] {
        let g = parameter_shift_gradient(&c, &h, &[theta], &zero, None).unwrap();
        assert!((g[0] + f64::sin(theta)).abs() < 1e-10);
    }
    let empty = Circuit::new(1, 0);
    assert!(parameter_shift_gradient(&empty, &h, &[], &zero, None).unwrap().is_empty());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(4))]

    #[test]
    fn h4_gradients_match_finite_differences(params in proptest::collection::vec(-0.5f64..0.5, 26)) {
        let (h, spec) = h4();
        let c = spec.build().unwrap();
        let zero = Statevector::zero(8).unwrap();
        let g = parameter_shift_gradient(&c, &h, &params, &zero, None).unwrap();
        let step = 1e-5;
        let mut worst: f64 = 0.0;
        for j in 0..26 {
            let mut p = params.clone();
            p[j] += step;
            let up = energy(&c, &h, &p, &zero).unwrap();
            p[j] -= 2.0 * step;
            let down = energy(&c, &h, &p, &zero).unwrap();
            worst = worst.max((g[j] - (up - down) / (2.0 * step)).abs());
        }
        prop_assert!(worst < 1e-6, "max deviation {worst}");
        let (e, adj) = adjoint_gradient(&c, &h, &params, &zero).unwrap();
        prop_assert!((e - energy(&c, &h, &params, &zero).unwrap()).abs() < 1e-12);
        for (a, b) in g.iter().zip(&adj) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }
}

#[test]
fn zero_iterations_give_hartree_fock() {
    let (h, spec) = h4();
    let r = run_vqe(&h, &spec, &VqeSettings { max_iters: 0, ..Default::default() }, 3).unwrap();
    let hf = hartree_fock_energy(&fixture("h4_1.23")).unwrap();
    assert!((r.energy - hf).abs() < 1e-12);
    assert!(r.trace.is_empty());
}

#[test]
fn grouping_and_determinism() {
    let (h, spec) = h4();
    let base = VqeSettings { max_iters: 15, gradient: GradientMethod::Adjoint, ..Default::default() };
    let a = run_vqe(&h, &spec, &base, 5).unwrap();
    let b = run_vqe(&h, &spec, &base, 5).unwrap();
    assert_eq!(a.trace, b.trace);
    let all = run_vqe(&h, &spec, &VqeSettings { group_size: Some(26), ..base.clone() }, 5).unwrap();
    assert_eq!(a.trace, all.trace);
    assert_eq!(a.params, all.params);
    let grouped = run_vqe(&h, &spec, &VqeSettings { group_size: Some(5), ..base.clone() }, 5).unwrap();
    assert!(grouped.energy < grouped.initial_energy);
    assert!(grouped.energy <= grouped.trace.iter().map(|r| r.energy).fold(f64::INFINITY, f64::min));
    assert!(run_vqe(&h, &spec, &VqeSettings { group_size: Some(0), ..base }, 5).is_err());
}

#[test]
fn h4_uccsd_converges_to_stationary_point() {
    let ints = fixture("h4_1.23");
    let (h, spec) = h4();
    let r = run_vqe(&h, &spec, &VqeSettings::default(), 1).unwrap();
    let exact = solve(&ints, &CiSpace::fci(&ints).unwrap(), &LanczosSettings::default()).unwrap().energy;
    // reference simulator value
    assert!((r.energy - -1.9675232627).abs() < 1e-3);
    assert!(r.energy <= r.initial_energy + 1e-9);
    for rec in &r.trace {
        assert!(rec.energy.is_finite() && rec.energy >= exact - 1e-9);
    }
    let zero = Statevector::zero(8).unwrap();
    let g = parameter_shift_gradient(&r.circuit, &h, &r.params, &zero, None).unwrap();
    let norm = g.iter().map(|x| x * x).sum::<f64>().sqrt();
    assert!(norm < 1e-4, "gradient norm {norm}");
    let state = r.state().unwrap();
    assert!(state.out_of_sector_probability(2, 2) < 1e-10);
    assert!((state.expectation(&h).unwrap() - r.energy).abs() < 1e-12);

    let back = VqeResult::from_json(&r.to_json().unwrap()).unwrap();
    assert_eq!(back.params, r.params);
    assert_eq!(back.trace, r.trace);
    assert_eq!(back.circuit, r.circuit);
}

#[test]
fn amplitudes_are_complex_only_through_phases() {
    // UCCSD generators are real, so the state stays real
    let (_, spec) = h4();
    let c = spec.build().unwrap();
    let params: Vec<f64> = (0..26).map(|k| 0.05 * k as f64 - 0.6).collect();
    let s = Statevector::zero(8).unwrap().apply(&c, &params).unwrap();
    assert!(s.amps().iter().all(|a: &Complex64| a.im.abs() < 1e-12));
}
