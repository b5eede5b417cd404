mod common;

use common::*;
use num_complex::Complex64;
use proptest::prelude::*;

use nqsvqe::extraction::{enumerate_sector, Configuration, TableMeta, TableSource, WavefunctionTable};
use nqsvqe::integrals::{jordan_wigner, IntegralSet, QubitHamiltonian};
use nqsvqe::nnqs::{ModelConfig, ModelParams, Sample, SampleBatch};
use nqsvqe::solver::{hartree_fock_energy, solve, CiSolution, CiSpace, LanczosSettings};
use nqsvqe::training::*;
use nqsvqe::vqe::AdamSettings;

fn fci(ints: &IntegralSet) -> CiSolution {
    let tight = LanczosSettings { tol: 1e-12, ..Default::default() };
    solve(ints, &CiSpace::fci(ints).unwrap(), &tight).unwrap()
}

/// A narrow model on a 3-orbital, (1, 1) toy with random integrals.
fn toy(seed: u64) -> (ModelParams, QubitHamiltonian, IntegralSet) {
    let ints = IntegralSet::random(3, 2, 0, seed).unwrap();
    let cfg = ModelConfig {
        d_model: 8,
        n_heads: 2,
        n_layers: 1,
        d_ff: 16,
        phase_hidden: vec![12, 12],
        ..ModelConfig::new(3, (1, 1))
    };
    (ModelParams::init(cfg, seed).unwrap(), jordan_wigner(&ints), ints)
}

fn perturbed(params: &ModelParams, j: usize, delta: f64) -> ModelParams {
    let mut p = params.clone();
    p.values_mut()[j] += delta;
    p
}

fn probe_indices(n: usize, count: usize) -> Vec<usize> {
    (0..count).map(|k| (k * 7919 + 13) % n).collect()
}

fn assert_close(analytic: f64, numeric: f64, tol: f64, what: &str) {
    let scale = analytic.abs().max(numeric.abs()).max(1e-3);
    assert!(
        (analytic - numeric).abs() / scale < tol,
        "{what}: analytic {analytic} vs numeric {numeric}"
    );
}

#[test]
fn fci_vector_has_constant_local_energy() {
    for name in ["h4_1.23", "lih_2.6"] {
        let ints = fixture(name);
        let h = jordan_wigner(&ints);
        let sol = fci(&ints);
        // amplitudes at rounding level carry no signal
        let support: Vec<Configuration> = sol
            .table
            .entries()
            .iter()
            .filter(|(_, c)| c.norm() > 1e-4)
            .map(|(x, _)| *x)
            .collect();
        assert!(support.len() >= 8, "{name}: {}", support.len());
        for e in local_energies(&sol.table, &support, &h).unwrap() {
            assert!((e.re - sol.energy).abs() < 1e-7 && e.im.abs() < 1e-7, "{name}: {e}");
        }
    }
    let lih = fci(&fixture("lih_2.6"));
    assert!((lih.energy - -7.81739992).abs() < 5e-6);
}

#[test]
fn single_determinant_local_energy_is_hartree_fock() {
    let ints = fixture("lih_2.6");
    let hf = Configuration::hartree_fock(6, 2, 2).unwrap();
    let table = WavefunctionTable::new(
        TableMeta { source: TableSource::ModelDump, n_qubits: 12, n_alpha: 2, n_beta: 2 },
        vec![(hf, Complex64::new(0.0, 1.0))],
    )
    .unwrap();
    let e = local_energy(&table, &hf, &jordan_wigner(&ints)).unwrap();
    assert!((e.re - hartree_fock_energy(&ints).unwrap()).abs() < 1e-10 && e.im.abs() < 1e-12);
}

#[test]
fn local_energy_errors() {
    let (params, _, _) = toy(1);
    let h4 = jordan_wigner(&fixture("h4_1.23"));
    let x: Configuration = "110000".parse().unwrap();
    assert!(local_energy(&params, &x, &h4).is_err());
    let table = WavefunctionTable::new(
        TableMeta { source: TableSource::ModelDump, n_qubits: 6, n_alpha: 1, n_beta: 1 },
        vec![(x, Complex64::new(1.0, 0.0))],
    )
    .unwrap();
    let (_, h, _) = toy(1);
    let other: Configuration = "100100".parse().unwrap();
    assert!(matches!(local_energy(&table, &other, &h), Err(nqsvqe::Error::ZeroProbability { .. })));
}

#[test]
fn exact_energy_is_rayleigh_quotient() {
    let (params, h, _) = toy(3);
    let basis = enumerate_sector(3, 1, 1).unwrap();
    let bits: Vec<u64> = basis.iter().map(|c| c.bits()).collect();
    let m = CMatrix::from_row_slice(basis.len(), basis.len(), &h.projected_matrix(&bits));
    let v = nalgebra::DVector::from_vec(params.amplitudes(&basis).unwrap());
    let rayleigh = (v.adjoint() * &m * &v)[(0, 0)] / v.norm_squared();
    let e = exact_energy(&params, &h).unwrap();
    assert!((e - rayleigh.re).abs() < 1e-12, "{e} vs {rayleigh}");
    let eg = energy_and_gradient(&params, Estimate::Exact, &h).unwrap();
    assert!((eg.energy - e).abs() < 1e-12);
    assert_eq!(eg.unique, 9);

    // Σ p·E_loc over the sector
    let probs: Vec<f64> = params.evaluate(&basis).unwrap().iter().map(|(lp, _)| lp.exp()).collect();
    let el = local_energies(&params, &basis, &h).unwrap();
    let mean: f64 = probs.iter().zip(&el).map(|(p, e)| p * e.re).sum();
    assert!((mean - e).abs() < 1e-12);
}

#[test]
fn exact_gradient_matches_finite_differences() {
    let (params, h, _) = toy(5);
    let eg = energy_and_gradient(&params, Estimate::Exact, &h).unwrap();
    let step = 1e-5;
    for j in probe_indices(params.len(), 40) {
        let fd = (exact_energy(&perturbed(&params, j, step), &h).unwrap()
            - exact_energy(&perturbed(&params, j, -step), &h).unwrap())
            / (2.0 * step);
        assert_close(eg.grad[j], fd, 1e-4, &format!("parameter {j}"));
    }
}

#[test]
fn sampled_gradient_matches_frozen_batch_surrogate() {
    let (params, h, _) = toy(7);
    let batch = params.sample_batch(500, 11).unwrap();
    let eg = energy_and_gradient(&params, Estimate::Sampled { batch: &batch, clip: None }, &h).unwrap();
    let configs = batch.configs();
    let weights: Vec<f64> = batch.entries.iter().map(|s| s.count as f64 / batch.total as f64).collect();
    let el = local_energies(&params, &configs, &h).unwrap();
    let mean: Complex64 = weights.iter().zip(&el).map(|(w, e)| w * e).sum();
    assert!((mean.re - eg.energy).abs() < 1e-12);
    // local energies held fixed at the current parameters
    let surrogate = |p: &ModelParams| -> f64 {
        p.evaluate(&configs)
            .unwrap()
            .iter()
            .zip(&weights)
            .zip(&el)
            .map(|(((lp, ph), w), e)| w * ((e - mean).re * lp + 2.0 * (e - mean).im * ph))
            .sum()
    };
    let step = 1e-5;
    for j in probe_indices(params.len(), 40) {
        let fd = (surrogate(&perturbed(&params, j, step)) - surrogate(&perturbed(&params, j, -step))) / (2.0 * step);
        assert_close(eg.grad[j], fd, 1e-4, &format!("parameter {j}"));
    }
}

#[test]
fn sampled_gradient_approaches_exact_gradient() {
    let (params, h, _) = toy(9);
    let exact = energy_and_gradient(&params, Estimate::Exact, &h).unwrap();
    let batch = params.sample_batch(4_000_000, 2).unwrap();
    let sampled = energy_and_gradient(&params, Estimate::Sampled { batch: &batch, clip: None }, &h).unwrap();
    let err: f64 = exact.grad.iter().zip(&sampled.grad).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
    assert!(err < 0.02 * exact.grad_norm(), "{err} vs {}", exact.grad_norm());
    assert!((exact.energy - sampled.energy).abs() < 1e-2);
}

#[test]
fn global_phase_is_a_gauge() {
    let (params, h, _) = toy(4);
    let k = params.phase_output_bias(2);
    let shifted = perturbed(&params, k, 0.9);
    let batch = params.sample_batch(300, 1).unwrap();
    for est in [Estimate::Exact, Estimate::Sampled { batch: &batch, clip: None }] {
        let a = energy_and_gradient(&params, est, &h).unwrap();
        let b = energy_and_gradient(&shifted, est, &h).unwrap();
        assert!((a.energy - b.energy).abs() < 1e-12);
        assert!(a.grad[k].abs() < 1e-12 && b.grad[k].abs() < 1e-12);
        for (x, y) in a.grad.iter().zip(&b.grad) {
            assert!((x - y).abs() < 1e-10);
        }
    }
}

#[test]
fn batch_without_support_is_degenerate() {
    let (mut params, h, _) = toy(6);
    params.values_mut().iter_mut().for_each(|v| *v *= 1e4);
    let basis = enumerate_sector(3, 1, 1).unwrap();
    let dead: Vec<Sample> = params
        .evaluate(&basis)
        .unwrap()
        .into_iter()
        .zip(&basis)
        .filter(|((lp, _), _)| (0.5 * lp).exp() == 0.0)
        .map(|((log_prob, phase), config)| Sample { config: *config, count: 3, log_prob, phase })
        .collect();
    assert!(!dead.is_empty());
    let batch = SampleBatch { total: 3 * dead.len() as u64, entries: dead };
    let r = energy_and_gradient(&params, Estimate::Sampled { batch: &batch, clip: None }, &h);
    assert!(matches!(r, Err(nqsvqe::Error::DegenerateBatch)));

    let empty = SampleBatch { entries: vec![], total: 0 };
    assert!(energy_and_gradient(&params, Estimate::Sampled { batch: &empty, clip: None }, &h).is_err());
    let wrong = jordan_wigner(&fixture("h4_1.23"));
    assert!(energy_and_gradient(&params, Estimate::Exact, &wrong).is_err());
}

#[test]
fn clipping_only_touches_the_gradient() {
    let (params, h, _) = toy(8);
    let batch = params.sample_batch(2000, 5).unwrap();
    let free = energy_and_gradient(&params, Estimate::Sampled { batch: &batch, clip: None }, &h).unwrap();
    let tight = energy_and_gradient(&params, Estimate::Sampled { batch: &batch, clip: Some(0.5) }, &h).unwrap();
    let loose = energy_and_gradient(&params, Estimate::Sampled { batch: &batch, clip: Some(1e9) }, &h).unwrap();
    assert_eq!(free.energy, tight.energy);
    assert_eq!(free.variance, tight.variance);
    assert_ne!(free.grad, tight.grad);
    for (a, b) in free.grad.iter().zip(&loose.grad) {
        assert!((a - b).abs() < 1e-12);
    }
}

#[test]
fn vmc_is_deterministic_and_respects_the_bound() {
    let (params, h, ints) = toy(2);
    let e0 = fci(&ints).energy;
    let settings = VmcSettings { max_steps: 30, n_samples: 256, eval_every: 5, adam: AdamSettings::with_lr(1e-2), ..Default::default() };
    let (best_a, a) = train_vmc(&params, &h, &settings, 42, Some(e0)).unwrap();
    let (best_b, b) = train_vmc(&params, &h, &settings, 42, Some(e0)).unwrap();
    assert_eq!(a.mode, EvalMode::ExactEval);
    assert_eq!(best_a.values(), best_b.values());
    let strip = |t: &TrainTrace| t.records.iter().map(|r| (r.step, r.energy, r.grad_norm, r.unique_samples)).collect::<Vec<_>>();
    assert_eq!(strip(&a), strip(&b));
    assert_eq!(a.records.iter().map(|r| r.step).collect::<Vec<_>>(), vec![0, 5, 10, 15, 20, 25, 30]);
    for r in &a.records {
        assert!(r.energy >= e0 - 1e-10);
    }
    assert!(a.final_energy().unwrap() < a.records[0].energy);
    let best = exact_energy(&best_a, &h).unwrap();
    assert!((best - a.best_energy().unwrap()).abs() < 1e-12);

    let (_, c) = train_vmc(&params, &h, &settings, 43, Some(e0)).unwrap();
    assert_ne!(strip(&a), strip(&c));
}

#[test]
fn vmc_stops_once_inside_the_gap() {
    let (params, h, _) = toy(2);
    let e = exact_energy(&params, &h).unwrap();
    let settings = VmcSettings { max_steps: 1000, eval_every: 1, patience: 3, gradient: GradientSource::Exact, target_gap: 1.0, ..Default::default() };
    let (_, trace) = train_vmc(&params, &h, &settings, 0, Some(e)).unwrap();
    assert_eq!(trace.records.len(), 3);
    assert_eq!(trace.steps_to_accuracy(e, 1.0), Some(0));
    assert!(train_vmc(&params, &h, &VmcSettings { eval_every: 0, ..settings }, 0, None).is_err());
}

#[test]
fn trace_csv_round_trip() {
    let (params, h, _) = toy(2);
    let settings = VmcSettings { max_steps: 6, n_samples: 128, eval_every: 3, ..Default::default() };
    let (_, trace) = train_vmc(&params, &h, &settings, 1, None).unwrap();
    let csv = trace.to_csv();
    assert!(csv.starts_with("step,energy,variance,grad_norm,unique_samples,wall_ms\n"));
    assert_eq!(TrainTrace::from_csv(&csv, EvalMode::ExactEval).unwrap(), trace);
    assert!(TrainTrace::from_csv("step,energy\n1,2\n", EvalMode::Sampled).is_err());
}

#[test]
fn pretraining_on_a_single_determinant() {
    let hf = Configuration::hartree_fock(4, 2, 2).unwrap();
    let table = WavefunctionTable::new(
        TableMeta { source: TableSource::VqeExtractFull, n_qubits: 8, n_alpha: 2, n_beta: 2 },
        vec![(hf, Complex64::new(1.0, 0.0))],
    )
    .unwrap();
    let target = PretrainTarget::new(&table).unwrap();
    let p0 = ModelParams::init(ModelConfig::new(4, (2, 2)), 3).unwrap();
    let settings = PretrainSettings { max_epochs: 300, ..Default::default() };
    let (p, records) = pretrain(&p0, &target, &settings).unwrap();
    assert!(records.last().unwrap().loss < records[0].loss);
    let batch = p.sample_batch(10_000, 0).unwrap();
    let top = batch.entries.iter().max_by_key(|s| s.count).unwrap();
    assert_eq!(top.config, hf);
    assert!(top.log_prob.exp() > 0.99, "{}", top.log_prob.exp());
}

#[test]
fn pretraining_on_fci_lands_near_the_ground_state() {
    let ints = fixture("h4_1.23");
    let h = jordan_wigner(&ints);
    let sol = fci(&ints);
    let target = PretrainTarget::new(&sol.table).unwrap();
    let p0 = ModelParams::init(ModelConfig::new(4, (2, 2)), 0).unwrap();
    let (kl0, ph0, _) = pretrain_loss(&p0, &target, 1.0).unwrap();
    let (p, records) = pretrain(&p0, &target, &PretrainSettings::default()).unwrap();
    assert!((records[0].loss - (kl0 + ph0)).abs() < 1e-12);
    let best = records.iter().map(|r| r.loss).fold(f64::INFINITY, f64::min);
    assert!(best < records[0].loss);
    let e = exact_energy(&p, &h).unwrap();
    assert!(e - sol.energy < 1e-3 && e >= sol.energy - 1e-10, "{e} vs {}", sol.energy);
    // a model matching the ground state has a near-stationary energy
    let g = energy_and_gradient(&p, Estimate::Exact, &h).unwrap();
    let g0 = energy_and_gradient(&p0, Estimate::Exact, &h).unwrap();
    assert!(g.grad_norm() < 0.1 * g0.grad_norm());
}

#[test]
fn pretrain_rejects_bad_targets() {
    let meta = TableMeta { source: TableSource::ModelDump, n_qubits: 6, n_alpha: 1, n_beta: 1 };
    assert!(PretrainTarget::new(&WavefunctionTable::new(meta.clone(), vec![]).unwrap()).is_err());
    let x: Configuration = "110000".parse().unwrap();
    let t = PretrainTarget::new(&WavefunctionTable::new(meta, vec![(x, Complex64::new(0.6, 0.0))]).unwrap()).unwrap();
    assert_eq!(t.probs, vec![1.0]);
    let wrong = ModelParams::init(ModelConfig::new(3, (2, 0)), 0).unwrap();
    assert!(pretrain_loss(&wrong, &t, 1.0).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn exact_energy_is_variational(seed in 0u64..1000) {
        let (params, h, ints) = toy(seed);
        let e0 = fci(&ints).energy;
        let e = exact_energy(&params, &h).unwrap();
        prop_assert!(e >= e0 - 1e-10);
        let eg = energy_and_gradient(&params, Estimate::Exact, &h).unwrap();
        prop_assert!(eg.variance >= 0.0);
    }
}
