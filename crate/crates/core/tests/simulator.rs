mod common;

use common::*;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use rand::Rng;
use ttvqe::pauli::tfim;
use ttvqe::sim::run_noisy_from;
use ttvqe::{
    build_hea, build_hva, run_noisy, run_pure, Circuit, DensityMatrix, Gate, GateKind, Hamiltonian,
    NoiseModel, Pauli, PauliString, StateVector,
};

fn random_hamiltonian(rng: &mut rand_chacha::ChaCha8Rng, n: usize, terms: usize) -> Hamiltonian {
    let letters = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];
    let strings = (0..terms).map(|_| {
        let ls = (0..n).map(|_| letters[rng.random_range(0..4)]).collect();
        PauliString::new(ls, rng.random::<f64>() * 2.0 - 1.0).unwrap()
    });
    Hamiltonian::new(n, strings).unwrap()
}

#[test]
fn random_circuits_match_dense_products() {
    let mut rng = rng(11);
    for case in 0..50 {
        let n = 1 + case % 6;
        let gates = rng.random_range(0..=60);
        let d = 3;
        let c = random_circuit(&mut rng, n, gates, d);
        let theta = random_theta(&mut rng, d);
        let psi = run_pure(&c, &theta, &StateVector::zero(n)).unwrap();

        let mut e0 = DVector::<C64>::zeros(1 << n);
        e0[0] = C64::new(1.0, 0.0);
        let oracle = circuit_unitary(&c, &theta) * e0;
        let diff = (to_vector(&psi) - &oracle).camax();
        assert!(diff < 1e-10, "case {case}: amplitude diff {diff}");

        let h = random_hamiltonian(&mut rng, n, 6);
        let dense = h.to_dense().unwrap();
        let quad = (oracle.adjoint() * &dense * &oracle)[(0, 0)].re;
        let e = h.expectation_pure(&psi).unwrap();
        assert!((e - quad).abs() < 1e-10, "case {case}: {e} vs {quad}");

        let rho = run_noisy(&c, &theta, &NoiseModel::depolarizing(0.0).unwrap()).unwrap();
        assert!(rho.max_abs_diff(&psi.to_density()) < 1e-10, "case {case}");
        let mixed = h.expectation_mixed(&rho).unwrap();
        assert!((mixed - e).abs() < 1e-10);
    }
}

#[test]
fn norm_is_preserved_on_deep_circuits() {
    let mut rng = rng(12);
    for case in 0..20 {
        let n = 1 + case % 8;
        let c = random_circuit(&mut rng, n, 100, 4);
        let psi = run_pure(&c, &random_theta(&mut rng, 4), &random_state(&mut rng, n)).unwrap();
        assert!((psi.norm() - 1.0).abs() < 1e-10);
    }
}

#[test]
fn every_gate_is_unitary() {
    let mut rng = rng(13);
    for kind in [
        GateKind::H,
        GateKind::RX,
        GateKind::RY,
        GateKind::RZ,
        GateKind::RZZ,
        GateKind::CNOT,
    ] {
        for _ in 0..10 {
            let g = kind.unitary(rng.random::<f64>() * 20.0 - 10.0);
            let err = (g.adjoint() * &g - DMatrix::identity(g.nrows(), g.ncols())).camax();
            assert!(err < 1e-12, "{kind}: {err}");
        }
    }
}

#[test]
fn empty_circuit_and_hadamard_wall() {
    let mut rng = rng(14);
    let psi = random_state(&mut rng, 3);
    let c = Circuit::new(3, 0).unwrap();
    assert_eq!(run_pure(&c, &[], &psi).unwrap(), psi);

    let mut c = Circuit::new(5, 0).unwrap();
    for q in 1..=5 {
        c.push(Gate::h(q)).unwrap();
    }
    let out = run_pure(&c, &[], &StateVector::zero(5)).unwrap();
    let amp = 2f64.powf(-2.5);
    assert!(out
        .amplitudes()
        .iter()
        .all(|a| (a - C64::new(amp, 0.0)).norm() < 1e-14));
}

fn naive_noisy(c: &Circuit, theta: &[f64], lambda: f64, prep_noise: bool) -> DMatrix<C64> {
    let n = c.num_qubits();
    let dim = 1 << n;
    let mut rho = DMatrix::<C64>::zeros(dim, dim);
    rho[(0, 0)] = C64::new(1.0, 0.0);
    for g in c.gates() {
        let u = gate_matrix(g, theta, n);
        rho = &u * rho * u.adjoint();
        if g.kind() != GateKind::H || prep_noise {
            rho = naive_depolarize(&rho, g.qubits(), n, lambda);
        }
    }
    rho
}

#[test]
fn noisy_hva_matches_channel_by_channel_oracle() {
    let c = build_hva(2, 1).unwrap();
    let h = tfim(2, 1.0).unwrap();
    let dense_h = h.to_dense().unwrap();
    for (theta, prep) in [
        ([0.7, -1.3], true),
        ([2.1, 0.4], true),
        ([0.7, -1.3], false),
    ] {
        let noise = NoiseModel::depolarizing(0.005)
            .unwrap()
            .with_state_prep_noise(prep);
        let rho = run_noisy(&c, &theta, &noise).unwrap();
        let oracle = naive_noisy(&c, &theta, 0.005, prep);
        assert!((to_matrix(&rho) - &oracle).camax() < 1e-12);
        let e = h.expectation_mixed(&rho).unwrap();
        let e_oracle = (&dense_h * &oracle).trace().re;
        assert!((e - e_oracle).abs() < 1e-10, "{e} vs {e_oracle}");
    }
}

#[test]
fn noisy_random_circuits_match_oracle() {
    let mut rng = rng(15);
    for case in 0..12 {
        let n = 1 + case % 3;
        let c = random_circuit(&mut rng, n, 15, 2);
        let theta = random_theta(&mut rng, 2);
        let lambda = rng.random::<f64>() * 0.3;
        let rho = run_noisy(&c, &theta, &NoiseModel::depolarizing(lambda).unwrap()).unwrap();
        let diff = (to_matrix(&rho) - naive_noisy(&c, &theta, lambda, true)).camax();
        assert!(diff < 1e-12, "case {case}: {diff}");
    }
}

#[test]
fn fully_depolarizing_single_rotation_gives_maximally_mixed() {
    let mut c = Circuit::new(1, 1).unwrap();
    c.push(Gate::rotation(GateKind::RX, 1, 1).unwrap()).unwrap();
    let noise = NoiseModel::depolarizing(1.0).unwrap();
    for t in [0.0, 0.3, 2.0, -5.0] {
        let rho = run_noisy(&c, &[t], &noise).unwrap();
        assert!(rho.max_abs_diff(&DensityMatrix::maximally_mixed(1)) < 1e-15);
    }
}

#[test]
fn noisy_run_from_custom_initial_state() {
    let mut rng = rng(16);
    let c = random_circuit(&mut rng, 2, 10, 2);
    let theta = random_theta(&mut rng, 2);
    let rho0 = random_density(&mut rng, 2, 3);
    let rho = run_noisy_from(&c, &theta, &NoiseModel::noiseless(), &rho0).unwrap();
    let u = circuit_unitary(&c, &theta);
    let oracle = &u * to_matrix(&rho0) * u.adjoint();
    assert!((to_matrix(&rho) - oracle).camax() < 1e-12);
}

fn dense_exp(g: &DMatrix<C64>, t: f64) -> DMatrix<C64> {
    (g * C64::new(0.0, -t / 2.0)).exp()
}

#[test]
fn hva_matches_matrix_exponential_oracle() {
    let n = 3;
    let dim = 1 << n;
    let zz = PauliString::parse("ZZI", 1.0).unwrap();
    let zz2 = PauliString::parse("IZZ", 1.0).unwrap();
    let sum_zz = Hamiltonian::new(n, [zz, zz2]).unwrap().to_dense().unwrap();
    let sum_x = Hamiltonian::new(
        n,
        ["XII", "IXI", "IIX"].map(|l| PauliString::parse(l, 1.0).unwrap()),
    )
    .unwrap()
    .to_dense()
    .unwrap();
    let plus = DVector::from_element(dim, C64::new((dim as f64).sqrt().recip(), 0.0));
    let c = build_hva(n, 1).unwrap();
    let mut rng = rng(17);
    for _ in 0..5 {
        let theta = random_theta(&mut rng, 2);
        let oracle = dense_exp(&sum_x, theta[1]) * dense_exp(&sum_zz, theta[0]) * &plus;
        let psi = to_vector(&run_pure(&c, &theta, &StateVector::zero(n)).unwrap());
        let overlap = (psi.adjoint() * &oracle)[(0, 0)].norm();
        assert!(overlap > 1.0 - 1e-10, "overlap {overlap}");
    }
}

#[test]
fn rzz_order_within_a_layer_is_irrelevant() {
    let n = 6;
    let mut rng = rng(18);
    let theta = random_theta(&mut rng, 2);
    let pairs = [(1, 2), (3, 4), (5, 6), (2, 3), (4, 5)];
    let build = |order: &[usize]| {
        let mut c = Circuit::new(n, 2).unwrap();
        for q in 1..=n {
            c.push(Gate::h(q)).unwrap();
        }
        for &k in order {
            c.push(Gate::rzz(pairs[k].0, pairs[k].1, 1).unwrap())
                .unwrap();
        }
        for q in 1..=n {
            c.push(Gate::rotation(GateKind::RX, q, 2).unwrap()).unwrap();
        }
        run_pure(&c, &theta, &StateVector::zero(n)).unwrap()
    };
    let reference = to_vector(&build(&[0, 1, 2, 3, 4]));
    for order in [[4, 3, 2, 1, 0], [3, 0, 4, 1, 2], [2, 4, 0, 3, 1]] {
        assert!((to_vector(&build(&order)) - &reference).camax() < 1e-12);
    }
}

#[test]
fn hea_one_layer_two_qubits_by_hand() {
    let mut rng = rng(19);
    let theta = random_theta(&mut rng, 4);
    let c = build_hea(2, 1).unwrap();
    let ry = |t| GateKind::RY.unitary(t);
    let rz = |t| GateKind::RZ.unitary(t);
    let layer = (rz(theta[1]) * ry(theta[0])).kronecker(&(rz(theta[3]) * ry(theta[2])));
    // control qubit 2 (least significant), target qubit 1
    let mut cnot21 = DMatrix::<C64>::zeros(4, 4);
    for (i, j) in [(0, 0), (1, 3), (2, 2), (3, 1)] {
        cnot21[(i, j)] = C64::new(1.0, 0.0);
    }
    let oracle = (cnot21 * layer).column(0).into_owned();
    let psi = to_vector(&run_pure(&c, &theta, &StateVector::zero(2)).unwrap());
    assert!((psi - oracle).camax() < 1e-12);
}
