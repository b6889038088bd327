//! Independent reference computations checked against the library.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use zfnmr::compiler::{compile_single_qubit, compile_uzz, CompileOptions, PiRealization};
use zfnmr::design::{product_fidelity, TargetSet};
use zfnmr::linalg::{expm_hermitian, frobenius, gate_fidelity, rotation, spin_operator};
use zfnmr::simulator::{simulate, PhysicsConfig};
use zfnmr::spin::{build_dc_hamiltonian, build_zero_field_hamiltonian};
use zfnmr::{Axis, ComplexMatrix, FieldVector, Spin, SpinSystem};

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// `e^{A}` by scaling and squaring around a 30-term Taylor series.
fn taylor_expm(a: &ComplexMatrix) -> ComplexMatrix {
    let norm = frobenius(a);
    let s = if norm > 0.5 { (norm / 0.5).log2().ceil() as i32 } else { 0 };
    let scaled = a * c(0.5f64.powi(s), 0.0);
    let dim = a.nrows();
    let mut term = DMatrix::<C64>::identity(dim, dim);
    let mut sum = term.clone();
    for k in 1..30 {
        term = &term * &scaled * c(1.0 / k as f64, 0.0);
        sum += &term;
    }
    for _ in 0..s {
        sum = &sum * &sum;
    }
    sum
}

fn propagator_oracle(h: &ComplexMatrix, t: f64) -> ComplexMatrix {
    taylor_expm(&(h * c(0.0, -t)))
}

/// `I_α` on spin `k` built from explicit 2×2 blocks and Kronecker products.
fn spin_operator_oracle(k: usize, axis: Axis, n: usize) -> ComplexMatrix {
    let half = match axis {
        Axis::X => DMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.5, 0.0), c(0.5, 0.0), c(0.0, 0.0)]),
        Axis::Y => DMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.0, -0.5), c(0.0, 0.5), c(0.0, 0.0)]),
        Axis::Z => DMatrix::from_row_slice(2, 2, &[c(0.5, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-0.5, 0.0)]),
    };
    let mut out = DMatrix::<C64>::identity(1, 1);
    for s in 1..=n {
        let factor = if s == k { half.clone() } else { DMatrix::identity(2, 2) };
        out = out.kronecker(&factor);
    }
    out
}

fn toy(gammas: &[f64], couplings: &[(usize, usize, f64)]) -> SpinSystem {
    let spins = gammas.iter().enumerate().map(|(k, &g)| Spin { name: format!("s{}", k + 1), gamma: g }).collect();
    SpinSystem::new(spins, couplings).unwrap()
}

#[test]
fn spin_operators_match_kronecker_oracle() {
    for n in 1..=4 {
        for k in 1..=n {
            for axis in Axis::ALL {
                let got = spin_operator(k, axis, n).unwrap();
                assert!(frobenius(&(got - spin_operator_oracle(k, axis, n))) < 1e-15);
            }
        }
    }
}

#[test]
fn zero_field_hamiltonian_matches_operator_sum() {
    let sys = SpinSystem::chf();
    let n = sys.len();
    let mut want = ComplexMatrix::zeros(8, 8);
    for (i, j, jz) in sys.coupling_list() {
        for axis in Axis::ALL {
            want += spin_operator_oracle(i, axis, n) * spin_operator_oracle(j, axis, n) * c(2.0 * PI * jz, 0.0);
        }
    }
    assert!(frobenius(&(build_zero_field_hamiltonian(&sys) - want)) < 1e-9);
}

#[test]
fn propagators_match_taylor_oracle() {
    let sys = SpinSystem::chf();
    let cases = [
        (build_zero_field_hamiltonian(&sys), 3.7e-3),
        (build_dc_hamiltonian(&sys, FieldVector::new(2e-4, -5e-4, 9e-4).unwrap()), 4.1e-5),
        (build_dc_hamiltonian(&sys, FieldVector::z(9e-4)) + build_zero_field_hamiltonian(&sys), 1.2e-4),
    ];
    for (h, t) in cases {
        let got = expm_hermitian(&h, t).unwrap();
        let want = propagator_oracle(&h, t);
        assert!(frobenius(&(got.matrix() - &want)) < 1e-10, "t={t}");
    }
}

#[test]
fn rotation_matches_taylor_oracle() {
    let n = 3;
    let axis = [0.48, -0.6, 0.64];
    let theta = 2.3;
    let mut gen = ComplexMatrix::zeros(8, 8);
    for k in [1, 3] {
        for (a, w) in Axis::ALL.iter().zip(axis) {
            gen += spin_operator_oracle(k, *a, n) * c(w, 0.0);
        }
    }
    let want = propagator_oracle(&gen, theta);
    let got = rotation(&[1, 3], axis, theta, n).unwrap();
    assert!(frobenius(&(got.matrix() - want)) < 1e-12);
}

#[test]
fn echo_on_exact_ratio_toy_is_exact() {
    // gamma_2 = 4 gamma_1, pi/3 about x on spin 1
    let sys = toy(&[5e7, 2e8], &[(1, 2, 80.0)]);
    let seq = compile_single_qubit(&sys, 1, [1.0, 0.0, 0.0], PI / 3.0, 9e-4, &PiRealization::Ideal).unwrap();
    let u = simulate(&sys, &seq, &PhysicsConfig::default()).unwrap();
    let want = propagator_oracle(&spin_operator_oracle(1, Axis::X, 2), PI / 3.0);
    let f = gate_fidelity(&zfnmr::Unitary::new(want).unwrap(), &u).unwrap();
    assert!((1.0 - f).abs() < 1e-10, "F={f}");
}

#[test]
fn echo_exact_for_any_axis_and_spin() {
    let sys = SpinSystem::chf();
    for spin in 1..=3 {
        for axis in [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [0.6, 0.0, -0.8], [0.36, 0.48, 0.8]] {
            for theta in [-2.0, PI / 2.0, 3.9] {
                let seq = compile_single_qubit(&sys, spin, axis, theta, 9e-4, &PiRealization::Ideal).unwrap();
                let u = simulate(&sys, &seq, &PhysicsConfig::default()).unwrap();
                let f = gate_fidelity(&seq.intended_unitary(&sys).unwrap(), &u).unwrap();
                assert!((1.0 - f).abs() < 1e-10, "spin {spin} axis {axis:?} theta {theta}: F={f}");
            }
        }
    }
}

#[test]
fn uzz_matches_exponential_of_zz() {
    for jz in [160.7, -194.4] {
        let sys = toy(&[6.7e7, 2.7e8], &[(1, 2, jz)]);
        let theta = PI / 2.0;
        let seq = compile_uzz(&sys, 1, 2, theta, &CompileOptions::ideal()).unwrap();
        let u = simulate(&sys, &seq, &PhysicsConfig::default()).unwrap();
        let zz = spin_operator_oracle(1, Axis::Z, 2) * spin_operator_oracle(2, Axis::Z, 2);
        let want = propagator_oracle(&(zz * c(2.0 * jz.signum() * theta, 0.0)), 1.0);
        let f = gate_fidelity(&zfnmr::Unitary::new(want).unwrap(), &u).unwrap();
        assert!((1.0 - f).abs() < 1e-12, "J={jz}: F={f}");
    }
}

#[test]
fn cnot_factorization_matches_explicit_matrix() {
    // sqrt(i) Uz^c(pi/2) Uz^t(-pi/2) Ux^t(pi/2) Uzz(pi/2) Uy^t(pi/2)
    let n = 2;
    let r = |spin, axis: Axis, angle| propagator_oracle(&spin_operator_oracle(spin, axis, n), angle);
    let zz = spin_operator_oracle(1, Axis::Z, n) * spin_operator_oracle(2, Axis::Z, n);
    let uzz = propagator_oracle(&(zz * c(PI, 0.0)), 1.0);
    let u = r(1, Axis::Z, PI / 2.0) * r(2, Axis::Z, -PI / 2.0) * r(2, Axis::X, PI / 2.0) * uzz * r(2, Axis::Y, PI / 2.0);
    let u = u * C64::from_polar(1.0, PI / 4.0);
    let one = c(1.0, 0.0);
    let zero = c(0.0, 0.0);
    let cnot = DMatrix::from_row_slice(
        4,
        4,
        &[one, zero, zero, zero, zero, one, zero, zero, zero, zero, zero, one, zero, zero, one, zero],
    );
    assert!(frobenius(&(u - cnot)) < 1e-12);
}

#[test]
fn product_formula_matches_oracle_propagation() {
    let sys = SpinSystem::chf().uncoupled();
    let (b, t) = (7.3e-4, 1.37e-4);
    let h = build_dc_hamiltonian(&sys, FieldVector::z(b));
    let realized = zfnmr::Unitary::new(propagator_oracle(&h, t)).unwrap();
    for targets in [vec![1], vec![3], vec![1, 2]] {
        let set = TargetSet::new(targets.iter().copied(), 3).unwrap();
        let ideal = rotation(&targets, [0.0, 0.0, 1.0], PI, 3).unwrap();
        let f = gate_fidelity(&ideal, &realized).unwrap();
        assert!((f - product_fidelity(&sys, &set, b, t)).abs() < 1e-12);
    }
}
