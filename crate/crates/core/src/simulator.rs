//! Exact propagation of piecewise-constant sequences.

use std::collections::HashMap;
use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::compiler::CompileOptions;
use crate::error::{Error, Result};
use crate::linalg::{frobenius, gate_fidelity, rotation, Axis, ComplexMatrix, HermitianEigen, Unitary};
use crate::sequence::{PulseEvent, Sequence};
use crate::spin::{build_dc_hamiltonian, build_zero_field_hamiltonian, FieldVector, SpinSystem};

/// Physics switches for [`simulate`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhysicsConfig {
    /// Add the coupling Hamiltonian to every DC pulse.
    pub include_j_during_pulses: bool,
    /// Apply `ideal_gate` events as exact unitaries; otherwise they are an error.
    pub honor_ideal_gates: bool,
}

impl Default for PhysicsConfig {
    fn default() -> Self {
        PhysicsConfig { include_j_during_pulses: false, honor_ideal_gates: true }
    }
}

/// Bit pattern of a segment Hamiltonian: `None` for free evolution.
type SegmentKey = Option<[u64; 3]>;

fn field_key(f: &FieldVector) -> [u64; 3] {
    f.components().map(f64::to_bits)
}

/// Per-call memo of eigendecompositions and propagators.
struct Propagators<'a> {
    sys: &'a SpinSystem,
    cfg: PhysicsConfig,
    coupling: ComplexMatrix,
    eigen: HashMap<SegmentKey, HermitianEigen>,
    steps: HashMap<(SegmentKey, u64), Unitary>,
}

impl<'a> Propagators<'a> {
    fn new(sys: &'a SpinSystem, cfg: PhysicsConfig) -> Self {
        Propagators {
            sys,
            cfg,
            coupling: build_zero_field_hamiltonian(sys),
            eigen: HashMap::new(),
            steps: HashMap::new(),
        }
    }

    fn hamiltonian(&self, key: &SegmentKey, field: Option<FieldVector>) -> ComplexMatrix {
        match (key, field) {
            (None, _) | (_, None) => self.coupling.clone(),
            (Some(_), Some(f)) => {
                let h = build_dc_hamiltonian(self.sys, f);
                if self.cfg.include_j_during_pulses {
                    h + &self.coupling
                } else {
                    h
                }
            }
        }
    }

    fn step(&mut self, field: Option<FieldVector>, duration: f64) -> Result<&Unitary> {
        let key: SegmentKey = field.as_ref().map(field_key);
        let step_key = (key, duration.to_bits());
        if !self.steps.contains_key(&step_key) {
            if !self.eigen.contains_key(&key) {
                let h = self.hamiltonian(&key, field);
                self.eigen.insert(key, HermitianEigen::new(&h)?);
            }
            let u = self.eigen[&key].propagator(duration);
            self.steps.insert(step_key, u);
        }
        Ok(&self.steps[&step_key])
    }
}

/// Ordered product of segment propagators (first event applied first).
pub fn simulate(sys: &SpinSystem, seq: &Sequence, cfg: &PhysicsConfig) -> Result<Unitary> {
    seq.validate(sys.len())?;
    let n = sys.len();
    let mut props = Propagators::new(sys, *cfg);
    let mut acc = ComplexMatrix::identity(sys.dim(), sys.dim());
    for event in &seq.events {
        match event {
            PulseEvent::DcPulse { field, duration } => {
                let u = props.step(Some(*field), *duration)?;
                acc = u.matrix() * acc;
            }
            PulseEvent::Delay { duration } => {
                let u = props.step(None, *duration)?;
                acc = u.matrix() * acc;
            }
            PulseEvent::IdealGate { spins, axis, angle } => {
                if !cfg.honor_ideal_gates {
                    return Err(Error::IdealGateNotHonored);
                }
                let u = rotation(spins, *axis, *angle, n)?;
                acc = u.matrix() * acc;
            }
        }
    }
    Ok(Unitary::from_trusted(acc))
}

/// Realized vs intended unitary for one simulation.
#[derive(Debug, Clone)]
pub struct FidelityReport {
    pub fidelity: f64,
    pub realized: Unitary,
    pub ideal: Unitary,
    pub config: PhysicsConfig,
    pub total_duration: f64,
}

pub fn evaluate_gate(sys: &SpinSystem, seq: &Sequence, ideal: &Unitary, cfg: &PhysicsConfig) -> Result<FidelityReport> {
    let realized = simulate(sys, seq, cfg)?;
    let fidelity = gate_fidelity(ideal, &realized)?;
    Ok(FidelityReport { fidelity, realized, ideal: ideal.clone(), config: *cfg, total_duration: seq.total_duration() })
}

/// `Π_k e^{−iθ_k I_kα}` over all spins.
fn collective_rotation(angles: &[f64], axis: Axis) -> Result<Unitary> {
    let n = angles.len();
    let mut u = Unitary::identity(1 << n);
    for (k, &theta) in angles.iter().enumerate() {
        if theta != 0.0 {
            u = rotation(&[k + 1], axis.unit(), theta, n)?.compose(&u);
        }
    }
    Ok(u)
}

/// `H₀ + Σ_{α∈{x,y,z}} U_α(θ) H₀ U_α(θ)†` with `U_α(θ) = Π_k e^{−iθ_k I_kα}`:
/// four times the zero-order average Hamiltonian of the toggling cycle.
pub fn average_hamiltonian_check(sys: &SpinSystem, angles: &[f64]) -> Result<ComplexMatrix> {
    if angles.len() != sys.len() {
        return Err(Error::DimensionMismatch { expected: sys.len(), found: angles.len() });
    }
    if angles.iter().any(|a| !a.is_finite()) {
        return Err(Error::Invalid("rotation angles must be finite".into()));
    }
    let h0 = build_zero_field_hamiltonian(sys);
    let mut sum = h0.clone();
    for axis in Axis::ALL {
        let u = collective_rotation(angles, axis)?;
        sum += u.matrix() * &h0 * u.matrix().adjoint();
    }
    Ok(sum)
}

/// Zero-order fate of one coupling under a π-multiple angle assignment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CouplingSwitch {
    /// `θ_i − θ_j` is an even multiple of π: the coupling survives as `4H₀^{(i,j)}`.
    On,
    /// Odd multiple of π: the coupling averages to zero.
    Off,
}

/// Classifies `θ_i − θ_j`; `None` when it is not an integer multiple of π.
pub fn coupling_switch(theta_i: f64, theta_j: f64) -> Option<CouplingSwitch> {
    let r = (theta_i - theta_j) / PI;
    let k = r.round();
    if (r - k).abs() > 1e-9 {
        return None;
    }
    Some(if (k as i64).rem_euclid(2) == 0 { CouplingSwitch::On } else { CouplingSwitch::Off })
}

/// `Σ_{on pairs} 4H₀^{(i,j)}`, the closed form the summed conjugation must equal.
pub fn predicted_average_hamiltonian(sys: &SpinSystem, angles: &[f64]) -> Result<ComplexMatrix> {
    if angles.len() != sys.len() {
        return Err(Error::DimensionMismatch { expected: sys.len(), found: angles.len() });
    }
    let mut out = ComplexMatrix::zeros(sys.dim(), sys.dim());
    for (i, j, _) in sys.coupling_list() {
        match coupling_switch(angles[i - 1], angles[j - 1]) {
            Some(CouplingSwitch::On) => out += sys.pair_hamiltonian(i, j)? * C64::new(4.0, 0.0),
            Some(CouplingSwitch::Off) => {}
            None => {
                return Err(Error::InvalidAngle(
                    angles[i - 1] - angles[j - 1],
                    format!("difference for pair ({i}, {j}) is not a multiple of π"),
                ))
            }
        }
    }
    Ok(out)
}

/// Frobenius distance between the summed conjugation and its closed form.
pub fn dichotomy_residual(sys: &SpinSystem, angles: &[f64]) -> Result<f64> {
    let lhs = average_hamiltonian_check(sys, angles)?;
    let rhs = predicted_average_hamiltonian(sys, angles)?;
    Ok(frobenius(&(lhs - rhs)))
}

/// Fidelity of the level-1 cycle, run `m` times with step `τ₀/m`, against
/// `e^{−i·4H₀^{(keep)}·τ₀}`. One entry per requested `m`.
pub fn trotter_convergence_probe(
    sys: &SpinSystem,
    keep: (usize, usize),
    tau0: f64,
    subdivisions: &[usize],
) -> Result<Vec<(usize, f64)>> {
    let (i, j) = keep;
    let target = crate::sequence::GateSpec::PairEvolution { pairs: vec![keep], duration: 4.0 * tau0 }.unitary(sys)?;
    let opts = CompileOptions::ideal();
    let cfg = PhysicsConfig::default();
    subdivisions
        .iter()
        .map(|&m| {
            if m == 0 {
                return Err(Error::Invalid("subdivision count must be at least 1".into()));
            }
            let cycle = level_one_cycle(sys, (i, j), tau0 / m as f64, &opts)?;
            let mut seq = Sequence::empty();
            for _ in 0..m {
                seq.events.extend(cycle.iter().cloned());
            }
            let u = simulate(sys, &seq, &cfg)?;
            Ok((m, gate_fidelity(&target, &u)?))
        })
        .collect()
}

fn level_one_cycle(sys: &SpinSystem, keep: (usize, usize), tau: f64, opts: &CompileOptions) -> Result<Vec<PulseEvent>> {
    let pair = [keep.0, keep.1];
    let d = PulseEvent::Delay { duration: tau };
    if sys.coupling(keep.0, keep.1) == 0.0 {
        return Err(Error::ZeroCoupling { i: keep.0, j: keep.1 });
    }
    let _ = opts;
    Ok(vec![
        PulseEvent::ideal(&pair, Axis::X, -PI),
        d.clone(),
        PulseEvent::ideal(&pair, Axis::Z, -PI),
        d.clone(),
        PulseEvent::ideal(&pair, Axis::X, PI),
        d.clone(),
        PulseEvent::ideal(&pair, Axis::Z, PI),
        d,
    ])
}
