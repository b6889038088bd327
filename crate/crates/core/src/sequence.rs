//! Piecewise-constant control sequences.

use std::collections::BTreeMap;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{check_spin_index, expm_hermitian, rotation, spin_operator, Axis, ComplexMatrix, Unitary};
use crate::spin::{FieldVector, SpinSystem};

const AXIS_NORM_TOL: f64 = 1e-12;

/// One constant segment of a sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PulseEvent {
    /// Constant field applied to every spin.
    DcPulse { field: FieldVector, duration: f64 },
    /// Free evolution under the couplings.
    Delay { duration: f64 },
    /// Exact rotation `Π_k e^{−iθ n·I_k}` standing in for a gate that is
    /// assumed perfect. Contributes no duration.
    IdealGate { spins: Vec<usize>, axis: [f64; 3], angle: f64 },
}

impl PulseEvent {
    pub fn ideal(spins: &[usize], axis: Axis, angle: f64) -> Self {
        PulseEvent::IdealGate { spins: spins.to_vec(), axis: axis.unit(), angle }
    }

    pub fn duration(&self) -> f64 {
        match self {
            PulseEvent::DcPulse { duration, .. } | PulseEvent::Delay { duration } => *duration,
            PulseEvent::IdealGate { .. } => 0.0,
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        match self {
            PulseEvent::DcPulse { field, duration } => {
                check_duration(*duration)?;
                if !field.is_finite() {
                    return Err(Error::InvalidField("non-finite field component".into()));
                }
            }
            PulseEvent::Delay { duration } => check_duration(*duration)?,
            PulseEvent::IdealGate { spins, axis, angle } => {
                if spins.is_empty() {
                    return Err(Error::InvalidTargetSet("ideal gate acts on no spins".into()));
                }
                for &s in spins {
                    check_spin_index(s, n)?;
                }
                let norm = axis.iter().map(|a| a * a).sum::<f64>().sqrt();
                if norm.is_nan() || (norm - 1.0).abs() > AXIS_NORM_TOL {
                    return Err(Error::InvalidAxis(format!("axis norm {norm} is not 1")));
                }
                if !angle.is_finite() {
                    return Err(Error::InvalidAngle(*angle, "not finite".into()));
                }
            }
        }
        Ok(())
    }

    /// Negated field or angle: the exact inverse for pulses and gates.
    pub fn inverted(&self) -> Self {
        match self {
            PulseEvent::DcPulse { field, duration } => PulseEvent::DcPulse { field: -*field, duration: *duration },
            PulseEvent::Delay { duration } => PulseEvent::Delay { duration: *duration },
            PulseEvent::IdealGate { spins, axis, angle } => {
                PulseEvent::IdealGate { spins: spins.clone(), axis: *axis, angle: -angle }
            }
        }
    }
}

fn check_duration(d: f64) -> Result<()> {
    if !(d.is_finite() && d >= 0.0) {
        return Err(Error::InvalidDuration(d));
    }
    Ok(())
}

/// What a sequence is meant to implement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "gate", rename_all = "snake_case")]
pub enum GateSpec {
    Identity,
    /// `e^{−iθ n·I_spin}`.
    Rotation { spin: usize, axis: [f64; 3], angle: f64 },
    /// Controlled-NOT with the given control and target spins.
    Cnot { control: usize, target: usize },
    /// Product of CNOTs on disjoint `(control, target)` pairs.
    SimultaneousCnot { pairs: Vec<(usize, usize)> },
    /// `e^{−i·2θ·I_iz I_jz}`, the unitary of a refocused coupling evolution.
    Zz { i: usize, j: usize, angle: f64 },
    /// `e^{−i Σ_pairs H₀^{(i,j)} T}`, the zero-order target of a decoupling block.
    PairEvolution { pairs: Vec<(usize, usize)>, duration: f64 },
}

impl GateSpec {
    pub fn unitary(&self, sys: &SpinSystem) -> Result<Unitary> {
        let n = sys.len();
        let dim = sys.dim();
        match self {
            GateSpec::Identity => Ok(Unitary::identity(dim)),
            GateSpec::Rotation { spin, axis, angle } => rotation(&[*spin], *axis, *angle, n),
            GateSpec::Cnot { control, target } => cnot_unitary(&[(*control, *target)], n),
            GateSpec::SimultaneousCnot { pairs } => cnot_unitary(pairs, n),
            GateSpec::Zz { i, j, angle } => {
                check_spin_index(*i, n)?;
                check_spin_index(*j, n)?;
                let zz = spin_operator(*i, Axis::Z, n)? * spin_operator(*j, Axis::Z, n)?;
                expm_hermitian(&(zz * C64::new(2.0 * angle, 0.0)), 1.0)
            }
            GateSpec::PairEvolution { pairs, duration } => {
                let mut h = ComplexMatrix::zeros(dim, dim);
                for &(i, j) in pairs {
                    h += sys.pair_hamiltonian(i, j)?;
                }
                expm_hermitian(&h, *duration)
            }
        }
    }
}

/// Permutation matrix of CNOTs on disjoint `(control, target)` pairs.
pub fn cnot_unitary(pairs: &[(usize, usize)], n: usize) -> Result<Unitary> {
    let dim = 1usize << n;
    let mut used = vec![false; n + 1];
    for &(c, t) in pairs {
        check_spin_index(c, n)?;
        check_spin_index(t, n)?;
        for s in [c, t] {
            if used[s] {
                return Err(Error::OverlappingPairs(s));
            }
            used[s] = true;
        }
    }
    let bit = |s: usize| n - s;
    let mut m = ComplexMatrix::zeros(dim, dim);
    for col in 0..dim {
        let mut row = col;
        for &(c, t) in pairs {
            if (col >> bit(c)) & 1 == 1 {
                row ^= 1 << bit(t);
            }
        }
        m[(row, col)] = C64::new(1.0, 0.0);
    }
    Ok(Unitary::from_trusted(m))
}

/// Ordered events plus the gate they are meant to realize.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sequence {
    pub events: Vec<PulseEvent>,
    pub target: GateSpec,
    /// Compilation provenance: mode, assumptions, timing parameters, phases.
    pub metadata: BTreeMap<String, String>,
}

impl Sequence {
    pub fn new(events: Vec<PulseEvent>, target: GateSpec) -> Self {
        Sequence { events, target, metadata: BTreeMap::new() }
    }

    pub fn empty() -> Self {
        Sequence::new(Vec::new(), GateSpec::Identity)
    }

    pub fn with_meta(mut self, key: &str, value: impl ToString) -> Self {
        self.metadata.insert(key.to_string(), value.to_string());
        self
    }

    pub fn total_duration(&self) -> f64 {
        self.events.iter().map(PulseEvent::duration).sum()
    }

    pub fn delay_time(&self) -> f64 {
        self.events
            .iter()
            .filter_map(|e| match e {
                PulseEvent::Delay { duration } => Some(*duration),
                _ => None,
            })
            .sum()
    }

    pub fn delay_count(&self) -> usize {
        self.events.iter().filter(|e| matches!(e, PulseEvent::Delay { .. })).count()
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn has_ideal_gates(&self) -> bool {
        self.events.iter().any(|e| matches!(e, PulseEvent::IdealGate { .. }))
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        self.events.iter().try_for_each(|e| e.validate(n))
    }

    pub fn intended_unitary(&self, sys: &SpinSystem) -> Result<Unitary> {
        self.target.unitary(sys)
    }

    /// Reverse order with every field and angle negated. For sequences
    /// without delays this simulates to the inverse unitary.
    pub fn reversed(&self) -> Sequence {
        let events = self.events.iter().rev().map(PulseEvent::inverted).collect();
        let mut out = Sequence::new(events, GateSpec::Identity);
        out.metadata = self.metadata.clone();
        out.metadata.insert("reversed".into(), "true".into());
        out
    }

    pub(crate) fn extend(&mut self, events: impl IntoIterator<Item = PulseEvent>) {
        self.events.extend(events);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cnot_matrix_literal() {
        let u = cnot_unitary(&[(1, 2)], 2).unwrap();
        let one = C64::new(1.0, 0.0);
        let m = u.matrix();
        assert_eq!(m[(0, 0)], one);
        assert_eq!(m[(1, 1)], one);
        assert_eq!(m[(2, 3)], one);
        assert_eq!(m[(3, 2)], one);
        assert_eq!(m[(2, 2)], C64::new(0.0, 0.0));
    }

    #[test]
    fn cnot_reversed_roles() {
        // control 2, target 1: |01> <-> |11>
        let m = cnot_unitary(&[(2, 1)], 2).unwrap().into_matrix();
        assert_eq!(m[(3, 1)], C64::new(1.0, 0.0));
        assert_eq!(m[(1, 3)], C64::new(1.0, 0.0));
        assert_eq!(m[(0, 0)], C64::new(1.0, 0.0));
        assert_eq!(m[(2, 2)], C64::new(1.0, 0.0));
    }

    #[test]
    fn cnot_overlap_rejected() {
        assert!(matches!(cnot_unitary(&[(1, 2), (2, 3)], 3), Err(Error::OverlappingPairs(2))));
    }

    #[test]
    fn durations_sum_and_ideal_gates_are_free() {
        let seq = Sequence::new(
            vec![
                PulseEvent::Delay { duration: 1e-3 },
                PulseEvent::ideal(&[1], Axis::X, 1.0),
                PulseEvent::DcPulse { field: FieldVector::z(1e-4), duration: 2e-3 },
            ],
            GateSpec::Identity,
        );
        assert!((seq.total_duration() - 3e-3).abs() < 1e-18);
        assert_eq!(seq.delay_count(), 1);
        assert!(seq.has_ideal_gates());
    }

    #[test]
    fn validation_catches_bad_events() {
        assert!(PulseEvent::Delay { duration: -1.0 }.validate(2).is_err());
        let bad_axis = PulseEvent::IdealGate { spins: vec![1], axis: [1.0, 1.0, 0.0], angle: 1.0 };
        assert!(matches!(bad_axis.validate(2), Err(Error::InvalidAxis(_))));
        let bad_spin = PulseEvent::ideal(&[3], Axis::Z, 1.0);
        assert!(bad_spin.validate(2).is_err());
        let bad_field = PulseEvent::DcPulse { field: FieldVector { x: f64::NAN, y: 0.0, z: 0.0 }, duration: 1.0 };
        assert!(bad_field.validate(2).is_err());
    }
}
