//! Gate-to-sequence compilation.
//!
//! Single-spin rotations are built from a DC-pulse echo: the field is split
//! into two halves and the spectators are flipped by π in between, so their
//! precession cancels while the target's adds up. Two-spin entanglers use a
//! refocused free evolution under the kept coupling; in networks of more
//! than two spins every other coupling is averaged away by a concatenated
//! cycle `[P]·Z·[P]·X·[P]·Z†·[P]·X†` of π rotations.
//!
//! All events are emitted in time order (first applied first).

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::design::{
    shortest_adequate_pi_duration, DesignSolution, TargetSet, DEFAULT_PI_MAX_DURATION, DEFAULT_PI_THRESHOLD,
};
use crate::error::{Error, Result};
use crate::linalg::{check_spin_index, Axis};
use crate::sequence::{GateSpec, PulseEvent, Sequence};
use crate::spin::{FieldVector, SpinSystem};

/// Default DC pulse amplitude: 9 G.
pub const DEFAULT_FIELD: f64 = 9e-4;

/// How the single-spin factors of composite gates are realized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum CompileMode {
    /// Factors stay as exact `ideal_gate` placeholders.
    #[default]
    Ideal,
    /// Factors are expanded into DC-pulse echoes with designed spectator π pulses.
    Compiled,
}

impl std::str::FromStr for CompileMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ideal" => Ok(CompileMode::Ideal),
            "compiled" => Ok(CompileMode::Compiled),
            other => Err(Error::Invalid(format!("unknown compile mode '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompileOptions {
    pub mode: CompileMode,
    /// DC pulse amplitude in tesla.
    pub field: f64,
    /// Minimum product fidelity accepted for a designed π pulse.
    pub pi_threshold: f64,
    /// Longest designed π pulse, seconds.
    pub pi_max_duration: f64,
    /// Also realize the refocusing π pulses (decoupling cycle, zz echo) as
    /// designed DC pulses in compiled mode.
    pub expand_refocusing: bool,
}

impl Default for CompileOptions {
    fn default() -> Self {
        CompileOptions {
            mode: CompileMode::Ideal,
            field: DEFAULT_FIELD,
            pi_threshold: DEFAULT_PI_THRESHOLD,
            pi_max_duration: DEFAULT_PI_MAX_DURATION,
            expand_refocusing: false,
        }
    }
}

impl CompileOptions {
    pub fn ideal() -> Self {
        CompileOptions::default()
    }

    pub fn compiled() -> Self {
        CompileOptions { mode: CompileMode::Compiled, ..CompileOptions::default() }
    }

    fn validate(&self) -> Result<()> {
        if !(self.field.is_finite() && self.field > 0.0) {
            return Err(Error::InvalidField(format!("pulse amplitude must be positive, got {}", self.field)));
        }
        Ok(())
    }

    /// Designed selective π pulse on `spins` at this amplitude.
    pub fn design_pi(&self, sys: &SpinSystem, spins: &[usize]) -> Result<DesignSolution> {
        let targets = TargetSet::new(spins.iter().copied(), sys.len())?;
        shortest_adequate_pi_duration(sys, &targets, self.field, self.pi_threshold, self.pi_max_duration)
    }
}

/// How the spectator π rotations of an echo are realized.
#[derive(Debug, Clone, PartialEq)]
pub enum PiRealization {
    Ideal,
    Designed(DesignSolution),
}

fn normalize_axis(axis: [f64; 3]) -> Result<[f64; 3]> {
    let norm = axis.iter().map(|a| a * a).sum::<f64>().sqrt();
    if !(norm.is_finite() && norm > 1e-12) {
        return Err(Error::InvalidAxis(format!("{axis:?} has zero norm")));
    }
    Ok([axis[0] / norm, axis[1] / norm, axis[2] / norm])
}

/// Axis orthogonal to `n`: `z` when `n ⊥ z`, else the in-plane orthogonal
/// `(−n_y, n_x, 0)`, else `x`.
pub fn perpendicular_axis(n: [f64; 3]) -> [f64; 3] {
    if n[2].abs() <= 1e-12 {
        return [0.0, 0.0, 1.0];
    }
    let (a, b) = (-n[1], n[0]);
    let norm = (a * a + b * b).sqrt();
    if norm > 1e-12 {
        [a / norm, b / norm, 0.0]
    } else {
        [1.0, 0.0, 0.0]
    }
}

fn fmt_axis(a: [f64; 3]) -> String {
    format!("({}, {}, {})", a[0], a[1], a[2])
}

/// Echo construction of `e^{−iθ n·I_spin}`:
/// half pulse, spectator π†, half pulse, spectator π.
///
/// The pulse field is `−sgn(θγ)·B·n` for a duration `|θ|/(|γ|B)`, split in
/// two. Couplings are neglected during the pulses.
pub fn compile_single_qubit(
    sys: &SpinSystem,
    spin: usize,
    axis: [f64; 3],
    angle: f64,
    field: f64,
    spectator_pi: &PiRealization,
) -> Result<Sequence> {
    let n = sys.len();
    check_spin_index(spin, n)?;
    let axis = normalize_axis(axis)?;
    if !angle.is_finite() || angle.abs() > 4.0 * PI {
        return Err(Error::InvalidAngle(angle, "must lie in [-4π, 4π]".into()));
    }
    if !(field.is_finite() && field > 0.0) {
        return Err(Error::InvalidField(format!("pulse amplitude must be positive, got {field}")));
    }
    if angle == 0.0 {
        return Ok(Sequence::empty().with_meta("construction", "identity"));
    }
    let gamma = sys.gamma(spin);
    let duration = angle.abs() / (gamma.abs() * field);
    let sign = (angle * gamma).signum();
    let pulse = FieldVector::along(axis, -sign * field);
    let target = GateSpec::Rotation { spin, axis, angle };
    let spectators: Vec<usize> = (1..=n).filter(|&k| k != spin).collect();

    if spectators.is_empty() {
        return Ok(Sequence::new(vec![PulseEvent::DcPulse { field: pulse, duration }], target)
            .with_meta("construction", "single dc pulse")
            .with_meta("pulse_duration_s", duration));
    }

    let perp = perpendicular_axis(axis);
    let (flip, unflip) = match spectator_pi {
        PiRealization::Ideal => (
            PulseEvent::IdealGate { spins: spectators.clone(), axis: perp, angle: PI },
            PulseEvent::IdealGate { spins: spectators.clone(), axis: perp, angle: -PI },
        ),
        PiRealization::Designed(sol) => {
            let f = FieldVector::along(perp, sol.magnitude());
            (
                PulseEvent::DcPulse { field: f, duration: sol.duration },
                PulseEvent::DcPulse { field: -f, duration: sol.duration },
            )
        }
    };
    let half = PulseEvent::DcPulse { field: pulse, duration: duration / 2.0 };
    let mut seq = Sequence::new(vec![half.clone(), unflip, half, flip], target)
        .with_meta("construction", "dc echo")
        .with_meta("assumption", "couplings neglected during dc pulses")
        .with_meta("half_pulse_s", duration / 2.0)
        .with_meta("spectator_axis", fmt_axis(perp));
    if let PiRealization::Designed(sol) = spectator_pi {
        seq = seq
            .with_meta("spectator_pi_duration_s", sol.duration)
            .with_meta("spectator_pi_fidelity", sol.predicted_fidelity);
    }
    Ok(seq)
}

/// Single-spin rotation realized per `opts.mode`.
pub fn single_qubit_events(
    sys: &SpinSystem,
    spin: usize,
    axis: Axis,
    angle: f64,
    opts: &CompileOptions,
) -> Result<Vec<PulseEvent>> {
    match opts.mode {
        CompileMode::Ideal => {
            check_spin_index(spin, sys.len())?;
            Ok(vec![PulseEvent::ideal(&[spin], axis, angle)])
        }
        CompileMode::Compiled => {
            let spectators: Vec<usize> = (1..=sys.len()).filter(|&k| k != spin).collect();
            let pi = if spectators.is_empty() {
                PiRealization::Ideal
            } else {
                PiRealization::Designed(opts.design_pi(sys, &spectators)?)
            };
            Ok(compile_single_qubit(sys, spin, axis.unit(), angle, opts.field, &pi)?.events)
        }
    }
}

/// Simultaneous rotation of several spins, one factor per spin when compiled.
fn layer_events(sys: &SpinSystem, spins: &[usize], axis: Axis, angle: f64, opts: &CompileOptions) -> Result<Vec<PulseEvent>> {
    match opts.mode {
        CompileMode::Ideal => Ok(vec![PulseEvent::ideal(spins, axis, angle)]),
        CompileMode::Compiled => {
            let mut out = Vec::new();
            for &s in spins {
                out.extend(single_qubit_events(sys, s, axis, angle, opts)?);
            }
            Ok(out)
        }
    }
}

/// Refocusing π rotation (or its inverse) on `spins`.
fn refocusing_pi(sys: &SpinSystem, spins: &[usize], axis: Axis, inverse: bool, opts: &CompileOptions) -> Result<PulseEvent> {
    let sign = if inverse { -1.0 } else { 1.0 };
    if opts.mode == CompileMode::Compiled && opts.expand_refocusing {
        let sol = opts.design_pi(sys, spins)?;
        let f = FieldVector::along(axis.unit(), sign * sol.magnitude());
        Ok(PulseEvent::DcPulse { field: f, duration: sol.duration })
    } else {
        Ok(PulseEvent::ideal(spins, axis, sign * PI))
    }
}

/// Spin groups toggled at each concatenation level, outermost last.
///
/// Level 1 flips the first kept pair; later levels flip the remaining kept
/// pairs and then the leftover spins one by one. `n − max(2, #pairs)` levels.
pub fn decoupling_levels(n: usize, kept: &[(usize, usize)]) -> Vec<Vec<usize>> {
    let mut groups: Vec<Vec<usize>> = kept.iter().map(|&(i, j)| vec![i.min(j), i.max(j)]).collect();
    let in_pair = |s: usize| kept.iter().any(|&(i, j)| i == s || j == s);
    groups.extend((1..=n).filter(|&s| !in_pair(s)).map(|s| vec![s]));
    let levels = n.saturating_sub(kept.len().max(2));
    groups.truncate(levels);
    groups
}

/// Concatenated cycle: `P₀ = delay(τ₀)`, and level `k` is
/// `[P]·Z_k·[P]·X_k·[P]·Z_k†·[P]·X_k†` (operator order).
fn concatenated_block(
    sys: &SpinSystem,
    levels: &[Vec<usize>],
    tau0: f64,
    opts: &CompileOptions,
) -> Result<Vec<PulseEvent>> {
    let mut block = vec![PulseEvent::Delay { duration: tau0 }];
    for group in levels {
        let x = refocusing_pi(sys, group, Axis::X, false, opts)?;
        let x_inv = refocusing_pi(sys, group, Axis::X, true, opts)?;
        let z = refocusing_pi(sys, group, Axis::Z, false, opts)?;
        let z_inv = refocusing_pi(sys, group, Axis::Z, true, opts)?;
        let mut next = Vec::with_capacity(4 * block.len() + 4);
        for pulse in [x_inv, z_inv, x, z] {
            next.push(pulse);
            next.extend(block.iter().cloned());
        }
        block = next;
    }
    Ok(block)
}

fn nonzero_coupling(sys: &SpinSystem, i: usize, j: usize) -> Result<f64> {
    let n = sys.len();
    check_spin_index(i, n)?;
    check_spin_index(j, n)?;
    if i == j {
        return Err(Error::InvalidTargetSet(format!("({i}, {j}) is not a pair")));
    }
    let jz = sys.coupling(i, j);
    if jz == 0.0 {
        return Err(Error::ZeroCoupling { i, j });
    }
    Ok(jz)
}

/// Free evolution of total delay `total` keeping only the couplings in `kept`.
fn retained_evolution(sys: &SpinSystem, kept: &[(usize, usize)], total: f64, opts: &CompileOptions) -> Result<(Vec<PulseEvent>, f64, usize)> {
    let levels = decoupling_levels(sys.len(), kept);
    let tau0 = total / 4f64.powi(levels.len() as i32);
    Ok((concatenated_block(sys, &levels, tau0, opts)?, tau0, levels.len()))
}

/// Decoupling block that keeps only `H₀^{(i,j)}` at zero order.
///
/// `4^{n−2}` delays of `tau0` for `n ≥ 3`; a bare delay for two spins.
pub fn compile_decoupling(sys: &SpinSystem, keep: (usize, usize), tau0: f64, opts: &CompileOptions) -> Result<Sequence> {
    opts.validate()?;
    let (i, j) = keep;
    nonzero_coupling(sys, i, j)?;
    if !(tau0.is_finite() && tau0 > 0.0) {
        return Err(Error::InvalidDuration(tau0));
    }
    let levels = decoupling_levels(sys.len(), &[keep]);
    let events = concatenated_block(sys, &levels, tau0, opts)?;
    let scale = 4f64.powi(levels.len() as i32);
    let total = scale * tau0;
    Ok(Sequence::new(events, GateSpec::PairEvolution { pairs: vec![(i, j)], duration: total })
        .with_meta("construction", "concatenated decoupling")
        .with_meta("levels", levels.len())
        .with_meta("tau0_s", tau0)
        .with_meta("average_hamiltonian", format!("{scale} * H0({i},{j}) * tau0 (zero order)")))
}

/// Refocused zz evolution `e^{−iH t}·π_z^j·e^{−iH t}·π_z^j†` with
/// `t = θ/(2π|J_ij|)`. The realized rotation is `e^{−i·2·sgn(J)θ·I_iz I_jz}`.
pub fn compile_uzz(sys: &SpinSystem, i: usize, j: usize, angle: f64, opts: &CompileOptions) -> Result<Sequence> {
    opts.validate()?;
    let jz = nonzero_coupling(sys, i, j)?;
    if !(angle.is_finite() && angle >= 0.0) {
        return Err(Error::InvalidAngle(angle, "zz angle must be finite and non-negative".into()));
    }
    if angle == 0.0 {
        return Ok(Sequence::empty().with_meta("construction", "identity"));
    }
    let t = angle / (2.0 * PI * jz.abs());
    let (block, tau0, levels) = retained_evolution(sys, &[(i, j)], t, opts)?;
    let mut events = vec![refocusing_pi(sys, &[j], Axis::Z, true, opts)?];
    events.extend(block.iter().cloned());
    events.push(refocusing_pi(sys, &[j], Axis::Z, false, opts)?);
    events.extend(block);
    Ok(Sequence::new(events, GateSpec::Zz { i, j, angle: jz.signum() * angle })
        .with_meta("construction", "refocused zz evolution")
        .with_meta("evolution_per_half_s", t)
        .with_meta("levels", levels)
        .with_meta("tau0_s", tau0))
}

/// CNOT from `√i·U_z^c(π/2)·U_z^t(−π/2)·U_x^t(π/2)·U_zz(π/2)·U_y^t(π/2)`.
/// For `J < 0` the adjoint factorization is emitted (CNOT is self-inverse).
pub fn compile_cnot(sys: &SpinSystem, control: usize, target: usize, opts: &CompileOptions) -> Result<Sequence> {
    opts.validate()?;
    let jz = nonzero_coupling(sys, control, target)?;
    let half = PI / 2.0;
    let zz = compile_uzz(sys, control, target, half, opts)?;
    let mut seq = Sequence::new(Vec::new(), GateSpec::Cnot { control, target });
    if jz > 0.0 {
        seq.extend(single_qubit_events(sys, target, Axis::Y, half, opts)?);
        seq.extend(zz.events);
        seq.extend(single_qubit_events(sys, target, Axis::X, half, opts)?);
        seq.extend(single_qubit_events(sys, target, Axis::Z, -half, opts)?);
        seq.extend(single_qubit_events(sys, control, Axis::Z, half, opts)?);
    } else {
        seq.extend(single_qubit_events(sys, control, Axis::Z, -half, opts)?);
        seq.extend(single_qubit_events(sys, target, Axis::Z, half, opts)?);
        seq.extend(single_qubit_events(sys, target, Axis::X, -half, opts)?);
        seq.extend(zz.events);
        seq.extend(single_qubit_events(sys, target, Axis::Y, -half, opts)?);
    }
    let phase = if jz > 0.0 { "sqrt(i)" } else { "sqrt(-i)" };
    let mut seq = seq
        .with_meta("construction", if jz > 0.0 { "cnot" } else { "cnot adjoint (negative coupling)" })
        .with_meta("mode", format!("{:?}", opts.mode).to_lowercase())
        .with_meta("global_phase", phase)
        .with_meta("assumption", "couplings neglected during pulses");
    for key in ["tau0_s", "levels", "evolution_per_half_s"] {
        if let Some(v) = zz.metadata.get(key) {
            seq.metadata.insert(key.to_string(), v.clone());
        }
    }
    Ok(seq)
}

/// CNOTs on disjoint `(control, target)` pairs driven by one shared refocused
/// evolution; faster pairs are padded with an evolution that keeps only the
/// slower couplings.
pub fn compile_simultaneous_cnot(sys: &SpinSystem, pairs: &[(usize, usize)], opts: &CompileOptions) -> Result<Sequence> {
    opts.validate()?;
    if pairs.is_empty() {
        return Err(Error::InvalidTargetSet("no CNOT pairs given".into()));
    }
    let mut used = vec![false; sys.len() + 1];
    let mut couplings = Vec::with_capacity(pairs.len());
    for &(c, t) in pairs {
        let jz = nonzero_coupling(sys, c, t)?;
        for s in [c, t] {
            if used[s] {
                return Err(Error::OverlappingPairs(s));
            }
            used[s] = true;
        }
        couplings.push(jz);
    }
    if pairs.len() == 1 {
        let (c, t) = pairs[0];
        let mut seq = compile_cnot(sys, c, t, opts)?;
        seq.target = GateSpec::SimultaneousCnot { pairs: pairs.to_vec() };
        return Ok(seq);
    }
    for (&(c, t), &jz) in pairs.iter().zip(&couplings) {
        if jz < 0.0 {
            return Err(Error::NegativeCoupling { i: c, j: t, j_hz: jz });
        }
    }

    // evolution each pair needs per half: 1/(4 J)
    let mut need: Vec<(f64, (usize, usize))> = pairs.iter().zip(&couplings).map(|(&p, &jz)| (1.0 / (4.0 * jz), p)).collect();
    need.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut half_block = Vec::new();
    let mut elapsed = 0.0;
    let mut segments = Vec::new();
    for k in 0..need.len() {
        let dt = need[k].0 - elapsed;
        if dt <= 0.0 {
            continue;
        }
        let kept: Vec<(usize, usize)> = need[k..].iter().map(|&(_, p)| p).collect();
        let (events, _, _) = retained_evolution(sys, &kept, dt, opts)?;
        half_block.extend(events);
        segments.push(format!("{dt:e}"));
        elapsed = need[k].0;
    }

    let controls: Vec<usize> = pairs.iter().map(|p| p.0).collect();
    let targets: Vec<usize> = pairs.iter().map(|p| p.1).collect();
    let half = PI / 2.0;
    let mut seq = Sequence::new(Vec::new(), GateSpec::SimultaneousCnot { pairs: pairs.to_vec() });
    seq.extend(layer_events(sys, &targets, Axis::Y, half, opts)?);
    seq.extend([refocusing_pi(sys, &targets, Axis::Z, true, opts)?]);
    seq.extend(half_block.iter().cloned());
    seq.extend([refocusing_pi(sys, &targets, Axis::Z, false, opts)?]);
    seq.extend(half_block);
    seq.extend(layer_events(sys, &targets, Axis::X, half, opts)?);
    seq.extend(layer_events(sys, &targets, Axis::Z, -half, opts)?);
    seq.extend(layer_events(sys, &controls, Axis::Z, half, opts)?);
    Ok(seq
        .with_meta("construction", "simultaneous cnot")
        .with_meta("mode", format!("{:?}", opts.mode).to_lowercase())
        .with_meta("global_phase", "i^(pairs/2)")
        .with_meta("evolution_segments_s", segments.join(",")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spin::{Spin, Species};

    fn toy(gammas: &[f64], couplings: &[(usize, usize, f64)]) -> SpinSystem {
        let spins = gammas.iter().enumerate().map(|(k, &g)| Spin { name: format!("s{}", k + 1), gamma: g }).collect();
        SpinSystem::new(spins, couplings).unwrap()
    }

    #[test]
    fn zero_angle_gives_empty_sequence() {
        let seq = compile_single_qubit(&SpinSystem::chf(), 1, [0.0, 0.0, 1.0], 0.0, 9e-4, &PiRealization::Ideal).unwrap();
        assert!(seq.is_empty());
        assert_eq!(seq.target, GateSpec::Identity);
    }

    #[test]
    fn first_half_pulse_of_carbon_quarter_turn() {
        let seq = compile_single_qubit(&SpinSystem::chf(), 1, [0.0, 0.0, 1.0], PI / 2.0, 9e-4, &PiRealization::Ideal).unwrap();
        let tau1 = seq.events[0].duration();
        assert!((tau1 - PI / (4.0 * crate::spin::GAMMA_13C * 9e-4)).abs() < 1e-18);
        assert!((tau1 - 12.9e-6).abs() < 0.1e-6);
    }

    #[test]
    fn single_qubit_errors() {
        let sys = SpinSystem::chf();
        assert!(matches!(
            compile_single_qubit(&sys, 1, [0.0; 3], 1.0, 9e-4, &PiRealization::Ideal),
            Err(Error::InvalidAxis(_))
        ));
        assert!(matches!(
            compile_single_qubit(&sys, 1, [1.0, 0.0, 0.0], 13.0, 9e-4, &PiRealization::Ideal),
            Err(Error::InvalidAngle(..))
        ));
        assert!(compile_single_qubit(&sys, 4, [1.0, 0.0, 0.0], 1.0, 9e-4, &PiRealization::Ideal).is_err());
    }

    #[test]
    fn perpendicular_axis_rule() {
        assert_eq!(perpendicular_axis([1.0, 0.0, 0.0]), [0.0, 0.0, 1.0]);
        assert_eq!(perpendicular_axis([0.0, 0.0, 1.0]), [1.0, 0.0, 0.0]);
        let n = [0.6, 0.0, 0.8];
        let p = perpendicular_axis(n);
        assert!((n[0] * p[0] + n[1] * p[1] + n[2] * p[2]).abs() < 1e-15);
        assert_eq!(p[2], 0.0);
    }

    #[test]
    fn decoupling_levels_layout() {
        assert!(decoupling_levels(2, &[(1, 2)]).is_empty());
        assert_eq!(decoupling_levels(3, &[(1, 2)]), vec![vec![1, 2]]);
        assert_eq!(decoupling_levels(5, &[(2, 4)]), vec![vec![2, 4], vec![1], vec![3]]);
        assert_eq!(decoupling_levels(4, &[(1, 2), (3, 4)]), vec![vec![1, 2], vec![3, 4]]);
        assert_eq!(decoupling_levels(4, &[(1, 2)]), vec![vec![1, 2], vec![3]]);
    }

    #[test]
    fn decoupling_two_spins_is_bare_delay() {
        let seq = compile_decoupling(&SpinSystem::ch(), (1, 2), 1e-3, &CompileOptions::ideal()).unwrap();
        assert_eq!(seq.events, vec![PulseEvent::Delay { duration: 1e-3 }]);
    }

    #[test]
    fn decoupling_three_spins_first_level_cycle() {
        let sys = SpinSystem::chf();
        let tau0 = 1.0 / (16.0 * 160.7);
        let seq = compile_decoupling(&sys, (1, 2), tau0, &CompileOptions::ideal()).unwrap();
        let d = PulseEvent::Delay { duration: tau0 };
        let want = vec![
            PulseEvent::ideal(&[1, 2], Axis::X, -PI),
            d.clone(),
            PulseEvent::ideal(&[1, 2], Axis::Z, -PI),
            d.clone(),
            PulseEvent::ideal(&[1, 2], Axis::X, PI),
            d.clone(),
            PulseEvent::ideal(&[1, 2], Axis::Z, PI),
            d,
        ];
        assert_eq!(seq.events, want);
    }

    #[test]
    fn decoupling_rejects_zero_coupling() {
        let sys = SpinSystem::chf().with_coupling(1, 2, 0.0).unwrap();
        assert!(matches!(
            compile_decoupling(&sys, (1, 2), 1e-4, &CompileOptions::ideal()),
            Err(Error::ZeroCoupling { .. })
        ));
    }

    #[test]
    fn uzz_timing() {
        let sys = SpinSystem::from_species(&[("C", Species::C13), ("H", Species::H1)], &[(1, 2, 160.7)]).unwrap();
        let seq = compile_uzz(&sys, 1, 2, PI / 2.0, &CompileOptions::ideal()).unwrap();
        assert_eq!(seq.delay_count(), 2);
        for e in &seq.events {
            if let PulseEvent::Delay { duration } = e {
                assert!((duration - 1.0 / (4.0 * 160.7)).abs() < 1e-18);
            }
        }
        assert!(compile_uzz(&sys, 1, 2, 0.0, &CompileOptions::ideal()).unwrap().is_empty());
    }

    #[test]
    fn cnot_on_chf_uses_sixteenth_j_delays() {
        let seq = compile_cnot(&SpinSystem::chf(), 1, 2, &CompileOptions::ideal()).unwrap();
        assert_eq!(seq.delay_count(), 8);
        let tau0 = 1.0 / (16.0 * 160.7);
        for e in &seq.events {
            if let PulseEvent::Delay { duration } = e {
                assert_eq!(*duration, tau0);
            }
        }
    }

    #[test]
    fn simultaneous_padding_segments() {
        let sys = toy(&[1e8, 2e8, 3e8, 4e8], &[(1, 2, 100.0), (3, 4, 200.0)]);
        let seq = compile_simultaneous_cnot(&sys, &[(1, 2), (3, 4)], &CompileOptions::ideal()).unwrap();
        assert_eq!(seq.metadata["evolution_segments_s"], format!("{:e},{:e}", 1.0 / 800.0, 1.0 / 400.0 - 1.0 / 800.0));
        // two halves, two segments each, 16 delays per segment
        assert_eq!(seq.delay_count(), 2 * 2 * 16);
        assert!((seq.delay_time() - 2.0 / 400.0).abs() < 1e-15);
    }

    #[test]
    fn simultaneous_rejects_overlap_and_zero() {
        let sys = toy(&[1e8, 2e8, 3e8, 4e8], &[(1, 2, 100.0), (2, 3, 50.0), (3, 4, 200.0)]);
        let o = CompileOptions::ideal();
        assert!(matches!(compile_simultaneous_cnot(&sys, &[(1, 2), (2, 3)], &o), Err(Error::OverlappingPairs(2))));
        assert!(matches!(compile_simultaneous_cnot(&sys, &[(1, 2), (4, 1)], &o), Err(Error::ZeroCoupling { .. })));
    }

    #[test]
    fn compiled_single_uses_designed_spectator_pulses() {
        let sys = SpinSystem::chf();
        let ev = single_qubit_events(&sys, 1, Axis::Z, PI / 2.0, &CompileOptions::compiled()).unwrap();
        assert_eq!(ev.len(), 4);
        assert!(ev.iter().all(|e| matches!(e, PulseEvent::DcPulse { .. })));
        assert!((ev[1].duration() - 1761.6e-6).abs() < 0.5e-6);
    }
}
