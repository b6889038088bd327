use std::io::Write;
use std::path::Path;

use serde::Serialize;

use zfnmr::compiler::{
    compile_cnot, compile_simultaneous_cnot, compile_single_qubit, compile_uzz, CompileMode, CompileOptions,
    PiRealization,
};
use zfnmr::design::{
    default_grid_points, find_pi_duration, product_fidelity, rational_approx, shortest_adequate_pi_duration, sweep as sweep_grid, DesignSolution, TargetSet,
};
use zfnmr::simulator::{evaluate_gate, simulate as propagate, PhysicsConfig};
use zfnmr::spin::check_controllability;
use zfnmr::{FieldVector, GateSpec, PulseEvent, Sequence, SpinSystem, Unitary};

use crate::files::{load_ideal_file, load_sequence, load_system, IdealFile, SequenceFile};
use crate::units::{parse_angle, parse_axis, parse_field, parse_pairs, parse_range, parse_spins};
use crate::{io_error, CompileArgs, CliError, DesignArgs, GateArg, SimulateArgs, SweepArgs};

type Out<'a> = &'a mut dyn Write;

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn spin_label(sys: &SpinSystem, i: usize) -> String {
    format!("{}({})", sys.spins()[i - 1].name, i)
}

pub fn check(system: &str, out: Out) -> Result<(), CliError> {
    let sys = load_system(system)?;
    let report = check_controllability(&sys);
    let mut text = format!("spins {}\n", sys.len());
    for (k, s) in sys.spins().iter().enumerate() {
        text += &format!("  {} {} gamma={:.6e}\n", k + 1, s.name, s.gamma);
    }
    let couplings = sys.coupling_list();
    text += &format!("couplings {}\n", couplings.len());
    for (i, j, hz) in couplings {
        text += &format!("  J({}, {}) = {hz:.3} Hz\n", spin_label(&sys, i), spin_label(&sys, j));
    }
    text += &format!("verdict {}\n", report.verdict);
    let edges: Vec<String> = report.spanning_edges.iter().map(|(i, j)| format!("{i}-{j}")).collect();
    text += &format!("spanning_edges {}\n", if edges.is_empty() { "none".into() } else { edges.join(" ") });
    let comps: Vec<String> =
        report.components.iter().map(|c| format!("{{{}}}", c.iter().map(usize::to_string).collect::<Vec<_>>().join(","))).collect();
    text += &format!("components {}\n", comps.join(" "));
    if !report.equal_gamma_pairs.is_empty() {
        let pairs: Vec<String> = report.equal_gamma_pairs.iter().map(|(i, j)| format!("{i}-{j}")).collect();
        text += &format!("equal_gamma_pairs {}\n", pairs.join(" "));
    }
    out.write_all(text.as_bytes()).map_err(io_error)
}

fn csv(grid: &[(f64, f64)]) -> String {
    let mut s = String::from("t_seconds,fidelity\n");
    for (t, f) in grid {
        s += &format!("{t:.12e},{f:.12}\n");
    }
    s
}

fn grid_points(sys: &SpinSystem, b: f64, range: (f64, f64), points: Option<usize>) -> usize {
    points.unwrap_or_else(|| default_grid_points(sys, b, range.0, range.1))
}

fn report_design(sys: &SpinSystem, sol: &DesignSolution, out: Out) -> Result<(), CliError> {
    let names: Vec<String> = sol.target_set.iter().map(|i| spin_label(sys, i)).collect();
    let text = format!(
        "target {}\nfield_T {:.6e}\nduration_s {:.9e}\nfidelity {:.6}\n",
        names.join(","),
        sol.magnitude(),
        sol.duration,
        sol.predicted_fidelity
    );
    out.write_all(text.as_bytes()).map_err(io_error)
}

pub fn design(a: &DesignArgs, out: Out) -> Result<(), CliError> {
    let sys = load_system(&a.system)?;
    let targets = TargetSet::new(parse_spins(&sys, &a.target)?, sys.len())?;
    let b = parse_field(&a.field)?;
    let sol = match &a.range {
        Some(r) => {
            let range = parse_range(r)?;
            let points = grid_points(&sys, b, range, a.points);
            let sol = find_pi_duration(&sys, &targets, b, range, Some(points))?;
            if let Some(path) = &a.out {
                write_file(path, &csv(&sweep_grid(&sys, &targets, b, range.0, range.1, points)?))?;
            }
            sol
        }
        None => match a.rational {
            Some(max_m) => rational_design(&sys, &targets, b, max_m, out)?,
            None => shortest_adequate_pi_duration(&sys, &targets, b, a.threshold, a.max_duration)?,
        },
    };
    report_design(&sys, &sol, out)
}

fn rational_design(sys: &SpinSystem, targets: &TargetSet, b: f64, max_m: u32, out: Out) -> Result<DesignSolution, CliError> {
    if sys.len() != 2 || targets.len() != 1 {
        return Err(CliError::Physics("--rational needs a two-spin system and a single target".into()));
    }
    let t = targets.to_vec()[0];
    let s = 3 - t;
    let sol = rational_approx(sys.gamma(t), sys.gamma(s), max_m)?;
    let duration = sol.duration(sys.gamma(t), b);
    writeln!(out, "m_target {}\nm_spectator {}\nratio_error {:.3e}", sol.m_target, sol.m_spectator, sol.achieved_ratio_error)
        .map_err(io_error)?;
    Ok(DesignSolution {
        duration,
        field: FieldVector::z(b),
        target_set: targets.clone(),
        predicted_fidelity: product_fidelity(sys, targets, b, duration),
    })
}

pub fn sweep(a: &SweepArgs, out: Out) -> Result<(), CliError> {
    let sys = load_system(&a.system)?;
    let targets = TargetSet::new(parse_spins(&sys, &a.target)?, sys.len())?;
    let b = parse_field(&a.field)?;
    let range = parse_range(&a.range)?;
    let points = grid_points(&sys, b, range, a.points);
    let text = csv(&sweep_grid(&sys, &targets, b, range.0, range.1, points)?);
    match &a.out {
        Some(path) => write_file(path, &text),
        None => out.write_all(text.as_bytes()).map_err(io_error),
    }
}

fn compile_gate(sys: &SpinSystem, gate: &GateArg, opts: &CompileOptions) -> Result<Sequence, CliError> {
    Ok(match gate {
        GateArg::Identity => Sequence::empty().with_meta("construction", "identity"),
        GateArg::Single { spin, axis, angle } => {
            let spin = sys.resolve_spin(spin)?;
            let spectators: Vec<usize> = (1..=sys.len()).filter(|&k| k != spin).collect();
            let pi = match opts.mode {
                CompileMode::Compiled if !spectators.is_empty() => PiRealization::Designed(opts.design_pi(sys, &spectators)?),
                _ => PiRealization::Ideal,
            };
            compile_single_qubit(sys, spin, parse_axis(axis)?, parse_angle(angle)?, opts.field, &pi)?
        }
        GateArg::Cnot { control, target } => compile_cnot(sys, sys.resolve_spin(control)?, sys.resolve_spin(target)?, opts)?,
        GateArg::SimulCnot { pairs } => compile_simultaneous_cnot(sys, &parse_pairs(sys, pairs)?, opts)?,
        GateArg::Zz { i, j, angle } => compile_uzz(sys, sys.resolve_spin(i)?, sys.resolve_spin(j)?, parse_angle(angle)?, opts)?,
    })
}

pub fn compile(a: &CompileArgs, out: Out, err: Out) -> Result<(), CliError> {
    let sys = load_system(&a.system)?;
    let mode: CompileMode = a.mode.parse().map_err(|e: zfnmr::Error| CliError::Usage(e.to_string()))?;
    let opts = CompileOptions { mode, field: parse_field(&a.field)?, ..CompileOptions::default() };
    let seq = compile_gate(&sys, &a.gate, &opts)?.with_meta("field", format!("{:e}T", opts.field));
    let text = SequenceFile::from_sequence(&seq).to_toml();
    let summary = format!(
        "events {}\ndelays {}\nideal_gates {}\ntotal_duration_s {:.9e}\n",
        seq.len(),
        seq.delay_count(),
        seq.events.iter().filter(|e| matches!(e, PulseEvent::IdealGate { .. })).count(),
        seq.total_duration()
    );
    match &a.out {
        Some(path) => {
            write_file(path, &text)?;
            out.write_all(summary.as_bytes()).map_err(io_error)
        }
        None => {
            out.write_all(text.as_bytes()).map_err(io_error)?;
            err.write_all(summary.as_bytes()).map_err(io_error)
        }
    }
}

fn named_ideal(sys: &SpinSystem, spec: &str) -> Result<Option<(Unitary, String)>, CliError> {
    let parts: Vec<&str> = spec.split(':').collect();
    let gate = match parts.as_slice() {
        ["identity"] => GateSpec::Identity,
        ["cnot", c, t] => GateSpec::Cnot { control: sys.resolve_spin(c)?, target: sys.resolve_spin(t)? },
        ["rotation", s, axis, angle] => {
            GateSpec::Rotation { spin: sys.resolve_spin(s)?, axis: parse_axis(axis)?, angle: parse_angle(angle)? }
        }
        _ => return Ok(None),
    };
    Ok(Some((gate.unitary(sys)?, spec.to_string())))
}

#[derive(Serialize)]
struct SimulationRecord {
    fidelity: f64,
    total_duration_s: f64,
    events: usize,
    ideal: String,
    include_j_during_pulses: bool,
    honor_ideal_gates: bool,
}

pub fn simulate(a: &SimulateArgs, out: Out) -> Result<(), CliError> {
    let sys = load_system(&a.system)?;
    let seq = load_sequence(&a.sequence, sys.len())?;
    let cfg = PhysicsConfig { include_j_during_pulses: a.j_during_pulses, honor_ideal_gates: !a.no_ideal_gates };
    let (ideal, label) = if a.ideal == "target" {
        (seq.intended_unitary(&sys)?, "target".to_string())
    } else if let Some(found) = named_ideal(&sys, &a.ideal)? {
        found
    } else if Path::new(&a.ideal).is_file() {
        let u = match load_ideal_file(Path::new(&a.ideal), sys.len())? {
            IdealFile::Matrix(u) => u,
            IdealFile::Sequence(s) => propagate(&sys, &s, &cfg)?,
        };
        (u, a.ideal.clone())
    } else {
        return Err(CliError::Usage(format!("--ideal '{}' is not a known gate or readable file", a.ideal)));
    };
    let rep = evaluate_gate(&sys, &seq, &ideal, &cfg)?;
    let text = format!(
        "fidelity {:.6}\ntotal_duration_s {:.9e}\nevents {}\nideal {label}\ninclude_j_during_pulses {}\nhonor_ideal_gates {}\n",
        rep.fidelity,
        rep.total_duration,
        seq.len(),
        cfg.include_j_during_pulses,
        cfg.honor_ideal_gates
    );
    if let Some(path) = &a.report {
        let record = SimulationRecord {
            fidelity: rep.fidelity,
            total_duration_s: rep.total_duration,
            events: seq.len(),
            ideal: label,
            include_j_during_pulses: cfg.include_j_during_pulses,
            honor_ideal_gates: cfg.honor_ideal_gates,
        };
        write_file(path, &toml::to_string(&record).expect("record serializes"))?;
    }
    out.write_all(text.as_bytes()).map_err(io_error)
}
