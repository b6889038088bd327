//! Pulse-sequence compiler and exact simulator for quantum gates on
//! zero-field NMR spin networks.
//!
//! In zero field the only handles on individual nuclei are their
//! gyromagnetic ratios and the scalar couplings between them. This crate
//! designs DC-pulse sequences for arbitrary single-spin rotations and CNOT
//! gates and checks them by exact unitary propagation.
//!
//! ```
//! use zfnmr::{compiler, simulator, SpinSystem};
//!
//! let sys = SpinSystem::chf();
//! let seq = compiler::compile_cnot(&sys, 1, 2, &compiler::CompileOptions::ideal()).unwrap();
//! let ideal = seq.intended_unitary(&sys).unwrap();
//! let report = simulator::evaluate_gate(&sys, &seq, &ideal, &Default::default()).unwrap();
//! assert!(report.fidelity > 0.99);
//! ```

pub mod compiler;
pub mod design;
pub mod error;
pub mod linalg;
pub mod sequence;
pub mod simulator;
pub mod spin;

pub use error::{Error, Result};
pub use linalg::{Axis, ComplexMatrix, Unitary};
pub use sequence::{GateSpec, PulseEvent, Sequence};
pub use spin::{FieldVector, Species, Spin, SpinSystem};
