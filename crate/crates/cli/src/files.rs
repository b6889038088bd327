//! TOML formats for spin systems, sequences and target matrices.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use zfnmr::{ComplexMatrix, FieldVector, GateSpec, PulseEvent, Sequence, Species, Spin, SpinSystem, Unitary};

use crate::CliError;

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn parse<T: for<'de> Deserialize<'de>>(text: &str, origin: &str) -> Result<T, CliError> {
    toml::from_str(text).map_err(|e| CliError::Parse(format!("{origin}: {e}")))
}

fn render<T: Serialize>(value: &T) -> String {
    toml::to_string(value).expect("file records serialize to TOML")
}

/// One `[[spin]]` entry: a name plus either a species or an explicit gamma.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpinEntry {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub species: Option<String>,
    /// rad·s⁻¹·T⁻¹
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
}

/// One `[[coupling]]` entry with 1-based indices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingEntry {
    pub i: usize,
    pub j: usize,
    pub hz: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemFile {
    #[serde(rename = "spin")]
    pub spins: Vec<SpinEntry>,
    #[serde(rename = "coupling", default)]
    pub couplings: Vec<CouplingEntry>,
}

impl SystemFile {
    pub fn parse(text: &str, origin: &str) -> Result<Self, CliError> {
        parse(text, origin)
    }

    pub fn to_toml(&self) -> String {
        render(self)
    }

    pub fn from_system(sys: &SpinSystem) -> Self {
        SystemFile {
            spins: sys
                .spins()
                .iter()
                .map(|s| SpinEntry { name: s.name.clone(), species: None, gamma: Some(s.gamma) })
                .collect(),
            couplings: sys.coupling_list().into_iter().map(|(i, j, hz)| CouplingEntry { i, j, hz }).collect(),
        }
    }

    pub fn to_system(&self) -> Result<SpinSystem, CliError> {
        let spins = self
            .spins
            .iter()
            .map(|s| {
                let gamma = match (&s.species, s.gamma) {
                    (Some(sp), None) => sp.parse::<Species>().map_err(|e| CliError::Parse(format!("spin '{}': {e}", s.name)))?.gamma(),
                    (None, Some(g)) => g,
                    _ => {
                        return Err(CliError::Parse(format!(
                            "spin '{}' needs exactly one of 'species' or 'gamma'",
                            s.name
                        )))
                    }
                };
                Ok(Spin { name: s.name.clone(), gamma })
            })
            .collect::<Result<Vec<_>, CliError>>()?;
        let couplings: Vec<_> = self.couplings.iter().map(|c| (c.i, c.j, c.hz)).collect();
        Ok(SpinSystem::new(spins, &couplings)?)
    }
}

/// A built-in system name (`CH`, `PH`, `CHF`) or a path to a system file.
/// An existing file wins over a built-in of the same name.
pub fn load_system(arg: &str) -> Result<SpinSystem, CliError> {
    let path = Path::new(arg);
    if path.is_file() {
        return SystemFile::parse(&read(path)?, arg)?.to_system();
    }
    SpinSystem::builtin(arg)
        .ok_or_else(|| CliError::Usage(format!("'{arg}' is neither a built-in system (CH, PH, CHF) nor a readable file")))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FieldUnit {
    T,
    G,
}

impl FieldUnit {
    fn per_tesla(self) -> f64 {
        match self {
            FieldUnit::T => 1.0,
            FieldUnit::G => 1e4,
        }
    }
}

/// Event record as written in a sequence file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum EventRecord {
    DcPulse { field: [f64; 3], unit: FieldUnit, duration: f64 },
    Delay { duration: f64 },
    IdealGate { spins: Vec<usize>, axis: [f64; 3], angle: f64 },
}

impl EventRecord {
    fn from_event(e: &PulseEvent) -> Self {
        match e {
            PulseEvent::DcPulse { field, duration } => {
                EventRecord::DcPulse { field: field.components(), unit: FieldUnit::T, duration: *duration }
            }
            PulseEvent::Delay { duration } => EventRecord::Delay { duration: *duration },
            PulseEvent::IdealGate { spins, axis, angle } => {
                EventRecord::IdealGate { spins: spins.clone(), axis: *axis, angle: *angle }
            }
        }
    }

    fn to_event(&self) -> Result<PulseEvent, CliError> {
        Ok(match self {
            EventRecord::DcPulse { field, unit, duration } => {
                let [x, y, z] = field.map(|c| c / unit.per_tesla());
                PulseEvent::DcPulse { field: FieldVector::new(x, y, z)?, duration: *duration }
            }
            EventRecord::Delay { duration } => PulseEvent::Delay { duration: *duration },
            EventRecord::IdealGate { spins, axis, angle } => {
                PulseEvent::IdealGate { spins: spins.clone(), axis: *axis, angle: *angle }
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SequenceFile {
    pub target: GateSpec,
    #[serde(default)]
    pub metadata: BTreeMap<String, String>,
    #[serde(rename = "event", default)]
    pub events: Vec<EventRecord>,
}

impl SequenceFile {
    pub fn from_sequence(seq: &Sequence) -> Self {
        SequenceFile {
            target: seq.target.clone(),
            metadata: seq.metadata.clone(),
            events: seq.events.iter().map(EventRecord::from_event).collect(),
        }
    }

    pub fn parse(text: &str, origin: &str) -> Result<Self, CliError> {
        parse(text, origin)
    }

    pub fn to_toml(&self) -> String {
        render(self)
    }

    /// Converts and validates every event against a system of `n` spins.
    pub fn to_sequence(&self, n: usize) -> Result<Sequence, CliError> {
        let events = self.events.iter().map(EventRecord::to_event).collect::<Result<Vec<_>, _>>()?;
        let mut seq = Sequence::new(events, self.target.clone());
        seq.metadata = self.metadata.clone();
        for (k, e) in seq.events.iter().enumerate() {
            e.validate(n).map_err(|err| CliError::Physics(format!("event {}: {err}", k + 1)))?;
        }
        Ok(seq)
    }
}

pub fn load_sequence(path: &Path, n: usize) -> Result<Sequence, CliError> {
    SequenceFile::parse(&read(path)?, &path.display().to_string())?.to_sequence(n)
}

/// A target matrix given as separate real and imaginary row lists.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixFile {
    pub re: Vec<Vec<f64>>,
    #[serde(default)]
    pub im: Option<Vec<Vec<f64>>>,
}

impl MatrixFile {
    pub fn parse(text: &str, origin: &str) -> Result<Self, CliError> {
        parse(text, origin)
    }

    pub fn to_unitary(&self) -> Result<Unitary, CliError> {
        let dim = self.re.len();
        let im = self.im.clone().unwrap_or_else(|| vec![vec![0.0; dim]; dim]);
        if im.len() != dim || self.re.iter().chain(&im).any(|row| row.len() != dim) {
            return Err(CliError::Parse("matrix rows must form a square array with matching 're' and 'im'".into()));
        }
        let m = ComplexMatrix::from_fn(dim, dim, |r, c| num_complex::Complex64::new(self.re[r][c], im[r][c]));
        Ok(Unitary::new(m)?)
    }
}

/// Reads an `--ideal` file: either a matrix or a sequence whose simulation
/// defines the target.
pub enum IdealFile {
    Matrix(Unitary),
    Sequence(Sequence),
}

pub fn load_ideal_file(path: &Path, n: usize) -> Result<IdealFile, CliError> {
    let text = read(path)?;
    let origin = path.display().to_string();
    let value: toml::Table = parse(&text, &origin)?;
    if value.contains_key("re") {
        Ok(IdealFile::Matrix(MatrixFile::parse(&text, &origin)?.to_unitary()?))
    } else {
        Ok(IdealFile::Sequence(SequenceFile::parse(&text, &origin)?.to_sequence(n)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const CHF: &str = r#"
[[spin]]
name = "C"
species = "13C"

[[spin]]
name = "H"
species = "1H"

[[spin]]
name = "F"
gamma = 251.662e6

[[coupling]]
i = 1
j = 2
hz = 160.7

[[coupling]]
i = 1
j = 3
hz = -194.4

[[coupling]]
i = 2
j = 3
hz = 47.6
"#;

    #[test]
    fn system_file_builds_chf() {
        let sys = SystemFile::parse(CHF, "chf.toml").unwrap().to_system().unwrap();
        assert_eq!(sys, SpinSystem::chf());
    }

    #[test]
    fn system_file_round_trips() {
        let file = SystemFile::parse(CHF, "chf.toml").unwrap();
        let again = SystemFile::parse(&file.to_toml(), "again").unwrap();
        assert_eq!(file, again);
        let from_sys = SystemFile::from_system(&SpinSystem::chf());
        assert_eq!(SystemFile::parse(&from_sys.to_toml(), "x").unwrap(), from_sys);
    }

    #[test]
    fn unknown_keys_report_position() {
        let text = "[[spin]]\nname = \"C\"\nspecies = \"13C\"\ncolour = \"red\"\n";
        let err = SystemFile::parse(text, "bad.toml").unwrap_err().to_string();
        assert!(err.contains("line 4"), "{err}");
        assert!(err.contains("colour"), "{err}");
    }

    #[test]
    fn spin_needs_one_gamma_source() {
        let text = "[[spin]]\nname = \"C\"\nspecies = \"13C\"\ngamma = 1.0\n";
        assert!(SystemFile::parse(text, "x").unwrap().to_system().is_err());
        let text = "[[spin]]\nname = \"C\"\n";
        assert!(SystemFile::parse(text, "x").unwrap().to_system().is_err());
    }

    #[test]
    fn gauss_fields_are_converted() {
        let text = r#"
[target]
gate = "identity"

[[event]]
kind = "dc_pulse"
field = [0.0, 0.0, 9.0]
unit = "G"
duration = 1e-5
"#;
        let seq = SequenceFile::parse(text, "s").unwrap().to_sequence(2).unwrap();
        match &seq.events[0] {
            PulseEvent::DcPulse { field, .. } => assert_eq!(field.z, 9e-4),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn events_validated_at_load() {
        let text = "[target]\ngate = \"identity\"\n\n[[event]]\nkind = \"delay\"\nduration = -1.0\n";
        assert!(matches!(SequenceFile::parse(text, "s").unwrap().to_sequence(2), Err(CliError::Physics(_))));
        let text = "[target]\ngate = \"identity\"\n\n[[event]]\nkind = \"delay\"\nduration = 1.0\nfield = 2\n";
        assert!(matches!(SequenceFile::parse(text, "s"), Err(CliError::Parse(_))));
    }

    #[test]
    fn sequence_round_trip_is_exact() {
        let sys = SpinSystem::chf();
        let seq = zfnmr::compiler::compile_cnot(&sys, 1, 2, &zfnmr::compiler::CompileOptions::compiled()).unwrap();
        let text = SequenceFile::from_sequence(&seq).to_toml();
        let back = SequenceFile::parse(&text, "s").unwrap().to_sequence(3).unwrap();
        assert_eq!(back, seq);
    }

    #[test]
    fn matrix_file_parses() {
        let m = MatrixFile::parse("re = [[0.0, 1.0], [1.0, 0.0]]\n", "m").unwrap().to_unitary().unwrap();
        assert_eq!(m.dim(), 2);
        assert!(MatrixFile::parse("re = [[1.0, 1.0], [1.0, 0.0]]\n", "m").unwrap().to_unitary().is_err());
    }
}
