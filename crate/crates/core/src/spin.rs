//! Spin species, scalar couplings and the two Hamiltonians that drive a
//! zero-field spin network.
//!
//! Units: gyromagnetic ratios in rad·s⁻¹·T⁻¹, couplings in Hz, fields in
//! tesla, times in seconds. Hamiltonians come out in rad/s (ħ = 1).

use std::collections::VecDeque;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{check_spin_count, check_spin_index, spin_operator, Axis, ComplexMatrix};

pub const GAMMA_1H: f64 = 267.513e6;
pub const GAMMA_13C: f64 = 67.262e6;
pub const GAMMA_19F: f64 = 251.662e6;
pub const GAMMA_31P: f64 = 108.291e6;

/// Tesla per gauss.
pub const GAUSS: f64 = 1e-4;

/// Nuclear species with a tabulated gyromagnetic ratio.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Species {
    #[serde(rename = "1H")]
    H1,
    #[serde(rename = "13C")]
    C13,
    #[serde(rename = "19F")]
    F19,
    #[serde(rename = "31P")]
    P31,
}

impl Species {
    pub fn gamma(self) -> f64 {
        match self {
            Species::H1 => GAMMA_1H,
            Species::C13 => GAMMA_13C,
            Species::F19 => GAMMA_19F,
            Species::P31 => GAMMA_31P,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Species::H1 => "1H",
            Species::C13 => "13C",
            Species::F19 => "19F",
            Species::P31 => "31P",
        }
    }
}

impl FromStr for Species {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "1H" | "H" | "H1" => Ok(Species::H1),
            "13C" | "C" | "C13" => Ok(Species::C13),
            "19F" | "F" | "F19" => Ok(Species::F19),
            "31P" | "P" | "P31" => Ok(Species::P31),
            other => Err(Error::InvalidSystem(format!("unknown species '{other}'"))),
        }
    }
}

/// A static magnetic field in tesla.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct FieldVector {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl FieldVector {
    pub const ZERO: FieldVector = FieldVector { x: 0.0, y: 0.0, z: 0.0 };

    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        let f = FieldVector { x, y, z };
        if !(x.is_finite() && y.is_finite() && z.is_finite()) {
            return Err(Error::InvalidField(format!("non-finite component in ({x}, {y}, {z})")));
        }
        Ok(f)
    }

    pub fn along(axis: [f64; 3], magnitude: f64) -> Self {
        FieldVector { x: axis[0] * magnitude, y: axis[1] * magnitude, z: axis[2] * magnitude }
    }

    pub fn z(bz: f64) -> Self {
        FieldVector { x: 0.0, y: 0.0, z: bz }
    }

    pub fn components(&self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn magnitude(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

impl std::ops::Neg for FieldVector {
    type Output = FieldVector;

    fn neg(self) -> FieldVector {
        FieldVector { x: -self.x, y: -self.y, z: -self.z }
    }
}

impl std::ops::Add for FieldVector {
    type Output = FieldVector;

    fn add(self, o: FieldVector) -> FieldVector {
        FieldVector { x: self.x + o.x, y: self.y + o.y, z: self.z + o.z }
    }
}

/// One spin-1/2 nucleus in the network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spin {
    pub name: String,
    pub gamma: f64,
}

/// An `n`-spin network: labels, gyromagnetic ratios and the symmetric
/// coupling matrix (Hz, zero diagonal).
#[derive(Debug, Clone, PartialEq)]
pub struct SpinSystem {
    spins: Vec<Spin>,
    couplings: Vec<Vec<f64>>,
}

impl SpinSystem {
    /// Builds a system from spins and `(i, j, J_hz)` entries with 1-based indices.
    /// Unlisted pairs are uncoupled.
    pub fn new(spins: Vec<Spin>, couplings: &[(usize, usize, f64)]) -> Result<Self> {
        let n = spins.len();
        check_spin_count(n)?;
        for s in &spins {
            if !s.gamma.is_finite() || s.gamma == 0.0 {
                return Err(Error::InvalidSystem(format!(
                    "spin '{}' has invalid gyromagnetic ratio {}",
                    s.name, s.gamma
                )));
            }
        }
        let mut j = vec![vec![0.0; n]; n];
        let mut seen = vec![vec![false; n]; n];
        for &(a, b, hz) in couplings {
            check_spin_index(a, n)?;
            check_spin_index(b, n)?;
            if a == b {
                return Err(Error::InvalidSystem(format!("self-coupling on spin {a}")));
            }
            if !hz.is_finite() {
                return Err(Error::InvalidSystem(format!("non-finite coupling J{a}{b}")));
            }
            if seen[a - 1][b - 1] {
                return Err(Error::InvalidSystem(format!("duplicate coupling J{a}{b}")));
            }
            seen[a - 1][b - 1] = true;
            seen[b - 1][a - 1] = true;
            j[a - 1][b - 1] = hz;
            j[b - 1][a - 1] = hz;
        }
        Ok(SpinSystem { spins, couplings: j })
    }

    pub fn from_species(species: &[(&str, Species)], couplings: &[(usize, usize, f64)]) -> Result<Self> {
        let spins = species
            .iter()
            .map(|(name, sp)| Spin { name: name.to_string(), gamma: sp.gamma() })
            .collect();
        Self::new(spins, couplings)
    }

    /// ¹³C–¹H pair (one-bond coupling of ¹³C formic acid).
    pub fn ch() -> Self {
        Self::from_species(&[("C", Species::C13), ("H", Species::H1)], &[(1, 2, 222.0)])
            .expect("built-in system")
    }

    /// ³¹P–¹H pair.
    pub fn ph() -> Self {
        Self::from_species(&[("P", Species::P31), ("H", Species::H1)], &[(1, 2, 700.0)])
            .expect("built-in system")
    }

    /// ¹³C–¹H–¹⁹F network of diethyl fluoromalonate.
    pub fn chf() -> Self {
        Self::from_species(
            &[("C", Species::C13), ("H", Species::H1), ("F", Species::F19)],
            &[(1, 2, 160.7), (1, 3, -194.4), (2, 3, 47.6)],
        )
        .expect("built-in system")
    }

    /// Looks up a built-in system by name (`CH`, `PH`, `CHF`).
    pub fn builtin(name: &str) -> Option<Self> {
        match name.to_ascii_uppercase().as_str() {
            "CH" => Some(Self::ch()),
            "PH" => Some(Self::ph()),
            "CHF" => Some(Self::chf()),
            _ => None,
        }
    }

    pub fn len(&self) -> usize {
        self.spins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spins.is_empty()
    }

    pub fn dim(&self) -> usize {
        1 << self.spins.len()
    }

    pub fn spins(&self) -> &[Spin] {
        &self.spins
    }

    /// Gyromagnetic ratio of spin `i` (1-based).
    pub fn gamma(&self, i: usize) -> f64 {
        self.spins[i - 1].gamma
    }

    pub fn gammas(&self) -> Vec<f64> {
        self.spins.iter().map(|s| s.gamma).collect()
    }

    /// Coupling `J_ij` in Hz (1-based).
    pub fn coupling(&self, i: usize, j: usize) -> f64 {
        self.couplings[i - 1][j - 1]
    }

    /// Nonzero couplings as `(i, j, J)` with `i < j`, in index order.
    pub fn coupling_list(&self) -> Vec<(usize, usize, f64)> {
        let n = self.len();
        let mut out = Vec::new();
        for i in 1..=n {
            for j in i + 1..=n {
                let v = self.coupling(i, j);
                if v != 0.0 {
                    out.push((i, j, v));
                }
            }
        }
        out
    }

    /// 1-based index of the spin called `name`, or a numeric index.
    pub fn resolve_spin(&self, name: &str) -> Result<usize> {
        if let Some(pos) = self.spins.iter().position(|s| s.name == name) {
            return Ok(pos + 1);
        }
        match name.parse::<usize>() {
            Ok(i) if i >= 1 && i <= self.len() => Ok(i),
            _ => Err(Error::InvalidTargetSet(format!("unknown spin '{name}'"))),
        }
    }

    /// Same spins with a replaced coupling matrix entry.
    pub fn with_coupling(&self, i: usize, j: usize, hz: f64) -> Result<Self> {
        check_spin_index(i, self.len())?;
        check_spin_index(j, self.len())?;
        if i == j || !hz.is_finite() {
            return Err(Error::InvalidSystem(format!("bad coupling J{i}{j} = {hz}")));
        }
        let mut out = self.clone();
        out.couplings[i - 1][j - 1] = hz;
        out.couplings[j - 1][i - 1] = hz;
        Ok(out)
    }

    /// The same spins with every coupling set to zero.
    pub fn uncoupled(&self) -> Self {
        let n = self.len();
        SpinSystem { spins: self.spins.clone(), couplings: vec![vec![0.0; n]; n] }
    }

    /// Zero-field Hamiltonian `Σ_{i<j} 2πJ_ij I_i·I_j`.
    pub fn zero_field_hamiltonian(&self) -> ComplexMatrix {
        build_zero_field_hamiltonian(self)
    }

    /// `2πJ_ij I_i·I_j` for a single pair.
    pub fn pair_hamiltonian(&self, i: usize, j: usize) -> Result<ComplexMatrix> {
        let n = self.len();
        check_spin_index(i, n)?;
        check_spin_index(j, n)?;
        if i == j {
            return Err(Error::InvalidTargetSet(format!("pair ({i}, {j}) is not a pair")));
        }
        Ok(scalar_product(i, j, n) * C64::new(2.0 * PI * self.coupling(i, j), 0.0))
    }
}

/// `I_i·I_j` in the `n`-spin space.
fn scalar_product(i: usize, j: usize, n: usize) -> ComplexMatrix {
    let dim = 1 << n;
    let mut out = ComplexMatrix::zeros(dim, dim);
    for axis in Axis::ALL {
        let a = spin_operator(i, axis, n).expect("checked index");
        let b = spin_operator(j, axis, n).expect("checked index");
        out += a * b;
    }
    out
}

pub fn build_zero_field_hamiltonian(sys: &SpinSystem) -> ComplexMatrix {
    let n = sys.len();
    let mut h = ComplexMatrix::zeros(sys.dim(), sys.dim());
    for (i, j, hz) in sys.coupling_list() {
        h += scalar_product(i, j, n) * C64::new(2.0 * PI * hz, 0.0);
    }
    h
}

/// `H_DC(B) = −Σ_i γ_i B·I_i`.
pub fn build_dc_hamiltonian(sys: &SpinSystem, field: FieldVector) -> ComplexMatrix {
    let n = sys.len();
    let mut h = ComplexMatrix::zeros(sys.dim(), sys.dim());
    for i in 1..=n {
        let g = sys.gamma(i);
        for (axis, b) in Axis::ALL.into_iter().zip(field.components()) {
            if b != 0.0 {
                h -= spin_operator(i, axis, n).expect("checked index") * C64::new(g * b, 0.0);
            }
        }
    }
    h
}

/// Verdict of the graph-connectivity controllability test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Controllability {
    Controllable,
    NotControllable,
    Unknown,
}

impl fmt::Display for Controllability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Controllability::Controllable => "controllable",
            Controllability::NotControllable => "not_controllable",
            Controllability::Unknown => "unknown",
        })
    }
}

/// Controllability verdict with the evidence behind it.
#[derive(Debug, Clone, PartialEq)]
pub struct ControllabilityReport {
    pub verdict: Controllability,
    /// Connected components of the nonzero-J graph (1-based spin indices).
    pub components: Vec<Vec<usize>>,
    /// Edges of a BFS spanning forest, one tree per component.
    pub spanning_edges: Vec<(usize, usize)>,
    /// Pairs of spins sharing a gyromagnetic ratio.
    pub equal_gamma_pairs: Vec<(usize, usize)>,
}

/// Connected J-graph with pairwise-distinct γ is controllable; a disconnected
/// graph is not; a connected graph with repeated γ is outside the criterion.
pub fn check_controllability(sys: &SpinSystem) -> ControllabilityReport {
    let n = sys.len();
    let mut visited = vec![false; n + 1];
    let mut components = Vec::new();
    let mut spanning_edges = Vec::new();
    for start in 1..=n {
        if visited[start] {
            continue;
        }
        visited[start] = true;
        let mut comp = vec![start];
        let mut queue = VecDeque::from([start]);
        while let Some(u) = queue.pop_front() {
            for v in 1..=n {
                if v != u && !visited[v] && sys.coupling(u, v) != 0.0 {
                    visited[v] = true;
                    comp.push(v);
                    spanning_edges.push((u.min(v), u.max(v)));
                    queue.push_back(v);
                }
            }
        }
        comp.sort_unstable();
        components.push(comp);
    }
    let mut equal_gamma_pairs = Vec::new();
    for i in 1..=n {
        for j in i + 1..=n {
            if sys.gamma(i) == sys.gamma(j) {
                equal_gamma_pairs.push((i, j));
            }
        }
    }
    let verdict = if components.len() > 1 {
        Controllability::NotControllable
    } else if equal_gamma_pairs.is_empty() {
        Controllability::Controllable
    } else {
        Controllability::Unknown
    };
    ControllabilityReport { verdict, components, spanning_edges, equal_gamma_pairs }
}
