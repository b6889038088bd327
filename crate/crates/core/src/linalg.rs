//! Dense complex operator kernel.
//!
//! Operators live in the 2ⁿ-dimensional product space of `n` spin-1/2
//! nuclei. Spin 1 is the leftmost tensor factor (most significant bit of the
//! basis index), and basis state `|0⟩` is the `I_z = +1/2` eigenvector.

use std::fmt;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense complex matrix, row/column indices follow the computational basis.
pub type ComplexMatrix = DMatrix<C64>;

/// Largest supported spin count.
pub const MAX_SPINS: usize = 8;

/// Relative Hermiticity tolerance for inputs to [`expm_hermitian`].
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Absolute Frobenius tolerance on `U†U − I` for a checked [`Unitary`].
pub const UNITARY_TOL: f64 = 1e-10;

/// Cartesian axis of a spin operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    pub fn unit(self) -> [f64; 3] {
        match self {
            Axis::X => [1.0, 0.0, 0.0],
            Axis::Y => [0.0, 1.0, 0.0],
            Axis::Z => [0.0, 0.0, 1.0],
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Axis::X => "x",
            Axis::Y => "y",
            Axis::Z => "z",
        };
        f.write_str(s)
    }
}

/// Single-spin angular momentum matrix `I_α` (ħ = 1).
pub fn pauli_half(axis: Axis) -> ComplexMatrix {
    let h = 0.5;
    let z = C64::new(0.0, 0.0);
    let data = match axis {
        Axis::X => [z, C64::new(h, 0.0), C64::new(h, 0.0), z],
        Axis::Y => [z, C64::new(0.0, -h), C64::new(0.0, h), z],
        Axis::Z => [C64::new(h, 0.0), z, z, C64::new(-h, 0.0)],
    };
    ComplexMatrix::from_row_slice(2, 2, &data)
}

pub(crate) fn check_spin_count(n: usize) -> Result<()> {
    if n == 0 || n > MAX_SPINS {
        return Err(Error::SpinCount { n, max: MAX_SPINS });
    }
    Ok(())
}

pub(crate) fn check_spin_index(spin: usize, n: usize) -> Result<()> {
    if spin == 0 || spin > n {
        return Err(Error::SpinIndex { spin, n });
    }
    Ok(())
}

/// `I_{spin,axis}` embedded in the `n`-spin space. `spin` is 1-based.
pub fn spin_operator(spin: usize, axis: Axis, n: usize) -> Result<ComplexMatrix> {
    check_spin_count(n)?;
    check_spin_index(spin, n)?;
    Ok(embed_single(&pauli_half(axis), spin - 1, n))
}

/// Places a 2×2 operator on tensor slot `slot` (0-based) of an `n`-spin space.
pub(crate) fn embed_single(op: &ComplexMatrix, slot: usize, n: usize) -> ComplexMatrix {
    let dim = 1usize << n;
    let shift = n - 1 - slot;
    let mut out = ComplexMatrix::zeros(dim, dim);
    for row in 0..dim {
        let rb = (row >> shift) & 1;
        for cb in 0..2 {
            let v = op[(rb, cb)];
            if v == C64::new(0.0, 0.0) {
                continue;
            }
            let col = (row & !(1 << shift)) | (cb << shift);
            out[(row, col)] = v;
        }
    }
    out
}

/// Kronecker (tensor) product `A ⊗ B`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kronecker(b)
}

pub fn identity(dim: usize) -> ComplexMatrix {
    ComplexMatrix::identity(dim, dim)
}

pub fn frobenius(m: &ComplexMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `‖M − M†‖_F`.
pub fn hermiticity_error(m: &ComplexMatrix) -> f64 {
    frobenius(&(m - m.adjoint()))
}

pub fn is_hermitian(m: &ComplexMatrix) -> bool {
    m.is_square() && hermiticity_error(m) <= HERMITIAN_TOL * frobenius(m)
}

/// `‖U†U − I‖_F`.
pub fn unitarity_error(m: &ComplexMatrix) -> f64 {
    let n = m.nrows();
    frobenius(&(m.adjoint() * m - identity(n)))
}

/// A unitary operator; the invariant is checked on construction from raw data.
#[derive(Debug, Clone, PartialEq)]
pub struct Unitary(ComplexMatrix);

impl Unitary {
    /// Wraps `m` after checking `‖U†U − I‖_F ≤ 1e−10`.
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        Self::with_tolerance(m, UNITARY_TOL)
    }

    pub fn with_tolerance(m: ComplexMatrix, tol: f64) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::NotSquare { rows: m.nrows(), cols: m.ncols() });
        }
        let err = unitarity_error(&m);
        if err.is_nan() || err > tol {
            return Err(Error::NotUnitary { error: err });
        }
        Ok(Unitary(m))
    }

    /// Trusted constructor for products/exponentials that are unitary by construction.
    pub(crate) fn from_trusted(m: ComplexMatrix) -> Self {
        Unitary(m)
    }

    pub fn identity(dim: usize) -> Self {
        Unitary(identity(dim))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.0
    }

    pub fn adjoint(&self) -> Unitary {
        Unitary(self.0.adjoint())
    }

    /// `self · rhs` (apply `rhs` first).
    pub fn compose(&self, rhs: &Unitary) -> Unitary {
        Unitary(&self.0 * &rhs.0)
    }

    pub fn unitarity_error(&self) -> f64 {
        unitarity_error(&self.0)
    }
}

/// Eigendecomposition of a Hermitian operator, reusable for any evolution time.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    values: DVector<f64>,
    vectors: ComplexMatrix,
}

impl HermitianEigen {
    pub fn new(h: &ComplexMatrix) -> Result<Self> {
        if !h.is_square() {
            return Err(Error::NotSquare { rows: h.nrows(), cols: h.ncols() });
        }
        let scale = frobenius(h);
        let err = hermiticity_error(h);
        if err > HERMITIAN_TOL * scale {
            return Err(Error::NotHermitian { error: err, scale });
        }
        if scale == 0.0 {
            let n = h.nrows();
            return Ok(HermitianEigen { values: DVector::zeros(n), vectors: identity(n) });
        }
        // symmetrize so the solver sees an exactly Hermitian input
        let sym = (h + h.adjoint()).scale(0.5);
        let eig = SymmetricEigen::new(sym);
        Ok(HermitianEigen { values: eig.eigenvalues, vectors: eig.eigenvectors })
    }

    pub fn eigenvalues(&self) -> &DVector<f64> {
        &self.values
    }

    /// `e^{−iHt}`.
    pub fn propagator(&self, t: f64) -> Unitary {
        let v = &self.vectors;
        let mut scaled = v.clone();
        for (k, &lambda) in self.values.iter().enumerate() {
            let phase = C64::from_polar(1.0, -lambda * t);
            for z in scaled.column_mut(k).iter_mut() {
                *z *= phase;
            }
        }
        Unitary(scaled * v.adjoint())
    }
}

/// `e^{−iHt}` for Hermitian `H` via eigendecomposition.
pub fn expm_hermitian(h: &ComplexMatrix, t: f64) -> Result<Unitary> {
    Ok(HermitianEigen::new(h)?.propagator(t))
}

/// `|Tr(U_ideal† U)| / dim`.
pub fn gate_fidelity(ideal: &Unitary, realized: &Unitary) -> Result<f64> {
    if ideal.dim() != realized.dim() {
        return Err(Error::DimensionMismatch { expected: ideal.dim(), found: realized.dim() });
    }
    let a = ideal.matrix();
    let b = realized.matrix();
    let dim = a.nrows();
    let mut tr = C64::new(0.0, 0.0);
    for i in 0..dim {
        for k in 0..dim {
            tr += a[(k, i)].conj() * b[(k, i)];
        }
    }
    Ok((tr.norm() / dim as f64).min(1.0))
}

/// Exact single-spin-set rotation `Π_k e^{−iθ n·I_k}` over `spins` (1-based).
pub fn rotation(spins: &[usize], axis: [f64; 3], angle: f64, n: usize) -> Result<Unitary> {
    check_spin_count(n)?;
    let (c, s) = ((angle / 2.0).cos(), (angle / 2.0).sin());
    // e^{−iθ n·σ/2} = cos(θ/2) − i sin(θ/2) n·σ
    let [nx, ny, nz] = axis;
    let single = ComplexMatrix::from_row_slice(
        2,
        2,
        &[
            C64::new(c, -s * nz),
            C64::new(-s * ny, -s * nx),
            C64::new(s * ny, -s * nx),
            C64::new(c, s * nz),
        ],
    );
    let dim = 1usize << n;
    let mut out = identity(dim);
    for &spin in spins {
        check_spin_index(spin, n)?;
        out = embed_single(&single, spin - 1, n) * out;
    }
    Ok(Unitary(out))
}
