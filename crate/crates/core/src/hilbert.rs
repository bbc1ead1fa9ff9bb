//! Dense operators and density matrices on the qutrit ⊗ truncated-Fock space.
//!
//! Subsystem order is fixed everywhere: qubit first, phonon second. Full
//! dimensions stay below ~30, so plain dense storage is used throughout.

use std::ops::{Add, Index, Mul, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::constants::{BOLTZMANN, HBAR};
use crate::error::{Error, Result};

/// Tolerance used when a freshly constructed state is validated.
pub const STATE_TOLERANCE: f64 = 1e-10;

/// Imaginary residue of an expectation value that counts as a real failure.
pub const EXPECTATION_IMAG_LIMIT: f64 = 1e-8;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix(DMatrix<Complex64>);

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self(DMatrix::from_element(rows, cols, ZERO))
    }

    pub fn identity(dim: usize) -> Self {
        Self(DMatrix::identity(dim, dim))
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl FnMut(usize, usize) -> Complex64) -> Self {
        Self(DMatrix::from_fn(rows, cols, f))
    }

    /// Diagonal matrix with real entries.
    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        Self::from_fn(n, n, |i, j| {
            if i == j {
                Complex64::new(diag[i], 0.0)
            } else {
                ZERO
            }
        })
    }

    pub fn from_matrix(m: DMatrix<Complex64>) -> Self {
        Self(m)
    }

    pub fn as_matrix(&self) -> &DMatrix<Complex64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<Complex64> {
        self.0
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn cols(&self) -> usize {
        self.0.ncols()
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    pub fn dagger(&self) -> Self {
        Self(self.0.adjoint())
    }

    /// Tensor product `self ⊗ other`.
    pub fn kron(&self, other: &Self) -> Self {
        Self(self.0.kronecker(&other.0))
    }

    pub fn trace(&self) -> Complex64 {
        self.0.trace()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self(&self.0 * factor)
    }

    pub fn scale_real(&self, factor: f64) -> Self {
        self.scale(Complex64::new(factor, 0.0))
    }

    /// `[A, B] = AB - BA`.
    pub fn commutator(&self, other: &Self) -> Self {
        Self(&self.0 * &other.0 - &other.0 * &self.0)
    }

    /// ‖A − A†‖_F / ‖A‖_F (0 for the zero matrix).
    pub fn hermiticity_error(&self) -> f64 {
        let norm = self.frobenius_norm();
        if norm == 0.0 {
            return 0.0;
        }
        (&self.0 - self.0.adjoint())
            .iter()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
            / norm
    }

    pub fn is_hermitian(&self, rel_tol: f64) -> bool {
        self.is_square() && self.hermiticity_error() <= rel_tol
    }

    /// Eigenvalues of the Hermitian part `(A + A†)/2`, ascending.
    pub fn hermitian_eigenvalues(&self) -> Vec<f64> {
        let herm = (&self.0 + self.0.adjoint()) * Complex64::new(0.5, 0.0);
        let mut ev: Vec<f64> = herm.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(|a, b| a.total_cmp(b));
        ev
    }

    /// Largest entry-wise modulus.
    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;
    fn index(&self, idx: (usize, usize)) -> &Complex64 {
        &self.0[idx]
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 * &rhs.0)
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 + &rhs.0)
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 - &rhs.0)
    }
}

/// Truncation of the composite space.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HilbertLayout {
    #[serde(default = "HilbertLayout::default_qubit_levels")]
    pub qubit_levels: usize,
    #[serde(default = "HilbertLayout::default_fock_cutoff")]
    pub fock_cutoff: usize,
}

impl HilbertLayout {
    /// Cutoff used for protocol runs, where populations stay far below one.
    pub const PROTOCOL_FOCK_CUTOFF: usize = 5;
    /// Cutoff used for driven steady-state checks.
    pub const STEADY_STATE_FOCK_CUTOFF: usize = 8;
    /// Largest tolerated population in the top Fock level of an accepted run.
    pub const TOP_LEVEL_GUARD: f64 = 1e-8;

    fn default_qubit_levels() -> usize {
        3
    }

    fn default_fock_cutoff() -> usize {
        Self::PROTOCOL_FOCK_CUTOFF
    }

    pub fn new(qubit_levels: usize, fock_cutoff: usize) -> Result<Self> {
        let layout = Self {
            qubit_levels,
            fock_cutoff,
        };
        layout.validate()?;
        Ok(layout)
    }

    pub fn validate(&self) -> Result<()> {
        if self.qubit_levels < 2 {
            return Err(Error::InvalidDimension(format!(
                "qubit_levels must be at least 2, got {}",
                self.qubit_levels
            )));
        }
        if self.fock_cutoff < 3 {
            return Err(Error::InvalidDimension(format!(
                "fock_cutoff must be at least 3, got {}",
                self.fock_cutoff
            )));
        }
        Ok(())
    }

    pub fn dims(&self) -> [usize; 2] {
        [self.qubit_levels, self.fock_cutoff]
    }

    pub fn total_dim(&self) -> usize {
        self.qubit_levels * self.fock_cutoff
    }

    fn slot_dim(&self, slot: Slot) -> usize {
        match slot {
            Slot::Qubit => self.qubit_levels,
            Slot::Phonon => self.fock_cutoff,
        }
    }
}

impl Default for HilbertLayout {
    fn default() -> Self {
        Self {
            qubit_levels: 3,
            fock_cutoff: Self::PROTOCOL_FOCK_CUTOFF,
        }
    }
}

/// Subsystem slot in the fixed qubit ⊗ phonon ordering.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Slot {
    Qubit,
    Phonon,
}

/// Bosonic lowering operator truncated to `dim` levels.
pub fn annihilation(dim: usize) -> Result<ComplexMatrix> {
    if dim < 2 {
        return Err(Error::InvalidDimension(format!(
            "annihilation operator needs dim >= 2, got {dim}"
        )));
    }
    Ok(ComplexMatrix::from_fn(dim, dim, |i, j| {
        if j == i + 1 {
            Complex64::new((j as f64).sqrt(), 0.0)
        } else {
            ZERO
        }
    }))
}

/// `a†a` truncated to `dim` levels.
pub fn number(dim: usize) -> Result<ComplexMatrix> {
    if dim < 2 {
        return Err(Error::InvalidDimension(format!(
            "number operator needs dim >= 2, got {dim}"
        )));
    }
    let diag: Vec<f64> = (0..dim).map(|k| k as f64).collect();
    Ok(ComplexMatrix::from_real_diagonal(&diag))
}

/// Ladder operators and level projectors of a transmon truncated to g, e, f.
#[derive(Clone, Debug)]
pub struct QutritOps {
    /// `|g⟩⟨e|`
    pub sigma_ge: ComplexMatrix,
    /// `|e⟩⟨f|`
    pub sigma_ef: ComplexMatrix,
    pub proj_g: ComplexMatrix,
    pub proj_e: ComplexMatrix,
    pub proj_f: ComplexMatrix,
}

impl QutritOps {
    /// Excitation-number operator `diag(0, 1, 2)`.
    pub fn excitation_number(&self) -> ComplexMatrix {
        &self.proj_e + &self.proj_f.scale_real(2.0)
    }
}

pub fn qutrit_ops() -> QutritOps {
    let unit = |r: usize, c: usize| {
        ComplexMatrix::from_fn(3, 3, |i, j| if i == r && j == c { ONE } else { ZERO })
    };
    QutritOps {
        sigma_ge: unit(0, 1),
        sigma_ef: unit(1, 2),
        proj_g: unit(0, 0),
        proj_e: unit(1, 1),
        proj_f: unit(2, 2),
    }
}

/// Lifts a single-subsystem operator onto the full qubit ⊗ phonon space.
pub fn embed(op: &ComplexMatrix, slot: Slot, layout: &HilbertLayout) -> Result<ComplexMatrix> {
    let want = layout.slot_dim(slot);
    if !op.is_square() || op.rows() != want {
        return Err(Error::InvalidDimension(format!(
            "operator is {}x{}, slot {:?} expects {want}x{want}",
            op.rows(),
            op.cols(),
            slot
        )));
    }
    Ok(match slot {
        Slot::Qubit => op.kron(&ComplexMatrix::identity(layout.fock_cutoff)),
        Slot::Phonon => ComplexMatrix::identity(layout.qubit_levels).kron(op),
    })
}

/// Density matrix with subsystem dimension metadata.
#[derive(Clone, Debug, PartialEq)]
pub struct QuantumState {
    density: ComplexMatrix,
    dims: Vec<usize>,
}

impl QuantumState {
    /// Builds a state and checks trace, Hermiticity and positivity at
    /// [`STATE_TOLERANCE`].
    pub fn new(density: ComplexMatrix, dims: Vec<usize>) -> Result<Self> {
        let state = Self::from_parts(density, dims)?;
        state.validate(STATE_TOLERANCE)?;
        Ok(state)
    }

    /// Dimension checks only; physical invariants are the caller's job.
    pub(crate) fn from_parts(density: ComplexMatrix, dims: Vec<usize>) -> Result<Self> {
        let total: usize = dims.iter().product();
        if !density.is_square() || density.rows() != total || dims.is_empty() {
            return Err(Error::InvalidDimension(format!(
                "density is {}x{} but dims {:?} give {total}",
                density.rows(),
                density.cols(),
                dims
            )));
        }
        Ok(Self { density, dims })
    }

    /// Pure basis state `|index⟩⟨index|`.
    pub fn basis(index: usize, dims: Vec<usize>) -> Result<Self> {
        let total: usize = dims.iter().product();
        if index >= total {
            return Err(Error::InvalidDimension(format!(
                "basis index {index} out of range for dimension {total}"
            )));
        }
        let mut diag = vec![0.0; total];
        diag[index] = 1.0;
        Self::from_parts(ComplexMatrix::from_real_diagonal(&diag), dims)
    }

    /// Diagonal state with the given level populations.
    pub fn diagonal(populations: &[f64]) -> Result<Self> {
        if populations.iter().any(|p| *p < 0.0 || !p.is_finite()) {
            return Err(Error::param("populations", "must be finite and non-negative"));
        }
        Self::new(
            ComplexMatrix::from_real_diagonal(populations),
            vec![populations.len()],
        )
    }

    pub fn density(&self) -> &ComplexMatrix {
        &self.density
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.density.rows()
    }

    pub fn trace(&self) -> f64 {
        self.density.trace().re
    }

    pub fn purity(&self) -> f64 {
        (&self.density * &self.density).trace().re
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.density
            .hermitian_eigenvalues()
            .first()
            .copied()
            .unwrap_or(0.0)
    }

    /// Checks unit trace, Hermiticity and positivity to within `tol`.
    pub fn validate(&self, tol: f64) -> Result<()> {
        let tr = self.density.trace();
        if (tr.re - 1.0).abs() > tol || tr.im.abs() > tol {
            return Err(Error::NumericalConsistency(format!(
                "trace {tr} deviates from 1 by more than {tol:e}"
            )));
        }
        let herm = self.density.hermiticity_error();
        if herm > tol {
            return Err(Error::NumericalConsistency(format!(
                "relative Hermiticity error {herm:e} exceeds {tol:e}"
            )));
        }
        let min_ev = self.min_eigenvalue();
        if min_ev < -tol {
            return Err(Error::NumericalConsistency(format!(
                "negative eigenvalue {min_ev:e} below -{tol:e}"
            )));
        }
        Ok(())
    }

    /// Diagonal of the density matrix.
    pub fn populations(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.density[(i, i)].re).collect()
    }

    /// Level populations of one subsystem of a two-part state.
    pub fn marginal_populations(&self, slot: Slot) -> Result<Vec<f64>> {
        if self.dims.len() != 2 {
            return Err(Error::InvalidDimension(format!(
                "marginal populations need a bipartite state, dims are {:?}",
                self.dims
            )));
        }
        let (dq, dp) = (self.dims[0], self.dims[1]);
        let pops = self.populations();
        Ok(match slot {
            Slot::Qubit => (0..dq)
                .map(|q| (0..dp).map(|p| pops[q * dp + p]).sum())
                .collect(),
            Slot::Phonon => (0..dp)
                .map(|p| (0..dq).map(|q| pops[q * dp + p]).sum())
                .collect(),
        })
    }

    /// Product state `self ⊗ other`.
    pub fn tensor(&self, other: &QuantumState) -> QuantumState {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        QuantumState {
            density: self.density.kron(&other.density),
            dims,
        }
    }

    /// Conjugates the state by a unitary: `U ρ U†`.
    pub fn conjugate(&self, unitary: &ComplexMatrix) -> Result<QuantumState> {
        if unitary.rows() != self.dim() || !unitary.is_square() {
            return Err(Error::InvalidDimension(format!(
                "unitary is {}x{}, state dimension is {}",
                unitary.rows(),
                unitary.cols(),
                self.dim()
            )));
        }
        let density = &(unitary * &self.density) * &unitary.dagger();
        Ok(QuantumState {
            density,
            dims: self.dims.clone(),
        })
    }
}

/// Boltzmann state over levels with the given energies (as angular
/// frequencies, rad/s, relative to the ground level). Zero temperature gives
/// the ground state.
pub fn boltzmann_state(level_omegas: &[f64], temp: f64) -> Result<QuantumState> {
    if temp.is_nan() || temp < 0.0 {
        return Err(Error::param("temp", format!("must be >= 0 K, got {temp}")));
    }
    if level_omegas.is_empty() {
        return Err(Error::InvalidDimension("no levels given".into()));
    }
    let weights: Vec<f64> = if temp == 0.0 {
        let mut w = vec![0.0; level_omegas.len()];
        w[0] = 1.0;
        w
    } else {
        level_omegas
            .iter()
            .map(|w| (-HBAR * w / (BOLTZMANN * temp)).exp())
            .collect()
    };
    let z: f64 = weights.iter().sum();
    let pops: Vec<f64> = weights.iter().map(|w| w / z).collect();
    QuantumState::diagonal(&pops)
}

/// Thermal state of a harmonic ladder with spacing `freq` (rad/s),
/// renormalised over `dim` levels.
pub fn thermal_state(freq: f64, temp: f64, dim: usize) -> Result<QuantumState> {
    if !(freq > 0.0) {
        return Err(Error::param("freq", format!("must be > 0, got {freq}")));
    }
    if dim < 1 {
        return Err(Error::InvalidDimension("thermal state needs dim >= 1".into()));
    }
    let levels: Vec<f64> = (0..dim).map(|k| k as f64 * freq).collect();
    boltzmann_state(&levels, temp)
}

/// `Tr(op ρ)`, required to be real.
pub fn expectation(op: &ComplexMatrix, state: &QuantumState) -> Result<f64> {
    if op.rows() != state.dim() || !op.is_square() {
        return Err(Error::InvalidDimension(format!(
            "operator is {}x{}, state dimension is {}",
            op.rows(),
            op.cols(),
            state.dim()
        )));
    }
    // Tr(AB) = Σ_ij A_ij B_ji without forming the product.
    let rho = state.density.as_matrix();
    let a = op.as_matrix();
    let n = state.dim();
    let mut acc = ZERO;
    for i in 0..n {
        for j in 0..n {
            acc += a[(i, j)] * rho[(j, i)];
        }
    }
    if acc.im.abs() > EXPECTATION_IMAG_LIMIT {
        return Err(Error::NumericalConsistency(format!(
            "expectation value has imaginary part {:e}",
            acc.im
        )));
    }
    Ok(acc.re)
}
