//! Channel representations: Pauli transfer matrices, Choi matrices, Kraus
//! sets, and the vectorized states and measurements they act on.
//!
//! Conventions:
//!
//! * `R[i][j] = Tr(P_i Λ(P_j)) / d` over the Pauli basis ordered `I, X, Y, Z`.
//! * The Choi matrix is `(1/d) Σ E_ab ⊗ Λ(E_ab)` (input factor first), so a
//!   trace-preserving map has unit-trace Choi matrix.
//! * States carry `Tr(P_j ρ) / d`, measurements carry `Tr(M P_j)`, and an
//!   expectation value is the plain bilinear form `Mᵀ R ρ`.
//! * Column-major vectorization everywhere.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::{self, C64};

/// Tolerance used when constructing representations.
pub const CONSTRUCTION_TOL: f64 = 1e-12;
/// Tolerance used for physicality verdicts.
pub const PHYSICALITY_TOL: f64 = 1e-9;

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Largest entrywise deviation of `m` from Hermiticity.
pub fn hermitian_deviation(m: &DMatrix<C64>) -> f64 {
    let n = m.nrows();
    let mut worst: f64 = 0.0;
    for r in 0..n {
        for k in r..n {
            worst = worst.max((m[(r, k)] - m[(k, r)].conj()).norm());
        }
    }
    worst
}

/// Real `d² × d²` superoperator in the Pauli basis.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliTransferMatrix {
    dim: usize,
    mat: DMatrix<f64>,
}

impl PauliTransferMatrix {
    pub fn new(dim: usize, mat: DMatrix<f64>) -> Result<Self> {
        pauli::qubits_for_dim(dim)?;
        let n = dim * dim;
        if mat.nrows() != n || mat.ncols() != n {
            return Err(Error::Dimension(format!(
                "PTM for d={dim} must be {n}x{n}, got {}x{}",
                mat.nrows(),
                mat.ncols()
            )));
        }
        Ok(PauliTransferMatrix { dim, mat })
    }

    /// Build from row-major nested rows.
    pub fn from_rows(dim: usize, rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::Dimension("PTM rows must form a square matrix".into()));
        }
        Self::new(dim, DMatrix::from_fn(n, n, |r, c| rows[r][c]))
    }

    pub fn identity(dim: usize) -> Self {
        let n = dim * dim;
        PauliTransferMatrix { dim, mat: DMatrix::identity(n, n) }
    }

    /// Diagonal PTM, for example `diag(1, ε, ε, ε)`.
    pub fn diagonal(dim: usize, diag: &[f64]) -> Result<Self> {
        Self::new(dim, DMatrix::from_diagonal(&DVector::from_column_slice(diag)))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Side length `d²`.
    pub fn size(&self) -> usize {
        self.dim * self.dim
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.mat
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.mat
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.mat[(r, c)]
    }

    /// Column-major vectorization.
    pub fn vectorize(&self) -> DVector<f64> {
        DVector::from_column_slice(self.mat.as_slice())
    }

    pub fn from_vectorized(dim: usize, v: &DVector<f64>) -> Result<Self> {
        let n = dim * dim;
        if v.len() != n * n {
            return Err(Error::Dimension(format!("expected {} entries, got {}", n * n, v.len())));
        }
        Self::new(dim, DMatrix::from_column_slice(n, n, v.as_slice()))
    }

    pub fn transpose(&self) -> Self {
        PauliTransferMatrix { dim: self.dim, mat: self.mat.transpose() }
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &PauliTransferMatrix) -> PauliTransferMatrix {
        compose(self, other)
    }

    /// Conjugation `Uᵀ · self · U` by an orthogonal PTM.
    pub fn conjugate_by(&self, u: &PauliTransferMatrix) -> PauliTransferMatrix {
        PauliTransferMatrix { dim: self.dim, mat: u.mat.transpose() * &self.mat * &u.mat }
    }

    pub fn first_row_deviation(&self) -> f64 {
        (0..self.size())
            .map(|j| (self.mat[(0, j)] - if j == 0 { 1.0 } else { 0.0 }).abs())
            .fold(0.0, f64::max)
    }

    pub fn first_col_deviation(&self) -> f64 {
        (0..self.size())
            .map(|i| (self.mat[(i, 0)] - if i == 0 { 1.0 } else { 0.0 }).abs())
            .fold(0.0, f64::max)
    }

    pub fn is_trace_preserving(&self, tol: f64) -> bool {
        self.first_row_deviation() <= tol
    }

    pub fn is_unital(&self, tol: f64) -> bool {
        self.first_col_deviation() <= tol
    }

    /// Largest entry of `|RᵀR − 𝕀|`.
    pub fn orthogonality_deviation(&self) -> f64 {
        let n = self.size();
        (self.mat.transpose() * &self.mat - DMatrix::<f64>::identity(n, n)).amax()
    }

    pub fn is_orthogonal(&self, tol: f64) -> bool {
        self.orthogonality_deviation() <= tol
    }

    /// Smallest eigenvalue of the Choi matrix; `≥ −tol` means completely positive.
    pub fn choi_min_eigenvalue(&self) -> f64 {
        choi_from_ptm(self).min_eigenvalue()
    }

    pub fn is_completely_positive(&self, tol: f64) -> bool {
        self.choi_min_eigenvalue() >= -tol
    }

    pub fn is_cptp(&self, tol: f64) -> bool {
        self.is_trace_preserving(tol) && self.is_completely_positive(tol)
    }

    pub fn frobenius_distance(&self, other: &PauliTransferMatrix) -> f64 {
        (&self.mat - &other.mat).norm()
    }

    pub fn max_abs_diff(&self, other: &PauliTransferMatrix) -> f64 {
        (&self.mat - &other.mat).amax()
    }

    pub fn apply(&self, state: &StateVector) -> StateVector {
        StateVector { dim: self.dim, v: &self.mat * &state.v }
    }

    pub fn to_json(&self) -> PtmJson {
        PtmJson {
            dim: self.dim,
            order: pauli::ORDER.to_string(),
            rows: self.mat.row_iter().map(|r| r.iter().copied().collect()).collect(),
        }
    }

    pub fn from_json(j: &PtmJson) -> Result<Self> {
        if j.order != pauli::ORDER {
            return Err(Error::InvalidParameter(format!(
                "unsupported Pauli ordering {:?}, expected {:?}",
                j.order,
                pauli::ORDER
            )));
        }
        Self::from_rows(j.dim, &j.rows)
    }
}

/// Wire form of a PTM: `{dim, order, rows}` with row-major entries.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct PtmJson {
    pub dim: usize,
    pub order: String,
    pub rows: Vec<Vec<f64>>,
}

/// Hermitian `d² × d²` Choi matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ChoiMatrix {
    dim: usize,
    mat: DMatrix<C64>,
}

impl ChoiMatrix {
    pub fn new(dim: usize, mat: DMatrix<C64>) -> Result<Self> {
        pauli::qubits_for_dim(dim)?;
        let n = dim * dim;
        if mat.nrows() != n || mat.ncols() != n {
            return Err(Error::Dimension(format!("Choi matrix for d={dim} must be {n}x{n}")));
        }
        let dev = hermitian_deviation(&mat);
        if dev > CONSTRUCTION_TOL {
            return Err(Error::NotHermitian(dev));
        }
        Ok(ChoiMatrix { dim, mat })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.mat
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.mat
    }

    pub fn trace(&self) -> f64 {
        self.mat.trace().re
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = self.mat.clone().symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(|a, b| a.total_cmp(b));
        ev
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    /// Interleaved `(re, im)` rows.
    pub fn to_json(&self) -> ChoiJson {
        ChoiJson {
            dim: self.dim,
            order: pauli::ORDER.to_string(),
            rows: self
                .mat
                .row_iter()
                .map(|r| r.iter().flat_map(|z| [z.re, z.im]).collect())
                .collect(),
        }
    }

    pub fn from_json(j: &ChoiJson) -> Result<Self> {
        let n = j.rows.len();
        if j.rows.iter().any(|r| r.len() != 2 * n) {
            return Err(Error::Dimension("Choi rows must hold 2n interleaved values".into()));
        }
        Self::new(j.dim, DMatrix::from_fn(n, n, |r, k| C64::new(j.rows[r][2 * k], j.rows[r][2 * k + 1])))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ChoiJson {
    pub dim: usize,
    pub order: String,
    pub rows: Vec<Vec<f64>>,
}

/// Vectorized state `⟨⟨j|ρ⟩⟩ = Tr(P_j ρ)/d`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    dim: usize,
    v: DVector<f64>,
}

impl StateVector {
    pub fn new(dim: usize, v: DVector<f64>) -> Result<Self> {
        pauli::qubits_for_dim(dim)?;
        if v.len() != dim * dim {
            return Err(Error::Dimension(format!("state vector for d={dim} needs {} entries", dim * dim)));
        }
        Ok(StateVector { dim, v })
    }

    /// `|0…0⟩⟨0…0|`.
    pub fn ground(dim: usize) -> Result<Self> {
        let mut rho = DMatrix::zeros(dim, dim);
        rho[(0, 0)] = c(1.0);
        vectorize_state(&rho)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vector(&self) -> &DVector<f64> {
        &self.v
    }
}

/// Vectorized observable `⟨⟨M|j⟩⟩ = Tr(M P_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementVector {
    dim: usize,
    v: DVector<f64>,
}

impl MeasurementVector {
    pub fn new(dim: usize, v: DVector<f64>) -> Result<Self> {
        pauli::qubits_for_dim(dim)?;
        if v.len() != dim * dim {
            return Err(Error::Dimension(format!("measurement vector for d={dim} needs {} entries", dim * dim)));
        }
        Ok(MeasurementVector { dim, v })
    }

    /// Projector onto `|0…0⟩`.
    pub fn ground_projector(dim: usize) -> Result<Self> {
        let mut m = DMatrix::zeros(dim, dim);
        m[(0, 0)] = c(1.0);
        vectorize_measurement(&m)
    }

    /// Pauli `Z` on the first qubit (traceless).
    pub fn pauli_z(dim: usize) -> Result<Self> {
        let b = pauli::basis(dim)?;
        let idx = 3 * (b.len() / 4);
        vectorize_measurement(&b.dense[idx])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vector(&self) -> &DVector<f64> {
        &self.v
    }

    /// Operator norm of the observable this vector encodes.
    pub fn operator_norm(&self) -> f64 {
        let m = self.to_operator();
        let ev = m.symmetric_eigenvalues();
        ev.iter().fold(0.0f64, |a, x| a.max(x.abs()))
    }

    /// Reconstruct `M = Σ_j ⟨⟨M|j⟩⟩ P_j / d`.
    pub fn to_operator(&self) -> DMatrix<C64> {
        let b = pauli::basis(self.dim).expect("validated dim");
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for (coef, p) in self.v.iter().zip(&b.dense) {
            m += p * c(*coef / self.dim as f64);
        }
        m
    }
}

/// Kraus representation `Λ(X) = Σ A_k X A_k†`.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausSet {
    dim: usize,
    ops: Vec<DMatrix<C64>>,
}

impl KrausSet {
    pub fn new(ops: Vec<DMatrix<C64>>) -> Result<Self> {
        let first = ops
            .first()
            .ok_or_else(|| Error::InvalidParameter("Kraus set is empty".into()))?;
        let dim = first.nrows();
        pauli::qubits_for_dim(dim)?;
        if let Some(bad) = ops.iter().find(|a| a.nrows() != dim || a.ncols() != dim) {
            return Err(Error::Dimension(format!(
                "Kraus operators must all be {dim}x{dim}, found {}x{}",
                bad.nrows(),
                bad.ncols()
            )));
        }
        Ok(KrausSet { dim, ops })
    }

    pub fn unitary(u: DMatrix<C64>) -> Result<Self> {
        Self::new(vec![u])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn operators(&self) -> &[DMatrix<C64>] {
        &self.ops
    }

    /// Largest entry of `|Σ A_k† A_k − 𝕀|`.
    pub fn completeness_deviation(&self) -> f64 {
        let mut s = DMatrix::<C64>::identity(self.dim, self.dim) * c(-1.0);
        for a in &self.ops {
            s += a.adjoint() * a;
        }
        s.iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    pub fn apply(&self, x: &DMatrix<C64>) -> DMatrix<C64> {
        let mut out = DMatrix::zeros(self.dim, self.dim);
        for a in &self.ops {
            out += a * x * a.adjoint();
        }
        out
    }
}

/// PTM of a Kraus channel: `R_ij = Tr(P_i Λ(P_j)) / d`.
pub fn ptm_from_kraus(kraus: &KrausSet) -> Result<PauliTransferMatrix> {
    let d = kraus.dim();
    let b = pauli::basis(d)?;
    let n = b.len();
    let mut mat = DMatrix::zeros(n, n);
    let mut worst_imag: f64 = 0.0;
    for j in 0..n {
        let out = kraus.apply(&b.dense[j]);
        for i in 0..n {
            let t = b.elements[i].trace_with(&out) / d as f64;
            worst_imag = worst_imag.max(t.im.abs());
            mat[(i, j)] = t.re;
        }
    }
    if worst_imag > CONSTRUCTION_TOL {
        return Err(Error::NonReal(worst_imag));
    }
    PauliTransferMatrix::new(d, mat)
}

/// `ρ_Λ = (1/d²) Σ_ij R_ij P_jᵀ ⊗ P_i`.
pub fn choi_from_ptm(r: &PauliTransferMatrix) -> ChoiMatrix {
    let d = r.dim();
    let b = pauli::basis(d).expect("validated dim");
    let n = b.len();
    let scale = 1.0 / (n as f64);
    let mut mat = DMatrix::<C64>::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let coef = r.mat[(i, j)];
            if coef == 0.0 {
                continue;
            }
            let term = &b.choi_terms[i * n + j];
            for row in 0..n {
                mat[(row, term.cols[row])] += term.phases[row] * (coef * scale);
            }
        }
    }
    ChoiMatrix { dim: d, mat }
}

/// `R_ij = Tr(ρ_Λ · P_jᵀ ⊗ P_i)`.
pub fn ptm_from_choi(rho: &ChoiMatrix) -> Result<PauliTransferMatrix> {
    let dev = hermitian_deviation(&rho.mat);
    if dev > CONSTRUCTION_TOL {
        return Err(Error::NotHermitian(dev));
    }
    Ok(ptm_from_choi_unchecked(rho.dim, &rho.mat))
}

/// Inverse Choi map for a matrix already known to be Hermitian.
pub(crate) fn ptm_from_choi_unchecked(dim: usize, rho: &DMatrix<C64>) -> PauliTransferMatrix {
    let b = pauli::basis(dim).expect("validated dim");
    let n = b.len();
    let mat = DMatrix::from_fn(n, n, |i, j| b.choi_terms[i * n + j].trace_with(rho).re);
    PauliTransferMatrix { dim, mat }
}

/// `⟨⟨j|ρ⟩⟩ = Tr(P_j ρ)/d`.
pub fn vectorize_state(rho: &DMatrix<C64>) -> Result<StateVector> {
    let d = rho.nrows();
    if rho.ncols() != d {
        return Err(Error::Dimension("density matrix must be square".into()));
    }
    let dev = hermitian_deviation(rho);
    if dev > CONSTRUCTION_TOL {
        return Err(Error::NotHermitian(dev));
    }
    let b = pauli::basis(d)?;
    let v = DVector::from_iterator(b.len(), b.elements.iter().map(|p| p.trace_with(rho).re / d as f64));
    StateVector::new(d, v)
}

/// `⟨⟨M|j⟩⟩ = Tr(M P_j)`.
pub fn vectorize_measurement(m: &DMatrix<C64>) -> Result<MeasurementVector> {
    let d = m.nrows();
    if m.ncols() != d {
        return Err(Error::Dimension("observable must be square".into()));
    }
    let dev = hermitian_deviation(m);
    if dev > CONSTRUCTION_TOL {
        return Err(Error::NotHermitian(dev));
    }
    let b = pauli::basis(d)?;
    let v = DVector::from_iterator(b.len(), b.elements.iter().map(|p| p.trace_with(m).re));
    MeasurementVector::new(d, v)
}

/// `⟨⟨M|R|ρ⟩⟩`.
pub fn expectation(m: &MeasurementVector, r: &PauliTransferMatrix, rho: &StateVector) -> Result<f64> {
    if m.dim != r.dim || rho.dim != r.dim {
        return Err(Error::Dimension(format!(
            "expectation with d_M={}, d_R={}, d_rho={}",
            m.dim, r.dim, rho.dim
        )));
    }
    Ok(m.v.dot(&(&r.mat * &rho.v)))
}

/// PTM of `Λ1 ∘ Λ2` (matrix product).
pub fn compose(r1: &PauliTransferMatrix, r2: &PauliTransferMatrix) -> PauliTransferMatrix {
    assert_eq!(r1.dim, r2.dim, "composing PTMs of different dimension");
    PauliTransferMatrix { dim: r1.dim, mat: &r1.mat * &r2.mat }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dm(rows: &[[f64; 2]; 2]) -> DMatrix<C64> {
        DMatrix::from_fn(2, 2, |r, k| c(rows[r][k]))
    }

    fn x_gate() -> DMatrix<C64> {
        dm(&[[0.0, 1.0], [1.0, 0.0]])
    }

    #[test]
    fn kraus_x_gives_sign_flips() {
        let r = ptm_from_kraus(&KrausSet::unitary(x_gate()).unwrap()).unwrap();
        let want = PauliTransferMatrix::diagonal(2, &[1.0, 1.0, -1.0, -1.0]).unwrap();
        assert!(r.max_abs_diff(&want) < 1e-15);
    }

    #[test]
    fn kraus_identity_gives_identity() {
        let r = ptm_from_kraus(&KrausSet::unitary(DMatrix::identity(2, 2)).unwrap()).unwrap();
        assert!(r.max_abs_diff(&PauliTransferMatrix::identity(2)) < 1e-15);
    }

    #[test]
    fn kraus_dimension_mismatch_is_rejected() {
        let err = KrausSet::new(vec![DMatrix::identity(2, 2), DMatrix::identity(4, 4)]);
        assert!(matches!(err, Err(Error::Dimension(_))));
    }

    #[test]
    fn choi_of_identity_is_maximally_entangled_projector() {
        let choi = choi_from_ptm(&PauliTransferMatrix::identity(2));
        assert!((choi.trace() - 1.0).abs() < 1e-15);
        // (1/d) Σ_ij E_ij ⊗ E_ij: entries 1/2 at (0,0),(0,3),(3,0),(3,3).
        let mut want = DMatrix::<C64>::zeros(4, 4);
        for &(r, k) in &[(0, 0), (0, 3), (3, 0), (3, 3)] {
            want[(r, k)] = c(0.5);
        }
        assert!((choi.matrix() - want).norm() < 1e-15);
    }

    #[test]
    fn choi_of_full_depolarizer_is_maximally_mixed() {
        let r = PauliTransferMatrix::diagonal(2, &[1.0, 0.0, 0.0, 0.0]).unwrap();
        let ev = choi_from_ptm(&r).eigenvalues();
        for e in ev {
            assert!((e - 0.25).abs() < 1e-14);
        }
    }

    #[test]
    fn choi_of_x_channel_is_rank_one() {
        let r = PauliTransferMatrix::diagonal(2, &[1.0, 1.0, -1.0, -1.0]).unwrap();
        let ev = choi_from_ptm(&r).eigenvalues();
        assert!((ev[3] - 1.0).abs() < 1e-14);
        assert!(ev[..3].iter().all(|e| e.abs() < 1e-14));
        let back = ptm_from_choi(&choi_from_ptm(&r)).unwrap();
        assert!(back.max_abs_diff(&r) < 1e-14);
    }

    #[test]
    fn ptm_from_choi_rejects_non_hermitian() {
        let mut m = DMatrix::<C64>::identity(4, 4) * c(0.25);
        m[(0, 1)] = C64::new(0.0, 0.1);
        assert!(ChoiMatrix::new(2, m.clone()).is_err());
        let forced = ChoiMatrix { dim: 2, mat: m };
        assert!(matches!(ptm_from_choi(&forced), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn state_vectorization_examples() {
        let zero = vectorize_state(&dm(&[[1.0, 0.0], [0.0, 0.0]])).unwrap();
        assert_eq!(zero.vector().as_slice(), &[0.5, 0.0, 0.0, 0.5]);
        let mixed = vectorize_state(&dm(&[[0.5, 0.0], [0.0, 0.5]])).unwrap();
        assert_eq!(mixed.vector().as_slice(), &[0.5, 0.0, 0.0, 0.0]);
        let plus = vectorize_state(&dm(&[[0.5, 0.5], [0.5, 0.5]])).unwrap();
        assert_eq!(plus.vector().as_slice(), &[0.5, 0.5, 0.0, 0.0]);
    }

    #[test]
    fn measurement_vectorization_examples() {
        let z = vectorize_measurement(&dm(&[[1.0, 0.0], [0.0, -1.0]])).unwrap();
        assert_eq!(z.vector().as_slice(), &[0.0, 0.0, 0.0, 2.0]);
        let p0 = vectorize_measurement(&dm(&[[1.0, 0.0], [0.0, 0.0]])).unwrap();
        assert_eq!(p0.vector().as_slice(), &[1.0, 0.0, 0.0, 1.0]);
        let id = vectorize_measurement(&DMatrix::identity(2, 2)).unwrap();
        assert_eq!(id.vector().as_slice(), &[2.0, 0.0, 0.0, 0.0]);
        assert!((p0.operator_norm() - 1.0).abs() < 1e-14);
        assert_eq!(MeasurementVector::pauli_z(2).unwrap(), z);
    }

    #[test]
    fn expectation_examples() {
        let z = MeasurementVector::pauli_z(2).unwrap();
        let p0 = MeasurementVector::ground_projector(2).unwrap();
        let rho = StateVector::ground(2).unwrap();
        let id = PauliTransferMatrix::identity(2);
        let x = PauliTransferMatrix::diagonal(2, &[1.0, 1.0, -1.0, -1.0]).unwrap();
        assert!((expectation(&z, &id, &rho).unwrap() - 1.0).abs() < 1e-15);
        assert!((expectation(&z, &x, &rho).unwrap() + 1.0).abs() < 1e-15);
        let eps = 0.37;
        let dep = PauliTransferMatrix::diagonal(2, &[1.0, eps, eps, eps]).unwrap();
        assert!((expectation(&p0, &dep, &rho).unwrap() - (1.0 + eps) / 2.0).abs() < 1e-15);
    }

    #[test]
    fn expectation_rejects_mixed_dims() {
        let z = MeasurementVector::pauli_z(4).unwrap();
        let rho = StateVector::ground(2).unwrap();
        assert!(expectation(&z, &PauliTransferMatrix::identity(2), &rho).is_err());
    }

    #[test]
    fn compose_examples() {
        let x = PauliTransferMatrix::diagonal(2, &[1.0, 1.0, -1.0, -1.0]).unwrap();
        assert!(compose(&x, &x).max_abs_diff(&PauliTransferMatrix::identity(2)) < 1e-15);
        let a = PauliTransferMatrix::diagonal(2, &[1.0, 0.9, 0.9, 0.9]).unwrap();
        let b = PauliTransferMatrix::diagonal(2, &[1.0, 0.8, 0.8, 0.8]).unwrap();
        let ab = compose(&a, &b);
        let want = PauliTransferMatrix::diagonal(2, &[1.0, 0.72, 0.72, 0.72]).unwrap();
        assert!(ab.max_abs_diff(&want) < 1e-15);
    }

    #[test]
    fn json_round_trip_keeps_full_precision() {
        let r = PauliTransferMatrix::diagonal(2, &[1.0, 0.1 + 0.2, -1.0 / 3.0, std::f64::consts::PI]).unwrap();
        let s = serde_json::to_string(&r.to_json()).unwrap();
        let back = PauliTransferMatrix::from_json(&serde_json::from_str(&s).unwrap()).unwrap();
        assert_eq!(back, r);
        let choi = choi_from_ptm(&r);
        let s = serde_json::to_string(&choi.to_json()).unwrap();
        let back = ChoiMatrix::from_json(&serde_json::from_str(&s).unwrap()).unwrap();
        assert_eq!(back, choi);
    }

    #[test]
    fn json_rejects_other_orderings() {
        let mut j = PauliTransferMatrix::identity(2).to_json();
        j.order = "IZXY".into();
        assert!(PauliTransferMatrix::from_json(&j).is_err());
    }
}
