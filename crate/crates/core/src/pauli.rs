//! The n-qubit Pauli basis, ordered `I, X, Y, Z` per qubit with the first
//! qubit as the most significant digit.
//!
//! Every Pauli tensor product has exactly one nonzero entry per row, so the
//! basis is stored in monomial form and only expanded to dense matrices when
//! a caller asks for them.

use std::sync::OnceLock;

use nalgebra::{Complex, DMatrix};

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;

/// Largest supported number of qubits.
pub const MAX_QUBITS: usize = 3;

/// Per-qubit ordering string recorded in serialized artifacts.
pub const ORDER: &str = "IXYZ";

/// A matrix with one nonzero per row: row `r` holds `phases[r]` at column `cols[r]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Monomial {
    pub cols: Vec<usize>,
    pub phases: Vec<C64>,
}

impl Monomial {
    fn single(label: usize) -> Self {
        let one = C64::new(1.0, 0.0);
        let i = C64::new(0.0, 1.0);
        match label {
            0 => Monomial { cols: vec![0, 1], phases: vec![one, one] },
            1 => Monomial { cols: vec![1, 0], phases: vec![one, one] },
            2 => Monomial { cols: vec![1, 0], phases: vec![-i, i] },
            3 => Monomial { cols: vec![0, 1], phases: vec![one, -one] },
            _ => unreachable!("single-qubit Pauli label out of range"),
        }
    }

    pub fn dim(&self) -> usize {
        self.cols.len()
    }

    pub fn kron(&self, other: &Monomial) -> Monomial {
        let (da, db) = (self.dim(), other.dim());
        let mut cols = Vec::with_capacity(da * db);
        let mut phases = Vec::with_capacity(da * db);
        for ra in 0..da {
            for rb in 0..db {
                cols.push(self.cols[ra] * db + other.cols[rb]);
                phases.push(self.phases[ra] * other.phases[rb]);
            }
        }
        Monomial { cols, phases }
    }

    pub fn transpose(&self) -> Monomial {
        let d = self.dim();
        let mut cols = vec![0; d];
        let mut phases = vec![C64::new(0.0, 0.0); d];
        for r in 0..d {
            cols[self.cols[r]] = r;
            phases[self.cols[r]] = self.phases[r];
        }
        Monomial { cols, phases }
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        let d = self.dim();
        let mut m = DMatrix::zeros(d, d);
        for r in 0..d {
            m[(r, self.cols[r])] = self.phases[r];
        }
        m
    }

    /// `Tr(A · self)` for a dense square `A`.
    pub fn trace_with(&self, a: &DMatrix<C64>) -> C64 {
        // Tr(A P) = sum_r (A P)_{rr}; (A P)_{rr} = sum_c A[r, c] P[c, r].
        // P[c, cols[c]] = phases[c], so P[c, r] != 0 iff cols[c] == r.
        (0..self.dim())
            .map(|c| a[(self.cols[c], c)] * self.phases[c])
            .sum()
    }
}

/// Cached basis data for one qubit count.
#[derive(Debug)]
pub struct PauliBasis {
    pub dim: usize,
    pub elements: Vec<Monomial>,
    pub dense: Vec<DMatrix<C64>>,
    /// `choi_terms[i * d² + j] = P_jᵀ ⊗ P_i`.
    pub choi_terms: Vec<Monomial>,
}

impl PauliBasis {
    fn build(qubits: usize) -> Self {
        let mut elements = vec![Monomial { cols: vec![0], phases: vec![C64::new(1.0, 0.0)] }];
        for _ in 0..qubits {
            elements = elements
                .iter()
                .flat_map(|e| (0..4).map(move |l| e.kron(&Monomial::single(l))))
                .collect();
        }
        let dim = 1 << qubits;
        let n = dim * dim;
        let dense = elements.iter().map(Monomial::to_dense).collect();
        let transposed: Vec<Monomial> = elements.iter().map(Monomial::transpose).collect();
        let mut choi_terms = Vec::with_capacity(n * n);
        for i in 0..n {
            for tj in &transposed {
                choi_terms.push(tj.kron(&elements[i]));
            }
        }
        PauliBasis { dim, elements, dense, choi_terms }
    }

    /// Number of basis elements, `d²`.
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }
}

/// Number of qubits for a Hilbert-space dimension, validating that it is supported.
pub fn qubits_for_dim(dim: usize) -> Result<usize> {
    if dim < 2 || !dim.is_power_of_two() {
        return Err(Error::UnsupportedDim(dim));
    }
    let n = dim.trailing_zeros() as usize;
    if n > MAX_QUBITS {
        return Err(Error::UnsupportedDim(dim));
    }
    Ok(n)
}

static CACHE: [OnceLock<PauliBasis>; MAX_QUBITS] = [OnceLock::new(), OnceLock::new(), OnceLock::new()];

/// Shared basis for dimension `dim`.
pub fn basis(dim: usize) -> Result<&'static PauliBasis> {
    let n = qubits_for_dim(dim)?;
    Ok(CACHE[n - 1].get_or_init(|| PauliBasis::build(n)))
}

/// Label of basis element `index`, e.g. `"XZ"`.
pub fn label(dim: usize, index: usize) -> String {
    let n = dim.trailing_zeros() as usize;
    let chars: Vec<char> = ORDER.chars().collect();
    (0..n)
        .map(|q| chars[(index >> (2 * (n - 1 - q))) & 3])
        .collect()
}
