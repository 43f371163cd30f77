//! Named error channels, standard SPAM gate libraries, error-model
//! application, and twirling over a gate library.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector, Matrix3, Vector3};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::avg_gate_fidelity_error;
use crate::pauli::C64;
use crate::random::{derive_seed, random_axis};
use crate::superop::{
    ptm_from_kraus, KrausSet, MeasurementVector, PauliTransferMatrix, PtmJson, PHYSICALITY_TOL,
};

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// `diag(1, ε, …, ε)`.
///
/// Complete positivity needs `ε ∈ [−1/(d²−1), 1]`; values below zero are
/// accepted with a warning since they only show up in analysis.
pub fn depolarizing(dim: usize, eps: f64) -> Result<PauliTransferMatrix> {
    let n = dim * dim;
    let lower = -1.0 / (n as f64 - 1.0);
    if !(lower..=1.0).contains(&eps) {
        return Err(Error::InvalidParameter(format!(
            "depolarizing parameter {eps} outside [{lower}, 1]"
        )));
    }
    if eps < 0.0 {
        log::warn!("depolarizing parameter {eps} < 0 describes an over-depolarizing map");
    }
    let mut diag = vec![eps; n];
    diag[0] = 1.0;
    PauliTransferMatrix::diagonal(dim, &diag)
}

fn check_unit_interval(name: &str, v: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&v) {
        return Err(Error::InvalidParameter(format!("{name} = {v} outside [0, 1]")));
    }
    Ok(())
}

/// Qubit amplitude damping with Kraus pair `{[[1,0],[0,√(1−γ)]], [[0,√γ],[0,0]]}`.
pub fn amplitude_damping(gamma: f64) -> Result<PauliTransferMatrix> {
    check_unit_interval("gamma", gamma)?;
    let a0 = DMatrix::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), c((1.0 - gamma).sqrt())]);
    let a1 = DMatrix::from_row_slice(2, 2, &[c(0.0), c(gamma.sqrt()), c(0.0), c(0.0)]);
    ptm_from_kraus(&KrausSet::new(vec![a0, a1])?)
}

/// Qubit dephasing with Kraus pair `{√(1−λ/2) 𝕀, √(λ/2) Z}`, giving
/// `diag(1, 1−λ, 1−λ, 1)`.
pub fn dephasing(lambda: f64) -> Result<PauliTransferMatrix> {
    check_unit_interval("lambda", lambda)?;
    let a0 = DMatrix::<C64>::identity(2, 2) * c((1.0 - lambda / 2.0).sqrt());
    let a1 = DMatrix::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), c(-1.0)]) * c((lambda / 2.0).sqrt());
    ptm_from_kraus(&KrausSet::new(vec![a0, a1])?)
}

/// `exp(−iθ n·σ/2)`.
pub fn rotation_unitary(axis: &Vector3<f64>, angle: f64) -> Result<DMatrix<C64>> {
    let norm = axis.norm();
    if (norm - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidParameter(format!("rotation axis must be a unit vector (norm {norm})")));
    }
    let (s, co) = (angle / 2.0).sin_cos();
    let (x, y, z) = (axis[0], axis[1], axis[2]);
    // cos(θ/2) 𝕀 − i sin(θ/2)(x X + y Y + z Z)
    Ok(DMatrix::from_row_slice(
        2,
        2,
        &[
            C64::new(co, -s * z),
            C64::new(-s * y, -s * x),
            C64::new(s * y, -s * x),
            C64::new(co, s * z),
        ],
    ))
}

/// PTM of the qubit rotation `exp(−iθ n·σ/2)`; its lower block is the
/// right-handed 3D rotation by `θ` about `n`.
pub fn rotation(axis: &Vector3<f64>, angle: f64) -> Result<PauliTransferMatrix> {
    ptm_from_kraus(&KrausSet::unitary(rotation_unitary(axis, angle)?)?)
}

/// Axis and angle (in `[0, π]`) of a qubit unitary PTM's Bloch rotation.
/// The identity returns the `z` axis with angle zero.
pub fn rotation_axis_angle(r: &PauliTransferMatrix) -> Result<(Vector3<f64>, f64)> {
    if r.dim() != 2 {
        return Err(Error::UnsupportedDim(r.dim()));
    }
    if !r.is_orthogonal(1e-9) {
        return Err(Error::NonUnitaryTarget(r.orthogonality_deviation()));
    }
    let m = Matrix3::from_fn(|i, j| r.get(i + 1, j + 1));
    let cos = ((m.trace() - 1.0) / 2.0).clamp(-1.0, 1.0);
    let angle = cos.acos();
    if angle < 1e-12 {
        return Ok((Vector3::z(), 0.0));
    }
    let anti = Vector3::new(m[(2, 1)] - m[(1, 2)], m[(0, 2)] - m[(2, 0)], m[(1, 0)] - m[(0, 1)]);
    if anti.norm() > 1e-6 {
        return Ok((anti.normalize(), angle));
    }
    // Near π: M + 𝕀 = 2 n nᵀ; take the largest column.
    let sym = m + Matrix3::identity();
    let col = (0..3)
        .map(|k| sym.column(k).into_owned())
        .max_by(|a, b| a.norm().total_cmp(&b.norm()))
        .expect("three columns");
    Ok((col.normalize(), angle))
}

/// Ordered, labeled set of gates.
#[derive(Debug, Clone, PartialEq)]
pub struct GateLibrary {
    dim: usize,
    labels: Vec<String>,
    gates: Vec<PauliTransferMatrix>,
}

impl GateLibrary {
    pub fn new(labels: Vec<String>, gates: Vec<PauliTransferMatrix>) -> Result<Self> {
        if gates.is_empty() {
            return Err(Error::InvalidLibrary("library must contain at least one gate".into()));
        }
        if labels.len() != gates.len() {
            return Err(Error::InvalidLibrary(format!(
                "{} labels for {} gates",
                labels.len(),
                gates.len()
            )));
        }
        let dim = gates[0].dim();
        for (l, g) in labels.iter().zip(&gates) {
            if g.dim() != dim {
                return Err(Error::InvalidLibrary(format!("gate {l} has dimension {}", g.dim())));
            }
            if !g.is_trace_preserving(PHYSICALITY_TOL) {
                return Err(Error::InvalidLibrary(format!(
                    "gate {l} is not trace preserving (first-row deviation {:.3e})",
                    g.first_row_deviation()
                )));
            }
        }
        Ok(GateLibrary { dim, labels, gates })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn gates(&self) -> &[PauliTransferMatrix] {
        &self.gates
    }

    pub fn gate(&self, i: usize) -> &PauliTransferMatrix {
        &self.gates[i]
    }

    /// Apply `f` to every gate, keeping labels.
    pub fn map_gates<F>(&self, mut f: F) -> Result<GateLibrary>
    where
        F: FnMut(usize, &PauliTransferMatrix) -> Result<PauliTransferMatrix>,
    {
        let gates = self
            .gates
            .iter()
            .enumerate()
            .map(|(i, g)| f(i, g))
            .collect::<Result<Vec<_>>>()?;
        GateLibrary::new(self.labels.clone(), gates)
    }

    /// `R_Uᵀ G R_U` for every gate.
    pub fn conjugate_by(&self, u: &PauliTransferMatrix) -> GateLibrary {
        GateLibrary {
            dim: self.dim,
            labels: self.labels.clone(),
            gates: self.gates.iter().map(|g| g.conjugate_by(u)).collect(),
        }
    }

    pub fn to_json(&self) -> LibraryJson {
        LibraryJson {
            dim: self.dim,
            labels: self.labels.clone(),
            gates: self.gates.iter().map(PauliTransferMatrix::to_json).collect(),
        }
    }

    pub fn from_json(j: &LibraryJson) -> Result<Self> {
        let gates = j
            .gates
            .iter()
            .map(PauliTransferMatrix::from_json)
            .collect::<Result<Vec<_>>>()?;
        let lib = GateLibrary::new(j.labels.clone(), gates)?;
        if lib.dim != j.dim {
            return Err(Error::InvalidLibrary(format!(
                "declared dim {} but gates have dim {}",
                j.dim, lib.dim
            )));
        }
        Ok(lib)
    }
}

/// Wire form `{dim, labels, gates}`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct LibraryJson {
    pub dim: usize,
    pub labels: Vec<String>,
    pub gates: Vec<PtmJson>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LibraryName {
    Tetrahedral,
    CardinalSix,
    Clifford12,
    Clifford24,
}

impl LibraryName {
    pub const ALL: [LibraryName; 4] = [
        LibraryName::Tetrahedral,
        LibraryName::CardinalSix,
        LibraryName::Clifford12,
        LibraryName::Clifford24,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            LibraryName::Tetrahedral => "tetrahedral",
            LibraryName::CardinalSix => "cardinal-six",
            LibraryName::Clifford12 => "clifford-12",
            LibraryName::Clifford24 => "clifford-24",
        }
    }
}

impl fmt::Display for LibraryName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for LibraryName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        LibraryName::ALL
            .into_iter()
            .find(|n| n.as_str() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown library {s:?}")))
    }
}

fn rot(axis: [f64; 3], angle: f64) -> PauliTransferMatrix {
    let a = Vector3::from(axis).normalize();
    rotation(&a, angle).expect("unit axis")
}

/// Geodesic rotation taking `ẑ` to the unit vector `v`.
fn geodesic_from_z(v: &Vector3<f64>) -> PauliTransferMatrix {
    let z = Vector3::z();
    let cross = z.cross(v);
    let angle = z.dot(v).clamp(-1.0, 1.0).acos();
    if cross.norm() < 1e-12 {
        if angle < 1e-12 {
            return PauliTransferMatrix::identity(2);
        }
        return rot([1.0, 0.0, 0.0], PI);
    }
    rotation(&cross.normalize(), angle).expect("unit axis")
}

/// One of the four single-qubit SPAM libraries.
pub fn standard_library(name: LibraryName) -> GateLibrary {
    let mut labels = Vec::new();
    let mut gates = Vec::new();
    let mut push = |l: &str, g: PauliTransferMatrix| {
        labels.push(l.to_string());
        gates.push(g);
    };
    match name {
        LibraryName::Tetrahedral => {
            let polar = (-1.0f64 / 3.0).acos();
            push("T0", PauliTransferMatrix::identity(2));
            for (k, az) in [0.0, 2.0 * PI / 3.0, 4.0 * PI / 3.0].into_iter().enumerate() {
                let v = Vector3::new(polar.sin() * az.cos(), polar.sin() * az.sin(), polar.cos());
                push(&format!("T{}", k + 1), geodesic_from_z(&v));
            }
        }
        LibraryName::CardinalSix => {
            push("I", PauliTransferMatrix::identity(2));
            push("X180", rot([1.0, 0.0, 0.0], PI));
            push("Y90", rot([0.0, 1.0, 0.0], PI / 2.0));
            push("Y-90", rot([0.0, 1.0, 0.0], -PI / 2.0));
            push("X-90", rot([1.0, 0.0, 0.0], -PI / 2.0));
            push("X90", rot([1.0, 0.0, 0.0], PI / 2.0));
        }
        LibraryName::Clifford12 | LibraryName::Clifford24 => {
            let full = name == LibraryName::Clifford24;
            push("I", PauliTransferMatrix::identity(2));
            for (axis, n) in [([1.0, 0.0, 0.0], "X"), ([0.0, 1.0, 0.0], "Y"), ([0.0, 0.0, 1.0], "Z")] {
                push(&format!("{n}180"), rot(axis, PI));
                if full {
                    push(&format!("{n}90"), rot(axis, PI / 2.0));
                    push(&format!("{n}-90"), rot(axis, -PI / 2.0));
                }
            }
            for (axis, n) in [
                ([1.0, 1.0, 1.0], "+++"),
                ([1.0, -1.0, -1.0], "+--"),
                ([-1.0, 1.0, -1.0], "-+-"),
                ([-1.0, -1.0, 1.0], "--+"),
            ] {
                push(&format!("C{n}120"), rot(axis, 2.0 * PI / 3.0));
                push(&format!("C{n}-120"), rot(axis, -2.0 * PI / 3.0));
            }
            if full {
                for (axis, n) in [
                    ([1.0, 1.0, 0.0], "XY"),
                    ([1.0, -1.0, 0.0], "X-Y"),
                    ([1.0, 0.0, 1.0], "XZ"),
                    ([1.0, 0.0, -1.0], "X-Z"),
                    ([0.0, 1.0, 1.0], "YZ"),
                    ([0.0, 1.0, -1.0], "Y-Z"),
                ] {
                    push(&format!("E{n}180"), rot(axis, PI));
                }
            }
        }
    }
    GateLibrary::new(labels, gates).expect("standard libraries are valid")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ErrorKind {
    Depolarizing,
    AmplitudeDamping,
    Dephasing,
    OverRotation,
    Detuning,
    RandomUnitaryPerGate,
    GlobalUnitary,
}

impl ErrorKind {
    pub const ALL: [ErrorKind; 7] = [
        ErrorKind::RandomUnitaryPerGate,
        ErrorKind::GlobalUnitary,
        ErrorKind::Detuning,
        ErrorKind::OverRotation,
        ErrorKind::AmplitudeDamping,
        ErrorKind::Dephasing,
        ErrorKind::Depolarizing,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            ErrorKind::Depolarizing => "depolarizing",
            ErrorKind::AmplitudeDamping => "amplitude-damping",
            ErrorKind::Dephasing => "dephasing",
            ErrorKind::OverRotation => "over-rotation",
            ErrorKind::Detuning => "detuning",
            ErrorKind::RandomUnitaryPerGate => "random-unitary-per-gate",
            ErrorKind::GlobalUnitary => "global-unitary",
        }
    }

    pub fn is_coherent(&self) -> bool {
        matches!(
            self,
            ErrorKind::OverRotation | ErrorKind::Detuning | ErrorKind::RandomUnitaryPerGate | ErrorKind::GlobalUnitary
        )
    }

    pub fn is_random(&self) -> bool {
        matches!(self, ErrorKind::RandomUnitaryPerGate | ErrorKind::GlobalUnitary)
    }
}

impl fmt::Display for ErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ErrorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ErrorKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown error model {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Placement {
    PreGate,
    #[default]
    PostGate,
}

/// Systematic error attached to every gate of a library.
///
/// `strength` is the size of the error, zero meaning no error: `1 − ε` for
/// depolarizing, `γ` and `λ` for amplitude damping and dephasing, the
/// fractional angle excess for over-rotation, and a rotation angle in
/// radians for the detuning and unitary kinds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorModel {
    pub kind: ErrorKind,
    pub strength: f64,
    #[serde(default)]
    pub placement: Placement,
    #[serde(default)]
    pub seed: u64,
}

impl ErrorModel {
    pub fn new(kind: ErrorKind, strength: f64) -> Self {
        ErrorModel { kind, strength, placement: Placement::PostGate, seed: 0 }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_placement(mut self, placement: Placement) -> Self {
        self.placement = placement;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !self.strength.is_finite() || self.strength < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "{} strength must be finite and non-negative, got {}",
                self.kind, self.strength
            )));
        }
        match self.kind {
            ErrorKind::Depolarizing | ErrorKind::AmplitudeDamping | ErrorKind::Dephasing => {
                check_unit_interval(self.kind.as_str(), self.strength)
            }
            _ => Ok(()),
        }
    }

    /// Error map for gate `index` of `ideal`.
    pub fn error_map(&self, ideal: &GateLibrary, index: usize) -> Result<PauliTransferMatrix> {
        self.validate()?;
        let s = self.strength;
        let dim = ideal.dim();
        let qubit_only = || {
            if dim != 2 {
                Err(Error::InvalidParameter(format!("{} is only defined for a single qubit", self.kind)))
            } else {
                Ok(())
            }
        };
        match self.kind {
            ErrorKind::Depolarizing => depolarizing(dim, 1.0 - s),
            ErrorKind::AmplitudeDamping => {
                qubit_only()?;
                amplitude_damping(s)
            }
            ErrorKind::Dephasing => {
                qubit_only()?;
                dephasing(s)
            }
            ErrorKind::OverRotation => {
                qubit_only()?;
                let (axis, angle) = rotation_axis_angle(ideal.gate(index))?;
                rotation(&axis, s * angle)
            }
            ErrorKind::Detuning => {
                qubit_only()?;
                rotation(&Vector3::z(), s)
            }
            ErrorKind::RandomUnitaryPerGate => {
                qubit_only()?;
                let mut rng = ChaCha20Rng::seed_from_u64(derive_seed(self.seed, &[index]));
                rotation(&random_axis(&mut rng), s)
            }
            ErrorKind::GlobalUnitary => {
                qubit_only()?;
                let mut rng = ChaCha20Rng::seed_from_u64(self.seed);
                rotation(&random_axis(&mut rng), s)
            }
        }
    }
}

/// Attach `model`'s error to every gate.
pub fn apply_error_model(ideal: &GateLibrary, model: &ErrorModel) -> Result<GateLibrary> {
    ideal.map_gates(|i, g| {
        let e = model.error_map(ideal, i)?;
        Ok(match model.placement {
            Placement::PostGate => e.compose(g),
            Placement::PreGate => g.compose(&e),
        })
    })
}

/// Mean average-gate-fidelity error of `faulty` against the unitary `ideal` gates.
pub fn mean_gate_error(ideal: &GateLibrary, faulty: &GateLibrary) -> Result<f64> {
    let total = ideal
        .gates()
        .iter()
        .zip(faulty.gates())
        .map(|(t, g)| avg_gate_fidelity_error(g, t))
        .sum::<Result<f64>>()?;
    Ok(total / ideal.len() as f64)
}

/// Strength at which `kind` produces a mean gate error of `target` on
/// `ideal`, found by bisection on the realized error.
pub fn strength_for_gate_error(kind: ErrorKind, target: f64, ideal: &GateLibrary, placement: Placement) -> Result<f64> {
    if !(target > 0.0) {
        return Ok(0.0);
    }
    let err_at = |s: f64| -> Result<f64> {
        let m = ErrorModel { kind, strength: s, placement, seed: 0 };
        mean_gate_error(ideal, &apply_error_model(ideal, &m)?)
    };
    let cap = match kind {
        ErrorKind::Depolarizing | ErrorKind::AmplitudeDamping | ErrorKind::Dephasing => 1.0,
        ErrorKind::OverRotation => 1.0,
        _ => PI,
    };
    if err_at(cap)? < target {
        return Err(Error::InvalidParameter(format!(
            "gate error {target} is out of reach for {kind} (max {:.3e})",
            err_at(cap)?
        )));
    }
    let (mut lo, mut hi) = (0.0f64, cap);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if err_at(mid)? < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Numerical twirl `(1/N) Σ_g R_gᵀ A R_g` together with whether the library
/// passed the 2-design test (in which case the output equals
/// [`twirl_closed_form`]).
#[derive(Debug, Clone)]
pub struct TwirlResult {
    pub output: DMatrix<f64>,
    pub two_design: bool,
}

pub fn twirl_sum(a: &DMatrix<f64>, lib: &GateLibrary) -> Result<DMatrix<f64>> {
    let n = lib.dim() * lib.dim();
    if a.nrows() != n || a.ncols() != n {
        return Err(Error::Dimension(format!("twirl argument must be {n}x{n}")));
    }
    let mut acc = DMatrix::zeros(n, n);
    for g in lib.gates() {
        acc += g.matrix().transpose() * a * g.matrix();
    }
    Ok(acc / lib.len() as f64)
}

pub fn twirl(a: &DMatrix<f64>, lib: &GateLibrary) -> Result<TwirlResult> {
    Ok(TwirlResult { output: twirl_sum(a, lib)?, two_design: is_two_design(lib)? })
}

/// Haar-average form
/// `|I⟩⟩⟨⟨I| A_00 + (𝕀 − |I⟩⟩⟨⟨I|)(Tr A − A_00)/(d² − 1)`.
pub fn twirl_closed_form(a: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    let a00 = a[(0, 0)];
    let rest = (a.trace() - a00) / (n as f64 - 1.0);
    let mut diag = DVector::from_element(n, rest);
    diag[0] = a00;
    DMatrix::from_diagonal(&diag)
}

fn generic_test_matrix(n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |i, j| ((1 + i * n + j) as f64 * 0.754_877_666).sin() + 0.3 * ((i + 2 * j) as f64).cos())
}

/// Whether twirling a fixed generic matrix over `lib` reproduces the closed form to 1e-10.
pub fn is_two_design(lib: &GateLibrary) -> Result<bool> {
    let a = generic_test_matrix(lib.dim() * lib.dim());
    let num = twirl_sum(&a, lib)?;
    Ok((num - twirl_closed_form(&a)).amax() <= 1e-10)
}

/// Depolarizing-equivalent description `(α, ε)` of a constant SPAM error
/// `R_E` seen through measurement `M0` on a 2-design.
pub fn depolarizing_equivalent(m0: &MeasurementVector, e: &PauliTransferMatrix) -> Result<(f64, f64)> {
    if m0.dim() != e.dim() {
        return Err(Error::Dimension("measurement and error map dimensions differ".into()));
    }
    let m = m0.vector();
    let i_m = m[0];
    if i_m.abs() < 1e-12 {
        return Err(Error::Inapplicable("measurement operator is traceless (⟨⟨I|M0⟩⟩ = 0)".into()));
    }
    let re = e.matrix();
    let m_e_i = m.dot(&re.column(0));
    if m_e_i.abs() < 1e-12 {
        return Err(Error::Inapplicable("⟨⟨M0|R_E|I⟩⟩ = 0".into()));
    }
    let denom = m.dot(m) / (i_m * i_m) - 1.0;
    if denom.abs() < 1e-12 {
        return Err(Error::Inapplicable("measurement operator is proportional to the identity".into()));
    }
    let m_e_m = m.dot(&(re * m));
    let eps = (m_e_m / (m_e_i * i_m) - 1.0) / denom;
    let alpha = m_e_i / i_m;
    Ok((alpha, eps))
}
