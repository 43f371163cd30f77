//! Synthetic measurement records for pair (QPT) and triple (gate-set)
//! experiments, the linear design matrix, and the record file format.
//!
//! A pair record `(i, j)` prepares with gate `i`, applies the channel under
//! test, and measures after gate `j`:
//! `m_ij = ⟨⟨M0|F_j Λ F_i|ρ0⟩⟩`. A triple record `(i, j, k)` applies library
//! gates `i`, `j`, `k` in that order: `m_ijk = ⟨⟨M0|F_k F_j F_i|ρ0⟩⟩`. Here
//! `F` are the faulty gates and each record carries Gaussian noise of
//! variance `noise_power`.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channels::{apply_error_model, ErrorModel, GateLibrary, LibraryJson};
use crate::error::{Error, Result};
use crate::random::{record_stream, standard_normal};
use crate::superop::{MeasurementVector, PauliTransferMatrix, StateVector};

/// Default noise power, labeled "experimental noise power" in configs.
pub const DEFAULT_NOISE_POWER: f64 = 1.7e-4;

/// One measured expectation value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub i: usize,
    pub j: usize,
    /// Third gate for triple experiments, `None` for pairs.
    pub k: Option<usize>,
    pub value: f64,
    pub noise_power: f64,
}

impl ExperimentRecord {
    pub fn pair(i: usize, j: usize, value: f64, noise_power: f64) -> Self {
        ExperimentRecord { i, j, k: None, value, noise_power }
    }

    pub fn triple(i: usize, j: usize, k: usize, value: f64, noise_power: f64) -> Self {
        ExperimentRecord { i, j, k: Some(k), value, noise_power }
    }

    pub fn is_triple(&self) -> bool {
        self.k.is_some()
    }

    pub fn indices(&self) -> Vec<usize> {
        match self.k {
            Some(k) => vec![self.i, self.j, k],
            None => vec![self.i, self.j],
        }
    }

    /// `|m| ≤ ‖M0‖ + 5√N`: values beyond this are almost surely corrupt.
    pub fn within_sanity_bound(&self, m0_norm: f64) -> bool {
        self.value.abs() <= m0_norm + 5.0 * self.noise_power.max(0.0).sqrt()
    }
}

/// Noise power per record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoisePower {
    Uniform(f64),
    /// One value per record in generation order.
    PerRecord(Vec<f64>),
}

impl NoisePower {
    fn at(&self, idx: usize) -> Result<f64> {
        match self {
            NoisePower::Uniform(n) => Ok(*n),
            NoisePower::PerRecord(v) => v.get(idx).copied().ok_or_else(|| {
                Error::InvalidParameter(format!("no noise power for record {idx} ({} given)", v.len()))
            }),
        }
    }

    fn validate(&self) -> Result<()> {
        let bad = match self {
            NoisePower::Uniform(n) => !(n.is_finite() && *n >= 0.0),
            NoisePower::PerRecord(v) => v.iter().any(|n| !(n.is_finite() && *n >= 0.0)),
        };
        if bad {
            return Err(Error::InvalidParameter("noise power must be finite and non-negative".into()));
        }
        Ok(())
    }
}

/// Everything needed to generate a dataset deterministically.
#[derive(Debug, Clone)]
pub struct ExperimentPlan {
    /// Ideal library, i.e. what the experimenter believes the gates are.
    pub library: GateLibrary,
    /// Errors attached to every gate, applied in order.
    pub errors: Vec<ErrorModel>,
    pub rho0: StateVector,
    pub m0: MeasurementVector,
    pub noise: NoisePower,
    pub seed: u64,
}

impl ExperimentPlan {
    /// Error-free plan with ground-state preparation, ground-state projector
    /// measurement, and the default noise power.
    pub fn new(library: GateLibrary) -> Self {
        let d = library.dim();
        ExperimentPlan {
            library,
            errors: Vec::new(),
            rho0: StateVector::ground(d).expect("library dim is valid"),
            m0: MeasurementVector::ground_projector(d).expect("library dim is valid"),
            noise: NoisePower::Uniform(DEFAULT_NOISE_POWER),
            seed: 0,
        }
    }

    pub fn with_error(mut self, model: ErrorModel) -> Self {
        self.errors.push(model);
        self
    }

    pub fn with_noise(mut self, n: f64) -> Self {
        self.noise = NoisePower::Uniform(n);
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_measurement(mut self, m0: MeasurementVector) -> Self {
        self.m0 = m0;
        self
    }

    pub fn with_state(mut self, rho0: StateVector) -> Self {
        self.rho0 = rho0;
        self
    }

    pub fn dim(&self) -> usize {
        self.library.dim()
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.dim();
        if self.rho0.dim() != d || self.m0.dim() != d {
            return Err(Error::Dimension(format!(
                "library d={d}, state d={}, measurement d={}",
                self.rho0.dim(),
                self.m0.dim()
            )));
        }
        check_state(&self.rho0)?;
        self.noise.validate()?;
        for e in &self.errors {
            e.validate()?;
        }
        Ok(())
    }

    /// The gates actually implemented: every error model attached in turn.
    pub fn faulty_library(&self) -> Result<GateLibrary> {
        let mut lib = self.library.clone();
        for e in &self.errors {
            lib = apply_error_model(&lib, e)?;
        }
        Ok(lib)
    }
}

/// Unit trace and positive semidefinite.
fn check_state(rho: &StateVector) -> Result<()> {
    let d = rho.dim() as f64;
    let v = rho.vector();
    if (v[0] - 1.0 / d).abs() > 1e-10 {
        return Err(Error::InvalidParameter(format!("initial state has trace {}", v[0] * d)));
    }
    // The operator is Σ_j v_j P_j, and it must be PSD.
    let b = crate::pauli::basis(rho.dim())?;
    let mut op = DMatrix::zeros(rho.dim(), rho.dim());
    for (coef, p) in v.iter().zip(&b.dense) {
        op += p * crate::pauli::C64::new(*coef, 0.0);
    }
    let min = op.symmetric_eigenvalues().min();
    if min < -1e-10 {
        return Err(Error::InvalidParameter(format!("initial state is not positive (eigenvalue {min:.3e})")));
    }
    Ok(())
}

fn noisy(value: f64, noise_power: f64, seed: u64, indices: &[usize]) -> f64 {
    if noise_power == 0.0 {
        return value;
    }
    let mut rng = record_stream(seed, indices);
    value + noise_power.sqrt() * standard_normal(&mut rng)
}

/// Pair experiments `m_ij = ⟨⟨M0|F_j Λ F_i|ρ0⟩⟩` on the faulty library,
/// in lexicographic `(i, j)` order.
pub fn simulate_pairs(plan: &ExperimentPlan, lambda: &PauliTransferMatrix) -> Result<Vec<ExperimentRecord>> {
    plan.validate()?;
    if lambda.dim() != plan.dim() {
        return Err(Error::Dimension(format!("channel d={} for library d={}", lambda.dim(), plan.dim())));
    }
    let faulty = plan.faulty_library()?;
    let n = faulty.len();
    let m0 = plan.m0.vector();
    // Prepared states and effective measurements, shared by all records.
    let prepared: Vec<DVector<f64>> = faulty.gates().iter().map(|g| lambda.matrix() * (g.matrix() * plan.rho0.vector())).collect();
    let measured: Vec<DVector<f64>> = faulty.gates().iter().map(|g| g.matrix().tr_mul(m0)).collect();
    (0..n * n)
        .into_par_iter()
        .map(|idx| {
            let (i, j) = (idx / n, idx % n);
            let np = plan.noise.at(idx)?;
            let exact = measured[j].dot(&prepared[i]);
            Ok(ExperimentRecord::pair(i, j, noisy(exact, np, plan.seed, &[i, j]), np))
        })
        .collect()
}

/// Triple experiments `m_ijk = ⟨⟨M0|F_k F_j F_i|ρ0⟩⟩` on the faulty
/// library: `N³` records in lexicographic `(i, j, k)` order.
pub fn simulate_triples(plan: &ExperimentPlan) -> Result<Vec<ExperimentRecord>> {
    plan.validate()?;
    let faulty = plan.faulty_library()?;
    let n = faulty.len();
    let m0 = plan.m0.vector();
    let prepared: Vec<DVector<f64>> = faulty.gates().iter().map(|g| g.matrix() * plan.rho0.vector()).collect();
    let measured: Vec<DVector<f64>> = faulty.gates().iter().map(|g| g.matrix().tr_mul(m0)).collect();
    (0..n * n * n)
        .into_par_iter()
        .map(|idx| {
            let (i, j, k) = (idx / (n * n), (idx / n) % n, idx % n);
            let np = plan.noise.at(idx)?;
            let exact = measured[k].dot(&(faulty.gate(j).matrix() * &prepared[i]));
            Ok(ExperimentRecord::triple(i, j, k, noisy(exact, np, plan.seed, &[i, j, k]), np))
        })
        .collect()
}

/// Noise-free triple values for an arbitrary library (no error models).
pub fn exact_triples(
    library: &GateLibrary,
    rho0: &StateVector,
    m0: &MeasurementVector,
) -> Vec<ExperimentRecord> {
    let n = library.len();
    let mut out = Vec::with_capacity(n * n * n);
    for i in 0..n {
        let a = library.gate(i).matrix() * rho0.vector();
        for j in 0..n {
            let b = library.gate(j).matrix() * &a;
            for k in 0..n {
                let v = m0.vector().dot(&(library.gate(k).matrix() * &b));
                out.push(ExperimentRecord::triple(i, j, k, v, 0.0));
            }
        }
    }
    out
}

/// Columns `s = vec(|M_j⟩⟩⟨⟨ρ_i|)` for every experiment, with the ideal
/// gates: `|ρ_i⟩⟩ = R_i|ρ0⟩⟩` and `⟨⟨M_j| = ⟨⟨M0|R_j`.
///
/// Vectorization is column-major, matching
/// [`PauliTransferMatrix::vectorize`], so `m = Sᵀ r` for the channel's `r`.
#[derive(Debug, Clone)]
pub struct DesignMatrix {
    pub dim: usize,
    /// `d⁴ × records`.
    pub s: DMatrix<f64>,
    /// `S` with column `j` divided by `√N_j` (equal to `S` when any noise
    /// power is zero, where the rescaling is undefined).
    pub s_scaled: DMatrix<f64>,
    /// Per-record factor applied to obtain `s_scaled` (and `m′`).
    pub weights: Vec<f64>,
}

impl DesignMatrix {
    /// Build from `(prep, meas)` gate indices and their noise powers.
    pub fn from_pairs(
        library: &GateLibrary,
        rho0: &StateVector,
        m0: &MeasurementVector,
        pairs: &[(usize, usize)],
        noise: &[f64],
    ) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::InvalidParameter("design matrix needs at least one record".into()));
        }
        if noise.len() != pairs.len() {
            return Err(Error::Dimension(format!("{} noise powers for {} records", noise.len(), pairs.len())));
        }
        let n = library.len();
        if let Some(&(i, j)) = pairs.iter().find(|(i, j)| *i >= n || *j >= n) {
            return Err(Error::InvalidParameter(format!("record ({i}, {j}) outside a library of {n} gates")));
        }
        let dim = library.dim();
        let d2 = dim * dim;
        let states: Vec<DVector<f64>> = library.gates().iter().map(|g| g.matrix() * rho0.vector()).collect();
        let meas: Vec<DVector<f64>> = library.gates().iter().map(|g| g.matrix().tr_mul(m0.vector())).collect();
        let mut s = DMatrix::zeros(d2 * d2, pairs.len());
        for (col, &(i, j)) in pairs.iter().enumerate() {
            let outer = &meas[j] * states[i].transpose();
            s.set_column(col, &DVector::from_column_slice(outer.as_slice()));
        }
        let weights: Vec<f64> = if noise.iter().all(|&n| n > 0.0) {
            noise.iter().map(|n| 1.0 / n.sqrt()).collect()
        } else {
            vec![1.0; noise.len()]
        };
        let mut s_scaled = s.clone();
        for (mut c, w) in s_scaled.column_iter_mut().zip(&weights) {
            c *= *w;
        }
        Ok(DesignMatrix { dim, s, s_scaled, weights })
    }

    pub fn records(&self) -> usize {
        self.s.ncols()
    }

    /// `m′ = m·w`.
    pub fn scale_values(&self, values: &[f64]) -> DVector<f64> {
        DVector::from_iterator(values.len(), values.iter().zip(&self.weights).map(|(m, w)| m * w))
    }

    /// `Sᵀ r`.
    pub fn predict(&self, r: &PauliTransferMatrix) -> DVector<f64> {
        self.s.tr_mul(&r.vectorize())
    }
}

/// Design matrix for pair records of `plan`, built from its ideal library.
pub fn build_design_matrix(plan: &ExperimentPlan, records: &[ExperimentRecord]) -> Result<DesignMatrix> {
    if let Some(r) = records.iter().find(|r| r.is_triple()) {
        return Err(Error::InvalidParameter(format!(
            "record ({}, {}, {:?}) is a triple; select one middle gate first",
            r.i, r.j, r.k
        )));
    }
    let pairs: Vec<(usize, usize)> = records.iter().map(|r| (r.i, r.j)).collect();
    let noise: Vec<f64> = records.iter().map(|r| r.noise_power).collect();
    DesignMatrix::from_pairs(&plan.library, &plan.rho0, &plan.m0, &pairs, &noise)
}

/// Triples with middle gate `g`, re-expressed as pair records `(i, k)`: the
/// standard QPT dataset for gate `g` embedded in a gate-set experiment.
pub fn pairs_for_gate(records: &[ExperimentRecord], g: usize) -> Vec<ExperimentRecord> {
    records
        .iter()
        .filter_map(|r| match r.k {
            Some(k) if r.j == g => Some(ExperimentRecord::pair(r.i, k, r.value, r.noise_power)),
            _ => None,
        })
        .collect()
}

/// Sidecar describing a record file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordMeta {
    pub dim: usize,
    pub labels: Vec<String>,
    /// Ideal library, when known.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub library: Option<LibraryJson>,
    /// `|ρ0⟩⟩` and `⟨⟨M0|` in the Pauli basis.
    pub rho0: Vec<f64>,
    pub m0: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub errors: Vec<ErrorModel>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub channel: Option<crate::superop::PtmJson>,
}

impl RecordMeta {
    pub fn from_plan(plan: &ExperimentPlan) -> Self {
        RecordMeta {
            dim: plan.dim(),
            labels: plan.library.labels().to_vec(),
            library: Some(plan.library.to_json()),
            rho0: plan.rho0.vector().iter().copied().collect(),
            m0: plan.m0.vector().iter().copied().collect(),
            seed: Some(plan.seed),
            errors: plan.errors.clone(),
            channel: None,
        }
    }

    pub fn state(&self) -> Result<StateVector> {
        StateVector::new(self.dim, DVector::from_vec(self.rho0.clone()))
    }

    pub fn measurement(&self) -> Result<MeasurementVector> {
        MeasurementVector::new(self.dim, DVector::from_vec(self.m0.clone()))
    }

    pub fn gate_library(&self) -> Result<Option<GateLibrary>> {
        self.library.as_ref().map(GateLibrary::from_json).transpose()
    }
}

/// `records.csv` → `records.meta.json`.
pub fn sidecar_path(path: &Path) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}.meta.json"))
}

/// CSV text: comment lines, header `i,j,k,m,noise_power`, one row per
/// record with `k` empty for pairs. Floats use the shortest representation
/// that parses back to the same value.
pub fn records_to_csv(records: &[ExperimentRecord], comments: &[String]) -> String {
    let mut out = String::new();
    for c in comments {
        out.push_str("# ");
        out.push_str(c);
        out.push('\n');
    }
    out.push_str("i,j,k,m,noise_power\n");
    for r in records {
        let k = r.k.map(|k| k.to_string()).unwrap_or_default();
        out.push_str(&format!("{},{},{},{:?},{:?}\n", r.i, r.j, k, r.value, r.noise_power));
    }
    out
}

/// Write records and their sidecar.
pub fn write_records(path: &Path, records: &[ExperimentRecord], meta: &RecordMeta) -> Result<()> {
    let comments = vec![format!("gateset-forge records, d={}, {} gates, {} rows", meta.dim, meta.labels.len(), records.len())];
    let mut f = fs::File::create(path)?;
    f.write_all(records_to_csv(records, &comments).as_bytes())?;
    fs::write(sidecar_path(path), serde_json::to_string_pretty(meta)?)?;
    Ok(())
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

/// Parse record CSV text. With a `repetitions` column the `noise_power`
/// column holds the single-shot variance and is divided by the repetitions.
/// Indices must be below `n_gates`.
pub fn parse_records(text: &str, n_gates: usize) -> Result<Vec<ExperimentRecord>> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes());
    let header = rdr.headers().map_err(|e| parse_err(e.position().map_or(1, |p| p.line() as usize), e.to_string()))?.clone();
    let names: Vec<&str> = header.iter().collect();
    let expected = ["i", "j", "k", "m", "noise_power"];
    let has_reps = match names.as_slice() {
        n if n == expected => false,
        [a @ .., "repetitions"] if a == expected => true,
        _ if names.iter().all(|n| n.is_empty()) => return Err(parse_err(1, "empty record file")),
        _ => {
            return Err(parse_err(
                header.position().map_or(1, |p| p.line() as usize),
                format!("expected header i,j,k,m,noise_power[,repetitions], found {}", names.join(",")),
            ))
        }
    };
    let width = if has_reps { 6 } else { 5 };
    let mut out = Vec::new();
    for row in rdr.records() {
        let row = row.map_err(|e| parse_err(e.position().map_or(0, |p| p.line() as usize), e.to_string()))?;
        let line = row.position().map_or(0, |p| p.line() as usize);
        if row.len() != width {
            return Err(parse_err(line, format!("expected {width} fields, found {}", row.len())));
        }
        let index = |f: usize, name: &str| -> Result<usize> {
            let v: usize = row[f].parse().map_err(|_| parse_err(line, format!("{name} = {:?} is not an index", &row[f])))?;
            if v >= n_gates {
                return Err(parse_err(line, format!("{name} = {v} out of range for a library of {n_gates} gates")));
            }
            Ok(v)
        };
        let number = |f: usize, name: &str| -> Result<f64> {
            let v: f64 = row[f].parse().map_err(|_| parse_err(line, format!("{name} = {:?} is not a number", &row[f])))?;
            if !v.is_finite() {
                return Err(parse_err(line, format!("{name} is not finite")));
            }
            Ok(v)
        };
        let i = index(0, "i")?;
        let j = index(1, "j")?;
        let k = if row[2].is_empty() { None } else { Some(index(2, "k")?) };
        let value = number(3, "m")?;
        let mut noise_power = number(4, "noise_power")?;
        if noise_power < 0.0 {
            return Err(parse_err(line, "noise_power must be non-negative"));
        }
        if has_reps {
            let reps = number(5, "repetitions")?;
            if !(reps >= 1.0) {
                return Err(parse_err(line, "repetitions must be at least 1"));
            }
            noise_power /= reps;
        }
        out.push(ExperimentRecord { i, j, k, value, noise_power });
    }
    if out.is_empty() {
        return Err(parse_err(1, "no records"));
    }
    Ok(out)
}

/// Read a record file and its sidecar, validating indices against the
/// declared library.
pub fn ingest_records(path: &Path) -> Result<(Vec<ExperimentRecord>, RecordMeta)> {
    let meta_path = sidecar_path(path);
    let meta: RecordMeta = serde_json::from_str(&fs::read_to_string(&meta_path).map_err(|e| {
        Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", meta_path.display())))
    })?)?;
    if meta.labels.is_empty() {
        return Err(Error::InvalidLibrary("sidecar declares no gates".into()));
    }
    let text = fs::read_to_string(path)?;
    let records = parse_records(&text, meta.labels.len())?;
    if let Ok(m0) = meta.measurement() {
        let norm = m0.operator_norm();
        let bad = records.iter().filter(|r| !r.within_sanity_bound(norm)).count();
        if bad > 0 {
            log::warn!("{bad} records exceed |m| ≤ ‖M0‖ + 5√N");
        }
    }
    Ok((records, meta))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{standard_library, LibraryName};

    #[test]
    fn identity_on_identity_library_gives_one() {
        let lib = GateLibrary::new(vec!["I".into()], vec![PauliTransferMatrix::identity(2)]).unwrap();
        let plan = ExperimentPlan::new(lib).with_noise(0.0);
        let recs = simulate_pairs(&plan, &PauliTransferMatrix::identity(2)).unwrap();
        assert_eq!(recs.len(), 1);
        assert!((recs[0].value - 1.0).abs() < 1e-15);
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let plan = ExperimentPlan::new(standard_library(LibraryName::Tetrahedral)).with_seed(3);
        let recs = simulate_triples(&plan).unwrap();
        let text = records_to_csv(&recs, &["note".into()]);
        let back = parse_records(&text, 4).unwrap();
        assert_eq!(back, recs);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let text = "# c\ni,j,k,m,noise_power\n0,1,,0.5,0\n0,9,,0.5,0\n";
        match parse_records(text, 4) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("{other:?}"),
        }
        match parse_records("i,j,k,m,noise_power\n0,x,,1,0\n", 2) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_records("", 2), Err(Error::Parse { .. })));
    }

    #[test]
    fn repetitions_divide_the_variance() {
        let text = "i,j,k,m,noise_power,repetitions\n0,0,,0.9,0.25,1000\n";
        let r = parse_records(text, 1).unwrap();
        assert!((r[0].noise_power - 0.25 / 1000.0).abs() < 1e-18);
    }
}
