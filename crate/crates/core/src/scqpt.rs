//! Self-consistent estimation of a whole gate library from triple
//! experiments.
//!
//! Every implemented gate is modeled as `R̃_E_g R_g` with a CPTP error map
//! `R̃_E_g` and the known ideal gate `R_g`. Linearizing the triple sequence
//! about `R̃_E = I` turns the likelihood into a least-squares problem over
//! all error maps jointly, solved under the CPTP constraint by accelerated
//! projected gradient.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, Vector3};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channels::{rotation, GateLibrary};
use crate::error::{Error, Result};
use crate::metrics::{avg_gate_fidelity_error, diamond_distance, library_distance, Metric};
use crate::optim::{accelerated_projected_gradient, ApgOptions, QuadraticObjective};
use crate::qpt::project_cptp;
use crate::sim::ExperimentRecord;
use crate::superop::{MeasurementVector, PauliTransferMatrix, PtmJson, StateVector};

/// Relative objective change that stops the projected-gradient solve.
pub const SOLVE_TOL: f64 = 1e-12;
pub const SOLVE_MAX_ITER: usize = 200_000;
/// Grid points of the gauge scan before golden-section refinement.
pub const GAUGE_GRID: usize = 720;
pub const GAUGE_TOL: f64 = 1e-10;

/// `min ‖A x − b‖²` with `x` the stacked column-major error-map PTMs.
#[derive(Debug, Clone)]
pub struct LinearizedSystem {
    pub dim: usize,
    pub n_gates: usize,
    /// One row per triple record.
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
    /// `(i, j, k)` of each row.
    pub rows: Vec<(usize, usize, usize)>,
    /// Row scaling `1/√N` (all ones when some noise power is zero).
    pub weights: Vec<f64>,
}

impl LinearizedSystem {
    /// Width of one gate's column block, `d⁴`.
    pub fn block_len(&self) -> usize {
        let n = self.dim * self.dim;
        n * n
    }

    pub fn objective(&self, x: &DVector<f64>) -> f64 {
        (&self.a * x - &self.b).norm_squared()
    }

    /// `2Aᵀ(Ax − b)`.
    pub fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        self.a.tr_mul(&(&self.a * x - &self.b)) * 2.0
    }

    /// Stack error maps into the unknown vector.
    pub fn stack(&self, maps: &[PauliTransferMatrix]) -> DVector<f64> {
        let bl = self.block_len();
        let mut x = DVector::zeros(self.n_gates * bl);
        for (g, m) in maps.iter().enumerate() {
            x.rows_mut(g * bl, bl).copy_from(&m.vectorize());
        }
        x
    }

    pub fn unstack(&self, x: &DVector<f64>) -> Result<Vec<PauliTransferMatrix>> {
        let bl = self.block_len();
        (0..self.n_gates)
            .map(|g| PauliTransferMatrix::from_vectorized(self.dim, &x.rows(g * bl, bl).into_owned()))
            .collect()
    }
}

/// Linearized system for triple records against the ideal library.
///
/// Row `(i, j, k)` has right-hand side `m_ijk + 2⟨⟨M0|R_k R_j R_i|ρ0⟩⟩` and
/// coefficients from the three placements of an error map in
/// `⟨⟨M0|X_k R_k X_j R_j X_i R_i|ρ0⟩⟩`, keeping one `X` at a time. Missing
/// triples simply contribute no row.
pub fn build_linearized_system(
    records: &[ExperimentRecord],
    ideal: &GateLibrary,
    rho0: &StateVector,
    m0: &MeasurementVector,
) -> Result<LinearizedSystem> {
    let dim = ideal.dim();
    if rho0.dim() != dim || m0.dim() != dim {
        return Err(Error::Dimension(format!(
            "library d={dim}, state d={}, measurement d={}",
            rho0.dim(),
            m0.dim()
        )));
    }
    let n = ideal.len();
    let mut rows = Vec::with_capacity(records.len());
    for r in records {
        let k = r.k.ok_or_else(|| Error::InvalidParameter(format!("record ({}, {}) is not a triple", r.i, r.j)))?;
        if r.i >= n || r.j >= n || k >= n {
            return Err(Error::InvalidParameter(format!(
                "record ({}, {}, {k}) outside a library of {n} gates",
                r.i, r.j
            )));
        }
        rows.push((r.i, r.j, k));
    }
    if rows.is_empty() {
        return Err(Error::InvalidParameter("no triple records".into()));
    }
    let d2 = dim * dim;
    let bl = d2 * d2;
    let weights: Vec<f64> = if records.iter().all(|r| r.noise_power > 0.0) {
        records.iter().map(|r| 1.0 / r.noise_power.sqrt()).collect()
    } else {
        vec![1.0; records.len()]
    };
    let g = |i: usize| ideal.gate(i).matrix();
    let row_data: Vec<(Vec<(usize, DMatrix<f64>)>, f64)> = rows
        .par_iter()
        .zip(records.par_iter())
        .map(|(&(i, j, k), rec)| {
            let v_i = g(i) * rho0.vector();
            let v_ji = g(j) * &v_i;
            let v_kji = g(k) * &v_ji;
            let u_k = m0.vector().clone();
            let u_kj = g(k).tr_mul(&u_k);
            let u_kji = g(j).tr_mul(&u_kj);
            let base = u_k.dot(&v_kji);
            // ⟨⟨u|X|v⟩⟩ = vec(u vᵀ) · vec(X).
            let terms = vec![(k, &u_k * v_kji.transpose()), (j, &u_kj * v_ji.transpose()), (i, &u_kji * v_i.transpose())];
            (terms, rec.value + 2.0 * base)
        })
        .collect();
    let mut a = DMatrix::zeros(rows.len(), n * bl);
    let mut b = DVector::zeros(rows.len());
    for (row, ((terms, rhs), w)) in row_data.into_iter().zip(&weights).enumerate() {
        for (gate, coef) in terms {
            for (c, v) in coef.as_slice().iter().enumerate() {
                a[(row, gate * bl + c)] += w * v;
            }
        }
        b[row] = w * rhs;
    }
    Ok(LinearizedSystem { dim, n_gates: n, a, b, rows, weights })
}

/// Reconstructed library with diagnostics.
#[derive(Debug, Clone)]
pub struct GateSetEstimate {
    /// `R̃_E_g`, one per gate.
    pub error_maps: Vec<PauliTransferMatrix>,
    /// `R̃_E_g R_g`.
    pub gates: GateLibrary,
    /// Linearized objective at the solution.
    pub lsq_linear: f64,
    /// Exact (sixth-order) objective, when records were supplied.
    pub lsq_exact: Option<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// Norm of the projected-gradient mapping at the solution.
    pub gradient_norm: f64,
    /// Diagonal-frame angle applied by gauge optimization (0 if none).
    pub gauge_phi: f64,
}

/// CPTP-constrained least squares over all error maps, started from the
/// identity maps. The limit point is accepted as is; the gauge is fixed
/// only when comparing against a target.
pub fn solve_constrained(sys: &LinearizedSystem, ideal: &GateLibrary) -> Result<GateSetEstimate> {
    if ideal.len() != sys.n_gates || ideal.dim() != sys.dim {
        return Err(Error::Dimension("library does not match the linearized system".into()));
    }
    let bl = sys.block_len();
    let dim = sys.dim;
    let project = |x: &DVector<f64>| -> DVector<f64> {
        let mut out = x.clone();
        for g in 0..sys.n_gates {
            let block = PauliTransferMatrix::from_vectorized(dim, &x.rows(g * bl, bl).into_owned()).expect("block shape");
            let p = project_cptp(&block).expect("block shape");
            out.rows_mut(g * bl, bl).copy_from(&p.r_phys.vectorize());
        }
        out
    };
    let objective = QuadraticObjective::from_least_squares(&sys.a, &sys.b);
    let x0 = sys.stack(&vec![PauliTransferMatrix::identity(dim); sys.n_gates]);
    let opts = ApgOptions { tol: SOLVE_TOL, max_iter: SOLVE_MAX_ITER, ..ApgOptions::default() };
    let out = accelerated_projected_gradient(&objective, project, &x0, &opts);
    if !out.converged {
        log::warn!(
            "self-consistent solve stopped after {} iterations (gradient mapping {:.3e})",
            out.iterations,
            out.gradient_mapping_norm
        );
    }
    let error_maps = sys.unstack(&out.x)?;
    let gates = compose_library(ideal, &error_maps)?;
    Ok(GateSetEstimate {
        error_maps,
        gates,
        lsq_linear: out.objective,
        lsq_exact: None,
        iterations: out.iterations,
        converged: out.converged,
        gradient_norm: out.gradient_mapping_norm,
        gauge_phi: 0.0,
    })
}

fn compose_library(ideal: &GateLibrary, maps: &[PauliTransferMatrix]) -> Result<GateLibrary> {
    let gates = ideal.gates().iter().zip(maps).map(|(g, e)| e.compose(g)).collect();
    // Estimated gates may sit a hair off trace preservation; build without
    // re-validating through `map_gates`.
    GateLibrary::new(ideal.labels().to_vec(), gates)
}

/// Build, solve, and evaluate the exact objective in one go.
pub fn estimate_gate_set(
    records: &[ExperimentRecord],
    ideal: &GateLibrary,
    rho0: &StateVector,
    m0: &MeasurementVector,
) -> Result<GateSetEstimate> {
    let sys = build_linearized_system(records, ideal, rho0, m0)?;
    let mut est = solve_constrained(&sys, ideal)?;
    est.lsq_exact = Some(exact_lsq(&est.gates, records, rho0, m0)?);
    Ok(est)
}

/// `Σ_ijk |m_ijk − ⟨⟨M0|G_k G_j G_i|ρ0⟩⟩|²` for a candidate library.
pub fn exact_lsq(
    gates: &GateLibrary,
    records: &[ExperimentRecord],
    rho0: &StateVector,
    m0: &MeasurementVector,
) -> Result<f64> {
    let n = gates.len();
    let mut total = 0.0;
    for r in records {
        let k = r.k.ok_or_else(|| Error::InvalidParameter("exact objective needs triple records".into()))?;
        if r.i >= n || r.j >= n || k >= n {
            return Err(Error::InvalidParameter(format!("record ({}, {}, {k}) outside the library", r.i, r.j)));
        }
        let v = gates.gate(k).matrix() * (gates.gate(r.j).matrix() * (gates.gate(r.i).matrix() * rho0.vector()));
        total += (r.value - m0.vector().dot(&v)).powi(2);
    }
    Ok(total)
}

/// `R_U` for the diagonal frame `exp(−iφZ/2)`.
pub fn frame(phi: f64) -> PauliTransferMatrix {
    rotation(&Vector3::z(), phi).expect("z axis is a unit vector")
}

/// Apply the diagonal frame `R_Uᵀ(·)R_U` to every gate.
pub fn transform_library(lib: &GateLibrary, phi: f64) -> GateLibrary {
    lib.conjugate_by(&frame(phi))
}

fn is_diagonal(v: &DVector<f64>) -> bool {
    v[1].abs() < 1e-12 && v[2].abs() < 1e-12
}

/// Find the diagonal frame in which `estimate` is closest to `target`
/// (library-averaged `metric`): a uniform grid over `[0, 2π)` refined by
/// golden-section search. Only the single-qubit, computational-basis case
/// is supported, where the frame family is exactly these rotations.
pub fn gauge_optimize(
    estimate: &GateSetEstimate,
    target: &GateLibrary,
    metric: Metric,
    rho0: &StateVector,
    m0: &MeasurementVector,
) -> Result<GateSetEstimate> {
    if target.dim() != 2 || estimate.gates.dim() != 2 {
        return Err(Error::Inapplicable("gauge optimization is implemented for a single qubit only".into()));
    }
    if !is_diagonal(rho0.vector()) || !is_diagonal(m0.vector()) {
        return Err(Error::Inapplicable(
            "ρ0 and M0 must be diagonal in the computational basis for the diagonal frame family".into(),
        ));
    }
    let cost = |phi: f64| -> Result<f64> { library_distance(&transform_library(&estimate.gates, phi), target, metric) };
    let h = 2.0 * PI / GAUGE_GRID as f64;
    let grid: Vec<f64> = (0..GAUGE_GRID)
        .into_par_iter()
        .map(|k| cost(k as f64 * h))
        .collect::<Result<Vec<_>>>()?;
    let best_k = grid
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(k, _)| k)
        .unwrap_or(0);
    let (phi, _) = golden_section(|p| cost(p), best_k as f64 * h - h, best_k as f64 * h + h, GAUGE_TOL)?;
    let phi_best = if cost(phi)? < grid[best_k] { phi } else { best_k as f64 * h };
    let phi_best = phi_best.rem_euclid(2.0 * PI);
    let gates = transform_library(&estimate.gates, phi_best);
    let u = frame(phi_best);
    let error_maps = estimate.error_maps.iter().map(|e| e.conjugate_by(&u)).collect();
    Ok(GateSetEstimate { error_maps, gates, gauge_phi: phi_best, ..estimate.clone() })
}

fn golden_section<F>(f: F, mut a: f64, mut b: f64, tol: f64) -> Result<(f64, f64)>
where
    F: Fn(f64) -> Result<f64>,
{
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d)?;
        }
    }
    let x = 0.5 * (a + b);
    Ok((x, f(x)?))
}

/// One gate of an estimate report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateReport {
    pub label: String,
    #[serde(rename = "R_error")]
    pub r_error: PtmJson,
    #[serde(rename = "R_estimated")]
    pub r_estimated: PtmJson,
    pub fidelity_error: f64,
    pub diamond_distance: f64,
}

/// Wire form of a gate-set estimate, with metrics against a target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub per_gate: Vec<GateReport>,
    pub gauge_phi: f64,
    pub lsq_linear: f64,
    pub lsq_exact: Option<f64>,
    pub iterations: usize,
    pub converged: bool,
}

impl GateSetEstimate {
    pub fn report(&self, target: &GateLibrary) -> Result<EstimateReport> {
        let per_gate = target
            .labels()
            .iter()
            .enumerate()
            .map(|(g, label)| {
                let est = self.gates.gate(g);
                Ok(GateReport {
                    label: label.clone(),
                    r_error: self.error_maps[g].to_json(),
                    r_estimated: est.to_json(),
                    fidelity_error: avg_gate_fidelity_error(est, target.gate(g))?,
                    diamond_distance: diamond_distance(est, target.gate(g))?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(EstimateReport {
            per_gate,
            gauge_phi: self.gauge_phi,
            lsq_linear: self.lsq_linear,
            lsq_exact: self.lsq_exact,
            iterations: self.iterations,
            converged: self.converged,
        })
    }
}
