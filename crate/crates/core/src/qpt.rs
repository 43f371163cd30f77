//! Standard process tomography: linear inversion, the Gaussian least-squares
//! value, and the Frobenius-nearest CPTP map.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optim::{dykstra, project_psd, project_tp_in_place};
use crate::channels::GateLibrary;
use crate::sim::{build_design_matrix, pairs_for_gate, DesignMatrix, ExperimentPlan, ExperimentRecord};
use crate::superop::{choi_from_ptm, ptm_from_choi_unchecked, MeasurementVector, PauliTransferMatrix, PtmJson, StateVector};

/// Condition number of `SSᵀ` above which the pseudo-inverse path is taken.
pub const CONDITION_LIMIT: f64 = 1e10;
/// Relative eigenvalue cutoff of the pseudo-inverse.
pub const PINV_CUTOFF: f64 = 1e-10;
/// Dykstra stops once a sweep moves the iterate less than this.
pub const PROJECTION_TOL: f64 = 1e-11;
pub const PROJECTION_MAX_SWEEPS: usize = 5000;

#[derive(Debug, Clone)]
pub struct BareEstimate {
    /// `(SSᵀ)⁻¹ S m`, possibly unphysical.
    pub r_est: PauliTransferMatrix,
    /// Numerical rank of `SSᵀ`.
    pub rank: usize,
    /// The pseudo-inverse was used and the trace-preserving row imposed.
    pub pseudo_inverse: bool,
    /// `‖Sᵀ r − m‖₂`.
    pub residual: f64,
}

fn numerical_rank(eigenvalues: &DVector<f64>) -> usize {
    let top = eigenvalues.amax();
    eigenvalues.iter().filter(|&&e| e > PINV_CUTOFF * top).count()
}

/// Pseudo-inverse of a symmetric PSD matrix applied to `v`.
fn pinv_apply(eig: &SymmetricEigen<f64, nalgebra::Dyn>, v: &DVector<f64>) -> DVector<f64> {
    let top = eig.eigenvalues.amax();
    let coeffs = eig.eigenvectors.tr_mul(v);
    let scaled = DVector::from_iterator(
        coeffs.len(),
        coeffs.iter().zip(eig.eigenvalues.iter()).map(|(c, &l)| if l > PINV_CUTOFF * top { c / l } else { 0.0 }),
    );
    &eig.eigenvectors * scaled
}

/// Linear-inversion estimate from the noise-rescaled design.
///
/// With `SSᵀ` well conditioned this is `(S′S′ᵀ)⁻¹ S′ m′`. Otherwise the
/// first PTM row is fixed to `(1, 0, …)` and the remaining entries are
/// fitted with the pseudo-inverse; if even those are not determined the
/// estimate is refused.
pub fn bare_estimate(design: &DesignMatrix, values: &[f64]) -> Result<BareEstimate> {
    if design.records() == 0 {
        return Err(Error::InvalidParameter("no records".into()));
    }
    if values.len() != design.records() {
        return Err(Error::Dimension(format!("{} values for {} records", values.len(), design.records())));
    }
    let d = design.dim;
    let n = d * d;
    let s = &design.s_scaled;
    let m = design.scale_values(values);
    let gram = s * s.transpose();
    let eig = SymmetricEigen::new(gram.clone());
    let rank = numerical_rank(&eig.eigenvalues);
    let lmax = eig.eigenvalues.amax();
    let lmin = eig.eigenvalues.min();
    let full = rank == n * n && lmin > 0.0 && lmax / lmin < CONDITION_LIMIT;

    let r_vec = if full {
        let rhs = s * &m;
        let chol = nalgebra::Cholesky::new(gram).ok_or_else(|| Error::RankDeficient("SSᵀ is not positive definite".into()))?;
        chol.solve(&rhs)
    } else {
        // Column-major: entry (0, c) sits at index c·d².
        let fixed: Vec<usize> = (0..n).map(|c| c * n).collect();
        let free: Vec<usize> = (0..n * n).filter(|k| k % n != 0).collect();
        let mut r0 = DVector::zeros(n * n);
        r0[0] = 1.0;
        let m_res = &m - s.tr_mul(&r0);
        let s_free = DMatrix::from_fn(free.len(), s.ncols(), |r, c| s[(free[r], c)]);
        let gram_free = &s_free * s_free.transpose();
        let eig_free = SymmetricEigen::new(gram_free);
        let rank_free = numerical_rank(&eig_free.eigenvalues);
        if rank_free < free.len() {
            return Err(Error::RankDeficient(format!(
                "rank(SSᵀ) = {rank}; the {} entries below the trace-preserving row have rank {rank_free}",
                free.len()
            )));
        }
        let sol = pinv_apply(&eig_free, &(&s_free * m_res));
        let mut r = r0;
        for (k, &idx) in free.iter().enumerate() {
            r[idx] = sol[k];
        }
        debug_assert!(fixed.iter().all(|&i| r[i] == if i == 0 { 1.0 } else { 0.0 }));
        r
    };
    let r_est = PauliTransferMatrix::from_vectorized(d, &r_vec)?;
    let residual = (design.s.tr_mul(&r_vec) - DVector::from_column_slice(values)).norm();
    Ok(BareEstimate { r_est, rank, pseudo_inverse: !full, residual })
}

/// Negative log-likelihood `Σ |m′ − s′ᵀ r|²` of the candidate `r`.
pub fn lsq_value(design: &DesignMatrix, values: &[f64], r: &PauliTransferMatrix) -> f64 {
    let m = design.scale_values(values);
    (design.s_scaled.tr_mul(&r.vectorize()) - m).norm_squared()
}

#[derive(Debug, Clone)]
pub struct PhysicalEstimate {
    pub r_phys: PauliTransferMatrix,
    pub choi_min_eig: f64,
    /// Frobenius distance between the input and `r_phys`.
    pub distance: f64,
    pub sweeps: usize,
    pub converged: bool,
}

/// Frobenius-nearest positive-Choi map, in PTM coordinates.
fn project_cp(dim: usize, v: &DVector<f64>) -> DVector<f64> {
    let r = PauliTransferMatrix::from_vectorized(dim, v).expect("length preserved");
    let choi = choi_from_ptm(&r).into_matrix();
    let herm = (&choi + choi.adjoint()) * crate::pauli::C64::new(0.5, 0.0);
    ptm_from_choi_unchecked(dim, &project_psd(&herm)).vectorize()
}

fn project_tp_vec(dim: usize, v: &DVector<f64>) -> DVector<f64> {
    let n = dim * dim;
    let mut m = DMatrix::from_column_slice(n, n, v.as_slice());
    project_tp_in_place(&mut m);
    DVector::from_column_slice(m.as_slice())
}

/// Nearest CPTP map in the flat (Frobenius) metric.
///
/// The PTM and Choi Frobenius norms differ only by the constant factor `d`,
/// so Dykstra's alternating projections between the positive-Choi cone and
/// the trace-preserving affine set converge to the flat-metric optimum.
/// Non-convergence within the sweep budget is flagged and logged.
pub fn project_cptp(r: &PauliTransferMatrix) -> Result<PhysicalEstimate> {
    let dim = r.dim();
    if r.is_trace_preserving(1e-14) && r.choi_min_eigenvalue() >= -1e-14 {
        return Ok(PhysicalEstimate {
            r_phys: r.clone(),
            choi_min_eig: r.choi_min_eigenvalue(),
            distance: 0.0,
            sweeps: 0,
            converged: true,
        });
    }
    let out = dykstra(
        |v| project_cp(dim, v),
        |v| project_tp_vec(dim, v),
        &r.vectorize(),
        PROJECTION_TOL,
        PROJECTION_MAX_SWEEPS,
    );
    if !out.converged {
        log::warn!("CPTP projection stopped after {} sweeps (last move {:.3e})", out.sweeps, out.last_move);
    }
    let r_phys = PauliTransferMatrix::from_vectorized(dim, &out.point)?;
    Ok(PhysicalEstimate {
        choi_min_eig: r_phys.choi_min_eigenvalue(),
        distance: r.frobenius_distance(&r_phys),
        sweeps: out.sweeps,
        converged: out.converged,
        r_phys,
    })
}

/// Bare estimate, CPTP projection, and likelihood values for one channel.
#[derive(Debug, Clone)]
pub struct QptResult {
    pub bare: BareEstimate,
    pub physical: PhysicalEstimate,
    /// Least-squares value of the physical estimate.
    pub lsq_value: f64,
}

impl QptResult {
    pub fn report(&self) -> QptReport {
        QptReport {
            r_bare: self.bare.r_est.to_json(),
            r_phys: self.physical.r_phys.to_json(),
            rank: self.bare.rank,
            pseudo_inverse: self.bare.pseudo_inverse,
            residual: self.bare.residual,
            choi_min_eig: self.physical.choi_min_eig,
            projection_distance: self.physical.distance,
            projection_converged: self.physical.converged,
            lsq_value: self.lsq_value,
        }
    }
}

/// Wire form of a reconstruction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub struct QptReport {
    #[serde(rename = "R_bare")]
    pub r_bare: PtmJson,
    #[serde(rename = "R_phys")]
    pub r_phys: PtmJson,
    pub rank: usize,
    pub pseudo_inverse: bool,
    pub residual: f64,
    pub choi_min_eig: f64,
    pub projection_distance: f64,
    pub projection_converged: bool,
    pub lsq_value: f64,
}

/// Reconstruct from records and a design already built.
pub fn qpt_from_design(design: &DesignMatrix, values: &[f64]) -> Result<QptResult> {
    let bare = bare_estimate(design, values)?;
    let physical = project_cptp(&bare.r_est)?;
    let lsq = lsq_value(design, values, &physical.r_phys);
    Ok(QptResult { bare, physical, lsq_value: lsq })
}

/// Full QPT on pair records, assuming the plan's ideal library.
pub fn qpt_pipeline(records: &[ExperimentRecord], plan: &ExperimentPlan) -> Result<QptResult> {
    let design = build_design_matrix(plan, records)?;
    let values: Vec<f64> = records.iter().map(|r| r.value).collect();
    qpt_from_design(&design, &values)
}

/// Standard QPT of every gate from triple records: the triples with middle
/// gate `g` form the pair dataset for `g`, with the outer gates taken as
/// ideal preparations and measurements.
pub fn qpt_gate_set(
    records: &[ExperimentRecord],
    ideal: &GateLibrary,
    rho0: &StateVector,
    m0: &MeasurementVector,
) -> Result<(GateLibrary, Vec<QptResult>)> {
    let mut results = Vec::with_capacity(ideal.len());
    for g in 0..ideal.len() {
        let pairs = pairs_for_gate(records, g);
        if pairs.is_empty() {
            return Err(Error::InvalidParameter(format!("no triples with middle gate {g}")));
        }
        let idx: Vec<(usize, usize)> = pairs.iter().map(|r| (r.i, r.j)).collect();
        let noise: Vec<f64> = pairs.iter().map(|r| r.noise_power).collect();
        let values: Vec<f64> = pairs.iter().map(|r| r.value).collect();
        let design = DesignMatrix::from_pairs(ideal, rho0, m0, &idx, &noise)?;
        results.push(qpt_from_design(&design, &values)?);
    }
    let gates = results.iter().map(|r| r.physical.r_phys.clone()).collect();
    Ok((GateLibrary::new(ideal.labels().to_vec(), gates)?, results))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{depolarizing, standard_library, LibraryName};
    use crate::sim::simulate_pairs;

    #[test]
    fn error_free_data_recovers_the_channel() {
        let mut rng = <rand_chacha::ChaCha20Rng as rand::SeedableRng>::seed_from_u64(5);
        let lambda = crate::random::random_cptp(2, &mut rng);
        let plan = ExperimentPlan::new(standard_library(LibraryName::CardinalSix)).with_noise(0.0);
        let recs = simulate_pairs(&plan, &lambda).unwrap();
        let res = qpt_pipeline(&recs, &plan).unwrap();
        assert!(!res.bare.pseudo_inverse);
        assert_eq!(res.bare.rank, 16);
        assert!(res.bare.r_est.max_abs_diff(&lambda) < 1e-10);
        assert!(res.lsq_value < 1e-20);
    }

    #[test]
    fn traceless_measurement_uses_the_pseudo_inverse() {
        let mut rng = <rand_chacha::ChaCha20Rng as rand::SeedableRng>::seed_from_u64(6);
        let lambda = crate::random::random_cptp(2, &mut rng);
        let plan = ExperimentPlan::new(standard_library(LibraryName::CardinalSix))
            .with_noise(0.0)
            .with_measurement(crate::superop::MeasurementVector::pauli_z(2).unwrap());
        let recs = simulate_pairs(&plan, &lambda).unwrap();
        let bare = bare_estimate(&build_design_matrix(&plan, &recs).unwrap(), &recs.iter().map(|r| r.value).collect::<Vec<_>>()).unwrap();
        assert!(bare.pseudo_inverse);
        assert_eq!(bare.rank, 12);
        assert!(bare.r_est.max_abs_diff(&lambda) < 1e-10);
    }

    #[test]
    fn projection_examples() {
        let id = PauliTransferMatrix::identity(2);
        let p = project_cptp(&id).unwrap();
        assert!(p.distance < 1e-12);

        let delta = 0.05;
        let r = PauliTransferMatrix::diagonal(2, &[1.0, 1.0 + delta, 1.0, 1.0]).unwrap();
        let p = project_cptp(&r).unwrap();
        assert!(p.converged);
        assert!(p.choi_min_eig >= -1e-9);
        assert!(p.distance <= delta + 1e-12);

        let mut m = depolarizing(2, 0.0).unwrap().into_matrix();
        m[(0, 0)] = 0.9;
        let p = project_cptp(&PauliTransferMatrix::new(2, m).unwrap()).unwrap();
        assert!(p.r_phys.first_row_deviation() < 1e-15);
        assert!(p.choi_min_eig >= -1e-9);
    }
}
