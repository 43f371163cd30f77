//! Convex-optimization kernels shared by the estimators.

mod sdp;

pub use sdp::{solve_sdp, Constraint, SdpProblem, SdpScalar, SdpSolution, SdpStart, SdpStatus};

use nalgebra::{ComplexField, DMatrix, DVector, RealField, SymmetricEigen};

use crate::superop::PauliTransferMatrix;

/// Frobenius-nearest positive semidefinite matrix: clamp negative eigenvalues
/// to zero and reassemble. Works for real symmetric and complex Hermitian input.
pub fn project_psd<T>(h: &DMatrix<T>) -> DMatrix<T>
where
    T: ComplexField,
    T::RealField: RealField + Copy,
{
    let eig = SymmetricEigen::new(h.clone());
    let zero: T::RealField = nalgebra::zero();
    if eig.eigenvalues.iter().all(|&e| e >= zero) {
        return h.clone();
    }
    let n = h.nrows();
    let mut out = DMatrix::<T>::zeros(n, n);
    for (k, &lam) in eig.eigenvalues.iter().enumerate() {
        if lam <= zero {
            continue;
        }
        let v = eig.eigenvectors.column(k);
        out += (&v * v.adjoint()).map(|z| z.scale(lam));
    }
    out
}

/// Replace the first row with `(1, 0, …, 0)`: the flat-metric projection onto
/// trace-preserving maps.
pub fn project_tp(r: &PauliTransferMatrix) -> PauliTransferMatrix {
    let mut m = r.matrix().clone();
    project_tp_in_place(&mut m);
    PauliTransferMatrix::new(r.dim(), m).expect("shape unchanged")
}

pub(crate) fn project_tp_in_place(m: &mut DMatrix<f64>) {
    m[(0, 0)] = 1.0;
    for j in 1..m.ncols() {
        m[(0, j)] = 0.0;
    }
}

/// Result of an alternating-projection run.
#[derive(Debug, Clone)]
pub struct DykstraOutcome {
    pub point: DVector<f64>,
    pub sweeps: usize,
    pub converged: bool,
    /// Euclidean movement of the iterate during the last sweep.
    pub last_move: f64,
}

/// Dykstra's corrected alternating projections onto `A ∩ B`.
///
/// Each sweep projects onto `A` and then `B`, carrying the correction terms,
/// so the iterates converge to the Euclidean projection of `x0` onto the
/// intersection. The returned point is the last `B` projection.
pub fn dykstra<PA, PB>(proj_a: PA, proj_b: PB, x0: &DVector<f64>, tol: f64, max_sweeps: usize) -> DykstraOutcome
where
    PA: Fn(&DVector<f64>) -> DVector<f64>,
    PB: Fn(&DVector<f64>) -> DVector<f64>,
{
    let mut x = x0.clone();
    let mut p = DVector::zeros(x.len());
    let mut q = DVector::zeros(x.len());
    let mut last_move = f64::INFINITY;
    for sweep in 1..=max_sweeps {
        let xp = &x + &p;
        let y = proj_a(&xp);
        p = xp - &y;
        let yq = &y + &q;
        let x_new = proj_b(&yq);
        q = yq - &x_new;
        last_move = (&x_new - &x).norm();
        x = x_new;
        if last_move < tol {
            return DykstraOutcome { point: x, sweeps: sweep, converged: true, last_move };
        }
    }
    DykstraOutcome { point: x, sweeps: max_sweeps, converged: false, last_move }
}

/// Plain alternating projections (no correction). Converges to some point of
/// `A ∩ B`, not necessarily the nearest one; kept for comparison.
pub fn alternating_projections<PA, PB>(
    proj_a: PA,
    proj_b: PB,
    x0: &DVector<f64>,
    tol: f64,
    max_sweeps: usize,
) -> DykstraOutcome
where
    PA: Fn(&DVector<f64>) -> DVector<f64>,
    PB: Fn(&DVector<f64>) -> DVector<f64>,
{
    let mut x = x0.clone();
    let mut last_move = f64::INFINITY;
    for sweep in 1..=max_sweeps {
        let x_new = proj_b(&proj_a(&x));
        last_move = (&x_new - &x).norm();
        x = x_new;
        if last_move < tol {
            return DykstraOutcome { point: x, sweeps: sweep, converged: true, last_move };
        }
    }
    DykstraOutcome { point: x, sweeps: max_sweeps, converged: false, last_move }
}

/// `f(x) = ‖Ax − b‖²`.
///
/// Value and gradient go through the residual `Ax − b` rather than the
/// normal equations, so small objective values keep full relative accuracy.
#[derive(Debug, Clone)]
pub struct QuadraticObjective {
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
    /// `AᵀA`, kept for the Lipschitz constant.
    pub ata: DMatrix<f64>,
}

impl QuadraticObjective {
    pub fn from_least_squares(a: &DMatrix<f64>, b: &DVector<f64>) -> Self {
        QuadraticObjective { a: a.clone(), b: b.clone(), ata: a.tr_mul(a) }
    }

    pub fn residual(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.a * x - &self.b
    }

    pub fn value(&self, x: &DVector<f64>) -> f64 {
        self.residual(x).norm_squared()
    }

    /// `∇f = 2Aᵀ(Ax − b)`.
    pub fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        self.a.tr_mul(&self.residual(x)) * 2.0
    }

    /// Largest eigenvalue of `AᵀA` by power iteration.
    pub fn lipschitz(&self) -> f64 {
        power_iteration(&self.ata, 1000, 1e-12)
    }
}

/// Dominant eigenvalue of a symmetric PSD matrix.
pub fn power_iteration(m: &DMatrix<f64>, max_iter: usize, tol: f64) -> f64 {
    let n = m.nrows();
    if n == 0 {
        return 0.0;
    }
    // Deterministic, generic start vector.
    let mut v = DVector::from_fn(n, |i, _| 1.0 + ((i as f64) * 0.618_033_988_75).fract());
    v /= v.norm();
    let mut lambda = 0.0;
    for _ in 0..max_iter {
        let w = m * &v;
        let next = v.dot(&w);
        let wn = w.norm();
        if wn == 0.0 {
            return 0.0;
        }
        v = w / wn;
        if (next - lambda).abs() <= tol * next.abs().max(1e-300) {
            lambda = next;
            break;
        }
        lambda = next;
    }
    // Rayleigh quotient underestimates slightly; the final norm is an upper-side estimate.
    lambda.max((m * &v).norm())
}

#[derive(Debug, Clone)]
pub struct ApgOutcome {
    pub x: DVector<f64>,
    pub objective: f64,
    pub iterations: usize,
    pub restarts: usize,
    pub converged: bool,
    /// Norm of the projected-gradient mapping at the returned point.
    pub gradient_mapping_norm: f64,
    /// Objective after each accepted iterate (only when tracing is requested).
    pub trace: Vec<f64>,
}

/// Options for [`accelerated_projected_gradient`].
#[derive(Debug, Clone)]
pub struct ApgOptions {
    /// Stop when a plain projected-gradient step moves the point by less than
    /// `tol·(1 + ‖x‖)`.
    pub tol: f64,
    pub max_iter: usize,
    /// Also stop once the objective itself is below this absolute floor.
    pub objective_floor: f64,
    pub record_trace: bool,
}

impl Default for ApgOptions {
    fn default() -> Self {
        ApgOptions { tol: 1e-12, max_iter: 200_000, objective_floor: 1e-28, record_trace: false }
    }
}

/// Nesterov-accelerated projected gradient with function-value restart for
/// `min ‖Ax − b‖²` over a convex set given by its projector.
///
/// An iterate that would increase the objective is discarded and replaced by a
/// plain projected-gradient step from the previous point with the momentum
/// reset, so accepted objective values never increase.
pub fn accelerated_projected_gradient<P>(
    objective: &QuadraticObjective,
    project: P,
    x0: &DVector<f64>,
    opts: &ApgOptions,
) -> ApgOutcome
where
    P: Fn(&DVector<f64>) -> DVector<f64>,
{
    let lipschitz = 2.0 * objective.lipschitz();
    let step = if lipschitz > 0.0 { 1.0 / lipschitz } else { 1.0 };
    let mut x = project(x0);
    let mut f = objective.value(&x);
    let mut y = x.clone();
    let mut t = 1.0f64;
    let mut restarts = 0;
    let mut trace = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    if opts.record_trace {
        trace.push(f);
    }
    for k in 1..=opts.max_iter {
        iterations = k;
        let mut x_new = project(&(&y - objective.gradient(&y) * step));
        let mut f_new = objective.value(&x_new);
        let restarted = f_new > f;
        if restarted {
            restarts += 1;
            t = 1.0;
            x_new = project(&(&x - objective.gradient(&x) * step));
            f_new = objective.value(&x_new).min(f);
        }
        let t_new = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        y = &x_new + (&x_new - &x) * ((t - 1.0) / t_new);
        t = t_new;
        let change = (f - f_new).abs();
        let moved = (&x_new - &x).norm();
        x = x_new;
        f = f_new;
        if opts.record_trace {
            trace.push(f);
        }
        if f <= opts.objective_floor || moved <= 1e-15 * (1.0 + x.norm()) {
            converged = true;
            break;
        }
        if !restarted && change <= opts.tol * f {
            converged = true;
            break;
        }
    }
    let g = project(&(&x - objective.gradient(&x) * step));
    let gradient_mapping_norm = (&x - g).norm() / step;
    ApgOutcome { x, objective: f, iterations, restarts, converged, gradient_mapping_norm, trace }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::C64;

    #[test]
    fn psd_input_is_unchanged() {
        let m = DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]);
        assert!((project_psd(&m) - &m).norm() < 1e-15);
    }

    #[test]
    fn negative_eigenvalue_is_clamped() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -0.1]);
        let p = project_psd(&m);
        assert!((p - DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0])).norm() < 1e-15);
    }

    #[test]
    fn hermitian_projection_is_idempotent() {
        let h = DMatrix::from_fn(3, 3, |r, c| {
            let re = ((r + 2 * c) as f64).sin() + ((c + 2 * r) as f64).sin();
            let im = if r == c { 0.0 } else if r < c { 0.3 * (r + c) as f64 } else { -0.3 * (r + c) as f64 };
            C64::new(re, im)
        });
        let p = project_psd(&h);
        let pp = project_psd(&p);
        assert!((&p - &pp).norm() < 1e-12);
        let ev = p.symmetric_eigenvalues();
        assert!(ev.iter().all(|&e| e > -1e-12));
    }

    #[test]
    fn tp_projection_examples() {
        let mut m = DMatrix::<f64>::identity(4, 4);
        m[(0, 0)] = 0.9;
        m[(0, 2)] = 0.2;
        let r = PauliTransferMatrix::new(2, m).unwrap();
        let p = project_tp(&r);
        assert!(p.is_trace_preserving(0.0));
        assert!((r.frobenius_distance(&p) - (0.01f64 + 0.04).sqrt()).abs() < 1e-15);
        let id = PauliTransferMatrix::identity(2);
        assert_eq!(project_tp(&id), id);
    }

    #[test]
    fn dykstra_fixes_points_in_the_intersection() {
        let ball = |x: &DVector<f64>| {
            let n = x.norm();
            if n <= 1.0 { x.clone() } else { x / n }
        };
        let half = |x: &DVector<f64>| DVector::from_iterator(x.len(), x.iter().map(|v| v.max(0.0)));
        let x0 = DVector::from_vec(vec![0.2, 0.3]);
        let out = dykstra(ball, half, &x0, 1e-14, 100);
        assert!(out.converged);
        assert!((out.point - x0).norm() < 1e-15);
    }

    #[test]
    fn dykstra_beats_plain_alternation_on_skewed_sets() {
        // A = halfplane y <= 0.2x ; B = {x >= 1}. Projection of (-1, 2).
        let a = |v: &DVector<f64>| {
            let n = DVector::from_vec(vec![-0.2, 1.0]);
            let s = n.dot(v);
            if s <= 0.0 { v.clone() } else { v - &n * (s / n.dot(&n)) }
        };
        let b = |v: &DVector<f64>| DVector::from_vec(vec![v[0].max(1.0), v[1]]);
        let x0 = DVector::from_vec(vec![-1.0, 2.0]);
        let d = dykstra(a, b, &x0, 1e-14, 100_000);
        let p = alternating_projections(a, b, &x0, 1e-14, 100_000);
        // Exact answer: projection onto the wedge apex or edge; check optimality by distance.
        let dd = (&d.point - &x0).norm();
        let dp = (&p.point - &x0).norm();
        assert!(dd <= dp + 1e-12);
        assert!(dp - dd > 1e-3, "plain alternation should land farther away here");
        // d.point = (1, 0.2) is the wedge apex.
        assert!((d.point - DVector::from_vec(vec![1.0, 0.2])).norm() < 1e-9);
    }

    #[test]
    fn apg_unconstrained_matches_least_squares() {
        let a = DMatrix::from_fn(8, 3, |r, c| ((r * 3 + c) as f64 * 0.7).sin() + if r == c { 2.0 } else { 0.0 });
        let b = DVector::from_fn(8, |r, _| (r as f64).cos());
        let obj = QuadraticObjective::from_least_squares(&a, &b);
        let out = accelerated_projected_gradient(&obj, |x| x.clone(), &DVector::zeros(3), &ApgOptions::default());
        let exact = a.clone().svd(true, true).solve(&b, 1e-14).unwrap();
        // The plateau rule bounds the objective gap, not the iterate distance.
        let best = obj.value(&exact);
        assert!(out.objective - best <= 1e-10 * best);
        assert!((out.x - exact).amax() < 1e-5);
    }

    #[test]
    fn apg_box_matches_clamp() {
        // min (x - 3)^2 over [0, 1] -> 1.
        let a = DMatrix::from_element(1, 1, 1.0);
        let b = DVector::from_element(1, 3.0);
        let obj = QuadraticObjective::from_least_squares(&a, &b);
        let clamp = |x: &DVector<f64>| x.map(|v| v.clamp(0.0, 1.0));
        let out = accelerated_projected_gradient(&obj, clamp, &DVector::zeros(1), &ApgOptions::default());
        assert!((out.x[0] - 1.0).abs() < 1e-14);
        // Interior optimum is found exactly too.
        let b = DVector::from_element(1, 0.25);
        let obj = QuadraticObjective::from_least_squares(&a, &b);
        let out = accelerated_projected_gradient(&obj, clamp, &DVector::zeros(1), &ApgOptions::default());
        assert!((out.x[0] - 0.25).abs() < 1e-12);
    }

    #[test]
    fn apg_objective_never_increases() {
        let a = DMatrix::from_fn(20, 10, |r, c| ((r * 10 + c) as f64 * 1.3).sin());
        let b = DVector::from_fn(20, |r, _| (r as f64 * 0.4).cos() * 3.0);
        let obj = QuadraticObjective::from_least_squares(&a, &b);
        let ball = |x: &DVector<f64>| {
            let n = x.norm();
            if n <= 0.5 { x.clone() } else { x * (0.5 / n) }
        };
        let opts = ApgOptions { record_trace: true, ..ApgOptions::default() };
        let out = accelerated_projected_gradient(&obj, ball, &DVector::zeros(10), &opts);
        assert!(out.trace.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn power_iteration_finds_top_eigenvalue() {
        let m = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 5.0, 3.0]));
        assert!((power_iteration(&m, 10_000, 1e-15) - 5.0).abs() < 1e-9);
    }
}
