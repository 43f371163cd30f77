//! Acceptance gate. Every criterion is its own test and writes one
//! `PASS`/`FAIL` line to stderr (bypassing output capture) before asserting.

mod common;

use std::collections::BTreeMap;
use std::io::Write;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use gateset_forge::campaign::{
    run_campaign, run_campaign_with_jobs, summarize, CampaignMetric, CampaignResult, CampaignSpec, EstimatorKind, Stat, SummaryRow,
    Template,
};
use gateset_forge::channels::{
    depolarizing, depolarizing_equivalent, is_two_design, standard_library, twirl_closed_form, twirl_sum, ErrorKind,
    ErrorModel, LibraryName,
};
use gateset_forge::metrics::diamond_report;
use gateset_forge::qpt::{bare_estimate, project_cptp, qpt_pipeline};
use gateset_forge::random::{random_cptp, random_unitary_ptm};
use gateset_forge::scqpt::{build_linearized_system, transform_library};
use gateset_forge::sim::{build_design_matrix, exact_triples, simulate_pairs, simulate_triples, ExperimentPlan};
use gateset_forge::superop::PauliTransferMatrix;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

const LIBRARIES: [LibraryName; 4] =
    [LibraryName::Tetrahedral, LibraryName::CardinalSix, LibraryName::Clifford12, LibraryName::Clifford24];

fn verdict(n: u32, pass: bool, detail: String) {
    let line = format!("{} criterion {n:>2}: {detail}\n", if pass { "PASS" } else { "FAIL" });
    let _ = std::io::stderr().write_all(line.as_bytes());
    assert!(pass, "criterion {n} failed: {detail}");
}

fn secs(d: Duration) -> String {
    format!("{:.1}s", d.as_secs_f64())
}

fn rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

fn medians(result: &CampaignResult) -> Vec<SummaryRow> {
    summarize(&result.rows, Stat::Median)
}

fn pick<'a>(rows: &'a [SummaryRow], estimator: &str, metric: &str) -> Vec<&'a SummaryRow> {
    rows.iter().filter(|r| r.estimator == estimator && r.metric == metric).collect()
}

fn loglog_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let (sx, sy) = points.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x.ln(), b + y.ln()));
    let (mx, my) = (sx / n, sy / n);
    let (num, den) = points.iter().fold((0.0, 0.0), |(a, b), (x, y)| {
        let dx = x.ln() - mx;
        (a + dx * (y.ln() - my), b + dx * dx)
    });
    num / den
}

#[test]
fn criterion_01_exact_recovery() {
    let start = Instant::now();
    let mut g = rng(101);
    let mut worst: f64 = 0.0;
    for name in LIBRARIES {
        let plan = ExperimentPlan::new(standard_library(name)).with_noise(0.0);
        for _ in 0..100 {
            let lambda = random_cptp(2, &mut g);
            let out = qpt_pipeline(&simulate_pairs(&plan, &lambda).unwrap(), &plan).unwrap();
            worst = worst.max(out.physical.r_phys.max_abs_diff(&lambda));
        }
    }
    let t = start.elapsed();
    verdict(
        1,
        worst < 1e-9 && t < Duration::from_secs(10),
        format!("400 channels, max entrywise error {worst:.2e} (< 1e-9), {} (< 10s)", secs(t)),
    );
}

#[test]
fn criterion_02_depolarizing_spam_sandwich() {
    let mut g = rng(102);
    let mut worst: f64 = 0.0;
    for eps in [0.999, 0.99, 0.9] {
        let dep = depolarizing(2, eps).unwrap();
        for name in LIBRARIES {
            let lambda = random_cptp(2, &mut g);
            let plan = ExperimentPlan::new(standard_library(name))
                .with_error(ErrorModel::new(ErrorKind::Depolarizing, 1.0 - eps))
                .with_noise(0.0);
            let recs = simulate_pairs(&plan, &lambda).unwrap();
            let design = build_design_matrix(&plan, &recs).unwrap();
            let values: Vec<f64> = recs.iter().map(|r| r.value).collect();
            let bare = bare_estimate(&design, &values).unwrap();
            worst = worst.max(bare.r_est.max_abs_diff(&dep.compose(&lambda).compose(&dep)));
        }
    }
    verdict(2, worst < 1e-9, format!("12 cases, max |R_est - R_dep R R_dep| {worst:.2e} (< 1e-9)"));
}

#[test]
fn criterion_03_two_design_chain() {
    let mut g = rng(103);
    let mut twirl_err: f64 = 0.0;
    for name in [LibraryName::Clifford12, LibraryName::Clifford24] {
        let lib = standard_library(name);
        for _ in 0..20 {
            let a = DMatrix::from_fn(4, 4, |_, _| g.gen::<f64>() * 2.0 - 1.0);
            twirl_err = twirl_err.max((twirl_sum(&a, &lib).unwrap() - twirl_closed_form(&a)).amax());
        }
    }

    // A constant unitary error after every gate, probed on both 2-designs.
    let mut factor_err: f64 = 0.0;
    for name in [LibraryName::Clifford12, LibraryName::Clifford24] {
        for seed in 0..5 {
            let ideal = standard_library(name);
            let model = ErrorModel::new(ErrorKind::GlobalUnitary, 0.2).with_seed(seed);
            let e = model.error_map(&ideal, 0).unwrap();
            let lambda = random_cptp(2, &mut g);
            let plan = ExperimentPlan::new(ideal).with_error(model).with_noise(0.0);
            let recs = simulate_pairs(&plan, &lambda).unwrap();
            let design = build_design_matrix(&plan, &recs).unwrap();
            let values: Vec<f64> = recs.iter().map(|r| r.value).collect();
            let bare = bare_estimate(&design, &values).unwrap();
            let (alpha, eps) = depolarizing_equivalent(&plan.m0, &e).unwrap();
            let dep = PauliTransferMatrix::diagonal(2, &[1.0, eps, eps, eps]).unwrap();
            let want = dep.compose(&lambda).compose(&e).into_matrix() * alpha;
            factor_err = factor_err.max((bare.r_est.matrix() - want).amax());
        }
    }

    let tetra = standard_library(LibraryName::Tetrahedral);
    let a = DMatrix::from_fn(4, 4, |i, j| ((3 * i + j) as f64).sin());
    let tetra_gap = (twirl_sum(&a, &tetra).unwrap() - twirl_closed_form(&a)).amax();
    let tetra_fails = !is_two_design(&tetra).unwrap() && tetra_gap > 1e-3;
    verdict(
        3,
        twirl_err < 1e-12 && factor_err < 1e-9 && tetra_fails,
        format!(
            "twirl error {twirl_err:.2e} (< 1e-12), alpha-eps factorization error {factor_err:.2e} (< 1e-9), \
             tetrahedral twirl deviation {tetra_gap:.2e} so not a 2-design"
        ),
    );
}

#[test]
fn criterion_04_noise_floor_shape() {
    let start = Instant::now();
    let b = run_campaign(&CampaignSpec::template(Template::Fig1b)).unwrap();
    let a = run_campaign(&CampaignSpec::template(Template::Fig1a)).unwrap();
    let t = start.elapsed();

    let mb = medians(&b);
    let rows = pick(&mb, "qpt-bare", "diamond");
    let mut by_lib: BTreeMap<String, Vec<(f64, f64)>> = BTreeMap::new();
    for r in rows {
        by_lib.entry(r.library.clone()).or_default().push((r.noise_power, r.value));
    }
    let mut floors = Vec::new();
    let mut slopes = Vec::new();
    for (lib, mut pts) in by_lib {
        pts.sort_by(|x, y| x.0.total_cmp(&y.0));
        let floor = pts[0].1;
        // Noise regime: well above the floor.
        let regime: Vec<(f64, f64)> = pts.iter().copied().filter(|p| p.1 >= 10.0 * floor).collect();
        let slope = if regime.len() >= 3 { loglog_slope(&regime) } else { f64::NAN };
        floors.push((lib.clone(), floor));
        slopes.push((lib, slope, regime.len()));
    }
    let fmin = floors.iter().map(|f| f.1).fold(f64::INFINITY, f64::min);
    let fmax = floors.iter().map(|f| f.1).fold(0.0, f64::max);
    let spread = (fmax - fmin) / fmin;
    let slopes_ok = slopes.iter().all(|s| (s.1 - 0.5).abs() <= 0.1);

    let ma = medians(&a);
    let mut floor_by_eps: Vec<(f64, f64)> = pick(&ma, "qpt-bare", "diamond")
        .into_iter()
        .fold(BTreeMap::<u64, (f64, f64, f64)>::new(), |mut acc, r| {
            let e = acc.entry(r.strength.to_bits()).or_insert((r.strength, f64::INFINITY, 0.0));
            if r.noise_power < e.1 {
                e.1 = r.noise_power;
                e.2 = r.value;
            }
            acc
        })
        .into_values()
        .map(|(s, _, v)| (s, v))
        .collect();
    floor_by_eps.sort_by(|x, y| x.0.total_cmp(&y.0));
    let monotone = floor_by_eps.windows(2).all(|w| w[0].1 < w[1].1);

    let slope_text: Vec<String> = slopes.iter().map(|(l, s, n)| format!("{l} {s:.3} ({n} pts)")).collect();
    let floor_text: Vec<String> = floor_by_eps.iter().map(|(s, v)| format!("{s:.0e}:{v:.2e}")).collect();
    verdict(
        4,
        slopes_ok && spread < 0.2 && monotone && t < Duration::from_secs(300),
        format!(
            "slopes [{}] (0.5 +- 0.1), floor spread {:.1}% (< 20%), floors by eps [{}] monotone={monotone}, {} (< 5 min)",
            slope_text.join(", "),
            100.0 * spread,
            floor_text.join(", "),
            secs(t)
        ),
    );
}

#[test]
fn criterion_05_coherent_incoherent_dichotomy() {
    let start = Instant::now();
    let spec = CampaignSpec::template(Template::Fig2);
    assert_eq!(spec.trials, 50);
    let result = run_campaign(&spec).unwrap();
    let t = start.elapsed();
    let med = medians(&result);
    let mut by_model: BTreeMap<String, Vec<(f64, f64)>> = BTreeMap::new();
    for r in pick(&med, "qpt", "error-ratio") {
        by_model.entry(r.model.clone()).or_default().push((r.spam_gate_error, r.value));
    }
    let mut ok = t < Duration::from_secs(600);
    let mut parts = Vec::new();
    for kind in ErrorKind::ALL {
        let mut pts = by_model.remove(kind.as_str()).expect("model present");
        pts.sort_by(|x, y| y.0.total_cmp(&x.0));
        let ratios: Vec<f64> = pts.iter().map(|p| p.1).collect();
        if kind.is_coherent() {
            let growth = ratios[ratios.len() - 1] / ratios[0];
            ok &= growth >= 10.0;
            parts.push(format!("{} growth {growth:.2}x (>= 10x)", kind.as_str()));
        } else {
            let hi = ratios.iter().copied().fold(0.0, f64::max);
            let lo = ratios.iter().copied().fold(f64::INFINITY, f64::min);
            ok &= hi / lo <= 3.0;
            parts.push(format!("{} spread {:.2}x (<= 3x)", kind.as_str(), hi / lo));
        }
    }
    verdict(5, ok, format!("{}; {} (< 10 min)", parts.join(", "), secs(t)));
}

/// One fig4-style run shared by the improvement and likelihood criteria.
fn gate_set_campaign() -> &'static (CampaignResult, Duration) {
    static RUN: OnceLock<(CampaignResult, Duration)> = OnceLock::new();
    RUN.get_or_init(|| {
        let mut spec = CampaignSpec::template(Template::Fig4);
        assert_eq!(spec.trials, 50);
        spec.estimators = vec![EstimatorKind::Qpt, EstimatorKind::Sc];
        spec.metrics = vec![CampaignMetric::FidelityError, CampaignMetric::LsqRatio];
        let start = Instant::now();
        let result = run_campaign(&spec).unwrap();
        (result, start.elapsed())
    })
}

#[test]
fn criterion_06_self_consistent_improvement() {
    let (result, t) = gate_set_campaign();
    let med = medians(result);
    let qpt = pick(&med, "qpt", "fidelity-error");
    let sc = pick(&med, "sc", "fidelity-error");
    let mut ok = *t < Duration::from_secs(1200) && qpt.len() == 3 && sc.len() == 3;
    let mut ratios = Vec::new();
    for (q, s) in qpt.iter().zip(&sc) {
        assert_eq!(q.point, s.point);
        ok &= s.value < q.value;
        ratios.push((q.spam_gate_error, s.value / q.value));
    }
    // Strengths run 1e-2, 1e-3, 1e-4: the ratio must fall along that order.
    ratios.sort_by(|x, y| y.0.total_cmp(&x.0));
    ok &= ratios.windows(2).all(|w| w[1].1 < w[0].1);
    let text: Vec<String> = qpt
        .iter()
        .zip(&sc)
        .map(|(q, s)| format!("{:.0e}: qpt {:.2e} sc {:.2e}", q.spam_gate_error, q.value, s.value))
        .collect();
    let rtext: Vec<String> = ratios.iter().map(|r| format!("{:.3}", r.1)).collect();
    verdict(6, ok, format!("{}; sc/qpt ratios [{}]; {} (< 20 min)", text.join(", "), rtext.join(", "), secs(*t)));
}

#[test]
fn criterion_07_likelihood_ratio() {
    let (result, _) = gate_set_campaign();
    let mut qpt: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    let mut sc: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for r in result.rows.iter().filter(|r| r.metric == "lsq-ratio") {
        let slot = if r.estimator == "qpt" { &mut qpt } else { &mut sc };
        slot.insert((r.point, r.trial), r.value);
    }
    let total = qpt.len();
    let wins = qpt.iter().filter(|(k, q)| sc.get(k).is_some_and(|s| s <= q)).count();
    let frac = wins as f64 / total as f64;
    verdict(
        7,
        total == 150 && frac >= 0.9,
        format!("sc lsq ratio <= qpt lsq ratio in {wins}/{total} trials ({:.1}%, >= 90%)", 100.0 * frac),
    );
}

#[test]
fn criterion_08_frame_invariance() {
    let mut g = rng(108);
    let lib = standard_library(LibraryName::CardinalSix)
        .map_gates(|_, r| Ok(random_cptp(2, &mut g).compose(r)))
        .unwrap();
    let plan = ExperimentPlan::new(lib.clone());
    let base = exact_triples(&lib, &plan.rho0, &plan.m0);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let phi = g.gen::<f64>() * std::f64::consts::TAU;
        let moved = exact_triples(&transform_library(&lib, phi), &plan.rho0, &plan.m0);
        for (x, y) in base.iter().zip(&moved) {
            worst = worst.max((x.value - y.value).abs());
        }
    }
    verdict(8, worst < 1e-12, format!("1000 frames, max triple change {worst:.2e} (< 1e-12)"));
}

#[test]
fn criterion_09_diamond_norm() {
    let mut g = rng(109);
    let mut max_gap: f64 = 0.0;
    let mut zero: f64 = 0.0;
    for _ in 0..10 {
        let a = random_cptp(2, &mut g);
        let rep = diamond_report(&a, &a.clone()).unwrap();
        zero = zero.max(rep.value);
        max_gap = max_gap.max(rep.gap);
    }
    let xpi = standard_library(LibraryName::CardinalSix).gate(1).clone();
    let two = diamond_report(&PauliTransferMatrix::identity(2), &xpi).unwrap();
    max_gap = max_gap.max(two.gap);
    let mut worst: f64 = 0.0;
    for k in 0..50 {
        let a = random_cptp(2, &mut g);
        let b = if k % 2 == 0 { random_cptp(2, &mut g) } else { random_unitary_ptm(2, &mut g) };
        let rep = diamond_report(&a, &b).unwrap();
        max_gap = max_gap.max(rep.gap);
        worst = worst.max((rep.value - common::diamond_oracle(&a, &b)).abs());
    }
    verdict(
        9,
        zero < 1e-12 && (two.value - 2.0).abs() < 1e-7 && worst < 1e-4 && max_gap < 1e-7,
        format!(
            "equal {zero:.1e}, I vs X_pi {:.9}, max oracle deviation {worst:.2e} (< 1e-4), max gap {max_gap:.2e} (< 1e-7)",
            two.value
        ),
    );
}

#[test]
fn criterion_10_projection_optimality() {
    let mut g = rng(110);
    let pool: Vec<DMatrix<f64>> = (0..100_000).map(|_| random_cptp(2, &mut g).into_matrix()).collect();
    let mut beaten = 0;
    let mut sdp_dev: f64 = 0.0;
    let mut max_gap: f64 = 0.0;
    for _ in 0..200 {
        let base = random_cptp(2, &mut g);
        let noise = DMatrix::from_fn(4, 4, |_, _| 0.3 * (g.gen::<f64>() - 0.5));
        let r0 = PauliTransferMatrix::new(2, base.matrix() + noise).unwrap();
        let p = project_cptp(&r0).unwrap();
        let best_pool = pool.iter().map(|c| (c - r0.matrix()).norm()).fold(f64::INFINITY, f64::min);
        if best_pool < p.distance - 1e-10 {
            beaten += 1;
        }
        let (_, dist, gap) = common::cptp_projection_sdp(&r0);
        sdp_dev = sdp_dev.max((p.distance - dist).abs());
        max_gap = max_gap.max(gap);
    }
    verdict(
        10,
        beaten == 0 && sdp_dev < 1e-7,
        format!(
            "200 inputs, 1e5-point search beat the projection {beaten} times, \
             |distance - SDP distance| {sdp_dev:.2e} (< 1e-7, SDP gap {max_gap:.1e})"
        ),
    );
}

#[test]
fn criterion_11_gradient_check() {
    let lib = standard_library(LibraryName::CardinalSix);
    let plan = ExperimentPlan::new(lib.clone())
        .with_error(ErrorModel::new(ErrorKind::RandomUnitaryPerGate, 0.05).with_seed(1))
        .with_noise(1e-4)
        .with_seed(1);
    let sys = build_linearized_system(&simulate_triples(&plan).unwrap(), &lib, &plan.rho0, &plan.m0).unwrap();
    let mut g = rng(111);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let maps: Vec<PauliTransferMatrix> = (0..lib.len()).map(|_| random_cptp(2, &mut g)).collect();
        let x = sys.stack(&maps);
        let grad = sys.gradient(&x);
        let h = 1e-5;
        let fd = DVector::from_fn(x.len(), |c, _| {
            let mut p = x.clone();
            let mut m = x.clone();
            p[c] += h;
            m[c] -= h;
            (sys.objective(&p) - sys.objective(&m)) / (2.0 * h)
        });
        worst = worst.max((&fd - &grad).norm() / grad.norm());
    }
    verdict(11, worst < 1e-6, format!("20 feasible points, max relative error {worst:.2e} (< 1e-6)"));
}

#[test]
fn criterion_12_determinism() {
    let mut specs = Vec::new();
    let mut fig1 = CampaignSpec::template(Template::Fig1b);
    fig1.trials = 4;
    fig1.seed = 12;
    specs.push(fig1);
    let mut fig2 = CampaignSpec::template(Template::Fig2);
    fig2.trials = 4;
    fig2.seed = 12;
    specs.push(fig2);
    let mut fig4 = CampaignSpec::template(Template::Fig4);
    fig4.trials = 3;
    fig4.seed = 12;
    specs.push(fig4);
    let mut same = true;
    let mut bytes = 0;
    for spec in &specs {
        let one = run_campaign_with_jobs(spec, 1).unwrap().to_csv().unwrap();
        let eight = run_campaign_with_jobs(spec, 8).unwrap().to_csv().unwrap();
        let again = run_campaign_with_jobs(spec, 8).unwrap().to_csv().unwrap();
        same &= one == eight && eight == again;
        bytes += one.len();
    }
    verdict(12, same, format!("fig1b, fig2 and fig4 campaigns ({bytes} bytes) identical across jobs 1, 8 and a rerun"));
}
