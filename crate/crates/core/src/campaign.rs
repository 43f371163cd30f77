//! Declarative simulation campaigns: sweeps over libraries, error models,
//! strengths and noise powers, with one long-format row per
//! `(point, trial, estimator, metric)`.

use std::collections::HashMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::channels::{
    mean_gate_error, standard_library, strength_for_gate_error, ErrorKind, ErrorModel, LibraryName, Placement,
};
use crate::error::{Error, Result};
use crate::metrics::{avg_gate_fidelity_error, diamond_distance, library_distance, Metric};
use crate::qpt::{qpt_gate_set, qpt_pipeline};
use crate::random::derive_seed;
use crate::scqpt::{estimate_gate_set, exact_lsq, gauge_optimize};
use crate::sim::{simulate_pairs, simulate_triples, ExperimentPlan};
use crate::superop::PauliTransferMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Template {
    Fig1a,
    Fig1b,
    Fig2,
    Fig3,
    Fig4,
    Fig5,
    Custom,
}

impl Template {
    pub const ALL: [Template; 7] =
        [Template::Fig1a, Template::Fig1b, Template::Fig2, Template::Fig3, Template::Fig4, Template::Fig5, Template::Custom];

    pub fn as_str(&self) -> &'static str {
        match self {
            Template::Fig1a => "fig1a",
            Template::Fig1b => "fig1b",
            Template::Fig2 => "fig2",
            Template::Fig3 => "fig3",
            Template::Fig4 => "fig4",
            Template::Fig5 => "fig5",
            Template::Custom => "custom",
        }
    }
}

impl fmt::Display for Template {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Template {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Template::ALL
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown template {s:?}")))
    }
}

/// What each trial reconstructs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    /// QPT of a perfect identity from pair records with faulty SPAM gates.
    Identity,
    /// Whole-library reconstruction from triple records.
    GateSet,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EstimatorKind {
    /// Linear-inversion estimate, before projection.
    QptBare,
    /// Projected QPT estimate.
    Qpt,
    /// Self-consistent gate-set estimate.
    Sc,
}

impl EstimatorKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            EstimatorKind::QptBare => "qpt-bare",
            EstimatorKind::Qpt => "qpt",
            EstimatorKind::Sc => "sc",
        }
    }
}

impl fmt::Display for EstimatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EstimatorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "qpt-bare" => Ok(EstimatorKind::QptBare),
            "qpt" => Ok(EstimatorKind::Qpt),
            "sc" => Ok(EstimatorKind::Sc),
            _ => Err(Error::InvalidParameter(format!("unknown estimator {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CampaignMetric {
    FidelityError,
    Diamond,
    /// Fidelity error divided by the realized mean SPAM gate error.
    ErrorRatio,
    /// Exact objective of the estimate over that of the ideal gates.
    LsqRatio,
}

impl CampaignMetric {
    pub fn as_str(&self) -> &'static str {
        match self {
            CampaignMetric::FidelityError => "fidelity-error",
            CampaignMetric::Diamond => "diamond",
            CampaignMetric::ErrorRatio => "error-ratio",
            CampaignMetric::LsqRatio => "lsq-ratio",
        }
    }
}

impl fmt::Display for CampaignMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CampaignMetric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [CampaignMetric::FidelityError, CampaignMetric::Diamond, CampaignMetric::ErrorRatio, CampaignMetric::LsqRatio]
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown campaign metric {s:?}")))
    }
}

/// How the `strengths` axis is read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StrengthMode {
    /// Model strengths as given.
    #[default]
    Nominal,
    /// Target mean gate errors, converted to strengths per model and library.
    GateError,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CampaignSpec {
    pub template: Template,
    pub experiment: Experiment,
    pub libraries: Vec<LibraryName>,
    pub models: Vec<ErrorKind>,
    pub strengths: Vec<f64>,
    #[serde(default)]
    pub strength_mode: StrengthMode,
    pub noise_powers: Vec<f64>,
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    pub estimators: Vec<EstimatorKind>,
    pub metrics: Vec<CampaignMetric>,
}

/// `count` log-spaced values from `lo` to `hi`.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count <= 1 {
        return vec![lo];
    }
    let (a, b) = (lo.log10(), hi.log10());
    (0..count).map(|k| 10f64.powf(a + (b - a) * k as f64 / (count - 1) as f64)).collect()
}

impl CampaignSpec {
    /// Default sweep for a figure template. `custom` starts from the fig1a
    /// axes and is meant to be overridden.
    pub fn template(t: Template) -> CampaignSpec {
        let noise = log_grid(1e-8, 1e-1, 15);
        let targets = vec![1e-2, 1e-3, 1e-4];
        match t {
            Template::Fig1a | Template::Custom => CampaignSpec {
                template: t,
                experiment: Experiment::Identity,
                libraries: vec![LibraryName::Tetrahedral],
                models: vec![ErrorKind::Depolarizing],
                strengths: vec![1e-2, 1e-3, 1e-4],
                strength_mode: StrengthMode::Nominal,
                noise_powers: noise,
                trials: 10,
                seed: 0,
                estimators: vec![EstimatorKind::QptBare],
                metrics: vec![CampaignMetric::Diamond],
            },
            Template::Fig1b => CampaignSpec {
                template: t,
                libraries: LibraryName::ALL.to_vec(),
                strengths: vec![1e-3],
                ..CampaignSpec::template(Template::Fig1a)
            },
            Template::Fig2 => CampaignSpec {
                template: t,
                experiment: Experiment::Identity,
                libraries: vec![LibraryName::Tetrahedral],
                models: ErrorKind::ALL.to_vec(),
                strengths: targets,
                strength_mode: StrengthMode::GateError,
                noise_powers: vec![0.0],
                trials: 50,
                seed: 0,
                estimators: vec![EstimatorKind::Qpt],
                metrics: vec![CampaignMetric::FidelityError, CampaignMetric::ErrorRatio],
            },
            Template::Fig3 => CampaignSpec {
                template: t,
                experiment: Experiment::Identity,
                libraries: LibraryName::ALL.to_vec(),
                models: vec![ErrorKind::Depolarizing, ErrorKind::RandomUnitaryPerGate, ErrorKind::GlobalUnitary],
                strengths: log_grid(1e-5, 1e-1, 5),
                strength_mode: StrengthMode::GateError,
                noise_powers: vec![0.0],
                trials: 20,
                seed: 0,
                estimators: vec![EstimatorKind::Qpt],
                metrics: vec![CampaignMetric::FidelityError, CampaignMetric::Diamond],
            },
            Template::Fig4 => CampaignSpec {
                template: t,
                experiment: Experiment::GateSet,
                libraries: vec![LibraryName::CardinalSix],
                models: vec![ErrorKind::RandomUnitaryPerGate],
                strengths: targets,
                strength_mode: StrengthMode::GateError,
                noise_powers: vec![0.0],
                trials: 50,
                seed: 0,
                estimators: vec![EstimatorKind::Qpt, EstimatorKind::Sc],
                metrics: vec![CampaignMetric::FidelityError, CampaignMetric::Diamond, CampaignMetric::ErrorRatio],
            },
            Template::Fig5 => CampaignSpec {
                template: t,
                metrics: vec![CampaignMetric::LsqRatio],
                ..CampaignSpec::template(Template::Fig4)
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        let empty = |name: &str, len: usize| {
            if len == 0 {
                Err(Error::InvalidParameter(format!("campaign axis {name} is empty")))
            } else {
                Ok(())
            }
        };
        empty("libraries", self.libraries.len())?;
        empty("models", self.models.len())?;
        empty("strengths", self.strengths.len())?;
        empty("noise_powers", self.noise_powers.len())?;
        empty("estimators", self.estimators.len())?;
        empty("metrics", self.metrics.len())?;
        if self.trials == 0 {
            return Err(Error::InvalidParameter("trials must be at least 1".into()));
        }
        if let Some(n) = self.noise_powers.iter().find(|n| !(n.is_finite() && **n >= 0.0)) {
            return Err(Error::InvalidParameter(format!("noise power {n} must be finite and non-negative")));
        }
        for &kind in &self.models {
            for &s in &self.strengths {
                match self.strength_mode {
                    StrengthMode::Nominal => ErrorModel::new(kind, s).validate()?,
                    StrengthMode::GateError if !(s.is_finite() && s >= 0.0) => {
                        return Err(Error::InvalidParameter(format!("gate-error target {s} must be non-negative")))
                    }
                    StrengthMode::GateError => {}
                }
            }
        }
        for &e in &self.estimators {
            let ok = match self.experiment {
                Experiment::Identity => e != EstimatorKind::Sc,
                Experiment::GateSet => e != EstimatorKind::QptBare,
            };
            if !ok {
                return Err(Error::InvalidParameter(format!("estimator {e} does not apply to {:?} experiments", self.experiment)));
            }
        }
        if self.experiment == Experiment::Identity && self.metrics.contains(&CampaignMetric::LsqRatio) {
            return Err(Error::InvalidParameter("lsq-ratio needs gate-set experiments".into()));
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("spec serializes");
        let digest = Sha256::digest(json.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Sweep points in `library × model × strength × noise` order.
    pub fn points(&self) -> Result<Vec<Point>> {
        let mut out = Vec::new();
        for &library in &self.libraries {
            let ideal = standard_library(library);
            for &model in &self.models {
                for &s in &self.strengths {
                    let strength = match self.strength_mode {
                        StrengthMode::Nominal => s,
                        StrengthMode::GateError => strength_for_gate_error(model, s, &ideal, Placement::PostGate)?,
                    };
                    for &noise_power in &self.noise_powers {
                        out.push(Point { index: out.len(), library, model, strength, noise_power });
                    }
                }
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub index: usize,
    pub library: LibraryName,
    pub model: ErrorKind,
    pub strength: f64,
    pub noise_power: f64,
}

/// One long-format output row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub template: String,
    pub point: usize,
    pub trial: usize,
    pub library: String,
    pub model: String,
    pub strength: f64,
    pub noise_power: f64,
    /// Realized mean gate error of the faulty SPAM library.
    pub spam_gate_error: f64,
    pub estimator: String,
    pub metric: String,
    pub value: f64,
    /// `ok`, or why the value is unreliable (never dropped).
    pub flag: String,
}

pub const CSV_HEADER: &str =
    "template,point,trial,library,model,strength,noise_power,spam_gate_error,estimator,metric,value,flag";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub spec_hash: String,
    pub seed: u64,
    pub version: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CampaignResult {
    pub spec: CampaignSpec,
    pub provenance: Provenance,
    pub rows: Vec<Row>,
}

struct Outcome {
    estimator: EstimatorKind,
    metric: CampaignMetric,
    value: f64,
    flag: String,
}

fn trial_rows(spec: &CampaignSpec, point: &Point, trial: usize) -> Vec<Row> {
    let model_seed = derive_seed(spec.seed, &[point.index, trial, 0]);
    let noise_seed = derive_seed(spec.seed, &[point.index, trial, 1]);
    let ideal = standard_library(point.library);
    let plan = ExperimentPlan::new(ideal.clone())
        .with_error(ErrorModel::new(point.model, point.strength).with_seed(model_seed))
        .with_noise(point.noise_power)
        .with_seed(noise_seed);
    let spam = plan.faulty_library().and_then(|f| mean_gate_error(&ideal, &f)).unwrap_or(f64::NAN);
    let outcomes = match spec.experiment {
        Experiment::Identity => identity_trial(spec, &plan, spam),
        Experiment::GateSet => gate_set_trial(spec, &plan, spam),
    };
    let make = |estimator: String, metric: String, value: f64, flag: String| Row {
        template: spec.template.to_string(),
        point: point.index,
        trial,
        library: point.library.to_string(),
        model: point.model.to_string(),
        strength: point.strength,
        noise_power: point.noise_power,
        spam_gate_error: spam,
        estimator,
        metric,
        value,
        flag,
    };
    match outcomes {
        Ok(list) => list
            .into_iter()
            .map(|o| make(o.estimator.to_string(), o.metric.to_string(), o.value, o.flag))
            .collect(),
        Err(e) => {
            log::warn!("point {} trial {trial} failed: {e}", point.index);
            let flag = format!("error: {e}");
            let mut rows = Vec::new();
            for est in &spec.estimators {
                for m in &spec.metrics {
                    rows.push(make(est.to_string(), m.to_string(), f64::NAN, flag.clone()));
                }
            }
            rows
        }
    }
}

fn identity_trial(spec: &CampaignSpec, plan: &ExperimentPlan, spam: f64) -> Result<Vec<Outcome>> {
    let id = PauliTransferMatrix::identity(plan.dim());
    let recs = simulate_pairs(plan, &id)?;
    let res = qpt_pipeline(&recs, plan)?;
    let mut out = Vec::new();
    for &est in &spec.estimators {
        let (r, flag) = match est {
            EstimatorKind::QptBare => (&res.bare.r_est, if res.bare.pseudo_inverse { "pseudo-inverse" } else { "ok" }),
            _ => (&res.physical.r_phys, if res.physical.converged { "ok" } else { "projection-nonconverged" }),
        };
        for &metric in &spec.metrics {
            let value = match metric {
                CampaignMetric::FidelityError => avg_gate_fidelity_error(r, &id)?,
                CampaignMetric::Diamond => diamond_distance(r, &id)?,
                CampaignMetric::ErrorRatio => avg_gate_fidelity_error(r, &id)? / spam,
                CampaignMetric::LsqRatio => unreachable!("rejected by validate"),
            };
            out.push(Outcome { estimator: est, metric, value, flag: flag.to_string() });
        }
    }
    Ok(out)
}

/// QPT per gate and the self-consistent estimate on the same triples; both
/// are compared to the true faulty library in their most favorable diagonal
/// frame, chosen on fidelity error.
fn gate_set_trial(spec: &CampaignSpec, plan: &ExperimentPlan, spam: f64) -> Result<Vec<Outcome>> {
    let truth = plan.faulty_library()?;
    let ideal = &plan.library;
    let recs = simulate_triples(plan)?;
    let ideal_lsq = exact_lsq(ideal, &recs, &plan.rho0, &plan.m0)?;
    let mut out = Vec::new();
    for &est in &spec.estimators {
        let (gates, flag) = match est {
            EstimatorKind::Sc => {
                let e = estimate_gate_set(&recs, ideal, &plan.rho0, &plan.m0)?;
                let flag = if e.converged { "ok" } else { "solver-nonconverged" };
                let fixed = gauge_optimize(&e, &truth, Metric::FidelityError, &plan.rho0, &plan.m0)?;
                (fixed.gates, flag)
            }
            _ => {
                let (lib, results) = qpt_gate_set(&recs, ideal, &plan.rho0, &plan.m0)?;
                let flag = if results.iter().all(|r| r.physical.converged) { "ok" } else { "projection-nonconverged" };
                let wrapped = crate::scqpt::GateSetEstimate {
                    error_maps: lib.gates().iter().zip(ideal.gates()).map(|(g, r)| g.compose(&r.transpose())).collect(),
                    gates: lib,
                    lsq_linear: f64::NAN,
                    lsq_exact: None,
                    iterations: 0,
                    converged: true,
                    gradient_norm: 0.0,
                    gauge_phi: 0.0,
                };
                (gauge_optimize(&wrapped, &truth, Metric::FidelityError, &plan.rho0, &plan.m0)?.gates, flag)
            }
        };
        for &metric in &spec.metrics {
            let value = match metric {
                CampaignMetric::FidelityError => library_distance(&gates, &truth, Metric::FidelityError)?,
                CampaignMetric::Diamond => library_distance(&gates, &truth, Metric::Diamond)?,
                CampaignMetric::ErrorRatio => library_distance(&gates, &truth, Metric::FidelityError)? / spam,
                CampaignMetric::LsqRatio => exact_lsq(&gates, &recs, &plan.rho0, &plan.m0)? / ideal_lsq,
            };
            out.push(Outcome { estimator: est, metric, value, flag: flag.to_string() });
        }
    }
    Ok(out)
}

/// Run every `(point, trial)` on the current rayon pool. Rows come back in
/// `(point, trial)` order whatever the worker count.
pub fn run_campaign(spec: &CampaignSpec) -> Result<CampaignResult> {
    spec.validate()?;
    let points = spec.points()?;
    let tasks: Vec<(usize, usize)> =
        (0..points.len()).flat_map(|p| (0..spec.trials).map(move |t| (p, t))).collect();
    let rows: Vec<Row> = tasks
        .par_iter()
        .map(|&(p, t)| trial_rows(spec, &points[p], t))
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect();
    Ok(CampaignResult {
        spec: spec.clone(),
        provenance: Provenance {
            spec_hash: spec.hash(),
            seed: spec.seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
        },
        rows,
    })
}

/// Same as [`run_campaign`] on a dedicated pool of `jobs` workers.
pub fn run_campaign_with_jobs(spec: &CampaignSpec, jobs: usize) -> Result<CampaignResult> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
    pool.install(|| run_campaign(spec))
}

impl CampaignResult {
    /// Long-format CSV with a `#` provenance header.
    pub fn to_csv(&self) -> Result<String> {
        let mut out = String::new();
        out.push_str(&format!("# gateset-forge {}\n", self.provenance.version));
        out.push_str(&format!("# template {}\n", self.spec.template));
        out.push_str(&format!("# spec_hash {}\n", self.provenance.spec_hash));
        out.push_str(&format!("# seed {}\n", self.provenance.seed));
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in &self.rows {
            w.serialize(r).map_err(|e| Error::InvalidParameter(format!("csv: {e}")))?;
        }
        let body = w.into_inner().map_err(|e| Error::InvalidParameter(format!("csv: {e}")))?;
        out.push_str(&String::from_utf8(body).expect("csv output is UTF-8"));
        Ok(out)
    }

    /// Write `campaign.csv` and `campaign.meta.json` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("campaign.csv"), self.to_csv()?)?;
        let meta = serde_json::json!({
            "spec": self.spec,
            "spec_hash": self.provenance.spec_hash,
            "seed": self.provenance.seed,
            "version": self.provenance.version,
            "rows": self.rows.len(),
        });
        std::fs::write(dir.join("campaign.meta.json"), serde_json::to_string_pretty(&meta)?)?;
        Ok(())
    }

    /// Rows whose flag is not `ok`.
    pub fn flagged(&self) -> impl Iterator<Item = &Row> {
        self.rows.iter().filter(|r| r.flag != "ok")
    }
}

/// Parse rows back from [`CampaignResult::to_csv`] output.
pub fn parse_campaign_csv(text: &str) -> Result<Vec<Row>> {
    let mut rd = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    rd.deserialize()
        .enumerate()
        .map(|(n, r)| r.map_err(|e| Error::Parse { line: n + 2, msg: e.to_string() }))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stat {
    Mean,
    Median,
    /// Linear-interpolated quantile in `[0, 1]`.
    Quantile(f64),
}

impl Stat {
    pub fn label(&self) -> String {
        match self {
            Stat::Mean => "mean".into(),
            Stat::Median => "median".into(),
            Stat::Quantile(q) => format!("q{q}"),
        }
    }

    /// Reduce `values` (NaNs are skipped; all-NaN gives NaN).
    pub fn apply(&self, values: &[f64]) -> f64 {
        let mut v: Vec<f64> = values.iter().copied().filter(|x| !x.is_nan()).collect();
        if v.is_empty() {
            return f64::NAN;
        }
        match self {
            Stat::Mean => v.iter().sum::<f64>() / v.len() as f64,
            Stat::Median => Stat::Quantile(0.5).apply(&v),
            Stat::Quantile(q) => {
                v.sort_by(f64::total_cmp);
                let pos = q.clamp(0.0, 1.0) * (v.len() - 1) as f64;
                let lo = pos.floor() as usize;
                let hi = pos.ceil() as usize;
                v[lo] + (v[hi] - v[lo]) * (pos - lo as f64)
            }
        }
    }
}

/// One reduced group: all trials of a `(point, estimator, metric)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub template: String,
    pub point: usize,
    pub library: String,
    pub model: String,
    pub strength: f64,
    pub noise_power: f64,
    /// Mean realized SPAM gate error over the group's trials.
    pub spam_gate_error: f64,
    pub estimator: String,
    pub metric: String,
    pub stat: String,
    pub value: f64,
    pub trials: usize,
    /// Trials whose flag was not `ok`.
    pub flagged: usize,
}

/// Group rows by point, estimator and metric (first-appearance order) and
/// reduce the trial values.
pub fn summarize(rows: &[Row], stat: Stat) -> Vec<SummaryRow> {
    let mut index: HashMap<(usize, &str, &str), usize> = HashMap::new();
    let mut groups: Vec<Vec<&Row>> = Vec::new();
    for r in rows {
        let key = (r.point, r.estimator.as_str(), r.metric.as_str());
        let slot = *index.entry(key).or_insert_with(|| {
            groups.push(Vec::new());
            groups.len() - 1
        });
        groups[slot].push(r);
    }
    groups
        .into_iter()
        .map(|g| {
            let first = g[0];
            let values: Vec<f64> = g.iter().map(|r| r.value).collect();
            let spam: Vec<f64> = g.iter().map(|r| r.spam_gate_error).collect();
            SummaryRow {
                template: first.template.clone(),
                point: first.point,
                library: first.library.clone(),
                model: first.model.clone(),
                strength: first.strength,
                noise_power: first.noise_power,
                spam_gate_error: Stat::Mean.apply(&spam),
                estimator: first.estimator.clone(),
                metric: first.metric.clone(),
                stat: stat.label(),
                value: stat.apply(&values),
                trials: g.len(),
                flagged: g.iter().filter(|r| r.flag != "ok").count(),
            }
        })
        .collect()
}

/// Summary rows as CSV.
pub fn summary_to_csv(rows: &[SummaryRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| Error::InvalidParameter(format!("csv: {e}")))?;
    }
    let body = w.into_inner().map_err(|e| Error::InvalidParameter(format!("csv: {e}")))?;
    Ok(String::from_utf8(body).expect("csv output is UTF-8"))
}
