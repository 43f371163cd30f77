use std::io::Write;
use std::path::{Path, PathBuf};

use gateset_forge::campaign::{run_campaign_with_jobs, summarize, summary_to_csv, CampaignSpec, EstimatorKind, Experiment, Stat};
use gateset_forge::channels::{is_two_design, standard_library, GateLibrary, LibraryJson, LibraryName};
use gateset_forge::metrics::{average_row, metric_rows, Metric, MetricRow};
use gateset_forge::qpt::{qpt_gate_set, qpt_pipeline};
use gateset_forge::scqpt::{estimate_gate_set, gauge_optimize, GateSetEstimate};
use gateset_forge::sim::{
    ingest_records, simulate_pairs, simulate_triples, write_records, ExperimentPlan, ExperimentRecord, RecordMeta,
};
use gateset_forge::superop::{PauliTransferMatrix, StateVector};
use serde::Serialize;

use crate::config::{
    ground_state, parse_error_spec, read_channel_file, read_json, resolve_seed, ExperimentKind, LibrarySource,
    MeasurementKind, SimulateConfig,
};
use crate::error::{CliError, CliResult};
use crate::{CampaignArgs, EstimatorChoice, IngestArgs, MetricsArgs, ReconstructArgs, SimulateArgs, ValidateArgs};

fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    std::fs::write(path, serde_json::to_string_pretty(value)? + "\n")?;
    Ok(())
}

fn print_json<T: Serialize>(value: &T) -> CliResult<()> {
    let mut out = std::io::stdout().lock();
    writeln!(out, "{}", serde_json::to_string_pretty(value)?)?;
    Ok(())
}

#[derive(Serialize)]
struct EffectivePlan<'a> {
    library: Vec<String>,
    errors: &'a [gateset_forge::channels::ErrorModel],
    noise_power: f64,
    seed: u64,
    experiment: ExperimentKind,
    measurement: MeasurementKind,
    records: usize,
    output: &'a Path,
}

pub fn simulate(args: &SimulateArgs) -> CliResult<()> {
    let mut cfg: SimulateConfig = match &args.config {
        Some(p) => read_json(p)?,
        None => SimulateConfig::default(),
    };
    if let Some(name) = args.library {
        cfg.library = LibrarySource::Named(name);
    }
    if !args.error.is_empty() {
        cfg.errors = args.error.iter().map(|e| parse_error_spec(e)).collect::<CliResult<_>>()?;
    }
    if let Some(n) = args.noise {
        cfg.noise_power = n;
    }
    if let Some(e) = args.experiment {
        cfg.experiment = e;
    }
    if let Some(m) = args.measurement {
        cfg.measurement = m;
    }
    let seed = resolve_seed(args.seed, cfg.seed)?;
    let library = cfg.library.load()?;
    let dim = library.dim();
    let mut plan = ExperimentPlan::new(library)
        .with_noise(cfg.noise_power)
        .with_seed(seed)
        .with_measurement(cfg.measurement.vector(dim)?);
    for e in &cfg.errors {
        plan = plan.with_error(*e);
    }
    plan.validate()?;
    let mut meta = RecordMeta::from_plan(&plan);
    let records = match cfg.experiment {
        ExperimentKind::Triples => simulate_triples(&plan)?,
        ExperimentKind::Pairs => {
            let channel = match (&args.channel, &cfg.channel) {
                (Some(path), _) => match read_channel_file(path)? {
                    crate::config::ChannelFile::Single(r) => r,
                    crate::config::ChannelFile::Library(_) => {
                        return Err(CliError::Validation("--channel expects a single PTM".into()))
                    }
                },
                (None, Some(j)) => PauliTransferMatrix::from_json(j)?,
                (None, None) => PauliTransferMatrix::identity(dim),
            };
            meta.channel = Some(channel.to_json());
            simulate_pairs(&plan, &channel)?
        }
    };
    if let Some(dir) = args.out.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)?;
        }
    }
    write_records(&args.out, &records, &meta)?;
    print_json(&EffectivePlan {
        library: plan.library.labels().to_vec(),
        errors: &plan.errors,
        noise_power: cfg.noise_power,
        seed,
        experiment: cfg.experiment,
        measurement: cfg.measurement,
        records: records.len(),
        output: &args.out,
    })
}

pub fn campaign(args: &CampaignArgs) -> CliResult<()> {
    let mut spec = match (&args.config, args.template) {
        (Some(p), _) => read_json::<CampaignSpec>(p)?,
        (None, Some(t)) => CampaignSpec::template(t),
        (None, None) => return Err(CliError::Validation("give --template or --config".into())),
    };
    if let Some(t) = args.trials {
        spec.trials = t;
    }
    if !args.library.is_empty() {
        spec.libraries = args.library.clone();
    }
    if !args.noise.is_empty() {
        spec.noise_powers = args.noise.clone();
    }
    if let Some(e) = args.estimator {
        spec.estimators = match (e, spec.experiment) {
            (EstimatorChoice::Qpt, Experiment::Identity) => vec![EstimatorKind::Qpt],
            (EstimatorChoice::Qpt, Experiment::GateSet) => vec![EstimatorKind::Qpt],
            (EstimatorChoice::Sc, _) => vec![EstimatorKind::Sc],
            (EstimatorChoice::Both, Experiment::Identity) => vec![EstimatorKind::QptBare, EstimatorKind::Qpt],
            (EstimatorChoice::Both, Experiment::GateSet) => vec![EstimatorKind::Qpt, EstimatorKind::Sc],
        };
    }
    let config_seed = if args.config.is_some() { Some(spec.seed) } else { None };
    spec.seed = resolve_seed(args.seed, config_seed)?;
    spec.validate()?;
    let result = run_campaign_with_jobs(&spec, args.jobs)?;
    result.write(&args.out)?;
    if let Some(stat) = &args.summary {
        let stat = match stat.as_str() {
            "mean" => Stat::Mean,
            "median" => Stat::Median,
            q => Stat::Quantile(
                q.strip_prefix('q')
                    .and_then(|v| v.parse().ok())
                    .ok_or_else(|| CliError::Validation(format!("summary {q:?} is not mean, median or q<fraction>")))?,
            ),
        };
        std::fs::write(args.out.join("campaign.summary.csv"), summary_to_csv(&summarize(&result.rows, stat))?)?;
    }
    let flagged = result.flagged().count();
    eprintln!(
        "{} rows for {} points x {} trials written to {}",
        result.rows.len(),
        spec.points()?.len(),
        spec.trials,
        args.out.display()
    );
    if flagged > 0 {
        return Err(CliError::NonConvergence(format!("{flagged} rows carry a non-ok flag; see the flag column")));
    }
    Ok(())
}

/// One line of the per-gate comparison table.
#[derive(Debug, Serialize)]
struct TableRow {
    gate: String,
    fidelity_error_qpt: Option<f64>,
    fidelity_error_sc: Option<f64>,
    diamond_qpt: Option<f64>,
    diamond_sc: Option<f64>,
}

fn target_library(meta: &RecordMeta, flag: Option<LibraryName>) -> CliResult<GateLibrary> {
    if let Some(name) = flag {
        let lib = standard_library(name);
        if lib.len() != meta.labels.len() {
            return Err(CliError::Validation(format!(
                "--library {name} has {} gates but the records declare {}",
                lib.len(),
                meta.labels.len()
            )));
        }
        return Ok(lib);
    }
    meta.gate_library()?
        .ok_or_else(|| CliError::Validation("the sidecar has no library; pass --library".into()))
}

fn gauge_fix(est: &GateSetEstimate, target: &GateLibrary, rho0: &StateVector, meta: &RecordMeta) -> CliResult<GateSetEstimate> {
    match gauge_optimize(est, target, Metric::FidelityError, rho0, &meta.measurement()?) {
        Ok(fixed) => Ok(fixed),
        Err(gateset_forge::Error::Inapplicable(why)) => {
            log::warn!("gauge optimization skipped: {why}");
            Ok(est.clone())
        }
        Err(e) => Err(e.into()),
    }
}

fn wrap_qpt(gates: GateLibrary, ideal: &GateLibrary) -> GateSetEstimate {
    GateSetEstimate {
        error_maps: gates.gates().iter().zip(ideal.gates()).map(|(g, r)| g.compose(&r.transpose())).collect(),
        gates,
        lsq_linear: f64::NAN,
        lsq_exact: None,
        iterations: 0,
        converged: true,
        gradient_norm: 0.0,
        gauge_phi: 0.0,
    }
}

pub fn reconstruct(args: &ReconstructArgs) -> CliResult<()> {
    let (records, meta) = ingest_records(&args.records)?;
    let rho0 = meta.state()?;
    let m0 = meta.measurement()?;
    let target = target_library(&meta, args.library)?;
    std::fs::create_dir_all(&args.out)?;
    let mut stalled = Vec::new();

    if records.iter().all(|r| !r.is_triple()) {
        if args.estimator == EstimatorChoice::Sc {
            return Err(CliError::Validation("pair records support QPT only".into()));
        }
        let plan = ExperimentPlan::new(target).with_state(rho0).with_measurement(m0);
        let res = qpt_pipeline(&records, &plan)?;
        if !res.physical.converged {
            stalled.push("CPTP projection".to_string());
        }
        write_json(&args.out.join("qpt_report.json"), &res.report())?;
        eprintln!("QPT report written to {}", args.out.join("qpt_report.json").display());
        return finish(stalled);
    }
    if records.iter().any(|r| !r.is_triple()) {
        return Err(CliError::Validation("record file mixes pairs and triples".into()));
    }

    let mut qpt_rows: Option<Vec<MetricRow>> = None;
    let mut sc_rows: Option<Vec<MetricRow>> = None;
    if matches!(args.estimator, EstimatorChoice::Qpt | EstimatorChoice::Both) {
        let (gates, results) = qpt_gate_set(&records, &target, &rho0, &m0)?;
        if results.iter().any(|r| !r.physical.converged) {
            stalled.push("QPT projection".to_string());
        }
        let fixed = gauge_fix(&wrap_qpt(gates, &target), &target, &rho0, &meta)?;
        write_json(&args.out.join("qpt_report.json"), &fixed.report(&target)?)?;
        qpt_rows = Some(metric_rows(&fixed.gates, &target)?);
    }
    if matches!(args.estimator, EstimatorChoice::Sc | EstimatorChoice::Both) {
        let est = estimate_gate_set(&records, &target, &rho0, &m0)?;
        if !est.converged {
            stalled.push(format!("self-consistent solve (gradient mapping {:.3e})", est.gradient_norm));
        }
        let fixed = gauge_fix(&est, &target, &rho0, &meta)?;
        write_json(&args.out.join("sc_report.json"), &fixed.report(&target)?)?;
        sc_rows = Some(metric_rows(&fixed.gates, &target)?);
    }
    let table = table_rows(&target, qpt_rows.as_deref(), sc_rows.as_deref());
    let mut w = csv::Writer::from_path(args.out.join("table.csv"))?;
    for row in &table {
        w.serialize(row)?;
    }
    w.flush()?;
    print_table(&table);
    finish(stalled)
}

fn table_rows(target: &GateLibrary, qpt: Option<&[MetricRow]>, sc: Option<&[MetricRow]>) -> Vec<TableRow> {
    let mut rows: Vec<TableRow> = target
        .labels()
        .iter()
        .enumerate()
        .map(|(g, label)| TableRow {
            gate: label.clone(),
            fidelity_error_qpt: qpt.map(|r| r[g].fidelity_error),
            fidelity_error_sc: sc.map(|r| r[g].fidelity_error),
            diamond_qpt: qpt.map(|r| r[g].diamond_distance),
            diamond_sc: sc.map(|r| r[g].diamond_distance),
        })
        .collect();
    let q_avg = qpt.map(|r| average_row(r, "<U>"));
    let s_avg = sc.map(|r| average_row(r, "<U>"));
    rows.push(TableRow {
        gate: "<U>".into(),
        fidelity_error_qpt: q_avg.as_ref().map(|r| r.fidelity_error),
        fidelity_error_sc: s_avg.as_ref().map(|r| r.fidelity_error),
        diamond_qpt: q_avg.as_ref().map(|r| r.diamond_distance),
        diamond_sc: s_avg.as_ref().map(|r| r.diamond_distance),
    });
    rows
}

fn print_table(rows: &[TableRow]) {
    let cell = |v: Option<f64>| v.map(|x| format!("{x:.4e}")).unwrap_or_else(|| "-".into());
    println!("{:<10} {:>12} {:>12} {:>12} {:>12}", "gate", "1-F (QPT)", "1-F (SC)", "<>(QPT)", "<>(SC)");
    for r in rows {
        println!(
            "{:<10} {:>12} {:>12} {:>12} {:>12}",
            r.gate,
            cell(r.fidelity_error_qpt),
            cell(r.fidelity_error_sc),
            cell(r.diamond_qpt),
            cell(r.diamond_sc)
        );
    }
}

fn finish(stalled: Vec<String>) -> CliResult<()> {
    if stalled.is_empty() {
        Ok(())
    } else {
        Err(CliError::NonConvergence(format!("did not converge: {}", stalled.join(", "))))
    }
}

fn file_label(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "channel".into())
}

#[derive(Serialize)]
struct MetricsReport {
    gauge_phi: Option<f64>,
    rows: Vec<MetricRow>,
    average: MetricRow,
}

pub fn metrics(args: &MetricsArgs) -> CliResult<()> {
    let a = read_channel_file(&args.estimate)?.into_library(&file_label(&args.estimate))?;
    let b = read_channel_file(&args.target)?.into_library(&file_label(&args.target))?;
    if a.len() != b.len() || a.dim() != b.dim() {
        return Err(CliError::Validation(format!(
            "{} gates (d={}) against {} gates (d={})",
            a.len(),
            a.dim(),
            b.len(),
            b.dim()
        )));
    }
    let (lib, phi) = if args.gauge {
        let rho0 = ground_state(a.dim())?;
        let m0 = MeasurementKind::Projector.vector(a.dim())?;
        let fixed = gauge_optimize(&wrap_qpt(a, &b), &b, args.metric, &rho0, &m0)?;
        (fixed.gates, Some(fixed.gauge_phi))
    } else {
        (a, None)
    };
    let rows = metric_rows(&lib, &b)?;
    let report = MetricsReport { gauge_phi: phi, average: average_row(&rows, "<U>"), rows };
    match &args.out {
        Some(p) => write_json(p, &report),
        None => print_json(&report),
    }
}

#[derive(Serialize)]
struct GateVerdict {
    label: String,
    trace_preserving: bool,
    first_row_deviation: f64,
    completely_positive: bool,
    choi_min_eigenvalue: f64,
}

#[derive(Serialize)]
struct ValidationReport {
    gates: Vec<GateVerdict>,
    two_design: Option<bool>,
    physical: bool,
}

pub fn validate(args: &ValidateArgs) -> CliResult<()> {
    const TOL: f64 = 1e-9;
    let raw: LibraryJson = match (&args.file, args.library) {
        (Some(p), _) => read_json(p)?,
        (None, Some(name)) => standard_library(name).to_json(),
        (None, None) => return Err(CliError::Validation("give a library file or --library".into())),
    };
    let gates: Vec<PauliTransferMatrix> =
        raw.gates.iter().map(PauliTransferMatrix::from_json).collect::<gateset_forge::Result<_>>()?;
    if gates.len() != raw.labels.len() || gates.is_empty() {
        return Err(CliError::Validation(format!("{} labels for {} gates", raw.labels.len(), gates.len())));
    }
    let verdicts: Vec<GateVerdict> = raw
        .labels
        .iter()
        .zip(&gates)
        .map(|(l, g)| GateVerdict {
            label: l.clone(),
            trace_preserving: g.is_trace_preserving(TOL),
            first_row_deviation: g.first_row_deviation(),
            completely_positive: g.choi_min_eigenvalue() >= -TOL,
            choi_min_eigenvalue: g.choi_min_eigenvalue(),
        })
        .collect();
    let physical = verdicts.iter().all(|v| v.trace_preserving && v.completely_positive);
    let two_design = GateLibrary::new(raw.labels.clone(), gates).ok().map(|l| is_two_design(&l)).transpose()?;
    for v in &verdicts {
        eprintln!(
            "{:<10} TP {:<5} (dev {:.2e})  CP {:<5} (Choi min {:.3e})",
            v.label,
            v.trace_preserving,
            v.first_row_deviation,
            v.completely_positive,
            v.choi_min_eigenvalue
        );
    }
    if let Some(t) = two_design {
        eprintln!("unitary 2-design: {t}");
    }
    let report = ValidationReport { gates: verdicts, two_design, physical };
    print_json(&report)?;
    if physical {
        Ok(())
    } else {
        Err(CliError::Validation("library failed the physicality checks".into()))
    }
}

#[derive(Serialize)]
struct IngestSummary {
    records: usize,
    pairs: usize,
    triples: usize,
    gates: usize,
    noise_power_min: f64,
    noise_power_max: f64,
    outside_sanity_bound: usize,
    normalized: Option<PathBuf>,
}

pub fn ingest(args: &IngestArgs) -> CliResult<()> {
    let (records, meta) = ingest_records(&args.records)?;
    let norm = meta.measurement()?.operator_norm();
    let noise = records.iter().map(|r| r.noise_power);
    let summary = IngestSummary {
        records: records.len(),
        pairs: records.iter().filter(|r| !r.is_triple()).count(),
        triples: records.iter().filter(|r| r.is_triple()).count(),
        gates: meta.labels.len(),
        noise_power_min: noise.clone().fold(f64::INFINITY, f64::min),
        noise_power_max: noise.fold(0.0, f64::max),
        outside_sanity_bound: records.iter().filter(|r| !ExperimentRecord::within_sanity_bound(r, norm)).count(),
        normalized: args.out.clone(),
    };
    if let Some(out) = &args.out {
        write_records(out, &records, &meta)?;
    }
    print_json(&summary)
}
