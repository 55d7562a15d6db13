//! CSV files and run directories.
//!
//! A run directory holds `config_echo.txt`, then either
//! `trace_*.csv` + `metrics.csv` (single run) or `per_trial.csv` +
//! `summary.csv` (sweep).

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::metrics::{self, MetricsReport};
use crate::network::{run_simulation, GateConfig, Trace};
use crate::sweep::{self, SweepSpec, SweepSummary, TrialObservation, TrialRecord};

pub const TRACE_HEADER: [&str; 26] = [
    "t_ms", "v1", "u1", "v2", "u2", "v3", "u3", "g1", "g2", "c1", "ce1", "Sm1", "Gm1", "c2", "ce2", "Sm2", "Gm2",
    "Isyn1", "Isyn2", "Iglion1", "Iglion2", "Inoise", "Itot", "fired1", "fired2", "fired3",
];

pub const METRICS_HEADER: [&str; 11] = [
    "gate",
    "inputs",
    "sigma",
    "trial_seed",
    "TP",
    "TN",
    "FP",
    "FN",
    "accuracy",
    "ler_percent",
    "n_bins",
];

pub const SUMMARY_HEADER: [&str; 9] = [
    "variant", "inputs", "sigma", "n_trials", "acc_mean", "acc_std", "ler_mean", "ler_std", "failures",
];

/// 17 significant digits, enough to round-trip any `f64`.
fn sci(x: f64) -> String {
    format!("{x:.16e}")
}

/// Shortest representation that parses back to the same `f64`.
fn exact(x: f64) -> String {
    if x.is_nan() {
        "NaN".to_string()
    } else {
        format!("{x}")
    }
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::WriterBuilder::new().from_writer(file))
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> Error + '_ {
    move |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    }
}

pub fn write_trace_csv(trace: &Trace, path: &Path) -> Result<()> {
    let mut w = csv_writer(path)?;
    let err = csv_err(path);
    w.write_record(TRACE_HEADER).map_err(&err)?;
    for row in &trace.rows {
        let s = &row.state;
        let n = &s.neurons;
        let a = &s.astrocytes;
        let cur = &s.currents;
        let values = [
            row.t_ms,
            row.v(0),
            n[0].u,
            row.v(1),
            n[1].u,
            row.v(2),
            n[2].u,
            s.synapses[0].g_syn,
            s.synapses[1].g_syn,
            a[0].c,
            a[0].c_e,
            a[0].s_m,
            a[0].g_m,
            a[1].c,
            a[1].c_e,
            a[1].s_m,
            a[1].g_m,
            cur.i_syn[0],
            cur.i_syn[1],
            cur.i_glion[0],
            cur.i_glion[1],
            cur.i_noise,
            cur.i_tot,
        ];
        let mut record: Vec<String> = values.iter().map(|&x| sci(x)).collect();
        record.extend(n.iter().map(|s| (s.fired as u8).to_string()));
        w.write_record(&record).map_err(&err)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn metrics_record(
    gate: &str,
    inputs: &str,
    sigma: f64,
    seed: u64,
    metrics: Option<(&metrics::ConfusionCounts, f64, f64, usize)>,
) -> Vec<String> {
    let mut rec = vec![gate.to_string(), inputs.to_string(), exact(sigma), seed.to_string()];
    match metrics {
        Some((c, acc, ler, n_bins)) => rec.extend([
            c.tp.to_string(),
            c.tn.to_string(),
            c.fp.to_string(),
            c.fn_.to_string(),
            exact(acc),
            exact(ler),
            n_bins.to_string(),
        ]),
        // failed run: metric fields left empty
        None => rec.extend(std::iter::repeat(String::new()).take(7)),
    }
    rec
}

pub fn write_metrics_csv(config: &GateConfig, report: &MetricsReport, path: &Path) -> Result<()> {
    let mut w = csv_writer(path)?;
    let err = csv_err(path);
    w.write_record(METRICS_HEADER).map_err(&err)?;
    w.write_record(metrics_record(
        config.preset.name(),
        &config.logic_inputs.to_string(),
        config.noise_sigma,
        config.seed,
        Some((&report.confusion, report.accuracy, report.ler_percent, report.grid.len())),
    ))
    .map_err(&err)?;
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_per_trial_csv(records: &[TrialRecord], path: &Path) -> Result<()> {
    let mut w = csv_writer(path)?;
    let err = csv_err(path);
    w.write_record(METRICS_HEADER).map_err(&err)?;
    for r in records {
        let m = r
            .outcome
            .as_ref()
            .ok()
            .map(|m| (&m.confusion, m.accuracy, m.ler_percent, m.n_bins));
        w.write_record(metrics_record(r.variant.name(), &r.inputs.to_string(), r.sigma, r.trial_seed, m))
            .map_err(&err)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_per_trial_csv(path: &Path) -> Result<Vec<TrialObservation>> {
    let err = csv_err(path);
    let mut reader = csv::Reader::from_path(path).map_err(&err)?;
    let parse = |field: &str, what: &str| -> Result<f64> {
        field
            .parse::<f64>()
            .map_err(|_| Error::config(what, format!("`{field}` in {} is not a number", path.display())))
    };
    let mut out = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(&err)?;
        let field = |i: usize| rec.get(i).unwrap_or_default();
        let accuracy_ler = if field(8).is_empty() {
            None
        } else {
            Some((parse(field(8), "accuracy")?, parse(field(9), "ler_percent")?))
        };
        out.push(TrialObservation {
            variant: field(0).to_string(),
            inputs: field(1).to_string(),
            sigma: parse(field(2), "sigma")?,
            accuracy_ler,
        });
    }
    Ok(out)
}

pub fn write_summary_csv(summary: &SweepSummary, path: &Path) -> Result<()> {
    let mut w = csv_writer(path)?;
    let err = csv_err(path);
    w.write_record(SUMMARY_HEADER).map_err(&err)?;
    for r in &summary.rows {
        w.write_record([
            r.variant.clone(),
            r.inputs.clone(),
            exact(r.sigma),
            r.n_trials.to_string(),
            exact(r.acc_mean),
            exact(r.acc_std),
            exact(r.ler_mean),
            exact(r.ler_std),
            r.failures.to_string(),
        ])
        .map_err(&err)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn write_echo(out_dir: &Path, lines: &[String]) -> Result<()> {
    let path = out_dir.join("config_echo.txt");
    let mut f = fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
    for line in lines {
        writeln!(f, "{line}").map_err(|e| Error::io(&path, e))?;
    }
    Ok(())
}

fn describe_gate(config: &GateConfig) -> Vec<String> {
    let mut lines = vec![
        format!("gate_preset = {}", config.preset),
        format!("gate_kind = {}", config.gate_kind),
        format!("logic_inputs = {}", config.logic_inputs),
        format!("noise_sigma = {}", config.noise_sigma),
        format!("seed = {}", config.seed),
        format!("dt = {}", config.dt),
        format!("stimulus = {:?}", config.stimulus),
    ];
    for (i, (p, s)) in config.neuron_params.iter().zip(&config.neuron_initial).enumerate() {
        lines.push(format!("neuron{} = {p:?} initial v={} u={}", i + 1, s.v, s.u));
    }
    for (i, p) in config.synapse_params.iter().enumerate() {
        lines.push(format!("synapse{} = {p:?}", i + 1));
    }
    for (i, p) in config.astro_params.iter().enumerate() {
        lines.push(format!("astrocyte{} = {p:?}", i + 1));
    }
    lines
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

#[derive(Debug, Clone)]
pub struct SingleRunOutput {
    pub trace_path: PathBuf,
    pub metrics_path: PathBuf,
    pub report: MetricsReport,
}

/// Simulates, scores and writes one gate run.
pub fn run_single(config: &GateConfig, overrides: &[String], out_dir: &Path) -> Result<SingleRunOutput> {
    let trace = run_simulation(config)?;
    let report = metrics::evaluate(&trace, config)?;
    ensure_dir(out_dir)?;
    let mut echo = describe_gate(config);
    echo.extend(overrides.iter().map(|o| format!("override {o}")));
    write_echo(out_dir, &echo)?;
    let trace_path = out_dir.join(format!(
        "trace_{}_{}_sigma{}_seed{}.csv",
        config.preset, config.logic_inputs, config.noise_sigma, config.seed
    ));
    write_trace_csv(&trace, &trace_path)?;
    let metrics_path = out_dir.join("metrics.csv");
    write_metrics_csv(config, &report, &metrics_path)?;
    Ok(SingleRunOutput {
        trace_path,
        metrics_path,
        report,
    })
}

#[derive(Debug, Clone)]
pub struct SweepOutput {
    pub per_trial_path: PathBuf,
    pub summary_path: PathBuf,
    pub records: Vec<TrialRecord>,
    pub summary: SweepSummary,
}

pub fn run_sweep(spec: &SweepSpec, overrides: &[String], out_dir: &Path) -> Result<SweepOutput> {
    let records = sweep::execute(spec)?;
    let observations: Vec<TrialObservation> = records.iter().map(TrialObservation::from).collect();
    let summary = sweep::aggregate(&observations)?;
    ensure_dir(out_dir)?;
    let mut echo = vec![format!("sweep = {spec:?}")];
    echo.extend(overrides.iter().map(|o| format!("override {o}")));
    write_echo(out_dir, &echo)?;
    let per_trial_path = out_dir.join("per_trial.csv");
    write_per_trial_csv(&records, &per_trial_path)?;
    let summary_path = out_dir.join("summary.csv");
    write_summary_csv(&summary, &summary_path)?;
    Ok(SweepOutput {
        per_trial_path,
        summary_path,
        records,
        summary,
    })
}
