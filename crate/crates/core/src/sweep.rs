//! Noise sweeps: many seeded trials per (variant, inputs, sigma) cell,
//! aggregated into mean and sample standard deviation.
//!
//! All gate variants of one `(inputs, sigma, trial)` cell share a seed, so
//! they see the same noise stream sample for sample.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::{self, ConfusionCounts};
use crate::network::{build_gate, run_simulation, GatePreset, LogicInputs};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub sigma_values: Vec<f64>,
    pub trials_per_sigma: usize,
    pub gate_variants: Vec<GatePreset>,
    pub input_cases: Vec<LogicInputs>,
    pub base_seed: u64,
}

impl Default for SweepSpec {
    fn default() -> Self {
        Self {
            sigma_values: (1..=10).map(f64::from).collect(),
            trials_per_sigma: 10,
            gate_variants: vec![
                GatePreset::OrTonic,
                GatePreset::OrDenoised,
                GatePreset::AndTonic,
                GatePreset::AndDenoised,
            ],
            input_cases: vec![LogicInputs([true, false]), LogicInputs([true, true])],
            base_seed: 0,
        }
    }
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.trials_per_sigma < 1 {
            return Err(Error::config("trials_per_sigma", "must be >= 1"));
        }
        if let Some(s) = self.sigma_values.iter().find(|s| !(**s >= 0.0 && s.is_finite())) {
            return Err(Error::config("sigma_values", format!("{s} is not a finite non-negative value")));
        }
        if self.sigma_values.is_empty() || self.gate_variants.is_empty() || self.input_cases.is_empty() {
            return Err(Error::config("sweep", "sigma_values, gate_variants and input_cases must be non-empty"));
        }
        if self.gate_variants.contains(&GatePreset::Custom) {
            return Err(Error::config("gate_variants", "custom gates cannot be swept"));
        }
        Ok(())
    }

    pub fn n_runs(&self) -> usize {
        self.sigma_values.len() * self.trials_per_sigma * self.gate_variants.len() * self.input_cases.len()
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// `base_seed XOR splitmix64(splitmix64(splitmix64(sigma_index) ^ trial_index) ^ input_index)`.
///
/// Independent of the gate variant.
pub fn trial_seed(base_seed: u64, sigma_index: usize, trial_index: usize, input_index: usize) -> u64 {
    let h = splitmix64(sigma_index as u64);
    let h = splitmix64(h ^ trial_index as u64);
    base_seed ^ splitmix64(h ^ input_index as u64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialMetrics {
    pub confusion: ConfusionCounts,
    pub accuracy: f64,
    pub ler_percent: f64,
    pub n_bins: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub variant: GatePreset,
    pub inputs: LogicInputs,
    pub sigma: f64,
    pub trial_seed: u64,
    /// `Err` carries the failure message of a run that did not complete.
    pub outcome: std::result::Result<TrialMetrics, String>,
}

pub fn run_trial(variant: GatePreset, inputs: LogicInputs, sigma: f64, seed: u64) -> Result<TrialMetrics> {
    let config = build_gate(variant, inputs, sigma, seed)?;
    let trace = run_simulation(&config)?;
    let report = metrics::evaluate(&trace, &config)?;
    Ok(TrialMetrics {
        confusion: report.confusion,
        accuracy: report.accuracy,
        ler_percent: report.ler_percent,
        n_bins: report.grid.len(),
    })
}

/// Runs every trial of the sweep. Records come back ordered by
/// (variant, inputs, sigma, trial) in the sweep's list order.
pub fn execute(spec: &SweepSpec) -> Result<Vec<TrialRecord>> {
    spec.validate()?;
    let mut jobs = Vec::with_capacity(spec.n_runs());
    for (vi, &variant) in spec.gate_variants.iter().enumerate() {
        for (ii, &inputs) in spec.input_cases.iter().enumerate() {
            for (si, &sigma) in spec.sigma_values.iter().enumerate() {
                for trial in 0..spec.trials_per_sigma {
                    let seed = trial_seed(spec.base_seed, si, trial, ii);
                    jobs.push((vi, ii, si, trial, variant, inputs, sigma, seed));
                }
            }
        }
    }
    let records = jobs
        .par_iter()
        .map(|&(_, _, _, _, variant, inputs, sigma, seed)| {
            let outcome = run_trial(variant, inputs, sigma, seed).map_err(|e| {
                log::warn!("{variant} {inputs} sigma={sigma} seed={seed}: {e}");
                e.to_string()
            });
            TrialRecord {
                variant,
                inputs,
                sigma,
                trial_seed: seed,
                outcome,
            }
        })
        .collect();
    Ok(records)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub variant: String,
    pub inputs: String,
    pub sigma: f64,
    pub n_trials: usize,
    pub acc_mean: f64,
    pub acc_std: f64,
    pub ler_mean: f64,
    pub ler_std: f64,
    pub failures: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SweepSummary {
    pub rows: Vec<SummaryRow>,
}

impl SweepSummary {
    pub fn cell(&self, variant: &str, inputs: &str, sigma: f64) -> Option<&SummaryRow> {
        self.rows
            .iter()
            .find(|r| r.variant == variant && r.inputs == inputs && r.sigma == sigma)
    }
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Sample standard deviation (n - 1 denominator); NaN for a single value.
pub fn sample_std(values: &[f64]) -> f64 {
    let n = values.len();
    if n < 2 {
        return f64::NAN;
    }
    let m = mean(values);
    (values.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1) as f64).sqrt()
}

/// One per-trial observation as stored in `per_trial.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialObservation {
    pub variant: String,
    pub inputs: String,
    pub sigma: f64,
    /// `None` for a failed run.
    pub accuracy_ler: Option<(f64, f64)>,
}

impl From<&TrialRecord> for TrialObservation {
    fn from(r: &TrialRecord) -> Self {
        Self {
            variant: r.variant.name().to_string(),
            inputs: r.inputs.to_string(),
            sigma: r.sigma,
            accuracy_ler: r.outcome.as_ref().ok().map(|m| (m.accuracy, m.ler_percent)),
        }
    }
}

/// Groups observations into cells ordered by variant and inputs (first
/// appearance) and ascending sigma, then reduces each cell.
pub fn aggregate(observations: &[TrialObservation]) -> Result<SweepSummary> {
    let mut variant_order: Vec<&str> = Vec::new();
    let mut input_order: Vec<&str> = Vec::new();
    for o in observations {
        if !variant_order.contains(&o.variant.as_str()) {
            variant_order.push(&o.variant);
        }
        if !input_order.contains(&o.inputs.as_str()) {
            input_order.push(&o.inputs);
        }
    }
    let rank = |list: &[&str], key: &str| list.iter().position(|k| *k == key).unwrap_or(usize::MAX);

    type CellKey = (usize, usize, u64);
    let mut cells: BTreeMap<CellKey, (f64, Vec<f64>, Vec<f64>, usize)> = BTreeMap::new();
    for o in observations {
        // sigma >= 0 so the IEEE bit pattern orders like the value
        let key = (rank(&variant_order, &o.variant), rank(&input_order, &o.inputs), o.sigma.to_bits());
        let cell = cells.entry(key).or_insert_with(|| (o.sigma, Vec::new(), Vec::new(), 0));
        match o.accuracy_ler {
            Some((acc, ler)) => {
                cell.1.push(acc);
                cell.2.push(ler);
            }
            None => cell.3 += 1,
        }
    }

    let mut rows = Vec::with_capacity(cells.len());
    for ((vi, ii, _), (sigma, acc, ler, failures)) in cells {
        let variant = variant_order[vi].to_string();
        let inputs = input_order[ii].to_string();
        if acc.is_empty() {
            return Err(Error::EmptyCell {
                cell: format!("{variant} {inputs} sigma={sigma}"),
            });
        }
        rows.push(SummaryRow {
            variant,
            inputs,
            sigma,
            n_trials: acc.len(),
            acc_mean: mean(&acc),
            acc_std: sample_std(&acc),
            ler_mean: mean(&ler),
            ler_std: sample_std(&ler),
            failures,
        });
    }
    Ok(SweepSummary { rows })
}
