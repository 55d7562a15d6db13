//! Reading a spike train as a bit word.
//!
//! The ON phase is cut into bins centred on the spikes of a high input
//! neuron: inner edges sit halfway between consecutive reference spikes and
//! the outer edges extend half an interval beyond the first and last spike.
//! The same segmentation, shifted by the ON duration, covers the OFF phase.
//! A bin holding at least one output spike reads as 1.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::{GateConfig, GateKind, LogicInputs, StimulusProtocol, Trace};
use crate::neuron::{self, NeuronState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Phase {
    On,
    Off,
}

/// Half-open interval `[start, end)` in ms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bin {
    pub start: f64,
    pub end: f64,
    pub phase: Phase,
}

impl Bin {
    pub fn contains(&self, t: f64) -> bool {
        t >= self.start && t < self.end
    }

    pub fn count(&self, spikes: &[f64]) -> usize {
        spikes.iter().filter(|&&t| self.contains(t)).count()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinGrid {
    pub bins: Vec<Bin>,
}

impl BinGrid {
    pub fn len(&self) -> usize {
        self.bins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bins.is_empty()
    }

    /// Edges of one phase, `n_bins + 1` values.
    pub fn edges(&self, phase: Phase) -> Vec<f64> {
        let bins: Vec<&Bin> = self.bins.iter().filter(|b| b.phase == phase).collect();
        let mut edges: Vec<f64> = bins.iter().map(|b| b.start).collect();
        if let Some(last) = bins.last() {
            edges.push(last.end);
        }
        edges
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BitStream(pub Vec<bool>);

impl BitStream {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for BitStream {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl std::str::FromStr for BitStream {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(Error::config("bits", format!("`{s}` is not a 0/1 string"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(BitStream)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: usize,
    pub tn: usize,
    pub fp: usize,
    pub fn_: usize,
}

impl ConfusionCounts {
    pub fn total(&self) -> usize {
        self.tp + self.tn + self.fp + self.fn_
    }
}

/// Builds the ON/OFF grid from the ON-phase spikes of a reference train.
pub fn build_bin_grid(reference_spikes: &[f64], protocol: &StimulusProtocol) -> Result<BinGrid> {
    let refs: Vec<f64> = reference_spikes
        .iter()
        .copied()
        .filter(|&t| protocol.is_on(t))
        .collect();
    let n = refs.len();
    if n < 2 {
        return Err(Error::GridUndefined { found: n });
    }
    let mut edges = Vec::with_capacity(n + 1);
    edges.push(refs[0] - (refs[1] - refs[0]) / 2.0);
    edges.extend(refs.windows(2).map(|w| (w[0] + w[1]) / 2.0));
    edges.push(refs[n - 1] + (refs[n - 1] - refs[n - 2]) / 2.0);
    for e in &mut edges {
        *e = e.clamp(protocol.on_start, protocol.on_end);
    }

    let shift = protocol.phase_duration();
    let on = edges.windows(2).map(|w| Bin {
        start: w[0],
        end: w[1],
        phase: Phase::On,
    });
    let off = edges.windows(2).map(|w| Bin {
        start: w[0] + shift,
        end: w[1] + shift,
        phase: Phase::Off,
    });
    Ok(BinGrid {
        bins: on.chain(off).collect(),
    })
}

pub fn encode_bits(spike_times: &[f64], grid: &BinGrid) -> BitStream {
    BitStream(grid.bins.iter().map(|b| b.count(spike_times) > 0).collect())
}

/// Truth-table word: ON bins carry the gate output, OFF bins are 0.
pub fn expected_bits(kind: GateKind, inputs: LogicInputs, grid: &BinGrid) -> BitStream {
    let high = kind.apply(inputs);
    BitStream(grid.bins.iter().map(|b| b.phase == Phase::On && high).collect())
}

/// Logic operation error ratio in percent.
pub fn ler(observed: &BitStream, expected: &BitStream) -> Result<f64> {
    if observed.len() != expected.len() {
        return Err(Error::LengthMismatch {
            observed: observed.len(),
            expected: expected.len(),
        });
    }
    if observed.is_empty() {
        return Ok(0.0);
    }
    let wrong = observed.0.iter().zip(&expected.0).filter(|(a, b)| a != b).count();
    Ok(100.0 * wrong as f64 / observed.len() as f64)
}

/// Spike-level confusion counts. In an expected-1 bin the first spike is a
/// true positive and every extra spike a false positive.
pub fn classify_confusion(spike_times: &[f64], grid: &BinGrid, expected: &BitStream) -> ConfusionCounts {
    let mut counts = ConfusionCounts::default();
    for (bin, &want) in grid.bins.iter().zip(&expected.0) {
        let n = bin.count(spike_times);
        match (want, n) {
            (true, 0) => counts.fn_ += 1,
            (true, n) => {
                counts.tp += 1;
                counts.fp += n - 1;
            }
            (false, 0) => counts.tn += 1,
            (false, n) => counts.fp += n,
        }
    }
    counts
}

pub fn accuracy(confusion: &ConfusionCounts) -> Result<f64> {
    match confusion.total() {
        0 => Err(Error::EmptyConfusion),
        total => Ok((confusion.tp + confusion.tn) as f64 / total as f64),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub grid: BinGrid,
    pub observed_bits: BitStream,
    pub expected_bits: BitStream,
    pub confusion: ConfusionCounts,
    pub accuracy: f64,
    pub ler_percent: f64,
    /// True when the grid came from the calibration neuron instead of an input.
    pub fallback_grid: bool,
}

impl MetricsReport {
    pub fn from_grid(grid: BinGrid, output_spikes: &[f64], kind: GateKind, inputs: LogicInputs) -> Result<Self> {
        let observed_bits = encode_bits(output_spikes, &grid);
        let expected = expected_bits(kind, inputs, &grid);
        let confusion = classify_confusion(output_spikes, &grid, &expected);
        Ok(Self {
            accuracy: accuracy(&confusion)?,
            ler_percent: ler(&observed_bits, &expected)?,
            grid,
            observed_bits,
            expected_bits: expected,
            confusion,
            fallback_grid: false,
        })
    }

    /// Summary line in the `accuracy=0.81, LER=18.75%` style.
    pub fn caption(&self) -> String {
        format!("accuracy={:.2}, LER={:.2}%", self.accuracy, self.ler_percent)
    }
}

/// Input neuron whose spikes define the grid: the first high input.
pub fn reference_input(inputs: LogicInputs) -> Option<usize> {
    inputs.0.iter().position(|&high| high)
}

/// Grid from a noiseless tonic neuron stimulated with the standard tonic
/// amplitude over the given protocol timing.
pub fn calibration_grid(protocol: &StimulusProtocol, dt: f64) -> Result<BinGrid> {
    let tonic = neuron::preset("tonic")?;
    let amplitude = 4.0;
    let n = (protocol.total_duration / dt).round() as usize;
    let mut state: NeuronState = tonic.initial;
    let mut spikes = Vec::new();
    for k in 0..n {
        let t = k as f64 * dt;
        let i = if protocol.is_on(t) { amplitude } else { 0.0 };
        state = neuron::step(&state, &tonic.params, i, dt)?;
        if state.fired {
            spikes.push((k + 1) as f64 * dt);
        }
    }
    build_bin_grid(&spikes, protocol)
}

/// Scores one simulation. Falls back to [`calibration_grid`] when no input
/// is high or the reference train is too short to define a grid.
pub fn evaluate(trace: &Trace, config: &GateConfig) -> Result<MetricsReport> {
    let grid = reference_input(config.logic_inputs)
        .map(|i| build_bin_grid(&trace.spikes[i], &config.stimulus));
    let (grid, fallback) = match grid {
        Some(Ok(grid)) => (grid, false),
        Some(Err(Error::GridUndefined { .. })) | None => (calibration_grid(&config.stimulus, config.dt)?, true),
        Some(Err(e)) => return Err(e),
    };
    let mut report = MetricsReport::from_grid(grid, trace.output_spikes(), config.gate_kind, config.logic_inputs)?;
    report.fallback_grid = fallback;
    Ok(report)
}
