//! Two-input, one-output gate network.
//!
//! Input neurons 1 and 2 project through synapses 1 and 2 onto output
//! neuron 3. Each synapse has its own astrocyte. A step advances the whole
//! network in a fixed order:
//!
//! 1. stimulus currents for the input neurons,
//! 2. input neuron Euler steps,
//! 3. synaptic conductance decay, then the spike increment,
//! 4. astrocytes: `S_m` from `g_syn`, calcium with the output neuron's `u`, then `G_m`,
//! 5. synaptic, glion and noise currents summed into `I_tot`,
//! 6. output neuron Euler step driven by `I_tot`.

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::astrocyte::{self, AstrocyteParams, AstrocyteState};
use crate::error::{Error, Result};
use crate::neuron::{self, NeuronParams, NeuronState};
use crate::synapse::{self, SynapseParams, SynapseState};

pub const DEFAULT_DT: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum GateKind {
    Or,
    And,
}

impl GateKind {
    pub fn apply(self, inputs: LogicInputs) -> bool {
        let [a, b] = inputs.0;
        match self {
            GateKind::Or => a || b,
            GateKind::And => a && b,
        }
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GateKind::Or => "OR",
            GateKind::And => "AND",
        })
    }
}

impl FromStr for GateKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "OR" => Ok(GateKind::Or),
            "AND" => Ok(GateKind::And),
            _ => Err(Error::UnknownPreset {
                kind: "gate kind",
                name: s.to_string(),
                registered: "OR, AND".into(),
            }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum GatePreset {
    OrPhasic,
    AndPhasic,
    OrTonic,
    AndTonic,
    OrDenoised,
    AndDenoised,
    Custom,
}

/// Everything a registered preset fixes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PresetSpec {
    pub preset: GatePreset,
    pub kind: GateKind,
    pub pattern: &'static str,
    pub amplitude: f64,
    pub w: f64,
    /// `[alpha, beta, gamma, delta]`
    pub gains: [f64; 4],
    pub description: &'static str,
}

impl GatePreset {
    pub const REGISTERED: [GatePreset; 6] = [
        GatePreset::OrPhasic,
        GatePreset::AndPhasic,
        GatePreset::OrTonic,
        GatePreset::AndTonic,
        GatePreset::OrDenoised,
        GatePreset::AndDenoised,
    ];

    pub fn name(self) -> &'static str {
        match self {
            GatePreset::OrPhasic => "OR_phasic",
            GatePreset::AndPhasic => "AND_phasic",
            GatePreset::OrTonic => "OR_tonic",
            GatePreset::AndTonic => "AND_tonic",
            GatePreset::OrDenoised => "OR_denoised",
            GatePreset::AndDenoised => "AND_denoised",
            GatePreset::Custom => "custom",
        }
    }

    /// `None` for [`GatePreset::Custom`].
    pub fn spec(self) -> Option<PresetSpec> {
        let (kind, pattern, amplitude, w, gains, description) = match self {
            GatePreset::OrPhasic => (
                GateKind::Or,
                "phasic",
                0.5,
                0.02,
                [0.0; 4],
                "phasic OR, neurons only",
            ),
            GatePreset::AndPhasic => (
                GateKind::And,
                "phasic",
                0.5,
                0.01,
                [0.0; 4],
                "phasic AND, neurons only",
            ),
            GatePreset::OrTonic => (
                GateKind::Or,
                "tonic",
                4.0,
                0.09,
                [0.0; 4],
                "tonic OR, neurons only",
            ),
            GatePreset::AndTonic => (
                GateKind::And,
                "tonic",
                4.0,
                0.05,
                [0.0; 4],
                "tonic AND, neurons only",
            ),
            GatePreset::OrDenoised => (
                GateKind::Or,
                "tonic",
                4.0,
                0.22,
                [0.0, 0.05, 0.0, 15.0],
                "tonic OR with astrocyte negative feedback",
            ),
            GatePreset::AndDenoised => (
                GateKind::And,
                "tonic",
                4.0,
                0.11,
                [0.0, 0.05, 1.5, 10.0],
                "tonic AND with astrocyte positive and negative feedback",
            ),
            GatePreset::Custom => return None,
        };
        Some(PresetSpec {
            preset: self,
            kind,
            pattern,
            amplitude,
            w,
            gains,
            description,
        })
    }
}

impl fmt::Display for GatePreset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GatePreset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        GatePreset::REGISTERED
            .iter()
            .copied()
            .chain(std::iter::once(GatePreset::Custom))
            .find(|p| p.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::UnknownPreset {
                kind: "gate preset",
                name: s.to_string(),
                registered: GatePreset::REGISTERED
                    .iter()
                    .map(|p| p.name())
                    .chain(std::iter::once("custom"))
                    .collect::<Vec<_>>()
                    .join(", "),
            })
    }
}

/// Logic levels of input neurons 1 and 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LogicInputs(pub [bool; 2]);

impl LogicInputs {
    pub const ALL: [LogicInputs; 4] = [
        LogicInputs([false, false]),
        LogicInputs([true, false]),
        LogicInputs([false, true]),
        LogicInputs([true, true]),
    ];

    pub fn swapped(self) -> Self {
        LogicInputs([self.0[1], self.0[0]])
    }
}

impl fmt::Display for LogicInputs {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.0[0] as u8, self.0[1] as u8)
    }
}

impl FromStr for LogicInputs {
    type Err = Error;

    /// Accepts `10`, `1 0`, `1,0` and `[1 0]`.
    fn from_str(s: &str) -> Result<Self> {
        let bits: Vec<bool> = s
            .chars()
            .filter(|c| !matches!(c, ' ' | ',' | '[' | ']'))
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(Error::config("inputs", format!("`{s}` is not a pair of 0/1 bits"))),
            })
            .collect::<Result<_>>()?;
        match bits.as_slice() {
            [a, b] => Ok(LogicInputs([*a, *b])),
            _ => Err(Error::config("inputs", format!("`{s}` must hold exactly two bits"))),
        }
    }
}

/// Rectangular stimulus applied to high input neurons.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StimulusProtocol {
    pub on_start: f64,
    pub on_end: f64,
    pub amplitude: f64,
    pub total_duration: f64,
}

impl StimulusProtocol {
    /// 0.5 s settling, 1 s ON, 1 s OFF.
    pub fn standard(amplitude: f64) -> Self {
        Self {
            on_start: 500.0,
            on_end: 1500.0,
            amplitude,
            total_duration: 2500.0,
        }
    }

    pub fn is_on(&self, t: f64) -> bool {
        t >= self.on_start && t < self.on_end
    }

    pub fn phase_duration(&self) -> f64 {
        self.on_end - self.on_start
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0 <= self.on_start && self.on_start < self.on_end && self.on_end <= self.total_duration) {
            return Err(Error::config(
                "stimulus",
                format!(
                    "need 0 <= on_start < on_end <= total_duration, got {} / {} / {}",
                    self.on_start, self.on_end, self.total_duration
                ),
            ));
        }
        if !self.amplitude.is_finite() {
            return Err(Error::config("stimulus.amplitude", "must be finite"));
        }
        Ok(())
    }
}

/// Complete description of one gate simulation.
#[derive(Debug, Clone, PartialEq)]
pub struct GateConfig {
    pub preset: GatePreset,
    pub gate_kind: GateKind,
    pub logic_inputs: LogicInputs,
    /// Input neuron 1, input neuron 2, output neuron.
    pub neuron_params: [NeuronParams; 3],
    pub neuron_initial: [NeuronState; 3],
    pub synapse_params: [SynapseParams; 2],
    pub astro_params: [AstrocyteParams; 2],
    pub stimulus: StimulusProtocol,
    pub noise_sigma: f64,
    pub seed: u64,
    pub dt: f64,
}

impl GateConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::config("dt", "must be > 0"));
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return Err(Error::config("sigma", "must be finite and >= 0"));
        }
        for (i, p) in self.neuron_params.iter().enumerate() {
            p.validate(&format!("neuron{}", i + 1))?;
        }
        for (i, s) in self.neuron_initial.iter().enumerate() {
            if !(s.v.is_finite() && s.u.is_finite()) {
                return Err(Error::config(format!("neuron{}.initial", i + 1), "must be finite"));
            }
        }
        for (i, p) in self.synapse_params.iter().enumerate() {
            p.validate(&format!("synapse{}", i + 1), self.dt)?;
        }
        for (i, p) in self.astro_params.iter().enumerate() {
            p.validate(&format!("astrocyte{}", i + 1), self.dt)?;
        }
        self.stimulus.validate()?;
        let steps = self.stimulus.total_duration / self.dt;
        if (steps - steps.round()).abs() > 1e-9 {
            return Err(Error::config(
                "total_duration",
                format!("{} ms is not a whole number of dt={} steps", self.stimulus.total_duration, self.dt),
            ));
        }
        Ok(())
    }

    pub fn n_steps(&self) -> usize {
        (self.stimulus.total_duration / self.dt).round() as usize
    }

    pub fn with_inputs(&self, logic_inputs: LogicInputs) -> Self {
        Self {
            logic_inputs,
            ..self.clone()
        }
    }
}

/// Fully populated config for a registered preset.
pub fn build_gate(preset: GatePreset, logic_inputs: LogicInputs, noise_sigma: f64, seed: u64) -> Result<GateConfig> {
    let spec = preset.spec().ok_or_else(|| {
        Error::config(
            "preset",
            "custom gates need `gate_kind`, `pattern`, `w` and `amplitude`; load them from a config file",
        )
    })?;
    let neuron = neuron::preset(spec.pattern)?;
    let [alpha, beta, gamma, delta] = spec.gains;
    let astro = AstrocyteParams::with_gains(alpha, beta, gamma, delta);
    Ok(GateConfig {
        preset,
        gate_kind: spec.kind,
        logic_inputs,
        neuron_params: [neuron.params.clone(), neuron.params.clone(), neuron.params],
        neuron_initial: [neuron.initial; 3],
        synapse_params: [SynapseParams::excitatory(spec.w); 2],
        astro_params: [astro; 2],
        stimulus: StimulusProtocol::standard(spec.amplitude),
        noise_sigma,
        seed,
        dt: DEFAULT_DT,
    })
}

pub fn total_current(i_syn_1: f64, i_syn_2: f64, i_glion_1: f64, i_glion_2: f64, i_noise: f64) -> f64 {
    noiseless_total_current(i_syn_1, i_syn_2, i_glion_1, i_glion_2) + i_noise
}

/// Synaptic and glion pairs are summed first so that swapping the two
/// input channels leaves the result bit-identical.
pub fn noiseless_total_current(i_syn_1: f64, i_syn_2: f64, i_glion_1: f64, i_glion_2: f64) -> f64 {
    (i_syn_1 + i_syn_2) + (i_glion_1 + i_glion_2)
}

/// Source of the additive current noise on the output neuron.
///
/// `None` means the noise term is absent from the current sum altogether.
pub trait CurrentNoise {
    fn sample(&mut self) -> Option<f64>;
}

/// Zero-mean Gaussian current noise, one draw per integration step.
///
/// Backed by ChaCha8 seeded from a `u64`; the stream is fixed for a given
/// `(sigma, seed)` and crate lockfile.
#[derive(Debug, Clone)]
pub struct NoiseSource {
    sigma: f64,
    seed: u64,
    rng: ChaCha8Rng,
}

impl NoiseSource {
    pub fn new(sigma: f64, seed: u64) -> Self {
        Self {
            sigma,
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// One draw from `N(0, sigma^2)`; exactly 0 when `sigma == 0`.
    pub fn next_current(&mut self) -> f64 {
        if self.sigma == 0.0 {
            return 0.0;
        }
        let z: f64 = StandardNormal.sample(&mut self.rng);
        self.sigma * z
    }
}

impl CurrentNoise for NoiseSource {
    fn sample(&mut self) -> Option<f64> {
        if self.sigma == 0.0 {
            None
        } else {
            Some(self.next_current())
        }
    }
}

/// Noise path removed entirely.
#[derive(Debug, Clone, Copy, Default)]
pub struct NoNoise;

impl CurrentNoise for NoNoise {
    fn sample(&mut self) -> Option<f64> {
        None
    }
}

/// Currents computed during the last step.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct StepCurrents {
    pub stimulus: [f64; 2],
    pub i_syn: [f64; 2],
    pub i_glion: [f64; 2],
    pub i_noise: f64,
    pub i_tot: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NetworkState {
    pub neurons: [NeuronState; 3],
    pub synapses: [SynapseState; 2],
    pub astrocytes: [AstrocyteState; 2],
    pub currents: StepCurrents,
}

impl NetworkState {
    pub fn initial(config: &GateConfig) -> Self {
        Self {
            neurons: config.neuron_initial,
            synapses: [SynapseState::default(); 2],
            astrocytes: [AstrocyteState::default(); 2],
            currents: StepCurrents::default(),
        }
    }
}

fn tag(err: Error, prefix: &str, index: usize, t_ms: f64) -> Error {
    match err {
        Error::NonFinite { variable, .. } => Error::NonFinite {
            variable: format!("{prefix}{variable}{index}"),
            t_ms,
        },
        other => other,
    }
}

fn ensure_finite(value: f64, name: &str, t_ms: f64) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::NonFinite {
            variable: name.to_string(),
            t_ms,
        })
    }
}

/// Advances the network by one `dt` starting at time `t`.
pub fn network_step(
    state: &NetworkState,
    config: &GateConfig,
    t: f64,
    noise: &mut impl CurrentNoise,
) -> Result<NetworkState> {
    let dt = config.dt;
    let t_next = t + dt;
    let mut next = *state;

    let stim_on = config.stimulus.is_on(t);
    let mut stimulus = [0.0; 2];
    for i in 0..2 {
        if stim_on && config.logic_inputs.0[i] {
            stimulus[i] = config.stimulus.amplitude;
        }
        next.neurons[i] = neuron::step(&state.neurons[i], &config.neuron_params[i], stimulus[i], dt)
            .map_err(|e| tag(e, "", i + 1, t_next))?;
    }

    for i in 0..2 {
        let decayed = synapse::decay_step(state.synapses[i], config.synapse_params[i].tau_g, dt);
        next.synapses[i] = synapse::register_spike(decayed, next.neurons[i].fired);
    }

    let u_rec = state.neurons[2].u;
    for i in 0..2 {
        let p = &config.astro_params[i];
        let mut a = state.astrocytes[i];
        a.s_m = ensure_finite(
            astrocyte::sm_step(&a, next.synapses[i].g_syn, p, dt),
            &format!("Sm{}", i + 1),
            t_next,
        )?;
        let (c, c_e) = astrocyte::calcium_step(&a, p, u_rec, dt).map_err(|e| tag(e, "", i + 1, t_next))?;
        a.c = c;
        a.c_e = c_e;
        a.g_m = ensure_finite(astrocyte::gm_step(&a, p, dt), &format!("Gm{}", i + 1), t_next)?;
        next.astrocytes[i] = a;
    }

    let v_post = state.neurons[2].v;
    let mut i_syn = [0.0; 2];
    let mut i_glion = [0.0; 2];
    for i in 0..2 {
        let p = &config.astro_params[i];
        let g_m = next.astrocytes[i].g_m;
        i_syn[i] = synapse::synaptic_current(next.synapses[i], &config.synapse_params[i], v_post, p.delta, g_m);
        i_glion[i] = astrocyte::glion_current(g_m, p.gamma);
    }
    let (i_noise, i_tot) = match noise.sample() {
        Some(x) => (x, total_current(i_syn[0], i_syn[1], i_glion[0], i_glion[1], x)),
        None => (0.0, noiseless_total_current(i_syn[0], i_syn[1], i_glion[0], i_glion[1])),
    };
    let i_tot = ensure_finite(i_tot, "Itot", t_next)?;

    next.neurons[2] = neuron::step(&state.neurons[2], &config.neuron_params[2], i_tot, dt)
        .map_err(|e| tag(e, "", 3, t_next))?;
    next.currents = StepCurrents {
        stimulus,
        i_syn,
        i_glion,
        i_noise,
        i_tot,
    };
    Ok(next)
}

/// One recorded sample. Row 0 holds the initial state with zero currents.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub t_ms: f64,
    pub state: NetworkState,
}

impl TraceRow {
    /// Membrane potential of neuron `i` as written to trace files (spike peaks clamped to 30).
    pub fn v(&self, i: usize) -> f64 {
        self.state.neurons[i].trace_v()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub rows: Vec<TraceRow>,
    /// Spike times (ms) of input 1, input 2 and output neuron.
    pub spikes: [Vec<f64>; 3],
}

impl Trace {
    pub fn output_spikes(&self) -> &[f64] {
        &self.spikes[2]
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

/// Runs the configured gate from `t = 0` to the end of the stimulus protocol.
pub fn run_simulation(config: &GateConfig) -> Result<Trace> {
    let mut noise = NoiseSource::new(config.noise_sigma, config.seed);
    run_simulation_with(config, &mut noise)
}

pub fn run_simulation_with(config: &GateConfig, noise: &mut impl CurrentNoise) -> Result<Trace> {
    config.validate()?;
    let n = config.n_steps();
    let mut rows = Vec::with_capacity(n + 1);
    let mut spikes: [Vec<f64>; 3] = Default::default();
    let mut state = NetworkState::initial(config);
    rows.push(TraceRow { t_ms: 0.0, state });
    for k in 0..n {
        let t = k as f64 * config.dt;
        state = network_step(&state, config, t, noise)?;
        let t_next = (k + 1) as f64 * config.dt;
        for (i, s) in state.neurons.iter().enumerate() {
            if s.fired {
                spikes[i].push(t_next);
            }
        }
        rows.push(TraceRow { t_ms: t_next, state });
    }
    Ok(Trace { rows, spikes })
}
