//! TOML configuration files for single runs and sweeps.
//!
//! A gate file needs only a preset; every other key overrides the preset
//! value. Per-synapse and per-astrocyte values take either a scalar (both
//! copies) or a two-element array.
//!
//! ```toml
//! gate_preset = "OR_tonic"
//! logic_inputs = "10"
//! noise_sigma = 5.0
//! seed = 7
//!
//! [synapse_params]
//! w = 0.07
//!
//! [astro_params]
//! delta = [10.0, 12.0]
//! ```
//!
//! A file holding any of `sigma_values`, `trials_per_sigma`, `gate_variants`,
//! `input_cases` or `base_seed` is read as a sweep specification instead.

use std::fs;
use std::path::Path;

use serde::Deserialize;

use crate::astrocyte::AstrocyteParams;
use crate::error::{Error, Result};
use crate::network::{build_gate, GateConfig, GateKind, GatePreset, LogicInputs, StimulusProtocol, DEFAULT_DT};
use crate::neuron::{self, NeuronParams, NeuronState};
use crate::sweep::SweepSpec;
use crate::synapse::SynapseParams;

const SWEEP_KEYS: [&str; 5] = ["sigma_values", "trials_per_sigma", "gate_variants", "input_cases", "base_seed"];

#[derive(Debug, Clone, Copy, Deserialize, PartialEq)]
#[serde(untagged)]
enum OneOrPair {
    One(f64),
    Pair([f64; 2]),
}

impl OneOrPair {
    fn pair(self) -> [f64; 2] {
        match self {
            OneOrPair::One(x) => [x, x],
            OneOrPair::Pair(p) => p,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum InputsValue {
    Text(String),
    Bits([u8; 2]),
}

impl InputsValue {
    fn parse(&self) -> Result<LogicInputs> {
        match self {
            InputsValue::Text(s) => s.parse(),
            InputsValue::Bits([a, b]) if *a <= 1 && *b <= 1 => Ok(LogicInputs([*a == 1, *b == 1])),
            InputsValue::Bits(bits) => Err(Error::config("logic_inputs", format!("{bits:?} is not a pair of 0/1 bits"))),
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct NeuronSection {
    pattern: Option<String>,
    a: Option<f64>,
    b: Option<f64>,
    c: Option<f64>,
    d: Option<f64>,
    v0: Option<f64>,
    u0: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct SynapseSection {
    w: Option<OneOrPair>,
    e_syn: Option<OneOrPair>,
    tau_g: Option<OneOrPair>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct AstroSection {
    k1: Option<OneOrPair>,
    k2: Option<OneOrPair>,
    k3: Option<OneOrPair>,
    k4: Option<OneOrPair>,
    eps_c: Option<OneOrPair>,
    r: Option<OneOrPair>,
    tau_c: Option<OneOrPair>,
    tau_sm: Option<OneOrPair>,
    tau_gm: Option<OneOrPair>,
    s_sm: Option<OneOrPair>,
    s_gm: Option<OneOrPair>,
    h_sm: Option<OneOrPair>,
    h_gm: Option<OneOrPair>,
    d_sm: Option<OneOrPair>,
    d_gm: Option<OneOrPair>,
    alpha: Option<OneOrPair>,
    beta: Option<OneOrPair>,
    gamma: Option<OneOrPair>,
    delta: Option<OneOrPair>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct StimulusSection {
    on_start: Option<f64>,
    on_end: Option<f64>,
    amplitude: Option<f64>,
    total_duration: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct GateFile {
    #[serde(alias = "preset")]
    gate_preset: String,
    #[serde(alias = "inputs")]
    logic_inputs: Option<InputsValue>,
    #[serde(alias = "sigma")]
    noise_sigma: Option<f64>,
    seed: Option<u64>,
    dt: Option<f64>,
    gate_kind: Option<String>,
    #[serde(default)]
    neuron_params: NeuronSection,
    #[serde(default)]
    synapse_params: SynapseSection,
    #[serde(default)]
    astro_params: AstroSection,
    #[serde(default)]
    stimulus: StimulusSection,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SweepFile {
    sigma_values: Option<Vec<f64>>,
    trials_per_sigma: Option<usize>,
    gate_variants: Option<Vec<String>>,
    input_cases: Option<Vec<InputsValue>>,
    base_seed: Option<u64>,
}

/// A validated configuration and the list of values that differ from defaults.
#[derive(Debug, Clone)]
pub struct Loaded<T> {
    pub value: T,
    pub overrides: Vec<String>,
}

#[derive(Debug, Clone)]
pub enum ConfigFile {
    Gate(Loaded<GateConfig>),
    Sweep(Loaded<SweepSpec>),
}

pub fn load_config(path: &Path) -> Result<ConfigFile> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config(&text)
}

pub fn parse_config(text: &str) -> Result<ConfigFile> {
    let table: toml::Table = toml::from_str(text).map_err(|e| Error::config("config", e.message().to_string()))?;
    let is_sweep = table.keys().any(|k| SWEEP_KEYS.contains(&k.as_str()));
    let config = if is_sweep {
        let file: SweepFile = toml::Value::Table(table).try_into().map_err(toml_error)?;
        ConfigFile::Sweep(sweep_from_file(file)?)
    } else {
        let file: GateFile = toml::Value::Table(table).try_into().map_err(toml_error)?;
        ConfigFile::Gate(gate_from_file(file)?)
    };
    let overrides = match &config {
        ConfigFile::Gate(l) => &l.overrides,
        ConfigFile::Sweep(l) => &l.overrides,
    };
    for line in overrides {
        log::info!("override {line}");
    }
    Ok(config)
}

pub fn parse_gate_config(text: &str) -> Result<Loaded<GateConfig>> {
    match parse_config(text)? {
        ConfigFile::Gate(g) => Ok(g),
        ConfigFile::Sweep(_) => Err(Error::config("config", "expected a gate file, found a sweep specification")),
    }
}

fn toml_error(e: toml::de::Error) -> Error {
    let message = e.message().to_string();
    let key = message
        .split('`')
        .nth(1)
        .map(str::to_string)
        .unwrap_or_else(|| "config".to_string());
    Error::Config { key, reason: message }
}

struct Recorder(Vec<String>);

impl Recorder {
    fn set<T: std::fmt::Debug>(&mut self, key: &str, slot: &mut T, value: Option<T>) {
        if let Some(v) = value {
            self.0.push(format!("{key} = {v:?}"));
            *slot = v;
        }
    }
}

fn gate_from_file(file: GateFile) -> Result<Loaded<GateConfig>> {
    let preset: GatePreset = file.gate_preset.parse()?;
    let inputs = file
        .logic_inputs
        .as_ref()
        .map(InputsValue::parse)
        .transpose()?
        .unwrap_or(LogicInputs([true, false]));
    let sigma = file.noise_sigma.unwrap_or(0.0);
    let seed = file.seed.unwrap_or(0);
    let mut rec = Recorder(Vec::new());

    let mut config = match preset {
        GatePreset::Custom => custom_base(&file, inputs, sigma, seed)?,
        _ => build_gate(preset, inputs, sigma, seed)?,
    };
    rec.0.push(format!("gate_preset = {preset}"));
    rec.0.push(format!("logic_inputs = {inputs}"));
    if file.noise_sigma.is_some() {
        rec.0.push(format!("noise_sigma = {sigma}"));
    }
    if file.seed.is_some() {
        rec.0.push(format!("seed = {seed}"));
    }
    rec.set("dt", &mut config.dt, file.dt);
    if preset != GatePreset::Custom {
        if let Some(kind) = &file.gate_kind {
            let kind: GateKind = kind.parse()?;
            rec.set("gate_kind", &mut config.gate_kind, Some(kind));
        }
    }

    apply_neuron(&mut config, &file.neuron_params, &mut rec, preset == GatePreset::Custom)?;
    apply_synapses(&mut config, &file.synapse_params, &mut rec);
    apply_astrocytes(&mut config, &file.astro_params, &mut rec);
    let st = &file.stimulus;
    rec.set("stimulus.on_start", &mut config.stimulus.on_start, st.on_start);
    rec.set("stimulus.on_end", &mut config.stimulus.on_end, st.on_end);
    if preset != GatePreset::Custom {
        rec.set("stimulus.amplitude", &mut config.stimulus.amplitude, st.amplitude);
    }
    rec.set("stimulus.total_duration", &mut config.stimulus.total_duration, st.total_duration);

    config.validate()?;
    Ok(Loaded {
        value: config,
        overrides: rec.0,
    })
}

fn custom_base(file: &GateFile, inputs: LogicInputs, sigma: f64, seed: u64) -> Result<GateConfig> {
    let neuron = &file.neuron_params;
    let has_explicit_neuron = neuron.a.is_some() && neuron.b.is_some() && neuron.c.is_some() && neuron.d.is_some();
    let mut missing = Vec::new();
    if file.gate_kind.is_none() {
        missing.push("gate_kind");
    }
    if neuron.pattern.is_none() && !has_explicit_neuron {
        missing.push("neuron_params.pattern (or a, b, c, d)");
    }
    if file.synapse_params.w.is_none() {
        missing.push("synapse_params.w");
    }
    if file.stimulus.amplitude.is_none() {
        missing.push("stimulus.amplitude");
    }
    if !missing.is_empty() {
        return Err(Error::config(
            "gate_preset",
            format!("custom gate is missing required field(s): {}", missing.join(", ")),
        ));
    }
    let kind: GateKind = file.gate_kind.as_deref().unwrap_or_default().parse()?;
    let (params, initial) = match &neuron.pattern {
        Some(name) => {
            let p = neuron::preset(name)?;
            (p.params, p.initial)
        }
        None => {
            let params = NeuronParams {
                a: neuron.a.unwrap_or_default(),
                b: neuron.b.unwrap_or_default(),
                c: neuron.c.unwrap_or_default(),
                d: neuron.d.unwrap_or_default(),
                label: "custom".into(),
            };
            let initial = params.default_initial_state();
            (params, initial)
        }
    };
    let w = file.synapse_params.w.map(OneOrPair::pair).unwrap_or_default();
    Ok(GateConfig {
        preset: GatePreset::Custom,
        gate_kind: kind,
        logic_inputs: inputs,
        neuron_params: [params.clone(), params.clone(), params],
        neuron_initial: [initial; 3],
        synapse_params: w.map(SynapseParams::excitatory),
        astro_params: [AstrocyteParams::default(); 2],
        stimulus: StimulusProtocol::standard(file.stimulus.amplitude.unwrap_or_default()),
        noise_sigma: sigma,
        seed,
        dt: DEFAULT_DT,
    })
}

fn apply_neuron(config: &mut GateConfig, section: &NeuronSection, rec: &mut Recorder, custom: bool) -> Result<()> {
    if !custom {
        if let Some(name) = &section.pattern {
            let p = neuron::preset(name)?;
            rec.0.push(format!("neuron_params.pattern = {name}"));
            config.neuron_params = [p.params.clone(), p.params.clone(), p.params];
            config.neuron_initial = [p.initial; 3];
        }
    }
    let custom_abcd = custom && section.pattern.is_none();
    for i in 0..3 {
        let p = &mut config.neuron_params[i];
        let mut changed = false;
        for (name, slot, value) in [
            ("a", &mut p.a, section.a),
            ("b", &mut p.b, section.b),
            ("c", &mut p.c, section.c),
            ("d", &mut p.d, section.d),
        ] {
            if let Some(v) = value {
                if i == 0 && !custom_abcd {
                    rec.0.push(format!("neuron_params.{name} = {v:?}"));
                }
                *slot = v;
                changed = true;
            }
        }
        if changed && p.label != "custom" {
            p.label = format!("{}*", p.label.trim_end_matches('*'));
        }
        let v0 = section.v0.unwrap_or(config.neuron_initial[i].v);
        let u0 = section.u0.unwrap_or(if section.v0.is_some() || changed {
            p.b * v0
        } else {
            config.neuron_initial[i].u
        });
        config.neuron_initial[i] = NeuronState::new(v0, u0);
    }
    if let Some(v) = section.v0 {
        rec.0.push(format!("neuron_params.v0 = {v:?}"));
    }
    if let Some(u) = section.u0 {
        rec.0.push(format!("neuron_params.u0 = {u:?}"));
    }
    Ok(())
}

fn apply_synapses(config: &mut GateConfig, section: &SynapseSection, rec: &mut Recorder) {
    let fields: [(&str, Option<OneOrPair>, fn(&mut SynapseParams) -> &mut f64); 3] = [
        ("w", section.w, |s| &mut s.w),
        ("e_syn", section.e_syn, |s| &mut s.e_syn),
        ("tau_g", section.tau_g, |s| &mut s.tau_g),
    ];
    for (name, value, field) in fields {
        if let Some(v) = value {
            let pair = v.pair();
            rec.0.push(format!("synapse_params.{name} = {pair:?}"));
            for (s, x) in config.synapse_params.iter_mut().zip(pair) {
                *field(s) = x;
            }
        }
    }
}

fn apply_astrocytes(config: &mut GateConfig, s: &AstroSection, rec: &mut Recorder) {
    type Field = fn(&mut AstrocyteParams) -> &mut f64;
    let fields: [(&str, Option<OneOrPair>, Field); 19] = [
        ("k1", s.k1, |p| &mut p.k1),
        ("k2", s.k2, |p| &mut p.k2),
        ("k3", s.k3, |p| &mut p.k3),
        ("k4", s.k4, |p| &mut p.k4),
        ("eps_c", s.eps_c, |p| &mut p.eps_c),
        ("r", s.r, |p| &mut p.r),
        ("tau_c", s.tau_c, |p| &mut p.tau_c),
        ("tau_sm", s.tau_sm, |p| &mut p.tau_sm),
        ("tau_gm", s.tau_gm, |p| &mut p.tau_gm),
        ("s_sm", s.s_sm, |p| &mut p.s_sm),
        ("s_gm", s.s_gm, |p| &mut p.s_gm),
        ("h_sm", s.h_sm, |p| &mut p.h_sm),
        ("h_gm", s.h_gm, |p| &mut p.h_gm),
        ("d_sm", s.d_sm, |p| &mut p.d_sm),
        ("d_gm", s.d_gm, |p| &mut p.d_gm),
        ("alpha", s.alpha, |p| &mut p.alpha),
        ("beta", s.beta, |p| &mut p.beta),
        ("gamma", s.gamma, |p| &mut p.gamma),
        ("delta", s.delta, |p| &mut p.delta),
    ];
    // k4 follows eps_c unless set explicitly
    if s.eps_c.is_some() && s.k4.is_none() {
        let pair = s.eps_c.map(OneOrPair::pair).unwrap_or_default();
        for (p, eps) in config.astro_params.iter_mut().zip(pair) {
            p.k4 = 2.0 / eps;
        }
    }
    for (name, value, field) in fields {
        if let Some(v) = value {
            let pair = v.pair();
            rec.0.push(format!("astro_params.{name} = {pair:?}"));
            for (p, x) in config.astro_params.iter_mut().zip(pair) {
                *field(p) = x;
            }
        }
    }
}

fn sweep_from_file(file: SweepFile) -> Result<Loaded<SweepSpec>> {
    let mut spec = SweepSpec::default();
    let mut rec = Recorder(Vec::new());
    rec.set("sigma_values", &mut spec.sigma_values, file.sigma_values);
    rec.set("trials_per_sigma", &mut spec.trials_per_sigma, file.trials_per_sigma);
    rec.set("base_seed", &mut spec.base_seed, file.base_seed);
    if let Some(variants) = file.gate_variants {
        let parsed = variants.iter().map(|v| v.parse()).collect::<Result<Vec<GatePreset>>>()?;
        if parsed.contains(&GatePreset::Custom) {
            return Err(Error::config("gate_variants", "custom gates cannot be swept"));
        }
        rec.set("gate_variants", &mut spec.gate_variants, Some(parsed));
    }
    if let Some(cases) = file.input_cases {
        let parsed = cases
            .iter()
            .map(InputsValue::parse)
            .collect::<Result<Vec<LogicInputs>>>()?;
        rec.set("input_cases", &mut spec.input_cases, Some(parsed));
    }
    spec.validate()?;
    Ok(Loaded {
        value: spec,
        overrides: rec.0,
    })
}
