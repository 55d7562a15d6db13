//! Izhikevich spiking neuron.
//!
//! Two state variables: membrane potential `v` (mV) and recovery `u`.
//!
//! ```text
//! dv/dt = 0.04 v^2 + 5 v + 140 - u + I
//! du/dt = a (b v - u)
//! if v >= 30: v <- c, u <- u + d
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Spike cutoff. Also the value written to traces on a spike step.
pub const SPIKE_PEAK: f64 = 30.0;

/// Names accepted by [`preset`].
pub const PRESET_NAMES: [&str; 2] = ["tonic", "phasic"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeuronParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub label: String,
}

impl NeuronParams {
    pub fn validate(&self, key: &str) -> Result<()> {
        if !(self.a > 0.0) {
            return Err(Error::config(format!("{key}.a"), "must be > 0"));
        }
        if !(self.c < SPIKE_PEAK) {
            return Err(Error::config(
                format!("{key}.c"),
                "reset potential must lie below the 30 mV spike cutoff",
            ));
        }
        if !(self.b.is_finite() && self.d.is_finite()) {
            return Err(Error::config(key, "b and d must be finite"));
        }
        Ok(())
    }

    /// Conventional resting start: `v0 = c`, `u0 = b * v0`.
    pub fn default_initial_state(&self) -> NeuronState {
        NeuronState::at_rest(self.c, self.b)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NeuronState {
    pub v: f64,
    pub u: f64,
    /// Set on the step where `v` crossed the cutoff.
    pub fired: bool,
}

impl NeuronState {
    pub fn new(v: f64, u: f64) -> Self {
        Self { v, u, fired: false }
    }

    /// `u` on the nullcline `u = b v`.
    pub fn at_rest(v: f64, b: f64) -> Self {
        Self::new(v, b * v)
    }

    /// Potential as recorded in traces: the peak on spike steps, `v` otherwise.
    pub fn trace_v(&self) -> f64 {
        if self.fired {
            SPIKE_PEAK
        } else {
            self.v
        }
    }
}

/// A named parameter set plus the initial state its pattern is started from.
#[derive(Debug, Clone, PartialEq)]
pub struct NeuronPreset {
    pub params: NeuronParams,
    pub initial: NeuronState,
}

pub fn derivatives(state: &NeuronState, params: &NeuronParams, current: f64) -> (f64, f64) {
    let v = state.v;
    let dv = 0.04 * v * v + 5.0 * v + 140.0 - state.u + current;
    let du = params.a * (params.b * v - state.u);
    (dv, du)
}

/// One explicit Euler step followed by the after-spike reset.
///
/// Returns [`Error::NonFinite`] (with `t_ms` left at 0 for the caller to
/// fill in) if the integrated state is not finite.
pub fn step(state: &NeuronState, params: &NeuronParams, current: f64, dt: f64) -> Result<NeuronState> {
    let (dv, du) = derivatives(state, params, current);
    let mut v = state.v + dt * dv;
    let mut u = state.u + dt * du;
    if !v.is_finite() || !u.is_finite() {
        return Err(Error::NonFinite {
            variable: if v.is_finite() { "u" } else { "v" }.to_string(),
            t_ms: 0.0,
        });
    }
    let fired = v >= SPIKE_PEAK;
    if fired {
        v = params.c;
        u += params.d;
    }
    Ok(NeuronState { v, u, fired })
}

/// Registered spike-pattern presets.
///
/// Parameter values and starting potentials follow Izhikevich's published
/// pattern scripts: tonic starts at -70 mV and phasic at -64 mV, both with
/// `u0 = b * v0`.
pub fn preset(name: &str) -> Result<NeuronPreset> {
    let (a, b, c, d, v0) = match name {
        "tonic" => (0.02, 0.2, -65.0, 6.0, -70.0),
        "phasic" => (0.02, 0.25, -65.0, 6.0, -64.0),
        _ => {
            return Err(Error::UnknownPreset {
                kind: "neuron preset",
                name: name.to_string(),
                registered: PRESET_NAMES.join(", "),
            })
        }
    };
    let params = NeuronParams {
        a,
        b,
        c,
        d,
        label: name.to_string(),
    };
    Ok(NeuronPreset {
        params,
        initial: NeuronState::at_rest(v0, b),
    })
}
