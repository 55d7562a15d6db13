//! Conductance-based synapse with instantaneous rise and single-exponential decay.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_TAU_G: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SynapseParams {
    pub w: f64,
    /// Reversal potential (mV). Zero for the excitatory synapses used by every gate.
    pub e_syn: f64,
    /// Decay time constant (ms).
    pub tau_g: f64,
}

impl SynapseParams {
    pub fn excitatory(w: f64) -> Self {
        Self {
            w,
            e_syn: 0.0,
            tau_g: DEFAULT_TAU_G,
        }
    }

    pub fn validate(&self, key: &str, dt: f64) -> Result<()> {
        if !(self.tau_g > 0.0) {
            return Err(Error::config(format!("{key}.tau_g"), "must be > 0"));
        }
        if !(dt < self.tau_g) {
            return Err(Error::config(
                "dt",
                format!("dt={dt} must be smaller than tau_g={}", self.tau_g),
            ));
        }
        if !self.w.is_finite() || !self.e_syn.is_finite() {
            return Err(Error::config(key, "w and e_syn must be finite"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct SynapseState {
    pub g_syn: f64,
}

/// Adds one unit of conductance when the presynaptic neuron fired this step.
pub fn register_spike(state: SynapseState, fired: bool) -> SynapseState {
    SynapseState {
        g_syn: state.g_syn + if fired { 1.0 } else { 0.0 },
    }
}

/// Euler step of `dg/dt = -g / tau_g`.
pub fn decay_step(state: SynapseState, tau_g: f64, dt: f64) -> SynapseState {
    SynapseState {
        g_syn: state.g_syn * (1.0 - dt / tau_g),
    }
}

/// Per-synapse term of the postsynaptic current: `w g (E_syn - v_post) - delta G_m`.
pub fn synaptic_current(
    state: SynapseState,
    params: &SynapseParams,
    v_post: f64,
    delta: f64,
    g_m: f64,
) -> f64 {
    params.w * state.g_syn * (params.e_syn - v_post) - delta * g_m
}
