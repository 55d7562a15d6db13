//! Neuron-astrocyte logic gates.
//!
//! Two Izhikevich input neurons drive one output neuron through
//! conductance-based synapses, each regulated by a two-pool calcium
//! astrocyte. The crate simulates OR/AND gates built from this network,
//! injects Gaussian noise into the output neuron's current, and scores the
//! output spike train as a 16-bit word (LER and confusion accuracy).

pub mod astrocyte;
pub mod config;
pub mod error;
pub mod metrics;
pub mod network;
pub mod neuron;
pub mod output;
pub mod sweep;
pub mod synapse;

pub use error::{Error, Result};
