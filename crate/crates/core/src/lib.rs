//! Behavioral simulation of spike-based signal encoding.
//!
//! A first-order sigma-delta loop reinterprets the adaptive exponential
//! integrate-and-fire neuron. The feedback current is a low-pass filtered
//! pulse train that tracks the input, and the same pulse train low-pass
//! filtered downstream reconstructs it. The crate provides
//!
//! * [`signals`]: DC and biased-sinusoid test currents,
//! * [`filters`]: ZOH-exact first-order low-pass blocks,
//! * [`neurons`]: the sigma-delta, LIF and ADEX encoders,
//! * [`codec`]: encode / decode / roundtrip,
//! * [`metrics`]: SDR, firing rate and energy accounting,
//! * [`esn`]: an echo-state network and its mapping onto sigma-delta nodes.
//!
//! Currents are in nA, times in seconds.

pub mod codec;
pub mod error;
pub mod esn;
pub mod filters;
pub mod metrics;
pub mod neurons;
pub mod signals;

pub use codec::{decode, encode, roundtrip, NeuronModel, SpikeTrain};
pub use error::{Error, Result};
pub use filters::{lpf_pulse_peak, lpf_step, FilterParams, FilterState};
pub use neurons::{adex_step, lif_rate, sd_step, AdexParams, Encoder, SdNeuron, SdNeuronParams};
pub use signals::{Signal, SineSpec};
