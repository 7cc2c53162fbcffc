//! First-order low-pass blocks.
//!
//! One model covers the error filter, the feedback filter and the
//! reconstruction filter of the encoding loop. Updates use exact
//! exponential integration under a zero-order hold, so a piecewise-constant
//! input aligned with the time grid is integrated without discretization
//! error.

use crate::error::{ensure, Result};

/// Gain and time constant of `gain / (1 + s·tau)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterParams {
    pub gain: f64,
    pub tau: f64,
}

impl FilterParams {
    pub fn new(gain: f64, tau: f64) -> Result<Self> {
        let p = Self { gain, tau };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        ensure(self.tau.is_finite() && self.tau > 0.0, || {
            format!("filter time constant must be positive, got {}", self.tau)
        })?;
        ensure(self.gain.is_finite() && self.gain >= 0.0, || {
            format!("filter gain must be non-negative, got {}", self.gain)
        })
    }

    pub fn with_gain(self, gain: f64) -> Self {
        Self { gain, ..self }
    }

    /// Precomputes the update coefficients for a fixed step.
    pub fn discretize(&self, dt: f64) -> DiscreteLowPass {
        let decay = (-dt / self.tau).exp();
        DiscreteLowPass {
            decay,
            drive: self.gain * -(-dt / self.tau).exp_m1(),
        }
    }
}

/// Filter output, in nA.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct FilterState {
    pub y: f64,
}

/// ZOH-exact update `y' = y·decay + drive·x` for one fixed step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscreteLowPass {
    pub decay: f64,
    pub drive: f64,
}

impl DiscreteLowPass {
    #[inline]
    pub fn step(&self, y: f64, x: f64) -> f64 {
        y * self.decay + self.drive * x
    }
}

/// Advances the filter by `dt` with the input held at `x`.
pub fn lpf_step(state: FilterState, x: f64, dt: f64, p: &FilterParams) -> FilterState {
    FilterState {
        y: p.discretize(dt).step(state.y, x),
    }
}

/// Peak output of a resting filter driven by one rectangular pulse.
///
/// The response to a pulse of width `w` peaks at its trailing edge, at
/// `gain·amplitude·(1 - e^(-w/τ))`.
pub fn lpf_pulse_peak(p: &FilterParams, pulse_width: f64, amplitude: f64) -> Result<f64> {
    ensure(pulse_width >= 0.0, || {
        format!("pulse width must be non-negative, got {pulse_width}")
    })?;
    Ok(p.gain * amplitude * -(-pulse_width / p.tau).exp_m1())
}

/// Runs a resting filter over a whole input sequence.
pub fn filter_samples(input: &[f64], dt: f64, p: &FilterParams) -> Vec<f64> {
    let lp = p.discretize(dt);
    let mut y = 0.0;
    input
        .iter()
        .map(|&x| {
            y = lp.step(y, x);
            y
        })
        .collect()
}
