//! Simulated lock-in amplifier.
//!
//! Each sample is mixed with `2 cos(w t)` and `-2 sin(w t)` and both products
//! go through a single-pole low-pass, `y += alpha * (x - y)` with
//! `alpha = 1 - exp(-1 / (tau * fs))`. For an input `A cos(w t + phi)` the
//! settled output is `A exp(i phi)` up to ripple at `2w`.
//!
//! Accuracy after the default 5-tau discard: the magnitude is short by
//! `exp(-5)` (0.67%) and the `2w` ripple is about `1 / (2 w tau)`, so a 2%
//! budget needs `w tau` of roughly 40 or more.

use std::f64::consts::TAU;

use thiserror::Error;

use crate::wavecore::Phasor;

/// Mixer gain on both channels; mixing halves amplitude, this restores it.
pub const MIXER_GAIN: f64 = 2.0;
/// Minimum ratio of sample rate to reference frequency.
pub const MIN_OVERSAMPLING: f64 = 10.0;
/// Minimum filter time constant, in sample periods.
pub const MIN_TAU_SAMPLES: f64 = 10.0;
pub const MIN_SETTLE_FACTOR: f64 = 5.0;
pub const DEFAULT_SETTLE_FACTOR: f64 = 5.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LockInError {
    #[error("sample rate {sample_rate} Hz is below {MIN_OVERSAMPLING}x the reference frequency {reference} Hz")]
    AliasingRisk { sample_rate: f64, reference: f64 },
    #[error("invalid lock-in configuration: {0}")]
    InvalidConfig(&'static str),
    #[error("filter not settled: need at least {needed} samples, got {got}")]
    NotSettled { needed: usize, got: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LockInConfig {
    /// Hz.
    pub reference_frequency: f64,
    /// Hz.
    pub sample_rate: f64,
    /// Seconds.
    pub time_constant: f64,
    /// Settling discard, in time constants.
    pub settle_factor: f64,
}

impl LockInConfig {
    pub fn new(reference_frequency: f64, sample_rate: f64, time_constant: f64) -> Result<Self, LockInError> {
        let cfg =
            LockInConfig { reference_frequency, sample_rate, time_constant, settle_factor: DEFAULT_SETTLE_FACTOR };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_settle_factor(mut self, settle_factor: f64) -> Result<Self, LockInError> {
        self.settle_factor = settle_factor;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<(), LockInError> {
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !positive(self.reference_frequency) {
            return Err(LockInError::InvalidConfig("reference_frequency must be positive"));
        }
        if !positive(self.sample_rate) {
            return Err(LockInError::InvalidConfig("sample_rate must be positive"));
        }
        if self.sample_rate < MIN_OVERSAMPLING * self.reference_frequency {
            return Err(LockInError::AliasingRisk {
                sample_rate: self.sample_rate,
                reference: self.reference_frequency,
            });
        }
        if !positive(self.time_constant) {
            return Err(LockInError::InvalidConfig("time_constant must be positive"));
        }
        if self.time_constant * self.sample_rate < MIN_TAU_SAMPLES {
            return Err(LockInError::InvalidConfig("time_constant must span at least 10 sample periods"));
        }
        if !(self.settle_factor.is_finite() && self.settle_factor >= MIN_SETTLE_FACTOR) {
            return Err(LockInError::InvalidConfig("settle_factor must be >= 5"));
        }
        Ok(())
    }

    /// Per-sample smoothing coefficient of the single-pole filter.
    pub fn alpha(&self) -> f64 {
        -(-1.0 / (self.time_constant * self.sample_rate)).exp_m1()
    }

    /// Minimal dwell honoring the settling contract: the discard window plus
    /// one output sample.
    pub fn min_dwell(&self) -> f64 {
        (settle_samples(self) + 1) as f64 / self.sample_rate
    }

    /// Whole samples recorded during `dwell` seconds.
    pub fn samples_in(&self, dwell: f64) -> usize {
        count_from_product(dwell * self.sample_rate, false)
    }
}

/// `ceil(x)` or `floor(x)` that ignores float fuzz within 1e-9 of an integer.
fn count_from_product(x: f64, ceil: bool) -> usize {
    let r = x.round();
    if (x - r).abs() <= 1e-9 * r.abs().max(1.0) {
        return r as usize;
    }
    if ceil {
        x.ceil() as usize
    } else {
        x.floor() as usize
    }
}

/// `ceil(settle_factor * tau * fs)`: samples to discard per dwell before the
/// filter output is trusted.
pub fn settle_samples(cfg: &LockInConfig) -> usize {
    count_from_product(cfg.settle_factor * cfg.time_constant * cfg.sample_rate, true)
}

/// Demodulate a uniformly sampled record whose first sample is the reference
/// phase origin (`t = 0`). Returns the filter outputs at the final sample.
pub fn demodulate(samples: &[f64], cfg: &LockInConfig) -> Result<Phasor, LockInError> {
    cfg.validate()?;
    let needed = settle_samples(cfg);
    if samples.len() < needed {
        return Err(LockInError::NotSettled { needed, got: samples.len() });
    }
    let alpha = cfg.alpha();
    let step = TAU * cfg.reference_frequency / cfg.sample_rate;
    let (mut i, mut q) = (0.0f64, 0.0f64);
    for (n, &x) in samples.iter().enumerate() {
        let (s, c) = (step * n as f64).sin_cos();
        i += alpha * (MIXER_GAIN * x * c - i);
        q += alpha * (-MIXER_GAIN * x * s - q);
    }
    Ok(Phasor::new(i, q))
}
