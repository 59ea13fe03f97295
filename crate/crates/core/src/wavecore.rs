//! Coherent sources in a uniform medium and their complex baseband field.
//!
//! The field at a point is the phasor sum over sources of
//! `g(r) * amplitude * exp(i * (phase_offset - k r))`, with `k = 2 pi f / c`.
//! Reconstructing the real signal multiplies by `exp(+i w t)`, so wavefronts
//! travel away from the sources as time advances.

use std::f64::consts::TAU;
use std::ops::{Add, AddAssign, Mul};

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use thiserror::Error;

use crate::geom::Vec3;

/// Default singularity clamp for the `1/r` spreading law, in meters.
pub const DEFAULT_R_MIN: f64 = 1e-3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WaveError {
    #[error("frequency must be positive and finite, got {0}")]
    InvalidFrequency(f64),
    #[error("scene has no sources")]
    EmptyScene,
    #[error("sources must share one frequency: expected {expected} Hz, found {found} Hz")]
    MixedFrequencies { expected: f64, found: f64 },
    #[error("invalid medium: {0}")]
    InvalidMedium(&'static str),
    #[error("source amplitude must be finite and >= 0, got {0}")]
    InvalidAmplitude(f64),
    #[error("noise_rms must be finite and >= 0, got {0}")]
    InvalidNoise(f64),
    #[error("non-finite {0}")]
    NonFinite(&'static str),
    #[error("sample time must be finite and >= 0, got {0}")]
    InvalidTime(f64),
}

/// Complex baseband value of a field at one point: the in-phase and
/// quadrature outputs of a lock-in amplifier.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Phasor {
    pub re: f64,
    pub im: f64,
}

impl Phasor {
    pub const ZERO: Phasor = Phasor { re: 0.0, im: 0.0 };

    pub const fn new(re: f64, im: f64) -> Self {
        Phasor { re, im }
    }

    /// `magnitude * exp(i * phase)`.
    pub fn from_polar(magnitude: f64, phase: f64) -> Self {
        Complex64::from_polar(magnitude, phase).into()
    }

    /// Unit phasor `exp(i * angle)`.
    pub fn cis(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Phasor::new(c, s)
    }

    pub fn magnitude(self) -> f64 {
        self.re.hypot(self.im)
    }

    /// Argument in `(-pi, pi]`.
    pub fn phase(self) -> f64 {
        self.im.atan2(self.re)
    }

    pub fn scale(self, s: f64) -> Self {
        Phasor::new(self.re * s, self.im * s)
    }

    /// Multiply by `exp(i * angle)`.
    pub fn rotate(self, angle: f64) -> Self {
        self * Phasor::cis(angle)
    }

    pub fn is_finite(self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }

    pub fn to_complex(self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }
}

impl From<Complex64> for Phasor {
    fn from(c: Complex64) -> Self {
        Phasor::new(c.re, c.im)
    }
}

impl From<Phasor> for Complex64 {
    fn from(p: Phasor) -> Self {
        p.to_complex()
    }
}

impl Add for Phasor {
    type Output = Phasor;
    fn add(self, o: Phasor) -> Phasor {
        Phasor::new(self.re + o.re, self.im + o.im)
    }
}

impl AddAssign for Phasor {
    fn add_assign(&mut self, o: Phasor) {
        self.re += o.re;
        self.im += o.im;
    }
}

impl Mul for Phasor {
    type Output = Phasor;
    fn mul(self, o: Phasor) -> Phasor {
        (self.to_complex() * o.to_complex()).into()
    }
}

/// A point emitter driven from the shared signal generator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Source {
    pub position: Vec3,
    pub amplitude: f64,
    /// Radians.
    pub phase_offset: f64,
    /// Hz.
    pub frequency: f64,
}

impl Source {
    pub fn new(position: Vec3, amplitude: f64, phase_offset: f64, frequency: f64) -> Self {
        Source { position, amplitude, phase_offset, frequency }
    }

    /// Unit-amplitude, zero-phase source.
    pub fn unit(position: Vec3, frequency: f64) -> Self {
        Source::new(position, 1.0, 0.0, frequency)
    }

    fn validate(&self) -> Result<(), WaveError> {
        if !(self.frequency.is_finite() && self.frequency > 0.0) {
            return Err(WaveError::InvalidFrequency(self.frequency));
        }
        if !(self.amplitude.is_finite() && self.amplitude >= 0.0) {
            return Err(WaveError::InvalidAmplitude(self.amplitude));
        }
        if !self.position.is_finite() {
            return Err(WaveError::NonFinite("source position"));
        }
        if !self.phase_offset.is_finite() {
            return Err(WaveError::NonFinite("source phase_offset"));
        }
        Ok(())
    }
}

/// Amplitude spreading law.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Attenuation {
    None,
    /// Spherical spreading, `g(r) = 1/r`.
    #[default]
    InverseDistance,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Medium {
    /// Propagation speed, m/s.
    pub speed: f64,
    pub attenuation: Attenuation,
    /// Distances below this are clamped to it, m.
    pub r_min: f64,
}

impl Medium {
    pub fn new(speed: f64, attenuation: Attenuation, r_min: f64) -> Result<Self, WaveError> {
        let m = Medium { speed, attenuation, r_min };
        m.validate()?;
        Ok(m)
    }

    /// Medium with `InverseDistance` spreading and the default clamp.
    pub fn with_speed(speed: f64) -> Result<Self, WaveError> {
        Medium::new(speed, Attenuation::default(), DEFAULT_R_MIN)
    }

    pub fn validate(&self) -> Result<(), WaveError> {
        if !(self.speed.is_finite() && self.speed > 0.0) {
            return Err(WaveError::InvalidMedium("speed must be positive and finite"));
        }
        if !(self.r_min.is_finite() && self.r_min > 0.0) {
            return Err(WaveError::InvalidMedium("r_min must be positive and finite"));
        }
        Ok(())
    }

    fn gain(&self, r: f64) -> f64 {
        match self.attenuation {
            Attenuation::None => 1.0,
            Attenuation::InverseDistance => 1.0 / r,
        }
    }
}

/// Everything needed to evaluate the field anywhere.
#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub sources: Vec<Source>,
    pub medium: Medium,
    pub noise_rms: f64,
    pub seed: u64,
}

impl Scene {
    /// Validated constructor. Rejects empty and multi-frequency source lists.
    pub fn new(sources: Vec<Source>, medium: Medium, noise_rms: f64, seed: u64) -> Result<Self, WaveError> {
        let scene = Scene { sources, medium, noise_rms, seed };
        scene.validate()?;
        Ok(scene)
    }

    pub fn validate(&self) -> Result<(), WaveError> {
        let first = self.sources.first().ok_or(WaveError::EmptyScene)?;
        self.medium.validate()?;
        for s in &self.sources {
            s.validate()?;
            if s.frequency != first.frequency {
                return Err(WaveError::MixedFrequencies { expected: first.frequency, found: s.frequency });
            }
        }
        if !(self.noise_rms.is_finite() && self.noise_rms >= 0.0) {
            return Err(WaveError::InvalidNoise(self.noise_rms));
        }
        Ok(())
    }

    /// The shared drive frequency.
    pub fn frequency(&self) -> Result<f64, WaveError> {
        self.sources.first().map(|s| s.frequency).ok_or(WaveError::EmptyScene)
    }

    pub fn wavelength(&self) -> Result<f64, WaveError> {
        wavelength(self.frequency()?, &self.medium)
    }
}

/// `medium.speed / frequency`.
pub fn wavelength(frequency: f64, medium: &Medium) -> Result<f64, WaveError> {
    if !(frequency.is_finite() && frequency > 0.0) {
        return Err(WaveError::InvalidFrequency(frequency));
    }
    Ok(medium.speed / frequency)
}

/// Noise-free complex baseband field at `position`.
pub fn baseband_field_at(scene: &Scene, position: Vec3) -> Result<Phasor, WaveError> {
    if scene.sources.is_empty() {
        return Err(WaveError::EmptyScene);
    }
    if !position.is_finite() {
        return Err(WaveError::NonFinite("receiver position"));
    }
    let medium = &scene.medium;
    let mut sum = Phasor::ZERO;
    for s in &scene.sources {
        let k = TAU * s.frequency / medium.speed;
        let r = position.distance(s.position).max(medium.r_min);
        let mag = s.amplitude * medium.gain(r);
        sum += Phasor::from_polar(mag, s.phase_offset - k * r);
    }
    Ok(sum)
}

/// `Re{field * exp(i w t)} + noise_rms * N(0, 1)`.
pub(crate) fn sample_from_baseband<R: Rng + ?Sized>(
    field: Phasor,
    omega: f64,
    t: f64,
    noise_rms: f64,
    rng: &mut R,
) -> f64 {
    let (s, c) = (omega * t).sin_cos();
    let clean = field.re * c - field.im * s;
    if noise_rms > 0.0 {
        let n: f64 = StandardNormal.sample(rng);
        clean + noise_rms * n
    } else {
        clean
    }
}

/// Instantaneous received signal at `position` and time `t` seconds, with
/// additive white Gaussian noise drawn from `rng` when `scene.noise_rms > 0`.
pub fn time_signal_at<R: Rng + ?Sized>(scene: &Scene, position: Vec3, t: f64, rng: &mut R) -> Result<f64, WaveError> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(WaveError::InvalidTime(t));
    }
    let field = baseband_field_at(scene, position)?;
    let omega = TAU * scene.frequency()?;
    Ok(sample_from_baseband(field, omega, t, scene.noise_rms, rng))
}
