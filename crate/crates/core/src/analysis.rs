//! Physics read off scanned clouds: wavelength from zero crossings, speed of
//! propagation, the temperature model for sound in air, and two-source
//! fringe spacing.

use thiserror::Error;

use crate::cloud::FieldCloud;
use crate::render::Component;

/// Speed of sound in dry air at 0 degrees C, m/s.
pub const SOUND_SPEED_0C: f64 = 331.3;
pub const ABSOLUTE_ZERO_C: f64 = -273.15;
/// `distance / separation` at or above which a scan counts as far field.
pub const FAR_FIELD_RATIO: f64 = 5.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error("found {crossings} zero crossings, need at least 3")]
    NoOscillation { crossings: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(&'static str),
    #[error("found {peaks} magnitude peaks, need at least 2")]
    InsufficientFringes { peaks: usize },
    #[error("cloud is not a linear scan")]
    PathKindMismatch,
}

/// One speed-of-propagation measurement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveMeasurement {
    /// Meters.
    pub wavelength: f64,
    /// Cycles across the scan.
    pub cycle_count: f64,
    /// m/s.
    pub speed: f64,
    /// m/s, when a reference speed was supplied.
    pub theory: Option<f64>,
    pub relative_error_vs_theory: Option<f64>,
}

impl WaveMeasurement {
    /// `key=value` report lines.
    pub fn report_lines(&self) -> Vec<String> {
        let mut out = vec![
            format!("wavelength={}", self.wavelength),
            format!("cycles={}", self.cycle_count),
            format!("speed={}", self.speed),
        ];
        if let (Some(t), Some(e)) = (self.theory, self.relative_error_vs_theory) {
            out.push(format!("theory={t}"));
            out.push(format!("relative_error={e}"));
        }
        out
    }
}

/// Samples of a linear cloud as `(distance along the line, component)`.
fn line_profile(
    cloud: &FieldCloud,
    f: impl Fn(crate::wavecore::Phasor) -> f64,
) -> Result<Vec<(f64, f64)>, AnalysisError> {
    let axis = cloud.line_axis().ok_or(AnalysisError::PathKindMismatch)?;
    Ok(cloud.samples().iter().map(|s| (axis.coordinate(s.position), f(s.value))).collect())
}

/// Interpolated zero-crossing positions of the de-meaned profile.
fn zero_crossings(profile: &[(f64, f64)]) -> Vec<f64> {
    let mean = profile.iter().map(|p| p.1).sum::<f64>() / profile.len() as f64;
    profile
        .windows(2)
        .filter_map(|w| {
            let (s0, v0) = (w[0].0, w[0].1 - mean);
            let (s1, v1) = (w[1].0, w[1].1 - mean);
            ((v0 < 0.0) != (v1 < 0.0)).then(|| s0 + v0 / (v0 - v1) * (s1 - s0))
        })
        .collect()
}

/// Twice the mean spacing of consecutive zero crossings of one component
/// along a linear scan.
pub fn extract_wavelength(cloud: &FieldCloud, component: Component) -> Result<f64, AnalysisError> {
    let profile = line_profile(cloud, |p| component.of(p))?;
    let crossings = zero_crossings(&profile);
    if crossings.len() < 3 {
        return Err(AnalysisError::NoOscillation { crossings: crossings.len() });
    }
    let first = crossings[0];
    let last = crossings[crossings.len() - 1];
    Ok(2.0 * (last - first).abs() / (crossings.len() - 1) as f64)
}

/// `wavelength * frequency`.
pub fn propagation_speed(wavelength: f64, frequency: f64) -> Result<f64, AnalysisError> {
    if !(wavelength.is_finite() && wavelength > 0.0) {
        return Err(AnalysisError::InvalidArgument("wavelength must be positive"));
    }
    if !(frequency.is_finite() && frequency > 0.0) {
        return Err(AnalysisError::InvalidArgument("frequency must be positive"));
    }
    Ok(wavelength * frequency)
}

/// Speed of sound in dry air at `celsius`: `331.3 * sqrt(1 + T / 273.15)`.
pub fn theoretical_sound_speed(celsius: f64) -> Result<f64, AnalysisError> {
    if !(celsius.is_finite() && celsius > ABSOLUTE_ZERO_C) {
        return Err(AnalysisError::InvalidArgument("temperature must be above absolute zero"));
    }
    Ok(SOUND_SPEED_0C * (1.0 + celsius / -ABSOLUTE_ZERO_C).sqrt())
}

/// Wavelength, cycle count and speed from a linear scan, optionally compared
/// against a reference speed.
pub fn measure_wave(
    cloud: &FieldCloud,
    component: Component,
    reference_speed: Option<f64>,
) -> Result<WaveMeasurement, AnalysisError> {
    let wavelength = extract_wavelength(cloud, component)?;
    let speed = propagation_speed(wavelength, cloud.frequency())?;
    let axis = cloud.line_axis().ok_or(AnalysisError::PathKindMismatch)?;
    let span = cloud.samples().iter().map(|s| axis.coordinate(s.position)).fold(f64::NEG_INFINITY, f64::max);
    let relative_error_vs_theory = reference_speed.map(|t| (speed - t).abs() / t);
    Ok(WaveMeasurement {
        wavelength,
        cycle_count: span / wavelength,
        speed,
        theory: reference_speed,
        relative_error_vs_theory,
    })
}

/// Source layout of a two-source fringe scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FringeGeometry {
    /// Source separation, m.
    pub separation: f64,
    /// Distance from the source baseline to the scan line, m.
    pub distance: f64,
}

impl FringeGeometry {
    pub fn is_far_field(&self) -> bool {
        self.distance >= FAR_FIELD_RATIO * self.separation
    }

    /// Small-angle far-field spacing `lambda L / d`.
    pub fn predicted_spacing(&self, wavelength: f64) -> f64 {
        wavelength * self.distance / self.separation
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FringeMeasurement {
    /// Mean distance between consecutive magnitude maxima, m.
    pub spacing: f64,
    /// Peak positions along the scan line, m.
    pub peaks: Vec<f64>,
    /// Scan is closer than the far-field gate; `lambda L / d` does not apply.
    pub near_field: bool,
}

/// 3-point moving average; endpoints are kept.
fn smooth3(values: &[f64]) -> Vec<f64> {
    let mut out = values.to_vec();
    for i in 1..values.len().saturating_sub(1) {
        out[i] = (values[i - 1] + values[i] + values[i + 1]) / 3.0;
    }
    out
}

/// Indices of strict local maxima. A flat-topped peak resolves to its
/// leftmost sample.
pub(crate) fn peak_indices(values: &[f64]) -> Vec<usize> {
    let mut peaks = Vec::new();
    let mut i = 1;
    while i + 1 < values.len() {
        if values[i] > values[i - 1] {
            let mut j = i;
            while j + 1 < values.len() && values[j + 1] == values[i] {
                j += 1;
            }
            if j + 1 < values.len() && values[j + 1] < values[i] {
                peaks.push(i);
            }
            i = j + 1;
        } else {
            i += 1;
        }
    }
    peaks
}

/// Mean spacing of field-magnitude maxima along a linear scan parallel to the
/// source baseline.
pub fn fringe_spacing(cloud: &FieldCloud, geometry: &FringeGeometry) -> Result<FringeMeasurement, AnalysisError> {
    if !(geometry.separation > 0.0 && geometry.distance > 0.0) {
        return Err(AnalysisError::InvalidArgument("separation and distance must be positive"));
    }
    let mut profile = line_profile(cloud, |p| p.magnitude())?;
    profile.sort_by(|a, b| a.0.total_cmp(&b.0));
    let magnitudes: Vec<f64> = profile.iter().map(|p| p.1).collect();
    let smoothed = smooth3(&magnitudes);
    let peaks: Vec<f64> = peak_indices(&smoothed).into_iter().map(|i| profile[i].0).collect();
    if peaks.len() < 2 {
        return Err(AnalysisError::InsufficientFringes { peaks: peaks.len() });
    }
    let spacing = (peaks[peaks.len() - 1] - peaks[0]) / (peaks.len() - 1) as f64;
    Ok(FringeMeasurement { spacing, peaks, near_field: !geometry.is_far_field() })
}
