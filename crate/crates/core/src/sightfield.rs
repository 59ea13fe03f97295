//! Bulb-and-camera feedback sweep that paints out a camera's sightfield.
//!
//! A bulb driven by the camera's own video brightens whenever the camera
//! sees it. Visible: `b <- clamp(gain * b + ambient, 0, 1)`. Hidden:
//! `b <- decay * b`. With gain >= 1 the visible state saturates at 1, so the
//! swept bulb lights exactly where the camera looks.

use rayon::prelude::*;
use thiserror::Error;

use crate::cloud::{Acquisition, CloudError, CloudSample, FieldCloud};
use crate::geom::Vec3;
use crate::scan::ScanPath;
use crate::wavecore::Phasor;

/// Relative slack on the frustum side planes so points placed on the
/// boundary by construction count as inside.
pub const FOV_BOUNDARY_EPS: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SightfieldError {
    #[error("invalid camera: {0}")]
    InvalidCamera(&'static str),
    #[error("invalid feedback configuration: {0}")]
    InvalidFeedback(&'static str),
    #[error(transparent)]
    Cloud(#[from] CloudError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraModel {
    pub position: Vec3,
    /// Unit optical axis.
    pub forward: Vec3,
    /// Unit, orthogonal to `forward`.
    pub up: Vec3,
    /// Full horizontal field of view, degrees.
    pub hfov: f64,
    /// Full vertical field of view, degrees.
    pub vfov: f64,
    pub near: f64,
    pub far: f64,
}

impl CameraModel {
    pub fn validate(&self) -> Result<(), SightfieldError> {
        let unit = |v: Vec3| v.is_finite() && (v.norm() - 1.0).abs() <= 1e-9;
        if !self.position.is_finite() {
            return Err(SightfieldError::InvalidCamera("position must be finite"));
        }
        if !unit(self.forward) || !unit(self.up) {
            return Err(SightfieldError::InvalidCamera("forward and up must be unit vectors"));
        }
        if self.forward.dot(self.up).abs() > 1e-9 {
            return Err(SightfieldError::InvalidCamera("up must be orthogonal to forward"));
        }
        let fov_ok = |f: f64| f > 0.0 && f < 180.0;
        if !fov_ok(self.hfov) || !fov_ok(self.vfov) {
            return Err(SightfieldError::InvalidCamera("fields of view must lie in (0, 180) degrees"));
        }
        if !(self.near > 0.0 && self.near < self.far && self.far.is_finite()) {
            return Err(SightfieldError::InvalidCamera("need 0 < near < far"));
        }
        Ok(())
    }

    /// Camera-space `(right, up, depth)` of a world point.
    fn camera_coords(&self, p: Vec3) -> (f64, f64, f64) {
        let d = p - self.position;
        let right = self.forward.cross(self.up);
        (d.dot(right), d.dot(self.up), d.dot(self.forward))
    }
}

/// Inclusive frustum test: depth within `[near, far]` and both angular
/// offsets within half the field of view.
pub fn camera_sees(camera: &CameraModel, point: Vec3) -> bool {
    let (x, y, depth) = camera.camera_coords(point);
    if !(depth >= camera.near && depth <= camera.far) {
        return false;
    }
    let half_h = (camera.hfov.to_radians() / 2.0).tan();
    let half_v = (camera.vfov.to_radians() / 2.0).tan();
    let slack = 1.0 + FOV_BOUNDARY_EPS;
    x.abs() <= depth * half_h * slack && y.abs() <= depth * half_v * slack
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeedbackConfig {
    /// Round-trip gain while the bulb is in view.
    pub loop_gain: f64,
    /// Ambient light that seeds the loop; must be positive.
    pub ambient_seed: f64,
    /// Per-step retention while out of view, in `[0, 1)`.
    pub decay: f64,
    pub iterations: usize,
}

impl Default for FeedbackConfig {
    fn default() -> Self {
        FeedbackConfig { loop_gain: 1.5, ambient_seed: 0.01, decay: 0.5, iterations: 100 }
    }
}

impl FeedbackConfig {
    pub fn validate(&self) -> Result<(), SightfieldError> {
        if !(self.loop_gain.is_finite() && self.loop_gain >= 0.0) {
            return Err(SightfieldError::InvalidFeedback("loop_gain must be >= 0"));
        }
        if !(self.ambient_seed.is_finite() && self.ambient_seed > 0.0) {
            return Err(SightfieldError::InvalidFeedback("ambient_seed must be > 0"));
        }
        if !(self.decay >= 0.0 && self.decay < 1.0) {
            return Err(SightfieldError::InvalidFeedback("decay must lie in [0, 1)"));
        }
        Ok(())
    }
}

/// Bulb brightness after `cfg.iterations` steps of the loop from darkness.
pub fn loop_fixed_point(visible: bool, cfg: &FeedbackConfig) -> f64 {
    let mut b = 0.0f64;
    for _ in 0..cfg.iterations {
        b = if visible { (cfg.loop_gain * b + cfg.ambient_seed).clamp(0.0, 1.0) } else { cfg.decay * b };
    }
    b
}

/// Sweep the bulb along `path`; each pose records `(brightness, 0)`.
/// The cloud carries zero frequency and speed since no wave is involved.
pub fn sweep_sightfield(
    camera: &CameraModel,
    path: &ScanPath,
    cfg: &FeedbackConfig,
) -> Result<FieldCloud, SightfieldError> {
    camera.validate()?;
    cfg.validate()?;
    let lit = loop_fixed_point(true, cfg);
    let dark = loop_fixed_point(false, cfg);
    let samples = path
        .poses()
        .par_iter()
        .map(|pose| {
            let b = if camera_sees(camera, pose.position) { lit } else { dark };
            CloudSample { position: pose.position, value: Phasor::new(b, 0.0) }
        })
        .collect();
    Ok(FieldCloud::new(samples, 0.0, 0.0, Acquisition::Ideal, 0)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn camera() -> CameraModel {
        CameraModel {
            position: Vec3::ZERO,
            forward: Vec3::new(0.0, 0.0, 1.0),
            up: Vec3::new(0.0, 1.0, 0.0),
            hfov: 40.0,
            vfov: 30.0,
            near: 0.1,
            far: 10.0,
        }
    }

    #[test]
    fn axis_and_behind() {
        let c = camera();
        assert!(camera_sees(&c, Vec3::new(0.0, 0.0, (c.near + c.far) / 2.0)));
        assert!(!camera_sees(&c, Vec3::new(0.0, 0.0, -1.0)));
        assert!(!camera_sees(&c, Vec3::new(0.0, 0.0, 0.05)));
        assert!(!camera_sees(&c, Vec3::new(0.0, 0.0, 10.5)));
    }

    #[test]
    fn half_fov_boundary_is_inside() {
        let c = camera();
        let z = 2.0;
        let x = z * 20f64.to_radians().tan();
        assert!(camera_sees(&c, Vec3::new(x, 0.0, z)));
        assert!(camera_sees(&c, Vec3::new(-x, 0.0, z)));
        assert!(!camera_sees(&c, Vec3::new(x * 1.001, 0.0, z)));
        let y = z * 15f64.to_radians().tan();
        assert!(camera_sees(&c, Vec3::new(0.0, y, z)));
        assert!(!camera_sees(&c, Vec3::new(0.0, y * 1.001, z)));
    }

    #[test]
    fn feedback_limits() {
        let sup = FeedbackConfig { loop_gain: 1.5, ambient_seed: 0.01, decay: 0.5, iterations: 100 };
        assert_eq!(loop_fixed_point(true, &sup), 1.0);
        assert!(loop_fixed_point(false, &sup).abs() < 1e-9);
        let sub = FeedbackConfig { loop_gain: 0.5, ..sup };
        assert!((loop_fixed_point(true, &sub) - 0.02).abs() < 1e-6);
    }

    #[test]
    fn validation() {
        let mut c = camera();
        c.up = Vec3::new(0.0, 0.6, 0.8);
        assert!(c.validate().is_err());
        let mut c = camera();
        c.hfov = 180.0;
        assert!(c.validate().is_err());
        let mut c = camera();
        c.near = 5.0;
        c.far = 5.0;
        assert!(c.validate().is_err());
        let bad = FeedbackConfig { decay: 1.0, ..Default::default() };
        assert!(bad.validate().is_err());
        let bad = FeedbackConfig { ambient_seed: 0.0, ..Default::default() };
        assert!(bad.validate().is_err());
    }
}
