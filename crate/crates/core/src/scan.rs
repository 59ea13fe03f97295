//! Scan paths and acquisition.
//!
//! Acquisition is per pose and order preserving. Poses run in parallel on the
//! current rayon pool; each pose draws noise from its own ChaCha stream keyed
//! by `(seed, pose index)`, so the result does not depend on thread count.

use std::f64::consts::TAU;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::cloud::{Acquisition, CloudError, CloudSample, FieldCloud, LINE_TOLERANCE};
use crate::geom::Vec3;
use crate::lockin::{self, LockInConfig, LockInError};
use crate::wavecore::{self, Scene, WaveError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScanError {
    #[error("degenerate path: {0}")]
    DegeneratePath(&'static str),
    #[error("invalid extent: {0}")]
    InvalidExtent(&'static str),
    #[error("dwell must be positive and finite, got {0}")]
    InvalidDwell(f64),
    #[error("lock-in reference {reference} Hz does not match scene frequency {scene} Hz")]
    ReferenceMismatch { reference: f64, scene: f64 },
    #[error("pose {pose}: dwell of {got} samples is shorter than the {needed}-sample settling window")]
    NotSettled { pose: usize, needed: usize, got: usize },
    #[error(transparent)]
    Wave(#[from] WaveError),
    #[error(transparent)]
    LockIn(#[from] LockInError),
    #[error(transparent)]
    Cloud(#[from] CloudError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplePose {
    pub position: Vec3,
    /// Seconds.
    pub dwell: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PathKind {
    Linear,
    Raster2D,
    Raster3D,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanPath {
    poses: Vec<SamplePose>,
    kind: PathKind,
}

impl ScanPath {
    /// Path from explicit poses. Linear paths must be collinear.
    pub fn new(poses: Vec<SamplePose>, kind: PathKind) -> Result<Self, ScanError> {
        if poses.len() < 2 {
            return Err(ScanError::DegeneratePath("a path needs at least 2 poses"));
        }
        if poses.iter().any(|p| !p.position.is_finite()) {
            return Err(ScanError::DegeneratePath("positions must be finite"));
        }
        for p in &poses {
            check_dwell(p.dwell)?;
        }
        if kind == PathKind::Linear {
            let origin = poses[0].position;
            let far = poses.iter().map(|p| p.position).fold(origin, |a, b| {
                if b.distance(origin) > a.distance(origin) {
                    b
                } else {
                    a
                }
            });
            let span = far.distance(origin);
            if span == 0.0 {
                return Err(ScanError::DegeneratePath("all poses coincide"));
            }
            let dir = (far - origin) * (1.0 / span);
            let off_line = poses.iter().any(|p| {
                let d = p.position - origin;
                (d - dir * d.dot(dir)).norm() > LINE_TOLERANCE * span.max(1.0)
            });
            if off_line {
                return Err(ScanError::DegeneratePath("linear path poses are not collinear"));
            }
        }
        Ok(ScanPath { poses, kind })
    }

    pub fn poses(&self) -> &[SamplePose] {
        &self.poses
    }

    pub fn kind(&self) -> PathKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.poses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.poses.is_empty()
    }

    /// Same positions with every dwell replaced.
    pub fn with_dwell(mut self, dwell: f64) -> Result<Self, ScanError> {
        check_dwell(dwell)?;
        for p in &mut self.poses {
            p.dwell = dwell;
        }
        Ok(self)
    }
}

fn check_dwell(dwell: f64) -> Result<(), ScanError> {
    if dwell.is_finite() && dwell > 0.0 {
        Ok(())
    } else {
        Err(ScanError::InvalidDwell(dwell))
    }
}

/// `n` evenly spaced poses from `start` to `end`, both included.
pub fn linear_path(start: Vec3, end: Vec3, n: usize, dwell: f64) -> Result<ScanPath, ScanError> {
    if n < 2 {
        return Err(ScanError::DegeneratePath("a linear path needs at least 2 poses"));
    }
    if !(start.is_finite() && end.is_finite()) {
        return Err(ScanError::DegeneratePath("endpoints must be finite"));
    }
    if start == end {
        return Err(ScanError::DegeneratePath("start and end coincide"));
    }
    check_dwell(dwell)?;
    let last = (n - 1) as f64;
    let poses = (0..n).map(|i| SamplePose { position: start.lerp(end, i as f64 / last), dwell }).collect();
    Ok(ScanPath { poses, kind: PathKind::Linear })
}

/// Serpentine raster over an inclusive grid: x varies fastest and reverses
/// on every row, rows reverse on every plane.
pub fn raster_path(min_corner: Vec3, max_corner: Vec3, counts: [usize; 3], dwell: f64) -> Result<ScanPath, ScanError> {
    if !(min_corner.is_finite() && max_corner.is_finite()) {
        return Err(ScanError::InvalidExtent("corners must be finite"));
    }
    let (lo, hi) = (min_corner.to_array(), max_corner.to_array());
    if lo.iter().zip(&hi).any(|(a, b)| a > b) {
        return Err(ScanError::InvalidExtent("max_corner must be >= min_corner on every axis"));
    }
    if counts.contains(&0) {
        return Err(ScanError::DegeneratePath("every axis needs at least one pose"));
    }
    let total = counts.iter().try_fold(1usize, |acc, &c| acc.checked_mul(c));
    let total = total.ok_or(ScanError::DegeneratePath("pose count overflows"))?;
    if total < 2 {
        return Err(ScanError::DegeneratePath("a raster needs at least 2 poses"));
    }
    for axis in 0..3 {
        if counts[axis] > 1 && lo[axis] == hi[axis] {
            return Err(ScanError::InvalidExtent("an axis with several poses needs a non-zero extent"));
        }
    }
    check_dwell(dwell)?;

    let coord = |axis: usize, i: usize| -> f64 {
        if counts[axis] == 1 {
            lo[axis]
        } else {
            let t = i as f64 / (counts[axis] - 1) as f64;
            lo[axis] + (hi[axis] - lo[axis]) * t
        }
    };
    let [nx, ny, nz] = counts;
    let mut poses = Vec::with_capacity(total);
    let mut row = 0usize;
    for k in 0..nz {
        for jj in 0..ny {
            let j = if k.is_multiple_of(2) { jj } else { ny - 1 - jj };
            for ii in 0..nx {
                let i = if row.is_multiple_of(2) { ii } else { nx - 1 - ii };
                poses.push(SamplePose { position: Vec3::new(coord(0, i), coord(1, j), coord(2, k)), dwell });
            }
            row += 1;
        }
    }
    let kind = if nz > 1 { PathKind::Raster3D } else { PathKind::Raster2D };
    Ok(ScanPath { poses, kind })
}

/// Noise-free field at every pose.
pub fn acquire_ideal(scene: &Scene, path: &ScanPath) -> Result<FieldCloud, ScanError> {
    scene.validate()?;
    let samples = path
        .poses
        .par_iter()
        .map(|pose| {
            let value = wavecore::baseband_field_at(scene, pose.position)?;
            Ok(CloudSample { position: pose.position, value })
        })
        .collect::<Result<Vec<_>, WaveError>>()?;
    Ok(FieldCloud::new(samples, scene.frequency()?, scene.medium.speed, Acquisition::Ideal, scene.seed)?)
}

/// Noise generator for one pose, independent of evaluation order.
pub fn pose_rng(seed: u64, pose_index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(pose_index as u64);
    rng
}

/// Full measurement chain: synthesize each dwell from the time-domain
/// signal, demodulate it, keep the settled output.
pub fn acquire_lockin(scene: &Scene, path: &ScanPath, cfg: &LockInConfig) -> Result<FieldCloud, ScanError> {
    scene.validate()?;
    cfg.validate()?;
    let frequency = scene.frequency()?;
    if cfg.reference_frequency != frequency {
        return Err(ScanError::ReferenceMismatch { reference: cfg.reference_frequency, scene: frequency });
    }
    let needed = lockin::settle_samples(cfg);
    for (pose, p) in path.poses.iter().enumerate() {
        let got = cfg.samples_in(p.dwell);
        if got < needed {
            return Err(ScanError::NotSettled { pose, needed, got });
        }
    }

    let omega = TAU * frequency;
    let samples = path
        .poses
        .par_iter()
        .enumerate()
        .map(|(index, pose)| {
            let field = wavecore::baseband_field_at(scene, pose.position)?;
            let mut rng = pose_rng(scene.seed, index);
            let n = cfg.samples_in(pose.dwell);
            let record: Vec<f64> = (0..n)
                .map(|k| {
                    let t = k as f64 / cfg.sample_rate;
                    wavecore::sample_from_baseband(field, omega, t, scene.noise_rms, &mut rng)
                })
                .collect();
            let value = lockin::demodulate(&record, cfg)?;
            Ok(CloudSample { position: pose.position, value })
        })
        .collect::<Result<Vec<_>, ScanError>>()?;
    Ok(FieldCloud::new(samples, frequency, scene.medium.speed, Acquisition::LockIn, scene.seed)?)
}
