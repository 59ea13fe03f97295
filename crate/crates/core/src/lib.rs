//! Phase-coherent wave-field imaging.
//!
//! Coherent sources are scanned by a simulated sensor, demodulated by a
//! lock-in amplifier into complex phasors, stored as point clouds, and
//! rendered with phase as hue and magnitude as brightness. The [`analysis`]
//! module reads wavelength, propagation speed and fringe spacing back out of
//! the scans; [`sightfield`] reproduces the camera feedback sweep.

pub mod analysis;
pub mod cloud;
pub mod geom;
pub mod lockin;
pub mod render;
pub mod scan;
pub mod sightfield;
pub mod wavecore;

pub use analysis::{AnalysisError, FringeGeometry, FringeMeasurement, WaveMeasurement};
pub use cloud::{Acquisition, CloudError, CloudSample, FieldCloud, LineAxis};
pub use geom::Vec3;
pub use lockin::{LockInConfig, LockInError};
pub use render::{Component, Exposure, Extent, FrameSequence, Image, Normalization, Plane, RenderConfig, RenderError};
pub use scan::{PathKind, SamplePose, ScanError, ScanPath};
pub use sightfield::{CameraModel, FeedbackConfig, SightfieldError};
pub use wavecore::{Attenuation, Medium, Phasor, Scene, Source, WaveError};
