//! Phase-colored long-exposure rendering of field clouds.
//!
//! Phase is hue (0 rad = red, increasing counter-clockwise through green and
//! blue), magnitude is brightness. Samples project orthographically onto an
//! axis-aligned plane and expose the image additively or by maximum.

use std::f64::consts::TAU;
use std::fs;
use std::io::{self, Write};
use std::path::Path;

use rayon::prelude::*;
use thiserror::Error;

use crate::cloud::FieldCloud;
use crate::geom::Vec3;
use crate::wavecore::Phasor;

pub const DEFAULT_SPLAT_RADIUS: u32 = 1;

#[derive(Debug, Error)]
pub enum RenderError {
    #[error("invalid render configuration: {0}")]
    InvalidConfig(&'static str),
    #[error("no sample falls inside the render extent")]
    EmptyFrame,
    #[error("cloud is not a linear scan")]
    PathKindMismatch,
    #[error("frame count must be at least 1")]
    InvalidFrameCount,
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Axis-aligned projection plane; `(u, v)` are the image axes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Plane {
    Xy,
    Xz,
    Yz,
}

impl Plane {
    pub fn project(self, p: Vec3) -> (f64, f64) {
        match self {
            Plane::Xy => (p.x, p.y),
            Plane::Xz => (p.x, p.z),
            Plane::Yz => (p.y, p.z),
        }
    }
}

/// Region of the projection plane covered by the image, meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extent {
    pub u_min: f64,
    pub u_max: f64,
    pub v_min: f64,
    pub v_max: f64,
}

impl Extent {
    pub fn new(u_min: f64, u_max: f64, v_min: f64, v_max: f64) -> Self {
        Extent { u_min, u_max, v_min, v_max }
    }

    fn validate(&self) -> Result<(), RenderError> {
        let ok = [self.u_min, self.u_max, self.v_min, self.v_max].iter().all(|v| v.is_finite())
            && self.u_max > self.u_min
            && self.v_max > self.v_min;
        if ok {
            Ok(())
        } else {
            Err(RenderError::InvalidConfig("extent must be finite with max > min on both axes"))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exposure {
    /// Per-channel saturating sum, like a photographic long exposure.
    Additive,
    /// Per-channel maximum.
    Max,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Normalization {
    /// Scale by the largest magnitude in the cloud.
    GlobalMax,
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RenderConfig {
    pub width: u32,
    pub height: u32,
    pub plane: Plane,
    pub extent: Extent,
    pub exposure: Exposure,
    pub normalization: Normalization,
    pub splat_radius: u32,
}

impl RenderConfig {
    /// Max exposure, global normalization, default splat.
    pub fn new(width: u32, height: u32, plane: Plane, extent: Extent) -> Self {
        RenderConfig {
            width,
            height,
            plane,
            extent,
            exposure: Exposure::Max,
            normalization: Normalization::GlobalMax,
            splat_radius: DEFAULT_SPLAT_RADIUS,
        }
    }

    pub fn validate(&self) -> Result<(), RenderError> {
        if self.width == 0 || self.height == 0 {
            return Err(RenderError::InvalidConfig("width and height must be >= 1"));
        }
        self.extent.validate()?;
        if let Normalization::Fixed(v) = self.normalization {
            if !(v.is_finite() && v > 0.0) {
                return Err(RenderError::InvalidConfig("fixed normalization must be positive"));
            }
        }
        Ok(())
    }

    /// Pixel `(column, row)` containing `p`, row 0 at `v_max`. `None` when
    /// outside the extent.
    pub fn pixel_of(&self, p: Vec3) -> Option<(u32, u32)> {
        let (u, v) = self.plane.project(p);
        let e = &self.extent;
        if !(u >= e.u_min && u <= e.u_max && v >= e.v_min && v <= e.v_max) {
            return None;
        }
        let col = ((u - e.u_min) / (e.u_max - e.u_min) * self.width as f64).floor() as u32;
        let row = ((e.v_max - v) / (e.v_max - e.v_min) * self.height as f64).floor() as u32;
        Some((col.min(self.width - 1), row.min(self.height - 1)))
    }

    /// World `(u, v)` of a pixel center.
    pub fn pixel_center(&self, col: u32, row: u32) -> (f64, f64) {
        let e = &self.extent;
        let u = e.u_min + (col as f64 + 0.5) * (e.u_max - e.u_min) / self.width as f64;
        let v = e.v_max - (row as f64 + 0.5) * (e.v_max - e.v_min) / self.height as f64;
        (u, v)
    }

    /// Meters per pixel along the image columns.
    pub fn meters_per_pixel_u(&self) -> f64 {
        (self.extent.u_max - self.extent.u_min) / self.width as f64
    }
}

/// Row-major 8-bit RGB image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Image {
    width: u32,
    height: u32,
    pixels: Vec<u8>,
}

impl Image {
    pub fn new(width: u32, height: u32) -> Self {
        Image { width, height, pixels: vec![0; width as usize * height as usize * 3] }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    /// Raw RGB bytes, row-major.
    pub fn as_bytes(&self) -> &[u8] {
        &self.pixels
    }

    fn offset(&self, col: u32, row: u32) -> usize {
        (row as usize * self.width as usize + col as usize) * 3
    }

    pub fn get(&self, col: u32, row: u32) -> [u8; 3] {
        let o = self.offset(col, row);
        [self.pixels[o], self.pixels[o + 1], self.pixels[o + 2]]
    }

    pub fn set(&mut self, col: u32, row: u32, rgb: [u8; 3]) {
        let o = self.offset(col, row);
        self.pixels[o..o + 3].copy_from_slice(&rgb);
    }

    fn expose(&mut self, col: u32, row: u32, rgb: [u8; 3], exposure: Exposure) {
        let o = self.offset(col, row);
        for (dst, src) in self.pixels[o..o + 3].iter_mut().zip(rgb) {
            *dst = match exposure {
                Exposure::Additive => dst.saturating_add(src),
                Exposure::Max => (*dst).max(src),
            };
        }
    }

    /// Binary PPM (P6, maxval 255).
    pub fn write_ppm<W: Write>(&self, mut w: W) -> io::Result<()> {
        write!(w, "P6\n{} {}\n255\n", self.width, self.height)?;
        w.write_all(&self.pixels)
    }

    pub fn to_ppm(&self) -> Vec<u8> {
        let mut buf = Vec::with_capacity(self.pixels.len() + 20);
        self.write_ppm(&mut buf).expect("writing to a Vec cannot fail");
        buf
    }

    pub fn save_ppm(&self, path: &Path) -> io::Result<()> {
        fs::write(path, self.to_ppm())
    }
}

/// Frames of a complex-rotation animation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrameSequence {
    pub frames: Vec<Image>,
}

impl FrameSequence {
    pub fn frame_name(index: usize) -> String {
        format!("frame_{index:04}.ppm")
    }

    /// Writes `frame_0000.ppm`, `frame_0001.ppm`, ... into `dir`.
    pub fn save_ppm_dir(&self, dir: &Path) -> io::Result<()> {
        fs::create_dir_all(dir)?;
        for (i, f) in self.frames.iter().enumerate() {
            f.save_ppm(&dir.join(Self::frame_name(i)))?;
        }
        Ok(())
    }
}

/// Fully saturated HSV color: hue from phase, value from `|z| / norm`.
pub fn phasor_to_rgb(value: Phasor, norm: f64) -> [u8; 3] {
    let brightness = (value.magnitude() / norm).clamp(0.0, 1.0);
    if brightness <= 0.0 || brightness.is_nan() {
        return [0, 0, 0];
    }
    let hue = value.phase().rem_euclid(TAU) / TAU * 360.0;
    hsv_to_rgb(hue, brightness)
}

/// Saturation-1 HSV to 8-bit RGB; `hue` in degrees.
fn hsv_to_rgb(hue: f64, value: f64) -> [u8; 3] {
    let h = (hue / 60.0).rem_euclid(6.0);
    let x = value * (1.0 - ((h % 2.0) - 1.0).abs());
    let (r, g, b) = match h as u32 {
        0 => (value, x, 0.0),
        1 => (x, value, 0.0),
        2 => (0.0, value, x),
        3 => (0.0, x, value),
        4 => (x, 0.0, value),
        _ => (value, 0.0, x),
    };
    let q = |c: f64| (c * 255.0).round().clamp(0.0, 255.0) as u8;
    [q(r), q(g), q(b)]
}

fn resolve_norm(cloud: &FieldCloud, normalization: Normalization) -> f64 {
    match normalization {
        Normalization::Fixed(v) => v,
        Normalization::GlobalMax => {
            let m = cloud.max_magnitude();
            if m > 0.0 {
                m
            } else {
                1.0
            }
        }
    }
}

/// Long-exposure image of a cloud.
pub fn rasterize(cloud: &FieldCloud, cfg: &RenderConfig) -> Result<Image, RenderError> {
    cfg.validate()?;
    let norm = resolve_norm(cloud, cfg.normalization);
    rasterize_with_norm(cloud, cfg, norm)
}

/// Expose `cloud` onto an existing image, accumulating like a further pass
/// of the same long exposure.
pub fn rasterize_into(image: &mut Image, cloud: &FieldCloud, cfg: &RenderConfig) -> Result<(), RenderError> {
    cfg.validate()?;
    if image.width != cfg.width || image.height != cfg.height {
        return Err(RenderError::InvalidConfig("image size does not match the render configuration"));
    }
    let norm = resolve_norm(cloud, cfg.normalization);
    if expose_cloud(image, cloud, cfg, norm) {
        Ok(())
    } else {
        Err(RenderError::EmptyFrame)
    }
}

fn rasterize_with_norm(cloud: &FieldCloud, cfg: &RenderConfig, norm: f64) -> Result<Image, RenderError> {
    let mut img = Image::new(cfg.width, cfg.height);
    if expose_cloud(&mut img, cloud, cfg, norm) {
        Ok(img)
    } else {
        Err(RenderError::EmptyFrame)
    }
}

/// Returns whether any sample fell inside the extent.
fn expose_cloud(img: &mut Image, cloud: &FieldCloud, cfg: &RenderConfig, norm: f64) -> bool {
    let r = cfg.splat_radius as i64;
    let mut hit = false;
    for s in cloud.samples() {
        let Some((col, row)) = cfg.pixel_of(s.position) else {
            continue;
        };
        hit = true;
        let rgb = phasor_to_rgb(s.value, norm);
        for dy in -r..=r {
            for dx in -r..=r {
                if dx * dx + dy * dy > r * r {
                    continue;
                }
                let (c, w) = (col as i64 + dx, row as i64 + dy);
                if c < 0 || w < 0 || c >= cfg.width as i64 || w >= cfg.height as i64 {
                    continue;
                }
                img.expose(c as u32, w as u32, rgb, cfg.exposure);
            }
        }
    }
    hit
}

/// Rotation that is exactly the identity when `angle` is a whole number of
/// turns up to round-off.
fn frame_rotation(angle: f64) -> Option<Phasor> {
    let turns = angle / TAU;
    if (turns - turns.round()).abs() < 1e-12 {
        None
    } else {
        Some(Phasor::cis(angle))
    }
}

/// Frame `j` renders the cloud multiplied by `exp(i j delta_phase)`, so with
/// the field's `exp(-i k r)` dependence the wavefronts crawl away from the
/// sources by `delta_phase / 2 pi` wavelengths per frame. Normalization is
/// resolved once, so brightness does not flicker.
pub fn animate(
    cloud: &FieldCloud,
    cfg: &RenderConfig,
    frames: usize,
    delta_phase: f64,
) -> Result<FrameSequence, RenderError> {
    if frames == 0 {
        return Err(RenderError::InvalidFrameCount);
    }
    if !delta_phase.is_finite() {
        return Err(RenderError::InvalidConfig("delta_phase must be finite"));
    }
    cfg.validate()?;
    let norm = resolve_norm(cloud, cfg.normalization);
    let frames = (0..frames)
        .into_par_iter()
        .map(|j| match frame_rotation(j as f64 * delta_phase) {
            None => rasterize_with_norm(cloud, cfg, norm),
            Some(unit) => rasterize_with_norm(&cloud.map_values(|v| v * unit), cfg, norm),
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(FrameSequence { frames })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Component {
    Re,
    Im,
}

impl Component {
    pub fn of(self, p: Phasor) -> f64 {
        match self {
            Component::Re => p.re,
            Component::Im => p.im,
        }
    }
}

/// SWIM dot graph: one column per sample in path order, one white pixel per
/// column at a height proportional to the chosen component (`-max` at the
/// bottom row, `+max` at the top, zero in the middle).
pub fn swim_dotgraph(cloud: &FieldCloud, height: u32, component: Component) -> Result<Image, RenderError> {
    if height == 0 {
        return Err(RenderError::InvalidConfig("height must be >= 1"));
    }
    if cloud.line_axis().is_none() {
        return Err(RenderError::PathKindMismatch);
    }
    let width = u32::try_from(cloud.len()).map_err(|_| RenderError::InvalidConfig("too many samples"))?;
    let peak = cloud.samples().iter().map(|s| component.of(s.value).abs()).fold(0.0, f64::max);
    let scale = if peak > 0.0 { peak } else { 1.0 };
    let bottom = (height - 1) as f64;
    let mut img = Image::new(width, height);
    for (col, s) in cloud.samples().iter().enumerate() {
        let level = (component.of(s.value) / scale).clamp(-1.0, 1.0);
        let row = ((1.0 - level) / 2.0 * bottom).round() as u32;
        img.set(col as u32, row, [255, 255, 255]);
    }
    Ok(img)
}
