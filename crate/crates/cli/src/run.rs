//! Pipelines behind each subcommand.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use swimlab_core::analysis::{fringe_spacing, measure_wave, theoretical_sound_speed};
use swimlab_core::render::{animate, rasterize, swim_dotgraph};
use swimlab_core::scan::{acquire_ideal, acquire_lockin};
use swimlab_core::sightfield::sweep_sightfield;
use swimlab_core::{AnalysisError, FieldCloud, RenderError, ScanError, Scene, SightfieldError};

use crate::config::{dump_config, AnimateSpec, ConfigError, RunConfig, DEFAULT_FRAMES};

pub const NORMALIZED_CONFIG: &str = "config.normalized.json";
pub const REPORT: &str = "report.txt";
pub const CLOUD: &str = "cloud.swimcloud";
pub const IMAGE: &str = "image.ppm";
pub const DOTGRAPH: &str = "dotgraph.ppm";
pub const FRAMES_DIR: &str = "frames";
pub const SIGHTFIELD_CLOUD: &str = "sightfield.swimcloud";
pub const SIGHTFIELD_IMAGE: &str = "sightfield.ppm";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Simulate,
    Render,
    Animate,
    Analyze,
    Sightfield,
    /// Every stage the configuration has a section for.
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Config,
    /// Output directory or file could not be written.
    Output,
    Acquisition,
    Render,
    Analysis,
}

impl ErrorKind {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorKind::Config | ErrorKind::Output => 2,
            ErrorKind::Acquisition => 3,
            ErrorKind::Render => 4,
            ErrorKind::Analysis => 5,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ErrorKind::Config => "config",
            ErrorKind::Output => "output",
            ErrorKind::Acquisition => "acquisition",
            ErrorKind::Render => "render",
            ErrorKind::Analysis => "analysis",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunError {
    pub kind: ErrorKind,
    pub field: Option<String>,
    pub message: String,
}

impl RunError {
    pub fn new(kind: ErrorKind, message: impl fmt::Display) -> Self {
        RunError { kind, field: None, message: message.to_string() }
    }

    pub fn exit_code(&self) -> i32 {
        self.kind.exit_code()
    }

    /// Single machine-readable line for stderr.
    pub fn line(&self) -> String {
        let mut s = format!("error code={} kind={}", self.exit_code(), self.kind.name());
        if let Some(f) = &self.field {
            s.push_str(&format!(" field={f}"));
        }
        s.push_str(&format!(" message={:?}", self.message));
        s
    }
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.line())
    }
}

impl std::error::Error for RunError {}

impl From<ConfigError> for RunError {
    fn from(e: ConfigError) -> Self {
        RunError { kind: ErrorKind::Config, field: e.field().map(str::to_string), message: e.to_string() }
    }
}

impl From<ScanError> for RunError {
    fn from(e: ScanError) -> Self {
        RunError::new(ErrorKind::Acquisition, e)
    }
}

impl From<SightfieldError> for RunError {
    fn from(e: SightfieldError) -> Self {
        RunError::new(ErrorKind::Acquisition, e)
    }
}

impl From<RenderError> for RunError {
    fn from(e: RenderError) -> Self {
        match e {
            RenderError::Io(io) => RunError::new(ErrorKind::Output, io),
            other => RunError::new(ErrorKind::Render, other),
        }
    }
}

impl From<AnalysisError> for RunError {
    fn from(e: AnalysisError) -> Self {
        RunError::new(ErrorKind::Analysis, e)
    }
}

/// Ordered `key=value` lines.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    entries: Vec<(String, String)>,
}

impl Report {
    pub fn push(&mut self, key: impl Into<String>, value: impl fmt::Display) {
        self.entries.push((key.into(), value.to_string()));
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn entries(&self) -> &[(String, String)] {
        &self.entries
    }

    /// Append `other` with every key prefixed by `prefix.`.
    pub fn extend_prefixed(&mut self, prefix: &str, other: &Report) {
        for (k, v) in &other.entries {
            self.entries.push((format!("{prefix}.{k}"), v.clone()));
        }
    }

    pub fn to_text(&self) -> String {
        self.entries.iter().map(|(k, v)| format!("{k}={v}\n")).collect()
    }
}

fn output<T>(r: std::io::Result<T>, path: &Path) -> Result<T, RunError> {
    r.map_err(|e| RunError { kind: ErrorKind::Output, field: None, message: format!("{}: {e}", path.display()) })
}

fn write_file(path: PathBuf, bytes: &[u8]) -> Result<(), RunError> {
    output(fs::write(&path, bytes), &path)
}

fn require_scene(cfg: &RunConfig) -> Result<&Scene, RunError> {
    cfg.scene.as_ref().ok_or_else(|| ConfigError::MissingField("sources".into()).into())
}

/// Scan the scene along the configured path with the configured detector.
pub fn acquire(cfg: &RunConfig) -> Result<FieldCloud, RunError> {
    let scene = require_scene(cfg)?;
    let path = cfg.path.build()?;
    Ok(match &cfg.lockin {
        Some(l) => acquire_lockin(scene, &path, l)?,
        None => acquire_ideal(scene, &path)?,
    })
}

/// Run `stage`, writing artifacts and `report.txt` into `out`.
pub fn run(cfg: &RunConfig, stage: Stage, out: &Path) -> Result<Report, RunError> {
    output(fs::create_dir_all(out), out)?;
    write_file(out.join(NORMALIZED_CONFIG), dump_config(cfg).as_bytes())?;

    let mut report = Report::default();
    report.push("seed", cfg.seed);
    let wants = |s: Stage| stage == s || stage == Stage::All;
    let wave = match stage {
        Stage::Sightfield => false,
        Stage::All => cfg.scene.is_some(),
        _ => true,
    };

    if wave {
        let cloud = acquire(cfg)?;
        simulate_report(cfg, &cloud, &mut report);
        write_file(out.join(CLOUD), cloud.to_text().as_bytes())?;

        if wants(Stage::Render) {
            if stage == Stage::Render && cfg.render.is_none() && cfg.dotgraph.is_none() {
                return Err(ConfigError::MissingField("render".into()).into());
            }
            if let Some(r) = &cfg.render {
                let path = out.join(IMAGE);
                output(rasterize(&cloud, r)?.save_ppm(&path), &path)?;
                report.push("image", IMAGE);
            }
            if let Some(d) = &cfg.dotgraph {
                let path = out.join(DOTGRAPH);
                output(swim_dotgraph(&cloud, d.height, d.component)?.save_ppm(&path), &path)?;
                report.push("dotgraph", DOTGRAPH);
            }
        }
        let animate_spec = match (stage, cfg.animate) {
            (Stage::Animate, None) => {
                Some(AnimateSpec { frames: DEFAULT_FRAMES, delta_phase: std::f64::consts::TAU / DEFAULT_FRAMES as f64 })
            }
            (Stage::Animate | Stage::All, spec) => spec,
            _ => None,
        };
        if let Some(a) = animate_spec {
            let render =
                cfg.render.as_ref().ok_or_else(|| RunError::from(ConfigError::MissingField("render".into())))?;
            let frames = animate(&cloud, render, a.frames, a.delta_phase)?;
            let dir = out.join(FRAMES_DIR);
            frames
                .save_ppm_dir(&dir)
                .map_err(|e| RunError::new(ErrorKind::Output, format!("{}: {e}", dir.display())))?;
            report.push("frames", a.frames);
            report.push("delta_phase", a.delta_phase);
        }
        if stage == Stage::Analyze || (stage == Stage::All && cfg.analysis.is_some()) {
            analyze(cfg, &cloud, &mut report)?;
        }
    }

    if wants(Stage::Sightfield) && (stage == Stage::Sightfield || cfg.sightfield.is_some()) {
        let spec =
            cfg.sightfield.as_ref().ok_or_else(|| RunError::from(ConfigError::MissingField("sightfield".into())))?;
        let path = cfg.path.build()?;
        let cloud = sweep_sightfield(&spec.camera, &path, &spec.feedback)?;
        write_file(out.join(SIGHTFIELD_CLOUD), cloud.to_text().as_bytes())?;
        let lit = cloud.samples().iter().filter(|s| s.value.re > 0.5).count();
        report.push("sightfield_poses", cloud.len());
        report.push("sightfield_lit", lit);
        if let Some(r) = &cfg.render {
            let path = out.join(SIGHTFIELD_IMAGE);
            output(rasterize(&cloud, r)?.save_ppm(&path), &path)?;
            report.push("sightfield_image", SIGHTFIELD_IMAGE);
        }
    }

    write_file(out.join(REPORT), report.to_text().as_bytes())?;
    Ok(report)
}

fn simulate_report(cfg: &RunConfig, cloud: &FieldCloud, report: &mut Report) {
    report.push("poses", cloud.len());
    report.push("acquisition", cloud.acquisition());
    report.push("frequency", cloud.frequency());
    report.push("medium_speed", cloud.medium_speed());
    if let Some(scene) = &cfg.scene {
        if let Ok(l) = scene.wavelength() {
            report.push("expected_wavelength", l);
        }
    }
    report.push("max_magnitude", cloud.max_magnitude());
}

fn analyze(cfg: &RunConfig, cloud: &FieldCloud, report: &mut Report) -> Result<(), RunError> {
    let spec = cfg.analysis.unwrap_or(crate::config::AnalysisSpec {
        component: swimlab_core::Component::Re,
        temperature_c: None,
        fringes: None,
    });
    let theory = spec.temperature_c.map(theoretical_sound_speed).transpose()?;
    match spec.fringes {
        None => {
            let m = measure_wave(cloud, spec.component, theory)?;
            for line in m.report_lines() {
                let (k, v) = line.split_once('=').expect("report lines are key=value");
                report.push(k, v);
            }
            let medium = cloud.medium_speed();
            report.push("speed_error", ((m.speed - medium) / medium).abs());
        }
        Some(geometry) => {
            let m = fringe_spacing(cloud, &geometry)?;
            let lambda = require_scene(cfg)?.wavelength().map_err(|e| RunError::new(ErrorKind::Analysis, e))?;
            let predicted = geometry.predicted_spacing(lambda);
            report.push("fringe_spacing", m.spacing);
            report.push("fringe_peaks", m.peaks.len());
            report.push("fringe_predicted", predicted);
            report.push("fringe_error", ((m.spacing - predicted) / predicted).abs());
            report.push("near_field", m.near_field);
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn module_errors_map_to_stage_exit_codes() {
        let codes = [
            RunError::from(ConfigError::MissingField("x".into())).exit_code(),
            RunError::from(ScanError::InvalidDwell(0.0)).exit_code(),
            RunError::from(SightfieldError::InvalidCamera("x")).exit_code(),
            RunError::from(RenderError::EmptyFrame).exit_code(),
            RunError::from(AnalysisError::NoOscillation { crossings: 1 }).exit_code(),
        ];
        assert_eq!(codes, [2, 3, 3, 4, 5]);
        let io = RenderError::Io(std::io::Error::other("disk full"));
        assert_eq!(RunError::from(io).kind, ErrorKind::Output);
    }

    #[test]
    fn error_line_names_the_field() {
        let e = RunError::from(ConfigError::MissingField("medium.speed".into()));
        assert_eq!(
            e.line(),
            "error code=2 kind=config field=medium.speed message=\"missing required field `medium.speed`\""
        );
    }

    #[test]
    fn report_text_and_prefixing() {
        let mut a = Report::default();
        a.push("speed", 347.5);
        let mut b = Report::default();
        b.extend_prefixed("d0.5", &a);
        assert_eq!(b.to_text(), "d0.5.speed=347.5\n");
        assert_eq!(b.get("d0.5.speed"), Some("347.5"));
    }
}
