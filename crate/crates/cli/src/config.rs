//! Run configuration: a single JSON document with `"schema": 1`.
//!
//! Every error names the offending field with a dotted path such as
//! `medium.speed` or `sources[1].position`.

use std::f64::consts::TAU;

use serde_json::{json, Map, Value};
use thiserror::Error;

use swimlab_core::lockin::{self, MIN_OVERSAMPLING, MIN_SETTLE_FACTOR, MIN_TAU_SAMPLES};
use swimlab_core::render::DEFAULT_SPLAT_RADIUS;
use swimlab_core::scan::{linear_path, raster_path};
use swimlab_core::wavecore::DEFAULT_R_MIN;
use swimlab_core::{
    Attenuation, CameraModel, Component, Exposure, Extent, FeedbackConfig, FringeGeometry, LockInConfig, Medium,
    Normalization, Plane, RenderConfig, ScanPath, Scene, Source, Vec3,
};

pub const SCHEMA_VERSION: u64 = 1;
/// Dwell used for ideal acquisition when none is given, seconds.
pub const DEFAULT_IDEAL_DWELL: f64 = 0.01;
pub const DEFAULT_WIDTH: u32 = 640;
pub const DEFAULT_HEIGHT: u32 = 480;
pub const DEFAULT_FRAMES: usize = 36;
pub const DEFAULT_DOTGRAPH_HEIGHT: u32 = 256;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("malformed JSON: {0}")]
    Syntax(String),
    #[error("missing required field `{0}`")]
    MissingField(String),
    #[error("unknown field `{0}`")]
    UnknownField(String),
    #[error("invalid value for `{0}`: {1}")]
    InvalidValue(String, String),
}

impl ConfigError {
    pub fn field(&self) -> Option<&str> {
        match self {
            ConfigError::Syntax(_) => None,
            ConfigError::MissingField(f) | ConfigError::UnknownField(f) | ConfigError::InvalidValue(f, _) => Some(f),
        }
    }
}

type Result<T> = std::result::Result<T, ConfigError>;

fn invalid(field: impl Into<String>, reason: impl Into<String>) -> ConfigError {
    ConfigError::InvalidValue(field.into(), reason.into())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PathShape {
    Linear { start: Vec3, end: Vec3, count: usize },
    Raster { min: Vec3, max: Vec3, counts: [usize; 3] },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathSpec {
    pub shape: PathShape,
    /// Seconds per pose.
    pub dwell: f64,
}

impl PathSpec {
    pub fn build(&self) -> std::result::Result<ScanPath, swimlab_core::ScanError> {
        match self.shape {
            PathShape::Linear { start, end, count } => linear_path(start, end, count, self.dwell),
            PathShape::Raster { min, max, counts } => raster_path(min, max, counts, self.dwell),
        }
    }

    /// Axis-aligned bounds of every pose.
    fn bounds(&self) -> (Vec3, Vec3) {
        let (a, b) = match self.shape {
            PathShape::Linear { start, end, .. } => (start, end),
            PathShape::Raster { min, max, .. } => (min, max),
        };
        (Vec3::new(a.x.min(b.x), a.y.min(b.y), a.z.min(b.z)), Vec3::new(a.x.max(b.x), a.y.max(b.y), a.z.max(b.z)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnimateSpec {
    pub frames: usize,
    /// Radians per frame.
    pub delta_phase: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DotGraphSpec {
    pub height: u32,
    pub component: Component,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalysisSpec {
    pub component: Component,
    /// Air temperature for the theoretical speed of sound.
    pub temperature_c: Option<f64>,
    pub fringes: Option<FringeGeometry>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SightfieldSpec {
    pub camera: CameraModel,
    pub feedback: FeedbackConfig,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub seed: u64,
    /// Absent for sightfield-only runs.
    pub scene: Option<Scene>,
    pub path: PathSpec,
    /// `None` selects ideal acquisition.
    pub lockin: Option<LockInConfig>,
    pub render: Option<RenderConfig>,
    pub animate: Option<AnimateSpec>,
    pub dotgraph: Option<DotGraphSpec>,
    pub analysis: Option<AnalysisSpec>,
    pub sightfield: Option<SightfieldSpec>,
}

/// Typed reads from one JSON object that remember which keys were consumed.
struct Fields<'a> {
    prefix: String,
    map: &'a Map<String, Value>,
    seen: Vec<&'static str>,
}

impl<'a> Fields<'a> {
    fn new(prefix: &str, value: &'a Value) -> Result<Self> {
        let map = value.as_object().ok_or_else(|| invalid(display_name(prefix), "expected an object"))?;
        Ok(Fields { prefix: prefix.to_string(), map, seen: Vec::new() })
    }

    fn name(&self, key: &str) -> String {
        if self.prefix.is_empty() {
            key.to_string()
        } else {
            format!("{}.{}", self.prefix, key)
        }
    }

    fn get(&mut self, key: &'static str) -> Option<&'a Value> {
        self.seen.push(key);
        self.map.get(key)
    }

    fn req(&mut self, key: &'static str) -> Result<&'a Value> {
        let name = self.name(key);
        self.get(key).ok_or(ConfigError::MissingField(name))
    }

    fn f64(&mut self, key: &'static str) -> Result<Option<f64>> {
        let name = self.name(key);
        self.get(key).map(|v| as_f64(&name, v)).transpose()
    }

    fn req_f64(&mut self, key: &'static str) -> Result<f64> {
        let name = self.name(key);
        as_f64(&name, self.req(key)?)
    }

    fn u64(&mut self, key: &'static str) -> Result<Option<u64>> {
        let name = self.name(key);
        self.get(key).map(|v| as_u64(&name, v)).transpose()
    }

    fn req_u64(&mut self, key: &'static str) -> Result<u64> {
        let name = self.name(key);
        as_u64(&name, self.req(key)?)
    }

    fn str(&mut self, key: &'static str) -> Result<Option<&'a str>> {
        let name = self.name(key);
        self.get(key).map(|v| v.as_str().ok_or_else(|| invalid(name, "expected a string"))).transpose()
    }

    fn vec3(&mut self, key: &'static str) -> Result<Option<Vec3>> {
        let name = self.name(key);
        self.get(key).map(|v| as_vec3(&name, v)).transpose()
    }

    fn req_vec3(&mut self, key: &'static str) -> Result<Vec3> {
        let name = self.name(key);
        as_vec3(&name, self.req(key)?)
    }

    fn finish(self) -> Result<()> {
        match self.map.keys().find(|k| !self.seen.contains(&k.as_str())) {
            Some(k) => Err(ConfigError::UnknownField(self.name(k))),
            None => Ok(()),
        }
    }
}

fn display_name(prefix: &str) -> String {
    if prefix.is_empty() {
        "(root)".to_string()
    } else {
        prefix.to_string()
    }
}

fn as_f64(name: &str, v: &Value) -> Result<f64> {
    match v.as_f64() {
        Some(x) if x.is_finite() => Ok(x),
        _ => Err(invalid(name, "expected a finite number")),
    }
}

fn as_u64(name: &str, v: &Value) -> Result<u64> {
    v.as_u64().ok_or_else(|| invalid(name, "expected a non-negative integer"))
}

fn as_u32(name: &str, v: u64) -> Result<u32> {
    u32::try_from(v).map_err(|_| invalid(name, "too large"))
}

fn as_vec3(name: &str, v: &Value) -> Result<Vec3> {
    let items = v.as_array().filter(|a| a.len() == 3).ok_or_else(|| invalid(name, "expected [x, y, z]"))?;
    let c: Vec<f64> = items.iter().map(|x| as_f64(name, x)).collect::<Result<_>>()?;
    Ok(Vec3::new(c[0], c[1], c[2]))
}

fn positive(name: &str, x: f64) -> Result<f64> {
    if x > 0.0 {
        Ok(x)
    } else {
        Err(invalid(name, "must be > 0"))
    }
}

fn component(name: &str, s: Option<&str>) -> Result<Component> {
    match s.unwrap_or("re") {
        "re" => Ok(Component::Re),
        "im" => Ok(Component::Im),
        other => Err(invalid(name, format!("expected \"re\" or \"im\", got {other:?}"))),
    }
}

fn component_name(c: Component) -> &'static str {
    match c {
        Component::Re => "re",
        Component::Im => "im",
    }
}

/// Parse and fully validate a configuration, filling every default.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let value: Value = serde_json::from_str(text).map_err(|e| ConfigError::Syntax(e.to_string()))?;
    parse_value(&value)
}

pub fn parse_value(value: &Value) -> Result<RunConfig> {
    let mut root = Fields::new("", value)?;
    let schema = root.req_u64("schema")?;
    if schema != SCHEMA_VERSION {
        return Err(invalid("schema", format!("unsupported version {schema}, expected {SCHEMA_VERSION}")));
    }
    let seed = root.u64("seed")?.unwrap_or(0);

    let scene = match root.get("sources") {
        Some(sources) => Some(parse_scene(&mut root, sources, seed)?),
        None => {
            for key in ["frequency", "medium", "noise_rms", "lockin"] {
                if root.map.contains_key(key) {
                    return Err(invalid(key, "given without `sources`"));
                }
            }
            None
        }
    };

    let lockin = match (&scene, root.get("lockin")) {
        (Some(scene), Some(v)) => Some(parse_lockin(v, scene.sources[0].frequency)?),
        _ => None,
    };
    let path = parse_path(root.req("path")?, lockin.as_ref())?;
    let render = root.get("render").map(|v| parse_render(v, &path)).transpose()?;
    let animate = root.get("animate").map(parse_animate).transpose()?;
    let dotgraph = root.get("dotgraph").map(parse_dotgraph).transpose()?;
    let analysis = root.get("analysis").map(parse_analysis).transpose()?;
    let sightfield = root.get("sightfield").map(parse_sightfield).transpose()?;
    if scene.is_none() && sightfield.is_none() {
        return Err(ConfigError::MissingField("sources".into()));
    }
    if scene.is_none() {
        for (key, present) in
            [("animate", animate.is_some()), ("dotgraph", dotgraph.is_some()), ("analysis", analysis.is_some())]
        {
            if present {
                return Err(invalid(key, "given without `sources`"));
            }
        }
    }
    root.finish()?;
    Ok(RunConfig { seed, scene, path, lockin, render, animate, dotgraph, analysis, sightfield })
}

fn parse_scene(root: &mut Fields<'_>, sources: &Value, seed: u64) -> Result<Scene> {
    let frequency = positive("frequency", root.req_f64("frequency")?)?;
    let medium = parse_medium(root.req("medium")?)?;
    let noise_rms = root.f64("noise_rms")?.unwrap_or(0.0);
    if noise_rms < 0.0 {
        return Err(invalid("noise_rms", "must be >= 0"));
    }
    let list = sources.as_array().ok_or_else(|| invalid("sources", "expected a list"))?;
    if list.is_empty() {
        return Err(invalid("sources", "at least one source is required"));
    }
    let sources = list
        .iter()
        .enumerate()
        .map(|(i, v)| parse_source(&format!("sources[{i}]"), v, frequency))
        .collect::<Result<Vec<_>>>()?;
    Scene::new(sources, medium, noise_rms, seed).map_err(|e| invalid("sources", e.to_string()))
}

fn parse_source(prefix: &str, v: &Value, frequency: f64) -> Result<Source> {
    let mut f = Fields::new(prefix, v)?;
    let position = f.req_vec3("position")?;
    let amplitude = f.f64("amplitude")?.unwrap_or(1.0);
    if amplitude < 0.0 {
        return Err(invalid(f.name("amplitude"), "must be >= 0"));
    }
    let phase_offset = f.f64("phase_offset")?.unwrap_or(0.0);
    if let Some(own) = f.f64("frequency")? {
        if own != frequency {
            return Err(invalid(
                f.name("frequency"),
                format!("{own} Hz differs from the shared drive frequency {frequency} Hz"),
            ));
        }
    }
    f.finish()?;
    Ok(Source::new(position, amplitude, phase_offset, frequency))
}

fn parse_medium(v: &Value) -> Result<Medium> {
    let mut f = Fields::new("medium", v)?;
    let speed = positive("medium.speed", f.req_f64("speed")?)?;
    let attenuation = match f.str("attenuation")?.unwrap_or("inverse_distance") {
        "inverse_distance" => Attenuation::InverseDistance,
        "none" => Attenuation::None,
        other => {
            return Err(invalid(
                "medium.attenuation",
                format!("expected \"inverse_distance\" or \"none\", got {other:?}"),
            ))
        }
    };
    let r_min = positive("medium.r_min", f.f64("r_min")?.unwrap_or(DEFAULT_R_MIN))?;
    f.finish()?;
    Medium::new(speed, attenuation, r_min).map_err(|e| invalid("medium", e.to_string()))
}

fn parse_lockin(v: &Value, scene_frequency: f64) -> Result<LockInConfig> {
    let mut f = Fields::new("lockin", v)?;
    let reference = positive("lockin.reference_frequency", f.f64("reference_frequency")?.unwrap_or(scene_frequency))?;
    if reference != scene_frequency {
        return Err(invalid(
            "lockin.reference_frequency",
            format!("{reference} Hz differs from the source frequency {scene_frequency} Hz"),
        ));
    }
    let sample_rate = positive("lockin.sample_rate", f.req_f64("sample_rate")?)?;
    if sample_rate < MIN_OVERSAMPLING * reference {
        return Err(invalid(
            "lockin.sample_rate",
            format!(
                "{sample_rate} Hz is below 10x the reference frequency ({} Hz required)",
                MIN_OVERSAMPLING * reference
            ),
        ));
    }
    let time_constant = positive("lockin.time_constant", f.req_f64("time_constant")?)?;
    if time_constant * sample_rate < MIN_TAU_SAMPLES {
        return Err(invalid("lockin.time_constant", "must span at least 10 sample periods"));
    }
    let settle_factor = f.f64("settle_factor")?.unwrap_or(lockin::DEFAULT_SETTLE_FACTOR);
    if settle_factor < MIN_SETTLE_FACTOR {
        return Err(invalid("lockin.settle_factor", "must be >= 5"));
    }
    f.finish()?;
    LockInConfig::new(reference, sample_rate, time_constant)
        .and_then(|c| c.with_settle_factor(settle_factor))
        .map_err(|e| invalid("lockin", e.to_string()))
}

fn parse_path(v: &Value, lockin: Option<&LockInConfig>) -> Result<PathSpec> {
    let mut f = Fields::new("path", v)?;
    let kind = f.str("kind")?.ok_or_else(|| ConfigError::MissingField("path.kind".into()))?;
    let shape = match kind {
        "linear" => {
            let start = f.req_vec3("start")?;
            let end = f.req_vec3("end")?;
            let count = f.req_u64("count")? as usize;
            if count < 2 {
                return Err(invalid("path.count", "must be >= 2"));
            }
            if start == end {
                return Err(invalid("path.end", "must differ from path.start"));
            }
            PathShape::Linear { start, end, count }
        }
        "raster" => {
            let min = f.req_vec3("min")?;
            let max = f.req_vec3("max")?;
            let raw = f.req("counts")?;
            let items = raw
                .as_array()
                .filter(|a| a.len() == 3)
                .ok_or_else(|| invalid("path.counts", "expected [nx, ny, nz]"))?;
            let mut counts = [0usize; 3];
            for (c, item) in counts.iter_mut().zip(items) {
                *c = as_u64("path.counts", item)? as usize;
                if *c == 0 {
                    return Err(invalid("path.counts", "every count must be >= 1"));
                }
            }
            PathShape::Raster { min, max, counts }
        }
        other => return Err(invalid("path.kind", format!("expected \"linear\" or \"raster\", got {other:?}"))),
    };
    let dwell = match f.f64("dwell")? {
        Some(d) => {
            let d = positive("path.dwell", d)?;
            if let Some(c) = lockin {
                if c.samples_in(d) < lockin::settle_samples(c) {
                    return Err(invalid(
                        "path.dwell",
                        format!("{d} s is shorter than lock-in settling ({} s required)", c.min_dwell()),
                    ));
                }
            }
            d
        }
        None => lockin.map_or(DEFAULT_IDEAL_DWELL, |c| c.min_dwell()),
    };
    f.finish()?;
    let spec = PathSpec { shape, dwell };
    spec.build().map_err(|e| invalid("path", e.to_string()))?;
    Ok(spec)
}

fn parse_render(v: &Value, path: &PathSpec) -> Result<RenderConfig> {
    let mut f = Fields::new("render", v)?;
    let width = as_u32("render.width", f.u64("width")?.unwrap_or(DEFAULT_WIDTH as u64))?;
    let height = as_u32("render.height", f.u64("height")?.unwrap_or(DEFAULT_HEIGHT as u64))?;
    if width == 0 || height == 0 {
        return Err(invalid("render", "width and height must be >= 1"));
    }
    let plane = match f.str("plane")?.unwrap_or("xy") {
        "xy" => Plane::Xy,
        "xz" => Plane::Xz,
        "yz" => Plane::Yz,
        other => return Err(invalid("render.plane", format!("expected \"xy\", \"xz\" or \"yz\", got {other:?}"))),
    };
    let extent = match f.get("extent") {
        Some(e) => {
            let items = e
                .as_array()
                .filter(|a| a.len() == 4)
                .ok_or_else(|| invalid("render.extent", "expected [u_min, u_max, v_min, v_max]"))?;
            let c: Vec<f64> = items.iter().map(|x| as_f64("render.extent", x)).collect::<Result<_>>()?;
            Extent::new(c[0], c[1], c[2], c[3])
        }
        None => default_extent(path, plane, width, height)?,
    };
    let exposure = match f.str("exposure")?.unwrap_or("max") {
        "max" => Exposure::Max,
        "additive" => Exposure::Additive,
        other => return Err(invalid("render.exposure", format!("expected \"max\" or \"additive\", got {other:?}"))),
    };
    let normalization = match f.get("normalization") {
        None => Normalization::GlobalMax,
        Some(Value::String(s)) if s == "global_max" => Normalization::GlobalMax,
        Some(obj @ Value::Object(_)) => {
            let mut n = Fields::new("render.normalization", obj)?;
            let v = positive("render.normalization.fixed", n.req_f64("fixed")?)?;
            n.finish()?;
            Normalization::Fixed(v)
        }
        Some(_) => return Err(invalid("render.normalization", "expected \"global_max\" or {\"fixed\": value}")),
    };
    let splat_radius = as_u32("render.splat_radius", f.u64("splat_radius")?.unwrap_or(DEFAULT_SPLAT_RADIUS as u64))?;
    f.finish()?;
    let cfg = RenderConfig { width, height, plane, extent, exposure, normalization, splat_radius };
    cfg.validate().map_err(|e| invalid("render", e.to_string()))?;
    Ok(cfg)
}

/// Path bounds projected on the plane. A flat axis is widened to keep
/// pixels square.
fn default_extent(path: &PathSpec, plane: Plane, width: u32, height: u32) -> Result<Extent> {
    let (lo, hi) = path.bounds();
    let (u0, v0) = plane.project(lo);
    let (u1, v1) = plane.project(hi);
    let (du, dv) = (u1 - u0, v1 - v0);
    let aspect = height as f64 / width as f64;
    let (uc, vc) = ((u0 + u1) / 2.0, (v0 + v1) / 2.0);
    match (du > 0.0, dv > 0.0) {
        (true, true) => Ok(Extent::new(u0, u1, v0, v1)),
        (true, false) => Ok(Extent::new(u0, u1, vc - du * aspect / 2.0, vc + du * aspect / 2.0)),
        (false, true) => Ok(Extent::new(uc - dv / aspect / 2.0, uc + dv / aspect / 2.0, v0, v1)),
        (false, false) => Err(invalid("render.extent", "path is a point on this plane; give an explicit extent")),
    }
}

fn parse_animate(v: &Value) -> Result<AnimateSpec> {
    let mut f = Fields::new("animate", v)?;
    let frames = f.u64("frames")?.unwrap_or(DEFAULT_FRAMES as u64) as usize;
    if frames == 0 {
        return Err(invalid("animate.frames", "must be >= 1"));
    }
    let delta_phase = f.f64("delta_phase")?.unwrap_or(TAU / frames as f64);
    f.finish()?;
    Ok(AnimateSpec { frames, delta_phase })
}

fn parse_dotgraph(v: &Value) -> Result<DotGraphSpec> {
    let mut f = Fields::new("dotgraph", v)?;
    let height = as_u32("dotgraph.height", f.u64("height")?.unwrap_or(DEFAULT_DOTGRAPH_HEIGHT as u64))?;
    if height < 2 {
        return Err(invalid("dotgraph.height", "must be >= 2"));
    }
    let component = component("dotgraph.component", f.str("component")?)?;
    f.finish()?;
    Ok(DotGraphSpec { height, component })
}

fn parse_analysis(v: &Value) -> Result<AnalysisSpec> {
    let mut f = Fields::new("analysis", v)?;
    let component = component("analysis.component", f.str("component")?)?;
    let temperature_c = f.f64("temperature_c")?;
    if temperature_c.is_some_and(|t| t <= swimlab_core::analysis::ABSOLUTE_ZERO_C) {
        return Err(invalid("analysis.temperature_c", "must be above absolute zero"));
    }
    let fringes = match f.get("fringes") {
        Some(g) => {
            let mut g = Fields::new("analysis.fringes", g)?;
            let separation = positive("analysis.fringes.separation", g.req_f64("separation")?)?;
            let distance = positive("analysis.fringes.distance", g.req_f64("distance")?)?;
            g.finish()?;
            Some(FringeGeometry { separation, distance })
        }
        None => None,
    };
    f.finish()?;
    Ok(AnalysisSpec { component, temperature_c, fringes })
}

fn parse_sightfield(v: &Value) -> Result<SightfieldSpec> {
    let mut f = Fields::new("sightfield", v)?;
    let mut c = Fields::new("sightfield.camera", f.req("camera")?)?;
    let camera = CameraModel {
        position: c.vec3("position")?.unwrap_or(Vec3::ZERO),
        forward: c.req_vec3("forward")?,
        up: c.req_vec3("up")?,
        hfov: c.req_f64("hfov")?,
        vfov: c.req_f64("vfov")?,
        near: c.req_f64("near")?,
        far: c.req_f64("far")?,
    };
    c.finish()?;
    camera.validate().map_err(|e| invalid("sightfield.camera", e.to_string()))?;
    let defaults = FeedbackConfig::default();
    let feedback = match f.get("feedback") {
        Some(v) => {
            let mut b = Fields::new("sightfield.feedback", v)?;
            let cfg = FeedbackConfig {
                loop_gain: b.f64("loop_gain")?.unwrap_or(defaults.loop_gain),
                ambient_seed: b.f64("ambient_seed")?.unwrap_or(defaults.ambient_seed),
                decay: b.f64("decay")?.unwrap_or(defaults.decay),
                iterations: b.u64("iterations")?.map_or(defaults.iterations, |n| n as usize),
            };
            b.finish()?;
            cfg
        }
        None => defaults,
    };
    feedback.validate().map_err(|e| invalid("sightfield.feedback", e.to_string()))?;
    f.finish()?;
    Ok(SightfieldSpec { camera, feedback })
}

fn vec3_json(v: Vec3) -> Value {
    json!([v.x, v.y, v.z])
}

/// Fully explicit JSON form of `cfg`; parsing it yields `cfg` again.
pub fn normalized_json(cfg: &RunConfig) -> Value {
    let mut root = Map::new();
    root.insert("schema".into(), json!(SCHEMA_VERSION));
    root.insert("seed".into(), json!(cfg.seed));
    if let Some(scene) = &cfg.scene {
        root.insert("frequency".into(), json!(scene.sources[0].frequency));
        let sources: Vec<Value> = scene
            .sources
            .iter()
            .map(|s| json!({"position": vec3_json(s.position), "amplitude": s.amplitude, "phase_offset": s.phase_offset}))
            .collect();
        root.insert("sources".into(), Value::Array(sources));
        let attenuation = match scene.medium.attenuation {
            Attenuation::InverseDistance => "inverse_distance",
            Attenuation::None => "none",
        };
        root.insert(
            "medium".into(),
            json!({"speed": scene.medium.speed, "attenuation": attenuation, "r_min": scene.medium.r_min}),
        );
        root.insert("noise_rms".into(), json!(scene.noise_rms));
    }
    if let Some(l) = &cfg.lockin {
        root.insert(
            "lockin".into(),
            json!({
                "reference_frequency": l.reference_frequency,
                "sample_rate": l.sample_rate,
                "time_constant": l.time_constant,
                "settle_factor": l.settle_factor,
            }),
        );
    }
    let path = match cfg.path.shape {
        PathShape::Linear { start, end, count } => {
            json!({"kind": "linear", "start": vec3_json(start), "end": vec3_json(end), "count": count, "dwell": cfg.path.dwell})
        }
        PathShape::Raster { min, max, counts } => {
            json!({"kind": "raster", "min": vec3_json(min), "max": vec3_json(max), "counts": counts, "dwell": cfg.path.dwell})
        }
    };
    root.insert("path".into(), path);
    if let Some(r) = &cfg.render {
        let plane = match r.plane {
            Plane::Xy => "xy",
            Plane::Xz => "xz",
            Plane::Yz => "yz",
        };
        let exposure = match r.exposure {
            Exposure::Max => "max",
            Exposure::Additive => "additive",
        };
        let normalization = match r.normalization {
            Normalization::GlobalMax => json!("global_max"),
            Normalization::Fixed(v) => json!({"fixed": v}),
        };
        let e = r.extent;
        root.insert(
            "render".into(),
            json!({
                "width": r.width,
                "height": r.height,
                "plane": plane,
                "extent": [e.u_min, e.u_max, e.v_min, e.v_max],
                "exposure": exposure,
                "normalization": normalization,
                "splat_radius": r.splat_radius,
            }),
        );
    }
    if let Some(a) = &cfg.animate {
        root.insert("animate".into(), json!({"frames": a.frames, "delta_phase": a.delta_phase}));
    }
    if let Some(d) = &cfg.dotgraph {
        root.insert("dotgraph".into(), json!({"height": d.height, "component": component_name(d.component)}));
    }
    if let Some(a) = &cfg.analysis {
        let mut m = Map::new();
        m.insert("component".into(), json!(component_name(a.component)));
        if let Some(t) = a.temperature_c {
            m.insert("temperature_c".into(), json!(t));
        }
        if let Some(g) = a.fringes {
            m.insert("fringes".into(), json!({"separation": g.separation, "distance": g.distance}));
        }
        root.insert("analysis".into(), Value::Object(m));
    }
    if let Some(s) = &cfg.sightfield {
        let c = s.camera;
        let b = s.feedback;
        root.insert(
            "sightfield".into(),
            json!({
                "camera": {
                    "position": vec3_json(c.position),
                    "forward": vec3_json(c.forward),
                    "up": vec3_json(c.up),
                    "hfov": c.hfov,
                    "vfov": c.vfov,
                    "near": c.near,
                    "far": c.far,
                },
                "feedback": {
                    "loop_gain": b.loop_gain,
                    "ambient_seed": b.ambient_seed,
                    "decay": b.decay,
                    "iterations": b.iterations,
                },
            }),
        );
    }
    Value::Object(root)
}

/// Pretty-printed normalized form with a trailing newline.
pub fn dump_config(cfg: &RunConfig) -> String {
    let mut s = serde_json::to_string_pretty(&normalized_json(cfg)).expect("config values serialize");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "schema": 1,
        "frequency": 5000,
        "sources": [{"position": [0, 0, 0]}],
        "medium": {"speed": 343},
        "path": {"kind": "linear", "start": [0.1, 0, 0], "end": [1.1, 0, 0], "count": 101}
    }"#;

    fn with(patch: &str) -> String {
        let mut base: Value = serde_json::from_str(MINIMAL).unwrap();
        let patch: Value = serde_json::from_str(patch).unwrap();
        for (k, v) in patch.as_object().unwrap() {
            base[k] = v.clone();
        }
        base.to_string()
    }

    #[test]
    fn minimal_config_gets_defaults() {
        let cfg = parse_config(MINIMAL).unwrap();
        assert_eq!(cfg.seed, 0);
        let scene = cfg.scene.as_ref().unwrap();
        assert_eq!(scene.sources[0], Source::new(Vec3::ZERO, 1.0, 0.0, 5000.0));
        assert_eq!(scene.medium, Medium::new(343.0, Attenuation::InverseDistance, 1e-3).unwrap());
        assert_eq!(scene.noise_rms, 0.0);
        assert_eq!(cfg.path.dwell, DEFAULT_IDEAL_DWELL);
        assert!(cfg.lockin.is_none() && cfg.render.is_none() && cfg.analysis.is_none());
    }

    #[test]
    fn missing_medium_speed_is_named() {
        let err = parse_config(&with(r#"{"medium": {"attenuation": "none"}}"#)).unwrap_err();
        assert_eq!(err, ConfigError::MissingField("medium.speed".into()));
    }

    #[test]
    fn undersampled_lockin_cites_ten_x_rule() {
        let err = parse_config(&with(r#"{"lockin": {"sample_rate": 40000, "time_constant": 0.002}}"#)).unwrap_err();
        match err {
            ConfigError::InvalidValue(field, reason) => {
                assert_eq!(field, "lockin.sample_rate");
                assert!(reason.contains("10x"), "{reason}");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_keys_are_rejected_with_their_path() {
        let err = parse_config(&with(r#"{"medium": {"speed": 343, "sped": 1}}"#)).unwrap_err();
        assert_eq!(err, ConfigError::UnknownField("medium.sped".into()));
        let err = parse_config(&with(r#"{"colour": 1}"#)).unwrap_err();
        assert_eq!(err, ConfigError::UnknownField("colour".into()));
        let err = parse_config(&with(r#"{"sources": [{"position": [0, 0, 0], "gain": 2}]}"#)).unwrap_err();
        assert_eq!(err, ConfigError::UnknownField("sources[0].gain".into()));
    }

    #[test]
    fn invalid_values_name_the_field() {
        let cases = [
            (r#"{"schema": 2}"#, "schema"),
            (r#"{"frequency": -1}"#, "frequency"),
            (r#"{"sources": [{"position": [0, 0]}]}"#, "sources[0].position"),
            (r#"{"sources": [{"position": [0, 0, 0], "frequency": 6000}]}"#, "sources[0].frequency"),
            (r#"{"medium": {"speed": 343, "attenuation": "cubic"}}"#, "medium.attenuation"),
            (
                r#"{"lockin": {"sample_rate": 100000, "time_constant": 0.002, "settle_factor": 3}}"#,
                "lockin.settle_factor",
            ),
            (
                r#"{"lockin": {"sample_rate": 100000, "time_constant": 0.002, "reference_frequency": 5001}}"#,
                "lockin.reference_frequency",
            ),
            (r#"{"render": {"plane": "xw"}}"#, "render.plane"),
            (r#"{"render": {"extent": [1, 0, 0, 1]}}"#, "render"),
            (r#"{"animate": {"frames": 0}}"#, "animate.frames"),
            (r#"{"analysis": {"component": "abs"}}"#, "analysis.component"),
        ];
        for (patch, field) in cases {
            let err = parse_config(&with(patch)).unwrap_err();
            assert_eq!(err.field(), Some(field), "{patch}: {err}");
        }
    }

    #[test]
    fn lockin_dwell_defaults_to_settling_and_short_dwell_is_rejected() {
        let cfg = parse_config(&with(r#"{"lockin": {"sample_rate": 100000, "time_constant": 0.002}}"#)).unwrap();
        let l = cfg.lockin.unwrap();
        assert_eq!(cfg.path.dwell, l.min_dwell());
        let err = parse_config(&with(
            r#"{"lockin": {"sample_rate": 100000, "time_constant": 0.002},
                "path": {"kind": "linear", "start": [0, 0, 0], "end": [1, 0, 0], "count": 5, "dwell": 0.005}}"#,
        ))
        .unwrap_err();
        assert_eq!(err.field(), Some("path.dwell"));
    }

    #[test]
    fn default_extent_keeps_pixels_square_for_a_line() {
        let cfg = parse_config(&with(r#"{"render": {"width": 200, "height": 50}}"#)).unwrap();
        let e = cfg.render.unwrap().extent;
        assert_eq!((e.u_min, e.u_max), (0.1, 1.1));
        assert!(((e.v_max - e.v_min) - 0.25).abs() < 1e-12);
    }

    #[test]
    fn sightfield_only_config_needs_no_scene() {
        let text = r#"{
            "schema": 1,
            "path": {"kind": "raster", "min": [-1, -1, 2], "max": [1, 1, 2], "counts": [5, 5, 1]},
            "sightfield": {"camera": {"forward": [0, 0, 1], "up": [0, 1, 0], "hfov": 40, "vfov": 30, "near": 0.1, "far": 10}}
        }"#;
        let cfg = parse_config(text).unwrap();
        assert!(cfg.scene.is_none());
        assert_eq!(cfg.sightfield.unwrap().feedback, FeedbackConfig::default());
        let bare = r#"{"schema": 1, "path": {"kind": "linear", "start": [0, 0, 0], "end": [1, 0, 0], "count": 3}}"#;
        assert_eq!(parse_config(bare).unwrap_err(), ConfigError::MissingField("sources".into()));
    }

    #[test]
    fn syntax_errors_are_reported() {
        assert!(matches!(parse_config("{"), Err(ConfigError::Syntax(_))));
    }

    #[test]
    fn dump_round_trips() {
        let full = with(
            r#"{"seed": 7, "lockin": {"sample_rate": 100000, "time_constant": 0.002},
                "render": {"normalization": {"fixed": 0.5}, "exposure": "additive"},
                "animate": {"frames": 7}, "dotgraph": {"component": "im"},
                "analysis": {"temperature_c": 27, "fringes": {"separation": 0.5, "distance": 5}}}"#,
        );
        let first = parse_config(&full).unwrap();
        let again = parse_config(&dump_config(&first)).unwrap();
        assert_eq!(first, again);
        assert_eq!(dump_config(&first), dump_config(&again));
    }
}
