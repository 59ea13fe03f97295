//! Field point clouds and the `swimcloud v1` text format.
//!
//! ```text
//! swimcloud v1
//! frequency=<Hz> speed=<m/s> acquisition=<Ideal|LockIn> seed=<u64> n=<count>
//! x y z re im        (n lines, 9 significant digits, LF endings)
//! ```

use std::cmp::Ordering;
use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;

use thiserror::Error;

use crate::geom::Vec3;
use crate::wavecore::Phasor;

pub const CLOUD_MAGIC: &str = "swimcloud v1";

/// Collinearity tolerance, meters (scaled by the span when it exceeds 1 m).
pub const LINE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CloudError {
    #[error("field cloud has no samples")]
    Empty,
    #[error("sample {0} is not finite")]
    NonFinite(usize),
    #[error("sample {0} duplicates an earlier position")]
    DuplicatePosition(usize),
    #[error("invalid cloud metadata: {0}")]
    InvalidMetadata(&'static str),
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Acquisition {
    Ideal,
    LockIn,
}

impl fmt::Display for Acquisition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Acquisition::Ideal => "Ideal",
            Acquisition::LockIn => "LockIn",
        })
    }
}

impl FromStr for Acquisition {
    type Err = ();
    fn from_str(s: &str) -> Result<Self, ()> {
        match s {
            "Ideal" => Ok(Acquisition::Ideal),
            "LockIn" => Ok(Acquisition::LockIn),
            _ => Err(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CloudSample {
    pub position: Vec3,
    pub value: Phasor,
}

/// Straight line through a cloud: `position = origin + s * direction`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineAxis {
    pub origin: Vec3,
    pub direction: Vec3,
}

impl LineAxis {
    /// Signed distance of `p` along the axis.
    pub fn coordinate(&self, p: Vec3) -> f64 {
        (p - self.origin).dot(self.direction)
    }
}

/// Sampled wave field: positions with their phasors plus acquisition metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldCloud {
    samples: Vec<CloudSample>,
    frequency: f64,
    medium_speed: f64,
    acquisition: Acquisition,
    seed: u64,
}

impl FieldCloud {
    /// Checks non-emptiness, finiteness and position uniqueness.
    pub fn new(
        samples: Vec<CloudSample>,
        frequency: f64,
        medium_speed: f64,
        acquisition: Acquisition,
        seed: u64,
    ) -> Result<Self, CloudError> {
        if samples.is_empty() {
            return Err(CloudError::Empty);
        }
        if !(frequency.is_finite() && frequency >= 0.0) {
            return Err(CloudError::InvalidMetadata("frequency must be finite and >= 0"));
        }
        if !(medium_speed.is_finite() && medium_speed >= 0.0) {
            return Err(CloudError::InvalidMetadata("speed must be finite and >= 0"));
        }
        if let Some(i) = samples.iter().position(|s| !(s.position.is_finite() && s.value.is_finite())) {
            return Err(CloudError::NonFinite(i));
        }
        if let Some(i) = first_duplicate(&samples) {
            return Err(CloudError::DuplicatePosition(i));
        }
        Ok(FieldCloud { samples, frequency, medium_speed, acquisition, seed })
    }

    pub fn samples(&self) -> &[CloudSample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn frequency(&self) -> f64 {
        self.frequency
    }

    pub fn medium_speed(&self) -> f64 {
        self.medium_speed
    }

    pub fn acquisition(&self) -> Acquisition {
        self.acquisition
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn max_magnitude(&self) -> f64 {
        self.samples.iter().map(|s| s.value.magnitude()).fold(0.0, f64::max)
    }

    /// Same positions and metadata, every phasor passed through `f`.
    pub fn map_values(&self, mut f: impl FnMut(Phasor) -> Phasor) -> FieldCloud {
        let samples = self.samples.iter().map(|s| CloudSample { position: s.position, value: f(s.value) }).collect();
        FieldCloud { samples, ..*self }
    }

    /// Every phasor multiplied by `exp(i * angle)`.
    pub fn rotated(&self, angle: f64) -> FieldCloud {
        let unit = Phasor::cis(angle);
        self.map_values(|v| v * unit)
    }

    /// The line the samples lie on, if they are collinear and span a
    /// non-zero length. The origin is the first sample.
    pub fn line_axis(&self) -> Option<LineAxis> {
        let origin = self.samples.first()?.position;
        let far =
            self.samples.iter().map(|s| s.position).max_by(|a, b| a.distance(origin).total_cmp(&b.distance(origin)))?;
        let span = far.distance(origin);
        if span == 0.0 {
            return None;
        }
        let direction = (far - origin) * (1.0 / span);
        let tol = LINE_TOLERANCE * span.max(1.0);
        let collinear = self.samples.iter().all(|s| {
            let d = s.position - origin;
            (d - direction * d.dot(direction)).norm() <= tol
        });
        collinear.then_some(LineAxis { origin, direction })
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "{CLOUD_MAGIC}")?;
        writeln!(
            w,
            "frequency={} speed={} acquisition={} seed={} n={}",
            self.frequency,
            self.medium_speed,
            self.acquisition,
            self.seed,
            self.samples.len()
        )?;
        for s in &self.samples {
            let p = s.position;
            writeln!(w, "{} {} {} {} {}", Sig9(p.x), Sig9(p.y), Sig9(p.z), Sig9(s.value.re), Sig9(s.value.im))?;
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut buf = Vec::with_capacity(64 * (self.samples.len() + 2));
        self.write_to(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("cloud text is ASCII")
    }

    pub fn parse(text: &str) -> Result<Self, CloudError> {
        let fmt_err = |line: usize, message: String| CloudError::Format { line, message };
        let mut lines = text.split('\n').enumerate().map(|(i, l)| (i + 1, l));

        match lines.next() {
            Some((_, CLOUD_MAGIC)) => {}
            _ => return Err(fmt_err(1, format!("expected header `{CLOUD_MAGIC}`"))),
        }
        let (ln, meta) = lines.next().ok_or_else(|| fmt_err(2, "missing metadata line".into()))?;
        let mut frequency = None;
        let mut speed = None;
        let mut acquisition = None;
        let mut seed = None;
        let mut count = None;
        for field in meta.split(' ') {
            let (key, value) =
                field.split_once('=').ok_or_else(|| fmt_err(ln, format!("expected key=value, got `{field}`")))?;
            let bad = || fmt_err(ln, format!("bad value for `{key}`: `{value}`"));
            match key {
                "frequency" => frequency = Some(value.parse::<f64>().map_err(|_| bad())?),
                "speed" => speed = Some(value.parse::<f64>().map_err(|_| bad())?),
                "acquisition" => acquisition = Some(value.parse::<Acquisition>().map_err(|_| bad())?),
                "seed" => seed = Some(value.parse::<u64>().map_err(|_| bad())?),
                "n" => count = Some(value.parse::<usize>().map_err(|_| bad())?),
                _ => return Err(fmt_err(ln, format!("unknown key `{key}`"))),
            }
        }
        let missing = |k: &str| fmt_err(ln, format!("missing `{k}`"));
        let frequency = frequency.ok_or_else(|| missing("frequency"))?;
        let speed = speed.ok_or_else(|| missing("speed"))?;
        let acquisition = acquisition.ok_or_else(|| missing("acquisition"))?;
        let seed = seed.ok_or_else(|| missing("seed"))?;
        let count = count.ok_or_else(|| missing("n"))?;

        let mut samples = Vec::with_capacity(count);
        for _ in 0..count {
            let (ln, line) = lines.next().ok_or_else(|| fmt_err(ln + samples.len() + 1, "truncated cloud".into()))?;
            let mut vals = [0.0f64; 5];
            let mut parts = line.split(' ');
            for v in vals.iter_mut() {
                let tok = parts.next().ok_or_else(|| fmt_err(ln, "expected 5 columns".into()))?;
                *v = tok.parse().map_err(|_| fmt_err(ln, format!("bad number `{tok}`")))?;
            }
            if parts.next().is_some() {
                return Err(fmt_err(ln, "expected 5 columns".into()));
            }
            samples.push(CloudSample {
                position: Vec3::new(vals[0], vals[1], vals[2]),
                value: Phasor::new(vals[3], vals[4]),
            });
        }
        match lines.next() {
            None | Some((_, "")) => {}
            Some((ln, _)) => return Err(fmt_err(ln, "unexpected trailing data".into())),
        }
        if let Some((ln, _)) = lines.next() {
            return Err(fmt_err(ln, "unexpected trailing data".into()));
        }
        FieldCloud::new(samples, frequency, speed, acquisition, seed)
    }
}

fn first_duplicate(samples: &[CloudSample]) -> Option<usize> {
    let key = |i: usize| samples[i].position.to_array();
    let mut order: Vec<usize> = (0..samples.len()).collect();
    let cmp = |a: &usize, b: &usize| -> Ordering {
        let (ka, kb) = (key(*a), key(*b));
        ka[0].total_cmp(&kb[0]).then(ka[1].total_cmp(&kb[1])).then(ka[2].total_cmp(&kb[2])).then(a.cmp(b))
    };
    order.sort_by(cmp);
    order.windows(2).filter(|w| key(w[0]) == key(w[1])).map(|w| w[1]).min()
}

/// Scientific notation with 9 significant digits; negative zero prints as zero.
struct Sig9(f64);

impl fmt::Display for Sig9 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v = if self.0 == 0.0 { 0.0 } else { self.0 };
        write!(f, "{v:.8e}")
    }
}
