//! Bundled reproduction configs, run with `swimlab recipe <name>`.

use std::path::Path;

use serde_json::Value;

use crate::config::ConfigError;
use crate::run::{run, Report, RunError, Stage};
use crate::{apply_overrides, Overrides};

pub struct Recipe {
    pub name: &'static str,
    pub summary: &'static str,
    /// `(label, config)`; multi-part recipes write each part to `out/<label>`.
    pub parts: &'static [(&'static str, &'static str)],
}

pub const RECIPES: &[Recipe] = &[
    Recipe {
        name: "fig5-radar",
        summary: "10.525 GHz radar wave along a 0.2 m line",
        parts: &[("radar", include_str!("../recipes/fig5-radar.json"))],
    },
    Recipe {
        name: "fig7-swim",
        summary: "speed of sound from a lock-in SWIM scan at 5 kHz",
        parts: &[("swim", include_str!("../recipes/fig7-swim.json"))],
    },
    Recipe {
        name: "fig8-darkroom",
        summary: "two 40 kHz transducers imaged on a plane, with animation",
        parts: &[("darkroom", include_str!("../recipes/fig8-darkroom.json"))],
    },
    Recipe {
        name: "fig11-fringes",
        summary: "fringe spacing for two speaker separations at 5 m",
        parts: &[
            ("d0.5", include_str!("../recipes/fig11-fringes-d0.5.json")),
            ("d1.0", include_str!("../recipes/fig11-fringes-d1.0.json")),
        ],
    },
    Recipe {
        name: "fig4-sightfield",
        summary: "camera sightfield painted by a feedback bulb",
        parts: &[("sightfield", include_str!("../recipes/fig4-sightfield.json"))],
    },
];

pub fn find(name: &str) -> Option<&'static Recipe> {
    RECIPES.iter().find(|r| r.name == name)
}

fn names() -> String {
    RECIPES.iter().map(|r| r.name).collect::<Vec<_>>().join(", ")
}

/// Run every part of a recipe. `--frames` only touches parts that animate.
pub fn run_recipe(name: &str, out: &Path, overrides: &Overrides) -> Result<Report, RunError> {
    let recipe = find(name).ok_or_else(|| {
        RunError::from(ConfigError::InvalidValue(
            "recipe".into(),
            format!("unknown recipe {name:?}; known: {}", names()),
        ))
    })?;
    let single = recipe.parts.len() == 1;
    let mut combined = Report::default();
    for (label, text) in recipe.parts {
        let mut value: Value = serde_json::from_str(text).expect("bundled recipes are valid JSON");
        let part_overrides =
            Overrides { seed: overrides.seed, frames: overrides.frames.filter(|_| value.get("animate").is_some()) };
        apply_overrides(&mut value, &part_overrides);
        let cfg = crate::config::parse_value(&value)?;
        let dir = if single { out.to_path_buf() } else { out.join(label) };
        let report = run(&cfg, Stage::All, &dir)?;
        if single {
            return Ok(report);
        }
        combined.extend_prefixed(label, &report);
    }
    if recipe.name == "fig11-fringes" {
        let spacing =
            |label: &str| combined.get(&format!("{label}.fringe_spacing")).and_then(|v| v.parse::<f64>().ok());
        if let (Some(a), Some(b)) = (spacing("d0.5"), spacing("d1.0")) {
            combined.push("fringe_ratio", a / b);
        }
    }
    let path = out.join(crate::run::REPORT);
    std::fs::write(&path, combined.to_text())
        .map_err(|e| RunError::new(crate::run::ErrorKind::Output, format!("{}: {e}", path.display())))?;
    Ok(combined)
}
