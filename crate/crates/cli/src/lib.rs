//! Batch front end for swimlab: config parsing, pipelines and bundled recipes.

pub mod config;
pub mod recipes;
pub mod run;

use std::path::Path;

use serde_json::Value;

pub use config::{dump_config, parse_config, ConfigError, RunConfig};
pub use run::{run, ErrorKind, Report, RunError, Stage};

/// Command-line values that replace config entries before parsing, so the
/// normalized dump records what actually ran.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub frames: Option<usize>,
}

pub fn apply_overrides(value: &mut Value, overrides: &Overrides) {
    let Some(root) = value.as_object_mut() else { return };
    if let Some(seed) = overrides.seed {
        root.insert("seed".into(), seed.into());
    }
    if let Some(frames) = overrides.frames {
        let animate = root.entry("animate").or_insert_with(|| Value::Object(Default::default()));
        if let Some(a) = animate.as_object_mut() {
            a.insert("frames".into(), frames.into());
        }
    }
}

/// Read, override and parse a config file.
pub fn load_config(path: &Path, overrides: &Overrides) -> Result<RunConfig, RunError> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        RunError::from(ConfigError::InvalidValue("--config".into(), format!("{}: {e}", path.display())))
    })?;
    let mut value: Value =
        serde_json::from_str(&text).map_err(|e| RunError::from(ConfigError::Syntax(e.to_string())))?;
    apply_overrides(&mut value, overrides);
    Ok(config::parse_value(&value)?)
}
