use std::path::{Path, PathBuf};

use envest_core::io::SceneConfig;
use envest_core::{Error, Result};
use serde::{Deserialize, Serialize};

/// Written next to the outputs of every `estimate` and `render` run. Passing it back as
/// `--config` repeats the run with the same inputs and settings.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    /// Fully resolved config, absolute paths included.
    pub config: SceneConfig,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub env_map: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub render_spp: Option<usize>,
    pub threads: usize,
    pub timings: Timings,
    pub outputs: Vec<PathBuf>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Timings {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub estimate_seconds: Option<f64>,
    pub render_seconds: f64,
    pub total_seconds: f64,
}

impl RunManifest {
    pub fn new(command: &str, mut config: SceneConfig) -> Self {
        if let Ok(cwd) = std::env::current_dir() {
            config.resolve_paths(&cwd);
        }
        Self {
            command: command.into(),
            version: env!("CARGO_PKG_VERSION").into(),
            seed: config.trace.rng_seed,
            config,
            env_map: None,
            render_spp: None,
            threads: rayon::current_num_threads(),
            timings: Timings::default(),
            outputs: Vec::new(),
        }
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(path, text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }
}

/// Reads a scene config or an earlier run's manifest, with paths resolved.
pub fn load_config(path: &Path) -> Result<(SceneConfig, Option<RunManifest>)> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    let value: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    if value.get("command").is_none() {
        return SceneConfig::load(path).map(|c| (c, None));
    }
    let mut manifest: RunManifest = serde_json::from_value(value)
        .map_err(|e| Error::Config(format!("{}: not a run manifest: {e}", path.display())))?;
    let base = path.parent().unwrap_or(Path::new(""));
    manifest.config.resolve_paths(base);
    if let Some(env) = &mut manifest.env_map {
        if env.is_relative() {
            *env = base.join(&*env);
        }
    }
    Ok((manifest.config.clone(), Some(manifest)))
}
