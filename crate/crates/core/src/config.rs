//! Run configuration: one JSON file tying together checker windows,
//! controller thresholds, dispatcher cooldown and transports, the alert
//! schedule, and optional pre-trained model paths. Every field has a
//! default, so `{}` is a valid configuration.

use crate::alert::{Transport, TransportKind};
use crate::checker::CheckerConfig;
use crate::event::ToneId;
use crate::modulation::SwitchMode;
use crate::store::Schedule;
use std::path::{Path, PathBuf};

/// Seed for the default face classifier weights.
pub const DEFAULT_FACE_MODEL_SEED: u64 = 11;
/// Seed for the default voice classifier weights.
pub const DEFAULT_VOICE_MODEL_SEED: u64 = 12;
/// Seed driving the default training shuffle.
pub const DEFAULT_TRAIN_SEED: u64 = 7;
/// Hidden width of the default classifiers.
pub const DEFAULT_HIDDEN: usize = 16;

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct ControllerSettings {
    /// Consecutive sub-floor feedbacks before a tone switch (k).
    pub switch_threshold: u32,
    /// Affect threshold θ in `[-1, 1]`.
    pub affect_floor: f64,
    pub mode: SwitchMode,
    pub tone_order: Vec<ToneId>,
}

impl Default for ControllerSettings {
    fn default() -> Self {
        ControllerSettings {
            switch_threshold: 3,
            affect_floor: -0.2,
            mode: SwitchMode::Autonomous,
            tone_order: vec![ToneId::Male, ToneId::Female],
        }
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct DispatcherSettings {
    /// Minimum ms between delivered alerts of one (child, kind).
    pub cooldown_ms: u64,
    pub transports: Vec<Transport>,
}

impl Default for DispatcherSettings {
    fn default() -> Self {
        DispatcherSettings {
            cooldown_ms: 60_000,
            transports: vec![
                Transport {
                    kind: TransportKind::File,
                    endpoint: "alerts.out".into(),
                },
                Transport {
                    kind: TransportKind::Console,
                    endpoint: String::new(),
                },
            ],
        }
    }
}

/// Optional paths to pre-trained model files; when absent the pipeline
/// trains the default classifiers from the synthetic datasets.
#[derive(Debug, Clone, PartialEq, Default, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct ModelPaths {
    pub face: Option<PathBuf>,
    pub voice: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Default, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub checker: CheckerConfig,
    pub controller: ControllerSettings,
    pub dispatcher: DispatcherSettings,
    pub schedule: Schedule,
    pub models: ModelPaths,
    /// Optional policy file; the built-in set when absent.
    pub policies: Option<PathBuf>,
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {message}")]
    Unreadable { path: String, message: String },
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<RunConfig, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Unreadable {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        serde_json::from_str(&text).map_err(|e| ConfigError::Unreadable {
            path: path.display().to_string(),
            message: e.to_string(),
        })
    }

    pub fn save(&self, path: &Path) -> Result<(), std::io::Error> {
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent)?;
        }
        let text = serde_json::to_string_pretty(self).expect("config serializes");
        std::fs::write(path, text + "\n")
    }
}
