//! Scenario-driven simulation: a [`Scenario`] describes one child's
//! behaviour over contiguous time segments; the generator turns it into a
//! deterministic event stream and the pipeline wires that stream through
//! checker, prediction, modulation and alerting.

mod generate;
mod pipeline;

pub use generate::{generate_stream, generate_stream_with, GenOptions, LoopMode};
pub use pipeline::{
    recorded_transcript, replay, run_pipeline, train_default_face_model, train_default_voice_model,
    PipelineError, PipelineOutput, SegmentScore, Transcript, CONFIG_COPY, DATA_DIR, SCENARIO_COPY,
    TRANSCRIPT_FILE,
};

use crate::event::{ChildId, EmotionLabel, PatternKind, ToneId};
use std::path::Path;

/// One child's scripted behaviour: seeded randomness plus ordered,
/// contiguous segments.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Scenario {
    pub seed: u64,
    pub child: ChildId,
    pub segments: Vec<ScenarioSegment>,
}

/// A span of simulated time with one dominant emotion and tone preference.
/// Rates are in events per second of simulated time; zero disables a stream.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ScenarioSegment {
    pub duration_ms: u64,
    pub true_emotion: EmotionLabel,
    pub tone_preference: ToneId,
    #[serde(default)]
    pub face_rate_hz: f64,
    #[serde(default)]
    pub voice_rate_hz: f64,
    #[serde(default)]
    pub gait_rate_hz: f64,
    /// Rate of child response feedback to the toy's utterances.
    #[serde(default)]
    pub feedback_rate_hz: f64,
    #[serde(default)]
    pub pattern_injections: Vec<PatternInjection>,
    #[serde(default)]
    pub scope_changes: Vec<ScopeScript>,
    #[serde(default)]
    pub module_done_script: Vec<ModuleDoneScript>,
}

/// Physical pattern events injected at fixed offsets within the segment.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct PatternInjection {
    pub kind: PatternKind,
    /// Offsets from the segment start, ms.
    pub at_ms: Vec<u64>,
}

/// A scripted `ScopeChange` at a fixed offset within the segment.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ScopeScript {
    pub at_ms: u64,
    pub scope: String,
    #[serde(default)]
    pub qualifier: Option<String>,
    pub active: bool,
}

/// A scripted `ModuleDone` at a fixed offset within the segment.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ModuleDoneScript {
    pub at_ms: u64,
    pub module: String,
    #[serde(default)]
    pub args: Vec<String>,
    pub action: String,
}

#[derive(Debug, thiserror::Error)]
pub enum ScenarioError {
    #[error("scenario has no segments")]
    Empty,
    #[error("segment {0}: duration must be positive")]
    ZeroDuration(usize),
    #[error("segment {segment}: {field} must be a finite non-negative rate")]
    BadRate { segment: usize, field: &'static str },
    #[error(
        "segment {segment}: scripted time {at_ms} is outside the segment (duration {duration_ms})"
    )]
    ScriptOutOfSegment {
        segment: usize,
        at_ms: u64,
        duration_ms: u64,
    },
    #[error("cannot read scenario {path}: {message}")]
    Unreadable { path: String, message: String },
}

impl Scenario {
    /// Total duration across all segments, ms.
    pub fn duration_ms(&self) -> u64 {
        self.segments.iter().map(|s| s.duration_ms).sum()
    }

    /// Start offset of each segment, ms.
    pub fn segment_starts(&self) -> Vec<u64> {
        let mut starts = Vec::with_capacity(self.segments.len());
        let mut at = 0;
        for s in &self.segments {
            starts.push(at);
            at += s.duration_ms;
        }
        starts
    }

    /// Index of the segment containing offset `ms` (the last segment for
    /// the end boundary).
    pub fn segment_at(&self, ms: u64) -> usize {
        let mut at = 0;
        for (i, s) in self.segments.iter().enumerate() {
            at += s.duration_ms;
            if ms < at {
                return i;
            }
        }
        self.segments.len().saturating_sub(1)
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        if self.segments.is_empty() {
            return Err(ScenarioError::Empty);
        }
        for (i, seg) in self.segments.iter().enumerate() {
            if seg.duration_ms == 0 {
                return Err(ScenarioError::ZeroDuration(i));
            }
            for (field, rate) in [
                ("face_rate_hz", seg.face_rate_hz),
                ("voice_rate_hz", seg.voice_rate_hz),
                ("gait_rate_hz", seg.gait_rate_hz),
                ("feedback_rate_hz", seg.feedback_rate_hz),
            ] {
                if !rate.is_finite() || rate < 0.0 {
                    return Err(ScenarioError::BadRate { segment: i, field });
                }
            }
            let scripted_times = seg
                .pattern_injections
                .iter()
                .flat_map(|p| p.at_ms.iter().copied())
                .chain(seg.scope_changes.iter().map(|s| s.at_ms))
                .chain(seg.module_done_script.iter().map(|m| m.at_ms));
            for at_ms in scripted_times {
                if at_ms >= seg.duration_ms {
                    return Err(ScenarioError::ScriptOutOfSegment {
                        segment: i,
                        at_ms,
                        duration_ms: seg.duration_ms,
                    });
                }
            }
        }
        Ok(())
    }

    /// Reads a scenario from a JSON file.
    pub fn load(path: &Path) -> Result<Scenario, ScenarioError> {
        let text = std::fs::read_to_string(path).map_err(|e| ScenarioError::Unreadable {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        let scenario: Scenario =
            serde_json::from_str(&text).map_err(|e| ScenarioError::Unreadable {
                path: path.display().to_string(),
                message: e.to_string(),
            })?;
        scenario.validate()?;
        Ok(scenario)
    }

    /// Writes the scenario as pretty JSON.
    pub fn save(&self, path: &Path) -> Result<(), std::io::Error> {
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent)?;
        }
        let text = serde_json::to_string_pretty(self).expect("scenario serializes");
        std::fs::write(path, text + "\n")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn minimal() -> Scenario {
        Scenario {
            seed: 1,
            child: ChildId::new("c1"),
            segments: vec![ScenarioSegment {
                duration_ms: 10_000,
                true_emotion: EmotionLabel::Happy,
                tone_preference: ToneId::Male,
                face_rate_hz: 1.0,
                voice_rate_hz: 0.0,
                gait_rate_hz: 0.0,
                feedback_rate_hz: 0.0,
                pattern_injections: vec![],
                scope_changes: vec![],
                module_done_script: vec![],
            }],
        }
    }

    #[test]
    fn minimal_scenario_validates() {
        assert!(minimal().validate().is_ok());
        assert_eq!(minimal().duration_ms(), 10_000);
    }

    #[test]
    fn script_outside_its_segment_is_rejected() {
        let mut s = minimal();
        s.segments[0].pattern_injections.push(PatternInjection {
            kind: PatternKind::HeadHit,
            at_ms: vec![10_000],
        });
        assert!(matches!(
            s.validate(),
            Err(ScenarioError::ScriptOutOfSegment { .. })
        ));
    }

    #[test]
    fn negative_rate_is_rejected() {
        let mut s = minimal();
        s.segments[0].voice_rate_hz = -1.0;
        assert!(matches!(s.validate(), Err(ScenarioError::BadRate { .. })));
    }

    #[test]
    fn segment_lookup_handles_boundaries() {
        let mut s = minimal();
        s.segments.push(ScenarioSegment {
            duration_ms: 5_000,
            ..s.segments[0].clone()
        });
        assert_eq!(s.segment_at(0), 0);
        assert_eq!(s.segment_at(9_999), 0);
        assert_eq!(s.segment_at(10_000), 1);
        assert_eq!(s.segment_at(15_000), 1); // end boundary clamps
        assert_eq!(s.segment_starts(), vec![0, 10_000]);
    }

    #[test]
    fn scenario_files_round_trip() {
        let tmp = tempfile::tempdir().unwrap();
        let path = tmp.path().join("s.scn");
        let s = minimal();
        s.save(&path).unwrap();
        assert_eq!(Scenario::load(&path).unwrap(), s);
    }
}
