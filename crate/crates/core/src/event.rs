//! Time-stamped event vocabulary shared by every stage of the pipeline.
//!
//! Monitoring devices produce [`BehaviorEvent`]s; the checker, prediction
//! pipeline, modulation controller and alert dispatcher all consume them.
//! Events are plain values with no interior mutation, so they can be shared
//! or sent between threads freely.
//!
//! The on-disk event log stores one event per line as a flat JSON record
//! with `ts`, `child` and `type` fields followed by the payload fields in
//! declaration order (see [`encode_event`] / [`decode_event`]).

use serde::{Deserialize, Serialize};
use std::fmt;

/// Number of face landmarks per frame (standard 68-point layout).
pub const LANDMARK_COUNT: usize = 68;

/// Number of spectral band energies per voice frame.
pub const VOICE_BAND_COUNT: usize = 26;

/// Milliseconds of simulated time. No wall-clock reads anywhere in the core.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct Timestamp(pub u64);

impl Timestamp {
    pub fn millis(self) -> u64 {
        self.0
    }

    /// Milliseconds elapsed since the start of the current simulated day.
    pub fn ms_of_day(self) -> u64 {
        self.0 % 86_400_000
    }

    /// Timestamp of the start of the current simulated day.
    pub fn day_start(self) -> Timestamp {
        Timestamp(self.0 - self.ms_of_day())
    }

    pub fn saturating_sub(self, millis: u64) -> Timestamp {
        Timestamp(self.0.saturating_sub(millis))
    }
}

impl fmt::Display for Timestamp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<u64> for Timestamp {
    fn from(millis: u64) -> Self {
        Timestamp(millis)
    }
}

/// Opaque identifier for one monitored child. Non-empty, stable across a run.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ChildId(pub String);

impl ChildId {
    pub fn new(id: impl Into<String>) -> Self {
        ChildId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for ChildId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Closed set of emotion classes emitted by the classifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EmotionLabel {
    Happy,
    Sad,
    Angry,
    Fear,
    Surprise,
    Neutral,
}

impl EmotionLabel {
    pub const COUNT: usize = 6;

    /// All labels in declaration order (ties in argmax resolve to the first).
    pub const ALL: [EmotionLabel; Self::COUNT] = [
        EmotionLabel::Happy,
        EmotionLabel::Sad,
        EmotionLabel::Angry,
        EmotionLabel::Fear,
        EmotionLabel::Surprise,
        EmotionLabel::Neutral,
    ];

    pub fn index(self) -> usize {
        Self::ALL.iter().position(|&l| l == self).unwrap()
    }

    pub fn from_index(i: usize) -> Option<EmotionLabel> {
        Self::ALL.get(i).copied()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            EmotionLabel::Happy => "happy",
            EmotionLabel::Sad => "sad",
            EmotionLabel::Angry => "angry",
            EmotionLabel::Fear => "fear",
            EmotionLabel::Surprise => "surprise",
            EmotionLabel::Neutral => "neutral",
        }
    }
}

impl fmt::Display for EmotionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for EmotionLabel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        EmotionLabel::ALL
            .iter()
            .copied()
            .find(|l| l.as_str() == s)
            .ok_or_else(|| format!("unknown emotion label `{s}`"))
    }
}

/// Speaking tone of the toy. Familiar tones must be registered in the
/// datastore's familiar-voice registry before use.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ToneId {
    Male,
    Female,
    Familiar(String),
}

impl fmt::Display for ToneId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ToneId::Male => f.write_str("male"),
            ToneId::Female => f.write_str("female"),
            ToneId::Familiar(name) => write!(f, "familiar:{name}"),
        }
    }
}

/// Kind of repeated physical behaviour relevant to the alert path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PatternKind {
    HeadHit,
    LegBeat,
    Scream,
    RunAway,
}

impl PatternKind {
    pub const ALL: [PatternKind; 4] = [
        PatternKind::HeadHit,
        PatternKind::LegBeat,
        PatternKind::Scream,
        PatternKind::RunAway,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PatternKind::HeadHit => "head_hit",
            PatternKind::LegBeat => "leg_beat",
            PatternKind::Scream => "scream",
            PatternKind::RunAway => "run_away",
        }
    }
}

impl fmt::Display for PatternKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A 2-D face landmark in normalized image coordinates.
///
/// Serialized as a `[x, y]` pair. Raw frames are in `[0, 1]`² with y growing
/// downward; preprocessed landmarks are centered and therefore signed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "(f64, f64)", into = "(f64, f64)")]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn dist(self, other: Point) -> f64 {
        ((self.x - other.x).powi(2) + (self.y - other.y).powi(2)).sqrt()
    }
}

impl From<(f64, f64)> for Point {
    fn from((x, y): (f64, f64)) -> Self {
        Point { x, y }
    }
}

impl From<Point> for (f64, f64) {
    fn from(p: Point) -> Self {
        (p.x, p.y)
    }
}

/// Payload of one observation. The union is closed: decoding never produces
/// anything outside these variants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum EventPayload {
    /// One face capture: exactly 68 landmarks, each coordinate in `[0, 1]`.
    FaceFrame { landmarks: Vec<Point> },
    /// One gait observation.
    GaitFrame {
        /// Steps per minute, non-negative.
        cadence: f64,
        /// Fraction of tiptoe contact in `[0, 1]`.
        tiptoe_score: f64,
        /// Walking speed in m/s, non-negative.
        speed: f64,
    },
    /// One voice capture: exactly 26 non-negative band energies.
    VoiceFrame {
        band_energies: Vec<f64>,
        rms: f64,
        /// Fundamental frequency in Hz; 0 means unvoiced.
        pitch_hz: f64,
    },
    /// Child reaction to an utterance spoken in `tone_used`.
    ResponseFeedback { tone_used: ToneId, affect: f64 },
    /// One occurrence of a physical behaviour pattern.
    PatternEvent { kind: PatternKind },
    /// A module reported completion of an action (feeds the checker ledger).
    ModuleDone {
        module: String,
        args: Vec<String>,
        action: String,
    },
    /// A guard scope was activated or deactivated (feeds the checker gates).
    ScopeChange {
        scope: String,
        qualifier: Option<String>,
        active: bool,
    },
}

impl EventPayload {
    /// Short lowercase name matching the wire `type` tag.
    pub fn kind_name(&self) -> &'static str {
        match self {
            EventPayload::FaceFrame { .. } => "face_frame",
            EventPayload::GaitFrame { .. } => "gait_frame",
            EventPayload::VoiceFrame { .. } => "voice_frame",
            EventPayload::ResponseFeedback { .. } => "response_feedback",
            EventPayload::PatternEvent { .. } => "pattern_event",
            EventPayload::ModuleDone { .. } => "module_done",
            EventPayload::ScopeChange { .. } => "scope_change",
        }
    }
}

/// One time-stamped observation of one child.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BehaviorEvent {
    pub ts: Timestamp,
    pub child: ChildId,
    #[serde(flatten)]
    pub payload: EventPayload,
}

impl BehaviorEvent {
    pub fn new(ts: impl Into<Timestamp>, child: ChildId, payload: EventPayload) -> Self {
        BehaviorEvent {
            ts: ts.into(),
            child,
            payload,
        }
    }
}

/// First field invariant an event violates, as a human-readable description.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation(pub String);

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

fn violation(msg: impl Into<String>) -> Result<(), Violation> {
    Err(Violation(msg.into()))
}

fn check_range(name: &str, v: f64, lo: f64, hi: f64) -> Result<(), Violation> {
    // NaN fails every comparison, so it is rejected here too.
    if v >= lo && v <= hi {
        Ok(())
    } else {
        violation(format!("{name} out of [{lo},{hi}]"))
    }
}

fn check_non_negative(name: &str, v: f64) -> Result<(), Violation> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        violation(format!("{name} must be a finite non-negative number"))
    }
}

/// Checks every field invariant of `e`; the error names the first failed field.
pub fn validate_event(e: &BehaviorEvent) -> Result<(), Violation> {
    if e.child.as_str().is_empty() {
        return violation("child: must be non-empty");
    }
    match &e.payload {
        EventPayload::FaceFrame { landmarks } => {
            if landmarks.len() != LANDMARK_COUNT {
                return violation(format!("landmarks: expected {LANDMARK_COUNT}"));
            }
            for (i, p) in landmarks.iter().enumerate() {
                check_range(&format!("landmarks[{i}].x"), p.x, 0.0, 1.0)?;
                check_range(&format!("landmarks[{i}].y"), p.y, 0.0, 1.0)?;
            }
            Ok(())
        }
        EventPayload::GaitFrame {
            cadence,
            tiptoe_score,
            speed,
        } => {
            check_non_negative("cadence", *cadence)?;
            check_range("tiptoe_score", *tiptoe_score, 0.0, 1.0)?;
            check_non_negative("speed", *speed)
        }
        EventPayload::VoiceFrame {
            band_energies,
            rms,
            pitch_hz,
        } => {
            if band_energies.len() != VOICE_BAND_COUNT {
                return violation(format!("band_energies: expected {VOICE_BAND_COUNT}"));
            }
            for (i, &b) in band_energies.iter().enumerate() {
                check_non_negative(&format!("band_energies[{i}]"), b)?;
            }
            check_non_negative("rms", *rms)?;
            check_non_negative("pitch_hz", *pitch_hz)
        }
        EventPayload::ResponseFeedback { affect, .. } => check_range("affect", *affect, -1.0, 1.0),
        EventPayload::PatternEvent { .. } => Ok(()),
        EventPayload::ModuleDone { module, action, .. } => {
            if module.is_empty() {
                return violation("module: must be non-empty");
            }
            if action.is_empty() {
                return violation("action: must be non-empty");
            }
            Ok(())
        }
        EventPayload::ScopeChange { scope, .. } => {
            if scope.is_empty() {
                return violation("scope: must be non-empty");
            }
            Ok(())
        }
    }
}

/// Checks that every event is valid and that timestamps are non-decreasing
/// per child. Downstream modules only accept streams satisfying this.
pub fn validate_stream(events: &[BehaviorEvent]) -> Result<(), Violation> {
    let mut last: std::collections::HashMap<&ChildId, Timestamp> = Default::default();
    for (i, e) in events.iter().enumerate() {
        validate_event(e).map_err(|v| Violation(format!("event {i}: {v}")))?;
        if let Some(&prev) = last.get(&e.child) {
            if e.ts < prev {
                return violation(format!(
                    "event {i}: out of order for child {} ({} after {})",
                    e.child, e.ts, prev
                ));
            }
        }
        last.insert(&e.child, e.ts);
    }
    Ok(())
}

/// Error decoding one event-log line.
#[derive(Debug, Clone, thiserror::Error, PartialEq, Eq)]
#[error("offset {offset}: {message}")]
pub struct DecodeError {
    /// Byte offset of the error within the line.
    pub offset: usize,
    pub message: String,
}

/// Encodes an event as a single flat JSON line (no trailing newline).
///
/// Field order is fixed: `ts`, `child`, `type`, then payload fields in
/// declaration order, so identical events encode to identical bytes.
pub fn encode_event(e: &BehaviorEvent) -> String {
    serde_json::to_string(e).expect("event serialization cannot fail")
}

/// Decodes one event-log line produced by [`encode_event`].
pub fn decode_event(line: &str) -> Result<BehaviorEvent, DecodeError> {
    serde_json::from_str(line).map_err(|e| DecodeError {
        offset: e.column().saturating_sub(1),
        message: e.to_string(),
    })
}
