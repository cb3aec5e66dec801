//! Deterministic event-stream generation from a scenario.
//!
//! Generation runs in two passes. The first lays out a skeleton of every
//! event with its timestamp: per-stream ticks at the segment rates plus the
//! scripted injections, globally sorted by `(ts, stream priority, sequence)`
//! so equal timestamps order the same way on every run. The second pass
//! walks the skeleton in time order, drawing all randomness from one seeded
//! RNG and, in closed-loop mode, tracking the toy's tone through the same
//! switching rule the real controller uses, so feedback affect always
//! reflects the tone at generation time.

use super::{Scenario, ScenarioError};
use crate::event::{BehaviorEvent, EmotionLabel, EventPayload, PatternKind, ToneId};
use crate::modulation::ToneState;
use crate::synth;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Whether feedback reacts to the tracked tone or stays pinned to the
/// initial tone.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LoopMode {
    /// Feedback follows the toy's tone as it switches (the default).
    Closed,
    /// Feedback is computed against the initial tone forever; for unit
    /// testing fixed streams.
    Open,
}

/// Generator tuning; must match the controller configuration for the
/// closed loop to be consistent.
#[derive(Debug, Clone, PartialEq)]
pub struct GenOptions {
    pub mode: LoopMode,
    pub tone_order: Vec<ToneId>,
    pub switch_threshold: u32,
    pub affect_floor: f64,
}

impl Default for GenOptions {
    fn default() -> Self {
        GenOptions {
            mode: LoopMode::Closed,
            tone_order: vec![ToneId::Male, ToneId::Female],
            switch_threshold: 3,
            affect_floor: -0.2,
        }
    }
}

/// Base affect magnitude for matched / mismatched tone preference.
pub const AFFECT_BASE: f64 = 0.6;
/// Uniform noise amplitude added to feedback affect.
pub const AFFECT_NOISE: f64 = 0.1;

enum Skeleton {
    Scope {
        scope: String,
        qualifier: Option<String>,
        active: bool,
    },
    ModuleDone {
        module: String,
        args: Vec<String>,
        action: String,
    },
    Pattern(PatternKind),
    Face(EmotionLabel),
    Voice(EmotionLabel),
    Gait(EmotionLabel),
    Feedback(ToneId),
}

impl Skeleton {
    /// Tie-break for equal timestamps: scopes open before completions land,
    /// observations come next, feedback reacts last.
    fn priority(&self) -> u8 {
        match self {
            Skeleton::Scope { .. } => 0,
            Skeleton::ModuleDone { .. } => 1,
            Skeleton::Pattern(_) => 2,
            Skeleton::Face(_) => 3,
            Skeleton::Voice(_) => 4,
            Skeleton::Gait(_) => 5,
            Skeleton::Feedback(_) => 6,
        }
    }
}

/// Tick times for one rate stream within `[start, end)`: the i-th event at
/// `start + round(i * 1000 / rate)`.
fn ticks(start: u64, end: u64, rate_hz: f64) -> Vec<u64> {
    if rate_hz <= 0.0 {
        return Vec::new();
    }
    let period = 1000.0 / rate_hz;
    let mut out = Vec::new();
    let mut i = 1u64;
    loop {
        let t = start + ((i as f64) * period).round() as u64;
        if t >= end {
            return out;
        }
        out.push(t);
        i += 1;
    }
}

/// Generates the stream with default options (closed loop, male/female
/// ring, threshold 3, floor -0.2).
pub fn generate_stream(scenario: &Scenario) -> Result<Vec<BehaviorEvent>, ScenarioError> {
    generate_stream_with(scenario, &GenOptions::default())
}

pub fn generate_stream_with(
    scenario: &Scenario,
    options: &GenOptions,
) -> Result<Vec<BehaviorEvent>, ScenarioError> {
    scenario.validate()?;

    let mut skeleton: Vec<(u64, u8, usize, Skeleton)> = Vec::new();
    let mut push = |ts: u64, item: Skeleton, seq: &mut usize| {
        skeleton.push((ts, item.priority(), *seq, item));
        *seq += 1;
    };
    let mut seq = 0usize;
    let mut seg_start = 0u64;
    for seg in &scenario.segments {
        let seg_end = seg_start + seg.duration_ms;
        for s in &seg.scope_changes {
            push(
                seg_start + s.at_ms,
                Skeleton::Scope {
                    scope: s.scope.clone(),
                    qualifier: s.qualifier.clone(),
                    active: s.active,
                },
                &mut seq,
            );
        }
        for m in &seg.module_done_script {
            push(
                seg_start + m.at_ms,
                Skeleton::ModuleDone {
                    module: m.module.clone(),
                    args: m.args.clone(),
                    action: m.action.clone(),
                },
                &mut seq,
            );
        }
        for p in &seg.pattern_injections {
            for &at in &p.at_ms {
                push(seg_start + at, Skeleton::Pattern(p.kind), &mut seq);
            }
        }
        for t in ticks(seg_start, seg_end, seg.face_rate_hz) {
            push(t, Skeleton::Face(seg.true_emotion), &mut seq);
        }
        for t in ticks(seg_start, seg_end, seg.voice_rate_hz) {
            push(t, Skeleton::Voice(seg.true_emotion), &mut seq);
        }
        for t in ticks(seg_start, seg_end, seg.gait_rate_hz) {
            push(t, Skeleton::Gait(seg.true_emotion), &mut seq);
        }
        for t in ticks(seg_start, seg_end, seg.feedback_rate_hz) {
            push(t, Skeleton::Feedback(seg.tone_preference.clone()), &mut seq);
        }
        seg_start = seg_end;
    }
    skeleton.sort_by_key(|&(ts, priority, seq, _)| (ts, priority, seq));

    // Second pass: all randomness and tone tracking, in final event order.
    let mut rng = ChaCha8Rng::seed_from_u64(scenario.seed);
    let mut tone = ToneState::new(
        options.tone_order.clone(),
        options.switch_threshold,
        options.affect_floor,
    )
    .expect("generator tone order is non-empty");

    let mut events = Vec::with_capacity(skeleton.len());
    for (ts, _, _, item) in skeleton {
        let payload = match item {
            Skeleton::Scope {
                scope,
                qualifier,
                active,
            } => EventPayload::ScopeChange {
                scope,
                qualifier,
                active,
            },
            Skeleton::ModuleDone {
                module,
                args,
                action,
            } => EventPayload::ModuleDone {
                module,
                args,
                action,
            },
            Skeleton::Pattern(kind) => EventPayload::PatternEvent { kind },
            Skeleton::Face(label) => EventPayload::FaceFrame {
                landmarks: synth::sample_face_frame(label, &mut rng),
            },
            Skeleton::Voice(label) => {
                let (band_energies, rms, pitch_hz) = synth::sample_voice_frame(label, &mut rng);
                EventPayload::VoiceFrame {
                    band_energies,
                    rms,
                    pitch_hz,
                }
            }
            Skeleton::Gait(label) => {
                let (cadence, tiptoe_score, speed) = synth::sample_gait_frame(label, &mut rng);
                EventPayload::GaitFrame {
                    cadence,
                    tiptoe_score,
                    speed,
                }
            }
            Skeleton::Feedback(preference) => {
                let tone_used = match options.mode {
                    LoopMode::Closed => tone.current.clone(),
                    LoopMode::Open => options.tone_order[0].clone(),
                };
                let base = if tone_used == preference {
                    AFFECT_BASE
                } else {
                    -AFFECT_BASE
                };
                let affect =
                    (base + rng.random_range(-AFFECT_NOISE..AFFECT_NOISE)).clamp(-1.0, 1.0);
                if options.mode == LoopMode::Closed {
                    tone.on_feedback(&tone_used, affect);
                }
                EventPayload::ResponseFeedback { tone_used, affect }
            }
        };
        events.push(BehaviorEvent::new(ts, scenario.child.clone(), payload));
    }
    Ok(events)
}
