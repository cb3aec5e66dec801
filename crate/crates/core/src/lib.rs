//! Software stack for a child-companion smart toy, at desk scale.
//!
//! The toy observes one child through face, gait and voice frames, predicts
//! the child's emotional state with a small backprop-trained classifier,
//! checks behavioural authorization policies over the event stream, switches
//! its speaking tone when feedback shows the child dislikes the current one,
//! and alerts parents when abnormal physical patterns (head hitting, leg
//! beating, ...) repeat within a short window.
//!
//! Everything runs on simulated time and seeded randomness: a scenario file
//! plus a run configuration fully determine every output byte, and replaying
//! the persisted event log reproduces the original transcript exactly.
//!
//! The crate is organized around the pipeline stages:
//!
//! - [`event`] — the time-stamped event vocabulary and the line-oriented log codec
//! - [`policy`] — the policy language: AST, parser, validator, renderer, built-ins
//! - [`checker`] — the runtime checker: scopes, completion ledger, pattern windows
//! - [`predict`] — landmark/voice preprocessing, geometric features, MLP classifier
//! - [`synth`] — synthetic per-emotion templates, profiles and labelled datasets
//! - [`modulation`] — feedback-driven tone switching and utterance selection
//! - [`store`] — append-only event log, model files, alerts, schedules, voices
//! - [`alert`] — alert rendering, deduplication, quiet-window gating, transports
//! - [`sim`] — scenario model, stream generator, end-to-end pipeline and replay
//!
//! See the crate examples for one runnable program per capability, and the
//! `toysim` binary for the file-driven command-line interface.

pub mod alert;
pub mod checker;
pub mod config;
pub mod event;
pub mod modulation;
pub mod policy;
pub mod predict;
pub mod sim;
pub mod store;
pub mod synth;

pub use alert::{Alert, AlertDispatcher, Severity};
pub use checker::{AbnormalPattern, AuthorizationDirective, Checker, CheckerConfig, CheckerOutput};
pub use config::RunConfig;
pub use event::{
    decode_event, encode_event, validate_event, validate_stream, BehaviorEvent, ChildId,
    EmotionLabel, EventPayload, PatternKind, Point, Timestamp, ToneId,
};
pub use modulation::{ModulationController, PhraseCatalog, ToneState, Utterance};
pub use policy::{
    builtin_policies, parse_policy, parse_policy_set, render_policy, PolicyAst, PolicySet,
};
pub use predict::{EmotionAssessment, FeatureKind, FeatureVector, MlpModel, TrainingConfig};
pub use sim::{replay, run_pipeline, Scenario, ScenarioSegment, Transcript};
pub use store::Datastore;
