//! End-to-end pipeline: streams scenario events through checker →
//! prediction → modulation → alert dispatch, persisting everything to the
//! datastore and emitting a deterministic transcript.
//!
//! Transcript lines all share the `ts child KIND ...` shape:
//!
//! ```text
//! 3000 kid DIRECTIVE Policy4 VoiceModulation MV=MaleVoice,FV=FemaleVoice
//! 1000 kid ASSESS face top=happy conf=0.971632 dev=1.643264 dist=...
//! 3000 kid SWITCH male female
//! 4000 kid ALERT head_hit delivered severity=warning count=3 span=4000ms
//! 20000 kid SCORE segment=0 emotion=happy frames=19 top1=1.000000
//! ```
//!
//! A run writes, under its output directory: `scenario.scn` and
//! `config.json` copies, the datastore under `data/`, alert transports under
//! `outbox/` (and file transports), and `transcript.log`. [`replay`] rebuilds
//! the transcript from those artifacts alone, with no datastore or transport
//! writes, and must reproduce it byte for byte.

use super::{generate_stream_with, GenOptions, LoopMode, Scenario};
use crate::alert::{AlertDispatcher, AlertEvent, DispatcherConfig, Disposition};
use crate::checker::{AuthorizationDirective, Checker, CheckerOutput};
use crate::config::{
    RunConfig, DEFAULT_FACE_MODEL_SEED, DEFAULT_HIDDEN, DEFAULT_TRAIN_SEED,
    DEFAULT_VOICE_MODEL_SEED,
};
use crate::event::{BehaviorEvent, EmotionLabel, EventPayload, Timestamp, ToneId};
use crate::modulation::{ModulationController, PhraseCatalog, SwitchMode, ToneState, Utterance};
use crate::policy::{builtin_policies, parse_policy_set};
use crate::predict::{
    assess, predict_event, train, uniform_distribution, Distribution, EmotionAssessment,
    FeatureKind, MlpModel, TrainingConfig, FACE_FEATURE_COUNT, VOICE_FEATURE_COUNT,
};
use crate::store::{self, AssessmentSummary, Datastore};
use crate::synth;
use std::fmt;
use std::path::Path;

/// File names inside a run's output directory.
pub const TRANSCRIPT_FILE: &str = "transcript.log";
pub const SCENARIO_COPY: &str = "scenario.scn";
pub const CONFIG_COPY: &str = "config.json";
pub const DATA_DIR: &str = "data";

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error(transparent)]
    Scenario(#[from] super::ScenarioError),
    #[error(transparent)]
    Store(#[from] crate::store::StoreError),
    #[error(transparent)]
    Config(#[from] crate::config::ConfigError),
    #[error(transparent)]
    Checker(#[from] crate::checker::CheckerError),
    #[error(transparent)]
    Predict(#[from] crate::predict::PredictError),
    #[error(transparent)]
    Modulation(#[from] crate::modulation::ModulationError),
    #[error("policy parse error: {0}")]
    Policy(#[from] crate::policy::ParseError),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("output directory already holds a run: {0}")]
    AlreadyRun(String),
}

/// Ordered transcript lines; `to_text` is the byte-exact on-disk form.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Transcript {
    lines: Vec<String>,
}

impl Transcript {
    pub fn push(&mut self, line: String) {
        self.lines.push(line);
    }

    pub fn lines(&self) -> &[String] {
        &self.lines
    }

    pub fn to_text(&self) -> String {
        if self.lines.is_empty() {
            return String::new();
        }
        self.lines.join("\n") + "\n"
    }

    pub fn from_text(text: &str) -> Transcript {
        Transcript {
            lines: text.lines().map(String::from).collect(),
        }
    }
}

impl fmt::Display for Transcript {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

/// Per-segment prediction accuracy.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentScore {
    pub segment: usize,
    pub true_emotion: EmotionLabel,
    pub frames: u64,
    pub correct: u64,
}

impl SegmentScore {
    pub fn fraction(&self) -> f64 {
        if self.frames == 0 {
            0.0
        } else {
            self.correct as f64 / self.frames as f64
        }
    }
}

/// Everything one run produced, in emission order.
#[derive(Debug, Default)]
pub struct PipelineOutput {
    pub transcript: Transcript,
    pub directives: Vec<AuthorizationDirective>,
    pub assessments: Vec<EmotionAssessment>,
    pub switches: Vec<(Timestamp, ToneId, ToneId)>,
    pub alerts: Vec<AlertEvent>,
    pub utterances: Vec<Utterance>,
    pub scores: Vec<SegmentScore>,
}

impl PipelineOutput {
    /// Overall top-1 fraction across all scored frames.
    pub fn overall_score(&self) -> f64 {
        let frames: u64 = self.scores.iter().map(|s| s.frames).sum();
        let correct: u64 = self.scores.iter().map(|s| s.correct).sum();
        if frames == 0 {
            0.0
        } else {
            correct as f64 / frames as f64
        }
    }
}

/// Trains the default face classifier: all six emotions, 100 samples each,
/// from the documented dataset seed. Training is deterministic, so the
/// result is computed once per process and cloned.
pub fn train_default_face_model() -> MlpModel {
    static MODEL: std::sync::OnceLock<MlpModel> = std::sync::OnceLock::new();
    MODEL
        .get_or_init(|| {
            let dataset =
                synth::synthetic_face_dataset(&EmotionLabel::ALL, 100, synth::DATASET_SEED);
            let raw: Vec<(Vec<f64>, EmotionLabel)> =
                dataset.into_iter().map(|(fv, l)| (fv.values, l)).collect();
            let model = MlpModel::new(FACE_FEATURE_COUNT, DEFAULT_HIDDEN, DEFAULT_FACE_MODEL_SEED);
            let cfg = TrainingConfig {
                seed: DEFAULT_TRAIN_SEED,
                ..Default::default()
            };
            train(&model, &raw, &cfg)
                .expect("default face training succeeds")
                .0
        })
        .clone()
}

/// Trains the default voice classifier, mirroring the face setup.
pub fn train_default_voice_model() -> MlpModel {
    static MODEL: std::sync::OnceLock<MlpModel> = std::sync::OnceLock::new();
    MODEL
        .get_or_init(|| {
            let dataset =
                synth::synthetic_voice_dataset(&EmotionLabel::ALL, 100, synth::DATASET_SEED);
            let raw: Vec<(Vec<f64>, EmotionLabel)> =
                dataset.into_iter().map(|(fv, l)| (fv.values, l)).collect();
            let model = MlpModel::new(
                VOICE_FEATURE_COUNT,
                DEFAULT_HIDDEN,
                DEFAULT_VOICE_MODEL_SEED,
            );
            let cfg = TrainingConfig {
                seed: DEFAULT_TRAIN_SEED,
                ..Default::default()
            };
            train(&model, &raw, &cfg)
                .expect("default voice training succeeds")
                .0
        })
        .clone()
}

struct Pipeline<'a> {
    scenario: &'a Scenario,
    checker: Checker,
    controller: ModulationController,
    dispatcher: AlertDispatcher,
    face_model: MlpModel,
    voice_model: MlpModel,
    baseline: Option<Distribution>,
    sink: Option<&'a mut Datastore>,
    /// Synthesize voice-module completions when a gated switch is requested
    /// (simulation only; a replayed log already contains them).
    synthesize: bool,
    out: PipelineOutput,
    last_assessment: Option<EmotionAssessment>,
    seg_frames: Vec<u64>,
    seg_correct: Vec<u64>,
    seg_dist_sum: Vec<Distribution>,
    seg_dev_sum: Vec<f64>,
}

impl<'a> Pipeline<'a> {
    fn drive(&mut self, events: &[BehaviorEvent]) -> Result<(), PipelineError> {
        for e in events {
            for flushed in self.dispatcher.tick(e.ts) {
                self.emit_alert(flushed)?;
            }
            if let Some(sink) = self.sink.as_deref_mut() {
                sink.append_event(e)?;
            }
            let outputs = self.checker.ingest(e)?;
            self.handle_checker_outputs(outputs)?;
            self.handle_payload(e)?;
        }
        for flushed in self.dispatcher.finish() {
            self.emit_alert(flushed)?;
        }
        self.emit_scores()?;
        Ok(())
    }

    fn handle_payload(&mut self, e: &BehaviorEvent) -> Result<(), PipelineError> {
        match &e.payload {
            EventPayload::FaceFrame { .. } | EventPayload::VoiceFrame { .. } => {
                let assessment = predict_event(
                    &self.face_model,
                    &self.voice_model,
                    e,
                    self.baseline.as_ref(),
                )?
                .expect("face/voice frames are applicable");
                self.out.transcript.push(assessment.transcript_line());
                self.score(&assessment);
                let utterance = self.controller.select_utterance(&assessment, None);
                self.out.utterances.push(utterance);
                self.last_assessment = Some(assessment.clone());
                self.out.assessments.push(assessment);
            }
            EventPayload::ResponseFeedback { tone_used, affect } => {
                let from = self.controller.current_tone().clone();
                let outcome = self.controller.on_feedback(tone_used, *affect);
                if let Some(to) = outcome.switched_to {
                    self.emit_switch(e.ts, from, to);
                }
                if outcome.switch_requested && self.synthesize {
                    // Report both voice modules as submitted so the checker
                    // can authorize the modulation.
                    for module in ["MaleVoice", "FemaleVoice"] {
                        let done = BehaviorEvent::new(
                            e.ts,
                            e.child.clone(),
                            EventPayload::ModuleDone {
                                module: module.into(),
                                args: vec!["MV".into(), "FV".into()],
                                action: "Submit".into(),
                            },
                        );
                        if let Some(sink) = self.sink.as_deref_mut() {
                            sink.append_event(&done)?;
                        }
                        let outputs = self.checker.ingest(&done)?;
                        self.handle_checker_outputs(outputs)?;
                    }
                }
            }
            _ => {}
        }
        Ok(())
    }

    fn handle_checker_outputs(&mut self, outputs: Vec<CheckerOutput>) -> Result<(), PipelineError> {
        for output in outputs {
            match output {
                CheckerOutput::Directive(d) => {
                    self.out.transcript.push(d.transcript_line());
                    if d.outcome == "VoiceModulation" {
                        let from = self.controller.current_tone().clone();
                        if let Some(to) = self.controller.apply_directed_switch() {
                            self.emit_switch(d.ts, from, to);
                        }
                    }
                    let assessment = self.last_assessment.clone().unwrap_or_else(|| {
                        assess(
                            d.ts,
                            &d.child,
                            FeatureKind::Face,
                            uniform_distribution(),
                            self.baseline.as_ref(),
                        )
                    });
                    let utterance = self.controller.select_utterance(&assessment, Some(&d));
                    self.out.utterances.push(utterance);
                    self.out.directives.push(d);
                }
                CheckerOutput::Pattern(p) => {
                    let event = self.dispatcher.dispatch(&p, p.ts);
                    self.emit_alert(event)?;
                }
            }
        }
        Ok(())
    }

    fn emit_switch(&mut self, ts: Timestamp, from: ToneId, to: ToneId) {
        self.out.transcript.push(format!(
            "{} {} SWITCH {} {}",
            ts, self.scenario.child, from, to
        ));
        self.out.switches.push((ts, from, to));
    }

    fn emit_alert(&mut self, event: AlertEvent) -> Result<(), PipelineError> {
        self.out.transcript.push(event.transcript_line());
        if let Some(sink) = self.sink.as_deref_mut() {
            let dispatched_at = match event.disposition {
                Disposition::Delivered => Some(event.ts),
                _ => None,
            };
            sink.record_alert(
                event.alert.clone(),
                dispatched_at,
                event.transport_results.clone(),
            )?;
        }
        self.out.alerts.push(event);
        Ok(())
    }

    fn score(&mut self, assessment: &EmotionAssessment) {
        let seg = self.scenario.segment_at(assessment.ts.millis());
        self.seg_frames[seg] += 1;
        if assessment.top == self.scenario.segments[seg].true_emotion {
            self.seg_correct[seg] += 1;
        }
        for (sum, p) in self.seg_dist_sum[seg]
            .iter_mut()
            .zip(&assessment.distribution)
        {
            *sum += p;
        }
        self.seg_dev_sum[seg] += assessment.baseline_deviation;
    }

    fn emit_scores(&mut self) -> Result<(), PipelineError> {
        let end = Timestamp(self.scenario.duration_ms());
        let starts = self.scenario.segment_starts();
        for (i, seg) in self.scenario.segments.iter().enumerate() {
            let score = SegmentScore {
                segment: i,
                true_emotion: seg.true_emotion,
                frames: self.seg_frames[i],
                correct: self.seg_correct[i],
            };
            self.out.transcript.push(format!(
                "{} {} SCORE segment={} emotion={} frames={} top1={:.6}",
                end,
                self.scenario.child,
                i,
                seg.true_emotion,
                score.frames,
                score.fraction()
            ));
            if score.frames > 0 {
                if let Some(sink) = self.sink.as_deref_mut() {
                    let n = score.frames as f64;
                    let mut mean = self.seg_dist_sum[i];
                    for v in &mut mean {
                        *v /= n;
                    }
                    sink.record_summary(AssessmentSummary {
                        child: self.scenario.child.clone(),
                        window: (Timestamp(starts[i]), Timestamp(starts[i] + seg.duration_ms)),
                        frames: score.frames,
                        mean_distribution: mean,
                        mean_deviation: self.seg_dev_sum[i] / n,
                    })?;
                }
            }
            self.out.scores.push(score);
        }
        let overall = self.out.overall_score();
        let frames: u64 = self.out.scores.iter().map(|s| s.frames).sum();
        self.out.transcript.push(format!(
            "{} {} SCORE overall frames={} top1={:.6}",
            end, self.scenario.child, frames, overall
        ));
        Ok(())
    }
}

fn build_parts(config: &RunConfig) -> Result<(Checker, ModulationController), PipelineError> {
    let policies = match &config.policies {
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            parse_policy_set(&text)?
        }
        None => builtin_policies(),
    };
    let checker = Checker::new(policies, config.checker)?;
    let tone = ToneState::new(
        config.controller.tone_order.clone(),
        config.controller.switch_threshold,
        config.controller.affect_floor,
    )?;
    let controller = ModulationController::new(
        tone,
        config.controller.mode,
        PhraseCatalog::default_catalog(),
    );
    Ok((checker, controller))
}

fn gen_options(config: &RunConfig, mode: LoopMode) -> GenOptions {
    GenOptions {
        mode,
        tone_order: config.controller.tone_order.clone(),
        switch_threshold: config.controller.switch_threshold,
        affect_floor: config.controller.affect_floor,
    }
}

/// Runs one scenario end to end, writing every artifact under `out_dir`.
/// Fails rather than appending to a directory that already holds a run.
pub fn run_pipeline(
    scenario: &Scenario,
    config: &RunConfig,
    out_dir: &Path,
) -> Result<PipelineOutput, PipelineError> {
    scenario.validate()?;
    if out_dir.join(TRANSCRIPT_FILE).exists() {
        return Err(PipelineError::AlreadyRun(out_dir.display().to_string()));
    }
    std::fs::create_dir_all(out_dir)?;
    scenario.save(&out_dir.join(SCENARIO_COPY))?;
    config.save(&out_dir.join(CONFIG_COPY))?;

    let mut datastore = Datastore::open(out_dir.join(DATA_DIR))?;
    datastore.set_schedule(config.schedule.clone())?;

    let face_model = match &config.models.face {
        Some(path) => store::load_model(path)?,
        None => {
            let m = train_default_face_model();
            datastore.save_model("face", &m)?;
            m
        }
    };
    let voice_model = match &config.models.voice {
        Some(path) => store::load_model(path)?,
        None => {
            let m = train_default_voice_model();
            datastore.save_model("voice", &m)?;
            m
        }
    };

    let events = generate_stream_with(scenario, &gen_options(config, LoopMode::Closed))?;
    let (checker, controller) = build_parts(config)?;
    let dispatcher = AlertDispatcher::with_transports(
        DispatcherConfig {
            cooldown_ms: config.dispatcher.cooldown_ms,
            r_min: config.checker.r_min,
        },
        config.schedule.clone(),
        &config.dispatcher.transports,
        out_dir,
    );

    let baseline = datastore.baseline(&scenario.child).copied();
    let segments = scenario.segments.len();
    let mut pipeline = Pipeline {
        scenario,
        checker,
        controller,
        dispatcher,
        face_model,
        voice_model,
        baseline,
        sink: Some(&mut datastore),
        synthesize: config.controller.mode == SwitchMode::DirectiveGated,
        out: PipelineOutput::default(),
        last_assessment: None,
        seg_frames: vec![0; segments],
        seg_correct: vec![0; segments],
        seg_dist_sum: vec![[0.0; EmotionLabel::COUNT]; segments],
        seg_dev_sum: vec![0.0; segments],
    };
    pipeline.drive(&events)?;
    let out = pipeline.out;

    std::fs::write(out_dir.join(TRANSCRIPT_FILE), out.transcript.to_text())?;
    let utter_path = out_dir
        .join(DATA_DIR)
        .join(scenario.child.as_str())
        .join("utterances.log");
    let utter_text: String = out
        .utterances
        .iter()
        .map(|u| format!("{}\t{}\t{}\n", u.intent, u.tone, u.text))
        .collect();
    std::fs::write(utter_path, utter_text)?;
    Ok(out)
}

/// Reconstructs the transcript of a previous run from its persisted event
/// log, models and configuration. Performs no datastore or transport
/// writes. The result must equal the recorded transcript byte for byte.
pub fn replay(run_dir: &Path) -> Result<PipelineOutput, PipelineError> {
    let scenario = Scenario::load(&run_dir.join(SCENARIO_COPY))?;
    let config = RunConfig::load(&run_dir.join(CONFIG_COPY))?;

    let models_dir = run_dir.join(DATA_DIR).join("models");
    let face_model = match &config.models.face {
        Some(path) => store::load_model(path)?,
        None => store::load_model(&models_dir.join("face.model"))?,
    };
    let voice_model = match &config.models.voice {
        Some(path) => store::load_model(path)?,
        None => store::load_model(&models_dir.join("voice.model"))?,
    };

    let log_path = run_dir
        .join(DATA_DIR)
        .join(scenario.child.as_str())
        .join("events.log");
    let events = store::read_event_log(&log_path)?;

    let (checker, controller) = build_parts(&config)?;
    let dispatcher = AlertDispatcher::new(
        DispatcherConfig {
            cooldown_ms: config.dispatcher.cooldown_ms,
            r_min: config.checker.r_min,
        },
        config.schedule.clone(),
        Vec::new(),
    );

    let segments = scenario.segments.len();
    let mut pipeline = Pipeline {
        scenario: &scenario,
        checker,
        controller,
        dispatcher,
        face_model,
        voice_model,
        baseline: None,
        sink: None,
        synthesize: false,
        out: PipelineOutput::default(),
        last_assessment: None,
        seg_frames: vec![0; segments],
        seg_correct: vec![0; segments],
        seg_dist_sum: vec![[0.0; EmotionLabel::COUNT]; segments],
        seg_dev_sum: vec![0.0; segments],
    };
    pipeline.drive(&events)?;
    Ok(pipeline.out)
}

/// The recorded transcript of a previous run.
pub fn recorded_transcript(run_dir: &Path) -> Result<String, PipelineError> {
    Ok(std::fs::read_to_string(run_dir.join(TRANSCRIPT_FILE))?)
}
