//! Emotion prediction pipeline: input frames → preprocessing → feature
//! extraction → classification → assessment against a per-child baseline.
//!
//! Face and voice frames are assessed independently; fusing them is left to
//! the modulation controller's streak logic. Everything here is a pure
//! function of its inputs, and models are immutable values after training.

mod face;
mod mlp;
mod voice;

pub use face::{
    extract_face_features, inter_ocular_distance, preprocess_face, FaceError, FACE_FEATURE_COUNT,
    FACE_FEATURE_NAMES,
};
pub use mlp::{train, Distribution, Gradients, MlpError, MlpModel, TrainingConfig};
pub use voice::{preprocess_voice, VoiceError, PITCH_NORM_HZ, VOICE_FEATURE_COUNT};

use crate::event::{BehaviorEvent, ChildId, EmotionLabel, EventPayload, Timestamp};

/// Which pipeline produced a feature vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureKind {
    Face,
    Voice,
}

impl FeatureKind {
    /// Fixed feature-vector length for this kind.
    pub fn feature_len(self) -> usize {
        match self {
            FeatureKind::Face => FACE_FEATURE_COUNT,
            FeatureKind::Voice => VOICE_FEATURE_COUNT,
        }
    }
}

/// A fixed-length, finite feature vector.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct FeatureVector {
    pub kind: FeatureKind,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, thiserror::Error, PartialEq)]
pub enum PredictError {
    #[error(transparent)]
    Face(#[from] FaceError),
    #[error(transparent)]
    Voice(#[from] VoiceError),
    #[error(transparent)]
    Mlp(#[from] MlpError),
    #[error("feature vector for {kind:?} must have length {want}, got {got}")]
    BadFeatureLength {
        kind: FeatureKind,
        want: usize,
        got: usize,
    },
    #[error("feature vector contains a non-finite value")]
    NonFiniteFeature,
}

impl FeatureVector {
    pub fn new(kind: FeatureKind, values: Vec<f64>) -> Result<FeatureVector, PredictError> {
        if values.len() != kind.feature_len() {
            return Err(PredictError::BadFeatureLength {
                kind,
                want: kind.feature_len(),
                got: values.len(),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(PredictError::NonFiniteFeature);
        }
        Ok(FeatureVector { kind, values })
    }
}

/// Classifier output for one frame, compared against the child's stored
/// baseline distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct EmotionAssessment {
    pub ts: Timestamp,
    pub child: ChildId,
    pub kind: FeatureKind,
    pub distribution: Distribution,
    /// Argmax of `distribution`; ties resolve to the first label in
    /// declaration order.
    pub top: EmotionLabel,
    /// Probability of `top`.
    pub confidence: f64,
    /// L1 distance from the baseline (uniform when none is stored).
    pub baseline_deviation: f64,
}

impl EmotionAssessment {
    /// Transcript form:
    /// `ts child ASSESS kind top conf dev p1,p2,p3,p4,p5,p6`
    pub fn transcript_line(&self) -> String {
        let dist = self
            .distribution
            .iter()
            .map(|p| format!("{p:.6}"))
            .collect::<Vec<_>>()
            .join(",");
        format!(
            "{} {} ASSESS {} top={} conf={:.6} dev={:.6} dist={}",
            self.ts,
            self.child,
            match self.kind {
                FeatureKind::Face => "face",
                FeatureKind::Voice => "voice",
            },
            self.top,
            self.confidence,
            self.baseline_deviation,
            dist
        )
    }
}

/// The uniform distribution, used when no baseline is stored.
pub fn uniform_distribution() -> Distribution {
    [1.0 / EmotionLabel::COUNT as f64; EmotionLabel::COUNT]
}

/// Argmax with ties resolved to the earlier label.
pub fn top_label(dist: &Distribution) -> (EmotionLabel, f64) {
    let mut best = 0;
    for i in 1..dist.len() {
        if dist[i] > dist[best] {
            best = i;
        }
    }
    (EmotionLabel::from_index(best).unwrap(), dist[best])
}

/// Builds the assessment for a frame distribution: top label, confidence,
/// and the L1 deviation from `baseline` (or from uniform when `None`).
pub fn assess(
    ts: Timestamp,
    child: &ChildId,
    kind: FeatureKind,
    distribution: Distribution,
    baseline: Option<&Distribution>,
) -> EmotionAssessment {
    let uniform = uniform_distribution();
    let base = baseline.unwrap_or(&uniform);
    let baseline_deviation = distribution
        .iter()
        .zip(base)
        .map(|(a, b)| (a - b).abs())
        .sum();
    let (top, confidence) = top_label(&distribution);
    EmotionAssessment {
        ts,
        child: child.clone(),
        kind,
        distribution,
        top,
        confidence,
        baseline_deviation,
    }
}

/// Trains a copy of `model` on labelled feature vectors. All samples must
/// share one kind whose length matches the model input.
pub fn train_classifier(
    model: &MlpModel,
    dataset: &[(FeatureVector, EmotionLabel)],
    cfg: &TrainingConfig,
) -> Result<(MlpModel, Vec<f64>), PredictError> {
    if let Some((fv, _)) = dataset.first() {
        let kind = fv.kind;
        for (other, _) in dataset {
            if other.kind != kind || other.values.len() != model.input_size() {
                return Err(PredictError::BadFeatureLength {
                    kind: other.kind,
                    want: model.input_size(),
                    got: other.values.len(),
                });
            }
        }
    }
    let raw: Vec<(Vec<f64>, EmotionLabel)> = dataset
        .iter()
        .map(|(fv, label)| (fv.values.clone(), *label))
        .collect();
    Ok(train(model, &raw, cfg)?)
}

/// Runs the matching pipeline for a face or voice frame; any other event
/// kind is not applicable and returns `Ok(None)`.
pub fn predict_event(
    face_model: &MlpModel,
    voice_model: &MlpModel,
    e: &BehaviorEvent,
    baseline: Option<&Distribution>,
) -> Result<Option<EmotionAssessment>, PredictError> {
    let (kind, dist) = match &e.payload {
        EventPayload::FaceFrame { landmarks } => {
            let normalized = preprocess_face(landmarks)?;
            let features = extract_face_features(&normalized)?;
            (FeatureKind::Face, face_model.forward(&features)?)
        }
        EventPayload::VoiceFrame {
            band_energies,
            pitch_hz,
            ..
        } => {
            let features = preprocess_voice(band_energies, *pitch_hz)?;
            (FeatureKind::Voice, voice_model.forward(&features)?)
        }
        _ => return Ok(None),
    };
    Ok(Some(assess(e.ts, &e.child, kind, dist, baseline)))
}
