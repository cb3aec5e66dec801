//! Voice output control: feedback-driven tone switching plus utterance
//! selection from the phrase catalog.
//!
//! The tone rule: `switch_threshold` consecutive feedbacks with affect below
//! `affect_floor`, all under one unchanged tone, rotate the toy to the next
//! tone in `tone_order` (wrapping). Any feedback at or above the floor
//! resets the streak. Feedback whose `tone_used` does not match the current
//! tone is ignored rather than rejected, since simulator feedback may race a
//! switch.
//!
//! Two switching modes exist: `autonomous` (the default) applies the rotation
//! directly; `directive-gated` holds the rotation as a pending request until
//! the checker authorizes a `VoiceModulation` outcome.

use crate::checker::AuthorizationDirective;
use crate::event::{EmotionLabel, ToneId};
use crate::predict::EmotionAssessment;
use std::collections::HashMap;
use std::fmt;

#[derive(Debug, Clone, thiserror::Error, PartialEq, Eq)]
pub enum ModulationError {
    #[error("phrase catalog is missing intent `{0}`")]
    MissingIntent(Intent),
    #[error("phrase catalog line {0} is malformed (want `intent<TAB>text`)")]
    MalformedCatalogLine(usize),
    #[error("unknown intent `{0}`")]
    UnknownIntent(String),
    #[error("tone order must not be empty")]
    EmptyToneOrder,
}

/// What an utterance is for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Intent {
    Praise,
    Correction,
    Comfort,
    Prompt,
}

impl Intent {
    pub const ALL: [Intent; 4] = [
        Intent::Praise,
        Intent::Correction,
        Intent::Comfort,
        Intent::Prompt,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Intent::Praise => "praise",
            Intent::Correction => "correction",
            Intent::Comfort => "comfort",
            Intent::Prompt => "prompt",
        }
    }
}

impl fmt::Display for Intent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Intent {
    type Err = ModulationError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Intent::ALL
            .iter()
            .copied()
            .find(|i| i.as_str() == s)
            .ok_or_else(|| ModulationError::UnknownIntent(s.to_string()))
    }
}

/// One line the toy speaks.
#[derive(Debug, Clone, PartialEq)]
pub struct Utterance {
    pub text: String,
    pub tone: ToneId,
    pub intent: Intent,
}

/// Phrases per intent, loaded from a `intent<TAB>text` file. Every intent
/// must have at least one phrase; loading fails fast otherwise.
#[derive(Debug, Clone)]
pub struct PhraseCatalog {
    phrases: HashMap<Intent, Vec<String>>,
}

/// The shipped default catalog.
pub const DEFAULT_CATALOG_SRC: &str = include_str!("../assets/phrases.tsv");

impl PhraseCatalog {
    pub fn from_tsv(text: &str) -> Result<PhraseCatalog, ModulationError> {
        let mut phrases: HashMap<Intent, Vec<String>> = HashMap::new();
        for (lineno, line) in text.lines().enumerate() {
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let (intent, text) = line
                .split_once('\t')
                .ok_or(ModulationError::MalformedCatalogLine(lineno + 1))?;
            if text.trim().is_empty() {
                return Err(ModulationError::MalformedCatalogLine(lineno + 1));
            }
            phrases
                .entry(intent.trim().parse()?)
                .or_default()
                .push(text.trim().to_string());
        }
        for intent in Intent::ALL {
            if !phrases.contains_key(&intent) {
                return Err(ModulationError::MissingIntent(intent));
            }
        }
        Ok(PhraseCatalog { phrases })
    }

    pub fn default_catalog() -> PhraseCatalog {
        PhraseCatalog::from_tsv(DEFAULT_CATALOG_SRC).expect("shipped catalog is well-formed")
    }

    fn phrase(&self, intent: Intent, index: u64) -> &str {
        let list = &self.phrases[&intent];
        &list[(index % list.len() as u64) as usize]
    }
}

/// Tone rotation state.
#[derive(Debug, Clone, PartialEq)]
pub struct ToneState {
    pub current: ToneId,
    pub negative_streak: u32,
    /// Rotation ring; switching moves to the next entry, wrapping.
    pub tone_order: Vec<ToneId>,
    /// Consecutive sub-floor feedbacks needed to switch (the paper-gap k).
    pub switch_threshold: u32,
    /// Affect threshold θ; feedback below it counts as negative.
    pub affect_floor: f64,
}

impl ToneState {
    pub fn new(
        tone_order: Vec<ToneId>,
        switch_threshold: u32,
        affect_floor: f64,
    ) -> Result<ToneState, ModulationError> {
        let current = tone_order
            .first()
            .cloned()
            .ok_or(ModulationError::EmptyToneOrder)?;
        Ok(ToneState {
            current,
            negative_streak: 0,
            tone_order,
            switch_threshold: switch_threshold.max(1),
            affect_floor,
        })
    }

    /// Next tone in the ring after `current`.
    fn next_tone(&self) -> ToneId {
        let at = self
            .tone_order
            .iter()
            .position(|t| *t == self.current)
            .unwrap_or(0);
        self.tone_order[(at + 1) % self.tone_order.len()].clone()
    }

    fn rotate(&mut self) -> ToneId {
        self.current = self.next_tone();
        self.negative_streak = 0;
        self.current.clone()
    }

    /// Applies one feedback. Returns the new tone when the negative streak
    /// reaches the threshold (exactly then, never before). Mismatched
    /// `tone_used` leaves the state unchanged.
    pub fn on_feedback(&mut self, tone_used: &ToneId, affect: f64) -> Option<ToneId> {
        if *tone_used != self.current {
            return None;
        }
        if affect < self.affect_floor {
            self.negative_streak += 1;
            if self.negative_streak >= self.switch_threshold {
                return Some(self.rotate());
            }
        } else {
            self.negative_streak = 0;
        }
        None
    }
}

/// When tone rotation takes effect.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SwitchMode {
    /// Rotate as soon as the streak reaches the threshold.
    Autonomous,
    /// Hold the rotation until a `VoiceModulation` directive authorizes it.
    DirectiveGated,
}

/// What one feedback caused.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct FeedbackOutcome {
    /// The tone switched to, if a switch was applied.
    pub switched_to: Option<ToneId>,
    /// Directive-gated mode only: the streak just reached the threshold and
    /// a switch now awaits authorization.
    pub switch_requested: bool,
}

/// Full output controller: tone state, switching mode, phrase catalog and
/// per-intent utterance rotation.
#[derive(Debug, Clone)]
pub struct ModulationController {
    pub tone: ToneState,
    mode: SwitchMode,
    catalog: PhraseCatalog,
    pending_switch: bool,
    utterance_counts: HashMap<Intent, u64>,
}

impl ModulationController {
    pub fn new(tone: ToneState, mode: SwitchMode, catalog: PhraseCatalog) -> Self {
        ModulationController {
            tone,
            mode,
            catalog,
            pending_switch: false,
            utterance_counts: HashMap::new(),
        }
    }

    pub fn current_tone(&self) -> &ToneId {
        &self.tone.current
    }

    pub fn mode(&self) -> SwitchMode {
        self.mode
    }

    pub fn switch_pending(&self) -> bool {
        self.pending_switch
    }

    /// Appends a registered familiar voice to the rotation ring.
    pub fn register_familiar(&mut self, name: &str) {
        let tone = ToneId::Familiar(name.to_string());
        if !self.tone.tone_order.contains(&tone) {
            self.tone.tone_order.push(tone);
        }
    }

    /// Routes one feedback through the tone rule, honouring the mode.
    pub fn on_feedback(&mut self, tone_used: &ToneId, affect: f64) -> FeedbackOutcome {
        match self.mode {
            SwitchMode::Autonomous => FeedbackOutcome {
                switched_to: self.tone.on_feedback(tone_used, affect),
                switch_requested: false,
            },
            SwitchMode::DirectiveGated => {
                if *tone_used != self.tone.current {
                    return FeedbackOutcome::default();
                }
                if affect < self.tone.affect_floor {
                    self.tone.negative_streak += 1;
                    if self.tone.negative_streak >= self.tone.switch_threshold
                        && !self.pending_switch
                    {
                        self.pending_switch = true;
                        self.tone.negative_streak = 0;
                        return FeedbackOutcome {
                            switched_to: None,
                            switch_requested: true,
                        };
                    }
                } else {
                    // The child recovered; drop any unauthorized request.
                    self.tone.negative_streak = 0;
                    self.pending_switch = false;
                }
                FeedbackOutcome::default()
            }
        }
    }

    /// Applies a pending switch once a `VoiceModulation` directive arrives.
    /// No-op when nothing is pending.
    pub fn apply_directed_switch(&mut self) -> Option<ToneId> {
        if !self.pending_switch {
            return None;
        }
        self.pending_switch = false;
        Some(self.tone.rotate())
    }

    /// Picks the utterance for the current situation. Intent, in priority
    /// order: a `VoiceModulation` directive prompts in the (new) tone; a
    /// `Communication` directive corrects; a sad or fearful child is
    /// comforted; a happy child is praised; anything else gets a prompt.
    /// The text rotates deterministically through the catalog per intent.
    pub fn select_utterance(
        &mut self,
        assessment: &EmotionAssessment,
        directive: Option<&AuthorizationDirective>,
    ) -> Utterance {
        let intent = match directive.map(|d| d.outcome.as_str()) {
            Some("VoiceModulation") => Intent::Prompt,
            Some("Communication") => Intent::Correction,
            _ => match assessment.top {
                EmotionLabel::Sad | EmotionLabel::Fear => Intent::Comfort,
                EmotionLabel::Happy => Intent::Praise,
                _ => Intent::Prompt,
            },
        };
        let count = self.utterance_counts.entry(intent).or_insert(0);
        let text = self.catalog.phrase(intent, *count).to_string();
        *count += 1;
        Utterance {
            text,
            tone: self.tone.current.clone(),
            intent,
        }
    }
}
