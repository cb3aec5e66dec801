//! Feedback-driven tone switching and utterance selection, in both
//! autonomous and directive-gated modes.
//!
//! ```bash
//! cargo run -p toykit --example voice_modulation
//! ```

use toykit::event::{ChildId, EmotionLabel, Timestamp, ToneId};
use toykit::modulation::{ModulationController, PhraseCatalog, SwitchMode, ToneState};
use toykit::predict::{assess, uniform_distribution, FeatureKind};

fn controller(mode: SwitchMode) -> ModulationController {
    let tone = ToneState::new(vec![ToneId::Male, ToneId::Female], 3, -0.2).unwrap();
    ModulationController::new(tone, mode, PhraseCatalog::default_catalog())
}

fn main() {
    // Autonomous: three sub-threshold feedbacks rotate the tone directly.
    let mut auto = controller(SwitchMode::Autonomous);
    println!("autonomous mode, threshold 3, floor -0.2:");
    for (i, affect) in [-0.5, -0.6, 0.4, -0.5, -0.7, -0.55].into_iter().enumerate() {
        let tone = auto.current_tone().clone();
        let outcome = auto.on_feedback(&tone, affect);
        println!(
            "  feedback {} (affect {affect:+.2}) under {tone}: streak {} {}",
            i + 1,
            auto.tone.negative_streak,
            match outcome.switched_to {
                Some(to) => format!("-> switched to {to}"),
                None => String::new(),
            }
        );
    }

    // Directive-gated: the rotation waits for a VoiceModulation directive.
    let mut gated = controller(SwitchMode::DirectiveGated);
    println!("directive-gated mode:");
    for _ in 0..3 {
        let tone = gated.current_tone().clone();
        let outcome = gated.on_feedback(&tone, -0.9);
        if outcome.switch_requested {
            println!(
                "  switch requested, still speaking {}",
                gated.current_tone()
            );
        }
    }
    let switched = gated.apply_directed_switch().unwrap();
    println!("  directive arrived -> switched to {switched}");

    // A registered familiar voice joins the rotation ring.
    gated.register_familiar("grandma");
    println!("  tone ring is now {:?}", gated.tone.tone_order);

    // Utterances follow the intent table and rotate through the catalog.
    println!("utterances:");
    let mut m = controller(SwitchMode::Autonomous);
    for label in [
        EmotionLabel::Happy,
        EmotionLabel::Sad,
        EmotionLabel::Fear,
        EmotionLabel::Happy,
        EmotionLabel::Neutral,
    ] {
        let mut dist = uniform_distribution();
        dist[label.index()] += 0.4;
        let sum: f64 = dist.iter().sum();
        for v in &mut dist {
            *v /= sum;
        }
        let a = assess(
            Timestamp(0),
            &ChildId::new("kid"),
            FeatureKind::Face,
            dist,
            None,
        );
        let u = m.select_utterance(&a, None);
        println!("  child seems {label:<8} -> [{}] \"{}\"", u.intent, u.text);
    }
}
