//! Run the full prediction pipeline (preprocess -> features -> classifier
//! -> baseline comparison) on sampled face and voice frames.
//!
//! ```bash
//! cargo run -p toykit --example predict_emotions
//! ```

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use toykit::event::{BehaviorEvent, ChildId, EmotionLabel, EventPayload};
use toykit::predict::predict_event;
use toykit::sim::{train_default_face_model, train_default_voice_model};
use toykit::synth;

fn main() {
    let face_model = train_default_face_model();
    let voice_model = train_default_voice_model();
    let child = ChildId::new("kid");
    let mut rng = ChaCha8Rng::seed_from_u64(5);

    println!("face frames:");
    for (i, label) in EmotionLabel::ALL.into_iter().enumerate() {
        let event = BehaviorEvent::new(
            (i as u64 + 1) * 1_000,
            child.clone(),
            EventPayload::FaceFrame {
                landmarks: synth::sample_face_frame(label, &mut rng),
            },
        );
        let a = predict_event(&face_model, &voice_model, &event, None)
            .unwrap()
            .unwrap();
        println!(
            "  truth {label:<8} -> top {:<8} confidence {:.3} baseline deviation {:.3}",
            a.top.to_string(),
            a.confidence,
            a.baseline_deviation
        );
    }

    println!("voice frames:");
    for (i, label) in EmotionLabel::ALL.into_iter().enumerate() {
        let (band_energies, rms, pitch_hz) = synth::sample_voice_frame(label, &mut rng);
        let event = BehaviorEvent::new(
            (i as u64 + 10) * 1_000,
            child.clone(),
            EventPayload::VoiceFrame {
                band_energies,
                rms,
                pitch_hz,
            },
        );
        let a = predict_event(&face_model, &voice_model, &event, None)
            .unwrap()
            .unwrap();
        println!(
            "  truth {label:<8} -> top {:<8} confidence {:.3}",
            a.top.to_string(),
            a.confidence
        );
    }

    // Non-frame events are simply not applicable.
    let gait = BehaviorEvent::new(
        99_000u64,
        child,
        EventPayload::GaitFrame {
            cadence: 100.0,
            tiptoe_score: 0.2,
            speed: 1.0,
        },
    );
    assert!(predict_event(&face_model, &voice_model, &gait, None)
        .unwrap()
        .is_none());
    println!("gait frames are not applicable to the classifier, as expected");
}
