//! Shared generators for the integration suites.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use toykit::event::{
    BehaviorEvent, ChildId, EventPayload, PatternKind, Point, ToneId, LANDMARK_COUNT,
    VOICE_BAND_COUNT,
};

pub fn random_ident(rng: &mut ChaCha8Rng) -> String {
    let len = rng.random_range(1..8);
    let mut s = String::new();
    for i in 0..len {
        let c = if i == 0 {
            (b'A' + rng.random_range(0..26u8)) as char
        } else {
            (b'a' + rng.random_range(0..26u8)) as char
        };
        s.push(c);
    }
    s
}

/// A valid event with a random payload at `ts`.
pub fn random_event(rng: &mut ChaCha8Rng, ts: u64) -> BehaviorEvent {
    let child = ChildId::new(format!("c{}", rng.random_range(1..4u32)));
    let payload = match rng.random_range(0..7u32) {
        0 => EventPayload::FaceFrame {
            landmarks: (0..LANDMARK_COUNT)
                .map(|_| Point::new(rng.random_range(0.0..=1.0), rng.random_range(0.0..=1.0)))
                .collect(),
        },
        1 => EventPayload::GaitFrame {
            cadence: rng.random_range(0.0..200.0),
            tiptoe_score: rng.random_range(0.0..=1.0),
            speed: rng.random_range(0.0..3.0),
        },
        2 => EventPayload::VoiceFrame {
            band_energies: (0..VOICE_BAND_COUNT)
                .map(|_| rng.random_range(0.0..10.0))
                .collect(),
            rms: rng.random_range(0.0..2.0),
            pitch_hz: rng.random_range(0.0..500.0),
        },
        3 => EventPayload::ResponseFeedback {
            tone_used: match rng.random_range(0..3u32) {
                0 => ToneId::Male,
                1 => ToneId::Female,
                _ => ToneId::Familiar(random_ident(rng)),
            },
            affect: rng.random_range(-1.0..=1.0),
        },
        4 => EventPayload::PatternEvent {
            kind: PatternKind::ALL[rng.random_range(0..4usize)],
        },
        5 => EventPayload::ModuleDone {
            module: random_ident(rng),
            args: (0..rng.random_range(0..3u32))
                .map(|_| random_ident(rng))
                .collect(),
            action: random_ident(rng),
        },
        _ => EventPayload::ScopeChange {
            scope: random_ident(rng),
            qualifier: if rng.random_range(0..2u32) == 0 {
                None
            } else {
                Some(random_ident(rng))
            },
            active: rng.random_range(0..2u32) == 0,
        },
    };
    BehaviorEvent::new(ts, child, payload)
}
