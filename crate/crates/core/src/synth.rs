//! Synthetic per-emotion ground truth: face landmark templates, voice band
//! profiles, gait parameter tables, and labelled feature datasets.
//!
//! The templates and profiles ship as data files under `assets/templates/`
//! and are embedded at compile time. `examples/generate_templates.rs`
//! regenerates the files from the procedural builders in this module, and a
//! test keeps the shipped bytes in sync with the builders.
//!
//! Templates are deliberately exaggerated along the geometry the feature
//! extractor measures (mouth corners, brow height, eye and mouth openness),
//! so the per-emotion clusters stay separable under the sampling noise.

use crate::event::{EmotionLabel, Point, LANDMARK_COUNT, VOICE_BAND_COUNT};
use crate::predict::{
    extract_face_features, preprocess_face, preprocess_voice, FeatureKind, FeatureVector,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution as _, Normal};
use std::sync::OnceLock;

/// Seed of the shipped synthetic datasets.
pub const DATASET_SEED: u64 = 42;

/// The five expressive emotions; the synthetic training clusters. Neutral is
/// the undeformed base template and is included only where a scenario needs
/// it.
pub const EXPRESSIVE: [EmotionLabel; 5] = [
    EmotionLabel::Happy,
    EmotionLabel::Sad,
    EmotionLabel::Angry,
    EmotionLabel::Fear,
    EmotionLabel::Surprise,
];

/// Standard deviation of the landmark sampling noise, in raw image units.
pub const FACE_NOISE_STD: f64 = 0.01;

// ---------------------------------------------------------------------------
// face templates
// ---------------------------------------------------------------------------

/// Procedurally builds the neutral 68-landmark layout in `[0,1]²` (y down).
fn build_neutral_face() -> Vec<Point> {
    let mut p = Vec::with_capacity(LANDMARK_COUNT);
    // jaw contour: half ellipse from left temple through the chin
    for i in 0..17 {
        let t = std::f64::consts::PI * (i as f64) / 16.0;
        p.push(Point::new(0.5 - 0.30 * t.cos(), 0.35 + 0.57 * t.sin()));
    }
    // brows: gentle arches, mirror-symmetric about x = 0.5
    for j in 0..5 {
        let arch = 0.02 * (std::f64::consts::PI * (j as f64) / 4.0).sin();
        p.push(Point::new(0.26 + 0.045 * (j as f64), 0.345 - arch));
    }
    for j in 0..5 {
        let arch = 0.02 * (std::f64::consts::PI * (j as f64) / 4.0).sin();
        p.push(Point::new(0.56 + 0.045 * (j as f64), 0.345 - arch));
    }
    // nose bridge and nostril base
    for k in 0..4 {
        p.push(Point::new(0.5, 0.38 + 0.06 * (k as f64)));
    }
    for j in 0..5 {
        let dip = 0.008 * (std::f64::consts::PI * (j as f64) / 4.0).sin();
        p.push(Point::new(0.44 + 0.03 * (j as f64), 0.60 + dip));
    }
    // eyes: hexagons around (0.35, 0.40) and (0.65, 0.40)
    for cx in [0.35, 0.65] {
        p.push(Point::new(cx - 0.05, 0.40));
        p.push(Point::new(cx - 0.023, 0.384));
        p.push(Point::new(cx + 0.023, 0.384));
        p.push(Point::new(cx + 0.05, 0.40));
        p.push(Point::new(cx + 0.023, 0.416));
        p.push(Point::new(cx - 0.023, 0.416));
    }
    // outer lip, clockwise from the left corner
    let outer = [
        (0.41, 0.720),
        (0.44, 0.700),
        (0.47, 0.693),
        (0.50, 0.690),
        (0.53, 0.693),
        (0.56, 0.700),
        (0.59, 0.720),
        (0.56, 0.740),
        (0.53, 0.748),
        (0.50, 0.750),
        (0.47, 0.748),
        (0.44, 0.740),
    ];
    p.extend(outer.iter().map(|&(x, y)| Point::new(x, y)));
    // inner lip
    let inner = [
        (0.44, 0.720),
        (0.47, 0.712),
        (0.50, 0.710),
        (0.53, 0.712),
        (0.56, 0.720),
        (0.53, 0.728),
        (0.50, 0.730),
        (0.47, 0.728),
    ];
    p.extend(inner.iter().map(|&(x, y)| Point::new(x, y)));
    debug_assert_eq!(p.len(), LANDMARK_COUNT);
    p
}

/// Per-emotion deformation offsets `(index, dx, dy)` applied to the neutral
/// template. y grows downward, so negative dy raises a point.
fn face_offsets(label: EmotionLabel) -> Vec<(usize, f64, f64)> {
    use EmotionLabel::*;
    match label {
        Neutral => vec![],
        Happy => vec![
            // mouth corners up and out, lips follow
            (48, -0.020, -0.045),
            (54, 0.020, -0.045),
            (49, -0.010, -0.020),
            (53, 0.010, -0.020),
            (55, 0.010, -0.015),
            (59, -0.010, -0.015),
            (60, -0.015, -0.030),
            (64, 0.015, -0.030),
            (57, 0.0, -0.010),
            (56, 0.0, -0.008),
            (58, 0.0, -0.008),
            // slightly narrowed eyes
            (37, 0.0, 0.004),
            (38, 0.0, 0.004),
            (43, 0.0, 0.004),
            (44, 0.0, 0.004),
            (40, 0.0, -0.004),
            (41, 0.0, -0.004),
            (46, 0.0, -0.004),
            (47, 0.0, -0.004),
        ],
        Sad => vec![
            // mouth corners down, inner brows raised, lids droop
            (48, 0.0, 0.035),
            (54, 0.0, 0.035),
            (49, 0.0, 0.020),
            (53, 0.0, 0.020),
            (60, 0.0, 0.025),
            (64, 0.0, 0.025),
            (57, 0.0, 0.005),
            (21, 0.0, -0.030),
            (22, 0.0, -0.030),
            (20, 0.0, -0.020),
            (23, 0.0, -0.020),
            (37, 0.0, 0.005),
            (38, 0.0, 0.005),
            (43, 0.0, 0.005),
            (44, 0.0, 0.005),
        ],
        Angry => vec![
            // inner brows pulled down and together, narrowed eyes,
            // compressed mouth
            (21, 0.010, 0.028),
            (22, -0.010, 0.028),
            (20, 0.005, 0.018),
            (23, -0.005, 0.018),
            (37, 0.0, 0.008),
            (38, 0.0, 0.008),
            (43, 0.0, 0.008),
            (44, 0.0, 0.008),
            (40, 0.0, -0.008),
            (41, 0.0, -0.008),
            (46, 0.0, -0.008),
            (47, 0.0, -0.008),
            (51, 0.0, 0.012),
            (57, 0.0, -0.012),
            (62, 0.0, 0.010),
            (66, 0.0, -0.010),
            (48, 0.012, 0.0),
            (54, -0.012, 0.0),
        ],
        Fear => {
            let mut v: Vec<(usize, f64, f64)> = (17..27).map(|i| (i, 0.0, -0.035)).collect();
            v.extend([
                (37, 0.0, -0.010),
                (38, 0.0, -0.010),
                (43, 0.0, -0.010),
                (44, 0.0, -0.010),
                (40, 0.0, 0.010),
                (41, 0.0, 0.010),
                (46, 0.0, 0.010),
                (47, 0.0, 0.010),
                (57, 0.0, 0.030),
                (56, 0.0, 0.024),
                (58, 0.0, 0.024),
                (66, 0.0, 0.022),
                (65, 0.0, 0.016),
                (67, 0.0, 0.016),
                (51, 0.0, -0.006),
            ]);
            v
        }
        Surprise => {
            let mut v: Vec<(usize, f64, f64)> = (17..27).map(|i| (i, 0.0, -0.050)).collect();
            v.extend([
                (37, 0.0, -0.013),
                (38, 0.0, -0.013),
                (43, 0.0, -0.013),
                (44, 0.0, -0.013),
                (40, 0.0, 0.013),
                (41, 0.0, 0.013),
                (46, 0.0, 0.013),
                (47, 0.0, 0.013),
                // tall, rounded mouth
                (57, 0.0, 0.060),
                (56, 0.0, 0.050),
                (58, 0.0, 0.050),
                (66, 0.0, 0.055),
                (65, 0.0, 0.045),
                (67, 0.0, 0.045),
                (51, 0.0, -0.012),
                (62, 0.0, -0.008),
                (48, 0.020, 0.010),
                (54, -0.020, 0.010),
                (49, 0.008, 0.0),
                (53, -0.008, 0.0),
                (55, -0.008, 0.0),
                (59, 0.008, 0.0),
                (60, 0.012, 0.010),
                (64, -0.012, 0.010),
            ]);
            v
        }
    }
}

fn build_face_template(label: EmotionLabel) -> Vec<Point> {
    let mut pts = build_neutral_face();
    for (i, dx, dy) in face_offsets(label) {
        pts[i].x += dx;
        pts[i].y += dy;
    }
    pts
}

/// Renders one face template as its shipped data-file content.
pub fn render_face_template_file(label: EmotionLabel) -> String {
    let mut out = format!(
        "# face landmark template: {label}\n# 68 landmarks, one `x y` pair per line, normalized image coordinates (y down)\n"
    );
    for p in build_face_template(label) {
        out.push_str(&format!("{:.6} {:.6}\n", p.x, p.y));
    }
    out
}

fn parse_face_template(text: &str) -> Vec<Point> {
    let pts: Vec<Point> = text
        .lines()
        .filter(|l| !l.trim().is_empty() && !l.starts_with('#'))
        .map(|l| {
            let mut it = l.split_whitespace();
            let x: f64 = it.next().unwrap().parse().unwrap();
            let y: f64 = it.next().unwrap().parse().unwrap();
            Point::new(x, y)
        })
        .collect();
    assert_eq!(pts.len(), LANDMARK_COUNT, "bad template file");
    pts
}

static FACE_TEMPLATES: OnceLock<[Vec<Point>; EmotionLabel::COUNT]> = OnceLock::new();

const FACE_TEMPLATE_FILES: [&str; EmotionLabel::COUNT] = [
    include_str!("../assets/templates/face_happy.tpl"),
    include_str!("../assets/templates/face_sad.tpl"),
    include_str!("../assets/templates/face_angry.tpl"),
    include_str!("../assets/templates/face_fear.tpl"),
    include_str!("../assets/templates/face_surprise.tpl"),
    include_str!("../assets/templates/face_neutral.tpl"),
];

/// The shipped 68-landmark template for `label`.
pub fn face_template(label: EmotionLabel) -> &'static [Point] {
    let all = FACE_TEMPLATES
        .get_or_init(|| std::array::from_fn(|i| parse_face_template(FACE_TEMPLATE_FILES[i])));
    &all[label.index()]
}

// ---------------------------------------------------------------------------
// voice profiles
// ---------------------------------------------------------------------------

/// Mean spectral envelope plus voicing parameters for one emotion.
#[derive(Debug, Clone, PartialEq)]
pub struct VoiceProfile {
    pub bands: [f64; VOICE_BAND_COUNT],
    pub pitch_hz: f64,
    pub rms: f64,
}

/// Gaussian bump in band space.
fn bump(b: f64, center: f64, width: f64, amplitude: f64) -> f64 {
    amplitude * (-((b - center) / width).powi(2)).exp()
}

fn build_voice_profile(label: EmotionLabel) -> VoiceProfile {
    use EmotionLabel::*;
    let (bumps, floor, pitch_hz, rms): (&[(f64, f64, f64)], f64, f64, f64) = match label {
        Happy => (&[(6.0, 3.0, 3.0), (16.0, 2.5, 2.2)], 0.20, 290.0, 0.50),
        Sad => (&[(3.0, 2.0, 1.5)], 0.08, 150.0, 0.18),
        Angry => (&[(8.0, 5.0, 4.5)], 0.35, 220.0, 0.80),
        Fear => (&[(13.0, 2.0, 2.2), (20.0, 1.8, 1.6)], 0.12, 340.0, 0.40),
        Surprise => (&[(18.0, 1.6, 3.6)], 0.15, 380.0, 0.55),
        Neutral => (&[(8.0, 6.0, 1.2)], 0.25, 200.0, 0.30),
    };
    let mut bands = [0.0; VOICE_BAND_COUNT];
    for (i, band) in bands.iter_mut().enumerate() {
        let b = i as f64;
        *band = floor + bumps.iter().map(|&(c, w, a)| bump(b, c, w, a)).sum::<f64>();
    }
    VoiceProfile {
        bands,
        pitch_hz,
        rms,
    }
}

/// Renders one voice profile as its shipped data-file content.
pub fn render_voice_profile_file(label: EmotionLabel) -> String {
    let p = build_voice_profile(label);
    let mut out = format!(
        "# voice band profile: {label}\n# 26 mean band energies, then pitch (Hz) and rms\n"
    );
    for (i, b) in p.bands.iter().enumerate() {
        out.push_str(&format!("band {i} {b:.6}\n"));
    }
    out.push_str(&format!("pitch {:.6}\n", p.pitch_hz));
    out.push_str(&format!("rms {:.6}\n", p.rms));
    out
}

fn parse_voice_profile(text: &str) -> VoiceProfile {
    let mut bands = [0.0; VOICE_BAND_COUNT];
    let mut pitch_hz = 0.0;
    let mut rms = 0.0;
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut it = line.split_whitespace();
        match it.next().unwrap() {
            "band" => {
                let i: usize = it.next().unwrap().parse().unwrap();
                bands[i] = it.next().unwrap().parse().unwrap();
            }
            "pitch" => pitch_hz = it.next().unwrap().parse().unwrap(),
            "rms" => rms = it.next().unwrap().parse().unwrap(),
            other => panic!("bad voice profile line: {other}"),
        }
    }
    VoiceProfile {
        bands,
        pitch_hz,
        rms,
    }
}

static VOICE_PROFILES: OnceLock<[VoiceProfile; EmotionLabel::COUNT]> = OnceLock::new();

const VOICE_PROFILE_FILES: [&str; EmotionLabel::COUNT] = [
    include_str!("../assets/templates/voice_happy.tpl"),
    include_str!("../assets/templates/voice_sad.tpl"),
    include_str!("../assets/templates/voice_angry.tpl"),
    include_str!("../assets/templates/voice_fear.tpl"),
    include_str!("../assets/templates/voice_surprise.tpl"),
    include_str!("../assets/templates/voice_neutral.tpl"),
];

/// The shipped voice profile for `label`.
pub fn voice_profile(label: EmotionLabel) -> &'static VoiceProfile {
    let all = VOICE_PROFILES
        .get_or_init(|| std::array::from_fn(|i| parse_voice_profile(VOICE_PROFILE_FILES[i])));
    &all[label.index()]
}

// ---------------------------------------------------------------------------
// gait parameters
// ---------------------------------------------------------------------------

/// `(cadence steps/min, tiptoe score, speed m/s)` means per emotion.
pub fn gait_params(label: EmotionLabel) -> (f64, f64, f64) {
    use EmotionLabel::*;
    match label {
        Happy => (110.0, 0.20, 1.2),
        Sad => (70.0, 0.10, 0.5),
        Angry => (125.0, 0.15, 1.5),
        Fear => (95.0, 0.50, 0.9),
        Surprise => (90.0, 0.30, 0.8),
        Neutral => (100.0, 0.15, 1.0),
    }
}

// ---------------------------------------------------------------------------
// sampling
// ---------------------------------------------------------------------------

fn clamp01(v: f64) -> f64 {
    v.clamp(0.0, 1.0)
}

/// Samples one face frame: template plus landmark noise, clamped to `[0,1]²`.
pub fn sample_face_frame(label: EmotionLabel, rng: &mut ChaCha8Rng) -> Vec<Point> {
    let noise = Normal::new(0.0, FACE_NOISE_STD).unwrap();
    face_template(label)
        .iter()
        .map(|p| {
            Point::new(
                clamp01(p.x + noise.sample(rng)),
                clamp01(p.y + noise.sample(rng)),
            )
        })
        .collect()
}

/// Samples one voice frame as `(band_energies, rms, pitch_hz)`.
pub fn sample_voice_frame(label: EmotionLabel, rng: &mut ChaCha8Rng) -> (Vec<f64>, f64, f64) {
    let profile = voice_profile(label);
    let gain = Normal::new(0.0, 0.08).unwrap();
    let bands: Vec<f64> = profile
        .bands
        .iter()
        .map(|&b| (b * (1.0 + gain.sample(rng))).max(0.0))
        .collect();
    let pitch = (profile.pitch_hz + 100.0 * gain.sample(rng)).max(0.0);
    let rms = (profile.rms * (1.0 + gain.sample(rng))).max(0.0);
    (bands, rms, pitch)
}

/// Samples one gait frame as `(cadence, tiptoe_score, speed)`.
pub fn sample_gait_frame(label: EmotionLabel, rng: &mut ChaCha8Rng) -> (f64, f64, f64) {
    let noise = Normal::new(0.0, 1.0).unwrap();
    let (cadence, tiptoe, speed) = gait_params(label);
    (
        (cadence + 4.0 * noise.sample(rng)).max(0.0),
        clamp01(tiptoe + 0.03 * noise.sample(rng)),
        (speed + 0.08 * noise.sample(rng)).max(0.0),
    )
}

// ---------------------------------------------------------------------------
// labelled datasets
// ---------------------------------------------------------------------------

/// Generates `per_label` face feature vectors per label, deterministically
/// from `seed`. Samples are interleaved label-by-label.
pub fn synthetic_face_dataset(
    labels: &[EmotionLabel],
    per_label: usize,
    seed: u64,
) -> Vec<(FeatureVector, EmotionLabel)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(labels.len() * per_label);
    for _ in 0..per_label {
        for &label in labels {
            let frame = sample_face_frame(label, &mut rng);
            let normalized = preprocess_face(&frame).expect("templates are non-degenerate");
            let values = extract_face_features(&normalized).unwrap();
            out.push((
                FeatureVector::new(FeatureKind::Face, values).unwrap(),
                label,
            ));
        }
    }
    out
}

/// Generates `per_label` voice feature vectors per label, deterministically
/// from `seed`.
pub fn synthetic_voice_dataset(
    labels: &[EmotionLabel],
    per_label: usize,
    seed: u64,
) -> Vec<(FeatureVector, EmotionLabel)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(labels.len() * per_label);
    for _ in 0..per_label {
        for &label in labels {
            let (bands, _rms, pitch) = sample_voice_frame(label, &mut rng);
            let values = preprocess_voice(&bands, pitch).unwrap();
            out.push((
                FeatureVector::new(FeatureKind::Voice, values).unwrap(),
                label,
            ));
        }
    }
    out
}
