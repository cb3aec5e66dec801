//! Train the emotion classifier on the synthetic face dataset, measure
//! held-out accuracy, and round-trip the model through its file format.
//!
//! ```bash
//! cargo run -p toykit --example train_classifier
//! ```

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use toykit::event::EmotionLabel;
use toykit::predict::{top_label, train, MlpModel, TrainingConfig, FACE_FEATURE_COUNT};
use toykit::store;
use toykit::synth;

fn main() {
    // 500 samples, 5 clusters, documented seed.
    let dataset = synth::synthetic_face_dataset(&synth::EXPRESSIVE, 100, synth::DATASET_SEED);
    let mut samples: Vec<(Vec<f64>, EmotionLabel)> =
        dataset.into_iter().map(|(fv, l)| (fv.values, l)).collect();

    // deterministic 80/20 split
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for i in (1..samples.len()).rev() {
        let j = rng.random_range(0..=i);
        samples.swap(i, j);
    }
    let held_out = samples.split_off(400);

    let model = MlpModel::new(FACE_FEATURE_COUNT, 16, 11);
    let cfg = TrainingConfig::default();
    let (trained, curve) = train(&model, &samples, &cfg).unwrap();
    println!(
        "trained 17-16-6 for {} epochs: loss {:.4} -> {:.4}",
        curve.len(),
        curve.first().unwrap(),
        curve.last().unwrap()
    );

    let mut confusion = [[0u32; EmotionLabel::COUNT]; EmotionLabel::COUNT];
    let mut correct = 0;
    for (x, label) in &held_out {
        let (top, _) = top_label(&trained.forward(x).unwrap());
        confusion[label.index()][top.index()] += 1;
        if top == *label {
            correct += 1;
        }
    }
    println!(
        "held-out accuracy: {}/{} = {:.1}%",
        correct,
        held_out.len(),
        100.0 * correct as f64 / held_out.len() as f64
    );
    println!("confusion (rows = truth):");
    for label in EmotionLabel::ALL {
        let row: Vec<String> = confusion[label.index()]
            .iter()
            .map(|c| format!("{c:>3}"))
            .collect();
        println!("  {:<9} {}", label.to_string(), row.join(" "));
    }

    // the model file round-trips bit-exactly
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("face.model");
    store::save_model(&path, &trained).unwrap();
    let loaded = store::load_model(&path).unwrap();
    assert_eq!(loaded, trained);
    println!(
        "model file round-trip ok ({} bytes)",
        std::fs::metadata(&path).unwrap().len()
    );
}
