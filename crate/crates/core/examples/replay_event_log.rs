//! The event log is the source of truth: replay a recorded run from its
//! persisted artifacts and verify the transcript reproduces byte for byte.
//!
//! ```bash
//! cargo run -p toykit --example replay_event_log
//! ```

use std::path::Path;
use toykit::config::RunConfig;
use toykit::sim::{recorded_transcript, replay, run_pipeline, Scenario};

fn main() {
    let scenario_path =
        Path::new(env!("CARGO_MANIFEST_DIR")).join("assets/scenarios/head_hits.scn");
    let scenario = Scenario::load(&scenario_path).unwrap();
    let out = tempfile::tempdir().unwrap();

    let original = run_pipeline(&scenario, &RunConfig::default(), out.path()).unwrap();
    println!(
        "simulated: {} transcript lines, {} alerts",
        original.transcript.lines().len(),
        original.alerts.len()
    );

    // Replay consumes only what is on disk: scenario copy, config copy,
    // event log, and saved models. No writes happen.
    let replayed = replay(out.path()).unwrap();
    let recorded = recorded_transcript(out.path()).unwrap();
    assert_eq!(replayed.transcript.to_text(), recorded);
    println!(
        "replay reproduced {} lines byte-for-byte",
        replayed.transcript.lines().len()
    );

    for line in replayed.transcript.lines().iter().take(6) {
        println!("  {line}");
    }
    println!("  ...");
}
