//! Run a multi-segment scenario through the whole stack and walk the
//! artifacts it writes: transcript, event log, alert records, summaries.
//!
//! ```bash
//! cargo run -p toykit --example simulate_end_to_end
//! ```

use std::path::Path;
use toykit::config::RunConfig;
use toykit::sim::{run_pipeline, Scenario};
use toykit::store::Datastore;

fn main() {
    let scenario_path =
        Path::new(env!("CARGO_MANIFEST_DIR")).join("assets/scenarios/mixed_emotions.scn");
    let scenario = Scenario::load(&scenario_path).unwrap();
    let out = tempfile::tempdir().unwrap();

    let result = run_pipeline(&scenario, &RunConfig::default(), out.path()).unwrap();

    println!(
        "{} events over {} ms -> {} transcript lines",
        Datastore::open(out.path().join("data"))
            .unwrap()
            .events(&scenario.child)
            .len(),
        scenario.duration_ms(),
        result.transcript.lines().len()
    );
    println!("directives:");
    for d in &result.directives {
        println!("  {}", d.transcript_line());
    }
    println!("switches:");
    for (ts, from, to) in &result.switches {
        println!("  {ts}: {from} -> {to}");
    }
    println!("alerts:");
    for a in &result.alerts {
        println!("  {}", a.transcript_line());
    }
    println!("scores:");
    for s in &result.scores {
        println!(
            "  segment {} ({}): top-1 {:.3} over {} frames",
            s.segment,
            s.true_emotion,
            s.fraction(),
            s.frames
        );
    }
    println!("overall top-1: {:.3}", result.overall_score());

    // Everything the run needs to be replayed sits under the out dir.
    println!("artifacts:");
    for name in ["scenario.scn", "config.json", "transcript.log"] {
        println!("  {}", out.path().join(name).display());
    }
    let store = Datastore::open(out.path().join("data")).unwrap();
    for child in store.children() {
        println!(
            "  data/{child}: {} events, {} alert records, {} summaries",
            store.events(&child).len(),
            store.alerts(&child).len(),
            store.summaries(&child).len()
        );
    }
}
