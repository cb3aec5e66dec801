//! Drive the runtime checker with a hand-built event stream: scope gating,
//! completion freshness, edge-triggered firing, and abnormal patterns.
//!
//! ```bash
//! cargo run -p toykit --example check_stream
//! ```

use toykit::checker::{Checker, CheckerConfig, CheckerOutput};
use toykit::event::{BehaviorEvent, ChildId, EventPayload, PatternKind};
use toykit::policy::builtin_policies;

fn scope(ts: u64, child: &ChildId, scope: &str, active: bool) -> BehaviorEvent {
    BehaviorEvent::new(
        ts,
        child.clone(),
        EventPayload::ScopeChange {
            scope: scope.into(),
            qualifier: None,
            active,
        },
    )
}

fn done(ts: u64, child: &ChildId, module: &str, action: &str) -> BehaviorEvent {
    BehaviorEvent::new(
        ts,
        child.clone(),
        EventPayload::ModuleDone {
            module: module.into(),
            args: vec![],
            action: action.into(),
        },
    )
}

fn hit(ts: u64, child: &ChildId) -> BehaviorEvent {
    BehaviorEvent::new(
        ts,
        child.clone(),
        EventPayload::PatternEvent {
            kind: PatternKind::HeadHit,
        },
    )
}

fn main() {
    let child = ChildId::new("kid");
    let mut checker = Checker::new(builtin_policies(), CheckerConfig::default()).unwrap();

    let stream = vec![
        // both Policy4 completions land, but its fin scope is closed
        done(100, &child, "MaleVoice", "Submit"),
        done(200, &child, "FemaleVoice", "Submit"),
        // opening the scope fires it (completions are still fresh)
        scope(300, &child, "ChildBehaviour", true),
        // repeated head hits inside the 10 s window
        hit(1_000, &child),
        hit(4_000, &child),
        hit(8_000, &child),
        // a second firing needs fresh completions from both modules
        done(9_000, &child, "MaleVoice", "Submit"),
        done(9_500, &child, "FemaleVoice", "Submit"),
    ];

    for event in &stream {
        for output in checker.ingest(event).unwrap() {
            match output {
                CheckerOutput::Directive(d) => println!("{}", d.transcript_line()),
                CheckerOutput::Pattern(p) => println!("{p}"),
            }
        }
    }

    println!(
        "Policy4 fired {} times for {child}; active scopes: {:?}",
        checker.fired_count(&child, "Policy4"),
        checker.active_scopes(&child),
    );
}
