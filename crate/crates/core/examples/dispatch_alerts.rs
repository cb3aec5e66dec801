//! Alert dispatch: deduplication within the cooldown, quiet-window queueing,
//! and fan-out to file/console/email/SMS transports.
//!
//! ```bash
//! cargo run -p toykit --example dispatch_alerts
//! ```

use toykit::alert::{AlertDispatcher, DispatcherConfig, Transport, TransportKind};
use toykit::checker::AbnormalPattern;
use toykit::event::{ChildId, PatternKind, Timestamp};
use toykit::store::Schedule;

fn pattern(ts: u64, kind: PatternKind, evidence_ms: &[u64]) -> AbnormalPattern {
    AbnormalPattern {
        ts: Timestamp(ts),
        child: ChildId::new("kid"),
        kind,
        count: evidence_ms.len() as u32,
        span_ms: evidence_ms.last().unwrap() - evidence_ms[0],
        evidence: evidence_ms.iter().map(|&t| Timestamp(t)).collect(),
    }
}

fn main() {
    let out_dir = tempfile::tempdir().unwrap();
    let transports = [
        Transport {
            kind: TransportKind::File,
            endpoint: "alerts.out".into(),
        },
        Transport {
            kind: TransportKind::Console,
            endpoint: String::new(),
        },
        Transport {
            kind: TransportKind::Email,
            endpoint: "parent@example.com".into(),
        },
        Transport {
            kind: TransportKind::Sms,
            endpoint: "+15550100".into(),
        },
    ];
    // Quiet window between 30 s and 45 s of the (simulated) day.
    let schedule = Schedule::new(vec![(30_000, 45_000)]).unwrap();
    let mut dispatcher = AlertDispatcher::with_transports(
        DispatcherConfig {
            cooldown_ms: 60_000,
            r_min: 3,
        },
        schedule,
        &transports,
        out_dir.path(),
    );

    // Delivered normally.
    let first = dispatcher.dispatch(
        &pattern(5_000, PatternKind::HeadHit, &[1_000, 3_000, 5_000]),
        Timestamp(5_000),
    );
    println!("{}", first.transcript_line());
    for (label, ok) in &first.transport_results {
        println!("  transport {label}: {}", if *ok { "ok" } else { "fail" });
    }

    // Same kind again within the 60 s cooldown: suppressed, never dropped.
    let second = dispatcher.dispatch(
        &pattern(12_000, PatternKind::HeadHit, &[4_000, 8_000, 12_000]),
        Timestamp(12_000),
    );
    println!("{}", second.transcript_line());

    // Inside the quiet window: queued, then flushed at the window end.
    let queued = dispatcher.dispatch(
        &pattern(31_000, PatternKind::LegBeat, &[25_000, 28_000, 31_000]),
        Timestamp(31_000),
    );
    println!("{}", queued.transcript_line());
    for flushed in dispatcher.tick(Timestamp(45_000)) {
        println!("{}", flushed.transcript_line());
    }

    // The outbox mocks wrote one file per delivered message.
    for sub in ["email", "sms"] {
        let dir = out_dir.path().join("outbox").join(sub);
        for entry in std::fs::read_dir(&dir).unwrap() {
            let path = entry.unwrap().path();
            println!("--- {} ---", path.display());
            print!("{}", std::fs::read_to_string(&path).unwrap());
        }
    }
}
