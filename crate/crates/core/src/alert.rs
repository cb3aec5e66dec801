//! Alert path: renders abnormal patterns into parent-facing alerts and
//! delivers them through pluggable transports with per-(child, kind)
//! deduplication and quiet-window gating.
//!
//! Nothing is ever dropped: a pattern is delivered, suppressed (recorded as
//! such), or queued during a quiet window and delivered at the window end.

use crate::checker::AbnormalPattern;
use crate::event::{ChildId, PatternKind, Timestamp};
use crate::store::Schedule;
use std::collections::{HashMap, VecDeque};
use std::fmt;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

/// Alert severity. Critical means the repetition count reached twice the
/// detector's `r_min`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Warning,
    Critical,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Severity::Warning => "warning",
            Severity::Critical => "critical",
        })
    }
}

/// A parent-facing notification rendered from one abnormal pattern.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Alert {
    pub ts: Timestamp,
    pub child: ChildId,
    pub kind: PatternKind,
    pub severity: Severity,
    /// Timestamps of the pattern's evidence events; never empty.
    pub evidence: Vec<Timestamp>,
    /// Deterministic rendered message.
    pub message: String,
}

impl Alert {
    /// Renders a pattern. `r_min` is the detector threshold; counts at or
    /// above `2 * r_min` are critical.
    pub fn from_pattern(p: &AbnormalPattern, r_min: u32) -> Alert {
        let severity = if p.count >= 2 * r_min {
            Severity::Critical
        } else {
            Severity::Warning
        };
        let evidence_list = p
            .evidence
            .iter()
            .map(|t| t.to_string())
            .collect::<Vec<_>>()
            .join(",");
        let message = format!(
            "[{severity}] child={} kind={} count={} span={}ms at={} evidence={evidence_list}",
            p.child, p.kind, p.count, p.span_ms, p.ts
        );
        Alert {
            ts: p.ts,
            child: p.child.clone(),
            kind: p.kind,
            severity,
            evidence: p.evidence.clone(),
            message,
        }
    }
}

/// Transport descriptor: where alerts go. Email and SMS are outbox-file
/// mocks at desk scale; the descriptor is the boundary where real gateways
/// would plug in.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct Transport {
    pub kind: TransportKind,
    /// Address, number, or path, depending on the kind.
    pub endpoint: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TransportKind {
    Email,
    Sms,
    File,
    Console,
}

impl TransportKind {
    pub fn as_str(self) -> &'static str {
        match self {
            TransportKind::Email => "email",
            TransportKind::Sms => "sms",
            TransportKind::File => "file",
            TransportKind::Console => "console",
        }
    }
}

impl Transport {
    /// Opens the transport relative to `base` (outbox and file paths are
    /// resolved under it).
    pub fn open(&self, base: &Path) -> Box<dyn TransportSink> {
        match self.kind {
            TransportKind::Console => Box::new(ConsoleSink),
            TransportKind::File => Box::new(FileSink {
                path: base.join(&self.endpoint),
            }),
            TransportKind::Email | TransportKind::Sms => Box::new(OutboxSink {
                kind: self.kind,
                endpoint: self.endpoint.clone(),
                dir: base.join("outbox").join(self.kind.as_str()),
            }),
        }
    }
}

/// Something that can carry one rendered alert to the outside.
pub trait TransportSink {
    /// Stable label recorded in transport results, e.g. `email`.
    fn label(&self) -> String;
    fn deliver(&mut self, alert: &Alert) -> std::io::Result<()>;
}

struct ConsoleSink;

impl TransportSink for ConsoleSink {
    fn label(&self) -> String {
        "console".into()
    }

    fn deliver(&mut self, alert: &Alert) -> std::io::Result<()> {
        println!("ALERT {}", alert.message);
        Ok(())
    }
}

struct FileSink {
    path: PathBuf,
}

impl TransportSink for FileSink {
    fn label(&self) -> String {
        "file".into()
    }

    fn deliver(&mut self, alert: &Alert) -> std::io::Result<()> {
        if let Some(parent) = self.path.parent() {
            fs::create_dir_all(parent)?;
        }
        let mut f = fs::OpenOptions::new()
            .create(true)
            .append(true)
            .open(&self.path)?;
        writeln!(f, "{}", alert.message)
    }
}

/// Email/SMS mock: one message per file, `outbox/<transport>/<child>-<ts>.msg`.
struct OutboxSink {
    kind: TransportKind,
    endpoint: String,
    dir: PathBuf,
}

impl TransportSink for OutboxSink {
    fn label(&self) -> String {
        self.kind.as_str().into()
    }

    fn deliver(&mut self, alert: &Alert) -> std::io::Result<()> {
        fs::create_dir_all(&self.dir)?;
        let path = self.dir.join(format!("{}-{}.msg", alert.child, alert.ts));
        let body = format!(
            "To: {}\nSubject: {} alert for {}\n\n{}\n",
            self.endpoint, alert.kind, alert.child, alert.message
        );
        fs::write(path, body)
    }
}

/// What happened to one pattern at dispatch time.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Disposition {
    Delivered,
    Suppressed,
    Queued,
}

impl fmt::Display for Disposition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Disposition::Delivered => "delivered",
            Disposition::Suppressed => "suppressed",
            Disposition::Queued => "queued",
        })
    }
}

/// One dispatcher decision, ready for the transcript and the datastore.
#[derive(Debug, Clone, PartialEq)]
pub struct AlertEvent {
    /// When the decision happened (the flush time for queued deliveries).
    pub ts: Timestamp,
    pub alert: Alert,
    pub disposition: Disposition,
    /// Set on deliveries that were previously queued.
    pub queued_from: Option<Timestamp>,
    /// `(label, ok)` per transport, in configuration order.
    pub transport_results: Vec<(String, bool)>,
}

impl AlertEvent {
    /// Transcript form:
    /// `ts child ALERT kind status severity count span [queued_from=..]`
    pub fn transcript_line(&self) -> String {
        let mut line = format!(
            "{} {} ALERT {} {} severity={} count={} span={}ms",
            self.ts,
            self.alert.child,
            self.alert.kind,
            self.disposition,
            self.alert.severity,
            self.alert.evidence.len(),
            self.alert
                .evidence
                .last()
                .map(|l| l.millis() - self.alert.evidence[0].millis())
                .unwrap_or(0),
        );
        if let Some(from) = self.queued_from {
            line.push_str(&format!(" queued_from={from}"));
        }
        line
    }
}

/// Dispatcher tuning.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct DispatcherConfig {
    /// Minimum ms between delivered alerts of one (child, kind).
    pub cooldown_ms: u64,
    /// Detector threshold, used for the severity boundary `2 * r_min`.
    pub r_min: u32,
}

impl Default for DispatcherConfig {
    fn default() -> Self {
        DispatcherConfig {
            cooldown_ms: 60_000,
            r_min: 3,
        }
    }
}

struct QueuedAlert {
    alert: Alert,
    flush_at: Timestamp,
}

/// Deduplicating, schedule-aware alert dispatcher.
pub struct AlertDispatcher {
    config: DispatcherConfig,
    schedule: Schedule,
    sinks: Vec<Box<dyn TransportSink>>,
    last_delivered: HashMap<(ChildId, PatternKind), Timestamp>,
    queue: VecDeque<QueuedAlert>,
}

impl AlertDispatcher {
    pub fn new(
        config: DispatcherConfig,
        schedule: Schedule,
        sinks: Vec<Box<dyn TransportSink>>,
    ) -> AlertDispatcher {
        AlertDispatcher {
            config,
            schedule,
            sinks,
            last_delivered: HashMap::new(),
            queue: VecDeque::new(),
        }
    }

    /// Opens every transport under `base` and builds the dispatcher.
    pub fn with_transports(
        config: DispatcherConfig,
        schedule: Schedule,
        transports: &[Transport],
        base: &Path,
    ) -> AlertDispatcher {
        let sinks = transports.iter().map(|t| t.open(base)).collect();
        AlertDispatcher::new(config, schedule, sinks)
    }

    /// Flushes queued alerts whose quiet window has ended by `now`.
    /// Call before processing events at `now`.
    pub fn tick(&mut self, now: Timestamp) -> Vec<AlertEvent> {
        let mut out = Vec::new();
        while self.queue.front().is_some_and(|q| q.flush_at <= now) {
            let q = self.queue.pop_front().unwrap();
            out.push(self.deliver_or_suppress(q.alert.clone(), q.flush_at, Some(q.alert.ts)));
        }
        out
    }

    /// Routes one abnormal pattern: suppressed inside the cooldown, queued
    /// inside a quiet window, delivered otherwise.
    pub fn dispatch(&mut self, pattern: &AbnormalPattern, now: Timestamp) -> AlertEvent {
        let alert = Alert::from_pattern(pattern, self.config.r_min);
        if self.in_cooldown(&alert, now) {
            return AlertEvent {
                ts: now,
                alert,
                disposition: Disposition::Suppressed,
                queued_from: None,
                transport_results: Vec::new(),
            };
        }
        if let Some(window_end) = self.schedule.quiet_window_end(now) {
            let flush_at = Timestamp(now.day_start().millis() + window_end);
            self.queue.push_back(QueuedAlert {
                alert: alert.clone(),
                flush_at,
            });
            return AlertEvent {
                ts: now,
                alert,
                disposition: Disposition::Queued,
                queued_from: None,
                transport_results: Vec::new(),
            };
        }
        self.deliver_or_suppress(alert, now, None)
    }

    /// Flushes everything still queued, at each alert's own window end.
    pub fn finish(&mut self) -> Vec<AlertEvent> {
        let mut out = Vec::new();
        while let Some(q) = self.queue.pop_front() {
            out.push(self.deliver_or_suppress(q.alert.clone(), q.flush_at, Some(q.alert.ts)));
        }
        out
    }

    fn in_cooldown(&self, alert: &Alert, now: Timestamp) -> bool {
        self.last_delivered
            .get(&(alert.child.clone(), alert.kind))
            .is_some_and(|last| now.millis() - last.millis() < self.config.cooldown_ms)
    }

    fn deliver_or_suppress(
        &mut self,
        alert: Alert,
        at: Timestamp,
        queued_from: Option<Timestamp>,
    ) -> AlertEvent {
        // The cooldown re-applies at flush time, so two alerts queued in one
        // window still deliver at most once per (child, kind).
        if self.in_cooldown(&alert, at) {
            return AlertEvent {
                ts: at,
                alert,
                disposition: Disposition::Suppressed,
                queued_from,
                transport_results: Vec::new(),
            };
        }
        let mut transport_results = Vec::with_capacity(self.sinks.len());
        for sink in &mut self.sinks {
            // A failing transport never blocks the others.
            let ok = sink.deliver(&alert).is_ok();
            transport_results.push((sink.label(), ok));
        }
        self.last_delivered
            .insert((alert.child.clone(), alert.kind), at);
        AlertEvent {
            ts: at,
            alert,
            disposition: Disposition::Delivered,
            queued_from,
            transport_results,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::{Arc, Mutex};

    fn pattern(ts: u64, kind: PatternKind, count: u32) -> AbnormalPattern {
        let step = 1_000;
        let evidence: Vec<Timestamp> = (0..count)
            .map(|i| Timestamp(ts - (count - 1 - i) as u64 * step))
            .collect();
        AbnormalPattern {
            ts: Timestamp(ts),
            child: ChildId::new("c1"),
            kind,
            count,
            span_ms: (count as u64 - 1) * step,
            evidence,
        }
    }

    #[derive(Clone, Default)]
    struct RecordingSink {
        delivered: Arc<Mutex<Vec<String>>>,
        fail: bool,
    }

    impl TransportSink for RecordingSink {
        fn label(&self) -> String {
            "recording".into()
        }

        fn deliver(&mut self, alert: &Alert) -> std::io::Result<()> {
            if self.fail {
                return Err(std::io::Error::other("down"));
            }
            self.delivered.lock().unwrap().push(alert.message.clone());
            Ok(())
        }
    }

    fn dispatcher(sinks: Vec<Box<dyn TransportSink>>) -> AlertDispatcher {
        AlertDispatcher::new(DispatcherConfig::default(), Schedule::default(), sinks)
    }

    #[test]
    fn severity_boundary_is_twice_r_min() {
        let warning = Alert::from_pattern(&pattern(10_000, PatternKind::HeadHit, 5), 3);
        assert_eq!(warning.severity, Severity::Warning);
        let critical = Alert::from_pattern(&pattern(10_000, PatternKind::HeadHit, 6), 3);
        assert_eq!(critical.severity, Severity::Critical);
        assert!(critical.message.contains("[critical]"));
        assert!(!critical.evidence.is_empty());
    }

    #[test]
    fn second_pattern_within_cooldown_is_suppressed() {
        let mut d = dispatcher(vec![]);
        let first = d.dispatch(&pattern(10_000, PatternKind::HeadHit, 3), Timestamp(10_000));
        assert_eq!(first.disposition, Disposition::Delivered);
        let second = d.dispatch(&pattern(15_000, PatternKind::HeadHit, 3), Timestamp(15_000));
        assert_eq!(second.disposition, Disposition::Suppressed);
        // A different kind is its own dedup slot.
        let other = d.dispatch(&pattern(15_000, PatternKind::Scream, 3), Timestamp(15_000));
        assert_eq!(other.disposition, Disposition::Delivered);
        // After the cooldown the kind delivers again.
        let later = d.dispatch(&pattern(70_000, PatternKind::HeadHit, 3), Timestamp(70_000));
        assert_eq!(later.disposition, Disposition::Delivered);
    }

    #[test]
    fn quiet_window_queues_and_flushes_at_window_end() {
        let schedule = Schedule::new(vec![(5_000, 20_000)]).unwrap();
        let mut d = AlertDispatcher::new(DispatcherConfig::default(), schedule, vec![]);
        let e = d.dispatch(&pattern(10_000, PatternKind::LegBeat, 3), Timestamp(10_000));
        assert_eq!(e.disposition, Disposition::Queued);
        assert!(d.tick(Timestamp(19_999)).is_empty());
        let flushed = d.tick(Timestamp(20_000));
        assert_eq!(flushed.len(), 1);
        assert_eq!(flushed[0].disposition, Disposition::Delivered);
        assert_eq!(flushed[0].ts, Timestamp(20_000));
        assert_eq!(flushed[0].queued_from, Some(Timestamp(10_000)));
        // The original timestamp stays in the rendered message.
        assert!(flushed[0].alert.message.contains("at=10000"));
    }

    #[test]
    fn two_alerts_queued_in_one_window_deliver_once() {
        let schedule = Schedule::new(vec![(0, 30_000)]).unwrap();
        let mut d = AlertDispatcher::new(DispatcherConfig::default(), schedule, vec![]);
        d.dispatch(&pattern(10_000, PatternKind::HeadHit, 3), Timestamp(10_000));
        d.dispatch(&pattern(12_000, PatternKind::HeadHit, 4), Timestamp(12_000));
        let flushed = d.finish();
        assert_eq!(flushed.len(), 2);
        assert_eq!(flushed[0].disposition, Disposition::Delivered);
        assert_eq!(flushed[1].disposition, Disposition::Suppressed);
    }

    #[test]
    fn all_transports_receive_the_same_message_and_failures_are_recorded() {
        let good = RecordingSink::default();
        let log = good.delivered.clone();
        let bad = RecordingSink {
            fail: true,
            ..Default::default()
        };
        let mut d = dispatcher(vec![Box::new(bad), Box::new(good)]);
        let e = d.dispatch(&pattern(10_000, PatternKind::RunAway, 3), Timestamp(10_000));
        assert_eq!(e.disposition, Disposition::Delivered);
        assert_eq!(
            e.transport_results,
            vec![
                ("recording".to_string(), false),
                ("recording".to_string(), true)
            ]
        );
        assert_eq!(log.lock().unwrap().len(), 1);
    }

    #[test]
    fn file_and_outbox_transports_write_under_the_base_dir() {
        let tmp = tempfile::tempdir().unwrap();
        let transports = [
            Transport {
                kind: TransportKind::File,
                endpoint: "alerts.out".into(),
            },
            Transport {
                kind: TransportKind::Email,
                endpoint: "parent@example.com".into(),
            },
            Transport {
                kind: TransportKind::Sms,
                endpoint: "+1555".into(),
            },
        ];
        let mut d = AlertDispatcher::with_transports(
            DispatcherConfig::default(),
            Schedule::default(),
            &transports,
            tmp.path(),
        );
        let e = d.dispatch(&pattern(10_000, PatternKind::HeadHit, 3), Timestamp(10_000));
        assert_eq!(e.disposition, Disposition::Delivered);
        let file = std::fs::read_to_string(tmp.path().join("alerts.out")).unwrap();
        let email = std::fs::read_to_string(tmp.path().join("outbox/email/c1-10000.msg")).unwrap();
        let sms = std::fs::read_to_string(tmp.path().join("outbox/sms/c1-10000.msg")).unwrap();
        // Identical rendered message everywhere.
        assert!(file.contains(&e.alert.message));
        assert!(email.contains(&e.alert.message));
        assert!(sms.contains(&e.alert.message));
        assert!(email.starts_with("To: parent@example.com"));
    }

    #[test]
    fn transcript_line_is_deterministic() {
        let mut d = dispatcher(vec![]);
        let e = d.dispatch(&pattern(10_000, PatternKind::HeadHit, 3), Timestamp(10_000));
        assert_eq!(
            e.transcript_line(),
            "10000 c1 ALERT head_hit delivered severity=warning count=3 span=2000ms"
        );
    }
}
