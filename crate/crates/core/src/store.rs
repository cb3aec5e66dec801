//! File-backed datastore: append-only per-child event logs, model files,
//! alert and summary records, quiet-hour schedules, and the familiar-voice
//! registry.
//!
//! Storage is plain line-oriented files so a replay is byte-auditable:
//!
//! ```text
//! <root>/<child>/events.log      one encoded event per line, append-only
//! <root>/<child>/alerts.log      one JSON alert record per line
//! <root>/<child>/summaries.log   one JSON assessment summary per line
//! <root>/models/<name>.model     versioned text model file
//! <root>/schedule.cfg            quiet windows, JSON
//! <root>/voices.cfg              familiar voices, one JSON record per line
//! ```
//!
//! Writes are line-atomic (one `write` + flush per line); there is one
//! writer per child stream.

use crate::alert::Alert;
use crate::event::{
    decode_event, encode_event, validate_event, BehaviorEvent, ChildId, EmotionLabel, Timestamp,
};
use crate::predict::{Distribution, FeatureVector, MlpModel};
use std::collections::HashMap;
use std::fs;
use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};

/// Milliseconds in one simulated day.
pub const MS_PER_DAY: u64 = 86_400_000;

#[derive(Debug, thiserror::Error)]
pub enum StoreError {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Malformed {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("event rejected: {0}")]
    InvalidEvent(String),
    #[error("out-of-order append for child {child}: {got} after {newest}")]
    OutOfOrder {
        child: ChildId,
        got: Timestamp,
        newest: Timestamp,
    },
    #[error("query range is inverted: {t0} > {t1}")]
    InvertedRange { t0: Timestamp, t1: Timestamp },
    #[error("model file {path} has unsupported version `{found}` (want `{want}`)")]
    ModelVersion {
        path: PathBuf,
        found: String,
        want: String,
    },
    #[error("familiar voice `{0}` is already registered")]
    DuplicateVoice(String),
    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> StoreError + '_ {
    move |source| StoreError::Io {
        path: path.to_path_buf(),
        source,
    }
}

// ---------------------------------------------------------------------------
// schedule
// ---------------------------------------------------------------------------

/// Quiet windows within a day during which alerts are queued, not delivered.
#[derive(Debug, Clone, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
pub struct Schedule {
    /// `(start_ms_of_day, end_ms_of_day)` pairs, half-open `[start, end)`.
    pub quiet_windows: Vec<(u64, u64)>,
}

impl Schedule {
    /// Validates bounds (`0 <= start < end <= 86_400_000`) and that windows
    /// do not overlap.
    pub fn new(quiet_windows: Vec<(u64, u64)>) -> Result<Schedule, StoreError> {
        let mut sorted = quiet_windows.clone();
        sorted.sort();
        for &(s, e) in &sorted {
            if s >= e || e > MS_PER_DAY {
                return Err(StoreError::InvalidSchedule(format!(
                    "window ({s}, {e}) out of bounds"
                )));
            }
        }
        for pair in sorted.windows(2) {
            if pair[1].0 < pair[0].1 {
                return Err(StoreError::InvalidSchedule(format!(
                    "windows {:?} and {:?} overlap",
                    pair[0], pair[1]
                )));
            }
        }
        Ok(Schedule { quiet_windows })
    }

    /// When `at` falls inside a quiet window, the window's end (ms of day).
    pub fn quiet_window_end(&self, at: Timestamp) -> Option<u64> {
        let ms = at.ms_of_day();
        self.quiet_windows
            .iter()
            .find(|&&(s, e)| ms >= s && ms < e)
            .map(|&(_, e)| e)
    }
}

// ---------------------------------------------------------------------------
// records
// ---------------------------------------------------------------------------

/// Stored outcome of one dispatched (or suppressed/queued) alert.
/// `dispatched_at` is set iff at least one transport was attempted.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct AlertRecord {
    pub id: u64,
    pub alert: Alert,
    pub dispatched_at: Option<Timestamp>,
    /// `(transport label, ok)` per attempted transport.
    pub transport_results: Vec<(String, bool)>,
}

/// Aggregated prediction result for one `(child, window)`.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct AssessmentSummary {
    pub child: ChildId,
    pub window: (Timestamp, Timestamp),
    pub frames: u64,
    pub mean_distribution: Distribution,
    pub mean_deviation: f64,
}

/// A registered family-member voice: name plus its 26-band signature.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct FamiliarVoice {
    pub name: String,
    pub descriptor: Vec<f64>,
}

// ---------------------------------------------------------------------------
// datastore
// ---------------------------------------------------------------------------

#[derive(Default)]
struct ChildStore {
    events: Vec<BehaviorEvent>,
    newest_ts: Option<Timestamp>,
    event_file: Option<fs::File>,
    alerts: Vec<AlertRecord>,
    summaries: Vec<AssessmentSummary>,
    baseline: Option<Distribution>,
}

/// Root handle over the storage directory. One writer per child stream;
/// stored events are never mutated or deleted.
pub struct Datastore {
    root: PathBuf,
    children: HashMap<ChildId, ChildStore>,
    voices: Vec<FamiliarVoice>,
    schedule: Schedule,
}

impl Datastore {
    /// Opens (and creates if needed) a datastore rooted at `root`, loading
    /// any existing event logs, voices and schedule.
    pub fn open(root: impl Into<PathBuf>) -> Result<Datastore, StoreError> {
        let root = root.into();
        fs::create_dir_all(&root).map_err(io_err(&root))?;
        let mut store = Datastore {
            root: root.clone(),
            children: HashMap::new(),
            voices: Vec::new(),
            schedule: Schedule::default(),
        };
        // existing children are directories holding an events.log
        let entries = fs::read_dir(&root).map_err(io_err(&root))?;
        for entry in entries {
            let entry = entry.map_err(io_err(&root))?;
            let log = entry.path().join("events.log");
            if log.is_file() {
                let child = ChildId::new(entry.file_name().to_string_lossy().to_string());
                let events = read_event_log(&log)?;
                let newest_ts = events.last().map(|e| e.ts);
                let alerts_path = entry.path().join("alerts.log");
                let alerts = if alerts_path.is_file() {
                    read_jsonl(&alerts_path)?
                } else {
                    Vec::new()
                };
                let summaries_path = entry.path().join("summaries.log");
                let summaries = if summaries_path.is_file() {
                    read_jsonl(&summaries_path)?
                } else {
                    Vec::new()
                };
                store.children.insert(
                    child,
                    ChildStore {
                        events,
                        newest_ts,
                        alerts,
                        summaries,
                        ..Default::default()
                    },
                );
            }
        }
        let voices_path = root.join("voices.cfg");
        if voices_path.is_file() {
            store.voices = read_jsonl(&voices_path)?;
        }
        let schedule_path = root.join("schedule.cfg");
        if schedule_path.is_file() {
            let text = fs::read_to_string(&schedule_path).map_err(io_err(&schedule_path))?;
            let schedule: Schedule =
                serde_json::from_str(&text).map_err(|e| StoreError::Malformed {
                    path: schedule_path.clone(),
                    line: e.line(),
                    message: e.to_string(),
                })?;
            store.schedule = Schedule::new(schedule.quiet_windows)?;
        }
        Ok(store)
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn children(&self) -> Vec<ChildId> {
        let mut ids: Vec<ChildId> = self.children.keys().cloned().collect();
        ids.sort();
        ids
    }

    fn child_dir(&self, child: &ChildId) -> PathBuf {
        self.root.join(child.as_str())
    }

    fn child_mut(&mut self, child: &ChildId) -> &mut ChildStore {
        self.children.entry(child.clone()).or_default()
    }

    // -- event log ----------------------------------------------------------

    /// Appends one event to its child's log. Rejects invalid events and
    /// per-child timestamp regressions; the line is flushed before returning.
    pub fn append_event(&mut self, e: &BehaviorEvent) -> Result<(), StoreError> {
        validate_event(e).map_err(|v| StoreError::InvalidEvent(v.to_string()))?;
        let dir = self.child_dir(&e.child);
        let entry = self.child_mut(&e.child);
        if let Some(newest) = entry.newest_ts {
            if e.ts < newest {
                return Err(StoreError::OutOfOrder {
                    child: e.child.clone(),
                    got: e.ts,
                    newest,
                });
            }
        }
        if entry.event_file.is_none() {
            fs::create_dir_all(&dir).map_err(io_err(&dir))?;
            let path = dir.join("events.log");
            let file = fs::OpenOptions::new()
                .create(true)
                .append(true)
                .open(&path)
                .map_err(io_err(&path))?;
            entry.event_file = Some(file);
        }
        let file = entry.event_file.as_mut().unwrap();
        let line = format!("{}\n", encode_event(e));
        file.write_all(line.as_bytes())
            .and_then(|()| file.flush())
            .map_err(io_err(&dir))?;
        entry.newest_ts = Some(e.ts);
        entry.events.push(e.clone());
        Ok(())
    }

    /// All stored events for `child` with `t0 <= ts <= t1`, in stored order.
    pub fn query_window(
        &self,
        child: &ChildId,
        t0: Timestamp,
        t1: Timestamp,
    ) -> Result<Vec<BehaviorEvent>, StoreError> {
        if t0 > t1 {
            return Err(StoreError::InvertedRange { t0, t1 });
        }
        Ok(self
            .children
            .get(child)
            .map(|c| {
                c.events
                    .iter()
                    .filter(|e| e.ts >= t0 && e.ts <= t1)
                    .cloned()
                    .collect()
            })
            .unwrap_or_default())
    }

    /// Every stored event for `child`, in append order.
    pub fn events(&self, child: &ChildId) -> &[BehaviorEvent] {
        self.children
            .get(child)
            .map(|c| c.events.as_slice())
            .unwrap_or_default()
    }

    // -- models --------------------------------------------------------------

    /// Writes `model` to `<root>/models/<name>.model`.
    pub fn save_model(&self, name: &str, model: &MlpModel) -> Result<PathBuf, StoreError> {
        let dir = self.root.join("models");
        fs::create_dir_all(&dir).map_err(io_err(&dir))?;
        let path = dir.join(format!("{name}.model"));
        save_model(&path, model)?;
        Ok(path)
    }

    pub fn load_model(&self, name: &str) -> Result<MlpModel, StoreError> {
        load_model(&self.root.join("models").join(format!("{name}.model")))
    }

    pub fn has_model(&self, name: &str) -> bool {
        self.root
            .join("models")
            .join(format!("{name}.model"))
            .is_file()
    }

    // -- alerts, summaries, baselines ----------------------------------------

    /// Records one alert outcome; returns its per-child id.
    pub fn record_alert(
        &mut self,
        alert: Alert,
        dispatched_at: Option<Timestamp>,
        transport_results: Vec<(String, bool)>,
    ) -> Result<u64, StoreError> {
        let dir = self.child_dir(&alert.child);
        let entry = self.child_mut(&alert.child);
        let record = AlertRecord {
            id: entry.alerts.len() as u64,
            alert,
            dispatched_at,
            transport_results,
        };
        append_jsonl(&dir.join("alerts.log"), &record)?;
        entry.alerts.push(record.clone());
        Ok(record.id)
    }

    pub fn alert(&self, child: &ChildId, id: u64) -> Option<&AlertRecord> {
        self.children.get(child)?.alerts.get(id as usize)
    }

    pub fn alerts(&self, child: &ChildId) -> &[AlertRecord] {
        self.children
            .get(child)
            .map(|c| c.alerts.as_slice())
            .unwrap_or_default()
    }

    /// Appends one prediction summary; summaries list in insertion order.
    pub fn record_summary(&mut self, summary: AssessmentSummary) -> Result<(), StoreError> {
        let dir = self.child_dir(&summary.child);
        append_jsonl(&dir.join("summaries.log"), &summary)?;
        self.child_mut(&summary.child).summaries.push(summary);
        Ok(())
    }

    pub fn summaries(&self, child: &ChildId) -> &[AssessmentSummary] {
        self.children
            .get(child)
            .map(|c| c.summaries.as_slice())
            .unwrap_or_default()
    }

    pub fn set_baseline(&mut self, child: &ChildId, baseline: Distribution) {
        self.child_mut(child).baseline = Some(baseline);
    }

    pub fn baseline(&self, child: &ChildId) -> Option<&Distribution> {
        self.children.get(child)?.baseline.as_ref()
    }

    // -- familiar voices -----------------------------------------------------

    /// Registers a familiar voice; names are unique.
    pub fn register_familiar_voice(&mut self, voice: FamiliarVoice) -> Result<(), StoreError> {
        if self.voices.iter().any(|v| v.name == voice.name) {
            return Err(StoreError::DuplicateVoice(voice.name));
        }
        append_jsonl(&self.root.join("voices.cfg"), &voice)?;
        self.voices.push(voice);
        Ok(())
    }

    pub fn familiar_voices(&self) -> &[FamiliarVoice] {
        &self.voices
    }

    // -- schedule --------------------------------------------------------------

    pub fn schedule(&self) -> &Schedule {
        &self.schedule
    }

    pub fn set_schedule(&mut self, schedule: Schedule) -> Result<(), StoreError> {
        let schedule = Schedule::new(schedule.quiet_windows)?;
        let path = self.root.join("schedule.cfg");
        let text = serde_json::to_string(&schedule).expect("schedule serializes");
        fs::write(&path, text + "\n").map_err(io_err(&path))?;
        self.schedule = schedule;
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// file helpers
// ---------------------------------------------------------------------------

/// Reads one event log; the file must satisfy per-child ordering.
pub fn read_event_log(path: &Path) -> Result<Vec<BehaviorEvent>, StoreError> {
    let file = fs::File::open(path).map_err(io_err(path))?;
    let mut events = Vec::new();
    for (i, line) in std::io::BufReader::new(file).lines().enumerate() {
        let line = line.map_err(io_err(path))?;
        let e = decode_event(&line).map_err(|err| StoreError::Malformed {
            path: path.to_path_buf(),
            line: i + 1,
            message: err.to_string(),
        })?;
        events.push(e);
    }
    Ok(events)
}

/// Writes a whole event log (used by the CLI to materialize streams).
pub fn write_event_log(path: &Path, events: &[BehaviorEvent]) -> Result<(), StoreError> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(io_err(parent))?;
    }
    let mut out = String::new();
    for e in events {
        out.push_str(&encode_event(e));
        out.push('\n');
    }
    fs::write(path, out).map_err(io_err(path))
}

fn append_jsonl<T: serde::Serialize>(path: &Path, value: &T) -> Result<(), StoreError> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(io_err(parent))?;
    }
    let mut file = fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(io_err(path))?;
    let line = serde_json::to_string(value).expect("record serializes");
    file.write_all(line.as_bytes())
        .and_then(|()| file.write_all(b"\n"))
        .and_then(|()| file.flush())
        .map_err(io_err(path))
}

fn read_jsonl<T: serde::de::DeserializeOwned>(path: &Path) -> Result<Vec<T>, StoreError> {
    let file = fs::File::open(path).map_err(io_err(path))?;
    let mut out = Vec::new();
    for (i, line) in std::io::BufReader::new(file).lines().enumerate() {
        let line = line.map_err(io_err(path))?;
        if line.trim().is_empty() {
            continue;
        }
        let v = serde_json::from_str(&line).map_err(|e| StoreError::Malformed {
            path: path.to_path_buf(),
            line: i + 1,
            message: e.to_string(),
        })?;
        out.push(v);
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// model files
// ---------------------------------------------------------------------------

const MODEL_MAGIC: &str = "toykit-model v1";

/// Saves a model as versioned text. Identical models produce identical
/// bytes, and floats round-trip exactly (shortest decimal form).
pub fn save_model(path: &Path, model: &MlpModel) -> Result<(), StoreError> {
    let mut out = String::new();
    out.push_str(MODEL_MAGIC);
    out.push('\n');
    out.push_str(&format!("seed {}\n", model.seed));
    out.push_str(&format!(
        "layers {} {} {}\n",
        model.layer_sizes[0], model.layer_sizes[1], model.layer_sizes[2]
    ));
    let write_matrix = |out: &mut String, tag: &str, m: &[Vec<f64>]| {
        for row in m {
            out.push_str(tag);
            for v in row {
                out.push_str(&format!(" {v}"));
            }
            out.push('\n');
        }
    };
    let write_vec = |out: &mut String, tag: &str, v: &[f64]| {
        out.push_str(tag);
        for x in v {
            out.push_str(&format!(" {x}"));
        }
        out.push('\n');
    };
    write_matrix(&mut out, "w1", &model.w1);
    write_vec(&mut out, "b1", &model.b1);
    write_matrix(&mut out, "w2", &model.w2);
    write_vec(&mut out, "b2", &model.b2);
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(io_err(parent))?;
    }
    fs::write(path, out).map_err(io_err(path))
}

/// Loads a model file written by [`save_model`]. A version mismatch or any
/// malformed content fails without producing a partial model.
pub fn load_model(path: &Path) -> Result<MlpModel, StoreError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let malformed = |line: usize, message: &str| StoreError::Malformed {
        path: path.to_path_buf(),
        line,
        message: message.to_string(),
    };
    let mut lines = text.lines().enumerate();
    let (_, magic) = lines.next().ok_or_else(|| malformed(1, "empty file"))?;
    if magic != MODEL_MAGIC {
        return Err(StoreError::ModelVersion {
            path: path.to_path_buf(),
            found: magic.to_string(),
            want: MODEL_MAGIC.to_string(),
        });
    }

    let mut seed = 0u64;
    let mut layers = [0usize; 3];
    let mut w1: Vec<Vec<f64>> = Vec::new();
    let mut b1: Vec<f64> = Vec::new();
    let mut w2: Vec<Vec<f64>> = Vec::new();
    let mut b2: Vec<f64> = Vec::new();

    for (i, line) in lines {
        let lineno = i + 1;
        let mut parts = line.split_whitespace();
        let tag = parts
            .next()
            .ok_or_else(|| malformed(lineno, "blank line"))?;
        let floats = |parts: std::str::SplitWhitespace| -> Result<Vec<f64>, StoreError> {
            parts
                .map(|t| {
                    t.parse::<f64>()
                        .map_err(|_| malformed(lineno, &format!("bad float `{t}`")))
                })
                .collect()
        };
        match tag {
            "seed" => {
                seed = parts
                    .next()
                    .and_then(|t| t.parse().ok())
                    .ok_or_else(|| malformed(lineno, "bad seed"))?;
            }
            "layers" => {
                for slot in &mut layers {
                    *slot = parts
                        .next()
                        .and_then(|t| t.parse().ok())
                        .ok_or_else(|| malformed(lineno, "bad layer sizes"))?;
                }
            }
            "w1" => w1.push(floats(parts)?),
            "b1" => b1 = floats(parts)?,
            "w2" => w2.push(floats(parts)?),
            "b2" => b2 = floats(parts)?,
            other => return Err(malformed(lineno, &format!("unknown tag `{other}`"))),
        }
    }

    let shape_ok = w1.len() == layers[1]
        && w1.iter().all(|r| r.len() == layers[0])
        && b1.len() == layers[1]
        && w2.len() == layers[2]
        && w2.iter().all(|r| r.len() == layers[1])
        && b2.len() == layers[2]
        && layers[2] == EmotionLabel::COUNT;
    if !shape_ok {
        return Err(malformed(0, "parameter shapes do not match layer sizes"));
    }
    Ok(MlpModel {
        layer_sizes: layers,
        w1,
        b1,
        w2,
        b2,
        seed,
    })
}

// ---------------------------------------------------------------------------
// dataset files
// ---------------------------------------------------------------------------

#[derive(serde::Serialize, serde::Deserialize)]
struct DatasetRecord {
    #[serde(flatten)]
    features: FeatureVector,
    label: EmotionLabel,
}

/// Writes a labelled dataset, one JSON record per line.
pub fn save_dataset(
    path: &Path,
    dataset: &[(FeatureVector, EmotionLabel)],
) -> Result<(), StoreError> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(io_err(parent))?;
    }
    let mut out = String::new();
    for (features, label) in dataset {
        let record = DatasetRecord {
            features: features.clone(),
            label: *label,
        };
        out.push_str(&serde_json::to_string(&record).expect("record serializes"));
        out.push('\n');
    }
    fs::write(path, out).map_err(io_err(path))
}

/// Reads a dataset written by [`save_dataset`].
pub fn load_dataset(path: &Path) -> Result<Vec<(FeatureVector, EmotionLabel)>, StoreError> {
    let records: Vec<DatasetRecord> = read_jsonl(path)?;
    Ok(records.into_iter().map(|r| (r.features, r.label)).collect())
}
