//! Runtime checker: evaluates behavioural authorization policies over a
//! per-child event stream and detects abnormal physical patterns.
//!
//! State per child:
//!
//! - active scopes — maintained by `ScopeChange` events; a policy's
//!   `fin(...)` gate holds while every token is active (with the matching
//!   qualifier when the policy names one).
//! - completion ledger — per policy, the most recent `ModuleDone` for each
//!   bound module whose action equals the policy's `done` action. Entries
//!   are cleared when the policy fires, so firing is edge-triggered: a new
//!   completion per module is required before the policy can fire again.
//! - pattern window — `PatternEvent`s within the last `w_pat_ms`
//!   milliseconds. Ingesting a pattern event reports an [`AbnormalPattern`]
//!   when at least `r_min` same-kind events lie in the window; rate limiting
//!   across reports is the alert dispatcher's job.
//!
//! Replaying an identical event sequence through a fresh checker yields an
//! identical output sequence. Events must arrive in non-decreasing timestamp
//! order per child; out-of-order events are rejected, not buffered.

use crate::event::{
    validate_event, BehaviorEvent, ChildId, EventPayload, PatternKind, Timestamp, Violation,
};
use crate::policy::{validate_policy_set, PolicyAst, PolicySet};
use std::collections::{HashMap, VecDeque};
use std::fmt;

/// Checker tuning. The defaults exercise both firing and non-firing paths
/// in the shipped scenarios.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct CheckerConfig {
    /// Freshness window for `done` completions, in ms.
    pub w_bind_ms: u64,
    /// Width of the abnormal-pattern window, in ms.
    pub w_pat_ms: u64,
    /// Minimum same-kind repetitions inside the window to report a pattern.
    pub r_min: u32,
}

impl Default for CheckerConfig {
    fn default() -> Self {
        CheckerConfig {
            w_bind_ms: 30_000,
            w_pat_ms: 10_000,
            r_min: 3,
        }
    }
}

/// Emitted when a policy fires: the policy's outcome plus its resolved
/// authorize arguments.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AuthorizationDirective {
    pub ts: Timestamp,
    pub child: ChildId,
    pub policy: String,
    /// Authorize args in declaration order, resolved alias → module.
    pub args: Vec<(String, String)>,
    pub outcome: String,
    /// The policy's `t=` token list, carried verbatim for traceability.
    pub bound_tokens: Vec<String>,
}

impl AuthorizationDirective {
    /// Transcript form: `ts child DIRECTIVE policy outcome alias=module,...`
    pub fn transcript_line(&self) -> String {
        let args = self
            .args
            .iter()
            .map(|(alias, module)| format!("{alias}={module}"))
            .collect::<Vec<_>>()
            .join(",");
        format!(
            "{} {} DIRECTIVE {} {} {}",
            self.ts, self.child, self.policy, self.outcome, args
        )
    }
}

/// Repeated same-kind physical events inside one pattern window.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AbnormalPattern {
    pub ts: Timestamp,
    pub child: ChildId,
    pub kind: PatternKind,
    /// Number of same-kind events inside the reported span; equals
    /// `evidence.len()` and is at least the configured `r_min`.
    pub count: u32,
    /// Milliseconds between the oldest and newest evidence event.
    pub span_ms: u64,
    /// Timestamps of the matching events, oldest first.
    pub evidence: Vec<Timestamp>,
}

impl fmt::Display for AbnormalPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {} PATTERN {} count={} span={}ms",
            self.ts, self.child, self.kind, self.count, self.span_ms
        )
    }
}

/// One checker output, in emission order.
#[derive(Debug, Clone, PartialEq)]
pub enum CheckerOutput {
    Directive(AuthorizationDirective),
    Pattern(AbnormalPattern),
}

#[derive(Debug, Clone, thiserror::Error, PartialEq)]
pub enum CheckerError {
    #[error("invalid policy set: {0}")]
    InvalidPolicySet(String),
    #[error("invalid event: {0}")]
    InvalidEvent(Violation),
    #[error("out-of-order event for child {child}: {got} after {newest}")]
    OutOfOrder {
        child: ChildId,
        got: Timestamp,
        newest: Timestamp,
    },
}

#[derive(Debug, Clone, Default)]
struct ChildState {
    newest_ts: Option<Timestamp>,
    /// scope name → qualifier it was activated with.
    active_scopes: HashMap<String, Option<String>>,
    /// Per policy: bound module → timestamp of its freshest matching completion.
    ledger: Vec<HashMap<String, Timestamp>>,
    window: VecDeque<(Timestamp, PatternKind)>,
    fired: Vec<u64>,
}

impl ChildState {
    fn new(policy_count: usize) -> Self {
        ChildState {
            ledger: vec![HashMap::new(); policy_count],
            fired: vec![0; policy_count],
            ..Default::default()
        }
    }
}

/// Multi-child checker; per-child state is created lazily on first event.
/// Events for one child must be ingested sequentially; different children
/// are independent.
#[derive(Debug, Clone)]
pub struct Checker {
    policies: PolicySet,
    config: CheckerConfig,
    children: HashMap<ChildId, ChildState>,
}

impl Checker {
    /// Rejects policy sets with validation violations (duplicate names,
    /// unbound aliases, ...). An empty set is fine: the checker then only
    /// does pattern detection.
    pub fn new(policies: PolicySet, config: CheckerConfig) -> Result<Checker, CheckerError> {
        let violations = validate_policy_set(&policies);
        if !violations.is_empty() {
            let msg = violations
                .iter()
                .map(|v| v.to_string())
                .collect::<Vec<_>>()
                .join("; ");
            return Err(CheckerError::InvalidPolicySet(msg));
        }
        Ok(Checker {
            policies,
            config,
            children: HashMap::new(),
        })
    }

    pub fn policies(&self) -> &PolicySet {
        &self.policies
    }

    pub fn config(&self) -> &CheckerConfig {
        &self.config
    }

    /// How many times `policy` has fired for `child`.
    pub fn fired_count(&self, child: &ChildId, policy: &str) -> u64 {
        let Some(idx) = self.policies.policies.iter().position(|p| p.name == policy) else {
            return 0;
        };
        self.children.get(child).map(|s| s.fired[idx]).unwrap_or(0)
    }

    /// Scopes currently active for `child`, with their activation qualifiers.
    pub fn active_scopes(&self, child: &ChildId) -> Vec<(String, Option<String>)> {
        let mut scopes: Vec<_> = self
            .children
            .get(child)
            .map(|s| {
                s.active_scopes
                    .iter()
                    .map(|(k, v)| (k.clone(), v.clone()))
                    .collect()
            })
            .unwrap_or_default();
        scopes.sort();
        scopes
    }

    /// Ingests one event and returns everything it caused: directives first,
    /// in policy declaration order, then pattern reports.
    pub fn ingest(&mut self, e: &BehaviorEvent) -> Result<Vec<CheckerOutput>, CheckerError> {
        validate_event(e).map_err(CheckerError::InvalidEvent)?;
        let policy_count = self.policies.len();
        let state = self
            .children
            .entry(e.child.clone())
            .or_insert_with(|| ChildState::new(policy_count));
        if let Some(newest) = state.newest_ts {
            if e.ts < newest {
                return Err(CheckerError::OutOfOrder {
                    child: e.child.clone(),
                    got: e.ts,
                    newest,
                });
            }
        }
        state.newest_ts = Some(e.ts);

        // Window invariant: only events within w_pat of the newest ts.
        let cutoff = e.ts.saturating_sub(self.config.w_pat_ms);
        while state.window.front().is_some_and(|(ts, _)| *ts < cutoff) {
            state.window.pop_front();
        }

        let mut pattern_kind = None;
        match &e.payload {
            EventPayload::ScopeChange {
                scope,
                qualifier,
                active,
            } => {
                if *active {
                    state.active_scopes.insert(scope.clone(), qualifier.clone());
                } else {
                    state.active_scopes.remove(scope);
                }
            }
            EventPayload::ModuleDone { module, action, .. } => {
                for (idx, p) in self.policies.policies.iter().enumerate() {
                    if p.done_clause.action == *action
                        && p.bindings.iter().any(|b| b.module == *module)
                    {
                        state.ledger[idx].insert(module.clone(), e.ts);
                    }
                }
            }
            EventPayload::PatternEvent { kind } => {
                state.window.push_back((e.ts, *kind));
                pattern_kind = Some(*kind);
            }
            _ => {}
        }

        let mut outputs = Vec::new();
        for idx in 0..self.policies.len() {
            let p = &self.policies.policies[idx];
            if let Some(d) = evaluate(p, idx, state, e.ts, &e.child, &self.config) {
                outputs.push(CheckerOutput::Directive(d));
            }
        }
        if let Some(kind) = pattern_kind {
            if let Some(p) = scan_window(state, kind, e.ts, &e.child, &self.config) {
                outputs.push(CheckerOutput::Pattern(p));
            }
        }
        Ok(outputs)
    }

    /// Evaluates one policy for `child` at that child's newest timestamp.
    /// Firing clears the policy's ledger entries, exactly as during ingest.
    pub fn evaluate_policy(
        &mut self,
        child: &ChildId,
        policy: &str,
    ) -> Option<AuthorizationDirective> {
        let idx = self
            .policies
            .policies
            .iter()
            .position(|p| p.name == policy)?;
        let state = self.children.get_mut(child)?;
        let now = state.newest_ts?;
        evaluate(
            &self.policies.policies[idx],
            idx,
            state,
            now,
            child,
            &self.config,
        )
    }

    /// Reports, per pattern kind, whether at least `r_min` same-kind events
    /// lie within the window of width `w_pat_ms` ending at `now`. At most
    /// one report per kind per call.
    pub fn detect_patterns(&self, child: &ChildId, now: Timestamp) -> Vec<AbnormalPattern> {
        let Some(state) = self.children.get(child) else {
            return Vec::new();
        };
        PatternKind::ALL
            .iter()
            .filter_map(|&kind| scan_window(state, kind, now, child, &self.config))
            .collect()
    }
}

fn evaluate(
    p: &PolicyAst,
    idx: usize,
    state: &mut ChildState,
    now: Timestamp,
    child: &ChildId,
    config: &CheckerConfig,
) -> Option<AuthorizationDirective> {
    // (a) every fin token active, with the policy's qualifier when present
    let gate_open = p.fin_scope.tokens.iter().all(|token| {
        state.active_scopes.get(token).is_some_and(|activated| {
            p.fin_scope
                .qualifier
                .as_ref()
                .is_none_or(|want| activated.as_ref() == Some(want))
        })
    });
    if !gate_open {
        return None;
    }
    // (b) a fresh completion from every bound module
    let fresh = !p.bindings.is_empty()
        && p.bindings.iter().all(|b| {
            state.ledger[idx]
                .get(&b.module)
                .is_some_and(|done_ts| now.millis() - done_ts.millis() <= config.w_bind_ms)
        });
    if !fresh {
        return None;
    }
    state.ledger[idx].clear();
    state.fired[idx] += 1;
    let args = p
        .authorize
        .args
        .iter()
        .map(|alias| {
            let module = p.module_for_alias(alias).unwrap_or_default().to_string();
            (alias.clone(), module)
        })
        .collect();
    Some(AuthorizationDirective {
        ts: now,
        child: child.clone(),
        policy: p.name.clone(),
        args,
        outcome: p.authorize.outcome.clone(),
        bound_tokens: p.done_clause.bound_tokens.clone(),
    })
}

fn scan_window(
    state: &ChildState,
    kind: PatternKind,
    now: Timestamp,
    child: &ChildId,
    config: &CheckerConfig,
) -> Option<AbnormalPattern> {
    let cutoff = now.saturating_sub(config.w_pat_ms);
    let evidence: Vec<Timestamp> = state
        .window
        .iter()
        .filter(|(ts, k)| *k == kind && *ts >= cutoff && *ts <= now)
        .map(|(ts, _)| *ts)
        .collect();
    if (evidence.len() as u32) < config.r_min {
        return None;
    }
    let span_ms = evidence.last().unwrap().millis() - evidence.first().unwrap().millis();
    Some(AbnormalPattern {
        ts: now,
        child: child.clone(),
        kind,
        count: evidence.len() as u32,
        span_ms,
        evidence,
    })
}
