//! Behavioural authorization policy language.
//!
//! A policy guards an actuation outcome behind two conditions: a set of
//! `fin(...)` scope tokens that must currently be active for the child, and
//! a `done(...)` clause requiring every bound module to have reported a
//! fresh completion of the policy's action. When both hold, the checker
//! emits the `authorize+(...)` outcome.
//!
//! ```text
//! policy Policy4 {
//!   fin(ChildBehaviour);
//!   bind MaleVoice as MV;
//!   bind FemaleVoice as FV;
//!   all i=0..t=MaleVoice,FemaleVoice done(MV,FV,Submit);
//!   authorize+(MV,FV,VoiceModulation);
//! }
//! ```
//!
//! This module owns the surface syntax ([`parse_policy`]), structural
//! validation ([`validate_policy`]), the canonical renderer
//! ([`render_policy`], inverse of the parser on valid ASTs) and the five
//! built-in policies ([`builtin_policies`]).

mod lex;
mod parse;
mod render;

pub use lex::{ParseError, Pos};
pub use parse::{parse_policy, parse_policy_set};
pub use render::{render_policy, render_policy_set};

use std::collections::HashSet;
use std::fmt;

/// The `fin(tokens[:qualifier])` guard clause.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FinScope {
    pub tokens: Vec<String>,
    pub qualifier: Option<String>,
}

/// One `bind <module> as <alias>;` clause.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Binding {
    pub module: String,
    pub alias: String,
}

/// The `all i=<lower>..t=<bound_tokens> done(<args>, <action>);` clause.
///
/// `bound_tokens` is kept verbatim and not evaluated; the built-in policies
/// use it inconsistently (module names in some, a condition word in others),
/// so it serves as documentation carried through to fired directives.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DoneClause {
    pub lower: u64,
    pub bound_tokens: Vec<String>,
    pub args: Vec<String>,
    pub action: String,
}

/// The `authorize+(<args>, <outcome>);` consequence clause.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AuthorizeClause {
    pub args: Vec<String>,
    pub outcome: String,
}

/// Parsed form of one policy. Fields mirror the surface syntax exactly;
/// see [`validate_policy`] for the cross-clause invariants.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolicyAst {
    pub name: String,
    pub fin_scope: FinScope,
    pub bindings: Vec<Binding>,
    pub done_clause: DoneClause,
    pub authorize: AuthorizeClause,
}

impl PolicyAst {
    /// Module bound to `alias`, if any.
    pub fn module_for_alias(&self, alias: &str) -> Option<&str> {
        self.bindings
            .iter()
            .find(|b| b.alias == alias)
            .map(|b| b.module.as_str())
    }
}

/// An ordered collection of policies with unique names.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PolicySet {
    pub policies: Vec<PolicyAst>,
}

impl PolicySet {
    pub fn len(&self) -> usize {
        self.policies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.policies.is_empty()
    }

    pub fn get(&self, name: &str) -> Option<&PolicyAst> {
        self.policies.iter().find(|p| p.name == name)
    }
}

/// A structural rule the AST breaks. Violations are values, not faults.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PolicyViolation {
    /// An alias used in `done` or `authorize+` has no `bind`.
    UnboundAlias { clause: &'static str, alias: String },
    /// Two bindings introduce the same alias.
    DuplicateAlias { alias: String },
    /// The conjunction lower bound must be 0 (nonzero is reserved).
    NonzeroLowerBound { found: u64 },
    /// Two policies in one set share a name.
    DuplicateName { name: String },
}

impl fmt::Display for PolicyViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PolicyViolation::UnboundAlias { clause, alias } => {
                write!(f, "unbound alias `{alias}` in {clause}")
            }
            PolicyViolation::DuplicateAlias { alias } => write!(f, "duplicate alias `{alias}`"),
            PolicyViolation::NonzeroLowerBound { found } => {
                write!(f, "done lower bound must be 0, found {found}")
            }
            PolicyViolation::DuplicateName { name } => write!(f, "duplicate policy name `{name}`"),
        }
    }
}

/// Checks the AST invariants; the list is empty iff the policy is valid.
///
/// - every alias used in `done` args and `authorize+` args is bound
/// - binding aliases are pairwise distinct
/// - the `done` lower bound is 0
pub fn validate_policy(ast: &PolicyAst) -> Vec<PolicyViolation> {
    let mut violations = Vec::new();
    let mut seen = HashSet::new();
    for b in &ast.bindings {
        if !seen.insert(b.alias.as_str()) {
            violations.push(PolicyViolation::DuplicateAlias {
                alias: b.alias.clone(),
            });
        }
    }
    for alias in &ast.done_clause.args {
        if !seen.contains(alias.as_str()) {
            violations.push(PolicyViolation::UnboundAlias {
                clause: "done",
                alias: alias.clone(),
            });
        }
    }
    for alias in &ast.authorize.args {
        if !seen.contains(alias.as_str()) {
            violations.push(PolicyViolation::UnboundAlias {
                clause: "authorize",
                alias: alias.clone(),
            });
        }
    }
    if ast.done_clause.lower != 0 {
        violations.push(PolicyViolation::NonzeroLowerBound {
            found: ast.done_clause.lower,
        });
    }
    violations
}

/// Validates every policy in the set plus name uniqueness across the set.
pub fn validate_policy_set(set: &PolicySet) -> Vec<PolicyViolation> {
    let mut violations = Vec::new();
    let mut names = HashSet::new();
    for p in &set.policies {
        if !names.insert(p.name.as_str()) {
            violations.push(PolicyViolation::DuplicateName {
                name: p.name.clone(),
            });
        }
        violations.extend(validate_policy(p));
    }
    violations
}

/// Source text of the five built-in policies, as shipped.
pub const BUILTIN_POLICY_SRC: &str = include_str!("../../assets/policies/builtin.pol");

/// The five built-in behavioural authorization policies, `Policy1`..`Policy5`.
///
/// Parsed from [`BUILTIN_POLICY_SRC`]; always valid.
pub fn builtin_policies() -> PolicySet {
    let set = parse_policy_set(BUILTIN_POLICY_SRC).expect("built-in policy source parses");
    debug_assert!(validate_policy_set(&set).is_empty());
    set
}
