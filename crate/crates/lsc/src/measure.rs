//! The head measure of shallow terms and trace instrumentation for the
//! quadratic bound on linear head reduction.
//!
//! The measure counts, statically, the chain of substitutions that will
//! act on the head: it equals the exact length of the maximal sequence
//! of head linear substitution steps from the term.

use crate::name::Name;
use crate::reduce::{RuleLabel, Trace};
use crate::term::{Term, TermNode};

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum MeasureError {
    #[error("head measure is defined on shallow terms only")]
    NotShallow,
    #[error("trace contains rule {0:?}; only head-dB and head-ls are allowed")]
    ForeignRule(RuleLabel),
}

/// Is `t` of the form `HH[x]` for a hereditary head context `HH` that
/// does not capture `x`?
///
/// Grammar: `HH ::= H | HH'[y][y/H]` — either `x` sits under a plain
/// head context, or the term is a substitution `b[y/a]` whose body has
/// `y` in hereditary head position and whose argument has `x` under a
/// head context.
pub fn is_hh_occurrence(t: &Term, x: &Name) -> bool {
    match t.node() {
        TermNode::Var(z) => z == x,
        TermNode::Abs(y, b) => y != x && is_hh_occurrence(b, x),
        TermNode::App(f, _) => is_hh_occurrence(f, x),
        TermNode::Sub(b, y, a) => {
            (y != x && is_hh_occurrence(b, x))
                || (is_hh_occurrence(b, y) && head_occurrence(a, x))
        }
    }
}

/// Is `t = H[x]` for a plain head context not capturing `x`?
fn head_occurrence(t: &Term, x: &Name) -> bool {
    match t.node() {
        TermNode::Var(z) => z == x,
        TermNode::Abs(y, b) => y != x && head_occurrence(b, x),
        TermNode::App(f, _) => head_occurrence(f, x),
        TermNode::Sub(b, y, _) => y != x && head_occurrence(b, x),
    }
}

/// The head measure of a shallow term: each substitution contributes 1
/// exactly when its binder is a hereditary head occurrence of its body.
pub fn head_measure(t: &Term) -> Result<u64, MeasureError> {
    if !t.is_shallow() {
        return Err(MeasureError::NotShallow);
    }
    Ok(measure_unchecked(t))
}

fn measure_unchecked(t: &Term) -> u64 {
    match t.node() {
        TermNode::Var(_) => 0,
        TermNode::Abs(_, b) => measure_unchecked(b),
        TermNode::App(f, _) => measure_unchecked(f),
        TermNode::Sub(b, x, _) => {
            measure_unchecked(b) + if is_hh_occurrence(b, x) { 1 } else { 0 }
        }
    }
}

/// Counters certifying the quadratic theorem on a linear head trace:
/// `total = mult + expo` and `total <= mult^2 + mult`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub struct TraceStats {
    pub total: u64,
    pub mult: u64,
    pub expo: u64,
    /// Number of maximal nonempty multiplicative blocks (the k of the
    /// proof decomposition), reported for diagnostics.
    pub phases: u64,
    pub quadratic_ok: bool,
}

/// Summarize a linear head trace. Rules other than head-dB / head-ls
/// are rejected.
pub fn trace_stats(trace: &Trace) -> Result<TraceStats, MeasureError> {
    let mut mult = 0u64;
    let mut expo = 0u64;
    let mut phases = 0u64;
    let mut in_db_run = false;
    for (s, _) in &trace.steps {
        match s.rule {
            RuleLabel::HeadDB => {
                mult += 1;
                if !in_db_run {
                    phases += 1;
                    in_db_run = true;
                }
            }
            RuleLabel::HeadLS => {
                expo += 1;
                in_db_run = false;
            }
            other => return Err(MeasureError::ForeignRule(other)),
        }
    }
    let total = mult + expo;
    Ok(TraceStats { total, mult, expo, phases, quadratic_ok: total <= mult * mult + mult })
}

pub fn stats_to_json(stats: &TraceStats) -> serde_json::Value {
    serde_json::json!({
        "total": stats.total,
        "mult": stats.mult,
        "expo": stats.expo,
        "phases": stats.phases,
        "quadratic_ok": stats.quadratic_ok,
    })
}
