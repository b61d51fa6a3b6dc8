//! Redex enumeration and stepping for the seven reduction relations,
//! normalization with traces, unfolding, linear unfolding, and the
//! projection/simulation constructions relating head reduction on pure
//! terms to linear head reduction on terms with substitutions.

use crate::name::Name;
use crate::term::{rename_binder, subst, Occurrence, Step, Term, TermNode};
use std::collections::BTreeMap;
use std::collections::HashMap;

/// The reduction rules.
///
/// `Beta`/`HeadBeta` live on pure lambda-terms; the rest act on terms
/// with explicit substitutions. `DB` is beta at a distance, the
/// multiplicative step; `LS` substitutes a single variable occurrence;
/// `GC` collects an unused substitution. The `Head*` variants restrict
/// the context: pure head contexts for `HeadBeta`, head contexts for
/// `HeadDB`/`HeadLS` (linear head reduction is their union).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RuleLabel {
    Beta,
    HeadBeta,
    DB,
    LS,
    GC,
    HeadDB,
    HeadLS,
}

impl RuleLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            RuleLabel::Beta => "beta",
            RuleLabel::HeadBeta => "head-beta",
            RuleLabel::DB => "dB",
            RuleLabel::LS => "ls",
            RuleLabel::GC => "gc",
            RuleLabel::HeadDB => "head-dB",
            RuleLabel::HeadLS => "head-ls",
        }
    }

    pub fn from_str_label(s: &str) -> Option<RuleLabel> {
        Some(match s {
            "beta" => RuleLabel::Beta,
            "head-beta" => RuleLabel::HeadBeta,
            "dB" => RuleLabel::DB,
            "ls" => RuleLabel::LS,
            "gc" => RuleLabel::GC,
            "head-dB" => RuleLabel::HeadDB,
            "head-ls" => RuleLabel::HeadLS,
            _ => return None,
        })
    }

    /// Multiplicative rules (beta-at-a-distance and plain beta).
    pub fn is_mult(self) -> bool {
        matches!(
            self,
            RuleLabel::Beta | RuleLabel::HeadBeta | RuleLabel::DB | RuleLabel::HeadDB
        )
    }

    pub fn is_ls(self) -> bool {
        matches!(self, RuleLabel::LS | RuleLabel::HeadLS)
    }

    fn needs_pure(self) -> bool {
        matches!(self, RuleLabel::Beta | RuleLabel::HeadBeta)
    }
}

/// One reduction step: the rule, the path to the pattern root, and for
/// `LS`/`HeadLS` the path (relative to the pattern root) of the variable
/// occurrence being rewritten.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReductionStep {
    pub rule: RuleLabel,
    pub redex: Occurrence,
    pub var_occ: Option<Occurrence>,
}

impl ReductionStep {
    fn sort_key(&self) -> (Vec<u8>, Vec<u8>, u8) {
        (
            self.redex.preorder_key(),
            self.var_occ.as_ref().map(|o| o.preorder_key()).unwrap_or_default(),
            self.rule as u8,
        )
    }
}

/// An ordered record of steps from an initial term, with per-rule
/// counters. `mult_count` is the number of multiplicative steps, the
/// quantity every bound in the cost analysis is measured against.
#[derive(Clone, Debug)]
pub struct Trace {
    pub initial: Term,
    pub steps: Vec<(ReductionStep, u64)>,
    pub counts: BTreeMap<RuleLabel, u64>,
}

impl Trace {
    pub fn new(initial: Term) -> Trace {
        Trace { initial, steps: Vec::new(), counts: BTreeMap::new() }
    }

    pub fn push(&mut self, step: ReductionStep, result_size: u64) {
        *self.counts.entry(step.rule).or_insert(0) += 1;
        self.steps.push((step, result_size));
    }

    pub fn len(&self) -> u64 {
        self.steps.len() as u64
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn count(&self, rule: RuleLabel) -> u64 {
        self.counts.get(&rule).copied().unwrap_or(0)
    }

    pub fn mult_count(&self) -> u64 {
        self.count(RuleLabel::DB) + self.count(RuleLabel::HeadDB)
    }

    /// Every intermediate term, the initial one included. Errors if the
    /// recorded steps do not replay.
    pub fn replay(&self) -> Result<Vec<Term>, ReduceError> {
        let mut terms = vec![self.initial.clone()];
        for (step, _) in &self.steps {
            let next = apply_step(terms.last().unwrap(), step)?;
            terms.push(next);
        }
        Ok(terms)
    }
}

#[derive(Clone, Debug)]
pub struct Normalized {
    pub term: Term,
    pub trace: Trace,
}

/// Redex selection policy. The relations themselves are diamond, so
/// the policy only fixes which of the equal-length reductions is taken.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Policy {
    LeftmostOutermost,
    LsFirst,
    DbFirst,
}

#[derive(Debug, thiserror::Error)]
pub enum ReduceError {
    #[error("beta reduction is defined on pure lambda-terms only")]
    NotPure,
    #[error("step limit exceeded after {} steps", .0.trace.len())]
    StepLimit(Box<Normalized>),
    #[error("stale step: the recorded redex no longer matches the term")]
    StaleStep,
    #[error("unfolding exceeds the node cap ({cap})")]
    NodeCap { cap: u64 },
    #[error("trace uses rule {0:?}, not permitted here")]
    ForeignRule(RuleLabel),
    #[error("trace does not replay from the given term")]
    NotReplayable,
}

/// All redexes of `rule` in `t`, in left-to-right preorder.
pub fn redexes(t: &Term, rule: RuleLabel) -> Result<Vec<ReductionStep>, ReduceError> {
    if rule.needs_pure() && !t.is_pure() {
        return Err(ReduceError::NotPure);
    }
    let mut out = Vec::new();
    let mut path = Vec::new();
    collect_redexes(t, rule, &mut path, true, true, &mut out);
    Ok(out)
}

fn collect_redexes(
    t: &Term,
    rule: RuleLabel,
    path: &mut Vec<Step>,
    in_head: bool,
    in_pure_head: bool,
    out: &mut Vec<ReductionStep>,
) {
    match t.node() {
        TermNode::Var(_) => {}
        TermNode::App(f, a) => {
            let db_match = peels_to_abs(f);
            match rule {
                RuleLabel::DB if db_match => out.push(ReductionStep {
                    rule,
                    redex: Occurrence(path.clone()),
                    var_occ: None,
                }),
                RuleLabel::HeadDB if db_match && in_head => out.push(ReductionStep {
                    rule,
                    redex: Occurrence(path.clone()),
                    var_occ: None,
                }),
                RuleLabel::Beta if matches!(f.node(), TermNode::Abs(..)) => {
                    out.push(ReductionStep { rule, redex: Occurrence(path.clone()), var_occ: None })
                }
                RuleLabel::HeadBeta
                    if matches!(f.node(), TermNode::Abs(..)) && in_pure_head =>
                {
                    out.push(ReductionStep { rule, redex: Occurrence(path.clone()), var_occ: None })
                }
                _ => {}
            }
            path.push(Step::FunOf);
            collect_redexes(f, rule, path, in_head, in_pure_head, out);
            path.pop();
            path.push(Step::ArgOf);
            collect_redexes(a, rule, path, false, false, out);
            path.pop();
        }
        TermNode::Abs(_, b) => {
            path.push(Step::BodyOfAbs);
            collect_redexes(b, rule, path, in_head, in_pure_head, out);
            path.pop();
        }
        TermNode::Sub(b, x, a) => {
            match rule {
                RuleLabel::GC => {
                    if !b.occurs_free(x) {
                        out.push(ReductionStep {
                            rule,
                            redex: Occurrence(path.clone()),
                            var_occ: None,
                        });
                    }
                }
                RuleLabel::LS | RuleLabel::HeadLS => {
                    let head_only = rule == RuleLabel::HeadLS;
                    if !head_only || in_head {
                        for occ in free_occurrences(b, x, head_only) {
                            let mut var_path = vec![Step::BodyOfSub];
                            var_path.extend(occ.0);
                            out.push(ReductionStep {
                                rule,
                                redex: Occurrence(path.clone()),
                                var_occ: Some(Occurrence(var_path)),
                            });
                        }
                    }
                }
                _ => {}
            }
            path.push(Step::BodyOfSub);
            collect_redexes(b, rule, path, in_head, false, out);
            path.pop();
            path.push(Step::ArgOfSub);
            collect_redexes(a, rule, path, false, false, out);
            path.pop();
        }
    }
}

/// Does the function side peel through a (possibly empty) run of
/// substitutions down to an abstraction? That run is the list L of the
/// rule `(\x.t)L u -> t[x/u]L`.
fn peels_to_abs(f: &Term) -> bool {
    let mut cur = f;
    loop {
        match cur.node() {
            TermNode::Abs(..) => return true,
            TermNode::Sub(b, _, _) => cur = b,
            _ => return false,
        }
    }
}

/// Free occurrences of `x` in `t` (paths relative to `t`), preorder.
/// With `head_only`, only occurrences whose path stays inside a head
/// context of `t`.
fn free_occurrences(t: &Term, x: &Name, head_only: bool) -> Vec<Occurrence> {
    let mut out = Vec::new();
    let mut path = Vec::new();
    fn walk(
        t: &Term,
        x: &Name,
        head_only: bool,
        in_head: bool,
        path: &mut Vec<Step>,
        out: &mut Vec<Occurrence>,
    ) {
        match t.node() {
            TermNode::Var(y) => {
                if y == x && (!head_only || in_head) {
                    out.push(Occurrence(path.clone()));
                }
            }
            TermNode::App(f, a) => {
                path.push(Step::FunOf);
                walk(f, x, head_only, in_head, path, out);
                path.pop();
                if !head_only {
                    path.push(Step::ArgOf);
                    walk(a, x, head_only, false, path, out);
                    path.pop();
                }
            }
            TermNode::Abs(y, b) => {
                if y != x {
                    path.push(Step::BodyOfAbs);
                    walk(b, x, head_only, in_head, path, out);
                    path.pop();
                }
            }
            TermNode::Sub(b, y, a) => {
                if y != x {
                    path.push(Step::BodyOfSub);
                    walk(b, x, head_only, in_head, path, out);
                    path.pop();
                }
                if !head_only {
                    path.push(Step::ArgOfSub);
                    walk(a, x, head_only, false, path, out);
                    path.pop();
                }
            }
        }
    }
    walk(t, x, head_only, true, &mut path, &mut out);
    out
}

/// Redexes of the head rules only, found by walking the head spine.
/// Equivalent to filtering [`redexes`] but linear in the spine length,
/// which is what makes normalizing large terms tractable.
fn head_redexes(t: &Term, rules: &[RuleLabel]) -> Vec<ReductionStep> {
    let want_beta = rules.contains(&RuleLabel::HeadBeta);
    let want_db = rules.contains(&RuleLabel::HeadDB);
    let want_ls = rules.contains(&RuleLabel::HeadLS);
    let mut out = Vec::new();
    // (path length to node, node) pairs down the spine
    let mut spine: Vec<(usize, Term)> = Vec::new();
    let mut path: Vec<Step> = Vec::new();
    let mut pure_head = true;
    let mut cur = t.clone();
    let endpoint: Option<Name> = loop {
        spine.push((path.len(), cur.clone()));
        let descend: Option<(Term, Step)> = match cur.node() {
            TermNode::App(f, _) => {
                if matches!(f.node(), TermNode::Abs(..)) && want_beta && pure_head {
                    out.push(ReductionStep {
                        rule: RuleLabel::HeadBeta,
                        redex: Occurrence(path.clone()),
                        var_occ: None,
                    });
                }
                if want_db && peels_to_abs(f) {
                    out.push(ReductionStep {
                        rule: RuleLabel::HeadDB,
                        redex: Occurrence(path.clone()),
                        var_occ: None,
                    });
                }
                Some((f.clone(), Step::FunOf))
            }
            TermNode::Abs(_, b) => Some((b.clone(), Step::BodyOfAbs)),
            TermNode::Sub(b, _, _) => {
                pure_head = false;
                Some((b.clone(), Step::BodyOfSub))
            }
            TermNode::Var(z) => break Some(z.clone()),
        };
        let (next, step) = descend.unwrap();
        path.push(step);
        cur = next;
    };
    if want_ls {
        if let Some(z) = endpoint {
            // the nearest enclosing spine binder of z decides the ls redex
            for (plen, node) in spine.iter().rev().skip(1) {
                match node.node() {
                    TermNode::Abs(y, _) if *y == z => break,
                    TermNode::Sub(_, y, _) if *y == z => {
                        let redex = Occurrence(path[..*plen].to_vec());
                        let var_occ = Occurrence(path[*plen..].to_vec());
                        out.push(ReductionStep {
                            rule: RuleLabel::HeadLS,
                            redex,
                            var_occ: Some(var_occ),
                        });
                        break;
                    }
                    _ => {}
                }
            }
        }
    }
    out.sort_by_key(|s| s.sort_key());
    out
}

/// Contract the redex designated by `step`. Stale steps are rejected.
pub fn apply_step(t: &Term, step: &ReductionStep) -> Result<Term, ReduceError> {
    let focus = step.redex.resolve(t).map_err(|_| ReduceError::StaleStep)?;
    match step.rule {
        RuleLabel::Beta | RuleLabel::HeadBeta => {
            if !t.is_pure() {
                return Err(ReduceError::NotPure);
            }
            if step.rule == RuleLabel::HeadBeta && !step.redex.is_pure_head_context() {
                return Err(ReduceError::StaleStep);
            }
            match focus.node() {
                TermNode::App(f, a) => match f.node() {
                    TermNode::Abs(x, b) => {
                        let contractum = subst(b, x, a);
                        replace_at(t, &step.redex.0, contractum)
                    }
                    _ => Err(ReduceError::StaleStep),
                },
                _ => Err(ReduceError::StaleStep),
            }
        }
        RuleLabel::DB | RuleLabel::HeadDB => {
            if step.rule == RuleLabel::HeadDB && !step.redex.is_head_context() {
                return Err(ReduceError::StaleStep);
            }
            match focus.node() {
                TermNode::App(f, a) if peels_to_abs(f) => {
                    let u_fv = a.fv();
                    let contractum = db_rebuild(f, a, &u_fv);
                    replace_at(t, &step.redex.0, contractum)
                }
                _ => Err(ReduceError::StaleStep),
            }
        }
        RuleLabel::LS | RuleLabel::HeadLS => {
            if step.rule == RuleLabel::HeadLS && !step.redex.is_head_context() {
                return Err(ReduceError::StaleStep);
            }
            let var_occ = step.var_occ.as_ref().ok_or(ReduceError::StaleStep)?;
            match focus.node() {
                TermNode::Sub(b, x, a) => {
                    let inner = match var_occ.0.split_first() {
                        Some((Step::BodyOfSub, rest)) => rest,
                        _ => return Err(ReduceError::StaleStep),
                    };
                    if step.rule == RuleLabel::HeadLS
                        && !inner.iter().all(|s| !matches!(s, Step::ArgOf | Step::ArgOfSub))
                    {
                        return Err(ReduceError::StaleStep);
                    }
                    let a_fv = a.fv();
                    // the argument may mention the binder's own name
                    // (referring outward); alpha-rename the redex first
                    // or the plugged copy would be captured
                    let (x, b) = if a_fv.contains(x) {
                        rename_binder(x, b, x, a)
                    } else {
                        (x.clone(), b.clone())
                    };
                    let new_body = ls_plug(&b, inner, &x, a, &a_fv)?;
                    let contractum = Term::sub(new_body, x, a.clone());
                    replace_at(t, &step.redex.0, contractum)
                }
                _ => Err(ReduceError::StaleStep),
            }
        }
        RuleLabel::GC => match focus.node() {
            TermNode::Sub(b, x, _) if !b.occurs_free(x) => {
                replace_at(t, &step.redex.0, b.clone())
            }
            _ => Err(ReduceError::StaleStep),
        },
    }
}

/// `(\x.b)L u  ->  b[x/u]L`, renaming binders of L that would capture
/// free variables of `u`.
fn db_rebuild(f: &Term, u: &Term, u_fv: &std::collections::BTreeSet<Name>) -> Term {
    match f.node() {
        TermNode::Abs(x, b) => Term::sub(b.clone(), x.clone(), u.clone()),
        TermNode::Sub(scope, y, w) => {
            if u_fv.contains(y) {
                let (y2, scope2) = rename_binder(y, scope, y, u);
                Term::sub(db_rebuild(&scope2, u, u_fv), y2, w.clone())
            } else {
                Term::sub(db_rebuild(scope, u, u_fv), y.clone(), w.clone())
            }
        }
        _ => unreachable!("validated by peels_to_abs"),
    }
}

/// Replace the single designated free occurrence of `x` with `a`,
/// renaming binders along the path that would capture `a`'s free
/// variables. The renaming matches what `subst` would do, so replaying
/// a beta step linearly reproduces the substitution result exactly.
fn ls_plug(
    t: &Term,
    path: &[Step],
    x: &Name,
    a: &Term,
    a_fv: &std::collections::BTreeSet<Name>,
) -> Result<Term, ReduceError> {
    let Some((step, rest)) = path.split_first() else {
        return match t.node() {
            TermNode::Var(y) if y == x => Ok(a.clone()),
            _ => Err(ReduceError::StaleStep),
        };
    };
    match (t.node(), step) {
        (TermNode::App(f, arg), Step::FunOf) => {
            Ok(Term::app(ls_plug(f, rest, x, a, a_fv)?, arg.clone()))
        }
        (TermNode::App(f, arg), Step::ArgOf) => {
            Ok(Term::app(f.clone(), ls_plug(arg, rest, x, a, a_fv)?))
        }
        (TermNode::Abs(y, b), Step::BodyOfAbs) => {
            if y == x {
                return Err(ReduceError::StaleStep); // occurrence not free
            }
            if a_fv.contains(y) {
                let (y2, b2) = rename_binder(y, b, x, a);
                Ok(Term::abs(y2, ls_plug(&b2, rest, x, a, a_fv)?))
            } else {
                Ok(Term::abs(y.clone(), ls_plug(b, rest, x, a, a_fv)?))
            }
        }
        (TermNode::Sub(b, y, w), Step::BodyOfSub) => {
            if y == x {
                return Err(ReduceError::StaleStep);
            }
            if a_fv.contains(y) {
                let (y2, b2) = rename_binder(y, b, x, a);
                Ok(Term::sub(ls_plug(&b2, rest, x, a, a_fv)?, y2, w.clone()))
            } else {
                Ok(Term::sub(ls_plug(b, rest, x, a, a_fv)?, y.clone(), w.clone()))
            }
        }
        (TermNode::Sub(b, y, w), Step::ArgOfSub) => {
            Ok(Term::sub(b.clone(), y.clone(), ls_plug(w, rest, x, a, a_fv)?))
        }
        _ => Err(ReduceError::StaleStep),
    }
}

fn replace_at(t: &Term, path: &[Step], new: Term) -> Result<Term, ReduceError> {
    let Some((step, rest)) = path.split_first() else {
        return Ok(new);
    };
    match (t.node(), step) {
        (TermNode::App(f, a), Step::FunOf) => Ok(Term::app(replace_at(f, rest, new)?, a.clone())),
        (TermNode::App(f, a), Step::ArgOf) => Ok(Term::app(f.clone(), replace_at(a, rest, new)?)),
        (TermNode::Abs(x, b), Step::BodyOfAbs) => {
            Ok(Term::abs(x.clone(), replace_at(b, rest, new)?))
        }
        (TermNode::Sub(b, x, a), Step::BodyOfSub) => {
            Ok(Term::sub(replace_at(b, rest, new)?, x.clone(), a.clone()))
        }
        (TermNode::Sub(b, x, a), Step::ArgOfSub) => {
            Ok(Term::sub(b.clone(), x.clone(), replace_at(a, rest, new)?))
        }
        _ => Err(ReduceError::StaleStep),
    }
}

fn enabled_redexes(t: &Term, rules: &[RuleLabel]) -> Result<Vec<ReductionStep>, ReduceError> {
    let head_only = rules.iter().all(|r| {
        matches!(r, RuleLabel::HeadBeta | RuleLabel::HeadDB | RuleLabel::HeadLS)
    });
    if head_only {
        return Ok(head_redexes(t, rules));
    }
    let mut all = Vec::new();
    for &r in rules {
        all.extend(redexes(t, r)?);
    }
    all.sort_by_key(|s| s.sort_key());
    Ok(all)
}

fn class_rank(rule: RuleLabel, policy: Policy) -> u8 {
    match policy {
        Policy::LeftmostOutermost => 0,
        Policy::LsFirst => {
            if rule.is_ls() {
                0
            } else if rule == RuleLabel::GC {
                1
            } else {
                2
            }
        }
        Policy::DbFirst => {
            if rule.is_mult() {
                0
            } else if rule.is_ls() {
                1
            } else {
                2
            }
        }
    }
}

fn pick(steps: &[ReductionStep], policy: Policy) -> Option<&ReductionStep> {
    // steps are presorted left-to-right; min_by_key keeps the first
    // representative of the preferred class
    steps.iter().min_by_key(|s| class_rank(s.rule, policy))
}

/// Repeatedly contract a redex chosen by `policy` among `rules` until
/// no redex remains or `max_steps` is hit (in which case the partial
/// trace travels inside the error).
pub fn normalize(
    t: &Term,
    rules: &[RuleLabel],
    policy: Policy,
    max_steps: u64,
) -> Result<Normalized, ReduceError> {
    for &r in rules {
        if r.needs_pure() && !t.is_pure() {
            return Err(ReduceError::NotPure);
        }
    }
    let mut cur = t.clone();
    let mut trace = Trace::new(t.clone());
    loop {
        let steps = enabled_redexes(&cur, rules)?;
        let Some(step) = pick(&steps, policy).cloned() else {
            return Ok(Normalized { term: cur, trace });
        };
        if trace.len() >= max_steps {
            return Err(ReduceError::StepLimit(Box::new(Normalized { term: cur, trace })));
        }
        cur = apply_step(&cur, &step)?;
        let sz = cur.size();
        trace.push(step, sz);
    }
}

/// Default node cap for unfolding (it can be exponentially larger than
/// the input).
pub const UNFOLD_CAP: u64 = 10_000_000;

/// The unfolding: the pure lambda-term a term with substitutions
/// represents, computed structurally clause by clause. Agrees with
/// normalization under the substitution rules.
pub fn unfold(t: &Term) -> Result<Term, ReduceError> {
    unfold_with_cap(t, UNFOLD_CAP)
}

pub fn unfold_with_cap(t: &Term, cap: u64) -> Result<Term, ReduceError> {
    let mut memo: HashMap<*const TermNode, Term> = HashMap::new();
    let r = unfold_memo(t, cap, &mut memo)?;
    if r.size() > cap {
        return Err(ReduceError::NodeCap { cap });
    }
    Ok(r)
}

fn unfold_memo(
    t: &Term,
    cap: u64,
    memo: &mut HashMap<*const TermNode, Term>,
) -> Result<Term, ReduceError> {
    if let Some(r) = memo.get(&t.key()) {
        return Ok(r.clone());
    }
    let r = match t.node() {
        TermNode::Var(_) => t.clone(),
        TermNode::App(f, a) => {
            Term::app(unfold_memo(f, cap, memo)?, unfold_memo(a, cap, memo)?)
        }
        TermNode::Abs(x, b) => Term::abs(x.clone(), unfold_memo(b, cap, memo)?),
        TermNode::Sub(b, x, a) => {
            let ub = unfold_memo(b, cap, memo)?;
            let ua = unfold_memo(a, cap, memo)?;
            let r = subst(&ub, x, &ua);
            if r.size() > cap {
                return Err(ReduceError::NodeCap { cap });
            }
            r
        }
    };
    memo.insert(t.key(), r.clone());
    Ok(r)
}

/// Normal form with respect to head linear substitution, together with
/// the number of steps taken. The relation is deterministic and always
/// terminates.
pub fn linear_unfold(t: &Term) -> (Term, u64) {
    let n = normalize(t, &[RuleLabel::HeadLS], Policy::LeftmostOutermost, u64::MAX)
        .expect("head linear substitution terminates");
    let steps = n.trace.len();
    (n.term, steps)
}

/// Project a linear head trace onto head reduction: unfold every
/// intermediate term and drop consecutive duplicates. Consecutive
/// elements of the result are one head step apart, so the length minus
/// one equals the trace's multiplicative count.
pub fn project_trace(t0: &Term, trace: &Trace) -> Result<Vec<Term>, ReduceError> {
    for (s, _) in &trace.steps {
        if !matches!(s.rule, RuleLabel::HeadDB | RuleLabel::HeadLS) {
            return Err(ReduceError::ForeignRule(s.rule));
        }
    }
    if trace.initial != *t0 {
        return Err(ReduceError::NotReplayable);
    }
    let terms = trace.replay().map_err(|_| ReduceError::NotReplayable)?;
    let mut out: Vec<Term> = Vec::new();
    for u in terms {
        let unf = unfold(&u)?;
        if out.last().map_or(true, |prev| !crate::term::alpha_eq(prev, &unf)) {
            out.push(unf);
        }
    }
    Ok(out)
}

/// Simulate one head beta step in the substitution calculus: its
/// multiplicative step at the same position followed by full
/// composition of the created substitution. Ends on exactly the term
/// the beta step produces.
pub fn simulate_head(t: &Term, step: &ReductionStep) -> Result<(Term, Trace), ReduceError> {
    if !t.is_pure() {
        return Err(ReduceError::NotPure);
    }
    if step.rule != RuleLabel::HeadBeta {
        return Err(ReduceError::ForeignRule(step.rule));
    }
    let db = ReductionStep { rule: RuleLabel::HeadDB, redex: step.redex.clone(), var_occ: None };
    let mid = apply_step(t, &db)?;
    let mut trace = Trace::new(t.clone());
    let sz = mid.size();
    trace.push(db, sz);
    let n = normalize(&mid, &[RuleLabel::LS, RuleLabel::GC], Policy::LeftmostOutermost, u64::MAX)?;
    for (s, sz) in n.trace.steps {
        trace.push(s, sz);
    }
    Ok((n.term, trace))
}

/// Trace serialization: stable field order, rules by their short
/// labels, occurrences as integer paths.
pub fn trace_to_json(trace: &Trace, final_term: &Term) -> serde_json::Value {
    use serde_json::{json, Map, Value};
    let steps: Vec<Value> = trace
        .steps
        .iter()
        .map(|(s, sz)| {
            json!({
                "rule": s.rule.as_str(),
                "redex": s.redex.codes(),
                "var_occ": s.var_occ.as_ref().map(|o| o.codes()),
                "size": sz,
            })
        })
        .collect();
    let mut counts = Map::new();
    for (rule, n) in &trace.counts {
        counts.insert(rule.as_str().to_string(), json!(n));
    }
    json!({
        "initial": trace.initial.to_string(),
        "steps": steps,
        "final": final_term.to_string(),
        "counts": Value::Object(counts),
    })
}

/// Parse a trace file back; used to re-validate traces by replay.
pub fn trace_from_json(v: &serde_json::Value) -> Option<(Trace, Term)> {
    let initial = crate::parse::parse(v.get("initial")?.as_str()?).ok()?;
    let final_term = crate::parse::parse(v.get("final")?.as_str()?).ok()?;
    let mut trace = Trace::new(initial);
    for s in v.get("steps")?.as_array()? {
        let rule = RuleLabel::from_str_label(s.get("rule")?.as_str()?)?;
        let redex_codes: Vec<u8> =
            s.get("redex")?.as_array()?.iter().map(|x| x.as_u64().unwrap_or(255) as u8).collect();
        let redex = Occurrence::from_codes(&redex_codes)?;
        let var_occ = match s.get("var_occ") {
            Some(serde_json::Value::Null) | None => None,
            Some(arr) => {
                let codes: Vec<u8> =
                    arr.as_array()?.iter().map(|x| x.as_u64().unwrap_or(255) as u8).collect();
                Some(Occurrence::from_codes(&codes)?)
            }
        };
        let size = s.get("size")?.as_u64()?;
        trace.push(ReductionStep { rule, redex, var_occ }, size);
    }
    Some((trace, final_term))
}
