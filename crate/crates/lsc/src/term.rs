//! Terms of the lambda calculus and of the calculus with explicit
//! substitutions, plus occurrences (paths), binding, alpha-equivalence
//! and the structural predicates used by the reduction engine.

use crate::name::{fresh_avoiding, Name};
use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

/// One node of a term tree.
///
/// `Sub(t, x, u)` is the explicit substitution written `t[x/u]`.
/// Both `Abs(x, t)` and `Sub(t, x, u)` bind `x` in `t` (and only in `t`).
#[derive(Debug)]
pub enum TermNode {
    Var(Name),
    App(Term, Term),
    Abs(Name, Term),
    Sub(Term, Name, Term),
}

#[derive(Clone, Copy)]
struct Meta {
    size: u64,
    pure: bool,
    es: u64,
    shallow: bool,
}

struct TermData {
    node: TermNode,
    meta: std::sync::OnceLock<Meta>,
    fv: std::sync::OnceLock<Arc<BTreeSet<Name>>>,
}

/// A term. Cheap to clone; subterms are shared through `Arc`, so
/// duplicated arguments cost a pointer, not a copy. Size, purity and
/// free variables are computed once per node and cached.
#[derive(Clone)]
pub struct Term(Arc<TermData>);

impl fmt::Debug for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl Term {
    fn make(node: TermNode) -> Term {
        Term(Arc::new(TermData {
            node,
            meta: std::sync::OnceLock::new(),
            fv: std::sync::OnceLock::new(),
        }))
    }

    pub fn var(n: Name) -> Term {
        Term::make(TermNode::Var(n))
    }

    pub fn app(fun: Term, arg: Term) -> Term {
        Term::make(TermNode::App(fun, arg))
    }

    pub fn abs(binder: Name, body: Term) -> Term {
        Term::make(TermNode::Abs(binder, body))
    }

    pub fn sub(body: Term, binder: Name, arg: Term) -> Term {
        Term::make(TermNode::Sub(body, binder, arg))
    }

    /// Left-associated application `f a1 a2 ...`.
    pub fn apps(fun: Term, args: impl IntoIterator<Item = Term>) -> Term {
        args.into_iter().fold(fun, Term::app)
    }

    /// `\x1...\xk. body`.
    pub fn lams(binders: impl IntoIterator<Item = Name>, body: Term) -> Term {
        let bs: Vec<Name> = binders.into_iter().collect();
        bs.into_iter().rev().fold(body, |b, x| Term::abs(x, b))
    }

    pub fn node(&self) -> &TermNode {
        &self.0.node
    }

    pub(crate) fn key(&self) -> *const TermNode {
        &self.0.node as *const TermNode
    }

    fn meta(&self) -> &Meta {
        self.0.meta.get_or_init(|| match self.node() {
            TermNode::Var(_) => Meta { size: 1, pure: true, es: 0, shallow: true },
            TermNode::App(f, a) => {
                let (mf, ma) = (f.meta(), a.meta());
                Meta {
                    size: 1u64.saturating_add(mf.size).saturating_add(ma.size),
                    pure: mf.pure && ma.pure,
                    es: mf.es + ma.es,
                    shallow: mf.shallow && ma.shallow,
                }
            }
            TermNode::Abs(_, b) => {
                let mb = b.meta();
                Meta { size: 1u64.saturating_add(mb.size), ..*mb }
            }
            TermNode::Sub(b, _, a) => {
                let (mb, ma) = (b.meta(), a.meta());
                Meta {
                    size: 1u64.saturating_add(mb.size).saturating_add(ma.size),
                    pure: false,
                    es: 1 + mb.es + ma.es,
                    shallow: mb.shallow && ma.pure,
                }
            }
        })
    }

    /// Number of nodes in the term tree.
    pub fn size(&self) -> u64 {
        self.meta().size
    }

    /// True iff the term contains no explicit substitution.
    pub fn is_pure(&self) -> bool {
        self.meta().pure
    }

    /// Number of `Sub` nodes.
    pub fn es_count(&self) -> u64 {
        self.meta().es
    }

    /// A term is shallow when every substitution argument is a pure
    /// lambda-term. Reducts of lambda-terms under linear head reduction
    /// stay in this fragment.
    pub fn is_shallow(&self) -> bool {
        self.meta().shallow
    }

    fn fv_arc(&self) -> &Arc<BTreeSet<Name>> {
        self.0.fv.get_or_init(|| match self.node() {
            TermNode::Var(x) => Arc::new(BTreeSet::from([x.clone()])),
            TermNode::App(f, a) => {
                let mut s = (**f.fv_arc()).clone();
                s.extend(a.fv_arc().iter().cloned());
                Arc::new(s)
            }
            TermNode::Abs(x, b) => {
                let mut s = (**b.fv_arc()).clone();
                s.remove(x);
                Arc::new(s)
            }
            TermNode::Sub(b, x, a) => {
                let mut s = (**b.fv_arc()).clone();
                s.remove(x);
                s.extend(a.fv_arc().iter().cloned());
                Arc::new(s)
            }
        })
    }

    /// Free variables.
    pub fn fv(&self) -> BTreeSet<Name> {
        (**self.fv_arc()).clone()
    }

    /// Free variables, borrowed.
    pub fn fv_ref(&self) -> &BTreeSet<Name> {
        self.fv_arc()
    }

    /// True iff `x` occurs free.
    pub fn occurs_free(&self, x: &Name) -> bool {
        self.fv_arc().contains(x)
    }
}

/// Structural equality (exact names, not alpha). Pointer-equal
/// subterms short-circuit.
impl PartialEq for Term {
    fn eq(&self, other: &Term) -> bool {
        if Arc::ptr_eq(&self.0, &other.0) {
            return true;
        }
        match (self.node(), other.node()) {
            (TermNode::Var(x), TermNode::Var(y)) => x == y,
            (TermNode::App(f1, a1), TermNode::App(f2, a2)) => f1 == f2 && a1 == a2,
            (TermNode::Abs(x1, b1), TermNode::Abs(x2, b2)) => x1 == x2 && b1 == b2,
            (TermNode::Sub(b1, x1, a1), TermNode::Sub(b2, x2, a2)) => {
                x1 == x2 && b1 == b2 && a1 == a2
            }
            _ => false,
        }
    }
}

impl Eq for Term {}

/// Capture-avoiding substitution `t{x/u}`.
///
/// Binders are renamed only where capture would actually occur, always
/// to the smallest fresh tag, so the result is deterministic.
pub fn subst(t: &Term, x: &Name, u: &Term) -> Term {
    let mut memo: HashMap<*const TermNode, Term> = HashMap::new();
    subst_memo(t, x, u, &mut memo)
}

fn subst_memo(t: &Term, x: &Name, u: &Term, memo: &mut HashMap<*const TermNode, Term>) -> Term {
    if let Some(r) = memo.get(&t.key()) {
        return r.clone();
    }
    let r = match t.node() {
        TermNode::Var(y) => {
            if y == x {
                u.clone()
            } else {
                t.clone()
            }
        }
        TermNode::App(f, a) => {
            let f2 = subst_memo(f, x, u, memo);
            let a2 = subst_memo(a, x, u, memo);
            if f2 == *f && a2 == *a {
                t.clone()
            } else {
                Term::app(f2, a2)
            }
        }
        TermNode::Abs(y, b) => {
            if y == x || !b.occurs_free(x) {
                t.clone()
            } else if u.occurs_free(y) {
                let (y2, b2) = rename_binder(y, b, x, u);
                Term::abs(y2, subst_memo(&b2, x, u, memo))
            } else {
                Term::abs(y.clone(), subst_memo(b, x, u, memo))
            }
        }
        TermNode::Sub(b, y, a) => {
            let a2 = subst_memo(a, x, u, memo);
            if y == x || !b.occurs_free(x) {
                if a2 == *a {
                    t.clone()
                } else {
                    Term::sub(b.clone(), y.clone(), a2)
                }
            } else if u.occurs_free(y) {
                let (y2, b2) = rename_binder(y, b, x, u);
                Term::sub(subst_memo(&b2, x, u, memo), y2, a2)
            } else {
                Term::sub(subst_memo(b, x, u, memo), y.clone(), a2)
            }
        }
    };
    memo.insert(t.key(), r.clone());
    r
}

/// Pick a fresh replacement for a binder `y` over body `b` that would
/// capture free variables of `u`, and rename the body.
pub(crate) fn rename_binder(y: &Name, b: &Term, x: &Name, u: &Term) -> (Name, Term) {
    let mut avoid = u.fv();
    avoid.extend(b.fv());
    avoid.insert(x.clone());
    avoid.insert(y.clone());
    let y2 = fresh_avoiding(y.base(), avoid.iter());
    let b2 = subst(b, y, &Term::var(y2.clone()));
    (y2, b2)
}

/// Alpha-equivalence. Free names must match exactly; bound names are
/// compared positionally.
pub fn alpha_eq(a: &Term, b: &Term) -> bool {
    fn go(a: &Term, b: &Term, env_a: &mut Vec<Name>, env_b: &mut Vec<Name>) -> bool {
        match (a.node(), b.node()) {
            (TermNode::Var(x), TermNode::Var(y)) => {
                let ia = env_a.iter().rposition(|n| n == x);
                let ib = env_b.iter().rposition(|n| n == y);
                match (ia, ib) {
                    (Some(i), Some(j)) => i == j,
                    (None, None) => x == y,
                    _ => false,
                }
            }
            (TermNode::App(f1, a1), TermNode::App(f2, a2)) => {
                go(f1, f2, env_a, env_b) && go(a1, a2, env_a, env_b)
            }
            (TermNode::Abs(x, b1), TermNode::Abs(y, b2)) => {
                env_a.push(x.clone());
                env_b.push(y.clone());
                let r = go(b1, b2, env_a, env_b);
                env_a.pop();
                env_b.pop();
                r
            }
            (TermNode::Sub(b1, x, a1), TermNode::Sub(b2, y, a2)) => {
                if !go(a1, a2, env_a, env_b) {
                    return false;
                }
                env_a.push(x.clone());
                env_b.push(y.clone());
                let r = go(b1, b2, env_a, env_b);
                env_a.pop();
                env_b.pop();
                r
            }
            _ => false,
        }
    }
    go(a, b, &mut Vec::new(), &mut Vec::new())
}

/// One step of a root-to-subterm path.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Step {
    FunOf,
    ArgOf,
    BodyOfAbs,
    BodyOfSub,
    ArgOfSub,
}

impl Step {
    /// Stable integer encoding used in trace files.
    pub fn code(self) -> u8 {
        match self {
            Step::FunOf => 0,
            Step::ArgOf => 1,
            Step::BodyOfAbs => 2,
            Step::BodyOfSub => 3,
            Step::ArgOfSub => 4,
        }
    }

    pub fn from_code(c: u8) -> Option<Step> {
        Some(match c {
            0 => Step::FunOf,
            1 => Step::ArgOf,
            2 => Step::BodyOfAbs,
            3 => Step::BodyOfSub,
            4 => Step::ArgOfSub,
            _ => return None,
        })
    }

    /// Child rank used for preorder comparison (fun/body before arg).
    fn rank(self) -> u8 {
        match self {
            Step::FunOf | Step::BodyOfAbs | Step::BodyOfSub => 0,
            Step::ArgOf | Step::ArgOfSub => 1,
        }
    }
}

/// A path from the root of a host term to one of its subterms. The
/// pair (focused subterm, path) is the decomposition `a = C[t]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct Occurrence(pub Vec<Step>);

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
#[error("occurrence path does not fit the term (step {at})")]
pub struct BadOccurrence {
    pub at: usize,
}

impl Occurrence {
    pub fn root() -> Occurrence {
        Occurrence(Vec::new())
    }

    pub fn child(&self, s: Step) -> Occurrence {
        let mut p = self.0.clone();
        p.push(s);
        Occurrence(p)
    }

    pub fn extended(&self, rest: &Occurrence) -> Occurrence {
        let mut p = self.0.clone();
        p.extend_from_slice(&rest.0);
        Occurrence(p)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// The focused subterm, or an error if some step mismatches.
    pub fn resolve(&self, host: &Term) -> Result<Term, BadOccurrence> {
        let mut cur = host.clone();
        for (i, s) in self.0.iter().enumerate() {
            let next = match (cur.node(), s) {
                (TermNode::App(f, _), Step::FunOf) => f.clone(),
                (TermNode::App(_, a), Step::ArgOf) => a.clone(),
                (TermNode::Abs(_, b), Step::BodyOfAbs) => b.clone(),
                (TermNode::Sub(b, _, _), Step::BodyOfSub) => b.clone(),
                (TermNode::Sub(_, _, a), Step::ArgOfSub) => a.clone(),
                _ => return Err(BadOccurrence { at: i }),
            };
            cur = next;
        }
        Ok(cur)
    }

    /// No step enters an argument: the hole of the context sits on the
    /// head spine (grammar `H ::= [.] | H T | \x.H | H[x/T]`).
    pub fn is_head_context(&self) -> bool {
        self.0.iter().all(|s| !matches!(s, Step::ArgOf | Step::ArgOfSub))
    }

    /// Head context that moreover never enters a substitution body
    /// (grammar `H^ ::= [.] | H^ T | \x.H^`).
    pub fn is_pure_head_context(&self) -> bool {
        self.0
            .iter()
            .all(|s| matches!(s, Step::FunOf | Step::BodyOfAbs))
    }

    /// Number of argument entries (application or substitution boxes)
    /// the hole is nested under.
    pub fn box_depth(&self) -> usize {
        self.0
            .iter()
            .filter(|s| matches!(s, Step::ArgOf | Step::ArgOfSub))
            .count()
    }

    /// Key for left-to-right preorder comparison of positions.
    pub fn preorder_key(&self) -> Vec<u8> {
        self.0.iter().map(|s| s.rank()).collect()
    }

    pub fn codes(&self) -> Vec<u8> {
        self.0.iter().map(|s| s.code()).collect()
    }

    pub fn from_codes(codes: &[u8]) -> Option<Occurrence> {
        codes.iter().map(|&c| Step::from_code(c)).collect::<Option<Vec<_>>>().map(Occurrence)
    }
}

/// All box-subterms: arguments of applications and of substitutions,
/// in left-to-right preorder, paired with the path that reaches them.
pub fn box_subterms(t: &Term) -> Vec<(Occurrence, Term)> {
    let mut out = Vec::new();
    let mut path = Vec::new();
    fn walk(t: &Term, path: &mut Vec<Step>, out: &mut Vec<(Occurrence, Term)>) {
        match t.node() {
            TermNode::Var(_) => {}
            TermNode::App(f, a) => {
                path.push(Step::FunOf);
                walk(f, path, out);
                path.pop();
                path.push(Step::ArgOf);
                out.push((Occurrence(path.clone()), a.clone()));
                walk(a, path, out);
                path.pop();
            }
            TermNode::Abs(_, b) => {
                path.push(Step::BodyOfAbs);
                walk(b, path, out);
                path.pop();
            }
            TermNode::Sub(b, _, a) => {
                path.push(Step::BodyOfSub);
                walk(b, path, out);
                path.pop();
                path.push(Step::ArgOfSub);
                out.push((Occurrence(path.clone()), a.clone()));
                walk(a, path, out);
                path.pop();
            }
        }
    }
    walk(t, &mut path, &mut out);
    out
}

/// Every subterm occurrence of `t` in preorder (the root included).
pub fn all_occurrences(t: &Term) -> Vec<(Occurrence, Term)> {
    let mut out = Vec::new();
    let mut path = Vec::new();
    fn walk(t: &Term, path: &mut Vec<Step>, out: &mut Vec<(Occurrence, Term)>) {
        out.push((Occurrence(path.clone()), t.clone()));
        match t.node() {
            TermNode::Var(_) => {}
            TermNode::App(f, a) => {
                path.push(Step::FunOf);
                walk(f, path, out);
                path.pop();
                path.push(Step::ArgOf);
                walk(a, path, out);
                path.pop();
            }
            TermNode::Abs(_, b) => {
                path.push(Step::BodyOfAbs);
                walk(b, path, out);
                path.pop();
            }
            TermNode::Sub(b, _, a) => {
                path.push(Step::BodyOfSub);
                walk(b, path, out);
                path.pop();
                path.push(Step::ArgOfSub);
                walk(a, path, out);
                path.pop();
            }
        }
    }
    walk(t, &mut path, &mut out);
    out
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_term(self, f)
    }
}

// Printing follows the concrete grammar with minimal parentheses:
//   term := lam | app ; app := atom+ ; atom := IDENT | (term) | atom[x/term]
fn write_term(t: &Term, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match t.node() {
        TermNode::Abs(x, b) => {
            write!(f, "\\{}.", x)?;
            write_term(b, f)
        }
        TermNode::App(fun, arg) => {
            write_app_fun(fun, f)?;
            write!(f, " ")?;
            write_atom(arg, f)
        }
        _ => write_atom(t, f),
    }
}

fn write_app_fun(t: &Term, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match t.node() {
        TermNode::App(fun, arg) => {
            write_app_fun(fun, f)?;
            write!(f, " ")?;
            write_atom(arg, f)
        }
        _ => write_atom(t, f),
    }
}

fn write_atom(t: &Term, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match t.node() {
        TermNode::Var(x) => write!(f, "{}", x),
        TermNode::Sub(b, x, a) => {
            write_atom(b, f)?;
            write!(f, "[{}/", x)?;
            write_term(a, f)?;
            write!(f, "]")
        }
        _ => {
            write!(f, "(")?;
            write_term(t, f)?;
            write!(f, ")")
        }
    }
}
