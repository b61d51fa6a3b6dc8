//! Deciding equality of unfoldings in polynomial time.
//!
//! Two terms with explicit substitutions can denote the same pure
//! lambda-term even though computing that term is exponentially large.
//! The checker compares all relative unfoldings of subterm occurrences
//! of the two inputs by dynamic programming over unfolding judgments,
//! without materializing any unfolding. A judgment value is either
//! bottom (provably different) or a constraining set: the variable
//! pairing that would make the two relative unfoldings equal.

use crate::name::Name;
use crate::reduce::{normalize, unfold, Policy, ReduceError, RuleLabel};
use crate::term::{subst, Occurrence, Step, Term, TermNode};
use std::collections::{BTreeMap, BTreeSet, HashMap};

/// A finite set of variable-name pairs.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct ConstrainingSet {
    pub pairs: BTreeSet<(Name, Name)>,
}

impl ConstrainingSet {
    pub fn empty() -> ConstrainingSet {
        ConstrainingSet::default()
    }

    pub fn singleton(x: Name, y: Name) -> ConstrainingSet {
        ConstrainingSet { pairs: BTreeSet::from([(x, y)]) }
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// The graph of a bijection: no two pairs share a first or a second
    /// component.
    pub fn auto_coherent(&self) -> bool {
        coherent(self, self)
    }

    /// First and second projections.
    pub fn proj1(&self) -> BTreeSet<Name> {
        self.pairs.iter().map(|(x, _)| x.clone()).collect()
    }

    pub fn proj2(&self) -> BTreeSet<Name> {
        self.pairs.iter().map(|(_, y)| y.clone()).collect()
    }
}

/// Matching first components force equal second components, and
/// symmetrically. Not reflexive: a set conflicts with itself unless it
/// is the graph of a bijection.
pub fn coherent(a: &ConstrainingSet, b: &ConstrainingSet) -> bool {
    for (x, y) in &a.pairs {
        for (x2, y2) in &b.pairs {
            if (x == x2 && y != y2) || (y == y2 && x != x2) {
                return false;
            }
        }
    }
    true
}

/// A judgment value: bottom or a constraining set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Value {
    Bottom,
    Set(ConstrainingSet),
}

impl Value {
    pub fn empty_set() -> Value {
        Value::Set(ConstrainingSet::empty())
    }

    pub fn is_bottom(&self) -> bool {
        matches!(self, Value::Bottom)
    }
}

/// The combination operation on values: union when both sides are
/// coherent sets, bottom otherwise. Bottom is absorbing.
pub fn combine(v: &Value, w: &Value) -> Value {
    match (v, w) {
        (Value::Set(a), Value::Set(b)) => {
            if coherent(a, b) {
                let mut pairs = a.pairs.clone();
                pairs.extend(b.pairs.iter().cloned());
                Value::Set(ConstrainingSet { pairs })
            } else {
                Value::Bottom
            }
        }
        _ => Value::Bottom,
    }
}

/// The unfolding of the subterm at `occ` relative to its context in
/// `host`: only substitutions whose body encloses the occurrence
/// contribute, innermost first.
pub fn relative_unfold(host: &Term, occ: &Occurrence) -> Result<Term, ReduceError> {
    let focus = occ.resolve(host).map_err(|_| ReduceError::NotReplayable)?;
    let mut result = unfold(&focus)?;
    // walk the path from the focus back to the root
    let mut enclosing: Vec<(Name, Term)> = Vec::new();
    let mut cur = host.clone();
    for step in &occ.0 {
        let next = match (cur.node(), step) {
            (TermNode::App(f, _), Step::FunOf) => f.clone(),
            (TermNode::App(_, a), Step::ArgOf) => a.clone(),
            (TermNode::Abs(_, b), Step::BodyOfAbs) => b.clone(),
            (TermNode::Sub(b, x, a), Step::BodyOfSub) => {
                enclosing.push((x.clone(), a.clone()));
                b.clone()
            }
            (TermNode::Sub(_, _, a), Step::ArgOfSub) => a.clone(),
            _ => return Err(ReduceError::NotReplayable),
        };
        cur = next;
    }
    for (x, arg) in enclosing.into_iter().rev() {
        result = subst(&result, &x, &unfold(&arg)?);
    }
    Ok(result)
}

/// A pair of terms readied for the checking algorithm: gc-normal, with
/// the six name spaces (substituted, abstracted, free, on each side)
/// pairwise disjoint. The free-variable renamings are recorded so the
/// final verdict can be read back on the original names.
#[derive(Clone, Debug)]
pub struct PreprocessedPair {
    pub a: Term,
    pub b: Term,
    /// Substituted names of both terms.
    pub subst_names: BTreeSet<Name>,
    pub rename_a: BTreeMap<Name, Name>,
    pub rename_b: BTreeMap<Name, Name>,
}

/// Garbage-collect both terms, then rename every binder and free
/// variable apart. The left term draws odd tags, the right even tags,
/// assigned in preorder, so preprocessing is reproducible.
pub fn preprocess(a: &Term, b: &Term) -> PreprocessedPair {
    let a = normalize(a, &[RuleLabel::GC], Policy::LeftmostOutermost, u64::MAX)
        .expect("gc normalization terminates")
        .term;
    let b = normalize(b, &[RuleLabel::GC], Policy::LeftmostOutermost, u64::MAX)
        .expect("gc normalization terminates")
        .term;
    let mut next_a = 1u32;
    let mut rename_a = BTreeMap::new();
    let a2 = rename_apart(&a, &mut Vec::new(), &mut rename_a, &mut next_a);
    let mut next_b = 2u32;
    let mut rename_b = BTreeMap::new();
    let b2 = rename_apart(&b, &mut Vec::new(), &mut rename_b, &mut next_b);
    let mut subst_names = BTreeSet::new();
    collect_sub_binders(&a2, &mut subst_names);
    collect_sub_binders(&b2, &mut subst_names);
    PreprocessedPair { a: a2, b: b2, subst_names, rename_a, rename_b }
}

fn rename_apart(
    t: &Term,
    env: &mut Vec<(Name, Name)>,
    free_map: &mut BTreeMap<Name, Name>,
    next: &mut u32,
) -> Term {
    let alloc = |base: &Name, next: &mut u32| {
        let n = base.retag(*next);
        *next += 2;
        n
    };
    match t.node() {
        TermNode::Var(x) => {
            if let Some((_, fresh)) = env.iter().rev().find(|(orig, _)| orig == x) {
                Term::var(fresh.clone())
            } else if let Some(fresh) = free_map.get(x) {
                Term::var(fresh.clone())
            } else {
                let fresh = alloc(x, next);
                free_map.insert(x.clone(), fresh.clone());
                Term::var(fresh)
            }
        }
        TermNode::App(f, a) => {
            let f2 = rename_apart(f, env, free_map, next);
            let a2 = rename_apart(a, env, free_map, next);
            Term::app(f2, a2)
        }
        TermNode::Abs(x, b) => {
            let fresh = alloc(x, next);
            env.push((x.clone(), fresh.clone()));
            let b2 = rename_apart(b, env, free_map, next);
            env.pop();
            Term::abs(fresh, b2)
        }
        TermNode::Sub(b, x, a) => {
            let fresh = alloc(x, next);
            env.push((x.clone(), fresh.clone()));
            let b2 = rename_apart(b, env, free_map, next);
            env.pop();
            let a2 = rename_apart(a, env, free_map, next);
            Term::sub(b2, fresh, a2)
        }
    }
}

fn collect_sub_binders(t: &Term, out: &mut BTreeSet<Name>) {
    match t.node() {
        TermNode::Var(_) => {}
        TermNode::App(f, a) => {
            collect_sub_binders(f, out);
            collect_sub_binders(a, out);
        }
        TermNode::Abs(_, b) => collect_sub_binders(b, out),
        TermNode::Sub(b, x, a) => {
            out.insert(x.clone());
            collect_sub_binders(b, out);
            collect_sub_binders(a, out);
        }
    }
}

/// Per-term indexing of all subterm occurrences, in preorder.
struct Side {
    occs: Vec<Occurrence>,
    focus: Vec<Term>,
    kids: Vec<Kids>,
    /// For a substituted name, the index of the argument occurrence of
    /// its binding substitution (where the unf rules refocus to).
    sub_arg_of: HashMap<Name, usize>,
    index: HashMap<Occurrence, usize>,
}

#[derive(Clone, Copy)]
enum Kids {
    Leaf,
    App(usize, usize),
    Abs(usize),
    Sub(usize),
}

impl Side {
    fn build(t: &Term) -> Side {
        let mut side = Side {
            occs: Vec::new(),
            focus: Vec::new(),
            kids: Vec::new(),
            sub_arg_of: HashMap::new(),
            index: HashMap::new(),
        };
        fn walk(t: &Term, path: &mut Vec<Step>, side: &mut Side) -> usize {
            let me = side.occs.len();
            side.occs.push(Occurrence(path.clone()));
            side.focus.push(t.clone());
            side.kids.push(Kids::Leaf);
            side.index.insert(Occurrence(path.clone()), me);
            match t.node() {
                TermNode::Var(_) => {}
                TermNode::App(f, a) => {
                    path.push(Step::FunOf);
                    let fi = walk(f, path, side);
                    path.pop();
                    path.push(Step::ArgOf);
                    let ai = walk(a, path, side);
                    path.pop();
                    side.kids[me] = Kids::App(fi, ai);
                }
                TermNode::Abs(_, b) => {
                    path.push(Step::BodyOfAbs);
                    let bi = walk(b, path, side);
                    path.pop();
                    side.kids[me] = Kids::Abs(bi);
                }
                TermNode::Sub(b, x, a) => {
                    path.push(Step::BodyOfSub);
                    let bi = walk(b, path, side);
                    path.pop();
                    path.push(Step::ArgOfSub);
                    let ai = walk(a, path, side);
                    path.pop();
                    side.kids[me] = Kids::Sub(bi);
                    side.sub_arg_of.insert(x.clone(), ai);
                }
            }
            me
        }
        walk(t, &mut Vec::new(), &mut side);
        side
    }
}

/// The single rule applicable to a cell, with its premise cells.
enum RuleApp {
    Var(Name, Name),
    Refocus(usize, usize),
    Lam(usize, usize, Name, Name),
    At((usize, usize), (usize, usize)),
    Err,
}

#[derive(Debug, thiserror::Error)]
pub enum CheckError {
    #[error("dependency cycle while filling the unfolding matrix at ({row:?}, {col:?})")]
    DependencyCycle { row: Occurrence, col: Occurrence },
}

struct Checker<'a> {
    pp: &'a PreprocessedPair,
    a: Side,
    b: Side,
    cells: Vec<CellState>,
}

#[derive(Clone, Debug, PartialEq)]
enum CellState {
    Blank,
    InProgress,
    Done(Value),
}

impl<'a> Checker<'a> {
    fn new(pp: &'a PreprocessedPair) -> Checker<'a> {
        let a = Side::build(&pp.a);
        let b = Side::build(&pp.b);
        let cells = vec![CellState::Blank; a.occs.len() * b.occs.len()];
        Checker { pp, a, b, cells }
    }

    fn cell(&self, i: usize, j: usize) -> usize {
        i * self.b.occs.len() + j
    }

    /// Exactly one rule applies to every cell.
    fn rule_of(&self, i: usize, j: usize) -> RuleApp {
        let fa = &self.a.focus[i];
        let fb = &self.b.focus[j];
        if let Kids::Sub(bi) = self.a.kids[i] {
            debug_assert!(matches!(fa.node(), TermNode::Sub(..)));
            return RuleApp::Refocus(bi, j); // sub_l
        }
        if let Kids::Sub(bj) = self.b.kids[j] {
            return RuleApp::Refocus(i, bj); // sub_r
        }
        if let TermNode::Var(x) = fa.node() {
            if self.pp.subst_names.contains(x) {
                let ai = self.a.sub_arg_of[x];
                return RuleApp::Refocus(ai, j); // unf_l
            }
        }
        if let TermNode::Var(y) = fb.node() {
            if self.pp.subst_names.contains(y) {
                let bj = self.b.sub_arg_of[y];
                return RuleApp::Refocus(i, bj); // unf_r
            }
        }
        match (fa.node(), fb.node()) {
            (TermNode::Var(x), TermNode::Var(y)) => RuleApp::Var(x.clone(), y.clone()),
            (TermNode::Abs(x, _), TermNode::Abs(y, _)) => {
                let (Kids::Abs(bi), Kids::Abs(bj)) = (self.a.kids[i], self.b.kids[j]) else {
                    unreachable!()
                };
                RuleApp::Lam(bi, bj, x.clone(), y.clone())
            }
            (TermNode::App(..), TermNode::App(..)) => {
                let (Kids::App(fi, ai), Kids::App(fj, aj)) = (self.a.kids[i], self.b.kids[j])
                else {
                    unreachable!()
                };
                RuleApp::At((fi, fj), (ai, aj))
            }
            _ => RuleApp::Err,
        }
    }

    fn conclude(&self, rule: &RuleApp, premises: &[Value]) -> Value {
        match rule {
            RuleApp::Var(x, y) => Value::Set(ConstrainingSet::singleton(x.clone(), y.clone())),
            RuleApp::Refocus(..) => premises[0].clone(),
            RuleApp::Lam(_, _, x, y) => match &premises[0] {
                // bottom premise, or a pair binding only one of the two
                // binders, is an error
                Value::Bottom => Value::Bottom,
                Value::Set(v) => {
                    let has_pair = v.pairs.contains(&(x.clone(), y.clone()));
                    if has_pair {
                        let mut pairs = v.pairs.clone();
                        pairs.remove(&(x.clone(), y.clone()));
                        Value::Set(ConstrainingSet { pairs })
                    } else {
                        let x_used = v.pairs.iter().any(|(p, _)| p == x);
                        let y_used = v.pairs.iter().any(|(_, q)| q == y);
                        if x_used || y_used {
                            Value::Bottom
                        } else {
                            Value::Set(v.clone())
                        }
                    }
                }
            },
            RuleApp::At(..) => combine(&premises[0], &premises[1]),
            RuleApp::Err => Value::Bottom,
        }
    }

    fn premises(&self, rule: &RuleApp) -> Vec<(usize, usize)> {
        match rule {
            RuleApp::Var(..) | RuleApp::Err => vec![],
            RuleApp::Refocus(i, j) => vec![(*i, *j)],
            RuleApp::Lam(bi, bj, _, _) => vec![(*bi, *bj)],
            RuleApp::At(f, a) => vec![*f, *a],
        }
    }

    /// Memoized recursive fill from a demanded cell. The in-progress
    /// marker catches dependency cycles, which cannot arise on
    /// well-formed preprocessed pairs.
    fn demand(&mut self, i: usize, j: usize) -> Result<Value, CheckError> {
        let c = self.cell(i, j);
        match &self.cells[c] {
            CellState::Done(v) => return Ok(v.clone()),
            CellState::InProgress => {
                return Err(CheckError::DependencyCycle {
                    row: self.a.occs[i].clone(),
                    col: self.b.occs[j].clone(),
                })
            }
            CellState::Blank => {}
        }
        self.cells[c] = CellState::InProgress;
        let rule = self.rule_of(i, j);
        let mut prem_values = Vec::new();
        for (pi, pj) in self.premises(&rule) {
            prem_values.push(self.demand(pi, pj)?);
        }
        let v = self.conclude(&rule, &prem_values);
        let c = self.cell(i, j);
        self.cells[c] = CellState::Done(v.clone());
        Ok(v)
    }

    /// The paper's fill loop: repeatedly pick a blank cell whose
    /// premises are all filled.
    fn fill_worklist(&mut self) -> Result<(), CheckError> {
        let (na, nb) = (self.a.occs.len(), self.b.occs.len());
        loop {
            let mut progressed = false;
            let mut remaining = false;
            for i in 0..na {
                for j in 0..nb {
                    if self.cells[self.cell(i, j)] != CellState::Blank {
                        continue;
                    }
                    let rule = self.rule_of(i, j);
                    let prem = self.premises(&rule);
                    let ready = prem
                        .iter()
                        .all(|&(pi, pj)| matches!(self.cells[self.cell(pi, pj)], CellState::Done(_)));
                    if !ready {
                        remaining = true;
                        continue;
                    }
                    let values: Vec<Value> = prem
                        .iter()
                        .map(|&(pi, pj)| match &self.cells[self.cell(pi, pj)] {
                            CellState::Done(v) => v.clone(),
                            _ => unreachable!(),
                        })
                        .collect();
                    let v = self.conclude(&rule, &values);
                    let c = self.cell(i, j);
                    self.cells[c] = CellState::Done(v);
                    progressed = true;
                }
            }
            if !remaining && !progressed {
                return Ok(());
            }
            if remaining && !progressed {
                for i in 0..na {
                    for j in 0..nb {
                        if self.cells[self.cell(i, j)] == CellState::Blank {
                            return Err(CheckError::DependencyCycle {
                                row: self.a.occs[i].clone(),
                                col: self.b.occs[j].clone(),
                            });
                        }
                    }
                }
                unreachable!()
            }
        }
    }

    fn into_matrix(self) -> UnfoldingMatrix {
        UnfoldingMatrix {
            rows: self.a.occs,
            cols: self.b.occs,
            cells: self
                .cells
                .into_iter()
                .map(|c| match c {
                    CellState::Done(v) => Some(v),
                    _ => None,
                })
                .collect(),
        }
    }
}

/// The filled dynamic-programming table: one cell per pair of subterm
/// occurrences. Cells never demanded stay `None` when filled by the
/// demand-driven strategy.
#[derive(Clone, Debug)]
pub struct UnfoldingMatrix {
    pub rows: Vec<Occurrence>,
    pub cols: Vec<Occurrence>,
    cells: Vec<Option<Value>>,
}

impl UnfoldingMatrix {
    pub fn get(&self, i: usize, j: usize) -> Option<&Value> {
        self.cells[i * self.cols.len() + j].as_ref()
    }

    pub fn root(&self) -> Option<&Value> {
        self.get(0, 0)
    }

    /// Debug dump: tab-separated, occurrences as integer paths, cells
    /// rendered as bottom or a pairing.
    pub fn to_tsv(&self) -> String {
        fn occ_str(o: &Occurrence) -> String {
            if o.is_empty() {
                "[]".to_string()
            } else {
                format!(
                    "[{}]",
                    o.codes().iter().map(|c| c.to_string()).collect::<Vec<_>>().join(",")
                )
            }
        }
        let mut s = String::from(".");
        for c in &self.cols {
            s.push('\t');
            s.push_str(&occ_str(c));
        }
        s.push('\n');
        for (i, r) in self.rows.iter().enumerate() {
            s.push_str(&occ_str(r));
            for j in 0..self.cols.len() {
                s.push('\t');
                match self.get(i, j) {
                    None => s.push('#'),
                    Some(Value::Bottom) => s.push('⊥'),
                    Some(Value::Set(cs)) => {
                        s.push('{');
                        let mut first = true;
                        for (x, y) in &cs.pairs {
                            if !first {
                                s.push(',');
                            }
                            first = false;
                            s.push_str(&format!("{}↦{}", x, y));
                        }
                        s.push('}');
                    }
                }
            }
            s.push('\n');
        }
        s
    }
}

/// Fill every cell by memoized recursion (the default strategy).
pub fn fill_matrix(pp: &PreprocessedPair) -> Result<UnfoldingMatrix, CheckError> {
    let mut ck = Checker::new(pp);
    for i in 0..ck.a.occs.len() {
        for j in 0..ck.b.occs.len() {
            ck.demand(i, j)?;
        }
    }
    Ok(ck.into_matrix())
}

/// Fill by the iterative worklist over dependency-minimal blanks;
/// retained as a conformance cross-check of the recursive strategy.
pub fn fill_matrix_worklist(pp: &PreprocessedPair) -> Result<UnfoldingMatrix, CheckError> {
    let mut ck = Checker::new(pp);
    ck.fill_worklist()?;
    Ok(ck.into_matrix())
}

fn root_verdict(pp: &PreprocessedPair, root: &Value) -> bool {
    match root {
        Value::Bottom => false,
        Value::Set(v) => {
            let inv_a: BTreeMap<&Name, &Name> = pp.rename_a.iter().map(|(o, f)| (f, o)).collect();
            let inv_b: BTreeMap<&Name, &Name> = pp.rename_b.iter().map(|(o, f)| (f, o)).collect();
            v.pairs.iter().all(|(x, y)| match (inv_a.get(x), inv_b.get(y)) {
                (Some(ox), Some(oy)) => ox == oy,
                _ => false,
            })
        }
    }
}

/// Do `a` and `b` unfold to the same pure lambda-term (up to alpha)?
///
/// Runs in time polynomial in the sizes of `a` and `b`, not of their
/// unfoldings. The verdict is read off the root cell: a constraining
/// set that translates back, through the preprocessing renamings, to
/// the identity on the original free names.
pub fn unfold_eq(a: &Term, b: &Term) -> bool {
    let pp = preprocess(a, b);
    let mut ck = Checker::new(&pp);
    let root = ck.demand(0, 0).expect("dependency order is acyclic on preprocessed pairs");
    root_verdict(&pp, &root)
}

/// As [`unfold_eq`] but returns the matrix too (demand-driven cells
/// only), for dumping.
pub fn unfold_eq_with_matrix(a: &Term, b: &Term, worklist: bool) -> (bool, UnfoldingMatrix) {
    let pp = preprocess(a, b);
    let m = if worklist {
        fill_matrix_worklist(&pp).expect("dependency order is acyclic")
    } else {
        fill_matrix(&pp).expect("dependency order is acyclic")
    };
    let verdict = m.root().map(|v| root_verdict(&pp, v)).unwrap_or(false);
    (verdict, m)
}

/// Brute-force test oracle: the unique free-variable bijection making
/// two pure terms mutual renamings of each other, when it exists.
pub fn unifying_renaming_oracle(t: &Term, u: &Term) -> Option<ConstrainingSet> {
    fn go(
        t: &Term,
        u: &Term,
        env_t: &mut Vec<Name>,
        env_u: &mut Vec<Name>,
        acc: &mut ConstrainingSet,
    ) -> bool {
        match (t.node(), u.node()) {
            (TermNode::Var(x), TermNode::Var(y)) => {
                let ix = env_t.iter().rposition(|n| n == x);
                let iy = env_u.iter().rposition(|n| n == y);
                match (ix, iy) {
                    (Some(i), Some(j)) => i == j,
                    (None, None) => {
                        let pair = ConstrainingSet::singleton(x.clone(), y.clone());
                        if coherent(acc, &pair) {
                            acc.pairs.insert((x.clone(), y.clone()));
                            true
                        } else {
                            false
                        }
                    }
                    _ => false,
                }
            }
            (TermNode::App(f1, a1), TermNode::App(f2, a2)) => {
                go(f1, f2, env_t, env_u, acc) && go(a1, a2, env_t, env_u, acc)
            }
            (TermNode::Abs(x, b1), TermNode::Abs(y, b2)) => {
                env_t.push(x.clone());
                env_u.push(y.clone());
                let r = go(b1, b2, env_t, env_u, acc);
                env_t.pop();
                env_u.pop();
                r
            }
            _ => false,
        }
    }
    let mut acc = ConstrainingSet::empty();
    if go(t, u, &mut Vec::new(), &mut Vec::new(), &mut acc) {
        Some(acc)
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse;
    use crate::term::alpha_eq;

    fn t(s: &str) -> Term {
        parse(s).unwrap()
    }

    fn n(s: &str) -> Name {
        Name::new(s)
    }

    #[test]
    fn relative_unfold_examples() {
        let host = t("(x y)[y/u]");
        assert!(alpha_eq(&relative_unfold(&host, &Occurrence::root()).unwrap(), &unfold(&host).unwrap()));
        // focus on the body: the enclosing substitution applies
        let occ = Occurrence(vec![Step::BodyOfSub]);
        assert!(alpha_eq(&relative_unfold(&host, &occ).unwrap(), &t("x u")));
        // application contexts contribute nothing
        let host2 = t("(z w) r");
        let occ2 = Occurrence(vec![Step::FunOf]);
        assert_eq!(relative_unfold(&host2, &occ2).unwrap(), t("z w"));
        // argument position of a substitution: enclosing sub does not apply
        let host3 = t("(x y)[y/z w]");
        let occ3 = Occurrence(vec![Step::ArgOfSub]);
        assert_eq!(relative_unfold(&host3, &occ3).unwrap(), t("z w"));
    }

    #[test]
    fn preprocess_examples() {
        let pp = preprocess(&t("\\x.x"), &t("\\x.x"));
        assert_eq!(pp.a, t("\\x#1.x#1"));
        assert_eq!(pp.b, t("\\x#2.x#2"));
        assert!(pp.subst_names.is_empty());

        // gc removes the dead substitution, free maps are recorded
        let pp2 = preprocess(&t("y[x/z]"), &t("w"));
        assert_eq!(pp2.a, t("y#1"));
        assert_eq!(pp2.b, t("w#2"));
        assert_eq!(pp2.rename_a[&n("y")], Name::with_tag("y", 1));
        assert_eq!(pp2.rename_b[&n("w")], Name::with_tag("w", 2));

        let pp3 = preprocess(&t("(x x)[x/\\y.y]"), &t("(\\z.z) (\\w.w)"));
        assert_eq!(pp3.subst_names.len(), 1);
        assert!(pp3.a.es_count() == 1);
    }

    #[test]
    fn coherence_and_combine_examples() {
        let a = ConstrainingSet::singleton(n("x"), n("y"));
        assert!(coherent(&a, &a));
        let b = ConstrainingSet::singleton(n("x"), n("z"));
        assert!(!coherent(&a, &b));
        assert!(coherent(&ConstrainingSet::empty(), &b));

        let v = combine(&Value::Set(a.clone()), &Value::Set(ConstrainingSet::singleton(n("z"), n("w"))));
        assert_eq!(
            v,
            Value::Set(ConstrainingSet {
                pairs: BTreeSet::from([(n("x"), n("y")), (n("z"), n("w"))])
            })
        );
        assert_eq!(combine(&Value::Set(a.clone()), &Value::Set(b)), Value::Bottom);
        assert_eq!(combine(&Value::Bottom, &Value::empty_set()), Value::Bottom);
    }

    #[test]
    fn fill_small_identity() {
        let pp = preprocess(&t("\\x.x"), &t("\\y.y"));
        let m = fill_matrix(&pp).unwrap();
        assert_eq!(m.rows.len() * m.cols.len(), 4);
        assert_eq!(m.root(), Some(&Value::empty_set()));
    }

    #[test]
    fn fill_shared_vs_spelled_out() {
        assert!(unfold_eq(&t("(x x)[x/\\y.y]"), &t("(\\z.z) (\\w.w)")));
        assert!(!unfold_eq(&t("\\x.x"), &t("\\x.x x")));
        assert!(!unfold_eq(&t("\\x.x"), &t("\\x.\\y.y")));
    }

    #[test]
    fn open_terms_need_identical_free_names() {
        assert!(unfold_eq(&t("x y"), &t("x y")));
        assert!(!unfold_eq(&t("x"), &t("y")));
        assert!(unfold_eq(&t("(z y)[z/x]"), &t("x y")));
    }

    #[test]
    fn worklist_and_recursive_fills_agree() {
        for (a, b) in [
            ("(x x)[x/\\y.y]", "(\\z.z) (\\w.w)"),
            ("\\x.x", "\\x.x x"),
            ("(x y)[x/y r][y/u]", "(u r) u"),
            ("x", "y"),
        ] {
            let pp = preprocess(&t(a), &t(b));
            let m1 = fill_matrix(&pp).unwrap();
            let m2 = fill_matrix_worklist(&pp).unwrap();
            assert_eq!(m1.rows.len(), m2.rows.len());
            for i in 0..m1.rows.len() {
                for j in 0..m1.cols.len() {
                    assert_eq!(m1.get(i, j), m2.get(i, j), "cell ({i},{j}) on {a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn unfold_eq_matches_oracle_on_examples() {
        let cases = [
            ("(x x)[x/\\y.y]", "(\\z.z) (\\w.w)"),
            ("(x y)[x/y r][y/u]", "(u r) u"),
            ("((x y)[x/y r])[y/u]", "(u r) u"),
            ("x[x/y]", "y"),
            ("x[x/y]", "z"),
            ("\\x.x", "\\y.y y"),
            ("(\\x.x) y", "(\\x.x) y"),
        ];
        for (sa, sb) in cases {
            let (a, b) = (t(sa), t(sb));
            let want = alpha_eq(&unfold(&a).unwrap(), &unfold(&b).unwrap());
            assert_eq!(unfold_eq(&a, &b), want, "{sa} vs {sb}");
        }
    }

    #[test]
    fn unifying_renaming_examples() {
        assert_eq!(
            unifying_renaming_oracle(&t("x"), &t("y")),
            Some(ConstrainingSet::singleton(n("x"), n("y")))
        );
        assert_eq!(
            unifying_renaming_oracle(&t("\\z.x z"), &t("\\z.y z")),
            Some(ConstrainingSet::singleton(n("x"), n("y")))
        );
        assert_eq!(unifying_renaming_oracle(&t("x x"), &t("x y")), None);
        assert_eq!(
            unifying_renaming_oracle(&t("\\a.a"), &t("\\b.b")),
            Some(ConstrainingSet::empty())
        );
    }

    #[test]
    fn matrix_tsv_renders() {
        let (verdict, m) = unfold_eq_with_matrix(&t("\\x.x"), &t("\\y.y"), false);
        assert!(verdict);
        let tsv = m.to_tsv();
        assert!(tsv.contains("{}"));
        assert!(tsv.lines().count() == m.rows.len() + 1);
    }
}
