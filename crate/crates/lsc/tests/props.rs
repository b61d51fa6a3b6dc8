//! Property tests for the calculus: printing round-trips, binding laws,
//! rule inclusions, diamonds, factorization and swap lemmas, and the
//! exactness of the head measure, on exhaustive small terms and random
//! larger ones.

use lsc::gen::{random_es, random_pure, terms_up_to};
use lsc::measure::{head_measure, is_hh_occurrence};
use lsc::name::Name;
use lsc::parse::parse;
use lsc::reduce::{
    apply_step, linear_unfold, normalize, redexes, simulate_head, unfold, Policy, ReductionStep,
    RuleLabel,
};
use lsc::term::{alpha_eq, box_subterms, subst, Term, TermNode};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn names() -> Vec<Name> {
    vec![Name::new("x"), Name::new("y")]
}

fn rand_term(seed: u64, fuel: usize, pure: bool, shallow: bool) -> Term {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pool = [Name::new("x"), Name::new("y"), Name::new("z")];
    if pure {
        random_pure(&mut rng, fuel, &pool)
    } else {
        random_es(&mut rng, fuel, &pool, shallow)
    }
}

proptest! {
    #[test]
    fn print_parse_round_trip(seed in any::<u64>()) {
        let t = rand_term(seed, 12, false, false);
        let printed = t.to_string();
        let back = parse(&printed).unwrap();
        prop_assert_eq!(&back, &t);
        // printing is grammar-normal: printing again is stable
        prop_assert_eq!(back.to_string(), printed);
    }

    #[test]
    fn alpha_eq_is_invariant_under_fresh_renaming(seed in any::<u64>()) {
        let t = rand_term(seed, 10, false, false);
        // uniformly freshen every binder by rebuilding with new tags
        fn freshen(t: &Term, k: &mut u32) -> Term {
            match t.node() {
                TermNode::Var(_) => t.clone(),
                TermNode::App(f, a) => {
                    let f2 = freshen(f, k);
                    Term::app(f2, freshen(a, k))
                }
                TermNode::Abs(x, b) => {
                    *k += 1;
                    let x2 = x.retag(*k + 1000);
                    let b2 = subst(b, x, &Term::var(x2.clone()));
                    Term::abs(x2, freshen(&b2, k))
                }
                TermNode::Sub(b, x, a) => {
                    *k += 1;
                    let x2 = x.retag(*k + 1000);
                    let b2 = subst(b, x, &Term::var(x2.clone()));
                    let a2 = freshen(a, k);
                    Term::sub(freshen(&b2, k), x2, a2)
                }
            }
        }
        let u = freshen(&t, &mut 0);
        prop_assert!(alpha_eq(&t, &u));
    }

    #[test]
    fn subst_respects_free_variables(seed in any::<u64>()) {
        let t = rand_term(seed, 10, false, false);
        let u = rand_term(seed.wrapping_add(1), 6, false, false);
        let x = Name::new("x");
        let r = subst(&t, &x, &u);
        if t.occurs_free(&x) {
            let mut expect = t.fv();
            expect.remove(&x);
            expect.extend(u.fv());
            prop_assert_eq!(r.fv(), expect);
        } else {
            prop_assert!(alpha_eq(&r, &t));
        }
    }

    #[test]
    fn unfold_agrees_with_substitution_normalization(seed in any::<u64>()) {
        let t = rand_term(seed, 10, false, false);
        let structural = unfold(&t).unwrap();
        prop_assert!(structural.is_pure());
        for policy in [Policy::LeftmostOutermost, Policy::LsFirst, Policy::DbFirst] {
            let via_rules = normalize(&t, &[RuleLabel::LS, RuleLabel::GC], policy, 1_000_000)
                .unwrap()
                .term;
            prop_assert!(alpha_eq(&structural, &via_rules));
        }
    }

    #[test]
    fn full_composition(seed in any::<u64>()) {
        // t[x/u] normalizes under the substitution rules to t{x/u}
        let t = rand_term(seed, 8, true, false);
        let u = rand_term(seed.wrapping_add(7), 6, true, false);
        let x = Name::new("x");
        let es = Term::sub(t.clone(), x.clone(), u.clone());
        let nf = normalize(&es, &[RuleLabel::LS, RuleLabel::GC], Policy::LeftmostOutermost, 100_000)
            .unwrap()
            .term;
        prop_assert!(alpha_eq(&nf, &subst(&t, &x, &u)));
    }

    #[test]
    fn simulate_head_is_exact_on_random_terms(seed in any::<u64>()) {
        let t = rand_term(seed, 10, true, false);
        for step in redexes(&t, RuleLabel::HeadBeta).unwrap() {
            let beta = apply_step(&t, &step).unwrap();
            let (end, trace) = simulate_head(&t, &step).unwrap();
            prop_assert_eq!(&end, &beta);
            prop_assert_eq!(trace.count(RuleLabel::HeadDB), 1);
        }
    }
}

#[test]
fn head_rules_are_contained_in_full_rules() {
    let all = terms_up_to(7, &names(), false);
    for t in &all {
        let contains = |head: &[ReductionStep], full: &[ReductionStep], rule: RuleLabel| {
            head.iter().all(|h| {
                full.iter().any(|f| f.redex == h.redex && f.var_occ == h.var_occ && f.rule == rule)
            })
        };
        let db = redexes(t, RuleLabel::DB).unwrap();
        let hdb = redexes(t, RuleLabel::HeadDB).unwrap();
        assert!(contains(&hdb, &db, RuleLabel::DB));
        let ls = redexes(t, RuleLabel::LS).unwrap();
        let hls = redexes(t, RuleLabel::HeadLS).unwrap();
        assert!(contains(&hls, &ls, RuleLabel::LS));
        if t.is_pure() {
            let b = redexes(t, RuleLabel::Beta).unwrap();
            let hb = redexes(t, RuleLabel::HeadBeta).unwrap();
            assert!(contains(&hb, &b, RuleLabel::Beta));
        }
    }
}

#[test]
fn linear_head_reduction_is_deterministic() {
    for t in terms_up_to(7, &names(), false) {
        assert!(redexes(&t, RuleLabel::HeadLS).unwrap().len() <= 1, "on {}", t);
    }
}

#[test]
fn head_beta_diamond_small() {
    for t in terms_up_to(7, &names(), true) {
        let steps = redexes(&t, RuleLabel::HeadBeta).unwrap();
        for (i, s1) in steps.iter().enumerate() {
            for s2 in steps.iter().skip(i + 1) {
                let u1 = apply_step(&t, s1).unwrap();
                let u2 = apply_step(&t, s2).unwrap();
                if alpha_eq(&u1, &u2) {
                    continue;
                }
                let r1: Vec<Term> = redexes(&u1, RuleLabel::HeadBeta)
                    .unwrap()
                    .iter()
                    .map(|s| apply_step(&u1, s).unwrap())
                    .collect();
                let r2: Vec<Term> = redexes(&u2, RuleLabel::HeadBeta)
                    .unwrap()
                    .iter()
                    .map(|s| apply_step(&u2, s).unwrap())
                    .collect();
                assert!(
                    r1.iter().any(|a| r2.iter().any(|b| alpha_eq(a, b))),
                    "diamond fails for {}",
                    t
                );
            }
        }
    }
}

fn linear_steps(t: &Term) -> Vec<ReductionStep> {
    let mut v = redexes(t, RuleLabel::HeadDB).unwrap();
    v.extend(redexes(t, RuleLabel::HeadLS).unwrap());
    v
}

#[test]
fn linear_head_diamond_small() {
    for t in terms_up_to(7, &names(), false) {
        let steps = linear_steps(&t);
        for (i, s1) in steps.iter().enumerate() {
            for s2 in steps.iter().skip(i + 1) {
                let u1 = apply_step(&t, s1).unwrap();
                let u2 = apply_step(&t, s2).unwrap();
                if alpha_eq(&u1, &u2) {
                    continue;
                }
                let r1: Vec<Term> =
                    linear_steps(&u1).iter().map(|s| apply_step(&u1, s).unwrap()).collect();
                let r2: Vec<Term> =
                    linear_steps(&u2).iter().map(|s| apply_step(&u2, s).unwrap()).collect();
                assert!(
                    r1.iter().any(|a| r2.iter().any(|b| alpha_eq(a, b))),
                    "linear diamond fails for {}",
                    t
                );
            }
        }
    }
}

/// Non-head substitution steps: ls or gc steps that are not head linear
/// substitution steps.
fn nonhead_s_steps(t: &Term) -> Vec<ReductionStep> {
    let hls = redexes(t, RuleLabel::HeadLS).unwrap();
    let mut out = Vec::new();
    for s in redexes(t, RuleLabel::LS).unwrap() {
        if !hls.iter().any(|h| h.redex == s.redex && h.var_occ == s.var_occ) {
            out.push(s);
        }
    }
    out.extend(redexes(t, RuleLabel::GC).unwrap());
    out
}

#[test]
fn swap_nonhead_then_multiplicative() {
    // t =s=> u -dB-> r implies t -dB-> s =s=> r
    for t in terms_up_to(6, &names(), false) {
        for s1 in nonhead_s_steps(&t) {
            let u = apply_step(&t, &s1).unwrap();
            for s2 in redexes(&u, RuleLabel::HeadDB).unwrap() {
                let r = apply_step(&u, &s2).unwrap();
                let mut found = false;
                'outer: for s3 in redexes(&t, RuleLabel::HeadDB).unwrap() {
                    let v = apply_step(&t, &s3).unwrap();
                    for s4 in nonhead_s_steps(&v) {
                        if alpha_eq(&apply_step(&v, &s4).unwrap(), &r) {
                            found = true;
                            break 'outer;
                        }
                    }
                }
                assert!(found, "swap fails for {}", t);
            }
        }
    }
}

#[test]
fn factorization_nonhead_then_head_ls() {
    // t =s=> u -ls-> r admits some completion t -ls->+ =s=>+ r
    for t in terms_up_to(6, &names(), false) {
        for s1 in nonhead_s_steps(&t) {
            let u = apply_step(&t, &s1).unwrap();
            for s2 in redexes(&u, RuleLabel::HeadLS).unwrap() {
                let r = apply_step(&u, &s2).unwrap();
                // ls is deterministic: at most two ls prefixes to try
                let mut fronts = Vec::new();
                if let Some(l1) = redexes(&t, RuleLabel::HeadLS).unwrap().first() {
                    let t1 = apply_step(&t, l1).unwrap();
                    fronts.push(t1.clone());
                    if let Some(l2) = redexes(&t1, RuleLabel::HeadLS).unwrap().first() {
                        fronts.push(apply_step(&t1, l2).unwrap());
                    }
                }
                let mut found = false;
                'outer: for f in &fronts {
                    for s3 in nonhead_s_steps(f) {
                        let v = apply_step(f, &s3).unwrap();
                        if alpha_eq(&v, &r) {
                            found = true;
                            break 'outer;
                        }
                        for s4 in nonhead_s_steps(&v) {
                            if alpha_eq(&apply_step(&v, &s4).unwrap(), &r) {
                                found = true;
                                break 'outer;
                            }
                        }
                    }
                }
                assert!(found, "factorization fails for {} via {:?}", t, s1.rule);
            }
        }
    }
}

#[test]
fn head_step_substitutivity() {
    // t ->h u implies t{x/r} ->h u{x/r}
    let x = Name::new("x");
    let args = [parse("y").unwrap(), parse("\\z.z z").unwrap(), parse("y y").unwrap()];
    for t in terms_up_to(6, &names(), true) {
        if !t.occurs_free(&x) {
            continue;
        }
        for step in redexes(&t, RuleLabel::HeadBeta).unwrap() {
            let u = apply_step(&t, &step).unwrap();
            for r in &args {
                let lhs = subst(&t, &x, r);
                let want = subst(&u, &x, r);
                let ok = redexes(&lhs, RuleLabel::HeadBeta)
                    .unwrap()
                    .iter()
                    .any(|s| alpha_eq(&apply_step(&lhs, s).unwrap(), &want));
                assert!(ok, "substitutivity fails for {} with {}", t, r);
            }
        }
    }
}

#[test]
fn db_rule_sides_have_equal_box_subterms() {
    // the redex and its contractum, as standalone terms, have the same
    // box-subterms (the step case of the subterm property)
    for t in terms_up_to(7, &names(), false) {
        for step in redexes(&t, RuleLabel::DB).unwrap() {
            let lhs = step.redex.resolve(&t).unwrap();
            let root_step = ReductionStep {
                rule: RuleLabel::DB,
                redex: lsc::term::Occurrence::root(),
                var_occ: None,
            };
            let rhs = apply_step(&lhs, &root_step).unwrap();
            let before: Vec<Term> = box_subterms(&lhs).into_iter().map(|(_, b)| b).collect();
            let mut after: Vec<Term> = box_subterms(&rhs).into_iter().map(|(_, b)| b).collect();
            assert_eq!(before.len(), after.len(), "on {}", t);
            // pairwise alpha-equal multisets
            for b in &before {
                let pos = after.iter().position(|a| alpha_eq(a, b));
                assert!(pos.is_some(), "box subterm lost on {}", t);
                after.remove(pos.unwrap());
            }
        }
    }
}

#[test]
fn measure_zero_iff_no_head_ls_redex() {
    for t in terms_up_to(7, &names(), false) {
        if !t.is_shallow() {
            assert!(head_measure(&t).is_err());
            continue;
        }
        let m = head_measure(&t).unwrap();
        let stuck = redexes(&t, RuleLabel::HeadLS).unwrap().is_empty();
        assert_eq!(m == 0, stuck, "zero characterization fails on {}", t);
    }
}

#[test]
fn measure_decreases_by_one_per_ls_step() {
    for t in terms_up_to(7, &names(), false) {
        if !t.is_shallow() {
            continue;
        }
        let m = head_measure(&t).unwrap();
        for s in redexes(&t, RuleLabel::HeadLS).unwrap() {
            let u = apply_step(&t, &s).unwrap();
            assert!(u.is_shallow(), "shallowness lost on {}", t);
            assert_eq!(head_measure(&u).unwrap() + 1, m, "decrease fails on {}", t);
        }
    }
}

#[test]
fn measure_equals_linear_unfold_length() {
    for t in terms_up_to(7, &names(), false) {
        if let Ok(m) = head_measure(&t) {
            assert_eq!(linear_unfold(&t).1, m, "exactness fails on {}", t);
        }
    }
}

#[test]
fn hh_occurrence_matches_grammar_on_examples() {
    let t = parse("((x y)[x/y r])[y/u]").unwrap();
    match t.node() {
        TermNode::Sub(b, y, _) => {
            assert!(is_hh_occurrence(b, y));
        }
        _ => unreachable!(),
    }
}

#[test]
fn spine_enumeration_matches_generic_enumeration() {
    // normalize's fast path must agree with the per-rule enumerator
    for t in terms_up_to(7, &names(), false) {
        let via_normalize =
            normalize(&t, &[RuleLabel::HeadDB, RuleLabel::HeadLS], Policy::LeftmostOutermost, 0);
        let first_fast = match via_normalize {
            Ok(_) => None,
            Err(lsc::reduce::ReduceError::StepLimit(_)) => {
                // re-run allowing one step to observe the chosen redex
                let n = normalize(
                    &t,
                    &[RuleLabel::HeadDB, RuleLabel::HeadLS],
                    Policy::LeftmostOutermost,
                    1,
                );
                match n {
                    Ok(n) => n.trace.steps.first().map(|(s, _)| s.clone()),
                    Err(lsc::reduce::ReduceError::StepLimit(n)) => {
                        n.trace.steps.first().map(|(s, _)| s.clone())
                    }
                    Err(e) => panic!("{e}"),
                }
            }
            Err(e) => panic!("{e}"),
        };
        let mut generic = linear_steps(&t);
        generic.sort_by_key(|s| {
            (s.redex.preorder_key(), s.var_occ.as_ref().map(|o| o.preorder_key()).unwrap_or_default())
        });
        match (first_fast, generic.first()) {
            (None, None) => {}
            (Some(a), Some(b)) => {
                assert_eq!(a.redex, b.redex, "on {}", t);
                assert_eq!(a.var_occ, b.var_occ, "on {}", t);
            }
            (a, b) => panic!("fast/generic disagree on {}: {:?} vs {:?}", t, a, b),
        }
    }
}
