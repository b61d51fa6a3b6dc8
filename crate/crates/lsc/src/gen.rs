//! Test fixtures: the exponential family t_n / r_n, exhaustive term
//! enumeration over a small name pool, and random term generators.

use crate::name::Name;
use crate::term::Term;
use rand::Rng;

/// Default refusal threshold for materializing r_n (its tree doubles
/// with every level).
pub const FAMILY_CAP: u32 = 24;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum GenError {
    #[error("refusing to build r_{n}: exceeds cap {cap} (tree size would be 8*2^{n}-3 nodes)")]
    FamilyCapExceeded { n: u32, cap: u32 },
}

fn u_term() -> Term {
    let (x, y) = (Name::new("x"), Name::new("y"));
    Term::app(Term::app(Term::var(y), Term::var(x.clone())), Term::var(x))
}

/// t_0 = y x x and t_{n+1} = (\x.t_n) (y x x); size is linear in n and
/// head reduction reaches the normal form r_n in exactly n steps.
pub fn family_t(n: u32) -> Term {
    let x = Name::new("x");
    let mut t = u_term();
    for _ in 0..n {
        t = Term::app(Term::abs(x.clone(), t), u_term());
    }
    t
}

/// r_0 = y x x and r_{n+1} = y r_n r_n, built as a genuine tree with no
/// shared subterms. Exponential on purpose.
pub fn family_r(n: u32, cap: u32) -> Result<Term, GenError> {
    if n > cap {
        return Err(GenError::FamilyCapExceeded { n, cap });
    }
    fn build(n: u32, y: &Name) -> Term {
        if n == 0 {
            u_term()
        } else {
            Term::app(Term::app(Term::var(y.clone()), build(n - 1, y)), build(n - 1, y))
        }
    }
    Ok(build(n, &Name::new("y")))
}

/// The pair (t_n, r_n) with the default cap on r_n.
pub fn gen_family(n: u32) -> Result<(Term, Term), GenError> {
    gen_family_with_cap(n, FAMILY_CAP)
}

pub fn gen_family_with_cap(n: u32, cap: u32) -> Result<(Term, Term), GenError> {
    Ok((family_t(n), family_r(n, cap)?))
}

/// All terms of tree size exactly `size` whose variables (free and
/// bound) are drawn from `names`. With `pure_only` no substitution
/// nodes are generated.
pub fn terms_of_size(size: usize, names: &[Name], pure_only: bool) -> Vec<Term> {
    let mut by_size: Vec<Vec<Term>> = vec![Vec::new()];
    for s in 1..=size {
        let mut out = Vec::new();
        if s == 1 {
            out.extend(names.iter().map(|n| Term::var(n.clone())));
        } else {
            for x in names {
                for b in &by_size[s - 1] {
                    out.push(Term::abs(x.clone(), b.clone()));
                }
            }
            for i in 1..s - 1 {
                let j = s - 1 - i;
                for f in &by_size[i] {
                    for a in &by_size[j] {
                        out.push(Term::app(f.clone(), a.clone()));
                    }
                }
            }
            if !pure_only {
                for i in 1..s - 1 {
                    let j = s - 1 - i;
                    for x in names {
                        for b in &by_size[i] {
                            for a in &by_size[j] {
                                out.push(Term::sub(b.clone(), x.clone(), a.clone()));
                            }
                        }
                    }
                }
            }
        }
        by_size.push(out);
    }
    by_size.pop().unwrap()
}

/// All terms of size at most `max_size` (see [`terms_of_size`]).
pub fn terms_up_to(max_size: usize, names: &[Name], pure_only: bool) -> Vec<Term> {
    let mut out = Vec::new();
    for s in 1..=max_size {
        out.extend(terms_of_size(s, names, pure_only));
    }
    out
}

/// Random pure lambda-term of roughly `fuel` nodes.
pub fn random_pure<R: Rng>(rng: &mut R, fuel: usize, names: &[Name]) -> Term {
    if fuel <= 1 {
        return Term::var(names[rng.gen_range(0..names.len())].clone());
    }
    match rng.gen_range(0..10) {
        0..=1 => Term::var(names[rng.gen_range(0..names.len())].clone()),
        2..=5 => {
            let x = names[rng.gen_range(0..names.len())].clone();
            Term::abs(x, random_pure(rng, fuel - 1, names))
        }
        _ => {
            let left = rng.gen_range(1..fuel.max(2));
            Term::app(
                random_pure(rng, left, names),
                random_pure(rng, fuel - 1 - left.min(fuel - 1), names),
            )
        }
    }
}

/// Random term with explicit substitutions. When `shallow` holds,
/// substitution arguments are pure lambda-terms.
pub fn random_es<R: Rng>(rng: &mut R, fuel: usize, names: &[Name], shallow: bool) -> Term {
    if fuel <= 1 {
        return Term::var(names[rng.gen_range(0..names.len())].clone());
    }
    match rng.gen_range(0..12) {
        0..=1 => Term::var(names[rng.gen_range(0..names.len())].clone()),
        2..=4 => {
            let x = names[rng.gen_range(0..names.len())].clone();
            Term::abs(x, random_es(rng, fuel - 1, names, shallow))
        }
        5..=8 => {
            let left = rng.gen_range(1..fuel.max(2));
            Term::app(
                random_es(rng, left, names, shallow),
                random_es(rng, fuel - 1 - left.min(fuel - 1), names, shallow),
            )
        }
        _ => {
            let x = names[rng.gen_range(0..names.len())].clone();
            let left = rng.gen_range(1..fuel.max(2));
            let right = fuel - 1 - left.min(fuel - 1);
            let body = random_es(rng, left, names, shallow);
            let arg = if shallow {
                random_pure(rng, right.max(1), names)
            } else {
                random_es(rng, right.max(1), names, shallow)
            };
            Term::sub(body, x, arg)
        }
    }
}
