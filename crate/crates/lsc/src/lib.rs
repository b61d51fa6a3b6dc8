//! The lambda calculus and the linear-substitution calculus: head and
//! linear head reduction with traces, the head-measure instrumentation
//! behind the quadratic cost bound, a polynomial-time checker for
//! equality of unfoldings, and a Turing-machine-to-lambda compiler
//! whose output normalizes under head reduction alone.

pub mod check;
pub mod gen;
pub mod measure;
pub mod name;
pub mod parse;
pub mod reduce;
pub mod term;
pub mod tm;

pub use name::Name;
pub use parse::parse;
pub use reduce::{
    apply_step, linear_unfold, normalize, redexes, simulate_head, unfold, Policy, ReduceError,
    ReductionStep, RuleLabel, Trace,
};
pub use term::{alpha_eq, box_subterms, subst, Occurrence, Step, Term, TermNode};
