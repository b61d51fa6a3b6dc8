//! Turing machines compiled to lambda-terms that normalize under head
//! reduction alone.
//!
//! Finite sets are encoded as selectors, strings by the Scott scheme
//! (constructor-as-selector, head-reduction friendly, unlike Church
//! numerals), and every building block is written in continuation
//! style: it takes the continuation first and applies it to the result.

use crate::measure::{trace_stats, TraceStats};
use crate::name::Name;
use crate::reduce::{normalize, Policy, ReduceError, RuleLabel};
use crate::term::{Term, TermNode};

#[derive(Debug, thiserror::Error)]
pub enum TmError {
    #[error("bad machine description: {0}")]
    BadMachine(String),
    #[error("symbol '{0}' is not in the alphabet")]
    BadSymbol(char),
    #[error("selector index {i} out of range 1..={n}")]
    BadIndex { i: usize, n: usize },
    #[error("delta must not contain the blank symbol")]
    DeltaBlank,
    #[error("delta symbol '{0}' is not in the machine alphabet")]
    DeltaNotInSigma(char),
    #[error("term is not a Scott string over the given alphabet")]
    NotAScottString,
    #[error("step limit exceeded")]
    StepLimit,
    #[error("encoded run disagrees with the direct simulation: expected {expected:?}, got {got:?}")]
    DecodeMismatch { expected: String, got: String },
    #[error(transparent)]
    Reduce(#[from] ReduceError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Move {
    L,
    R,
    S,
}

impl Move {
    pub fn as_str(self) -> &'static str {
        match self {
            Move::L => "L",
            Move::R => "R",
            Move::S => "S",
        }
    }

    pub fn from_str_move(s: &str) -> Option<Move> {
        Some(match s {
            "L" => Move::L,
            "R" => Move::R,
            "S" => Move::S,
            _ => return None,
        })
    }
}

/// A deterministic Turing machine. The transition function is total on
/// non-final states and undefined on the final state.
#[derive(Clone, Debug)]
pub struct TMachine {
    sigma: Vec<char>,
    blank: usize,
    states: Vec<String>,
    initial: usize,
    final_state: usize,
    /// delta[state][symbol] = (state, symbol, move)
    delta: Vec<Vec<Option<(usize, usize, Move)>>>,
}

impl TMachine {
    pub fn new(
        sigma: Vec<char>,
        blank: char,
        states: Vec<String>,
        initial: &str,
        final_state: &str,
        rules: &[((String, char), (String, char, Move))],
    ) -> Result<TMachine, TmError> {
        let sym = |c: char| -> Result<usize, TmError> {
            sigma.iter().position(|&s| s == c).ok_or(TmError::BadSymbol(c))
        };
        let st = |q: &str| -> Result<usize, TmError> {
            states
                .iter()
                .position(|s| s == q)
                .ok_or_else(|| TmError::BadMachine(format!("unknown state '{}'", q)))
        };
        let blank = sym(blank)?;
        let initial = st(initial)?;
        let final_state = st(final_state)?;
        let mut delta = vec![vec![None; sigma.len()]; states.len()];
        for ((q, a), (q2, a2, mv)) in rules {
            let (qi, ai) = (st(q)?, sym(*a)?);
            if qi == final_state {
                return Err(TmError::BadMachine("transition out of the final state".into()));
            }
            if delta[qi][ai].is_some() {
                return Err(TmError::BadMachine(format!("duplicate rule for ({}, {})", q, a)));
            }
            delta[qi][ai] = Some((st(q2)?, sym(*a2)?, *mv));
        }
        for (qi, row) in delta.iter().enumerate() {
            if qi != final_state && row.iter().any(Option::is_none) {
                return Err(TmError::BadMachine(format!(
                    "transition function is partial on state '{}'",
                    states[qi]
                )));
            }
        }
        Ok(TMachine { sigma, blank, states, initial, final_state, delta })
    }

    pub fn sigma(&self) -> &[char] {
        &self.sigma
    }

    pub fn blank_char(&self) -> char {
        self.sigma[self.blank]
    }

    /// The default blank-free input/output alphabet.
    pub fn default_delta(&self) -> Vec<char> {
        self.sigma.iter().copied().filter(|&c| c != self.blank_char()).collect()
    }

    pub fn to_json(&self) -> serde_json::Value {
        use serde_json::json;
        let rules: Vec<serde_json::Value> = self
            .delta
            .iter()
            .enumerate()
            .flat_map(|(qi, row)| {
                row.iter().enumerate().filter_map(move |(ai, r)| {
                    r.map(|(q2, a2, mv)| (qi, ai, q2, a2, mv))
                })
            })
            .map(|(qi, ai, q2, a2, mv)| {
                json!({
                    "from": [self.states[qi], self.sigma[ai].to_string()],
                    "to": [self.states[q2], self.sigma[a2].to_string(), mv.as_str()],
                })
            })
            .collect();
        json!({
            "sigma": self.sigma.iter().map(|c| c.to_string()).collect::<Vec<_>>(),
            "blank": self.sigma[self.blank].to_string(),
            "states": self.states,
            "initial": self.states[self.initial],
            "final": self.states[self.final_state],
            "delta": rules,
        })
    }

    pub fn from_json(v: &serde_json::Value) -> Result<TMachine, TmError> {
        let bad = |m: &str| TmError::BadMachine(m.to_string());
        let one_char = |v: &serde_json::Value| -> Result<char, TmError> {
            let s = v.as_str().ok_or_else(|| bad("symbol must be a string"))?;
            let mut it = s.chars();
            match (it.next(), it.next()) {
                (Some(c), None) => Ok(c),
                _ => Err(bad("symbols must be single characters")),
            }
        };
        let sigma: Vec<char> = v
            .get("sigma")
            .and_then(|s| s.as_array())
            .ok_or_else(|| bad("missing sigma"))?
            .iter()
            .map(one_char)
            .collect::<Result<_, _>>()?;
        let blank = one_char(v.get("blank").ok_or_else(|| bad("missing blank"))?)?;
        let states: Vec<String> = v
            .get("states")
            .and_then(|s| s.as_array())
            .ok_or_else(|| bad("missing states"))?
            .iter()
            .map(|s| s.as_str().map(String::from).ok_or_else(|| bad("state must be a string")))
            .collect::<Result<_, _>>()?;
        let initial = v.get("initial").and_then(|s| s.as_str()).ok_or_else(|| bad("missing initial"))?;
        let final_state = v.get("final").and_then(|s| s.as_str()).ok_or_else(|| bad("missing final"))?;
        let mut rules = Vec::new();
        for r in v.get("delta").and_then(|d| d.as_array()).ok_or_else(|| bad("missing delta"))? {
            let from = r.get("from").and_then(|f| f.as_array()).ok_or_else(|| bad("rule needs from"))?;
            let to = r.get("to").and_then(|f| f.as_array()).ok_or_else(|| bad("rule needs to"))?;
            if from.len() != 2 || to.len() != 3 {
                return Err(bad("rule shape is from:[q,a] to:[q,a,move]"));
            }
            let q = from[0].as_str().ok_or_else(|| bad("state must be a string"))?.to_string();
            let a = one_char(&from[1])?;
            let q2 = to[0].as_str().ok_or_else(|| bad("state must be a string"))?.to_string();
            let a2 = one_char(&to[1])?;
            let mv = Move::from_str_move(to[2].as_str().ok_or_else(|| bad("move must be a string"))?)
                .ok_or_else(|| bad("move must be L, R or S"))?;
            rules.push(((q, a), (q2, a2, mv)));
        }
        TMachine::new(sigma, blank, states, initial, final_state, &rules)
    }
}

/// A machine configuration: tape left of the head (stored reversed),
/// the scanned symbol, the tape to the right, and the current state.
/// All entries are indices into the machine's alphabet/state tables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TMConfig {
    pub left_rev: Vec<usize>,
    pub head: usize,
    pub right: Vec<usize>,
    pub state: usize,
}

impl TMConfig {
    pub fn initial(m: &TMachine, input: &str) -> Result<TMConfig, TmError> {
        let right = input
            .chars()
            .map(|c| {
                let i = m.sigma.iter().position(|&s| s == c).ok_or(TmError::BadSymbol(c))?;
                if i == m.blank {
                    return Err(TmError::BadSymbol(c));
                }
                Ok(i)
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(TMConfig { left_rev: Vec::new(), head: m.blank, right, state: m.initial })
    }

    pub fn is_final(&self, m: &TMachine) -> bool {
        self.state == m.final_state
    }
}

/// One machine step; `None` on a final configuration.
fn tm_step(m: &TMachine, c: &TMConfig) -> Option<TMConfig> {
    if c.is_final(m) {
        return None;
    }
    let (q2, a2, mv) = m.delta[c.state][c.head].expect("delta is total on non-final states");
    let mut n = c.clone();
    n.state = q2;
    match mv {
        Move::S => {
            n.head = a2;
        }
        Move::L => {
            n.right.insert(0, a2);
            n.head = n.left_rev.pop().unwrap_or(m.blank);
        }
        Move::R => {
            n.left_rev.push(a2);
            n.head = if n.right.is_empty() { m.blank } else { n.right.remove(0) };
        }
    }
    Some(n)
}

/// Direct simulation from the initial configuration for `input`;
/// returns the final configuration and the number of steps taken.
pub fn tm_run_config(
    m: &TMachine,
    input: &str,
    max_steps: u64,
) -> Result<(TMConfig, u64), TmError> {
    let mut cfg = TMConfig::initial(m, input)?;
    let mut steps = 0u64;
    while let Some(next) = tm_step(m, &cfg) {
        cfg = next;
        steps += 1;
        if steps > max_steps {
            return Err(TmError::StepLimit);
        }
    }
    Ok((cfg, steps))
}

/// Keep only the symbols of `keep`, dropping the rest (the forget map).
pub fn forget(m: &TMachine, tape: &[usize], keep: &[char]) -> String {
    tape.iter().map(|&i| m.sigma[i]).filter(|c| keep.contains(c)).collect()
}

/// Direct simulation; the output string is the blank-stripped right
/// tape of the final configuration. Oracle for [`run_encoded`].
pub fn tm_run(m: &TMachine, input: &str, max_steps: u64) -> Result<(String, u64), TmError> {
    let (cfg, steps) = tm_run_config(m, input, max_steps)?;
    let keep: Vec<char> = m.sigma.iter().copied().filter(|&c| c != m.blank_char()).collect();
    Ok((forget(m, &cfg.right, &keep), steps))
}

fn v(s: &str) -> Term {
    Term::var(Name::new(s))
}

fn lam(names: &[&str], body: Term) -> Term {
    Term::lams(names.iter().map(|s| Name::new(*s)), body)
}

fn selector_binders(n: usize) -> Vec<Name> {
    (1..=n).map(|i| Name::new(format!("x{}", i))).collect()
}

/// The i-th element of an n-element set: `\x1...\xn.xi` (1-based).
pub fn encode_element(i: usize, n: usize) -> Result<Term, TmError> {
    if i == 0 || i > n {
        return Err(TmError::BadIndex { i, n });
    }
    let binders = selector_binders(n);
    let body = Term::var(binders[i - 1].clone());
    Ok(Term::lams(binders, body))
}

/// Scott string over `alphabet`: the empty string selects its last
/// argument, a cons cell applies the selector of its head symbol to the
/// encoded tail.
pub fn encode_string(s: &str, alphabet: &[char]) -> Result<Term, TmError> {
    let n = alphabet.len();
    let nil = {
        let mut binders = selector_binders(n);
        binders.push(Name::new("y"));
        let body = Term::var(Name::new("y"));
        Term::lams(binders, body)
    };
    let mut t = nil;
    for c in s.chars().rev() {
        let i = alphabet.iter().position(|&a| a == c).ok_or(TmError::BadSymbol(c))?;
        let mut binders = selector_binders(n);
        binders.push(Name::new("y"));
        let body = Term::app(Term::var(binders[i].clone()), t);
        t = Term::lams(binders, body);
    }
    Ok(t)
}

/// Structural inverse of [`encode_string`]. The term must be exactly a
/// Scott string (binder names aside); eta-variants are rejected.
pub fn decode_string(t: &Term, alphabet: &[char]) -> Result<String, TmError> {
    let n = alphabet.len();
    let mut out = String::new();
    let mut cur = t.clone();
    loop {
        let mut binders = Vec::with_capacity(n + 1);
        let mut body = cur.clone();
        for _ in 0..n + 1 {
            match body.node() {
                TermNode::Abs(x, b) => {
                    binders.push(x.clone());
                    body = b.clone();
                }
                _ => return Err(TmError::NotAScottString),
            }
        }
        match body.node() {
            TermNode::Var(z) if *z == binders[n] => return Ok(out),
            TermNode::App(f, tail) => match f.node() {
                TermNode::Var(z) => {
                    let i = binders[..n]
                        .iter()
                        .position(|b| b == z)
                        .ok_or(TmError::NotAScottString)?;
                    out.push(alphabet[i]);
                    cur = tail.clone();
                }
                _ => return Err(TmError::NotAScottString),
            },
            _ => return Err(TmError::NotAScottString),
        }
    }
}

/// The call-by-name fixed-point combinator `H = t t` with
/// `t = \x.\y.y (x x y)`; `H u` head-reduces to `u (H u)` in two steps.
pub fn fixpoint_h() -> Term {
    let t = lam(
        &["x", "y"],
        Term::app(v("y"), Term::apps(v("x"), [v("x"), v("y")])),
    );
    Term::app(t.clone(), t)
}

/// Character prepend in continuation style: `AC k (a) (u)` head-reduces
/// to `k (a u)` in at most `|alphabet| + 5` steps.
pub fn append_char_term(alphabet: &[char]) -> Term {
    let n = alphabet.len();
    // M_i = \u2.\k2.k2 (\x1...\xn.\w.xi u2)
    let ms: Vec<Term> = (0..n)
        .map(|i| {
            let mut binders = selector_binders(n);
            binders.push(Name::new("w"));
            let cell = Term::lams(binders.clone(), Term::app(Term::var(binders[i].clone()), v("u2")));
            lam(&["u2", "k2"], Term::app(v("k2"), cell))
        })
        .collect();
    // \k.\a.\u. a M1...Mn u k
    let body = Term::apps(v("a"), ms.into_iter().chain([v("u"), v("k")]));
    lam(&["k", "a", "u"], body)
}

/// String conversion in continuation style: `CS k (u over sigma)`
/// head-reduces to `k (u restricted to delta, over delta)` in at most
/// `|u|(2|sigma|+12) + |sigma| + 5` steps.
///
/// The recursion is pre-unfolded once and tied with plain
/// self-application so the measured step counts meet that bound
/// exactly; routing it through the fixed-point combinator costs two
/// extra steps per character.
pub fn convert_string_term(sigma: &[char], delta: &[char]) -> Term {
    let ac = append_char_term(delta);
    let nil_k = {
        let eps = encode_string("", delta).expect("empty string encodes");
        lam(&["k"], Term::app(v("k"), eps))
    };
    let ns: Vec<Term> = sigma
        .iter()
        .map(|c| {
            if delta.contains(c) {
                let ch = encode_string(&c.to_string(), delta).expect("char in delta");
                // actually need the bare character selector, not a string
                let _ = ch;
                let i = delta.iter().position(|d| d == c).unwrap() + 1;
                let sel = encode_element(i, delta.len()).expect("index in range");
                // N_i = \tl.\k. rec (AC k (c)) tl
                lam(
                    &["tl", "k"],
                    Term::apps(v("rec"), [Term::apps(ac.clone(), [v("k"), sel]), v("tl")]),
                )
            } else {
                // N_i = \tl.\k. rec k tl
                lam(&["tl", "k"], Term::apps(v("rec"), [v("k"), v("tl")]))
            }
        })
        .collect();
    // G = \rec.\k.\s. s N1...Nn N k
    let g = lam(
        &["rec", "k", "s"],
        Term::apps(v("s"), ns.into_iter().chain([nil_k, v("k")])),
    );
    // CS = G (W W) with W = \self. G (self self)
    let w = Term::abs(
        Name::new("self"),
        Term::app(g.clone(), Term::app(v("self"), v("self"))),
    );
    Term::app(g, Term::app(w.clone(), w))
}

/// Initial-configuration builder: `I k (u over delta)` head-reduces to
/// `k (initial configuration for u)`.
pub fn init_term(m: &TMachine, delta: &[char]) -> Result<Term, TmError> {
    check_delta(m, delta)?;
    let cs = convert_string_term(delta, &m.sigma);
    let eps = encode_string("", &m.sigma)?;
    let blank = encode_element(m.blank + 1, m.sigma.len())?;
    let q0 = encode_element(m.initial + 1, m.states.len())?;
    let build = lam(
        &["s"],
        Term::app(
            v("k"),
            lam(&["cfg"], Term::apps(v("cfg"), [eps, blank, v("s"), q0])),
        ),
    );
    Ok(lam(&["k", "inp"], Term::apps(cs, [build, v("inp")])))
}

/// Final-configuration extractor: `F k (final configuration for u)`
/// head-reduces to `k (u over delta)`.
pub fn final_term(m: &TMachine, delta: &[char]) -> Result<Term, TmError> {
    check_delta(m, delta)?;
    let cs = convert_string_term(&m.sigma, delta);
    let consume = lam(&["l", "h", "r", "q"], Term::apps(cs, [v("k"), v("r")]));
    Ok(lam(&["k", "cfg"], Term::app(v("cfg"), consume)))
}

/// Transition-function driver: `T k (configuration)` head-reduces to
/// `k (reachable final configuration)`, and diverges when the machine
/// does.
pub fn trans_term(m: &TMachine) -> Term {
    let nsig = m.sigma.len();
    let nq = m.states.len();
    let ac = append_char_term(&m.sigma);
    let enc_sym = |i: usize| encode_element(i + 1, nsig).expect("symbol index");
    let enc_state = |i: usize| encode_element(i + 1, nq).expect("state index");
    let eps = encode_string("", &m.sigma).expect("empty string encodes");

    let cfg_of = |l: Term, h: Term, r: Term, q: Term| -> Term {
        lam(&["cfg"], Term::apps(v("cfg"), [l, h, r, q]))
    };
    // continuation that recurses on a freshly built configuration
    let recurse_on = |cont_name: &str, cfg: Term| -> Term {
        Term::apps(v("rec"), [v(cont_name), cfg])
    };

    let ms: Vec<Term> = (0..nq)
        .map(|qi| {
            let njs: Vec<Term> = (0..nsig)
                .map(|aj| {
                    if qi == m.final_state {
                        // return the configuration unchanged
                        let cfg = cfg_of(v("l"), enc_sym(aj), v("r"), enc_state(qi));
                        return lam(&["l", "r", "k"], Term::app(v("k"), cfg));
                    }
                    let (ql, ak, mv) = m.delta[qi][aj].expect("delta total on non-final states");
                    match mv {
                        Move::S => {
                            let cfg = cfg_of(v("l"), enc_sym(ak), v("r"), enc_state(ql));
                            lam(&["l", "r", "k"], recurse_on("k", cfg))
                        }
                        Move::L => {
                            // pop the left tape; prepend the written symbol to the right
                            let ps: Vec<Term> = (0..nsig)
                                .map(|am| {
                                    let cfg =
                                        cfg_of(v("l2"), enc_sym(am), v("w"), enc_state(ql));
                                    lam(
                                        &["l2", "r2", "k2"],
                                        Term::apps(
                                            ac.clone(),
                                            [
                                                Term::abs(Name::new("w"), recurse_on("k2", cfg)),
                                                enc_sym(ak),
                                                v("r2"),
                                            ],
                                        ),
                                    )
                                })
                                .collect();
                            let p_nil = {
                                let cfg = cfg_of(
                                    eps.clone(),
                                    enc_sym(m.blank),
                                    v("w"),
                                    enc_state(ql),
                                );
                                lam(
                                    &["r2", "k2"],
                                    Term::apps(
                                        ac.clone(),
                                        [
                                            Term::abs(Name::new("w"), recurse_on("k2", cfg)),
                                            enc_sym(ak),
                                            v("r2"),
                                        ],
                                    ),
                                )
                            };
                            lam(
                                &["l", "r", "k"],
                                Term::apps(v("l"), ps.into_iter().chain([p_nil, v("r"), v("k")])),
                            )
                        }
                        Move::R => {
                            // push the written symbol onto the left tape; pop the right
                            let rs: Vec<Term> = (0..nsig)
                                .map(|am| {
                                    let cfg =
                                        cfg_of(v("w"), enc_sym(am), v("r2"), enc_state(ql));
                                    lam(
                                        &["r2", "l2", "k2"],
                                        Term::apps(
                                            ac.clone(),
                                            [
                                                Term::abs(Name::new("w"), recurse_on("k2", cfg)),
                                                enc_sym(ak),
                                                v("l2"),
                                            ],
                                        ),
                                    )
                                })
                                .collect();
                            let r_nil = {
                                let cfg = cfg_of(
                                    v("w"),
                                    enc_sym(m.blank),
                                    eps.clone(),
                                    enc_state(ql),
                                );
                                lam(
                                    &["l2", "k2"],
                                    Term::apps(
                                        ac.clone(),
                                        [
                                            Term::abs(Name::new("w"), recurse_on("k2", cfg)),
                                            enc_sym(ak),
                                            v("l2"),
                                        ],
                                    ),
                                )
                            };
                            lam(
                                &["l", "r", "k"],
                                Term::apps(v("r"), rs.into_iter().chain([r_nil, v("l"), v("k")])),
                            )
                        }
                    }
                })
                .collect();
            // M_i = \l.\h.\r.\k. h N_i1 ... N_in l r k
            lam(
                &["l", "h", "r", "k"],
                Term::apps(v("h"), njs.into_iter().chain([v("l"), v("r"), v("k")])),
            )
        })
        .collect();
    // G = \rec.\k.\cfg. cfg (\l.\h.\r.\q. q M1...Mm l h r k)
    let consumer = lam(
        &["l", "h", "r", "q"],
        Term::apps(v("q"), ms.into_iter().chain([v("l"), v("h"), v("r"), v("k")])),
    );
    let g = lam(&["rec", "k", "cfg"], Term::app(v("cfg"), consumer));
    Term::app(fixpoint_h(), g)
}

fn check_delta(m: &TMachine, delta: &[char]) -> Result<(), TmError> {
    for &c in delta {
        if c == m.blank_char() {
            return Err(TmError::DeltaBlank);
        }
        if !m.sigma.contains(&c) {
            return Err(TmError::DeltaNotInSigma(c));
        }
    }
    Ok(())
}

/// The whole compiled machine: `U (u over delta)` head-reduces to
/// `(f(u) over delta)` when the machine computes `f`, in a number of
/// steps linear in the machine's running time plus the input length.
pub fn machine_term(m: &TMachine, delta: &[char]) -> Result<Term, TmError> {
    let init = init_term(m, delta)?;
    let trans = trans_term(m);
    let fin = final_term(m, delta)?;
    let extract = lam(&["d"], Term::apps(fin, [lam(&["w2"], v("w2")), v("d")]));
    let drive = lam(&["cfg"], Term::apps(trans, [extract, v("cfg")]));
    Ok(lam(&["inp"], Term::apps(init, [drive, v("inp")])))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Engine {
    Head,
    LinearHead,
}

#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub output: String,
    /// Head steps for the head engine; total linear steps for the
    /// linear-head engine.
    pub steps: u64,
    pub stats: Option<TraceStats>,
}

/// Run the compiled machine on `input` and certify the result against
/// the direct simulation.
///
/// Under the head engine the normal form is decoded and compared; the
/// linear-head engine instead certifies its compact normal form with
/// the unfolding checker (never materializing the unfolding) and
/// reports the trace statistics of the quadratic bound.
pub fn run_encoded(
    m: &TMachine,
    delta: &[char],
    input: &str,
    engine: Engine,
    max_steps: u64,
) -> Result<RunOutcome, TmError> {
    for c in input.chars() {
        if !delta.contains(&c) {
            return Err(TmError::BadSymbol(c));
        }
    }
    let (cfg, _g) = tm_run_config(m, input, max_steps)?;
    let expected = forget(m, &cfg.right, delta);
    let u = machine_term(m, delta)?;
    let term = Term::app(u, encode_string(input, delta)?);
    let map_limit = |e: ReduceError| match e {
        ReduceError::StepLimit(_) => TmError::StepLimit,
        other => TmError::Reduce(other),
    };
    match engine {
        Engine::Head => {
            let n = normalize(&term, &[RuleLabel::HeadBeta], Policy::LeftmostOutermost, max_steps)
                .map_err(map_limit)?;
            let got = decode_string(&n.term, delta)?;
            if got != expected {
                return Err(TmError::DecodeMismatch { expected, got });
            }
            Ok(RunOutcome { output: got, steps: n.trace.len(), stats: None })
        }
        Engine::LinearHead => {
            let n = normalize(
                &term,
                &[RuleLabel::HeadDB, RuleLabel::HeadLS],
                Policy::LeftmostOutermost,
                max_steps,
            )
            .map_err(map_limit)?;
            let certificate = crate::check::unfold_eq(&n.term, &encode_string(&expected, delta)?);
            if !certificate {
                return Err(TmError::DecodeMismatch {
                    expected,
                    got: "<compact form with a different unfolding>".into(),
                });
            }
            let stats = trace_stats(&n.trace).map_err(|_| TmError::StepLimit)?;
            Ok(RunOutcome { output: expected, steps: n.trace.len(), stats: Some(stats) })
        }
    }
}

/// The machine suite used across the tests: covers every move kind,
/// both tape-edge rules, and a strict alphabet conversion.
pub mod machines {
    use super::{Move, TMachine};

    fn rules(
        spec: &[(&str, char, &str, char, Move)],
    ) -> Vec<((String, char), (String, char, Move))> {
        spec.iter()
            .map(|&(q, a, q2, a2, mv)| ((q.to_string(), a), (q2.to_string(), a2, mv)))
            .collect()
    }

    /// Two steps on the empty input, exercising the left move on an
    /// empty left tape (blank insertion).
    pub fn minimal() -> TMachine {
        TMachine::new(
            vec!['_'],
            '_',
            vec!["q0".into(), "q1".into(), "qf".into()],
            "q0",
            "qf",
            &rules(&[("q0", '_', "q1", '_', Move::L), ("q1", '_', "qf", '_', Move::S)]),
        )
        .expect("minimal machine is well-formed")
    }

    /// Flips every bit, then rewinds to the left edge.
    pub fn bit_flip() -> TMachine {
        TMachine::new(
            vec!['0', '1', '_'],
            '_',
            vec!["q0".into(), "scan".into(), "back".into(), "qf".into()],
            "q0",
            "qf",
            &rules(&[
                ("q0", '_', "scan", '_', Move::R),
                ("q0", '0', "qf", '0', Move::S),
                ("q0", '1', "qf", '1', Move::S),
                ("scan", '0', "scan", '1', Move::R),
                ("scan", '1', "scan", '0', Move::R),
                ("scan", '_', "back", '_', Move::L),
                ("back", '0', "back", '0', Move::L),
                ("back", '1', "back", '1', Move::L),
                ("back", '_', "qf", '_', Move::S),
            ]),
        )
        .expect("bit flip machine is well-formed")
    }

    /// `1^k -> 1^{k+1}`.
    pub fn unary_successor() -> TMachine {
        TMachine::new(
            vec!['1', '_'],
            '_',
            vec!["q0".into(), "scan".into(), "back".into(), "qf".into()],
            "q0",
            "qf",
            &rules(&[
                ("q0", '_', "scan", '_', Move::R),
                ("q0", '1', "qf", '1', Move::S),
                ("scan", '1', "scan", '1', Move::R),
                ("scan", '_', "back", '1', Move::L),
                ("back", '1', "back", '1', Move::L),
                ("back", '_', "qf", '_', Move::S),
            ]),
        )
        .expect("successor machine is well-formed")
    }

    /// Erases matching end characters inward; leaves "1" for a
    /// palindrome and "0" otherwise. Quadratic running time.
    pub fn palindrome() -> TMachine {
        TMachine::new(
            vec!['0', '1', '_'],
            '_',
            vec![
                "q0".into(),
                "rd".into(),
                "m0".into(),
                "m1".into(),
                "c0".into(),
                "c1".into(),
                "rw".into(),
                "clr".into(),
                "fin".into(),
                "qf".into(),
            ],
            "q0",
            "qf",
            &rules(&[
                ("q0", '_', "rd", '_', Move::R),
                ("q0", '0', "qf", '0', Move::S),
                ("q0", '1', "qf", '1', Move::S),
                ("rd", '0', "m0", '_', Move::R),
                ("rd", '1', "m1", '_', Move::R),
                ("rd", '_', "fin", '1', Move::L),
                ("m0", '0', "m0", '0', Move::R),
                ("m0", '1', "m0", '1', Move::R),
                ("m0", '_', "c0", '_', Move::L),
                ("m1", '0', "m1", '0', Move::R),
                ("m1", '1', "m1", '1', Move::R),
                ("m1", '_', "c1", '_', Move::L),
                ("c0", '0', "rw", '_', Move::L),
                ("c0", '1', "clr", '_', Move::L),
                ("c0", '_', "fin", '1', Move::L),
                ("c1", '1', "rw", '_', Move::L),
                ("c1", '0', "clr", '_', Move::L),
                ("c1", '_', "fin", '1', Move::L),
                ("rw", '0', "rw", '0', Move::L),
                ("rw", '1', "rw", '1', Move::L),
                ("rw", '_', "rd", '_', Move::R),
                ("clr", '0', "clr", '_', Move::L),
                ("clr", '1', "clr", '_', Move::L),
                ("clr", '_', "fin", '0', Move::L),
                ("fin", '_', "qf", '_', Move::S),
                ("fin", '0', "qf", '0', Move::S),
                ("fin", '1', "qf", '1', Move::S),
            ]),
        )
        .expect("palindrome machine is well-formed")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reduce::redexes;
    use crate::term::alpha_eq;

    fn head_normalize(t: &Term, max: u64) -> (Term, u64) {
        let n = normalize(t, &[RuleLabel::HeadBeta], Policy::LeftmostOutermost, max)
            .expect("normalizes within bound");
        let steps = n.trace.len();
        (n.term, steps)
    }

    #[test]
    fn encode_element_examples() {
        assert_eq!(encode_element(1, 1).unwrap(), crate::parse::parse("\\x1.x1").unwrap());
        assert_eq!(
            encode_element(2, 3).unwrap(),
            crate::parse::parse("\\x1.\\x2.\\x3.x2").unwrap()
        );
        assert!(encode_element(0, 3).is_err());
        assert!(encode_element(4, 3).is_err());
        // applying the selector to n names yields the i-th one in n head steps
        let sel = encode_element(2, 3).unwrap();
        let applied = Term::apps(sel, [v("a"), v("b"), v("c")]);
        let (r, steps) = head_normalize(&applied, 10);
        assert_eq!(r, v("b"));
        assert_eq!(steps, 3);
    }

    #[test]
    fn encode_decode_strings() {
        let sigma = ['0', '1'];
        assert_eq!(
            encode_string("", &sigma).unwrap(),
            crate::parse::parse("\\x1.\\x2.\\y.y").unwrap()
        );
        assert_eq!(
            encode_string("0", &sigma).unwrap(),
            crate::parse::parse("\\x1.\\x2.\\y.x1 (\\x1.\\x2.\\y.y)").unwrap()
        );
        assert_eq!(decode_string(&encode_string("0110", &sigma).unwrap(), &sigma).unwrap(), "0110");
        assert!(decode_string(&v("z"), &sigma).is_err());
        assert!(encode_string("2", &sigma).is_err());
    }

    #[test]
    fn fixpoint_unrolls_in_two_steps() {
        let h = fixpoint_h();
        assert!(h.fv().is_empty());
        let applied = Term::app(h.clone(), v("u"));
        let n = normalize(&applied, &[RuleLabel::HeadBeta], Policy::LeftmostOutermost, 2);
        // exactly two steps reach u (H u); the term then has no head
        // redex at the root spine head (u is free)
        let n = match n {
            Ok(n) => n,
            Err(ReduceError::StepLimit(n)) => *n,
            Err(e) => panic!("{e}"),
        };
        assert!(alpha_eq(&n.term, &Term::app(v("u"), Term::app(h.clone(), v("u")))));
        // H itself always has a head redex: never normalize it bare
        assert!(!redexes(&h, RuleLabel::HeadBeta).unwrap().is_empty());
    }

    #[test]
    fn append_char_meets_its_bound() {
        for sigma in [vec!['a'], vec!['a', 'b'], vec!['a', 'b', 'c']] {
            let ac = append_char_term(&sigma);
            for (i, &c) in sigma.iter().enumerate() {
                for s in ["", "a", "ba"] {
                    if s.chars().any(|x| !sigma.contains(&x)) {
                        continue;
                    }
                    let term = Term::apps(
                        ac.clone(),
                        [
                            v("k0"),
                            encode_element(i + 1, sigma.len()).unwrap(),
                            encode_string(s, &sigma).unwrap(),
                        ],
                    );
                    let (r, steps) = head_normalize(&term, 100);
                    assert!(steps <= sigma.len() as u64 + 5, "AC too slow on {:?} {}", sigma, s);
                    match r.node() {
                        TermNode::App(f, arg) => {
                            assert_eq!(*f, v("k0"));
                            let got = decode_string(arg, &sigma).unwrap();
                            assert_eq!(got, format!("{}{}", c, s));
                        }
                        _ => panic!("continuation not reached"),
                    }
                }
            }
        }
    }

    #[test]
    fn convert_string_meets_its_bound() {
        let sigma = ['0', '1', '#'];
        let delta = ['0', '1'];
        let cs = convert_string_term(&sigma, &delta);
        for s in ["", "0", "#", "0#1", "0110", "##", "01#10"] {
            let term = Term::apps(cs.clone(), [v("k0"), encode_string(s, &sigma).unwrap()]);
            let (r, steps) = head_normalize(&term, 10_000);
            let bound = s.len() as u64 * (2 * sigma.len() as u64 + 12) + sigma.len() as u64 + 5;
            assert!(steps <= bound, "CS {} steps {} > bound {}", s, steps, bound);
            match r.node() {
                TermNode::App(f, arg) => {
                    assert_eq!(*f, v("k0"));
                    let want: String = s.chars().filter(|c| delta.contains(c)).collect();
                    assert_eq!(decode_string(arg, &delta).unwrap(), want);
                }
                _ => panic!("continuation not reached"),
            }
        }
    }

    #[test]
    fn tm_run_examples() {
        let m = machines::minimal();
        let (out, steps) = tm_run(&m, "", 100).unwrap();
        assert_eq!((out.as_str(), steps), ("", 2));

        let flip = machines::bit_flip();
        let (out, _) = tm_run(&flip, "01", 1000).unwrap();
        assert_eq!(out, "10");
        let (out, _) = tm_run(&flip, "0110", 1000).unwrap();
        assert_eq!(out, "1001");

        let succ = machines::unary_successor();
        let (out, _) = tm_run(&succ, "111", 1000).unwrap();
        assert_eq!(out, "1111");

        let pal = machines::palindrome();
        for (inp, want) in [("", "1"), ("0", "1"), ("01", "0"), ("0110", "1"), ("010", "1"), ("10", "0")] {
            let (out, _) = tm_run(&pal, inp, 10_000).unwrap();
            assert_eq!(out, want, "palindrome on {:?}", inp);
        }
    }

    #[test]
    fn left_move_on_empty_left_tape_inserts_blank() {
        let m = machines::minimal();
        let (cfg, steps) = tm_run_config(&m, "", 10).unwrap();
        assert_eq!(steps, 2);
        // the inserted blank is on the right tape
        assert_eq!(cfg.right.len(), 1);
        assert!(cfg.left_rev.is_empty());
    }

    #[test]
    fn machine_json_round_trip() {
        let m = machines::bit_flip();
        let j = m.to_json();
        let m2 = TMachine::from_json(&j).unwrap();
        assert_eq!(m2.to_json(), j);
        // partial delta is rejected
        let bad = serde_json::json!({
            "sigma": ["0", "_"], "blank": "_",
            "states": ["a", "b"], "initial": "a", "final": "b",
            "delta": [{"from": ["a", "0"], "to": ["b", "0", "S"]}]
        });
        assert!(TMachine::from_json(&bad).is_err());
    }

    #[test]
    fn machine_term_is_closed_and_delta_checked() {
        let m = machines::bit_flip();
        let u = machine_term(&m, &['0', '1']).unwrap();
        assert!(u.fv().is_empty());
        assert!(matches!(machine_term(&m, &['0', '_']), Err(TmError::DeltaBlank)));
        assert!(matches!(machine_term(&m, &['2']), Err(TmError::DeltaNotInSigma('2'))));
    }

    #[test]
    fn trans_term_drives_to_the_final_configuration() {
        // minimal machine: T k (initial cfg) -> k (final cfg)
        let m = machines::minimal();
        let t = trans_term(&m);
        let init_cfg = {
            let eps = encode_string("", m.sigma()).unwrap();
            let blank = encode_element(1, 1).unwrap();
            let q0 = encode_element(1, 3).unwrap();
            lam(&["cfg"], Term::apps(v("cfg"), [eps.clone(), blank, eps, q0]))
        };
        let term = Term::apps(t, [v("k0"), init_cfg]);
        let (r, _) = head_normalize(&term, 10_000);
        // k0 applied to a final configuration whose state selector picks q_f
        match r.node() {
            TermNode::App(f, _) => assert_eq!(*f, v("k0")),
            _ => panic!("continuation not reached"),
        }
    }

    #[test]
    fn run_encoded_small_end_to_end() {
        let m = machines::minimal();
        let out = run_encoded(&m, &[], "", Engine::Head, 200_000).unwrap();
        assert_eq!(out.output, "");

        let flip = machines::bit_flip();
        let delta = ['0', '1'];
        let head = run_encoded(&flip, &delta, "01", Engine::Head, 500_000).unwrap();
        assert_eq!(head.output, "10");
        let lin = run_encoded(&flip, &delta, "01", Engine::LinearHead, 2_000_000).unwrap();
        assert_eq!(lin.output, "10");
        let st = lin.stats.unwrap();
        assert_eq!(st.mult, head.steps);
        assert!(st.quadratic_ok);
    }
}
