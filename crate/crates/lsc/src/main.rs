//! Command-line front end. Exit codes: 0 success, 1 negative verdict
//! (an `unfold-eq` "no"), 2 errors and step/node limits.

use clap::{Parser, Subcommand, ValueEnum};
use lsc::measure::{head_measure, stats_to_json, trace_stats};
use lsc::reduce::{
    normalize, trace_to_json, unfold_with_cap, Normalized, Policy, ReduceError, RuleLabel,
};
use lsc::term::Term;
use lsc::tm::{machine_term, run_encoded, Engine, TMachine};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "lsc", about = "Lambda calculus with explicit substitutions: reduction engines, cost instrumentation, equality modulo unfolding, and a Turing-machine compiler", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Strategy {
    /// Head beta reduction on pure terms
    Head,
    /// Linear head reduction (multiplicative + linear substitution)
    LinearHead,
    /// Substitution rules only (ls + gc); normal form is the unfolding
    S,
    /// Full beta reduction on pure terms
    Beta,
}

impl Strategy {
    fn rules(self) -> &'static [RuleLabel] {
        match self {
            Strategy::Head => &[RuleLabel::HeadBeta],
            Strategy::LinearHead => &[RuleLabel::HeadDB, RuleLabel::HeadLS],
            Strategy::S => &[RuleLabel::LS, RuleLabel::GC],
            Strategy::Beta => &[RuleLabel::Beta],
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum PolicyArg {
    Lo,
    LsFirst,
    DbFirst,
}

impl PolicyArg {
    fn policy(self) -> Policy {
        match self {
            PolicyArg::Lo => Policy::LeftmostOutermost,
            PolicyArg::LsFirst => Policy::LsFirst,
            PolicyArg::DbFirst => Policy::DbFirst,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum EngineArg {
    Head,
    LinearHead,
}

#[derive(Subcommand)]
enum Cmd {
    /// Normalize a term under a strategy, optionally writing a trace file
    Reduce {
        /// Inline term, or @path to read it from a file
        term: String,
        #[arg(long, value_enum, default_value = "head")]
        strategy: Strategy,
        #[arg(long, value_enum, default_value = "lo")]
        policy: PolicyArg,
        #[arg(long, default_value_t = 100_000)]
        max_steps: u64,
        /// Write the trace as JSON to this path
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Print head measure, substitution count and shallowness
    Measure { term: String },
    /// Print the unfolding (the pure lambda-term denoted)
    Unfold {
        term: String,
        #[arg(long, default_value_t = lsc::reduce::UNFOLD_CAP)]
        max_nodes: u64,
    },
    /// Decide equality of unfoldings; prints yes/no
    UnfoldEq {
        a: String,
        b: String,
        /// Dump the unfolding matrix as TSV to this path
        #[arg(long)]
        dump_matrix: Option<PathBuf>,
        /// Fill with the iterative worklist instead of memoized recursion
        #[arg(long)]
        worklist: bool,
    },
    /// Turing-machine compilation and encoded runs
    #[command(subcommand)]
    Tm(TmCmd),
    /// Built-in term families
    #[command(subcommand)]
    Gen(GenCmd),
}

#[derive(Subcommand)]
enum TmCmd {
    /// Print the lambda-term compiled from a machine description
    Compile {
        machine: PathBuf,
        /// Input/output alphabet; defaults to the machine alphabet minus blank
        #[arg(long)]
        delta: Option<String>,
    },
    /// Run a machine on an input through its compiled term
    Run {
        machine: PathBuf,
        input: String,
        #[arg(long, value_enum, default_value = "head")]
        engine: EngineArg,
        #[arg(long)]
        delta: Option<String>,
        #[arg(long, default_value_t = 10_000_000)]
        max_steps: u64,
    },
}

#[derive(Subcommand)]
enum GenCmd {
    /// Print t_n (and optionally its exponential normal form r_n)
    Family {
        n: u32,
        #[arg(long)]
        with_normal_form: bool,
        #[arg(long, default_value_t = lsc::gen::FAMILY_CAP)]
        cap: u32,
    },
}

fn read_term(arg: &str) -> Result<Term, String> {
    let text = if let Some(path) = arg.strip_prefix('@') {
        std::fs::read_to_string(path).map_err(|e| format!("{}: {}", path, e))?
    } else {
        arg.to_string()
    };
    lsc::parse::parse(&text).map_err(|e| e.to_string())
}

fn load_machine(path: &PathBuf) -> Result<TMachine, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {}", path.display(), e))?;
    let v: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| format!("{}: {}", path.display(), e))?;
    TMachine::from_json(&v).map_err(|e| e.to_string())
}

fn delta_of(m: &TMachine, arg: &Option<String>) -> Vec<char> {
    match arg {
        Some(s) => s.chars().collect(),
        None => m.default_delta(),
    }
}

fn write_trace(path: &PathBuf, norm: &Normalized, with_stats: bool) -> Result<(), String> {
    let mut v = trace_to_json(&norm.trace, &norm.term);
    if with_stats {
        if let Ok(st) = trace_stats(&norm.trace) {
            v["stats"] = stats_to_json(&st);
        }
    }
    std::fs::write(path, serde_json::to_string_pretty(&v).expect("trace serializes") + "\n")
        .map_err(|e| format!("{}: {}", path.display(), e))
}

fn run() -> Result<u8, String> {
    let cli = Cli::parse();
    match cli.cmd {
        Cmd::Reduce { term, strategy, policy, max_steps, trace } => {
            let t = read_term(&term)?;
            match normalize(&t, strategy.rules(), policy.policy(), max_steps) {
                Ok(n) => {
                    if let Some(path) = &trace {
                        write_trace(path, &n, matches!(strategy, Strategy::LinearHead))?;
                    }
                    println!("{}", n.term);
                    println!("steps: {}", n.trace.len());
                    Ok(0)
                }
                Err(ReduceError::StepLimit(n)) => {
                    eprintln!("step limit exceeded after {} steps", n.trace.len());
                    if let Some(path) = &trace {
                        write_trace(path, &n, matches!(strategy, Strategy::LinearHead))?;
                        eprintln!("partial trace written to {}", path.display());
                    }
                    Ok(2)
                }
                Err(e) => Err(e.to_string()),
            }
        }
        Cmd::Measure { term } => {
            let t = read_term(&term)?;
            println!("shallow: {}", t.is_shallow());
            println!("es_count: {}", t.es_count());
            match head_measure(&t) {
                Ok(m) => println!("head_measure: {}", m),
                Err(_) => println!("head_measure: undefined (term is not shallow)"),
            }
            Ok(0)
        }
        Cmd::Unfold { term, max_nodes } => {
            let t = read_term(&term)?;
            match unfold_with_cap(&t, max_nodes) {
                Ok(u) => {
                    println!("{}", u);
                    Ok(0)
                }
                Err(ReduceError::NodeCap { cap }) => {
                    eprintln!("unfolding exceeds the node cap ({})", cap);
                    Ok(2)
                }
                Err(e) => Err(e.to_string()),
            }
        }
        Cmd::UnfoldEq { a, b, dump_matrix, worklist } => {
            let (ta, tb) = (read_term(&a)?, read_term(&b)?);
            let (verdict, matrix) = lsc::check::unfold_eq_with_matrix(&ta, &tb, worklist);
            if let Some(path) = dump_matrix {
                std::fs::write(&path, matrix.to_tsv())
                    .map_err(|e| format!("{}: {}", path.display(), e))?;
            }
            println!("{}", if verdict { "yes" } else { "no" });
            Ok(if verdict { 0 } else { 1 })
        }
        Cmd::Tm(TmCmd::Compile { machine, delta }) => {
            let m = load_machine(&machine)?;
            let d = delta_of(&m, &delta);
            let u = machine_term(&m, &d).map_err(|e| e.to_string())?;
            println!("{}", u);
            Ok(0)
        }
        Cmd::Tm(TmCmd::Run { machine, input, engine, delta, max_steps }) => {
            let m = load_machine(&machine)?;
            let d = delta_of(&m, &delta);
            let eng = match engine {
                EngineArg::Head => Engine::Head,
                EngineArg::LinearHead => Engine::LinearHead,
            };
            match run_encoded(&m, &d, &input, eng, max_steps) {
                Ok(out) => {
                    println!("output: {}", out.output);
                    println!("steps: {}", out.steps);
                    if let Some(st) = out.stats {
                        println!("mult: {}", st.mult);
                        println!("expo: {}", st.expo);
                        println!("quadratic_ok: {}", st.quadratic_ok);
                    }
                    Ok(0)
                }
                Err(lsc::tm::TmError::StepLimit) => {
                    eprintln!("step limit exceeded");
                    Ok(2)
                }
                Err(e) => Err(e.to_string()),
            }
        }
        Cmd::Gen(GenCmd::Family { n, with_normal_form, cap }) => {
            println!("{}", lsc::gen::family_t(n));
            if with_normal_form {
                match lsc::gen::family_r(n, cap) {
                    Ok(r) => println!("{}", r),
                    Err(e) => return Err(e.to_string()),
                }
            }
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => ExitCode::from(code),
        Err(msg) => {
            eprintln!("error: {}", msg);
            ExitCode::from(2)
        }
    }
}
