use std::fs;
use std::io::{self, Read};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use grsat::engine::{solve, Engine, Limits, SolveError, Verdict};
use grsat::formula::{modernize, parse, to_nnf, Formula};
use grsat::gen::{generate, Profile};

const EXIT_USAGE: u8 = 1;
const EXIT_RESOURCE: u8 = 2;
const EXIT_DISAGREE: u8 = 3;
const EXIT_SAT: u8 = 10;
const EXIT_UNSAT: u8 = 20;

/// Largest number the standard engine is trusted with by default.
const STANDARD_SCOPE: u64 = 8;

#[derive(Parser)]
#[command(
    name = "grsat",
    version,
    about = "Satisfiability for graded modal logic"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Decide satisfiability of the formula in FILE (`-` for stdin).
    Solve(SolveArgs),
    /// Print seeded random formulas, one per line.
    Gen(GenArgs),
    /// Rewrite `dia`/`box` into `ge`/`le`.
    Convert { file: String },
    /// Print the negation normal form.
    Nnf { file: String },
}

#[derive(Args)]
struct SolveArgs {
    /// optimized, standard, incorrect or inverse. Defaults to inverse when the
    /// formula uses `inv` or `cap`, optimized otherwise.
    #[arg(long)]
    engine: Option<Engine>,
    /// Print a model on SAT.
    #[arg(long)]
    model: bool,
    /// Print search statistics as key=value lines.
    #[arg(long)]
    stats: bool,
    #[arg(long, default_value_t = Limits::default().max_steps)]
    max_steps: u64,
    #[arg(long, default_value_t = Limits::default().max_depth)]
    max_depth: u64,
    #[arg(long, default_value_t = Limits::default().max_constraints)]
    max_constraints: usize,
    /// Cross-check the verdict with the standard engine (numbers up to 8).
    #[arg(long)]
    oracle: bool,
    file: String,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    count: u64,
    #[arg(long, default_value_t = Profile::default().max_size)]
    max_size: u64,
    #[arg(long, default_value_t = Profile::default().max_n)]
    max_n: u64,
    #[arg(long, default_value_t = Profile::default().atoms)]
    atoms: usize,
    #[arg(long, default_value_t = Profile::default().relations)]
    relations: usize,
    #[arg(long)]
    inverse: bool,
    #[arg(long)]
    intersection: bool,
    /// Emit `dia`/`box` formulas.
    #[arg(long)]
    legacy: bool,
}

fn read_formula(path: &str) -> Result<Formula, String> {
    let text = if path == "-" {
        let mut s = String::new();
        io::stdin()
            .read_to_string(&mut s)
            .map_err(|e| format!("stdin: {e}"))?;
        s
    } else {
        fs::read_to_string(path).map_err(|e| format!("{path}: {e}"))?
    };
    parse(&text).map_err(|e| format!("{path}:{e}"))
}

fn run_solve(args: SolveArgs) -> Result<u8, String> {
    let f = read_formula(&args.file)?;
    let engine = match args.engine {
        Some(e) => e,
        None if f.contains_inverse_or_intersection() => Engine::Inverse,
        None => Engine::Optimized,
    };
    if f.contains_legacy() && engine != Engine::Incorrect {
        return Err(format!(
            "the {engine} engine does not accept `dia`/`box`; run `grsat convert` first"
        ));
    }
    if engine == Engine::Standard && f.max_number() > STANDARD_SCOPE {
        eprintln!(
            "warning: the standard engine keeps every successor in memory; numbers above {STANDARD_SCOPE} may exhaust the limits"
        );
    }
    let limits = Limits {
        max_steps: args.max_steps,
        max_depth: args.max_depth,
        max_constraints: args.max_constraints,
    };
    let with_restarts = engine == Engine::Inverse;
    let out = match solve(engine, &f, limits, args.model) {
        Ok(out) => out,
        Err(SolveError::ResourceLimit { kind, stats }) => {
            println!("UNKNOWN");
            if args.stats {
                print!("{}", stats.render("unknown", with_restarts));
            }
            eprintln!("{kind} exceeded");
            return Ok(EXIT_RESOURCE);
        }
        Err(SolveError::WitnessRejected) => {
            eprintln!("internal error: the witness model does not satisfy the formula");
            return Ok(EXIT_DISAGREE);
        }
        Err(e) => return Err(e.to_string()),
    };
    println!("{}", out.verdict);
    if let (true, Some((m, root))) = (args.model, &out.model) {
        print!("{}", m.to_text(*root));
    }
    if args.stats {
        let v = out.verdict.to_string().to_lowercase();
        print!("{}", out.stats.render(&v, with_restarts));
    }
    if args.oracle {
        if let Some(code) = cross_check(engine, &f, limits, out.verdict) {
            return Ok(code);
        }
    }
    Ok(match out.verdict {
        Verdict::Sat => EXIT_SAT,
        Verdict::Unsat => EXIT_UNSAT,
    })
}

/// Compares with the standard engine where it is in scope. Returns an exit
/// code on disagreement.
fn cross_check(engine: Engine, f: &Formula, limits: Limits, verdict: Verdict) -> Option<u8> {
    if engine == Engine::Standard || engine == Engine::Incorrect {
        return None;
    }
    if f.max_number() > STANDARD_SCOPE || Engine::Standard.supports(f).is_err() {
        eprintln!("oracle: formula outside the standard engine's scope, not checked");
        return None;
    }
    match solve(Engine::Standard, f, limits, false) {
        Ok(o) if o.verdict == verdict => None,
        Ok(o) => {
            eprintln!(
                "oracle: standard engine answers {}, {engine} answered {verdict}",
                o.verdict
            );
            Some(EXIT_DISAGREE)
        }
        Err(e) => {
            eprintln!("oracle: standard engine gave no verdict ({e})");
            None
        }
    }
}

fn run_gen(args: GenArgs) -> Result<u8, String> {
    if args.max_size == 0 || args.atoms == 0 || args.relations == 0 {
        return Err("--max-size, --atoms and --relations must be positive".into());
    }
    let profile = Profile {
        max_size: args.max_size,
        max_n: args.max_n,
        atoms: args.atoms,
        relations: args.relations,
        allow_inverse: args.inverse,
        allow_intersection: args.intersection,
        allow_legacy: args.legacy,
    };
    for i in 0..args.count {
        println!("{}", generate(args.seed.wrapping_add(i), &profile));
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    let result = match cli.cmd {
        Cmd::Solve(args) => run_solve(args),
        Cmd::Gen(args) => run_gen(args),
        Cmd::Convert { file } => read_formula(&file).map(|f| {
            println!("{}", modernize(&f));
            0
        }),
        Cmd::Nnf { file } => read_formula(&file).map(|f| {
            println!("{}", to_nnf(&f));
            0
        }),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}
