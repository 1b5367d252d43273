//! Satisfiability engines.
//!
//! * [`Engine::Optimized`]: depth-first, counter-based procedure for `Gr(K_R)`
//!   that keeps one root-to-leaf path of variables alive.
//! * [`Engine::Inverse`]: the same discipline for inverse and intersection
//!   relations, with predecessor-aware counters and restarts.
//! * [`Engine::Standard`]: completion rules with successor merging over a
//!   global constraint system. Sound and complete but needs space exponential
//!   in the binary length of the numbers.
//! * [`Engine::Incorrect`]: the historical rule set for the legacy operators.
//!   It is not a decision procedure; it is kept to reproduce its failure.
//!
//! Nondeterministic choices are resolved by chronological backtracking.

mod global;
pub mod incorrect;
pub mod inverse;
pub mod optimized;
pub mod standard;
mod trace;

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use fixedbitset::FixedBitSet;
use thiserror::Error;

use crate::csys::ConstraintSystem;
use crate::formula::{to_nnf, Closure, ClosureError, Formula, FormulaId, RoleMask};
use crate::kripke::{canonical_structure, KripkeStructure};

/// Resource bounds for one solve.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Limits {
    /// Rule applications (formula additions, successor generations, merges).
    pub max_steps: u64,
    /// Live trace depth, counting the root as 1.
    pub max_depth: u64,
    /// Constraints held at once by the engines that keep a global system.
    pub max_constraints: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_steps: 100_000_000,
            max_depth: 10_000,
            max_constraints: 1_000_000,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Sat,
    Unsat,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Sat => "SAT",
            Verdict::Unsat => "UNSAT",
        })
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Stats {
    /// Deepest live variable chain (trace engines) or deepest successor
    /// chain (global engines); the root has depth 1.
    pub max_depth: u64,
    /// Most variables alive at one time.
    pub peak_live_vars: u64,
    pub nodes_created: u64,
    pub backtracks: u64,
    pub restarts: u64,
    pub steps: u64,
}

impl Stats {
    /// `key=value` lines, `verdict` first.
    pub fn render(&self, verdict: &str, with_restarts: bool) -> String {
        let mut s = format!(
            "verdict={verdict}\nmax_depth={}\npeak_live_vars={}\nnodes_created={}\nbacktracks={}\n",
            self.max_depth, self.peak_live_vars, self.nodes_created, self.backtracks
        );
        if with_restarts {
            s.push_str(&format!("restarts={}\n", self.restarts));
        }
        s.push_str(&format!("steps={}\n", self.steps));
        s
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LimitKind {
    Steps,
    Depth,
    Constraints,
}

impl fmt::Display for LimitKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LimitKind::Steps => "step limit",
            LimitKind::Depth => "depth limit",
            LimitKind::Constraints => "constraint limit",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum SolveError {
    #[error("{kind} exceeded")]
    ResourceLimit { kind: LimitKind, stats: Stats },
    #[error("{0}")]
    Unsupported(String),
    #[error(transparent)]
    Closure(#[from] ClosureError),
    #[error("witness model does not satisfy the input formula")]
    WitnessRejected,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Engine {
    Optimized,
    Standard,
    Incorrect,
    Inverse,
}

impl Engine {
    pub const ALL: [Engine; 4] = [
        Engine::Optimized,
        Engine::Standard,
        Engine::Incorrect,
        Engine::Inverse,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Engine::Optimized => "optimized",
            Engine::Standard => "standard",
            Engine::Incorrect => "incorrect",
            Engine::Inverse => "inverse",
        }
    }

    /// Checks that the engine accepts the syntax of `f`.
    pub fn supports(self, f: &Formula) -> Result<(), SolveError> {
        match self {
            Engine::Incorrect if f.contains_graded() => Err(SolveError::Unsupported(
                "the incorrect engine only accepts `dia`/`box` formulas".into(),
            )),
            Engine::Incorrect => Ok(()),
            _ if f.contains_legacy() => Err(SolveError::Unsupported(format!(
                "the {} engine does not accept `dia`/`box`; convert the formula first",
                self.name()
            ))),
            Engine::Optimized | Engine::Standard if f.contains_inverse_or_intersection() => {
                Err(SolveError::Unsupported(format!(
                    "the {} engine does not support `inv`/`cap`; use the inverse engine",
                    self.name()
                )))
            }
            _ => Ok(()),
        }
    }
}

impl FromStr for Engine {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Engine::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| format!("unknown engine `{s}`"))
    }
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Result of a finished solve.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub verdict: Verdict,
    pub stats: Stats,
    /// On SAT, when requested: a structure and the world satisfying the input.
    pub model: Option<(KripkeStructure, usize)>,
    /// The complete constraint system of the accepting branch, when the
    /// engine keeps one (standard, incorrect) or a model was requested.
    pub system: Option<ConstraintSystem>,
}

/// Solves `f` with `engine`. The formula is brought into NNF first.
///
/// With `want_model`, a SAT answer carries a witness; except for the
/// incorrect engine the witness is checked against `f` before returning.
pub fn solve(
    engine: Engine,
    f: &Formula,
    limits: Limits,
    want_model: bool,
) -> Result<Outcome, SolveError> {
    engine.supports(f)?;
    let nnf = to_nnf(f);
    let clos = Arc::new(Closure::new(&nnf)?);
    let run = move || -> Result<Outcome, SolveError> {
        match engine {
            Engine::Optimized => trace::solve(clos, false, limits, want_model),
            Engine::Inverse => trace::solve(clos, true, limits, want_model),
            Engine::Standard => standard::solve(clos, limits),
            Engine::Incorrect => incorrect::solve(clos, limits),
        }
    };
    // chains of choice points recurse; give them room
    let mut out = std::thread::Builder::new()
        .stack_size(512 << 20)
        .spawn(run)
        .expect("spawn solver thread")
        .join()
        .unwrap_or_else(|e| std::panic::resume_unwind(e))?;
    if out.verdict == Verdict::Sat && want_model && out.model.is_none() {
        if let Some(s) = &out.system {
            let (m, _) = canonical_structure(s);
            out.model = Some((m, 0));
        }
    }
    if engine != Engine::Incorrect {
        if let Some((m, w)) = &out.model {
            if !m.check(*w, f) {
                return Err(SolveError::WitnessRejected);
            }
        }
    }
    if !want_model {
        out.model = None;
    }
    Ok(out)
}

/// Step, depth and live-variable accounting shared by the engines.
#[derive(Debug)]
pub(crate) struct Budget {
    limits: Limits,
    pub stats: Stats,
    depth: u64,
    live: u64,
}

impl Budget {
    pub fn new(limits: Limits) -> Self {
        Budget {
            limits,
            stats: Stats::default(),
            depth: 0,
            live: 0,
        }
    }

    fn fail(&self, kind: LimitKind) -> SolveError {
        SolveError::ResourceLimit {
            kind,
            stats: self.stats.clone(),
        }
    }

    pub fn step(&mut self) -> Result<(), SolveError> {
        self.stats.steps += 1;
        if self.stats.steps > self.limits.max_steps {
            return Err(self.fail(LimitKind::Steps));
        }
        Ok(())
    }

    /// A new variable becomes live one level below the current one.
    pub fn enter(&mut self) -> Result<(), SolveError> {
        self.depth += 1;
        self.live += 1;
        self.stats.nodes_created += 1;
        self.stats.max_depth = self.stats.max_depth.max(self.depth);
        self.stats.peak_live_vars = self.stats.peak_live_vars.max(self.live);
        if self.depth > self.limits.max_depth {
            return Err(self.fail(LimitKind::Depth));
        }
        Ok(())
    }

    pub fn leave(&mut self) {
        self.depth -= 1;
        self.live -= 1;
    }

    /// Records a variable in a global system at the given depth.
    pub fn created(&mut self, depth: u64, live: u64) -> Result<(), SolveError> {
        self.stats.nodes_created += 1;
        self.stats.max_depth = self.stats.max_depth.max(depth);
        self.stats.peak_live_vars = self.stats.peak_live_vars.max(live);
        if depth > self.limits.max_depth {
            return Err(self.fail(LimitKind::Depth));
        }
        Ok(())
    }

    pub fn constraints(&self, n: usize) -> Result<(), SolveError> {
        if n > self.limits.max_constraints {
            return Err(self.fail(LimitKind::Constraints));
        }
        Ok(())
    }

    pub fn backtrack(&mut self) {
        self.stats.backtracks += 1;
    }
}

/// Labels and edges of an accepting branch, kept only when recording.
#[derive(Clone, Debug)]
pub(crate) struct WitnessTree {
    pub label: FixedBitSet,
    pub children: Vec<(RoleMask, WitnessTree)>,
}

impl WitnessTree {
    pub fn into_system(self, clos: Arc<Closure>, inverse_mode: bool) -> ConstraintSystem {
        let mut s = ConstraintSystem::new(clos, inverse_mode);
        let root = s.fresh_var(None);
        let mut stack = vec![(root, self)];
        while let Some((x, t)) = stack.pop() {
            for f in t.label.ones() {
                s.add_formula(x, FormulaId(f as u32));
            }
            for (mask, child) in t.children {
                let y = s.fresh_var(Some(x));
                s.add_edge(x, y, mask);
                stack.push((y, child));
            }
        }
        s
    }
}
