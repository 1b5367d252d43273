//! Decision procedure for `Gr(K_R)` in polynomial space.
//!
//! Successors are generated one at a time with every counted formula
//! decided up front, checked against the upper bounds through counters,
//! solved recursively and then forgotten. `⟨R⟩≥1048576 p` is decided with
//! two variables alive. See the trace module for the search order.

use super::{Engine, Limits, Outcome, SolveError};
use crate::formula::Formula;

/// Decides `f` (graded syntax, plain relations).
pub fn solve_grk(f: &Formula, limits: Limits, want_model: bool) -> Result<Outcome, SolveError> {
    super::solve(Engine::Optimized, f, limits, want_model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::Verdict;
    use crate::formula::parse;

    fn run(s: &str) -> Outcome {
        solve_grk(&parse(s).unwrap(), Limits::default(), true).unwrap()
    }

    #[test]
    fn counterexample_is_unsat() {
        let o = run("(and (ge R 3 p1) (and (le R 1 p2) (le R 1 (not p2))))");
        assert_eq!(o.verdict, Verdict::Unsat);
        assert!(o.stats.backtracks > 0);
    }

    #[test]
    fn vacuous_lower_bound() {
        let o = run("(ge R 0 p)");
        assert_eq!(o.verdict, Verdict::Sat);
        assert_eq!(o.stats.nodes_created, 1);
    }

    #[test]
    fn local_choice_backtracks() {
        assert_eq!(run("(and (or p q) (not p))").verdict, Verdict::Sat);
        assert_eq!(run("(or p (not p))").verdict, Verdict::Sat);
        assert_eq!(
            run("(and (or p q) (and (not p) (not q)))").verdict,
            Verdict::Unsat
        );
    }

    #[test]
    fn signs_flip_under_upper_bounds() {
        let o = run("(and (ge R 2 p) (le R 0 q))");
        assert_eq!(o.verdict, Verdict::Sat);
        let (m, w) = o.model.unwrap();
        assert_eq!(m.len(), 3);
        assert!(m.check(w, &parse("(le R 0 q)").unwrap()));
    }

    #[test]
    fn pigeonhole_over_two_types() {
        // three successors, at most one with q and at most one without
        let o = run("(and (ge R 3 p) (and (le R 1 q) (le R 1 (not q))))");
        assert_eq!(o.verdict, Verdict::Unsat);
        let o = run("(and (ge R 2 p) (and (le R 1 q) (le R 1 (not q))))");
        assert_eq!(o.verdict, Verdict::Sat);
    }

    #[test]
    fn binary_numbers_need_two_live_variables() {
        let f = parse("(ge R 1048576 p)").unwrap();
        let o = solve_grk(&f, Limits::default(), false).unwrap();
        assert_eq!(o.verdict, Verdict::Sat);
        assert_eq!(o.stats.max_depth, 2);
        assert_eq!(o.stats.peak_live_vars, 2);
        assert_eq!(o.stats.nodes_created, 1_048_577);
    }

    #[test]
    fn nested_modalities() {
        let o = run("(and (ge R 2 (ge S 1 p)) (le R 1 (le S 0 p)))");
        assert_eq!(o.verdict, Verdict::Sat);
        let o = run("(and (ge R 1 (ge S 1 p)) (le R 0 (ge S 1 p)))");
        assert_eq!(o.verdict, Verdict::Unsat);
    }
}
