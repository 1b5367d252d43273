//! Decision procedure for graded modalities over inverse relations and
//! intersections of relations, in polynomial space.
//!
//! Works like the optimized engine, with three additions: a successor's
//! edge set is guessed as a superset of the generating relation; counters
//! start with the contribution of the predecessor; and a successor whose
//! modalities look back at an undecided predecessor makes the predecessor
//! restart with one more formula decided.

use super::{Engine, Limits, Outcome, SolveError};
use crate::formula::Formula;

/// Decides `f` (graded syntax; relations may use `inv` and `cap`).
pub fn solve_grkri(f: &Formula, limits: Limits, want_model: bool) -> Result<Outcome, SolveError> {
    super::solve(Engine::Inverse, f, limits, want_model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::Verdict;
    use crate::formula::parse;

    fn run(s: &str) -> Outcome {
        solve_grkri(&parse(s).unwrap(), Limits::default(), true).unwrap()
    }

    #[test]
    fn restart_example_is_unsat() {
        let o =
            run("(and (le R1 0 q) (and (ge R1 1 (or p q)) (ge R2 1 (le (inv R2) 0 (ge R1 1 p)))))");
        assert_eq!(o.verdict, Verdict::Unsat);
        assert!(o.stats.restarts >= 1);
    }

    #[test]
    fn intersection_counts_toward_its_members() {
        assert_eq!(
            run("(and (ge (cap R S) 2 p) (le R 1 p))").verdict,
            Verdict::Unsat
        );
        let o = run("(and (ge (cap R S) 1 p) (le R 1 p))");
        assert_eq!(o.verdict, Verdict::Sat);
        let (m, w) = o.model.unwrap();
        assert!(m.has_edge("R", w, 1) && m.has_edge("S", w, 1));
    }

    #[test]
    fn predecessor_is_counted() {
        // the successor sees its predecessor, which satisfies p
        let o = run("(and p (ge R 1 (ge (inv R) 1 p)))");
        assert_eq!(o.verdict, Verdict::Sat);
        let o = run("(and p (ge R 1 (le (inv R) 0 p)))");
        assert_eq!(o.verdict, Verdict::Unsat);
    }

    #[test]
    fn restart_decides_the_predecessor() {
        let o = run("(ge R 1 (ge (inv R) 1 q))");
        assert_eq!(o.verdict, Verdict::Sat);
        assert!(o.stats.restarts >= 1);
        let (m, w) = o.model.unwrap();
        assert!(m.is_true("q", w));
    }

    #[test]
    fn inverse_free_input_behaves_like_plain() {
        assert_eq!(
            run("(and (ge R 3 p1) (and (le R 1 p2) (le R 1 (not p2))))").verdict,
            Verdict::Unsat
        );
        assert_eq!(run("(and (ge R 2 p) (le R 0 q))").verdict, Verdict::Sat);
    }
}
