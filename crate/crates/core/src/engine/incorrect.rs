//! The historical completion rules for the legacy operators `◇ⁿ_R` ("more
//! than n successors satisfy") and `□ⁿ_R` ("at most n successors falsify").
//!
//! These rules are unsound: a complete clash-free system need not describe a
//! model, because successors are never made to decide the formulas their
//! predecessor counts. The engine exists to exhibit that failure and is
//! never used as an oracle.
//!
//! Per variable the rules are tried in the order `∧`, `∨`, `≤0`, `>`, `≤`.
//! The `≤`-rule fires for `x ⊨ □ⁿ_R φ` when `♯R(x, φ) > n > 0`, exactly as
//! the rule is stated, and branches over every safe merge of two
//! `R`-successors (the later one replaced by the earlier one).

use std::sync::Arc;

use super::global::{self, State, Step};
use super::{Budget, Limits, Outcome, SolveError};
use crate::csys::{ClashMode, Var};
use crate::formula::{Closure, Formula, FormulaId, Node};

const MODE: ClashMode = ClashMode::Legacy;

/// Runs the rules on `f` (legacy syntax). SAT here does not imply that `f`
/// is satisfiable.
pub fn solve_incorrect(f: &Formula, limits: Limits) -> Result<Outcome, SolveError> {
    super::solve(super::Engine::Incorrect, f, limits, false)
}

pub(crate) fn solve(clos: Arc<Closure>, limits: Limits) -> Result<Outcome, SolveError> {
    global::run(clos, limits, MODE, rule)
}

fn rule(st: &mut State, x: Var, budget: &mut Budget) -> Result<Step, SolveError> {
    if let Some(step) = global::propositional(st, x, MODE, budget)? {
        return Ok(step);
    }
    let clos = st.s.shared_closure();
    let label: Vec<Node> =
        st.s.label(x)
            .ones()
            .map(|i| clos.node(FormulaId(i as u32)))
            .collect();

    // ≤0
    for &node in &label {
        let Node::Box { rel, n: 0, body } = node else {
            continue;
        };
        let mask = clos.rel_mask(rel);
        let missing =
            st.s.edges_from(x)
                .find(|&(y, m)| mask & !m == 0 && !st.s.has(y, body));
        if let Some((y, _)) = missing {
            budget.step()?;
            return Ok(if st.add(y, body, MODE) {
                Step::Applied
            } else {
                Step::Clash
            });
        }
    }

    // >
    for &node in &label {
        let Node::Dia { rel, n, body } = node else {
            continue;
        };
        let have = st.s.counter(x, rel, body);
        if have <= n {
            for _ in have..=n {
                budget.step()?;
                st.add_child(x, clos.rel_mask(rel), body, budget)?;
            }
            return Ok(Step::Applied);
        }
    }

    // ≤
    for &node in &label {
        let Node::Box { rel, n, body } = node else {
            continue;
        };
        if n == 0 || st.s.counter(x, rel, body) <= n {
            continue;
        }
        let mask = clos.rel_mask(rel);
        let succ: Vec<Var> =
            st.s.edges_from(x)
                .filter(|&(_, m)| mask & !m == 0)
                .map(|(y, _)| y)
                .collect();
        let mut alts = Vec::new();
        for (i, &keep) in succ.iter().enumerate() {
            for &drop in &succ[i + 1..] {
                if st.s.is_safe(drop, keep, MODE) {
                    let mut alt = st.clone();
                    alt.merge(drop, keep);
                    alts.push(alt);
                }
            }
        }
        if !alts.is_empty() {
            budget.step()?;
            return Ok(Step::Branch(alts));
        }
    }
    Ok(Step::Idle)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::Verdict;
    use crate::formula::parse;

    const COUNTEREXAMPLE: &str = "(and (dia R 2 p1) (and (box R 1 p2) (box R 1 (not p2))))";

    #[test]
    fn accepts_the_unsatisfiable_counterexample() {
        let o = solve_incorrect(&parse(COUNTEREXAMPLE).unwrap(), Limits::default()).unwrap();
        assert_eq!(o.verdict, Verdict::Sat);
        let s = o.system.unwrap();
        assert_eq!(s.var_count(), 4);
        let golden = "\
c x0 (and (box R 1 p2) (box R 1 (not p2)))
c x0 (and (dia R 2 p1) (and (box R 1 p2) (box R 1 (not p2))))
c x0 (box R 1 (not p2))
c x0 (box R 1 p2)
c x0 (dia R 2 p1)
c x1 p1
c x2 p1
c x3 p1
e R x0 x1
e R x0 x2
e R x0 x3
";
        assert_eq!(s.dump(), golden);
        // the induced structure is not a model
        let (m, _) = crate::kripke::canonical_structure(&s);
        assert!(!m.check(0, &parse(COUNTEREXAMPLE).unwrap()));
    }

    #[test]
    fn propositional_clash() {
        let o = solve_incorrect(&parse("(and p (not p))").unwrap(), Limits::default()).unwrap();
        assert_eq!(o.verdict, Verdict::Unsat);
    }

    #[test]
    fn legacy_pair_clash() {
        let o = solve_incorrect(
            &parse("(and (dia R 1 p) (box R 1 (not p)))").unwrap(),
            Limits::default(),
        )
        .unwrap();
        assert_eq!(o.verdict, Verdict::Unsat);
    }

    #[test]
    fn box_zero_propagates() {
        let o = solve_incorrect(
            &parse("(and (dia R 0 p) (box R 0 (not p)))").unwrap(),
            Limits::default(),
        )
        .unwrap();
        assert_eq!(o.verdict, Verdict::Unsat);
        let o = solve_incorrect(
            &parse("(and (dia R 0 p) (box R 0 q))").unwrap(),
            Limits::default(),
        )
        .unwrap();
        assert_eq!(o.verdict, Verdict::Sat);
        let s = o.system.unwrap();
        assert!(s.dump().contains("c x1 q\n"));
    }

    #[test]
    fn refuses_counting_syntax() {
        assert!(matches!(
            solve_incorrect(&parse("(ge R 1 p)").unwrap(), Limits::default()),
            Err(SolveError::Unsupported(_))
        ));
    }
}
