//! Completion rules with successor merging for `Gr(K_R)`.
//!
//! Per variable the rules are tried in the order `∧`, `∨`, choose, `≤`
//! (merge), `≥`. The choose-rule makes every successor decide each formula
//! its predecessor counts. The `≤`-rule branches over the pairs of
//! successors that may be merged safely, in creation order, replacing the
//! later variable by the earlier one; if no pair is safe the rule does not
//! apply. A bound exceeded for good is only reported as a clash once the
//! system is complete, since merging may still repair it before then.
//!
//! The engine keeps every successor in memory at once. `⟨R⟩≥n` creates `n`
//! variables, so space grows exponentially in the binary length of `n`;
//! [`Limits::max_constraints`](super::Limits) stops such runs.

use std::sync::Arc;

use super::global::{self, State, Step};
use super::{Budget, Limits, Outcome, SolveError};
use crate::csys::{ClashMode, Var};
use crate::formula::{Closure, Formula, FormulaId, Node};

const MODE: ClashMode = ClashMode::Graded;

/// Decides `f` (graded syntax, plain relations).
pub fn solve_standard(
    f: &Formula,
    limits: Limits,
    want_model: bool,
) -> Result<Outcome, SolveError> {
    super::solve(super::Engine::Standard, f, limits, want_model)
}

pub(crate) fn solve(clos: Arc<Closure>, limits: Limits) -> Result<Outcome, SolveError> {
    global::run(clos, limits, MODE, rule)
}

fn rule(st: &mut State, x: Var, budget: &mut Budget) -> Result<Step, SolveError> {
    if let Some(step) = global::propositional(st, x, MODE, budget)? {
        return Ok(step);
    }
    let clos = st.s.shared_closure();
    let modals: Vec<(FormulaId, Node)> =
        st.s.label(x)
            .ones()
            .map(|i| FormulaId(i as u32))
            .map(|f| (f, clos.node(f)))
            .filter(|(_, n)| n.graded().is_some())
            .collect();

    // choose
    for &(_, node) in &modals {
        let (rel, _, body, _) = node.graded().unwrap();
        let mask = clos.rel_mask(rel);
        let undecided = st
            .s
            .edges_from(x)
            .find(|&(y, m)| mask & !m == 0 && !st.s.has(y, body) && !st.s.has(y, clos.neg(body)));
        if let Some((y, _)) = undecided {
            budget.step()?;
            let alts = [body, clos.neg(body)]
                .into_iter()
                .filter_map(|chi| {
                    let mut alt = st.clone();
                    alt.add(y, chi, MODE).then_some(alt)
                })
                .collect::<Vec<_>>();
            return Ok(if alts.is_empty() {
                Step::Clash
            } else {
                Step::Branch(alts)
            });
        }
    }

    // ≤: merge two successors that both satisfy the body
    for &(_, node) in &modals {
        let Node::Leq { rel, n, body } = node else {
            continue;
        };
        if st.s.counter(x, rel, body) <= n {
            continue;
        }
        let mask = clos.rel_mask(rel);
        let succ: Vec<Var> =
            st.s.edges_from(x)
                .filter(|&(y, m)| mask & !m == 0 && st.s.has(y, body))
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

    // ≥
    for &(_, node) in &modals {
        let Node::Geq { rel, n, body } = node else {
            continue;
        };
        let have = st.s.counter(x, rel, body);
        if have < n {
            for _ in have..n {
                budget.step()?;
                st.add_child(x, clos.rel_mask(rel), body, budget)?;
            }
            return Ok(Step::Applied);
        }
    }
    Ok(Step::Idle)
}
