//! Search loop for the engines that keep one global constraint system.
//!
//! Rules are applied to the oldest variable that may still have an
//! applicable rule. A variable is marked again whenever its label, its
//! successors or their labels change. Choice points clone the whole system;
//! alternatives wait on an explicit stack and are resumed chronologically.

use std::collections::BTreeSet;
use std::sync::Arc;

use super::{Budget, Limits, Outcome, SolveError, Verdict};
use crate::csys::{ClashMode, ConstraintSystem, Var};
use crate::formula::{Closure, FormulaId, RoleMask};

#[derive(Clone, Debug)]
pub(crate) struct State {
    pub s: ConstraintSystem,
    dirty: BTreeSet<Var>,
}

/// What one rule application did to the current state.
pub(crate) enum Step {
    Applied,
    /// The variable has no applicable rule.
    Idle,
    Clash,
    /// Alternatives in the order they are to be tried.
    Branch(Vec<State>),
}

impl State {
    /// Adds `v ⊨ f` and marks `v` and its predecessors. Returns false on an
    /// immediate clash at `v` under `mode`.
    pub fn add(&mut self, v: Var, f: FormulaId, mode: ClashMode) -> bool {
        if self.s.add_formula(v, f) {
            self.dirty.insert(v);
            self.dirty.extend(self.s.preds(v).collect::<Vec<_>>());
            return self.local_clash_free(v, mode);
        }
        true
    }

    fn local_clash_free(&self, v: Var, mode: ClashMode) -> bool {
        match self.s.clash_at(v, mode) {
            None => true,
            // counting clashes may still be repaired by merging
            Some(crate::csys::ClashReason::Counting { .. }) => true,
            Some(_) => false,
        }
    }

    /// Creates a successor `y` of `x` with `y ⊨ f`.
    pub fn add_child(
        &mut self,
        x: Var,
        mask: RoleMask,
        f: FormulaId,
        budget: &mut Budget,
    ) -> Result<Var, SolveError> {
        let y = self.s.fresh_var(Some(x));
        self.s.add_edge(x, y, mask);
        self.s.add_formula(y, f);
        self.dirty.insert(x);
        self.dirty.insert(y);
        let mut depth = 1;
        let mut v = y;
        while let Some(p) = self.s.parent(v) {
            depth += 1;
            v = p;
        }
        budget.created(depth, self.s.var_count() as u64)?;
        budget.constraints(self.s.constraint_count())?;
        Ok(y)
    }

    /// `[keep/drop]S`, with every variable marked.
    pub fn merge(&mut self, drop: Var, keep: Var) {
        self.s.replace_in_place(drop, keep);
        self.dirty = self.s.vars().collect();
    }
}

/// Runs `rule` to completion with chronological backtracking.
pub(crate) fn run(
    clos: Arc<Closure>,
    limits: Limits,
    mode: ClashMode,
    mut rule: impl FnMut(&mut State, Var, &mut Budget) -> Result<Step, SolveError>,
) -> Result<Outcome, SolveError> {
    let mut budget = Budget::new(limits);
    let root = clos.root();
    let mut s = ConstraintSystem::new(clos, false);
    let x0 = s.fresh_var(None);
    budget.created(1, 1)?;
    let mut cur = State {
        s,
        dirty: BTreeSet::new(),
    };
    let mut ok = cur.add(x0, root, mode);
    let mut pending: Vec<State> = Vec::new();
    loop {
        if ok {
            match cur.dirty.first().copied() {
                None => {
                    if cur.s.detect_clash(mode).is_none() {
                        return Ok(Outcome {
                            verdict: Verdict::Sat,
                            stats: budget.stats,
                            model: None,
                            system: Some(cur.s),
                        });
                    }
                    ok = false;
                }
                Some(x) => match rule(&mut cur, x, &mut budget)? {
                    Step::Applied => {}
                    Step::Idle => {
                        cur.dirty.remove(&x);
                    }
                    Step::Clash => ok = false,
                    Step::Branch(mut alts) => {
                        alts.reverse();
                        cur = alts.pop().expect("a branch needs an alternative");
                        pending.extend(alts);
                    }
                },
            }
            continue;
        }
        match pending.pop() {
            Some(next) => {
                budget.backtrack();
                cur = next;
                ok = true;
            }
            None => {
                return Ok(Outcome {
                    verdict: Verdict::Unsat,
                    stats: budget.stats,
                    model: None,
                    system: None,
                })
            }
        }
    }
}

/// The `∧`- and `∨`-rules, shared by both rule sets. `None` if neither
/// applies to `x`.
pub(crate) fn propositional(
    st: &mut State,
    x: Var,
    mode: ClashMode,
    budget: &mut Budget,
) -> Result<Option<Step>, SolveError> {
    let clos = st.s.shared_closure();
    let label: Vec<FormulaId> = st.s.label(x).ones().map(|i| FormulaId(i as u32)).collect();
    for &f in &label {
        if let crate::formula::Node::And(a, b) = clos.node(f) {
            if !st.s.has(x, a) || !st.s.has(x, b) {
                budget.step()?;
                let ok = st.add(x, a, mode) && st.add(x, b, mode);
                return Ok(Some(if ok { Step::Applied } else { Step::Clash }));
            }
        }
    }
    for &f in &label {
        if let crate::formula::Node::Or(a, b) = clos.node(f) {
            if !st.s.has(x, a) && !st.s.has(x, b) {
                budget.step()?;
                let alts = [a, b]
                    .into_iter()
                    .filter_map(|c| {
                        let mut alt = st.clone();
                        alt.add(x, c, mode).then_some(alt)
                    })
                    .collect::<Vec<_>>();
                return Ok(Some(if alts.is_empty() {
                    Step::Clash
                } else {
                    Step::Branch(alts)
                }));
            }
        }
    }
    Ok(None)
}
