//! The depth-first procedure behind the optimized and inverse engines.
//!
//! A call to `sat` owns one variable: its label, its counters and the run
//! stack of choices for the successors generated so far. Successors are
//! solved one at a time by a nested call and only their counter
//! contributions survive it, so the live variables always form a single
//! path from the root.
//!
//! Search decisions:
//!
//! * `∨`: the left disjunct first, then the right.
//! * Successor generation fires on the lowest-id `⟨ω⟩≥n φ′` whose counter is
//!   below `n`. The successor gets `φ′` and one sign per formula `ψ` with
//!   `x ⊨ ⟨σ⟩⋈m ψ` and `σ` contained in the successor's edge set. Signs are
//!   enumerated as a binary number, bit `i` negating the `i`-th such formula
//!   (so the all-positive vector comes first). The sign of `φ′` itself is
//!   fixed positive.
//! * In inverse mode the edge set is a superset of `ω` within the roles of
//!   the formula, by ascending size and then lexicographically.
//! * Successors generated for the same trigger use non-decreasing choices.
//!   Counters only grow while a variable generates, so every trigger owns one
//!   contiguous block of successors and the order inside a block is
//!   irrelevant.
//! * In inverse mode a successor that finds `⟨σ⟩⋈m ψ` pointing back at its
//!   predecessor, where the predecessor holds neither `ψ` nor `∼ψ`, returns a
//!   restart request. The predecessor adds `ψ` (then `∼ψ`) to its own label
//!   and starts over from local saturation.

use std::sync::Arc;

use fixedbitset::FixedBitSet;

use super::{Budget, Limits, Outcome, SolveError, Verdict, WitnessTree};
use crate::csys::CounterBank;
use crate::formula::{Closure, FormulaId, Node, RelId, RoleMask};
use crate::kripke::canonical_structure;

pub(crate) fn solve(
    clos: Arc<Closure>,
    inverse: bool,
    limits: Limits,
    want_model: bool,
) -> Result<Outcome, SolveError> {
    let mut label = FixedBitSet::with_capacity(clos.len());
    label.insert(clos.root().index());

    let mut first = Tracer::new(&clos, inverse, limits, false);
    let res = first.sat(label.clone(), None)?;
    let stats = first.budget.stats;
    let verdict = match res {
        Res::Sat(_) => Verdict::Sat,
        Res::Unsat => Verdict::Unsat,
        Res::Restart(_) => unreachable!("the root has no predecessor"),
    };
    let mut out = Outcome {
        verdict,
        stats,
        model: None,
        system: None,
    };
    if verdict == Verdict::Sat && want_model {
        // same choices again, this time keeping the accepting branch
        let mut second = Tracer::new(&clos, inverse, limits, true);
        let Res::Sat(Some(tree)) = second.sat(label, None)? else {
            unreachable!("recording run diverged from the first run");
        };
        let system = tree.into_system(Arc::clone(&clos), inverse);
        let (m, _) = canonical_structure(&system);
        out.model = Some((m, 0));
        out.system = Some(system);
    }
    Ok(out)
}

enum Res {
    Sat(Option<WitnessTree>),
    Unsat,
    Restart(FormulaId),
}

enum Attempt {
    Found(Choice, Option<WitnessTree>),
    Exhausted,
    Restart(FormulaId),
}

/// Edge set and sign vector of one generated successor.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Choice {
    guess: RoleMask,
    signs: u64,
}

/// `count` consecutive successors generated for `trigger` with `choice`.
#[derive(Debug)]
struct Run {
    trigger: usize,
    choice: Choice,
    count: u64,
}

#[derive(Clone, Copy, Debug)]
struct Modal {
    rel: RelId,
    n: u64,
    body: FormulaId,
    geq: bool,
}

/// What a successor knows about the variable that generated it.
#[derive(Clone, Copy)]
struct Pred<'p> {
    label: &'p FixedBitSet,
    /// Roles on the edge from the successor back to the predecessor.
    mask: RoleMask,
}

struct Tracer<'c> {
    clos: &'c Closure,
    inverse: bool,
    recording: bool,
    budget: Budget,
    depth_bound: u64,
    depth: u64,
}

impl<'c> Tracer<'c> {
    fn new(clos: &'c Closure, inverse: bool, limits: Limits, recording: bool) -> Self {
        Tracer {
            clos,
            inverse,
            recording,
            budget: Budget::new(limits),
            depth_bound: clos.modal_depth(clos.root()) + 1,
            depth: 0,
        }
    }

    fn sat(&mut self, label: FixedBitSet, pred: Option<Pred<'_>>) -> Result<Res, SolveError> {
        self.budget.enter()?;
        self.depth += 1;
        assert!(
            self.depth <= self.depth_bound,
            "trace depth {} exceeds modal depth + 1",
            self.depth
        );
        let r = self.explore(label, pred, 0);
        self.depth -= 1;
        self.budget.leave();
        r
    }

    /// Local saturation with `∨` as a choice point, then generation.
    fn explore(
        &mut self,
        mut label: FixedBitSet,
        pred: Option<Pred<'_>>,
        restarts: usize,
    ) -> Result<Res, SolveError> {
        let clos = self.clos;
        loop {
            let mut grew = false;
            for i in label.ones().collect::<Vec<_>>() {
                if let Node::And(a, b) = clos.node(FormulaId(i as u32)) {
                    if !label.contains(a.index()) || !label.contains(b.index()) {
                        self.budget.step()?;
                        label.insert(a.index());
                        label.insert(b.index());
                        grew = true;
                    }
                }
            }
            if !grew {
                break;
            }
        }
        if self.atomic_clash(&label) {
            return Ok(Res::Unsat);
        }
        let open_or = label
            .ones()
            .find_map(|i| match clos.node(FormulaId(i as u32)) {
                Node::Or(a, b) if !label.contains(a.index()) && !label.contains(b.index()) => {
                    Some((a, b))
                }
                _ => None,
            });
        if let Some((a, b)) = open_or {
            self.budget.step()?;
            let mut left = label.clone();
            left.insert(a.index());
            match self.explore(left, pred, restarts)? {
                Res::Unsat => {}
                r => return Ok(r),
            }
            self.budget.backtrack();
            label.insert(b.index());
            return self.explore(label, pred, restarts);
        }
        self.saturated(label, pred, restarts)
    }

    fn atomic_clash(&self, label: &FixedBitSet) -> bool {
        label.ones().any(|i| {
            let f = FormulaId(i as u32);
            matches!(self.clos.node(f), Node::Atom { positive: true, .. })
                && label.contains(self.clos.neg(f).index())
        })
    }

    fn saturated(
        &mut self,
        label: FixedBitSet,
        pred: Option<Pred<'_>>,
        restarts: usize,
    ) -> Result<Res, SolveError> {
        let clos = self.clos;
        let modals: Vec<Modal> = label
            .ones()
            .filter_map(|i| {
                clos.node(FormulaId(i as u32))
                    .graded()
                    .map(|(rel, n, body, geq)| Modal { rel, n, body, geq })
            })
            .collect();
        let mut bank = CounterBank::new(clos);
        if let Some(p) = pred {
            // a modality looking back at the predecessor needs its verdict on
            // the body
            for m in &modals {
                if clos.rel_mask(m.rel) & !p.mask == 0
                    && !p.label.contains(m.body.index())
                    && !p.label.contains(clos.neg(m.body).index())
                {
                    return Ok(Res::Restart(m.body));
                }
            }
            for r in clos.rel_ids().filter(|&r| clos.rel_mask(r) & !p.mask == 0) {
                for f in p.label.ones() {
                    bank.add(r, FormulaId(f as u32), 1);
                }
            }
        }
        if modals
            .iter()
            .any(|m| !m.geq && bank.get(m.rel, m.body) > m.n)
        {
            return Ok(Res::Unsat);
        }
        self.generate(&label, &modals, bank, pred, restarts)
    }

    fn generate(
        &mut self,
        label: &FixedBitSet,
        modals: &[Modal],
        mut bank: CounterBank,
        pred: Option<Pred<'_>>,
        restarts: usize,
    ) -> Result<Res, SolveError> {
        let mut runs: Vec<Run> = Vec::new();
        let mut kids: Vec<(RoleMask, WitnessTree)> = Vec::new();
        'generate: loop {
            let trigger = modals
                .iter()
                .position(|m| m.geq && bank.get(m.rel, m.body) < m.n);
            let Some(t) = trigger else {
                let tree = self.recording.then(|| WitnessTree {
                    label: label.clone(),
                    children: std::mem::take(&mut kids),
                });
                return Ok(Res::Sat(tree));
            };
            let start = match runs.last() {
                Some(r) if r.trigger == t => r.choice,
                _ => Choice {
                    guess: self.clos.rel_mask(modals[t].rel),
                    signs: 0,
                },
            };
            let mut t = t;
            let mut attempt = self.attempt(label, modals, &mut bank, t, Some(start))?;
            loop {
                match attempt {
                    Attempt::Found(choice, tree) => {
                        match runs.last_mut() {
                            Some(r) if r.trigger == t && r.choice == choice => r.count += 1,
                            _ => runs.push(Run {
                                trigger: t,
                                choice,
                                count: 1,
                            }),
                        }
                        if let Some(tree) = tree {
                            kids.push((choice.guess, tree));
                            self.debug_check_counters(&bank, modals, &kids, pred);
                        }
                        continue 'generate;
                    }
                    Attempt::Restart(psi) => return self.restart(label, psi, pred, restarts),
                    Attempt::Exhausted => {
                        let Some(last) = runs.last_mut() else {
                            return Ok(Res::Unsat);
                        };
                        let (lt, lc) = (last.trigger, last.choice);
                        last.count -= 1;
                        if last.count == 0 {
                            runs.pop();
                        }
                        kids.pop();
                        let child = self.child_label(modals, lt, lc)?;
                        self.count(&mut bank, lc.guess, &child, false);
                        self.budget.backtrack();
                        // the popped successor's trigger is the one to advance
                        t = lt;
                        let next = self.next_choice(modals, t, lc)?;
                        attempt = self.attempt(label, modals, &mut bank, t, next)?;
                    }
                }
            }
        }
    }

    /// Tries choices for a successor of trigger `t`, starting at `from`.
    fn attempt(
        &mut self,
        label: &FixedBitSet,
        modals: &[Modal],
        bank: &mut CounterBank,
        t: usize,
        from: Option<Choice>,
    ) -> Result<Attempt, SolveError> {
        let mut next = from;
        while let Some(choice) = next {
            self.budget.step()?;
            let child = self.child_label(modals, t, choice)?;
            self.count(bank, choice.guess, &child, true);
            if self.within_bounds(bank, modals, choice.guess, &child) {
                let back = Pred {
                    label,
                    mask: self.clos.invert_mask(choice.guess),
                };
                let pred = self.inverse.then_some(back);
                match self.sat(child.clone(), pred)? {
                    Res::Sat(tree) => return Ok(Attempt::Found(choice, tree)),
                    Res::Restart(psi) => {
                        self.count(bank, choice.guess, &child, false);
                        return Ok(Attempt::Restart(psi));
                    }
                    Res::Unsat => {}
                }
            }
            self.count(bank, choice.guess, &child, false);
            self.budget.backtrack();
            next = self.next_choice(modals, t, choice)?;
        }
        Ok(Attempt::Exhausted)
    }

    /// Adds (or removes) the contribution of a successor with edge set
    /// `guess` and initial label `child`.
    fn count(&self, bank: &mut CounterBank, guess: RoleMask, child: &FixedBitSet, add: bool) {
        for r in self
            .clos
            .rel_ids()
            .filter(|&r| self.clos.rel_mask(r) & !guess == 0)
        {
            for f in child.ones() {
                if add {
                    bank.add(r, FormulaId(f as u32), 1);
                } else {
                    bank.sub(r, FormulaId(f as u32), 1);
                }
            }
        }
    }

    /// No upper bound affected by the new successor is exceeded.
    fn within_bounds(
        &self,
        bank: &CounterBank,
        modals: &[Modal],
        guess: RoleMask,
        child: &FixedBitSet,
    ) -> bool {
        modals.iter().all(|m| {
            m.geq
                || self.clos.rel_mask(m.rel) & !guess != 0
                || !child.contains(m.body.index())
                || bank.get(m.rel, m.body) <= m.n
        })
    }

    /// Formulas that need a sign on a successor with edge set `guess`, one
    /// per `{ψ, ∼ψ}` pair, in label order, without the trigger body's pair.
    fn sign_formulas(
        &self,
        modals: &[Modal],
        t: usize,
        guess: RoleMask,
    ) -> Result<Vec<FormulaId>, SolveError> {
        let clos = self.clos;
        let fixed = modals[t].body;
        let mut out: Vec<FormulaId> = Vec::new();
        for m in modals {
            if clos.rel_mask(m.rel) & !guess != 0 || m.body == fixed || clos.neg(m.body) == fixed {
                continue;
            }
            if !out.iter().any(|&f| f == m.body || clos.neg(f) == m.body) {
                out.push(m.body);
            }
        }
        if out.len() > 62 {
            return Err(SolveError::Unsupported(
                "too many distinct modal bodies at one variable".into(),
            ));
        }
        Ok(out)
    }

    fn child_label(
        &self,
        modals: &[Modal],
        t: usize,
        choice: Choice,
    ) -> Result<FixedBitSet, SolveError> {
        let mut child = FixedBitSet::with_capacity(self.clos.len());
        child.insert(modals[t].body.index());
        for (i, f) in self
            .sign_formulas(modals, t, choice.guess)?
            .into_iter()
            .enumerate()
        {
            let f = if choice.signs >> i & 1 == 1 {
                self.clos.neg(f)
            } else {
                f
            };
            child.insert(f.index());
        }
        Ok(child)
    }

    fn next_choice(
        &self,
        modals: &[Modal],
        t: usize,
        c: Choice,
    ) -> Result<Option<Choice>, SolveError> {
        let k = self.sign_formulas(modals, t, c.guess)?.len();
        if c.signs + 1 < 1u64 << k {
            return Ok(Some(Choice {
                guess: c.guess,
                signs: c.signs + 1,
            }));
        }
        if !self.inverse {
            return Ok(None);
        }
        let base = self.clos.rel_mask(modals[t].rel);
        Ok(next_superset(base, self.clos.all_roles_mask(), c.guess)
            .map(|guess| Choice { guess, signs: 0 }))
    }

    fn restart(
        &mut self,
        label: &FixedBitSet,
        psi: FormulaId,
        pred: Option<Pred<'_>>,
        restarts: usize,
    ) -> Result<Res, SolveError> {
        self.budget.stats.restarts += 1;
        // every restart adds a formula that was missing, so this is bounded
        assert!(restarts < self.clos.len(), "restart bound exceeded");
        for chi in [psi, self.clos.neg(psi)] {
            self.budget.step()?;
            let mut l = label.clone();
            l.insert(chi.index());
            match self.explore(l, pred, restarts + 1)? {
                Res::Unsat => self.budget.backtrack(),
                r => return Ok(r),
            }
        }
        Ok(Res::Unsat)
    }

    fn debug_check_counters(
        &self,
        bank: &CounterBank,
        modals: &[Modal],
        kids: &[(RoleMask, WitnessTree)],
        pred: Option<Pred<'_>>,
    ) {
        if !cfg!(debug_assertions) || kids.len() > 64 {
            return;
        }
        for m in modals {
            let rm = self.clos.rel_mask(m.rel);
            let from_pred =
                pred.is_some_and(|p| rm & !p.mask == 0 && p.label.contains(m.body.index()));
            let scanned = kids
                .iter()
                .filter(|(g, t)| rm & !g == 0 && t.label.contains(m.body.index()))
                .count() as u64
                + from_pred as u64;
            assert_eq!(
                bank.get(m.rel, m.body),
                scanned,
                "counter for {}",
                self.clos.formula(m.body)
            );
        }
    }
}

/// The next superset of `base` within `all` after `cur`: ascending size,
/// then lexicographic by role index.
fn next_superset(base: RoleMask, all: RoleMask, cur: RoleMask) -> Option<RoleMask> {
    let free: Vec<u32> = (0..64).filter(|&i| (all & !base) >> i & 1 == 1).collect();
    let f = free.len();
    let mut pick: Vec<usize> = free
        .iter()
        .enumerate()
        .filter(|&(_, &b)| cur >> b & 1 == 1)
        .map(|(i, _)| i)
        .collect();
    let k = pick.len();
    match (0..k).rev().find(|&i| pick[i] < f - k + i) {
        Some(i) => {
            pick[i] += 1;
            for j in i + 1..k {
                pick[j] = pick[j - 1] + 1;
            }
        }
        None if k < f => pick = (0..=k).collect(),
        None => return None,
    }
    Some(pick.iter().fold(base, |m, &i| m | 1u64 << free[i]))
}
