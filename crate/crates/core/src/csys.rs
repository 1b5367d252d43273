//! Constraint systems: sets of `x ⊨ ψ` and `Rxy` constraints over the
//! closure of one input formula.
//!
//! Formulas are stored as [`FormulaId`]s of a shared [`Closure`]; edge labels
//! are [`RoleMask`]s over its roles. In inverse mode every `Rxy` is stored
//! together with `R⁻¹yx`.
//!
//! Every variable keeps counters `♯ω(x, ψ)` for `ω ∈ Ω_φ`, updated as
//! constraints are added; [`ConstraintSystem::count`] is the scanning
//! reference they are checked against in debug builds.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use fixedbitset::FixedBitSet;

use crate::formula::{Closure, FormulaId, Node, RelId, RoleMask};

/// A variable. Ids grow monotonically in creation order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var(pub u32);

impl Var {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x{}", self.0)
    }
}

/// Which clash definition to apply.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ClashMode {
    /// Atomic clashes and `{x ⊨ ◇ᵐφ, x ⊨ □ⁿ∼φ}` with `m ≤ n`.
    Legacy,
    /// Atomic clashes and `x ⊨ ⟨R⟩≤n φ` with `♯R(x, φ) > n`.
    Graded,
    /// As `Graded`, with relations that may be inverses or intersections.
    GradedInverse,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ClashReason {
    Atomic {
        var: Var,
        atom: String,
    },
    Counting {
        var: Var,
        formula: FormulaId,
        count: u64,
    },
    LegacyPair {
        var: Var,
        dia: FormulaId,
        boxed: FormulaId,
    },
}

impl ClashReason {
    pub fn var(&self) -> Var {
        match *self {
            ClashReason::Atomic { var, .. }
            | ClashReason::Counting { var, .. }
            | ClashReason::LegacyPair { var, .. } => var,
        }
    }
}

/// Counters `♯ω(x, ψ)` of one variable, indexed by `(ω, ψ)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CounterBank {
    width: usize,
    values: Vec<u64>,
}

impl CounterBank {
    pub fn new(clos: &Closure) -> Self {
        CounterBank {
            width: clos.len(),
            values: vec![0; clos.len() * clos.relations().len()],
        }
    }

    pub fn get(&self, rel: RelId, f: FormulaId) -> u64 {
        self.values[rel.index() * self.width + f.index()]
    }

    pub fn add(&mut self, rel: RelId, f: FormulaId, delta: u64) {
        let v = &mut self.values[rel.index() * self.width + f.index()];
        *v = v.checked_add(delta).expect("counter overflow");
    }

    pub fn sub(&mut self, rel: RelId, f: FormulaId, delta: u64) {
        let v = &mut self.values[rel.index() * self.width + f.index()];
        *v = v.checked_sub(delta).expect("counter underflow");
    }

    pub fn reset(&mut self) {
        self.values.fill(0);
    }
}

#[derive(Clone, Debug)]
struct VarData {
    alive: bool,
    label: FixedBitSet,
    succ: BTreeMap<Var, RoleMask>,
    pred: BTreeSet<Var>,
    parent: Option<Var>,
    children: Vec<Var>,
    /// Allocated when the variable gets its first outgoing edge.
    counters: Option<CounterBank>,
}

#[derive(Clone, Debug)]
pub struct ConstraintSystem {
    clos: Arc<Closure>,
    inverse_mode: bool,
    vars: Vec<VarData>,
    live: usize,
    formula_constraints: usize,
    edge_constraints: usize,
}

impl ConstraintSystem {
    pub fn new(clos: Arc<Closure>, inverse_mode: bool) -> Self {
        ConstraintSystem {
            clos,
            inverse_mode,
            vars: Vec::new(),
            live: 0,
            formula_constraints: 0,
            edge_constraints: 0,
        }
    }

    pub fn closure(&self) -> &Closure {
        &self.clos
    }

    pub fn shared_closure(&self) -> Arc<Closure> {
        Arc::clone(&self.clos)
    }

    pub fn inverse_mode(&self) -> bool {
        self.inverse_mode
    }

    /// Creates a variable; `parent` records that it was generated for it.
    pub fn fresh_var(&mut self, parent: Option<Var>) -> Var {
        let v = Var(u32::try_from(self.vars.len()).expect("too many variables"));
        self.vars.push(VarData {
            alive: true,
            label: FixedBitSet::with_capacity(self.clos.len()),
            succ: BTreeMap::new(),
            pred: BTreeSet::new(),
            parent,
            children: Vec::new(),
            counters: None,
        });
        if let Some(p) = parent {
            self.vars[p.index()].children.push(v);
        }
        self.live += 1;
        v
    }

    pub fn is_alive(&self, v: Var) -> bool {
        self.vars.get(v.index()).is_some_and(|d| d.alive)
    }

    /// Live variables in creation order.
    pub fn vars(&self) -> impl Iterator<Item = Var> + '_ {
        self.vars
            .iter()
            .enumerate()
            .filter(|(_, d)| d.alive)
            .map(|(i, _)| Var(i as u32))
    }

    pub fn var_count(&self) -> usize {
        self.live
    }

    /// Number of `x ⊨ ψ` plus number of `Rxy` constraints.
    pub fn constraint_count(&self) -> usize {
        self.formula_constraints + self.edge_constraints
    }

    pub fn label(&self, x: Var) -> &FixedBitSet {
        &self.vars[x.index()].label
    }

    pub fn has(&self, x: Var, f: FormulaId) -> bool {
        self.vars[x.index()].label.contains(f.index())
    }

    pub fn parent(&self, x: Var) -> Option<Var> {
        self.vars[x.index()].parent
    }

    pub fn children(&self, x: Var) -> &[Var] {
        &self.vars[x.index()].children
    }

    pub fn edge_mask(&self, x: Var, y: Var) -> RoleMask {
        self.vars[x.index()].succ.get(&y).copied().unwrap_or(0)
    }

    /// Outgoing edges of `x` with their role sets, ordered by target.
    pub fn edges_from(&self, x: Var) -> impl Iterator<Item = (Var, RoleMask)> + '_ {
        self.vars[x.index()].succ.iter().map(|(&y, &m)| (y, m))
    }

    /// Variables with an edge into `x`.
    pub fn preds(&self, x: Var) -> impl Iterator<Item = Var> + '_ {
        self.vars[x.index()].pred.iter().copied()
    }

    /// Adds `x ⊨ f`; returns false if it was already present.
    pub fn add_formula(&mut self, x: Var, f: FormulaId) -> bool {
        let d = &mut self.vars[x.index()];
        if d.label.put(f.index()) {
            return false;
        }
        self.formula_constraints += 1;
        let preds: Vec<Var> = d.pred.iter().copied().collect();
        for a in preds {
            let m = self.vars[a.index()].succ[&x];
            self.bump_formula(a, m, f);
        }
        self.debug_check_counters();
        true
    }

    /// Adds `Rxy` for every role `R` in `mask` (and `R⁻¹yx` in inverse mode).
    /// Returns true if anything was new.
    pub fn add_edge(&mut self, x: Var, y: Var, mask: RoleMask) -> bool {
        let mut changed = self.or_edge(x, y, mask);
        if self.inverse_mode {
            let inv = self.clos.invert_mask(mask);
            changed |= self.or_edge(y, x, inv);
        }
        self.debug_check_counters();
        changed
    }

    fn or_edge(&mut self, x: Var, y: Var, mask: RoleMask) -> bool {
        let old = self.edge_mask(x, y);
        let new = old | mask;
        if new == old {
            return false;
        }
        self.edge_constraints += (new.count_ones() - old.count_ones()) as usize;
        self.vars[x.index()].succ.insert(y, new);
        self.vars[y.index()].pred.insert(x);
        self.bump_edge(x, y, new, old);
        true
    }

    /// Counter update for `f` newly added at the target of an edge from `x`
    /// labelled `mask`.
    fn bump_formula(&mut self, x: Var, mask: RoleMask, f: FormulaId) {
        let clos = Arc::clone(&self.clos);
        let bank = self.vars[x.index()]
            .counters
            .get_or_insert_with(|| CounterBank::new(&clos));
        for r in clos.rel_ids().filter(|&r| clos.rel_mask(r) & !mask == 0) {
            bank.add(r, f, 1);
        }
    }

    /// Counter update for the edge `x→y` growing from `old` to `new` roles.
    fn bump_edge(&mut self, x: Var, y: Var, new: RoleMask, old: RoleMask) {
        let clos = Arc::clone(&self.clos);
        let rels: Vec<RelId> = clos
            .rel_ids()
            .filter(|&r| {
                let m = clos.rel_mask(r);
                m & !new == 0 && m & !old != 0
            })
            .collect();
        let label = self.vars[y.index()].label.clone();
        let bank = self.vars[x.index()]
            .counters
            .get_or_insert_with(|| CounterBank::new(&clos));
        for r in rels {
            for f in label.ones() {
                bank.add(r, FormulaId(f as u32), 1);
            }
        }
    }

    /// `♯ω(x, ψ)` recomputed by scanning the edges of `x`.
    pub fn count(&self, x: Var, rel: RelId, f: FormulaId) -> u64 {
        self.count_mask(x, self.clos.rel_mask(rel), f)
    }

    /// Number of `y` with every role of `mask` on `x→y` and `y ⊨ f`.
    pub fn count_mask(&self, x: Var, mask: RoleMask, f: FormulaId) -> u64 {
        self.edges_from(x)
            .filter(|&(y, m)| mask & !m == 0 && self.has(y, f))
            .count() as u64
    }

    /// The maintained counter for `♯ω(x, ψ)`.
    pub fn counter(&self, x: Var, rel: RelId, f: FormulaId) -> u64 {
        self.vars[x.index()]
            .counters
            .as_ref()
            .map_or(0, |b| b.get(rel, f))
    }

    fn rebuild_counters(&mut self, x: Var) {
        let clos = Arc::clone(&self.clos);
        let d = &self.vars[x.index()];
        if d.succ.is_empty() {
            self.vars[x.index()].counters = None;
            return;
        }
        let mut bank = CounterBank::new(&clos);
        for (&y, &m) in &d.succ {
            for r in clos.rel_ids().filter(|&r| clos.rel_mask(r) & !m == 0) {
                for f in self.vars[y.index()].label.ones() {
                    bank.add(r, FormulaId(f as u32), 1);
                }
            }
        }
        self.vars[x.index()].counters = Some(bank);
    }

    /// Panics if a maintained counter differs from the scanned count.
    pub fn check_counters(&self) {
        for x in self.vars() {
            for r in self.clos.rel_ids() {
                for f in self.clos.ids() {
                    assert_eq!(
                        self.counter(x, r, f),
                        self.count(x, r, f),
                        "counter for {x}, {}, {}",
                        self.clos.relation(r),
                        self.clos.formula(f)
                    );
                }
            }
        }
    }

    fn debug_check_counters(&self) {
        // full scans are quadratic; only small systems are checked
        if cfg!(debug_assertions) && self.live <= 24 {
            self.check_counters();
        }
    }

    /// First clash in scan order (oldest variable, then formula id), if any.
    pub fn detect_clash(&self, mode: ClashMode) -> Option<ClashReason> {
        self.vars().find_map(|x| self.clash_at(x, mode))
    }

    /// First clash among the constraints of `x`.
    pub fn clash_at(&self, x: Var, mode: ClashMode) -> Option<ClashReason> {
        let clos = &*self.clos;
        let label = self.label(x);
        for i in label.ones() {
            let f = FormulaId(i as u32);
            match clos.node(f) {
                Node::Atom {
                    atom,
                    positive: true,
                } if label.contains(clos.neg(f).index()) => {
                    return Some(ClashReason::Atomic {
                        var: x,
                        atom: clos.atom_name(atom).to_string(),
                    });
                }
                Node::Leq { rel, n, body } if mode != ClashMode::Legacy => {
                    let count = self.counter(x, rel, body);
                    if count > n {
                        return Some(ClashReason::Counting {
                            var: x,
                            formula: f,
                            count,
                        });
                    }
                }
                Node::Box { rel, n, body } if mode == ClashMode::Legacy => {
                    let dia = label.ones().map(|j| FormulaId(j as u32)).find(|&g| {
                        matches!(clos.node(g), Node::Dia { rel: r2, n: m, body: b2 }
                            if r2 == rel && m <= n && clos.neg(b2) == body)
                    });
                    if let Some(dia) = dia {
                        return Some(ClashReason::LegacyPair {
                            var: x,
                            dia,
                            boxed: f,
                        });
                    }
                }
                _ => {}
            }
        }
        None
    }

    /// `[z/y]S`.
    pub fn replace(&self, y: Var, z: Var) -> ConstraintSystem {
        let mut s = self.clone();
        s.replace_in_place(y, z);
        s
    }

    /// Rewrites every occurrence of `y` into `z` and removes `y`.
    pub fn replace_in_place(&mut self, y: Var, z: Var) {
        assert!(y != z && self.is_alive(y) && self.is_alive(z));
        let subst = |v: Var| if v == y { z } else { v };
        let in_edges: Vec<(Var, RoleMask)> = self.vars[y.index()]
            .pred
            .iter()
            .map(|&a| (a, self.vars[a.index()].succ[&y]))
            .collect();
        let yd = self.vars[y.index()].clone();
        for f in yd.label.ones() {
            self.vars[z.index()].label.insert(f);
        }
        self.detach(y);
        for (&b, &m) in &yd.succ {
            let b = subst(b);
            *self.vars[z.index()].succ.entry(b).or_insert(0) |= m;
            self.vars[b.index()].pred.insert(z);
        }
        for &(a, m) in &in_edges {
            let a = subst(a);
            *self.vars[a.index()].succ.entry(z).or_insert(0) |= m;
            self.vars[z.index()].pred.insert(a);
        }
        // the ≺ forest: y's children move to z; z takes y's place if y was its parent
        for &c in &yd.children {
            if c != z {
                self.vars[c.index()].parent = Some(z);
                self.vars[z.index()].children.push(c);
            }
        }
        if self.vars[z.index()].parent == Some(y) {
            self.vars[z.index()].parent = yd.parent;
            if let Some(p) = yd.parent {
                self.vars[p.index()].children.push(z);
            }
        }
        self.recount();
        let ids: Vec<Var> = self.vars().collect();
        for v in ids {
            self.rebuild_counters(v);
        }
        self.debug_check_counters();
    }

    /// Removes every constraint mentioning `v` and marks it dead.
    fn detach(&mut self, v: Var) {
        let d = std::mem::replace(
            &mut self.vars[v.index()],
            VarData {
                alive: false,
                label: FixedBitSet::new(),
                succ: BTreeMap::new(),
                pred: BTreeSet::new(),
                parent: None,
                children: Vec::new(),
                counters: None,
            },
        );
        for b in d.succ.keys() {
            if *b != v {
                self.vars[b.index()].pred.remove(&v);
            }
        }
        for a in &d.pred {
            if *a != v {
                self.vars[a.index()].succ.remove(&v);
            }
        }
        if let Some(p) = d.parent {
            self.vars[p.index()].children.retain(|&c| c != v);
        }
        self.live -= 1;
        // put the old data back for the caller to read, dead
        self.vars[v.index()] = VarData { alive: false, ..d };
    }

    fn recount(&mut self) {
        self.formula_constraints = self
            .vars
            .iter()
            .filter(|d| d.alive)
            .map(|d| d.label.count_ones(..))
            .sum();
        self.edge_constraints = self
            .vars
            .iter()
            .filter(|d| d.alive)
            .flat_map(|d| d.succ.values())
            .map(|m| m.count_ones() as usize)
            .sum();
    }

    /// Whether `[z/y]S` keeps every lower bound that involves both `y` and
    /// `z`: for each `x ⊨ ⟨ω⟩≥n φ` (legacy: `x ⊨ ◇ⁿφ`) with `ω`-edges from
    /// `x` to both, the count after replacement must stay `≥ n` (`> n`).
    pub fn is_safe(&self, y: Var, z: Var, mode: ClashMode) -> bool {
        let merged = self.replace(y, z);
        for x in self.vars() {
            for i in self.label(x).ones() {
                let f = FormulaId(i as u32);
                let (rel, n, body, strict) = match (self.clos.node(f), mode) {
                    (Node::Dia { rel, n, body }, ClashMode::Legacy) => (rel, n, body, true),
                    (Node::Geq { rel, n, body }, ClashMode::Graded | ClashMode::GradedInverse) => {
                        (rel, n, body, false)
                    }
                    _ => continue,
                };
                let m = self.clos.rel_mask(rel);
                if m & !self.edge_mask(x, y) != 0 || m & !self.edge_mask(x, z) != 0 {
                    continue;
                }
                let x2 = if x == y { z } else { x };
                let c = merged.count(x2, rel, body);
                if (strict && c <= n) || (!strict && c < n) {
                    return false;
                }
            }
        }
        true
    }

    /// Removes every strict `≺`-descendant of `y` with all constraints naming
    /// it. `y` keeps its own formula constraints.
    pub fn delete_subtrees(&mut self, y: Var) {
        let mut doomed = Vec::new();
        let mut stack: Vec<Var> = self.children(y).to_vec();
        while let Some(v) = stack.pop() {
            doomed.push(v);
            stack.extend_from_slice(self.children(v));
        }
        let mut touched = BTreeSet::new();
        for &v in &doomed {
            touched.extend(self.vars[v.index()].pred.iter().copied());
        }
        for &v in &doomed {
            if self.is_alive(v) {
                self.detach(v);
            }
        }
        self.recount();
        for v in touched {
            if self.is_alive(v) {
                self.rebuild_counters(v);
            }
        }
        self.debug_check_counters();
    }

    /// One constraint per line, sorted: `c <var> <formula>` and
    /// `e <role> <var> <var>`.
    pub fn dump(&self) -> String {
        let mut lines = Vec::new();
        for x in self.vars() {
            for i in self.label(x).ones() {
                lines.push(format!("c {x} {}", self.clos.formula(FormulaId(i as u32))));
            }
            for (y, m) in self.edges_from(x) {
                for (i, role) in self.clos.roles().iter().enumerate() {
                    if m >> i & 1 == 1 {
                        lines.push(format!("e {role} {x} {y}"));
                    }
                }
            }
        }
        lines.sort();
        let mut out = lines.join("\n");
        out.push('\n');
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{parse, to_nnf, Role};

    /// An empty system over the closure of `root`.
    fn system(root: &str, inverse: bool) -> ConstraintSystem {
        let clos = Closure::new(&to_nnf(&parse(root).unwrap())).unwrap();
        ConstraintSystem::new(Arc::new(clos), inverse)
    }

    fn id(s: &ConstraintSystem, f: &str) -> FormulaId {
        s.closure()
            .id_of(&parse(f).unwrap())
            .unwrap_or_else(|| panic!("{f} not in closure"))
    }

    fn mask(s: &ConstraintSystem, roles: &[&str]) -> RoleMask {
        let roles: Vec<Role> = roles.iter().map(|r| Role::named(*r)).collect();
        s.closure().mask_of_roles(&roles)
    }

    fn rel(s: &ConstraintSystem, r: &str) -> RelId {
        let c = s.closure();
        c.rel_ids()
            .find(|&i| c.relation(i).to_string() == r)
            .unwrap()
    }

    #[test]
    fn count_examples() {
        let mut s = system(
            "(and (ge R 1 p) (and (ge (cap R S) 1 p) (ge (cap R T) 1 p)))",
            false,
        );
        let x = s.fresh_var(None);
        let y = s.fresh_var(Some(x));
        let p = id(&s, "p");
        s.add_edge(x, y, mask(&s, &["R"]));
        s.add_formula(y, p);
        assert_eq!(s.count(x, rel(&s, "R"), p), 1);
        assert_eq!(s.counter(x, rel(&s, "R"), p), 1);
        s.add_edge(x, y, mask(&s, &["S"]));
        assert_eq!(s.count(x, rel(&s, "(cap R S)"), p), 1);
        assert_eq!(s.count(x, rel(&s, "(cap R T)"), p), 0);
        s.check_counters();
    }

    #[test]
    fn three_p1_successors_are_counted() {
        let mut s = system("(and (dia R 2 p1) (box R 1 p2))", false);
        let x = s.fresh_var(None);
        let p1 = id(&s, "p1");
        for _ in 0..3 {
            let y = s.fresh_var(Some(x));
            s.add_edge(x, y, mask(&s, &["R"]));
            s.add_formula(y, p1);
        }
        assert_eq!(s.count(x, rel(&s, "R"), p1), 3);
        assert_eq!(s.counter(x, rel(&s, "R"), p1), 3);
    }

    #[test]
    fn clash_examples() {
        let mut s = system("(and p (not p))", false);
        let x = s.fresh_var(None);
        s.add_formula(x, id(&s, "p"));
        assert_eq!(s.detect_clash(ClashMode::Graded), None);
        s.add_formula(x, id(&s, "(not p)"));
        assert_eq!(
            s.detect_clash(ClashMode::Graded),
            Some(ClashReason::Atomic {
                var: x,
                atom: "p".into()
            })
        );

        let mut s = system("(le R 1 p)", false);
        let x = s.fresh_var(None);
        let le = id(&s, "(le R 1 p)");
        s.add_formula(x, le);
        for _ in 0..2 {
            let y = s.fresh_var(Some(x));
            s.add_edge(x, y, mask(&s, &["R"]));
            s.add_formula(y, id(&s, "p"));
        }
        assert_eq!(
            s.detect_clash(ClashMode::Graded),
            Some(ClashReason::Counting {
                var: x,
                formula: le,
                count: 2
            })
        );
        assert_eq!(s.detect_clash(ClashMode::Legacy), None);

        for (m, n, clash) in [(1, 1, true), (0, 1, true), (2, 1, false)] {
            let mut s = system(&format!("(and (dia R {m} p) (box R {n} (not p)))"), false);
            let x = s.fresh_var(None);
            s.add_formula(x, id(&s, &format!("(dia R {m} p)")));
            s.add_formula(x, id(&s, &format!("(box R {n} (not p))")));
            assert_eq!(
                matches!(
                    s.detect_clash(ClashMode::Legacy),
                    Some(ClashReason::LegacyPair { .. })
                ),
                clash,
                "m={m} n={n}"
            );
        }
    }

    #[test]
    fn replacement_moves_constraints() {
        let mut s = system("(ge R 1 p)", false);
        let x = s.fresh_var(None);
        let y = s.fresh_var(Some(x));
        let z = s.fresh_var(Some(x));
        s.add_edge(x, y, mask(&s, &["R"]));
        s.add_formula(y, id(&s, "p"));
        let t = s.replace(y, z);
        assert!(!t.is_alive(y) && s.is_alive(y));
        assert_eq!(t.dump(), "c x2 p\ne R x0 x2\n");
        assert_eq!(t.counter(x, rel(&t, "R"), id(&t, "p")), 1);
    }

    #[test]
    fn safe_when_the_bound_survives() {
        let mut s = system("(ge R 1 p)", false);
        let x = s.fresh_var(None);
        s.add_formula(x, id(&s, "(ge R 1 p)"));
        let (y, z) = (s.fresh_var(Some(x)), s.fresh_var(Some(x)));
        for v in [y, z] {
            s.add_edge(x, v, mask(&s, &["R"]));
            s.add_formula(v, id(&s, "p"));
        }
        assert!(s.is_safe(y, z, ClashMode::Graded));
    }

    #[test]
    fn unsafe_merge_found_by_search() {
        // x ⊨ ⟨R⟩≥2 (p ∨ q) with successors w ⊨ p ∨ q, y ⊨ p, z ⊨ q, the
        // labels of y and z extended by every subset of {p, q, p ∨ q}.
        // Merging y into z keeps w and one more `p ∨ q` successor only if
        // y or z holds `p ∨ q`.
        let base = system("(ge R 2 (or p q))", false);
        let cands = ["p", "q", "(or p q)"].map(|f| id(&base, f));
        let (p, q, pq) = (cands[0], cands[1], cands[2]);
        let mut unsafe_pairs = Vec::new();
        for ly in 0..8u32 {
            for lz in 0..8u32 {
                let mut s = base.clone();
                let r = mask(&s, &["R"]);
                let x = s.fresh_var(None);
                s.add_formula(x, id(&s, "(ge R 2 (or p q))"));
                let w = s.fresh_var(Some(x));
                s.add_edge(x, w, r);
                s.add_formula(w, pq);
                let (y, z) = (s.fresh_var(Some(x)), s.fresh_var(Some(x)));
                for (v, bits, own) in [(y, ly, p), (z, lz, q)] {
                    s.add_edge(x, v, r);
                    s.add_formula(v, own);
                    for (i, &f) in cands.iter().enumerate() {
                        if bits >> i & 1 == 1 {
                            s.add_formula(v, f);
                        }
                    }
                }
                if !s.is_safe(y, z, ClashMode::Graded) {
                    unsafe_pairs.push((s.has(y, pq), s.has(z, pq)));
                }
            }
        }
        // four label choices without `p ∨ q` on each side
        assert_eq!(unsafe_pairs.len(), 16);
        assert!(unsafe_pairs.iter().all(|&pair| pair == (false, false)));
    }

    #[test]
    fn legacy_safety_is_strict() {
        let mut s = system("(dia R 1 p)", false);
        let x = s.fresh_var(None);
        s.add_formula(x, id(&s, "(dia R 1 p)"));
        let (y, z) = (s.fresh_var(Some(x)), s.fresh_var(Some(x)));
        for v in [y, z] {
            s.add_edge(x, v, mask(&s, &["R"]));
            s.add_formula(v, id(&s, "p"));
        }
        // more than one p-successor is required, merging leaves one
        assert!(!s.is_safe(y, z, ClashMode::Legacy));
    }

    #[test]
    fn delete_subtrees_on_a_chain() {
        let mut s = system("(ge R 1 (ge R 1 p))", false);
        let r = mask(&s, &["R"]);
        let x = s.fresh_var(None);
        let y = s.fresh_var(Some(x));
        let z = s.fresh_var(Some(y));
        s.add_edge(x, y, r);
        s.add_edge(y, z, r);
        s.add_formula(y, id(&s, "(ge R 1 p)"));
        s.add_formula(z, id(&s, "p"));

        let mut leaf = s.clone();
        leaf.delete_subtrees(z);
        assert_eq!(leaf.dump(), s.dump());

        s.delete_subtrees(y);
        assert!(!s.is_alive(z));
        assert_eq!(s.dump(), "c x1 (ge R 1 p)\ne R x0 x1\n");
        assert_eq!(s.counter(y, rel(&s, "R"), id(&s, "p")), 0);
        s.check_counters();
    }

    #[test]
    fn inverse_mode_mirrors_edges() {
        let mut s = system("(ge (inv R) 1 p)", true);
        let x = s.fresh_var(None);
        let y = s.fresh_var(Some(x));
        s.add_edge(x, y, mask(&s, &["R"]));
        s.add_formula(x, id(&s, "p"));
        let back = s.closure().mask_of_roles(&[Role::inverse_of("R")]);
        assert_eq!(s.edge_mask(y, x), back);
        assert_eq!(s.counter(y, rel(&s, "(inv R)"), id(&s, "p")), 1);
        assert_eq!(s.dump(), "c x0 p\ne (inv R) x1 x0\ne R x0 x1\n");
    }

    #[test]
    fn counters_follow_merges() {
        let mut s = system("(and (ge R 2 p) (ge R 1 q))", false);
        let r = mask(&s, &["R"]);
        let x = s.fresh_var(None);
        let vs: Vec<Var> = (0..4).map(|_| s.fresh_var(Some(x))).collect();
        for (i, &v) in vs.iter().enumerate() {
            s.add_edge(x, v, r);
            s.add_formula(v, id(&s, if i % 2 == 0 { "p" } else { "q" }));
        }
        s.replace_in_place(vs[3], vs[0]);
        s.replace_in_place(vs[2], vs[1]);
        s.check_counters();
        assert_eq!(s.counter(x, rel(&s, "R"), id(&s, "p")), 2);
        assert_eq!(s.counter(x, rel(&s, "R"), id(&s, "q")), 2);
        assert_eq!(s.var_count(), 3);
    }
}
