//! Kripke structures, graded model checking, canonical structures of
//! constraint systems, and a brute-force small-model enumerator.
//!
//! Inverse relations are never stored: `R⁻¹` is read off `R` on demand.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use thiserror::Error;

use crate::csys::{ConstraintSystem, Var};
use crate::formula::{Formula, Node, RelationExpr, Role};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum KripkeError {
    #[error("unknown world `{0}`")]
    UnknownWorld(String),
    #[error("unknown relation `{0}`")]
    UnknownRelation(String),
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
}

/// A finite Kripke structure. Worlds are `0..len`, printed as `w0`, `w1`, ….
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct KripkeStructure {
    worlds: usize,
    relations: BTreeMap<String, BTreeSet<(usize, usize)>>,
    valuation: BTreeMap<String, BTreeSet<usize>>,
}

impl KripkeStructure {
    /// A structure with `worlds` worlds, no edges and an empty valuation.
    pub fn new(worlds: usize) -> Self {
        assert!(worlds > 0, "a Kripke structure needs at least one world");
        KripkeStructure {
            worlds,
            ..Default::default()
        }
    }

    pub fn len(&self) -> usize {
        self.worlds
    }

    pub fn is_empty(&self) -> bool {
        self.worlds == 0
    }

    pub fn add_world(&mut self) -> usize {
        self.worlds += 1;
        self.worlds - 1
    }

    /// Registers a relation name with no edges (if not already present).
    pub fn declare_relation(&mut self, name: &str) {
        self.relations.entry(name.to_string()).or_default();
    }

    pub fn add_edge(&mut self, rel: &str, from: usize, to: usize) {
        assert!(
            from < self.worlds && to < self.worlds,
            "edge references unknown world"
        );
        self.relations
            .entry(rel.to_string())
            .or_default()
            .insert((from, to));
    }

    pub fn set_true(&mut self, atom: &str, world: usize) {
        assert!(world < self.worlds, "valuation references unknown world");
        self.valuation
            .entry(atom.to_string())
            .or_default()
            .insert(world);
    }

    pub fn has_edge(&self, rel: &str, from: usize, to: usize) -> bool {
        self.relations
            .get(rel)
            .is_some_and(|s| s.contains(&(from, to)))
    }

    pub fn is_true(&self, atom: &str, world: usize) -> bool {
        self.valuation.get(atom).is_some_and(|s| s.contains(&world))
    }

    pub fn relations(&self) -> impl Iterator<Item = (&str, &BTreeSet<(usize, usize)>)> {
        self.relations.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn edge_count(&self) -> usize {
        self.relations.values().map(BTreeSet::len).sum()
    }

    fn role_holds(&self, role: &Role, x: usize, y: usize) -> bool {
        if role.inverse {
            self.has_edge(&role.name, y, x)
        } else {
            self.has_edge(&role.name, x, y)
        }
    }

    /// Worlds `y` with `(x, y)` in every member of `rel`.
    fn successors(&self, rel: &RelationExpr, x: usize) -> Vec<usize> {
        let roles = rel.roles();
        let first = &roles[0];
        let mut cands: Vec<usize> = match self.relations.get(&first.name) {
            None => return Vec::new(),
            Some(edges) if first.inverse => edges
                .iter()
                .filter(|&&(_, to)| to == x)
                .map(|&(from, _)| from)
                .collect(),
            Some(edges) => edges
                .range((x, 0)..=(x, usize::MAX))
                .map(|&(_, to)| to)
                .collect(),
        };
        cands.retain(|&y| roles[1..].iter().all(|r| self.role_holds(r, x, y)));
        cands
    }

    /// `♯ω(x, φ)`: the number of `ω`-successors of `x` satisfying `φ`.
    pub fn succ_count(
        &self,
        x: usize,
        rel: &RelationExpr,
        f: &Formula,
    ) -> Result<u64, KripkeError> {
        if x >= self.worlds {
            return Err(KripkeError::UnknownWorld(format!("w{x}")));
        }
        for r in rel.roles() {
            if !self.relations.contains_key(&r.name) {
                return Err(KripkeError::UnknownRelation(r.name));
            }
        }
        let truth = self.truth_set(f);
        Ok(self
            .successors(rel, x)
            .into_iter()
            .filter(|&y| truth[y])
            .count() as u64)
    }

    /// `M, x ⊨ φ`. Both operator families are supported; unknown atoms are
    /// false, unknown relations empty, and an unknown world satisfies nothing.
    pub fn check(&self, x: usize, f: &Formula) -> bool {
        x < self.worlds && self.truth_set(f)[x]
    }

    /// Truth value of `f` at every world, computed bottom-up.
    pub fn truth_set(&self, f: &Formula) -> Vec<bool> {
        let count_where = |rel: &RelationExpr, body: &[bool]| -> Vec<u64> {
            (0..self.worlds)
                .map(|x| {
                    self.successors(rel, x)
                        .into_iter()
                        .filter(|&y| body[y])
                        .count() as u64
                })
                .collect()
        };
        match f {
            Formula::Atom(a) => (0..self.worlds).map(|w| self.is_true(a, w)).collect(),
            Formula::Not(x) => self.truth_set(x).into_iter().map(|b| !b).collect(),
            Formula::And(a, b) => {
                let (ta, tb) = (self.truth_set(a), self.truth_set(b));
                ta.iter().zip(&tb).map(|(x, y)| *x && *y).collect()
            }
            Formula::Or(a, b) => {
                let (ta, tb) = (self.truth_set(a), self.truth_set(b));
                ta.iter().zip(&tb).map(|(x, y)| *x || *y).collect()
            }
            Formula::GradedGeq(r, n, x) => count_where(r, &self.truth_set(x))
                .into_iter()
                .map(|c| c >= *n)
                .collect(),
            Formula::GradedLeq(r, n, x) => count_where(r, &self.truth_set(x))
                .into_iter()
                .map(|c| c <= *n)
                .collect(),
            Formula::LegacyDia(r, n, x) => {
                count_where(&RelationExpr::name(r.clone()), &self.truth_set(x))
                    .into_iter()
                    .map(|c| c > *n)
                    .collect()
            }
            Formula::LegacyBox(r, n, x) => {
                let neg: Vec<bool> = self.truth_set(x).into_iter().map(|b| !b).collect();
                count_where(&RelationExpr::name(r.clone()), &neg)
                    .into_iter()
                    .map(|c| c <= *n)
                    .collect()
            }
        }
    }

    /// Renders the line-based model format: `world`, `rel`, `val` and `root`
    /// sections, each sorted lexicographically.
    pub fn to_text(&self, root: usize) -> String {
        let mut worlds: Vec<String> = (0..self.worlds).map(|w| format!("world w{w}")).collect();
        worlds.sort();
        let mut rels: Vec<String> = self
            .relations
            .iter()
            .flat_map(|(name, edges)| {
                edges
                    .iter()
                    .map(move |(a, b)| format!("rel {name} w{a} w{b}"))
            })
            .collect();
        rels.sort();
        let mut vals: Vec<String> = self
            .valuation
            .iter()
            .flat_map(|(atom, ws)| ws.iter().map(move |w| format!("val w{w} {atom}")))
            .collect();
        vals.sort();
        let mut out = String::new();
        for line in worlds.iter().chain(&rels).chain(&vals) {
            out.push_str(line);
            out.push('\n');
        }
        let _ = writeln!(out, "root w{root}");
        out
    }

    /// Parses the model format written by [`to_text`](Self::to_text).
    pub fn from_text(text: &str) -> Result<(KripkeStructure, usize), KripkeError> {
        fn world_id(tok: &str, line: usize) -> Result<usize, KripkeError> {
            tok.strip_prefix('w')
                .and_then(|d| d.parse::<usize>().ok())
                .ok_or_else(|| KripkeError::Syntax {
                    line,
                    msg: format!("bad world id `{tok}`"),
                })
        }
        let mut declared = BTreeSet::new();
        let mut edges = Vec::new();
        let mut vals = Vec::new();
        let mut root = None;
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let toks: Vec<&str> = raw.split_whitespace().collect();
            match toks.as_slice() {
                [] => {}
                ["world", w] => {
                    declared.insert(world_id(w, line)?);
                }
                ["rel", r, a, b] => {
                    edges.push((r.to_string(), world_id(a, line)?, world_id(b, line)?))
                }
                ["val", w, a] => vals.push((world_id(w, line)?, a.to_string())),
                ["root", w] => root = Some(world_id(w, line)?),
                _ => {
                    return Err(KripkeError::Syntax {
                        line,
                        msg: format!("unrecognised line `{raw}`"),
                    })
                }
            }
        }
        let n = declared.len();
        if n == 0 || declared.iter().copied().ne(0..n) {
            return Err(KripkeError::Syntax {
                line: 0,
                msg: "worlds must be w0..wN without gaps".into(),
            });
        }
        let mut m = KripkeStructure::new(n);
        let check = |w: usize| {
            if w < n {
                Ok(w)
            } else {
                Err(KripkeError::UnknownWorld(format!("w{w}")))
            }
        };
        for (r, a, b) in edges {
            m.add_edge(&r, check(a)?, check(b)?);
        }
        for (w, a) in vals {
            m.set_true(&a, check(w)?);
        }
        let root = check(root.ok_or(KripkeError::Syntax {
            line: 0,
            msg: "missing root".into(),
        })?)?;
        Ok((m, root))
    }
}

/// The canonical structure induced by a constraint system: one world per live
/// variable (in creation order), `R`-edges for `Rxy ∈ S` (and for
/// `R⁻¹yx ∈ S`), and `p` true at `x` iff `x ⊨ p ∈ S`.
///
/// Returns the structure and the world of each variable.
pub fn canonical_structure(s: &ConstraintSystem) -> (KripkeStructure, BTreeMap<Var, usize>) {
    let clos = s.closure();
    let world_of: BTreeMap<Var, usize> = s.vars().enumerate().map(|(i, v)| (v, i)).collect();
    let mut m = KripkeStructure::new(world_of.len().max(1));
    for role in clos.roles() {
        if !role.inverse {
            m.declare_relation(&role.name);
        }
    }
    for (&x, &wx) in &world_of {
        for id in s.label(x).ones() {
            if let Node::Atom {
                atom,
                positive: true,
            } = clos.node(crate::formula::FormulaId(id as u32))
            {
                m.set_true(clos.atom_name(atom), wx);
            }
        }
        for (y, mask) in s.edges_from(x) {
            let wy = world_of[&y];
            for (i, role) in clos.roles().iter().enumerate() {
                if mask & (1 << i) == 0 {
                    continue;
                }
                if role.inverse {
                    m.add_edge(&role.name, wy, wx);
                } else {
                    m.add_edge(&role.name, wx, wy);
                }
            }
        }
    }
    (m, world_of)
}

/// Result of [`enumerate_models`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Enumeration {
    Found(KripkeStructure, usize),
    /// Every structure up to the world bound was checked.
    NoneFound,
    /// The structure budget ran out before the search space was covered.
    Inconclusive,
}

/// Default number of structures [`enumerate_models`] may examine.
pub const DEFAULT_ENUMERATION_BUDGET: u64 = 1 << 22;

/// Searches structures over the atoms and relation names of `f`, smallest
/// world count first. For `k` worlds every structure is a bitmap: for each
/// relation name (sorted) `k²` edge bits in row-major order, then for each
/// atom (sorted) `k` valuation bits; bitmaps are tried as integers in
/// ascending order with bit 0 the first edge bit, and worlds are checked in
/// order `w0, w1, …`.
pub fn enumerate_models(f: &Formula, max_worlds: usize, budget: u64) -> Enumeration {
    let atoms = f.atoms();
    let rels = f.relation_names();
    let mut spent: u64 = 0;
    for k in 1..=max_worlds {
        let bits = rels.len() * k * k + atoms.len() * k;
        if bits >= 64 || spent.saturating_add(1u64 << bits) > budget {
            return Enumeration::Inconclusive;
        }
        spent += 1u64 << bits;
        for code in 0..(1u64 << bits) {
            let mut m = KripkeStructure::new(k);
            let mut bit = 0;
            for r in &rels {
                m.declare_relation(r);
                for i in 0..k {
                    for j in 0..k {
                        if code >> bit & 1 == 1 {
                            m.add_edge(r, i, j);
                        }
                        bit += 1;
                    }
                }
            }
            for a in &atoms {
                for w in 0..k {
                    if code >> bit & 1 == 1 {
                        m.set_true(a, w);
                    }
                    bit += 1;
                }
            }
            let truth = m.truth_set(f);
            if let Some(w) = truth.iter().position(|&b| b) {
                return Enumeration::Found(m, w);
            }
        }
    }
    Enumeration::NoneFound
}
