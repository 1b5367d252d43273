use std::collections::{BTreeSet, HashMap, VecDeque};

use thiserror::Error;

use super::ast::{Formula, RelationExpr, Role};
use super::nnf::{measures, neg_nnf};

/// Index of a formula inside a [`Closure`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FormulaId(pub u32);

impl FormulaId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Index of a relation expression occurring in the closure (an element of Ω_φ).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RelId(pub u32);

impl RelId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Set of roles, one bit per entry of [`Closure::roles`].
pub type RoleMask = u64;

/// Interned view of one closure member.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Node {
    Atom { atom: u32, positive: bool },
    And(FormulaId, FormulaId),
    Or(FormulaId, FormulaId),
    Geq { rel: RelId, n: u64, body: FormulaId },
    Leq { rel: RelId, n: u64, body: FormulaId },
    Dia { rel: RelId, n: u64, body: FormulaId },
    Box { rel: RelId, n: u64, body: FormulaId },
}

impl Node {
    /// `(relation, bound, body, is_lower_bound)` for counting modalities.
    pub fn graded(&self) -> Option<(RelId, u64, FormulaId, bool)> {
        match *self {
            Node::Geq { rel, n, body } => Some((rel, n, body, true)),
            Node::Leq { rel, n, body } => Some((rel, n, body, false)),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ClosureError {
    #[error("formula is not in negation normal form")]
    NotNnf,
    #[error("too many relation names ({0}); at most 32 are supported")]
    TooManyRelations(usize),
}

/// `clos(φ)` as an interned table: every member gets a [`FormulaId`] (the root
/// is id 0, the rest in breadth-first discovery order), its `∼`-partner, its
/// modal depth, and the relation tables the engines index counters by.
#[derive(Clone, Debug)]
pub struct Closure {
    formulas: Vec<Formula>,
    nodes: Vec<Node>,
    negs: Vec<FormulaId>,
    depths: Vec<u64>,
    index: HashMap<Formula, FormulaId>,
    atoms: Vec<String>,
    roles: Vec<Role>,
    relations: Vec<RelationExpr>,
    rel_masks: Vec<RoleMask>,
}

impl Closure {
    pub fn new(root: &Formula) -> Result<Self, ClosureError> {
        if !root.is_nnf() {
            return Err(ClosureError::NotNnf);
        }
        let names = root.relation_names();
        if names.len() > 32 {
            return Err(ClosureError::TooManyRelations(names.len()));
        }
        let mut roles: Vec<Role> = names
            .iter()
            .flat_map(|n| [Role::named(n.clone()), Role::inverse_of(n.clone())])
            .collect();
        roles.sort();

        let mut c = Closure {
            formulas: Vec::new(),
            nodes: Vec::new(),
            negs: Vec::new(),
            depths: Vec::new(),
            index: HashMap::new(),
            atoms: Vec::new(),
            roles,
            relations: Vec::new(),
            rel_masks: Vec::new(),
        };
        let mut queue = VecDeque::new();
        c.intern(root, &mut queue);
        while let Some(id) = queue.pop_front() {
            let f = c.formulas[id.index()].clone();
            let node = match &f {
                Formula::Atom(a) => Node::Atom {
                    atom: c.atom_index(a),
                    positive: true,
                },
                Formula::Not(x) => match &**x {
                    Formula::Atom(a) => Node::Atom {
                        atom: c.atom_index(a),
                        positive: false,
                    },
                    _ => unreachable!("checked NNF"),
                },
                Formula::And(a, b) => Node::And(c.intern(a, &mut queue), c.intern(b, &mut queue)),
                Formula::Or(a, b) => Node::Or(c.intern(a, &mut queue), c.intern(b, &mut queue)),
                Formula::GradedGeq(r, n, x) => Node::Geq {
                    rel: c.rel_index(r),
                    n: *n,
                    body: c.intern(x, &mut queue),
                },
                Formula::GradedLeq(r, n, x) => Node::Leq {
                    rel: c.rel_index(r),
                    n: *n,
                    body: c.intern(x, &mut queue),
                },
                Formula::LegacyDia(r, n, x) => Node::Dia {
                    rel: c.rel_index(&RelationExpr::name(r.clone())),
                    n: *n,
                    body: c.intern(x, &mut queue),
                },
                Formula::LegacyBox(r, n, x) => Node::Box {
                    rel: c.rel_index(&RelationExpr::name(r.clone())),
                    n: *n,
                    body: c.intern(x, &mut queue),
                },
            };
            c.nodes[id.index()] = node;
            let neg = c.intern(&neg_nnf(&f), &mut queue);
            c.negs[id.index()] = neg;
        }
        Ok(c)
    }

    fn intern(&mut self, f: &Formula, queue: &mut VecDeque<FormulaId>) -> FormulaId {
        if let Some(&id) = self.index.get(f) {
            return id;
        }
        let id = FormulaId(self.formulas.len() as u32);
        self.formulas.push(f.clone());
        self.nodes.push(Node::Atom {
            atom: 0,
            positive: true,
        });
        self.negs.push(id);
        self.depths.push(measures(f).modal_depth);
        self.index.insert(f.clone(), id);
        queue.push_back(id);
        id
    }

    fn atom_index(&mut self, a: &str) -> u32 {
        match self.atoms.iter().position(|x| x == a) {
            Some(i) => i as u32,
            None => {
                self.atoms.push(a.to_string());
                (self.atoms.len() - 1) as u32
            }
        }
    }

    fn rel_index(&mut self, r: &RelationExpr) -> RelId {
        if let Some(i) = self.relations.iter().position(|x| x == r) {
            return RelId(i as u32);
        }
        let mask = self.mask_of_roles(&r.roles());
        self.relations.push(r.clone());
        self.rel_masks.push(mask);
        RelId((self.relations.len() - 1) as u32)
    }

    pub fn root(&self) -> FormulaId {
        FormulaId(0)
    }

    pub fn len(&self) -> usize {
        self.formulas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.formulas.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = FormulaId> {
        (0..self.formulas.len() as u32).map(FormulaId)
    }

    pub fn formula(&self, id: FormulaId) -> &Formula {
        &self.formulas[id.index()]
    }

    pub fn node(&self, id: FormulaId) -> Node {
        self.nodes[id.index()]
    }

    /// `∼ψ`.
    pub fn neg(&self, id: FormulaId) -> FormulaId {
        self.negs[id.index()]
    }

    pub fn modal_depth(&self, id: FormulaId) -> u64 {
        self.depths[id.index()]
    }

    pub fn id_of(&self, f: &Formula) -> Option<FormulaId> {
        self.index.get(f).copied()
    }

    pub fn atom_name(&self, atom: u32) -> &str {
        &self.atoms[atom as usize]
    }

    /// `R̄_φ`: every relation name of the root formula together with its
    /// inverse, sorted. Bit `i` of a [`RoleMask`] stands for `roles()[i]`.
    pub fn roles(&self) -> &[Role] {
        &self.roles
    }

    pub fn role_index(&self, role: &Role) -> Option<usize> {
        self.roles.iter().position(|r| r == role)
    }

    pub fn mask_of_roles(&self, roles: &[Role]) -> RoleMask {
        roles.iter().fold(0, |m, r| {
            m | 1u64 << self.role_index(r).expect("role not in closure")
        })
    }

    /// Mask with every role replaced by its inverse.
    pub fn invert_mask(&self, mask: RoleMask) -> RoleMask {
        // roles are sorted, so R and R⁻¹ sit at 2i and 2i+1
        const EVEN: u64 = 0x5555_5555_5555_5555;
        ((mask & EVEN) << 1) | ((mask >> 1) & EVEN)
    }

    pub fn all_roles_mask(&self) -> RoleMask {
        if self.roles.len() == 64 {
            u64::MAX
        } else {
            (1u64 << self.roles.len()) - 1
        }
    }

    /// Ω_φ: the relation expressions occurring in the closure.
    pub fn relations(&self) -> &[RelationExpr] {
        &self.relations
    }

    pub fn relation(&self, rel: RelId) -> &RelationExpr {
        &self.relations[rel.index()]
    }

    pub fn rel_mask(&self, rel: RelId) -> RoleMask {
        self.rel_masks[rel.index()]
    }

    pub fn rel_ids(&self) -> impl Iterator<Item = RelId> {
        (0..self.relations.len() as u32).map(RelId)
    }

    /// The members as plain formulas.
    pub fn to_set(&self) -> BTreeSet<Formula> {
        self.formulas.iter().cloned().collect()
    }
}

/// `clos(φ)` for an NNF formula.
pub fn clos(f: &Formula) -> Result<BTreeSet<Formula>, ClosureError> {
    Ok(Closure::new(f)?.to_set())
}
