use std::fmt;

/// Atom reserved for the contradiction `p0__false ∧ ¬p0__false` produced when
/// negating a vacuous `≥0` modality. User input may not mention it.
pub const FALSE_ATOM: &str = "p0__false";

/// Returns true if `s` matches `[a-zA-Z][a-zA-Z0-9_]*`.
pub fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// A relation name or its inverse.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Role {
    pub name: String,
    pub inverse: bool,
}

impl Role {
    pub fn named(name: impl Into<String>) -> Self {
        Role {
            name: name.into(),
            inverse: false,
        }
    }

    pub fn inverse_of(name: impl Into<String>) -> Self {
        Role {
            name: name.into(),
            inverse: true,
        }
    }

    /// `(R⁻¹)⁻¹ = R`.
    pub fn inverted(&self) -> Self {
        Role {
            name: self.name.clone(),
            inverse: !self.inverse,
        }
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.inverse {
            write!(f, "(inv {})", self.name)
        } else {
            f.write_str(&self.name)
        }
    }
}

/// The relation part of a graded modality: a name, an inverse, or an
/// intersection of at least two distinct roles.
///
/// Values built through [`RelationExpr::from_roles`] are canonical: members of
/// an intersection are sorted and deduplicated, and a one-member intersection
/// collapses to the member itself.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RelationExpr {
    Name(String),
    Inverse(String),
    Intersection(Vec<Role>),
}

impl RelationExpr {
    pub fn name(name: impl Into<String>) -> Self {
        RelationExpr::Name(name.into())
    }

    pub fn inverse(name: impl Into<String>) -> Self {
        RelationExpr::Inverse(name.into())
    }

    pub fn from_role(role: Role) -> Self {
        if role.inverse {
            RelationExpr::Inverse(role.name)
        } else {
            RelationExpr::Name(role.name)
        }
    }

    /// Builds the canonical expression for `R₁ ∩ … ∩ R_k`.
    ///
    /// Panics if `roles` is empty.
    pub fn from_roles(mut roles: Vec<Role>) -> Self {
        assert!(!roles.is_empty(), "an intersection needs at least one role");
        roles.sort();
        roles.dedup();
        if roles.len() == 1 {
            RelationExpr::from_role(roles.pop().unwrap())
        } else {
            RelationExpr::Intersection(roles)
        }
    }

    /// Members of the expression, in canonical order.
    pub fn roles(&self) -> Vec<Role> {
        match self {
            RelationExpr::Name(n) => vec![Role::named(n.clone())],
            RelationExpr::Inverse(n) => vec![Role::inverse_of(n.clone())],
            RelationExpr::Intersection(rs) => rs.clone(),
        }
    }

    /// True for a bare relation name (the only form allowed in `Gr(K_R)`).
    pub fn is_plain(&self) -> bool {
        matches!(self, RelationExpr::Name(_))
    }
}

impl fmt::Display for RelationExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RelationExpr::Name(n) => f.write_str(n),
            RelationExpr::Inverse(n) => write!(f, "(inv {n})"),
            RelationExpr::Intersection(rs) => {
                f.write_str("(cap")?;
                for r in rs {
                    write!(f, " {r}")?;
                }
                f.write_str(")")
            }
        }
    }
}

/// A formula of graded modal logic.
///
/// `GradedGeq`/`GradedLeq` are the counting operators `⟨ω⟩≥n` and `⟨ω⟩≤n`.
/// `LegacyDia`/`LegacyBox` are the older `◇ⁿ_R` ("more than n") and `□ⁿ_R`
/// ("all but at most n") operators; only the incorrect calculus and
/// [`modernize`](super::modernize) consume them.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    Atom(String),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    GradedGeq(RelationExpr, u64, Box<Formula>),
    GradedLeq(RelationExpr, u64, Box<Formula>),
    LegacyDia(String, u64, Box<Formula>),
    LegacyBox(String, u64, Box<Formula>),
}

impl Formula {
    pub fn atom(name: impl Into<String>) -> Self {
        Formula::Atom(name.into())
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Self {
        Formula::Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Self {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Self {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn geq(rel: RelationExpr, n: u64, f: Formula) -> Self {
        Formula::GradedGeq(rel, n, Box::new(f))
    }

    pub fn leq(rel: RelationExpr, n: u64, f: Formula) -> Self {
        Formula::GradedLeq(rel, n, Box::new(f))
    }

    pub fn dia(rel: impl Into<String>, n: u64, f: Formula) -> Self {
        Formula::LegacyDia(rel.into(), n, Box::new(f))
    }

    pub fn boxed(rel: impl Into<String>, n: u64, f: Formula) -> Self {
        Formula::LegacyBox(rel.into(), n, Box::new(f))
    }

    /// Left-nested conjunction of a nonempty list.
    pub fn conj(parts: impl IntoIterator<Item = Formula>) -> Self {
        let mut it = parts.into_iter();
        let first = it.next().expect("empty conjunction");
        it.fold(first, Formula::and)
    }

    /// The contradiction `p0__false ∧ ¬p0__false`.
    pub fn contradiction() -> Self {
        Formula::and(
            Formula::atom(FALSE_ATOM),
            Formula::not(Formula::atom(FALSE_ATOM)),
        )
    }

    /// Immediate subformulas.
    pub fn children(&self) -> Vec<&Formula> {
        match self {
            Formula::Atom(_) => vec![],
            Formula::Not(f) => vec![f],
            Formula::And(a, b) | Formula::Or(a, b) => vec![a, b],
            Formula::GradedGeq(_, _, f)
            | Formula::GradedLeq(_, _, f)
            | Formula::LegacyDia(_, _, f)
            | Formula::LegacyBox(_, _, f) => vec![f],
        }
    }

    pub fn is_modal(&self) -> bool {
        matches!(
            self,
            Formula::GradedGeq(..)
                | Formula::GradedLeq(..)
                | Formula::LegacyDia(..)
                | Formula::LegacyBox(..)
        )
    }

    pub fn contains_legacy(&self) -> bool {
        matches!(self, Formula::LegacyDia(..) | Formula::LegacyBox(..))
            || self.children().into_iter().any(Formula::contains_legacy)
    }

    pub fn contains_graded(&self) -> bool {
        matches!(self, Formula::GradedGeq(..) | Formula::GradedLeq(..))
            || self.children().into_iter().any(Formula::contains_graded)
    }

    /// True if some modality uses an inverse or an intersection.
    pub fn contains_inverse_or_intersection(&self) -> bool {
        let here = match self {
            Formula::GradedGeq(r, _, _) | Formula::GradedLeq(r, _, _) => !r.is_plain(),
            _ => false,
        };
        here || self
            .children()
            .into_iter()
            .any(Formula::contains_inverse_or_intersection)
    }

    /// Largest number parameter occurring in the formula (0 if none).
    pub fn max_number(&self) -> u64 {
        let here = match self {
            Formula::GradedGeq(_, n, _)
            | Formula::GradedLeq(_, n, _)
            | Formula::LegacyDia(_, n, _)
            | Formula::LegacyBox(_, n, _) => *n,
            _ => 0,
        };
        self.children()
            .into_iter()
            .map(Formula::max_number)
            .fold(here, u64::max)
    }

    /// Atom names, sorted and deduplicated.
    pub fn atoms(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.collect_atoms(&mut out);
        out.sort();
        out.dedup();
        out
    }

    fn collect_atoms(&self, out: &mut Vec<String>) {
        if let Formula::Atom(a) = self {
            out.push(a.clone());
        }
        for c in self.children() {
            c.collect_atoms(out);
        }
    }

    /// Relation names (without inverse marks), sorted and deduplicated.
    pub fn relation_names(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.collect_relations(&mut out);
        out.sort();
        out.dedup();
        out
    }

    fn collect_relations(&self, out: &mut Vec<String>) {
        match self {
            Formula::GradedGeq(r, _, _) | Formula::GradedLeq(r, _, _) => {
                out.extend(r.roles().into_iter().map(|role| role.name))
            }
            Formula::LegacyDia(r, _, _) | Formula::LegacyBox(r, _, _) => out.push(r.clone()),
            _ => {}
        }
        for c in self.children() {
            c.collect_relations(out);
        }
    }

    /// True if negation occurs only directly in front of atoms.
    pub fn is_nnf(&self) -> bool {
        match self {
            Formula::Atom(_) => true,
            Formula::Not(inner) => matches!(**inner, Formula::Atom(_)),
            _ => self.children().into_iter().all(Formula::is_nnf),
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Atom(a) => f.write_str(a),
            Formula::Not(x) => write!(f, "(not {x})"),
            Formula::And(a, b) => write!(f, "(and {a} {b})"),
            Formula::Or(a, b) => write!(f, "(or {a} {b})"),
            Formula::GradedGeq(r, n, x) => write!(f, "(ge {r} {n} {x})"),
            Formula::GradedLeq(r, n, x) => write!(f, "(le {r} {n} {x})"),
            Formula::LegacyDia(r, n, x) => write!(f, "(dia {r} {n} {x})"),
            Formula::LegacyBox(r, n, x) => write!(f, "(box {r} {n} {x})"),
        }
    }
}
