use super::ast::Formula;

/// Rewrites legacy operators into the counting syntax:
/// `◇ⁿ_R ψ ↦ ⟨R⟩≥n+1 ψ` and `□ⁿ_R ψ ↦ ⟨R⟩≤n ¬ψ`.
///
/// `◇^(2^64-1)` has no `u64` counterpart; it becomes the contradiction,
/// which is its meaning over the finite structures this crate handles.
pub fn modernize(f: &Formula) -> Formula {
    use super::ast::RelationExpr;
    match f {
        Formula::Atom(_) => f.clone(),
        Formula::Not(x) => Formula::not(modernize(x)),
        Formula::And(a, b) => Formula::and(modernize(a), modernize(b)),
        Formula::Or(a, b) => Formula::or(modernize(a), modernize(b)),
        Formula::GradedGeq(r, n, x) => Formula::geq(r.clone(), *n, modernize(x)),
        Formula::GradedLeq(r, n, x) => Formula::leq(r.clone(), *n, modernize(x)),
        Formula::LegacyDia(r, n, x) => match n.checked_add(1) {
            Some(m) => Formula::geq(RelationExpr::name(r.clone()), m, modernize(x)),
            None => Formula::contradiction(),
        },
        Formula::LegacyBox(r, n, x) => Formula::leq(
            RelationExpr::name(r.clone()),
            *n,
            Formula::not(modernize(x)),
        ),
    }
}

/// Negation normal form. Works for both operator families.
pub fn to_nnf(f: &Formula) -> Formula {
    nnf(f, false)
}

/// `∼φ`: the NNF of `¬φ`.
pub fn neg_nnf(f: &Formula) -> Formula {
    nnf(f, true)
}

fn nnf(f: &Formula, negate: bool) -> Formula {
    match (f, negate) {
        (Formula::Atom(_), false) => f.clone(),
        (Formula::Atom(_), true) => Formula::not(f.clone()),
        (Formula::Not(x), _) => nnf(x, !negate),
        (Formula::And(a, b), false) => Formula::and(nnf(a, false), nnf(b, false)),
        (Formula::And(a, b), true) => Formula::or(nnf(a, true), nnf(b, true)),
        (Formula::Or(a, b), false) => Formula::or(nnf(a, false), nnf(b, false)),
        (Formula::Or(a, b), true) => Formula::and(nnf(a, true), nnf(b, true)),
        (Formula::GradedGeq(r, n, x), false) => Formula::geq(r.clone(), *n, nnf(x, false)),
        (Formula::GradedGeq(r, n, x), true) => match n.checked_sub(1) {
            Some(m) => Formula::leq(r.clone(), m, nnf(x, false)),
            None => Formula::contradiction(),
        },
        (Formula::GradedLeq(r, n, x), false) => Formula::leq(r.clone(), *n, nnf(x, false)),
        (Formula::GradedLeq(r, n, x), true) => match n.checked_add(1) {
            Some(m) => Formula::geq(r.clone(), m, nnf(x, false)),
            // more than 2^64-1 successors cannot be witnessed here
            None => Formula::contradiction(),
        },
        (Formula::LegacyDia(r, n, x), false) => Formula::dia(r.clone(), *n, nnf(x, false)),
        (Formula::LegacyDia(r, n, x), true) => Formula::boxed(r.clone(), *n, nnf(x, true)),
        (Formula::LegacyBox(r, n, x), false) => Formula::boxed(r.clone(), *n, nnf(x, false)),
        (Formula::LegacyBox(r, n, x), true) => Formula::dia(r.clone(), *n, nnf(x, true)),
    }
}

/// Size, modal depth and norm of a formula.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FormulaMeasures {
    /// Formula nodes, plus relation-expression nodes, plus the binary length
    /// of every number.
    pub size: u64,
    pub modal_depth: u64,
    /// Only meaningful for NNF input; negations over non-atoms count as 1.
    pub norm: u64,
}

/// Binary length of `n`; zero takes one bit.
pub fn bit_length(n: u64) -> u64 {
    u64::from(64 - n.leading_zeros()).max(1)
}

fn relation_nodes(r: &super::ast::RelationExpr) -> u64 {
    use super::ast::RelationExpr;
    match r {
        RelationExpr::Name(_) => 1,
        RelationExpr::Inverse(_) => 2,
        RelationExpr::Intersection(rs) => 1 + rs.iter().map(|r| 1 + r.inverse as u64).sum::<u64>(),
    }
}

pub fn measures(f: &Formula) -> FormulaMeasures {
    match f {
        Formula::Atom(_) => FormulaMeasures {
            size: 1,
            modal_depth: 0,
            norm: 0,
        },
        Formula::Not(x) => {
            let m = measures(x);
            FormulaMeasures {
                size: 1 + m.size,
                modal_depth: m.modal_depth,
                norm: if matches!(**x, Formula::Atom(_)) {
                    0
                } else {
                    1 + m.norm
                },
            }
        }
        Formula::And(a, b) | Formula::Or(a, b) => {
            let (ma, mb) = (measures(a), measures(b));
            FormulaMeasures {
                size: 1 + ma.size + mb.size,
                modal_depth: ma.modal_depth.max(mb.modal_depth),
                norm: 1 + ma.norm + mb.norm,
            }
        }
        Formula::GradedGeq(r, n, x) | Formula::GradedLeq(r, n, x) => {
            let m = measures(x);
            FormulaMeasures {
                size: 1 + relation_nodes(r) + bit_length(*n) + m.size,
                modal_depth: 1 + m.modal_depth,
                norm: 1 + m.norm,
            }
        }
        Formula::LegacyDia(_, n, x) | Formula::LegacyBox(_, n, x) => {
            let m = measures(x);
            FormulaMeasures {
                size: 2 + bit_length(*n) + m.size,
                modal_depth: 1 + m.modal_depth,
                norm: 1 + m.norm,
            }
        }
    }
}
