//! Formulas: syntax tree, s-expression reader and printer, negation normal
//! form, size measures and the closure `clos(φ)`.

mod ast;
mod closure;
mod nnf;
mod parse;

pub use ast::{is_identifier, Formula, RelationExpr, Role, FALSE_ATOM};
pub use closure::{clos, Closure, ClosureError, FormulaId, Node, RelId, RoleMask};
pub use nnf::{bit_length, measures, modernize, neg_nnf, to_nnf, FormulaMeasures};
pub use parse::{parse, ParseError};
