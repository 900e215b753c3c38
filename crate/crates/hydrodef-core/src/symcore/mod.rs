//! Exact differential-polynomial algebra in jet variables `u^i_(s)` and
//! formal functions of the order-0 variables.

mod atom;
mod deriv;
mod eval;
mod expr;
mod parse;
mod poly;
mod print;

pub use atom::{Atom, FuncAtom, FuncSym, JetVar, Rule};
pub use expr::Expr;
pub use parse::{parse, ParseContext};
pub use poly::{Monomial, Poly};
