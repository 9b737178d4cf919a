//! Exact arithmetic: big integers, sparse polynomials, reduced rational
//! functions, a text grammar and a linear solver over the function field.

#![allow(clippy::needless_range_loop)]

pub mod expr;
pub mod gcd;
pub mod int;
pub mod linsolve;
pub mod parse;
pub mod poly;
pub mod workspace;

pub use expr::{ArithError, Expr};
pub use gcd::gcd;
pub use int::Int;
pub use linsolve::{solve_linear, AffineExpr, Echelon, LinearError, LinearSystem, Solution};
pub use parse::{parse, parse_ast, parse_rational, Algebra, Ast, ParseError, ParseErrorKind};
pub use poly::{Monomial, Poly, Var, MAX_VARS};
pub use workspace::{Symbol, SymbolKind, Workspace, WorkspaceError};

pub use num_bigint::BigInt;
pub use num_rational::BigRational;
