//! Symbol tables and the canonical printer.

use std::fmt::Write as _;

use thiserror::Error;

use crate::expr::Expr;
use crate::poly::{Poly, Var, MAX_VARS};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum SymbolKind {
    Field,
    /// Jet symbol of a dependent variable with its x-derivative order.
    Jet { dependent: usize, order: u32 },
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Symbol {
    pub name: String,
    pub kind: SymbolKind,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WorkspaceError {
    #[error("symbol `{0}` declared twice")]
    Duplicate(String),
    #[error("invalid symbol name `{0}`")]
    InvalidName(String),
    #[error("at most {MAX_VARS} field symbols per workspace")]
    TooMany,
}

/// Ordered set of field symbols. Declaration order fixes the monomial order.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Workspace {
    names: Vec<String>,
}

pub(crate) fn valid_name(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl Workspace {
    pub fn new() -> Workspace {
        Workspace::default()
    }

    /// Workspace declaring `names` in order.
    pub fn with_symbols<S: AsRef<str>>(names: &[S]) -> Result<Workspace, WorkspaceError> {
        let mut ws = Workspace::new();
        for n in names {
            ws.declare(n.as_ref())?;
        }
        Ok(ws)
    }

    pub fn declare(&mut self, name: &str) -> Result<Var, WorkspaceError> {
        if !valid_name(name) {
            return Err(WorkspaceError::InvalidName(name.to_string()));
        }
        if self.lookup(name).is_some() {
            return Err(WorkspaceError::Duplicate(name.to_string()));
        }
        if self.names.len() >= MAX_VARS {
            return Err(WorkspaceError::TooMany);
        }
        self.names.push(name.to_string());
        Ok(Var((self.names.len() - 1) as u8))
    }

    pub fn lookup(&self, name: &str) -> Option<Var> {
        self.names.iter().position(|n| n == name).map(|i| Var(i as u8))
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn name(&self, v: Var) -> &str {
        &self.names[v.index()]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn vars(&self) -> impl Iterator<Item = Var> {
        (0..self.names.len() as u8).map(Var)
    }

    pub fn symbol(&self, v: Var) -> Symbol {
        Symbol {
            name: self.names[v.index()].clone(),
            kind: SymbolKind::Field,
        }
    }

    /// Expr for the symbol `name`; panics if undeclared.
    pub fn sym(&self, name: &str) -> Expr {
        Expr::var(self.lookup(name).unwrap_or_else(|| panic!("undeclared symbol {name}")))
    }

    pub fn print_poly(&self, p: &Poly) -> String {
        let mut out = String::new();
        if p.is_zero() {
            return "0".into();
        }
        for (i, (m, c)) in p.terms().iter().enumerate() {
            let neg = c.is_negative();
            let abs = c.abs();
            if i == 0 {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            let mut factors: Vec<String> = Vec::new();
            if !abs.is_one() || m.is_one() {
                factors.push(abs.to_string());
            }
            for (j, &e) in m.exps().iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let name = &self.names[j];
                if e == 1 {
                    factors.push(name.clone());
                } else {
                    factors.push(format!("{name}^{e}"));
                }
            }
            out.push_str(&factors.join("*"));
        }
        out
    }

    /// Canonical text of an expression, parseable by [`crate::parse`].
    pub fn print(&self, e: &Expr) -> String {
        let num = e.numerator();
        let den = e.denominator();
        let ns = self.print_poly(num);
        if den.is_one() {
            return ns;
        }
        let mut out = String::new();
        if num.len() > 1 {
            let _ = write!(out, "({ns})");
        } else {
            out.push_str(&ns);
        }
        out.push('/');
        let ds = self.print_poly(&den);
        if is_atom(&den) {
            out.push_str(&ds);
        } else {
            let _ = write!(out, "({ds})");
        }
        out
    }
}

/// A single number or a single power of one symbol.
fn is_atom(p: &Poly) -> bool {
    if p.len() != 1 {
        return false;
    }
    let (m, c) = &p.terms()[0];
    if m.is_one() {
        return !c.is_negative();
    }
    c.is_one() && m.exps().iter().filter(|&&e| e > 0).count() == 1
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn declare_and_print() {
        let ws = Workspace::with_symbols(&["x", "y"]).unwrap();
        let x = ws.sym("x");
        let y = ws.sym("y");
        let e = &(&x - &y) / &(&y * &Expr::from_int(2));
        assert_eq!(ws.print(&e), "(x - y)/(2*y)");
        assert_eq!(ws.print(&(&x * &x)), "x^2");
        assert!(Workspace::with_symbols(&["x", "x"]).is_err());
        assert!(Workspace::with_symbols(&["1x"]).is_err());
    }
}
