//! Exact Gaussian elimination over the rational-function field.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::expr::Expr;
use crate::poly::Var;

/// `constant + sum coeffs[j] * x_j` over unknowns indexed by `usize`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct AffineExpr {
    pub constant: Expr,
    pub coeffs: BTreeMap<usize, Expr>,
}

impl AffineExpr {
    pub fn zero() -> AffineExpr {
        AffineExpr::default()
    }

    pub fn constant(c: Expr) -> AffineExpr {
        AffineExpr {
            constant: c,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn unknown(j: usize) -> AffineExpr {
        AffineExpr::term(j, Expr::one())
    }

    pub fn term(j: usize, c: Expr) -> AffineExpr {
        let mut coeffs = BTreeMap::new();
        if !c.is_zero() {
            coeffs.insert(j, c);
        }
        AffineExpr {
            constant: Expr::zero(),
            coeffs,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.constant.is_zero() && self.coeffs.is_empty()
    }

    pub fn add_term(&mut self, j: usize, c: &Expr) {
        if c.is_zero() {
            return;
        }
        let v = match self.coeffs.get(&j) {
            Some(old) => old + c,
            None => c.clone(),
        };
        if v.is_zero() {
            self.coeffs.remove(&j);
        } else {
            self.coeffs.insert(j, v);
        }
    }

    pub fn add_scaled(&mut self, other: &AffineExpr, s: &Expr) {
        if s.is_zero() {
            return;
        }
        self.constant = &self.constant + &(&other.constant * s);
        for (&j, c) in &other.coeffs {
            self.add_term(j, &(c * s));
        }
    }

    pub fn add(&self, other: &AffineExpr) -> AffineExpr {
        let mut out = self.clone();
        out.add_scaled(other, &Expr::one());
        out
    }

    pub fn sub(&self, other: &AffineExpr) -> AffineExpr {
        let mut out = self.clone();
        out.add_scaled(other, &Expr::from_int(-1));
        out
    }

    pub fn scale(&self, s: &Expr) -> AffineExpr {
        let mut out = AffineExpr::zero();
        out.add_scaled(self, s);
        out
    }

    /// Value with every unknown replaced by `values[j]`.
    pub fn eval(&self, values: &[Expr]) -> Expr {
        let mut acc = self.constant.clone();
        for (&j, c) in &self.coeffs {
            acc = &acc + &(c * &values[j]);
        }
        acc
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LinearError {
    #[error("equation {0} is not affine in the unknowns")]
    NotAffine(usize),
}

/// Equations `e = 0`, each affine in `unknowns`.
#[derive(Clone, Debug, Default)]
pub struct LinearSystem {
    pub unknowns: Vec<String>,
    pub equations: Vec<AffineExpr>,
}

impl LinearSystem {
    pub fn new(unknowns: Vec<String>) -> LinearSystem {
        LinearSystem {
            unknowns,
            equations: Vec::new(),
        }
    }

    pub fn push(&mut self, e: AffineExpr) {
        if !e.is_zero() {
            self.equations.push(e);
        }
    }

    /// Builds a system from expressions whose unknowns are workspace symbols.
    pub fn from_exprs(
        equations: &[Expr],
        unknowns: &[Var],
        names: Vec<String>,
    ) -> Result<LinearSystem, LinearError> {
        let zero_subs: Vec<(Var, Expr)> = unknowns.iter().map(|&v| (v, Expr::zero())).collect();
        let mut ls = LinearSystem::new(names);
        for (i, e) in equations.iter().enumerate() {
            let mut a = AffineExpr::constant(
                e.substitute(&zero_subs).map_err(|_| LinearError::NotAffine(i))?,
            );
            for (j, &v) in unknowns.iter().enumerate() {
                let c = e.diff(v);
                if unknowns.iter().any(|&w| c.depends_on(w)) {
                    return Err(LinearError::NotAffine(i));
                }
                a.add_term(j, &c);
            }
            ls.push(a);
        }
        Ok(ls)
    }

    pub fn solve(&self) -> Solution {
        solve_linear(self)
    }
}

/// Outcome of [`solve_linear`].
#[derive(Clone, Debug, PartialEq)]
pub enum Solution {
    Unique(Vec<Expr>),
    /// Index of an equation reducing to a nonzero constant.
    Inconsistent { equation: usize },
    /// Pivot unknowns expressed through the free ones.
    Underdetermined {
        free: Vec<usize>,
        general: Vec<AffineExpr>,
    },
}

/// Row-reduced echelon form, maintained incrementally.
#[derive(Clone, Debug, Default)]
pub struct Echelon {
    /// pivot unknown -> row with coefficient 1 at the pivot, no other pivots
    rows: BTreeMap<usize, AffineExpr>,
}

impl Echelon {
    pub fn new() -> Echelon {
        Echelon::default()
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    fn reduce(&self, mut e: AffineExpr) -> AffineExpr {
        let hits: Vec<usize> = e
            .coeffs
            .keys()
            .copied()
            .filter(|j| self.rows.contains_key(j))
            .collect();
        for j in hits {
            if let Some(c) = e.coeffs.get(&j).cloned() {
                e.add_scaled(&self.rows[&j], &-c);
            }
        }
        e
    }

    /// Adds an equation; returns `false` if it made the system inconsistent.
    pub fn insert(&mut self, e: AffineExpr) -> bool {
        let e = self.reduce(e);
        if e.coeffs.is_empty() {
            return e.constant.is_zero();
        }
        // Prefer the cheapest coefficient as pivot.
        let (&p, _) = e
            .coeffs
            .iter()
            .min_by_key(|(&j, c)| (!c.is_constant(), c.size(), j))
            .unwrap();
        let inv = e.coeffs[&p].inv().expect("nonzero pivot");
        let row = e.scale(&inv);
        for other in self.rows.values_mut() {
            if let Some(c) = other.coeffs.get(&p).cloned() {
                other.add_scaled(&row, &-c);
            }
        }
        self.rows.insert(p, row);
        true
    }

    pub fn solution(&self, n: usize) -> Solution {
        let free: Vec<usize> = (0..n).filter(|j| !self.rows.contains_key(j)).collect();
        if free.is_empty() {
            let values = (0..n)
                .map(|j| -&self.rows[&j].constant)
                .collect();
            return Solution::Unique(values);
        }
        let general = (0..n)
            .map(|j| match self.rows.get(&j) {
                Some(row) => {
                    let mut g = AffineExpr::constant(-&row.constant);
                    for (&k, c) in &row.coeffs {
                        if k != j {
                            g.add_term(k, &-c);
                        }
                    }
                    g
                }
                None => AffineExpr::unknown(j),
            })
            .collect();
        Solution::Underdetermined { free, general }
    }
}

/// Solves the system exactly.
pub fn solve_linear(ls: &LinearSystem) -> Solution {
    let mut ech = Echelon::new();
    for (i, e) in ls.equations.iter().enumerate() {
        if !ech.insert(e.clone()) {
            return Solution::Inconsistent { equation: i };
        }
    }
    ech.solution(ls.unknowns.len())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eq(c: i64, terms: &[(usize, i64)]) -> AffineExpr {
        let mut a = AffineExpr::constant(Expr::from_int(c));
        for &(j, v) in terms {
            a.add_term(j, &Expr::from_int(v));
        }
        a
    }

    #[test]
    fn small_systems() {
        let mut ls = LinearSystem::new(vec!["x".into()]);
        ls.push(eq(-1, &[(0, 1)]));
        assert_eq!(ls.solve(), Solution::Unique(vec![Expr::one()]));

        let mut ls = LinearSystem::new(vec!["x".into(), "y".into()]);
        ls.push(eq(0, &[(0, 1), (1, 1)]));
        ls.push(eq(0, &[(0, 1), (1, -1)]));
        assert_eq!(ls.solve(), Solution::Unique(vec![Expr::zero(), Expr::zero()]));

        let mut ls = LinearSystem::new(vec!["x".into(), "y".into()]);
        ls.push(eq(1, &[(0, 1), (1, 1)]));
        ls.push(eq(3, &[(0, 2), (1, 2)]));
        assert_eq!(ls.solve(), Solution::Inconsistent { equation: 1 });

        let mut ls = LinearSystem::new(vec!["x".into(), "y".into()]);
        ls.push(eq(-3, &[(0, 1), (1, 1)]));
        match ls.solve() {
            Solution::Underdetermined { free, general } => {
                assert_eq!(free.len(), 1);
                assert_eq!(general.len(), 2);
            }
            s => panic!("{s:?}"),
        }
    }
}
