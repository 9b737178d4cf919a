//! Rational functions over the rationals in canonical reduced form.
//!
//! An [`Expr`] is `num / (c * f_1^e_1 * ... * f_k^e_k)` where `num` has
//! integer coefficients, `c` is a positive integer and the `f_i` are pairwise
//! coprime, primitive, non-constant polynomials with positive leading
//! coefficient. The numerator is coprime to every `f_i` and its content is
//! coprime to `c`, so the expanded pair `(num, c * prod f_i^e_i)` is the
//! unique reduced representative. The factor list itself is a cache: two
//! equal values may hold differently refined factor lists, which is why
//! equality compares the expanded pair.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::gcd::gcd;
use crate::int::Int;
use crate::poly::{Monomial, Poly, Var, MAX_VARS};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ArithError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("pole at evaluation point")]
    Pole,
}

type Factor = (Arc<Poly>, u32);

#[derive(Clone)]
struct Inner {
    num: Poly,
    den_const: Int,
    den: Vec<Factor>,
}

/// Exact multivariate rational function. Cheap to clone; immutable.
#[derive(Clone)]
pub struct Expr(Arc<Inner>);

fn is_linear(p: &Poly) -> bool {
    p.total_degree() == 1
}

fn same_poly(a: &Arc<Poly>, b: &Arc<Poly>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

/// Gcd of two normalized denominator factors.
fn factor_gcd(a: &Poly, b: &Poly) -> Poly {
    if a.support() & b.support() == 0 {
        return Poly::one();
    }
    if is_linear(a) && is_linear(b) {
        return Poly::one();
    }
    gcd(a, b)
}

/// Splits a nonzero polynomial destined for a denominator into its signed
/// content and normalized factors (one per variable of the monomial content,
/// plus the remaining primitive part).
fn split_denominator(p: &Poly) -> (Int, Vec<Factor>) {
    let (c, pp) = p.primitive();
    let mut factors = Vec::new();
    let mono = pp.monomial_content();
    let rest = if mono.is_one() {
        pp
    } else {
        for i in 0..MAX_VARS {
            let v = Var(i as u8);
            let e = mono.exp(v);
            if e > 0 {
                factors.push((Arc::new(Poly::var(v)), e as u32));
            }
        }
        pp.div_monomial(&mono)
    };
    if !rest.is_constant() {
        factors.push((Arc::new(rest), 1));
    }
    (c, factors)
}

/// Pairwise-coprime base where each element carries exponents for two
/// operands at once.
struct Base {
    items: Vec<(Arc<Poly>, [u32; 2])>,
}

impl Base {
    fn new() -> Base {
        Base { items: Vec::new() }
    }

    fn insert(&mut self, p: Arc<Poly>, e: [u32; 2]) {
        if e == [0, 0] || p.is_constant() {
            return;
        }
        for i in 0..self.items.len() {
            let f = self.items[i].0.clone();
            if same_poly(&f, &p) {
                self.items[i].1[0] += e[0];
                self.items[i].1[1] += e[1];
                return;
            }
            let g = factor_gcd(&f, &p);
            if g.is_constant() {
                continue;
            }
            let k = self.items.remove(i).1;
            let f1 = f.div_exact(&g).expect("gcd divides");
            let p1 = p.div_exact(&g).expect("gcd divides");
            self.insert(Arc::new(g), [k[0] + e[0], k[1] + e[1]]);
            self.insert(Arc::new(f1), k);
            self.insert(Arc::new(p1), e);
            return;
        }
        self.items.push((p, e));
    }

    fn from_pair(a: &[Factor], b: &[Factor]) -> Base {
        let mut base = Base::new();
        for (f, e) in a {
            base.insert(f.clone(), [*e, 0]);
        }
        for (f, e) in b {
            base.insert(f.clone(), [0, *e]);
        }
        base
    }
}

fn expand_factors<'a>(it: impl Iterator<Item = (&'a Arc<Poly>, u32)>) -> Poly {
    let mut acc = Poly::one();
    for (f, e) in it {
        if e > 0 {
            acc = &acc * &f.pow(e);
        }
    }
    acc
}

/// Divides `num` by the factors in `den[idx]` as long as possible, refining
/// non-linear factors that share only part of their content with `num`.
fn cancel(mut num: Poly, den: &mut Vec<Factor>, candidates: &[usize]) -> Poly {
    let mut todo: Vec<Arc<Poly>> = candidates.iter().map(|&i| den[i].0.clone()).collect();
    while let Some(f) = todo.pop() {
        if num.is_zero() {
            break;
        }
        let Some(pos) = den.iter().position(|(g, _)| Arc::ptr_eq(g, &f)) else {
            continue;
        };
        while den[pos].1 > 0 {
            if let Some(q) = num.div_exact(&f) {
                num = q;
                den[pos].1 -= 1;
                continue;
            }
            if is_linear(&f) {
                break;
            }
            let g = gcd(&num, &f);
            if g.is_constant() {
                break;
            }
            // Partial overlap: refine the factor and retry on the pieces.
            let e = den.remove(pos).1;
            let mut base = Base::new();
            for (h, k) in den.drain(..) {
                base.insert(h, [k, 0]);
            }
            let g = Arc::new(g);
            let rest = Arc::new(f.div_exact(&g).expect("gcd divides"));
            base.insert(g.clone(), [e, 0]);
            base.insert(rest.clone(), [e, 0]);
            den.extend(base.items.into_iter().map(|(h, k)| (h, k[0])));
            // Pieces of `f` are whatever now divides it.
            for (h, _) in den.iter() {
                if f.div_exact(h).is_some() {
                    todo.push(h.clone());
                }
            }
            break;
        }
    }
    den.retain(|(_, e)| *e > 0);
    num
}

impl Expr {
    fn from_parts(num: Poly, den_const: Int, den: Vec<Factor>) -> Expr {
        Expr(Arc::new(Inner {
            num,
            den_const,
            den,
        }))
    }

    /// Normalizes a numerator against its (already coprime-base) denominator
    /// where only integer content may be shared.
    fn finish(num: Poly, den_const: Int, mut den: Vec<Factor>) -> Expr {
        if num.is_zero() {
            return Expr::zero();
        }
        den.retain(|(_, e)| *e > 0);
        let mut num = num;
        let mut dc = den_const;
        if !dc.is_one() {
            let g = num.content().abs().gcd(&dc);
            if !g.is_one() {
                num = num.div_int_exact(&g);
                dc = dc.div_exact(&g);
            }
        }
        den.sort_by(|a, b| b.0.lm().cmp(&a.0.lm()).then(b.0.len().cmp(&a.0.len())));
        Expr::from_parts(num, dc, den)
    }

    pub fn zero() -> Expr {
        Expr::from_parts(Poly::zero(), Int::ONE, Vec::new())
    }

    pub fn one() -> Expr {
        Expr::from_int(1)
    }

    pub fn from_int(v: i64) -> Expr {
        Expr::from_parts(Poly::constant(Int::from(v)), Int::ONE, Vec::new())
    }

    pub fn from_integer(v: Int) -> Expr {
        Expr::from_parts(Poly::constant(v), Int::ONE, Vec::new())
    }

    pub fn from_rational(r: &BigRational) -> Expr {
        let n = Int::from(r.numer().clone());
        let d = Int::from(r.denom().clone());
        Expr::from_ratio(n, d)
    }

    /// `n / d` for integers, `d != 0`.
    pub fn from_ratio(n: Int, d: Int) -> Expr {
        assert!(!d.is_zero(), "zero denominator");
        let g = n.gcd(&d);
        let (mut n, mut d) = (n.div_exact(&g), d.div_exact(&g));
        if d.is_negative() {
            n = -n;
            d = -d;
        }
        Expr::from_parts(Poly::constant(n), d, Vec::new())
    }

    pub fn var(v: Var) -> Expr {
        Expr::from_poly(Poly::var(v))
    }

    pub fn from_poly(p: Poly) -> Expr {
        Expr::from_parts(p, Int::ONE, Vec::new())
    }

    /// `num / den` for arbitrary polynomials, reduced to canonical form.
    pub fn from_fraction(num: Poly, den: &Poly) -> Result<Expr, ArithError> {
        if den.is_zero() {
            return Err(ArithError::DivisionByZero);
        }
        Ok(&Expr::from_poly(num) / &Expr::from_poly(den.clone()))
    }

    #[inline]
    pub fn is_zero(&self) -> bool {
        self.0.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.0.num.is_one() && self.0.den.is_empty() && self.0.den_const.is_one()
    }

    pub fn is_constant(&self) -> bool {
        self.0.num.is_constant() && self.0.den.is_empty()
    }

    pub fn is_polynomial(&self) -> bool {
        self.0.den.is_empty()
    }

    /// The value as a rational number, if constant.
    pub fn as_rational(&self) -> Option<BigRational> {
        if !self.is_constant() {
            return None;
        }
        let n = self.0.num.constant_value().unwrap().to_bigint();
        Some(BigRational::new(n, self.0.den_const.to_bigint()))
    }

    pub fn numerator(&self) -> &Poly {
        &self.0.num
    }

    /// The expanded canonical denominator.
    pub fn denominator(&self) -> Poly {
        expand_factors(self.0.den.iter().map(|(f, e)| (f, *e))).scale(&self.0.den_const)
    }

    pub fn denominator_const(&self) -> &Int {
        &self.0.den_const
    }

    /// Denominator factors as stored (pairwise coprime, not necessarily irreducible).
    pub fn denominator_factors(&self) -> impl Iterator<Item = (&Poly, u32)> {
        self.0.den.iter().map(|(f, e)| (&**f, *e))
    }

    /// Canonical `(numerator, denominator)` pair.
    pub fn canonical(&self) -> (Poly, Poly) {
        (self.0.num.clone(), self.denominator())
    }

    pub fn support(&self) -> u32 {
        self.0
            .den
            .iter()
            .fold(self.0.num.support(), |acc, (f, _)| acc | f.support())
    }

    pub fn depends_on(&self, v: Var) -> bool {
        self.support() & (1 << v.0) != 0
    }

    /// Total size in terms, a rough cost measure.
    pub fn size(&self) -> usize {
        self.0.num.len() + self.0.den.iter().map(|(f, _)| f.len()).sum::<usize>()
    }

    pub fn scale_int(&self, c: &Int) -> Expr {
        if c.is_zero() {
            return Expr::zero();
        }
        let num = self.0.num.scale(c);
        Expr::finish(num, self.0.den_const.clone(), self.0.den.clone())
    }

    pub fn pow(&self, e: i32) -> Result<Expr, ArithError> {
        if e < 0 {
            return self.inv()?.pow(-e);
        }
        let e = e as u32;
        if e == 0 {
            return Ok(Expr::one());
        }
        if self.is_zero() {
            return Ok(Expr::zero());
        }
        Ok(Expr::from_parts(
            self.0.num.pow(e),
            self.0.den_const.pow(e),
            self.0.den.iter().map(|(f, k)| (f.clone(), k * e)).collect(),
        ))
    }

    /// Exact square root, if numerator and denominator are perfect squares.
    pub fn sqrt(&self) -> Option<Expr> {
        let (n, d) = self.canonical();
        let rn = n.sqrt()?;
        let rd = d.sqrt()?;
        Expr::from_fraction(rn, &rd).ok()
    }

    pub fn inv(&self) -> Result<Expr, ArithError> {
        Expr::one().checked_div(self)
    }

    pub fn checked_div(&self, rhs: &Expr) -> Result<Expr, ArithError> {
        if rhs.is_zero() {
            return Err(ArithError::DivisionByZero);
        }
        if self.is_zero() {
            return Ok(Expr::zero());
        }
        let a = &self.0;
        let b = &rhs.0;
        // (a.num / b.num) * (b.den / a.den)
        let g = gcd(&a.num, &b.num);
        let (an, bn) = if g.is_one() {
            (a.num.clone(), b.num.clone())
        } else {
            (
                a.num.div_exact(&g).expect("gcd divides"),
                b.num.div_exact(&g).expect("gcd divides"),
            )
        };
        let base = Base::from_pair(&a.den, &b.den);
        let mut num_factors: Vec<(Arc<Poly>, u32)> = Vec::new();
        let mut den: Vec<Factor> = Vec::new();
        for (f, [ea, eb]) in base.items {
            if eb > ea {
                num_factors.push((f, eb - ea));
            } else if ea > eb {
                den.push((f, ea - eb));
            }
        }
        let (bc, bfactors) = split_denominator(&bn);
        let mut num = &an * &expand_factors(num_factors.iter().map(|(f, e)| (f, *e)));
        // Sign of the new denominator content moves to the numerator.
        let mut num_int = b.den_const.clone();
        let mut den_int = &a.den_const * &bc.abs();
        if bc.is_negative() {
            num_int = -num_int;
        }
        let g = num_int.gcd(&den_int);
        num_int = num_int.div_exact(&g);
        den_int = den_int.div_exact(&g);
        num = num.scale(&num_int);
        if bfactors.is_empty() {
            return Ok(Expr::finish(num, den_int, den));
        }
        let mut merged = Base::new();
        for (f, e) in den {
            merged.insert(f, [e, 0]);
        }
        for (f, e) in bfactors {
            merged.insert(f, [e, 0]);
        }
        let den: Vec<Factor> = merged.items.into_iter().map(|(f, e)| (f, e[0])).collect();
        Ok(Expr::finish(num, den_int, den))
    }

    /// Partial derivative with respect to `v`.
    pub fn diff(&self, v: Var) -> Expr {
        if !self.depends_on(v) {
            return Expr::zero();
        }
        let inner = &self.0;
        let dep: Vec<usize> = (0..inner.den.len())
            .filter(|&i| inner.den[i].0.degree_in(v) > 0)
            .collect();
        if dep.is_empty() {
            let mut den = inner.den.clone();
            let all: Vec<usize> = (0..den.len()).collect();
            let num = cancel(inner.num.diff(v), &mut den, &all);
            return Expr::finish(num, inner.den_const.clone(), den);
        }
        // d(N / prod f^e) = (N' * P - N * sum e_i f_i' P / f_i) / (prod f^e * P), P = prod_{dep} f_i
        let p: Poly = expand_factors(dep.iter().map(|&i| (&inner.den[i].0, 1)));
        let mut num = &inner.num.diff(v) * &p;
        for &i in &dep {
            let (f, e) = &inner.den[i];
            let others = expand_factors(
                dep.iter()
                    .filter(|&&j| j != i)
                    .map(|&j| (&inner.den[j].0, 1)),
            );
            let t = &(&f.diff(v) * &others).scale(&Int::from(*e as i64)) * &inner.num;
            num = &num - &t;
        }
        let mut den = inner.den.clone();
        for &i in &dep {
            den[i].1 += 1;
        }
        // Factors free of `v` can divide the new numerator too.
        let all: Vec<usize> = (0..den.len()).collect();
        let num = cancel(num, &mut den, &all);
        Expr::finish(num, inner.den_const.clone(), den)
    }

    /// Exact evaluation at a rational point (indexed by variable).
    pub fn eval(&self, point: &[BigRational]) -> Result<BigRational, ArithError> {
        let mut d = BigRational::from_integer(self.0.den_const.to_bigint());
        for (f, e) in &self.0.den {
            let v = f.eval_rational(point);
            if v.is_zero() {
                return Err(ArithError::Pole);
            }
            d *= num_traits::pow(v, *e as usize);
        }
        Ok(self.0.num.eval_rational(point) / d)
    }

    /// Substitutes expressions for variables (simultaneously).
    pub fn substitute(&self, map: &[(Var, Expr)]) -> Result<Expr, ArithError> {
        let mut mask = 0u32;
        for (v, _) in map {
            mask |= 1 << v.0;
        }
        if self.support() & mask == 0 {
            return Ok(self.clone());
        }
        let num = subs_poly(&self.0.num, map);
        let mut den = Expr::from_integer(self.0.den_const.clone());
        for (f, e) in &self.0.den {
            let fv = subs_poly(f, map);
            den = &den * &fv.pow(*e as i32)?;
        }
        num.checked_div(&den)
    }
}

/// Evaluates a polynomial at expression values, grouping terms by shared
/// powers of the substituted variables.
fn subs_poly(p: &Poly, map: &[(Var, Expr)]) -> Expr {
    let mut powers: Vec<Vec<Expr>> = Vec::with_capacity(map.len());
    for (v, e) in map {
        let maxe = p.degree_in(*v) as usize;
        let mut pw = vec![Expr::one()];
        for k in 1..=maxe {
            let next = &pw[k - 1] * e;
            pw.push(next);
        }
        powers.push(pw);
    }
    // Group by the substituted part of the monomial.
    let mut groups: std::collections::BTreeMap<Vec<u8>, Vec<(Monomial, Int)>> = Default::default();
    for (m, c) in p.terms() {
        let key: Vec<u8> = map.iter().map(|(v, _)| m.exp(*v)).collect();
        let mut rest = *m;
        for (v, _) in map {
            rest = rest.with_exp(*v, 0);
        }
        groups.entry(key).or_default().push((rest, c.clone()));
    }
    let mut acc = Expr::zero();
    for (key, terms) in groups {
        let mut t = Expr::from_poly(Poly::from_terms(terms));
        for (i, &k) in key.iter().enumerate() {
            if k > 0 {
                t = &t * &powers[i][k as usize];
            }
        }
        acc = &acc + &t;
    }
    acc
}

impl Default for Expr {
    fn default() -> Expr {
        Expr::zero()
    }
}

impl PartialEq for Expr {
    fn eq(&self, other: &Expr) -> bool {
        if Arc::ptr_eq(&self.0, &other.0) {
            return true;
        }
        if self.0.num != other.0.num || self.0.den_const != other.0.den_const {
            return false;
        }
        if self.0.den.len() == other.0.den.len()
            && self
                .0
                .den
                .iter()
                .zip(other.0.den.iter())
                .all(|(a, b)| a.1 == b.1 && same_poly(&a.0, &b.0))
        {
            return true;
        }
        self.denominator() == other.denominator()
    }
}

impl Eq for Expr {}

impl<'a> Add<&'a Expr> for &'a Expr {
    type Output = Expr;
    fn add(self, rhs: &Expr) -> Expr {
        add_sub(self, rhs, false)
    }
}

impl<'a> Sub<&'a Expr> for &'a Expr {
    type Output = Expr;
    fn sub(self, rhs: &Expr) -> Expr {
        add_sub(self, rhs, true)
    }
}

fn add_sub(a: &Expr, b: &Expr, negate: bool) -> Expr {
    if b.is_zero() {
        return a.clone();
    }
    if a.is_zero() {
        return if negate { -b } else { b.clone() };
    }
    let (x, y) = (&a.0, &b.0);
    let combine = |p: &Poly, q: &Poly| if negate { p - q } else { p + q };
    let same_den = x.den.len() == y.den.len()
        && x
            .den
            .iter()
            .zip(y.den.iter())
            .all(|(f, g)| f.1 == g.1 && same_poly(&f.0, &g.0));
    if same_den {
        let lc = lcm_int(&x.den_const, &y.den_const);
        let n1 = x.num.scale(&lc.div_exact(&x.den_const));
        let n2 = y.num.scale(&lc.div_exact(&y.den_const));
        let num = combine(&n1, &n2);
        let mut den = x.den.clone();
        let all: Vec<usize> = (0..den.len()).collect();
        let num = cancel(num, &mut den, &all);
        return Expr::finish(num, lc, den);
    }
    let base = Base::from_pair(&x.den, &y.den);
    let lc = lcm_int(&x.den_const, &y.den_const);
    let mut mult_x = Vec::new();
    let mut mult_y = Vec::new();
    let mut den = Vec::with_capacity(base.items.len());
    let mut common = Vec::new();
    for (i, (f, [ea, eb])) in base.items.into_iter().enumerate() {
        let m = ea.max(eb);
        if m > ea {
            mult_x.push((f.clone(), m - ea));
        }
        if m > eb {
            mult_y.push((f.clone(), m - eb));
        }
        if ea > 0 && eb > 0 {
            common.push(i);
        }
        den.push((f, m));
    }
    let px = expand_factors(mult_x.iter().map(|(f, e)| (f, *e))).scale(&lc.div_exact(&x.den_const));
    let py = expand_factors(mult_y.iter().map(|(f, e)| (f, *e))).scale(&lc.div_exact(&y.den_const));
    let num = combine(&(&x.num * &px), &(&y.num * &py));
    let num = if common.is_empty() {
        num
    } else {
        cancel(num, &mut den, &common)
    };
    Expr::finish(num, lc, den)
}

fn lcm_int(a: &Int, b: &Int) -> Int {
    if a == b {
        return a.clone();
    }
    let g = a.gcd(b);
    &a.div_exact(&g) * b
}

impl<'a> Mul<&'a Expr> for &'a Expr {
    type Output = Expr;
    fn mul(self, rhs: &Expr) -> Expr {
        if self.is_zero() || rhs.is_zero() {
            return Expr::zero();
        }
        if self.is_one() {
            return rhs.clone();
        }
        if rhs.is_one() {
            return self.clone();
        }
        let (x, y) = (&self.0, &rhs.0);
        // Cross-cancel each numerator against the other denominator.
        let mut yden = y.den.clone();
        let all_y: Vec<usize> = (0..yden.len()).collect();
        let xn = cancel(x.num.clone(), &mut yden, &all_y);
        let mut xden = x.den.clone();
        let all_x: Vec<usize> = (0..xden.len()).collect();
        let yn = cancel(y.num.clone(), &mut xden, &all_x);
        // Integer parts.
        let g1 = xn.content().abs().gcd(&y.den_const);
        let g2 = yn.content().abs().gcd(&x.den_const);
        let xn = xn.div_int_exact(&g1);
        let yn = yn.div_int_exact(&g2);
        let dc = &x.den_const.div_exact(&g2) * &y.den_const.div_exact(&g1);
        let num = &xn * &yn;
        let base = Base::from_pair(&xden, &yden);
        let den = base
            .items
            .into_iter()
            .map(|(f, [a, b])| (f, a + b))
            .collect();
        Expr::finish(num, dc, den)
    }
}

impl<'a> Div<&'a Expr> for &'a Expr {
    type Output = Expr;
    /// Panics on division by zero; use [`Expr::checked_div`] to handle it.
    fn div(self, rhs: &Expr) -> Expr {
        self.checked_div(rhs).expect("division by zero")
    }
}

impl Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        if self.is_zero() {
            return self.clone();
        }
        Expr::from_parts(-&self.0.num, self.0.den_const.clone(), self.0.den.clone())
    }
}

impl Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        -&self
    }
}

macro_rules! owned_binop {
    ($tr:ident, $f:ident) => {
        impl $tr for Expr {
            type Output = Expr;
            fn $f(self, rhs: Expr) -> Expr {
                (&self).$f(&rhs)
            }
        }
        impl<'a> $tr<&'a Expr> for Expr {
            type Output = Expr;
            fn $f(self, rhs: &Expr) -> Expr {
                (&self).$f(rhs)
            }
        }
    };
}
owned_binop!(Add, add);
owned_binop!(Sub, sub);
owned_binop!(Mul, mul);
owned_binop!(Div, div);

impl std::iter::Sum for Expr {
    fn sum<I: Iterator<Item = Expr>>(iter: I) -> Expr {
        iter.fold(Expr::zero(), |a, b| &a + &b)
    }
}

impl From<i64> for Expr {
    fn from(v: i64) -> Expr {
        Expr::from_int(v)
    }
}

impl From<Poly> for Expr {
    fn from(p: Poly) -> Expr {
        Expr::from_poly(p)
    }
}

impl Zero for Expr {
    fn zero() -> Expr {
        Expr::zero()
    }
    fn is_zero(&self) -> bool {
        Expr::is_zero(self)
    }
}

impl One for Expr {
    fn one() -> Expr {
        Expr::one()
    }
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:?})/({}", self.0.num, self.0.den_const)?;
        for (p, e) in &self.0.den {
            write!(f, " * ({p:?})^{e}")?;
        }
        write!(f, ")")
    }
}

/// Convenience for tests and fixtures: rational constant `n/d`.
pub fn ratio(n: i64, d: i64) -> Expr {
    Expr::from_ratio(Int::from(n), Int::from(d))
}

/// Convenience: integer-valued rational point entry.
pub fn big_rational(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}
