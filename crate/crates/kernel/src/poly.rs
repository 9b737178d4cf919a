//! Sparse multivariate polynomials with integer coefficients.
//!
//! Terms are kept sorted in strictly decreasing graded-lexicographic order
//! (total degree first, ties broken lexicographically with variable 0 the
//! most significant), so the leading term is always `terms[0]`.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_rational::BigRational;
use num_traits::{One, Zero};
use rustc_hash::FxHashMap;

use crate::int::Int;

/// Maximum number of field symbols a single workspace may declare.
pub const MAX_VARS: usize = 16;

/// Index of a field symbol inside a [`crate::Workspace`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var(pub u8);

impl Var {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Exponent vector with cached total degree. The derived ordering is grlex.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Monomial {
    deg: u16,
    exps: [u8; MAX_VARS],
}

impl Monomial {
    pub fn one() -> Monomial {
        Monomial::default()
    }

    pub fn var(v: Var, e: u8) -> Monomial {
        let mut m = Monomial::one();
        m.exps[v.index()] = e;
        m.deg = e as u16;
        m
    }

    #[inline]
    pub fn exp(&self, v: Var) -> u8 {
        self.exps[v.index()]
    }

    #[inline]
    pub fn degree(&self) -> u16 {
        self.deg
    }

    pub fn is_one(&self) -> bool {
        self.deg == 0
    }

    pub fn exps(&self) -> &[u8; MAX_VARS] {
        &self.exps
    }

    pub fn with_exp(mut self, v: Var, e: u8) -> Monomial {
        let old = self.exps[v.index()];
        self.exps[v.index()] = e;
        self.deg = self.deg - old as u16 + e as u16;
        self
    }

    #[inline]
    pub fn mul(&self, o: &Monomial) -> Monomial {
        let mut exps = [0u8; MAX_VARS];
        for i in 0..MAX_VARS {
            exps[i] = self.exps[i]
                .checked_add(o.exps[i])
                .expect("exponent overflow (max 255 per variable)");
        }
        Monomial {
            deg: self.deg + o.deg,
            exps,
        }
    }

    #[inline]
    pub fn div(&self, o: &Monomial) -> Option<Monomial> {
        if o.deg > self.deg {
            return None;
        }
        let mut exps = [0u8; MAX_VARS];
        for i in 0..MAX_VARS {
            exps[i] = self.exps[i].checked_sub(o.exps[i])?;
        }
        Some(Monomial {
            deg: self.deg - o.deg,
            exps,
        })
    }

    pub fn gcd(&self, o: &Monomial) -> Monomial {
        let mut exps = [0u8; MAX_VARS];
        let mut deg = 0;
        for i in 0..MAX_VARS {
            exps[i] = self.exps[i].min(o.exps[i]);
            deg += exps[i] as u16;
        }
        Monomial { deg, exps }
    }

    /// Bitmask of the variables with nonzero exponent.
    pub fn support(&self) -> u32 {
        let mut mask = 0;
        for i in 0..MAX_VARS {
            if self.exps[i] != 0 {
                mask |= 1 << i;
            }
        }
        mask
    }
}

impl fmt::Debug for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = (0..MAX_VARS)
            .filter(|&i| self.exps[i] != 0)
            .map(|i| format!("x{i}^{}", self.exps[i]))
            .collect();
        if parts.is_empty() {
            write!(f, "1")
        } else {
            write!(f, "{}", parts.join("*"))
        }
    }
}

/// A polynomial in `Z[x_0, ..., x_15]`.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Poly {
    terms: Vec<(Monomial, Int)>,
}

impl Poly {
    pub fn zero() -> Poly {
        Poly { terms: Vec::new() }
    }

    pub fn one() -> Poly {
        Poly::constant(Int::ONE)
    }

    pub fn constant(c: Int) -> Poly {
        if c.is_zero() {
            Poly::zero()
        } else {
            Poly {
                terms: vec![(Monomial::one(), c)],
            }
        }
    }

    pub fn var(v: Var) -> Poly {
        Poly {
            terms: vec![(Monomial::var(v, 1), Int::ONE)],
        }
    }

    pub fn monomial(m: Monomial, c: Int) -> Poly {
        if c.is_zero() {
            Poly::zero()
        } else {
            Poly { terms: vec![(m, c)] }
        }
    }

    /// Builds a polynomial from terms in any order, combining duplicates.
    pub fn from_terms(mut terms: Vec<(Monomial, Int)>) -> Poly {
        terms.sort_unstable_by_key(|t| std::cmp::Reverse(t.0));
        let mut out: Vec<(Monomial, Int)> = Vec::with_capacity(terms.len());
        for (m, c) in terms {
            match out.last_mut() {
                Some(last) if last.0 == m => last.1 = &last.1 + &c,
                _ => out.push((m, c)),
            }
        }
        out.retain(|(_, c)| !c.is_zero());
        Poly { terms: out }
    }

    /// Wraps terms already in strictly decreasing order with nonzero coefficients.
    pub(crate) fn from_sorted(terms: Vec<(Monomial, Int)>) -> Poly {
        debug_assert!(terms.windows(2).all(|w| w[0].0 > w[1].0));
        debug_assert!(terms.iter().all(|(_, c)| !c.is_zero()));
        Poly { terms }
    }

    pub fn terms(&self) -> &[(Monomial, Int)] {
        &self.terms
    }

    pub fn into_terms(self) -> Vec<(Monomial, Int)> {
        self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.terms[0].0.is_one() && self.terms[0].1.is_one()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.is_empty() || (self.terms.len() == 1 && self.terms[0].0.is_one())
    }

    pub fn constant_value(&self) -> Option<Int> {
        match self.terms.as_slice() {
            [] => Some(Int::ZERO),
            [(m, c)] if m.is_one() => Some(c.clone()),
            _ => None,
        }
    }

    pub fn lm(&self) -> Option<&Monomial> {
        self.terms.first().map(|t| &t.0)
    }

    pub fn lc(&self) -> Int {
        self.terms.first().map(|t| t.1.clone()).unwrap_or(Int::ZERO)
    }

    pub fn total_degree(&self) -> u16 {
        self.terms.first().map(|t| t.0.degree()).unwrap_or(0)
    }

    pub fn degree_in(&self, v: Var) -> u8 {
        self.terms.iter().map(|(m, _)| m.exp(v)).max().unwrap_or(0)
    }

    /// Bitmask of variables that occur.
    pub fn support(&self) -> u32 {
        self.terms.iter().fold(0, |acc, (m, _)| acc | m.support())
    }

    pub fn max_norm(&self) -> Int {
        self.terms
            .iter()
            .map(|(_, c)| c.abs())
            .max()
            .unwrap_or(Int::ZERO)
    }

    /// Gcd of the coefficients, carrying the sign of the leading coefficient.
    pub fn content(&self) -> Int {
        let mut g = Int::ZERO;
        for (_, c) in &self.terms {
            g = g.gcd(c);
            if g.is_one() {
                break;
            }
        }
        if self.lc().is_negative() {
            -g
        } else {
            g
        }
    }

    /// Splits into content and primitive part with positive leading coefficient.
    pub fn primitive(&self) -> (Int, Poly) {
        if self.is_zero() {
            return (Int::ZERO, Poly::zero());
        }
        let c = self.content();
        if c.is_one() {
            return (c, self.clone());
        }
        (c.clone(), self.div_int_exact(&c))
    }

    pub fn scale(&self, c: &Int) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        if c.is_one() {
            return self.clone();
        }
        Poly {
            terms: self.terms.iter().map(|(m, a)| (*m, a * c)).collect(),
        }
    }

    pub fn div_int_exact(&self, c: &Int) -> Poly {
        Poly {
            terms: self
                .terms
                .iter()
                .map(|(m, a)| (*m, a.div_exact(c)))
                .collect(),
        }
    }

    pub fn mul_monomial(&self, m: &Monomial, c: &Int) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly {
            terms: self.terms.iter().map(|(n, a)| (n.mul(m), a * c)).collect(),
        }
    }

    /// Gcd of all monomials (the largest monomial dividing every term).
    pub fn monomial_content(&self) -> Monomial {
        let mut it = self.terms.iter();
        let Some((first, _)) = it.next() else {
            return Monomial::one();
        };
        let mut g = *first;
        for (m, _) in it {
            g = g.gcd(m);
            if g.is_one() {
                break;
            }
        }
        g
    }

    pub fn div_monomial(&self, m: &Monomial) -> Poly {
        Poly {
            terms: self
                .terms
                .iter()
                .map(|(n, a)| (n.div(m).expect("monomial does not divide"), a.clone()))
                .collect(),
        }
    }

    pub fn pow(&self, e: u32) -> Poly {
        let mut result = Poly::one();
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                result = &result * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        result
    }

    /// Exact square root with positive leading coefficient, if one exists.
    pub fn sqrt(&self) -> Option<Poly> {
        if self.is_zero() {
            return Some(Poly::zero());
        }
        let (c, prim) = self.primitive();
        if c.is_negative() {
            return None;
        }
        let rc = c.isqrt();
        if (&rc * &rc) != c {
            return None;
        }
        let (m0, c0) = &prim.terms[0];
        if c0.is_negative() || m0.exps().iter().any(|e| e % 2 == 1) {
            return None;
        }
        let r0 = c0.isqrt();
        if &(&r0 * &r0) != c0 {
            return None;
        }
        let mut half = Monomial::one();
        for (j, &e) in m0.exps().iter().enumerate() {
            half = half.with_exp(Var(j as u8), e / 2);
        }
        let two_lead = &r0 * &Int::from(2);
        let mut root = Poly::monomial(half, r0);
        for _ in 0..=prim.len() * prim.len() + 8 {
            let rem = &prim - &(&root * &root);
            if rem.is_zero() {
                return Some(root.scale(&rc));
            }
            let (m, c) = &rem.terms[0];
            let tm = m.div(&half)?;
            if tm >= half {
                return None;
            }
            let tc = c.checked_div(&two_lead)?;
            root = &root + &Poly::monomial(tm, tc);
        }
        None
    }

    pub fn diff(&self, v: Var) -> Poly {
        let mut terms = Vec::new();
        for (m, c) in &self.terms {
            let e = m.exp(v);
            if e > 0 {
                terms.push((m.with_exp(v, e - 1), c * &Int::from(e as i64)));
            }
        }
        // Lowering one exponent keeps grlex order strictly decreasing.
        Poly::from_sorted(terms)
    }

    /// Substitutes the integer `x` for variable `v`.
    pub fn eval_int(&self, v: Var, x: &Int) -> Poly {
        let maxe = self.degree_in(v) as usize;
        let mut powers = Vec::with_capacity(maxe + 1);
        powers.push(Int::ONE);
        for i in 1..=maxe {
            let p = &powers[i - 1] * x;
            powers.push(p);
        }
        Poly::from_terms(
            self.terms
                .iter()
                .map(|(m, c)| (m.with_exp(v, 0), c * &powers[m.exp(v) as usize]))
                .collect(),
        )
    }

    /// Exact evaluation at a rational point indexed by variable.
    pub fn eval_rational(&self, point: &[BigRational]) -> BigRational {
        let mut acc = BigRational::zero();
        for (m, c) in &self.terms {
            let mut t = BigRational::from_integer(c.to_bigint());
            for (i, &e) in m.exps().iter().enumerate() {
                if e > 0 {
                    t *= num_traits::pow(point[i].clone(), e as usize);
                }
            }
            acc += t;
        }
        acc
    }

    /// Coefficients as a polynomial in `v`; index `k` holds the coefficient of `v^k`.
    pub fn to_univariate(&self, v: Var) -> Vec<Poly> {
        let n = self.degree_in(v) as usize + 1;
        let mut buckets: Vec<Vec<(Monomial, Int)>> = vec![Vec::new(); n];
        for (m, c) in &self.terms {
            buckets[m.exp(v) as usize].push((m.with_exp(v, 0), c.clone()));
        }
        buckets.into_iter().map(Poly::from_terms).collect()
    }

    pub fn from_univariate(v: Var, coeffs: &[Poly]) -> Poly {
        let mut terms = Vec::new();
        for (k, c) in coeffs.iter().enumerate() {
            for (m, a) in c.terms() {
                debug_assert_eq!(m.exp(v), 0);
                terms.push((m.with_exp(v, k as u8), a.clone()));
            }
        }
        Poly::from_terms(terms)
    }

    /// Exact division. Returns `None` when `d` does not divide `self`.
    pub fn div_exact(&self, d: &Poly) -> Option<Poly> {
        assert!(!d.is_zero(), "division by zero polynomial");
        if self.is_zero() {
            return Some(Poly::zero());
        }
        if let Some(c) = d.constant_value() {
            let terms: Option<Vec<_>> = self
                .terms
                .iter()
                .map(|(m, a)| a.checked_div(&c).map(|q| (*m, q)))
                .collect();
            return terms.map(Poly::from_sorted);
        }
        if d.len() == 1 {
            let (dm, dc) = &d.terms[0];
            let mut terms = Vec::with_capacity(self.len());
            for (m, a) in &self.terms {
                terms.push((m.div(dm)?, a.checked_div(dc)?));
            }
            return Some(Poly::from_sorted(terms));
        }
        // Cheap necessary conditions before the real division.
        let (dm, dc) = (&d.terms[0].0, &d.terms[0].1);
        self.terms[0].0.div(dm)?;
        for i in 0..MAX_VARS {
            let v = Var(i as u8);
            let dd = d.terms.iter().map(|(m, _)| m.exp(v)).max().unwrap_or(0);
            if dd > 0 && self.degree_in(v) < dd {
                return None;
            }
        }
        // The last (smallest) term must divide too.
        let (sm, sc) = self.terms.last().unwrap();
        let (tm, tc) = d.terms.last().unwrap();
        sm.div(tm)?;
        sc.checked_div(tc)?;

        let mut rem: BTreeMap<Monomial, Int> = self.terms.iter().cloned().collect();
        let mut quot: Vec<(Monomial, Int)> = Vec::new();
        while let Some((m, c)) = rem.pop_last() {
            let qm = m.div(dm)?;
            let qc = c.checked_div(dc)?;
            for (tm, tc) in &d.terms[1..] {
                let pm = tm.mul(&qm);
                let prod = tc * &qc;
                match rem.entry(pm) {
                    std::collections::btree_map::Entry::Occupied(mut o) => {
                        let nv = o.get() - &prod;
                        if nv.is_zero() {
                            o.remove();
                        } else {
                            *o.get_mut() = nv;
                        }
                    }
                    std::collections::btree_map::Entry::Vacant(vac) => {
                        vac.insert(-&prod);
                    }
                }
            }
            quot.push((qm, qc));
        }
        Some(Poly::from_sorted(quot))
    }

    /// Pseudo-remainder of `self` by `d`, both viewed as univariate in `v`.
    pub fn pseudo_rem(&self, d: &Poly, v: Var) -> Poly {
        let dd = d.degree_in(v) as usize;
        let dcoef = d.to_univariate(v);
        let lcd = dcoef[dd].clone();
        let mut r = self.to_univariate(v);
        while r.len() > dd && !r.is_empty() {
            let k = r.len() - 1;
            let lcr = r[k].clone();
            if lcr.is_zero() {
                r.pop();
                continue;
            }
            let shift = k - dd;
            for c in r.iter_mut() {
                *c = &*c * &lcd;
            }
            for (i, dc) in dcoef.iter().enumerate() {
                let t = dc * &lcr;
                r[i + shift] = &r[i + shift] - &t;
            }
            debug_assert!(r[k].is_zero());
            r.pop();
            while r.last().is_some_and(|c| c.is_zero()) {
                r.pop();
            }
        }
        Poly::from_univariate(v, &r)
    }
}

fn merge(a: &[(Monomial, Int)], b: &[(Monomial, Int)], negate_b: bool) -> Poly {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            Ordering::Greater => {
                out.push(a[i].clone());
                i += 1;
            }
            Ordering::Less => {
                let c = if negate_b { -&b[j].1 } else { b[j].1.clone() };
                out.push((b[j].0, c));
                j += 1;
            }
            Ordering::Equal => {
                let c = if negate_b {
                    &a[i].1 - &b[j].1
                } else {
                    &a[i].1 + &b[j].1
                };
                if !c.is_zero() {
                    out.push((a[i].0, c));
                }
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    for t in &b[j..] {
        let c = if negate_b { -&t.1 } else { t.1.clone() };
        out.push((t.0, c));
    }
    Poly { terms: out }
}

impl<'a> Add<&'a Poly> for &'a Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        merge(&self.terms, &rhs.terms, false)
    }
}

impl<'a> Sub<&'a Poly> for &'a Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        merge(&self.terms, &rhs.terms, true)
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly {
            terms: self.terms.iter().map(|(m, c)| (*m, -c)).collect(),
        }
    }
}

impl<'a> Mul<&'a Poly> for &'a Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        if self.is_zero() || rhs.is_zero() {
            return Poly::zero();
        }
        let (small, big) = if self.len() <= rhs.len() {
            (self, rhs)
        } else {
            (rhs, self)
        };
        if small.len() == 1 {
            let (m, c) = &small.terms[0];
            return big.mul_monomial(m, c);
        }
        if small.len() * big.len() <= 256 {
            let mut terms = Vec::with_capacity(small.len() * big.len());
            for (m1, c1) in &small.terms {
                for (m2, c2) in &big.terms {
                    terms.push((m1.mul(m2), c1 * c2));
                }
            }
            return Poly::from_terms(terms);
        }
        let mut acc: FxHashMap<Monomial, Int> =
            FxHashMap::with_capacity_and_hasher(big.len() * 2, Default::default());
        for (m1, c1) in &small.terms {
            for (m2, c2) in &big.terms {
                let m = m1.mul(m2);
                let p = c1 * c2;
                match acc.entry(m) {
                    std::collections::hash_map::Entry::Occupied(mut o) => {
                        let v = o.get_mut();
                        *v = &*v + &p;
                    }
                    std::collections::hash_map::Entry::Vacant(v) => {
                        v.insert(p);
                    }
                }
            }
        }
        let mut terms: Vec<(Monomial, Int)> =
            acc.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        terms.sort_unstable_by_key(|t| std::cmp::Reverse(t.0));
        Poly { terms }
    }
}

impl Add for Poly {
    type Output = Poly;
    fn add(self, rhs: Poly) -> Poly {
        &self + &rhs
    }
}

impl Sub for Poly {
    type Output = Poly;
    fn sub(self, rhs: Poly) -> Poly {
        &self - &rhs
    }
}

impl Mul for Poly {
    type Output = Poly;
    fn mul(self, rhs: Poly) -> Poly {
        &self * &rhs
    }
}

impl Neg for Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        -&self
    }
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(m, c)| format!("{c}*{m:?}"))
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

impl One for Poly {
    fn one() -> Poly {
        Poly::one()
    }
}

impl Zero for Poly {
    fn zero() -> Poly {
        Poly::zero()
    }
    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x(i: u8) -> Poly {
        Poly::var(Var(i))
    }

    #[test]
    fn grlex_leading_term() {
        // x0 + x1^2: the degree-2 term leads.
        let p = &x(0) + &(&x(1) * &x(1));
        assert_eq!(p.lm().unwrap().exp(Var(1)), 2);
        // x0*x1 vs x1^2 at equal degree: x0 is more significant.
        let q = &(&x(0) * &x(1)) + &(&x(1) * &x(1));
        assert_eq!(q.lm().unwrap().exp(Var(0)), 1);
    }

    #[test]
    fn exact_division() {
        let a = &x(0) - &x(1);
        let b = &x(0) + &x(1);
        let p = &a * &b;
        assert_eq!(p.div_exact(&a).unwrap(), b);
        assert!(p.div_exact(&(&x(0) + &x(2))).is_none());
        let c = Poly::constant(Int::from(3));
        assert!(p.div_exact(&c).is_none());
        assert_eq!(p.scale(&Int::from(3)).div_exact(&c).unwrap(), p);
    }

    #[test]
    fn pseudo_remainder_vanishes_on_multiples() {
        let a = &(&x(0) * &x(0)) + &x(1);
        let b = &(&x(1) * &x(0)) - &Poly::one();
        let p = &a * &b;
        assert!(p.pseudo_rem(&b, Var(0)).is_zero());
    }

    #[test]
    fn univariate_round_trip() {
        let p = &(&(&x(0) * &x(0)) * &x(1)) + &(&x(2) - &Poly::constant(Int::from(4)));
        let u = p.to_univariate(Var(0));
        assert_eq!(u.len(), 3);
        assert_eq!(Poly::from_univariate(Var(0), &u), p);
    }
}
