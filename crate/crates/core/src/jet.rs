//! Differential polynomials on the jet space of a hydrodynamic-type system.
//!
//! Dependent variables are addressed through a [`Frame`]: order-0 values live
//! in the coefficient field (`Expr`), while every x-derivative of order at
//! least one is a jet variable. In potential coordinates `b^i_x = u^i` the
//! same data reads `b^i_xx = U(i, 1)`, so no separate potential variables are
//! introduced.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use hydroham_kernel::{Algebra, ArithError, BigRational, Expr, Var, Workspace};
use num_traits::Zero;
use thiserror::Error;

use crate::par;

/// Jet coordinate. Derived order: `U` before `P` before `R`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum JetVar {
    /// `k`-th x-derivative (`k >= 1`) of field `i`.
    U(u8, u8),
    /// `k`-th x-derivative (`k >= 0`) of covector `p_i`.
    P(u8, u8),
    /// Nonlocal potential `r_alpha`.
    R(u8),
}

/// Sorted product of jet variables with positive exponents.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct JetMono(Vec<(JetVar, u16)>);

impl JetMono {
    pub fn one() -> JetMono {
        JetMono(Vec::new())
    }

    pub fn var(v: JetVar) -> JetMono {
        JetMono(vec![(v, 1)])
    }

    pub fn from_factors(mut f: Vec<(JetVar, u16)>) -> JetMono {
        f.sort();
        let mut out: Vec<(JetVar, u16)> = Vec::with_capacity(f.len());
        for (v, e) in f {
            if e == 0 {
                continue;
            }
            match out.last_mut() {
                Some(last) if last.0 == v => last.1 += e,
                _ => out.push((v, e)),
            }
        }
        JetMono(out)
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn factors(&self) -> &[(JetVar, u16)] {
        &self.0
    }

    pub fn exp(&self, v: JetVar) -> u16 {
        self.0
            .iter()
            .find(|(w, _)| *w == v)
            .map(|(_, e)| *e)
            .unwrap_or(0)
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|(_, e)| *e as u32).sum()
    }

    pub fn mul(&self, o: &JetMono) -> JetMono {
        let mut f = self.0.clone();
        f.extend_from_slice(&o.0);
        JetMono::from_factors(f)
    }

    /// `self / v`, assuming `v` divides.
    fn without_one(&self, v: JetVar) -> JetMono {
        let mut f = self.0.clone();
        let pos = f.iter().position(|(w, _)| *w == v).expect("divides");
        if f[pos].1 == 1 {
            f.remove(pos);
        } else {
            f[pos].1 -= 1;
        }
        JetMono(f)
    }

    /// Weight under `deg u = 0`, `deg d/dx = 1` (covectors and potentials weigh 0).
    pub fn x_weight(&self) -> u32 {
        self.0
            .iter()
            .map(|(v, e)| match v {
                JetVar::U(_, k) | JetVar::P(_, k) => *k as u32 * *e as u32,
                JetVar::R(_) => 0,
            })
            .sum()
    }
}

/// Polynomial in jet variables with rational-function coefficients.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct JetExpr {
    terms: BTreeMap<JetMono, Expr>,
}

impl JetExpr {
    pub fn zero() -> JetExpr {
        JetExpr::default()
    }

    pub fn constant(c: Expr) -> JetExpr {
        JetExpr::term(JetMono::one(), c)
    }

    pub fn var(v: JetVar) -> JetExpr {
        JetExpr::term(JetMono::var(v), Expr::one())
    }

    pub fn term(m: JetMono, c: Expr) -> JetExpr {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        JetExpr { terms }
    }

    /// `u^i_x`, i.e. `b^i_xx` in potential coordinates.
    pub fn ux(i: usize) -> JetExpr {
        JetExpr::var(JetVar::U(i as u8, 1))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&JetMono, &Expr)> {
        self.terms.iter()
    }

    pub fn coeff(&self, m: &JetMono) -> Expr {
        self.terms.get(m).cloned().unwrap_or_else(Expr::zero)
    }

    /// The coefficient if no jet variable occurs.
    pub fn as_scalar(&self) -> Option<Expr> {
        match self.terms.len() {
            0 => Some(Expr::zero()),
            1 => self.terms.get(&JetMono::one()).cloned(),
            _ => None,
        }
    }

    pub fn add_term(&mut self, m: JetMono, c: &Expr) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(old) => {
                let v = &*old + c;
                if v.is_zero() {
                    self.terms.remove(&m);
                } else {
                    *old = v;
                }
            }
            None => {
                self.terms.insert(m, c.clone());
            }
        }
    }

    pub fn add_assign(&mut self, o: &JetExpr) {
        for (m, c) in &o.terms {
            self.add_term(m.clone(), c);
        }
    }

    pub fn add_scaled(&mut self, o: &JetExpr, s: &Expr) {
        if s.is_zero() {
            return;
        }
        for (m, c) in &o.terms {
            self.add_term(m.clone(), &(c * s));
        }
    }

    pub fn scale(&self, s: &Expr) -> JetExpr {
        if s.is_zero() {
            return JetExpr::zero();
        }
        JetExpr {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c * s)).collect(),
        }
    }

    pub fn mul_mono(&self, m: &JetMono) -> JetExpr {
        JetExpr {
            terms: self.terms.iter().map(|(k, c)| (k.mul(m), c.clone())).collect(),
        }
    }

    pub fn map_coeffs(&self, f: impl Fn(&Expr) -> Expr) -> JetExpr {
        let mut out = JetExpr::zero();
        for (m, c) in &self.terms {
            out.add_term(m.clone(), &f(c));
        }
        out
    }

    pub fn try_map_coeffs<E>(&self, f: impl Fn(&Expr) -> Result<Expr, E>) -> Result<JetExpr, E> {
        let mut out = JetExpr::zero();
        for (m, c) in &self.terms {
            out.add_term(m.clone(), &f(c)?);
        }
        Ok(out)
    }

    /// Partial derivative with respect to a jet variable.
    pub fn partial_jet(&self, v: JetVar) -> JetExpr {
        let mut out = JetExpr::zero();
        for (m, c) in &self.terms {
            let e = m.exp(v);
            if e > 0 {
                out.add_term(m.without_one(v), &c.scale_int(&(e as i64).into()));
            }
        }
        out
    }

    /// Highest x-derivative order of a field variable present.
    pub fn max_order(&self) -> u8 {
        self.terms
            .keys()
            .flat_map(|m| m.0.iter())
            .filter_map(|(v, _)| match v {
                JetVar::U(_, k) => Some(*k),
                _ => None,
            })
            .max()
            .unwrap_or(0)
    }

    pub fn contains(&self, pred: impl Fn(JetVar) -> bool) -> bool {
        self.terms.keys().any(|m| m.0.iter().any(|(v, _)| pred(*v)))
    }

    /// Replaces jet variables by jet expressions (simultaneously).
    pub fn substitute_jets(&self, rule: &dyn Fn(JetVar) -> Option<JetExpr>) -> JetExpr {
        let mut out = JetExpr::zero();
        let mut cache: HashMap<JetVar, Option<JetExpr>> = HashMap::new();
        for (m, c) in &self.terms {
            let mut acc = JetExpr::constant(c.clone());
            let mut keep = Vec::new();
            for &(v, e) in &m.0 {
                let r = cache.entry(v).or_insert_with(|| rule(v)).clone();
                match r {
                    Some(r) => {
                        for _ in 0..e {
                            acc = &acc * &r;
                        }
                    }
                    None => keep.push((v, e)),
                }
            }
            out.add_assign(&acc.mul_mono(&JetMono(keep)));
        }
        out
    }

    /// Value with every coefficient evaluated at a rational point (jets kept).
    pub fn eval_coeffs(&self, point: &[BigRational]) -> Result<BTreeMap<JetMono, BigRational>, ArithError> {
        let mut out = BTreeMap::new();
        for (m, c) in &self.terms {
            let v = c.eval(point)?;
            if !v.is_zero() {
                out.insert(m.clone(), v);
            }
        }
        Ok(out)
    }
}


impl<'a> Add<&'a JetExpr> for &'a JetExpr {
    type Output = JetExpr;
    fn add(self, o: &JetExpr) -> JetExpr {
        let mut out = self.clone();
        out.add_assign(o);
        out
    }
}

impl<'a> Sub<&'a JetExpr> for &'a JetExpr {
    type Output = JetExpr;
    fn sub(self, o: &JetExpr) -> JetExpr {
        let mut out = self.clone();
        out.add_scaled(o, &Expr::from_int(-1));
        out
    }
}

impl Neg for &JetExpr {
    type Output = JetExpr;
    fn neg(self) -> JetExpr {
        self.map_coeffs(|c| -c)
    }
}

impl<'a> Mul<&'a JetExpr> for &'a JetExpr {
    type Output = JetExpr;
    fn mul(self, o: &JetExpr) -> JetExpr {
        let mut out = JetExpr::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &o.terms {
                out.add_term(m1.mul(m2), &(c1 * c2));
            }
        }
        out
    }
}

impl From<Expr> for JetExpr {
    fn from(c: Expr) -> JetExpr {
        JetExpr::constant(c)
    }
}

impl Algebra for JetExpr {
    fn from_rational(r: &BigRational) -> JetExpr {
        JetExpr::constant(Expr::from_rational(r))
    }
    fn add(&self, o: &JetExpr) -> JetExpr {
        self + o
    }
    fn sub(&self, o: &JetExpr) -> JetExpr {
        self - o
    }
    fn mul(&self, o: &JetExpr) -> JetExpr {
        self * o
    }
    fn neg(&self) -> JetExpr {
        -self
    }
    fn div(&self, o: &JetExpr) -> Result<JetExpr, ArithError> {
        let d = o.as_scalar().ok_or(ArithError::DivisionByZero)?;
        let inv = d.inv()?;
        Ok(self.scale(&inv))
    }
    fn pow(&self, e: i32) -> Result<JetExpr, ArithError> {
        if e < 0 {
            let d = self.as_scalar().ok_or(ArithError::DivisionByZero)?;
            return Ok(JetExpr::constant(d.pow(e)?));
        }
        let mut acc = JetExpr::constant(Expr::one());
        for _ in 0..e {
            acc = &acc * self;
        }
        Ok(acc)
    }
}

/// Coordinates of the dependent variables in which jets are written.
pub trait Frame: Send + Sync {
    fn dim(&self) -> usize;
    /// Derivative of a coefficient with respect to the `l`-th frame coordinate.
    fn partial(&self, c: &Expr, l: usize) -> Expr;
    /// All partial derivatives at once.
    fn gradient(&self, c: &Expr) -> Vec<Expr> {
        (0..self.dim()).map(|l| self.partial(c, l)).collect()
    }
}

/// Frame coordinates are workspace symbols.
#[derive(Clone, Debug)]
pub struct DirectFrame {
    pub vars: Vec<Var>,
}

impl DirectFrame {
    pub fn new(vars: Vec<Var>) -> DirectFrame {
        DirectFrame { vars }
    }

    /// The first `n` symbols of a workspace.
    pub fn first(n: usize) -> DirectFrame {
        DirectFrame::new((0..n as u8).map(Var).collect())
    }
}

impl Frame for DirectFrame {
    fn dim(&self) -> usize {
        self.vars.len()
    }
    fn partial(&self, c: &Expr, l: usize) -> Expr {
        c.diff(self.vars[l])
    }
}

/// Frame coordinates `q(u)` parametrized by workspace symbols `u`:
/// `d/dq^l = sum_s jinv[s][l] d/du^s` with `jinv = (dq/du)^{-1}`.
#[derive(Clone, Debug)]
pub struct ParamFrame {
    pub params: Vec<Var>,
    pub jinv: Vec<Vec<Expr>>,
}

impl Frame for ParamFrame {
    fn dim(&self) -> usize {
        self.jinv.len()
    }
    fn partial(&self, c: &Expr, l: usize) -> Expr {
        let mut acc = Expr::zero();
        for (s, &v) in self.params.iter().enumerate() {
            let j = &self.jinv[s][l];
            if j.is_zero() || !c.depends_on(v) {
                continue;
            }
            acc = &acc + &(j * &c.diff(v));
        }
        acc
    }
    fn gradient(&self, c: &Expr) -> Vec<Expr> {
        let du: Vec<Expr> = self.params.iter().map(|&v| c.diff(v)).collect();
        (0..self.dim())
            .map(|l| {
                let mut acc = Expr::zero();
                for (s, d) in du.iter().enumerate() {
                    if !d.is_zero() && !self.jinv[s][l].is_zero() {
                        acc = &acc + &(d * &self.jinv[s][l]);
                    }
                }
                acc
            })
            .collect()
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum JetError {
    #[error("no x-derivative rule for nonlocal variable r{0}")]
    NonlocalX(usize),
    #[error("t-derivative of {0} is not resolved by the system")]
    Unresolved(String),
    #[error("not of hydrodynamic second-order form: {0}")]
    NotHydrodynamic(String),
}

/// Jet space over a frame, with optional nonlocal `x`-rules.
#[derive(Clone)]
pub struct JetSpace {
    pub frame: Arc<dyn Frame>,
    pub field_names: Vec<String>,
    nonlocal_x: Vec<JetExpr>,
}

impl std::fmt::Debug for JetSpace {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("JetSpace")
            .field("field_names", &self.field_names)
            .field("nonlocal_x", &self.nonlocal_x)
            .finish()
    }
}

impl JetSpace {
    pub fn new(frame: Arc<dyn Frame>, field_names: Vec<String>) -> JetSpace {
        assert_eq!(frame.dim(), field_names.len());
        JetSpace {
            frame,
            field_names,
            nonlocal_x: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.frame.dim()
    }

    pub fn with_nonlocal(mut self, rx: Vec<JetExpr>) -> JetSpace {
        self.nonlocal_x = rx;
        self
    }

    /// `D_x` of a coefficient.
    pub fn dx_coeff(&self, c: &Expr) -> JetExpr {
        let mut out = JetExpr::zero();
        if c.is_constant() {
            return out;
        }
        for (l, d) in self.frame.gradient(c).into_iter().enumerate() {
            out.add_term(JetMono::var(JetVar::U(l as u8, 1)), &d);
        }
        out
    }

    fn dx_var(&self, v: JetVar) -> Result<JetExpr, JetError> {
        Ok(match v {
            JetVar::U(i, k) => JetExpr::var(JetVar::U(i, k + 1)),
            JetVar::P(i, k) => JetExpr::var(JetVar::P(i, k + 1)),
            JetVar::R(a) => self
                .nonlocal_x
                .get(a as usize)
                .cloned()
                .ok_or(JetError::NonlocalX(a as usize))?,
        })
    }

    /// Total x-derivative.
    pub fn total_x(&self, e: &JetExpr) -> Result<JetExpr, JetError> {
        self.derivation(e, &|c| self.dx_coeff(c), &mut |v| self.dx_var(v))
    }

    /// Applies the derivation determined by its action on coefficients and jet variables.
    pub fn derivation(
        &self,
        e: &JetExpr,
        on_coeff: &dyn Fn(&Expr) -> JetExpr,
        on_var: &mut dyn FnMut(JetVar) -> Result<JetExpr, JetError>,
    ) -> Result<JetExpr, JetError> {
        let mut out = JetExpr::zero();
        let mut cache: HashMap<JetVar, JetExpr> = HashMap::new();
        for (m, c) in &e.terms {
            let dc = on_coeff(c);
            out.add_assign(&dc.mul_mono(m));
            for &(v, k) in &m.0 {
                let dv = match cache.get(&v) {
                    Some(d) => d.clone(),
                    None => {
                        let d = on_var(v)?;
                        cache.insert(v, d.clone());
                        d
                    }
                };
                if dv.is_zero() {
                    continue;
                }
                let rest = m.without_one(v);
                let s = c.scale_int(&(k as i64).into());
                out.add_assign(&dv.scale(&s).mul_mono(&rest));
            }
        }
        Ok(out)
    }

    /// Partial derivative with respect to the order-0 field `k` (coefficients only).
    pub fn partial_field(&self, e: &JetExpr, k: usize) -> JetExpr {
        e.map_coeffs(|c| self.frame.partial(c, k))
    }

    /// The bracket `-dh/db^k_x + D_x dh/db^k_xx` in potential coordinates.
    pub fn euler(&self, h: &JetExpr, k: usize) -> Result<JetExpr, JetError> {
        let a = self.partial_field(h, k);
        let b = self.total_x(&h.partial_jet(JetVar::U(k as u8, 1)))?;
        Ok(&b - &a)
    }

    /// Full variational derivative `delta h / delta u^k`.
    pub fn variational(&self, h: &JetExpr, k: usize) -> Result<JetExpr, JetError> {
        let mut out = self.partial_field(h, k);
        let order = h.max_order();
        for j in 1..=order {
            let mut t = h.partial_jet(JetVar::U(k as u8, j));
            for _ in 0..j {
                t = self.total_x(&t)?;
            }
            if j % 2 == 1 {
                out = &out - &t;
            } else {
                out = &out + &t;
            }
        }
        Ok(out)
    }

    pub fn jet_name(&self, v: JetVar) -> String {
        match v {
            JetVar::U(i, k) => format!("{}_{}", self.field_names[i as usize], "x".repeat(k as usize)),
            JetVar::P(i, 0) => format!("p{}", i + 1),
            JetVar::P(i, k) => format!("p{}_{}", i + 1, "x".repeat(k as usize)),
            JetVar::R(a) => format!("r{}", a + 1),
        }
    }

    /// Canonical text, in the kernel grammar extended by jet names.
    pub fn print(&self, ws: &Workspace, e: &JetExpr) -> String {
        if e.is_zero() {
            return "0".into();
        }
        let mut out = String::new();
        for (i, (m, c)) in e.terms.iter().enumerate() {
            if i > 0 {
                out.push_str(" + ");
            }
            let cs = ws.print(c);
            if m.is_one() {
                let _ = write!(out, "({cs})");
                continue;
            }
            let mono: Vec<String> = m
                .0
                .iter()
                .map(|&(v, e)| {
                    if e == 1 {
                        self.jet_name(v)
                    } else {
                        format!("{}^{e}", self.jet_name(v))
                    }
                })
                .collect();
            if c.is_one() {
                out.push_str(&mono.join("*"));
            } else {
                let _ = write!(out, "({cs})*{}", mono.join("*"));
            }
        }
        out
    }

    /// Resolves a jet symbol name (`u1_x`, `p2_xx`, `r1`).
    pub fn lookup_jet(&self, name: &str) -> Option<JetVar> {
        if let Some((base, xs)) = name.split_once('_') {
            if xs.is_empty() || !xs.chars().all(|c| c == 'x') {
                return None;
            }
            let k = xs.len() as u8;
            if let Some(i) = self.field_names.iter().position(|f| f == base) {
                return Some(JetVar::U(i as u8, k));
            }
            if let Some(i) = base.strip_prefix('p').and_then(|s| s.parse::<usize>().ok()) {
                if (1..=self.dim()).contains(&i) {
                    return Some(JetVar::P((i - 1) as u8, k));
                }
            }
            return None;
        }
        if let Some(i) = name.strip_prefix('p').and_then(|s| s.parse::<usize>().ok()) {
            if (1..=self.dim()).contains(&i) {
                return Some(JetVar::P((i - 1) as u8, 0));
            }
        }
        if let Some(a) = name.strip_prefix('r').and_then(|s| s.parse::<usize>().ok()) {
            if a >= 1 {
                return Some(JetVar::R((a - 1) as u8));
            }
        }
        None
    }

    /// Parses a differential polynomial; workspace symbols take precedence.
    pub fn parse(&self, ws: &Workspace, text: &str) -> Result<JetExpr, hydroham_kernel::ParseError> {
        let ast = hydroham_kernel::parse_ast(text)?;
        ast.eval(&mut |s: &str| match ws.lookup(s) {
            Some(v) => Some(JetExpr::constant(Expr::var(v))),
            None => self.lookup_jet(s).map(JetExpr::var),
        })
    }
}

/// Hydrodynamic-type system `u^i_t = D_x V^i(u)` written in a jet space.
#[derive(Clone, Debug)]
pub struct EvolutionSystem {
    pub space: JetSpace,
    pub fluxes: Vec<Expr>,
    /// `V^i_k`
    pub jac: Vec<Vec<Expr>>,
    /// `V^i_{kh}`
    pub hess: Vec<Vec<Vec<Expr>>>,
    cotangent: bool,
    nonlocal_t: Vec<JetExpr>,
}

impl EvolutionSystem {
    pub fn new(space: JetSpace, fluxes: Vec<Expr>) -> EvolutionSystem {
        let n = space.dim();
        assert_eq!(fluxes.len(), n, "one flux per field");
        let frame = space.frame.clone();
        let jac: Vec<Vec<Expr>> = par::map(&fluxes, |v| frame.gradient(v));
        let hess: Vec<Vec<Vec<Expr>>> = par::map(&jac, |row| row.iter().map(|c| frame.gradient(c)).collect());
        EvolutionSystem {
            space,
            fluxes,
            jac,
            hess,
            cotangent: false,
            nonlocal_t: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.fluxes.len()
    }

    /// Adjoins the covector equations `p_{k,t} = V^i_{kh} u^h_x p_i + V^i_k p_{i,x}`.
    pub fn cotangent(&self) -> EvolutionSystem {
        let mut s = self.clone();
        s.cotangent = true;
        s
    }

    pub fn is_cotangent(&self) -> bool {
        self.cotangent
    }

    /// Adds potentials `r_a` for hydrodynamic symmetries `w_a`:
    /// `r_{a,x} = w^i_{ak} u^k_x p_i`, `r_{a,t} = V^i_j w^j_{ak} u^k_x p_i`.
    pub fn with_potentials(&self, flows: &[Vec<Vec<Expr>>]) -> EvolutionSystem {
        let n = self.dim();
        let mut rx = Vec::new();
        let mut rt = Vec::new();
        for w in flows {
            let mut ex = JetExpr::zero();
            let mut et = JetExpr::zero();
            for i in 0..n {
                for k in 0..n {
                    let m = JetMono::from_factors(vec![(JetVar::U(k as u8, 1), 1), (JetVar::P(i as u8, 0), 1)]);
                    ex.add_term(m.clone(), &w[i][k]);
                    let mut vw = Expr::zero();
                    for j in 0..n {
                        vw = &vw + &(&self.jac[i][j] * &w[j][k]);
                    }
                    et.add_term(m, &vw);
                }
            }
            rx.push(ex);
            rt.push(et);
        }
        let mut s = self.cotangent();
        s.space = s.space.clone().with_nonlocal(rx);
        s.nonlocal_t = rt;
        s
    }

    /// `u^i_t` as a jet expression.
    pub fn field_t(&self, i: usize) -> JetExpr {
        let mut out = JetExpr::zero();
        for (m, v) in self.jac[i].iter().enumerate() {
            out.add_term(JetMono::var(JetVar::U(m as u8, 1)), v);
        }
        out
    }

    fn covector_t(&self, k: usize) -> JetExpr {
        let n = self.dim();
        let mut out = JetExpr::zero();
        for i in 0..n {
            out.add_term(JetMono::var(JetVar::P(i as u8, 1)), &self.jac[i][k]);
            for h in 0..n {
                let m = JetMono::from_factors(vec![(JetVar::U(h as u8, 1), 1), (JetVar::P(i as u8, 0), 1)]);
                out.add_term(m, &self.hess[i][k][h]);
            }
        }
        out
    }

    /// Total t-derivative on solutions of the system (and its coverings).
    pub fn total_t(&self, e: &JetExpr) -> Result<JetExpr, JetError> {
        let ut: Vec<JetExpr> = (0..self.dim()).map(|i| self.field_t(i)).collect();
        let on_coeff = |c: &Expr| {
            let mut out = JetExpr::zero();
            if c.is_constant() {
                return out;
            }
            for (l, d) in self.space.frame.gradient(c).into_iter().enumerate() {
                if !d.is_zero() {
                    out.add_scaled(&ut[l], &d);
                }
            }
            out
        };
        let mut on_var = |v: JetVar| -> Result<JetExpr, JetError> {
            match v {
                JetVar::U(i, k) => {
                    let mut t = ut[i as usize].clone();
                    for _ in 0..k {
                        t = self.space.total_x(&t)?;
                    }
                    Ok(t)
                }
                JetVar::P(i, k) => {
                    if !self.cotangent {
                        return Err(JetError::Unresolved(self.space.jet_name(v)));
                    }
                    let mut t = self.covector_t(i as usize);
                    for _ in 0..k {
                        t = self.space.total_x(&t)?;
                    }
                    Ok(t)
                }
                JetVar::R(a) => self
                    .nonlocal_t
                    .get(a as usize)
                    .cloned()
                    .ok_or_else(|| JetError::Unresolved(self.space.jet_name(v))),
            }
        };
        self.space.derivation(e, &on_coeff, &mut on_var)
    }

    pub fn total_x(&self, e: &JetExpr) -> Result<JetExpr, JetError> {
        self.space.total_x(e)
    }

    /// `l_F(phi)^i = D_t phi^i - V^i_j D_x phi^j` (potential form).
    pub fn linearize(&self, phi: &[JetExpr]) -> Result<Vec<JetExpr>, JetError> {
        let n = self.dim();
        let dx: Vec<JetExpr> = phi.iter().map(|f| self.total_x(f)).collect::<Result<_, _>>()?;
        let rows: Vec<usize> = (0..n).collect();
        par::try_map(&rows, |&i| {
            let mut out = self.total_t(&phi[i])?;
            for j in 0..n {
                out.add_scaled(&dx[j], &-&self.jac[i][j]);
            }
            Ok(out)
        })
    }

    /// `l*_F(psi)_k = -D_t psi_k + D_x(V^i_k psi_i)`.
    pub fn adjoint_linearize(&self, psi: &[JetExpr]) -> Result<Vec<JetExpr>, JetError> {
        let n = self.dim();
        (0..n)
            .map(|k| {
                let mut s = JetExpr::zero();
                for i in 0..n {
                    s.add_scaled(&psi[i], &self.jac[i][k]);
                }
                let a = self.total_x(&s)?;
                let b = self.total_t(&psi[k])?;
                Ok(&a - &b)
            })
            .collect()
    }

    /// The hydrodynamic flow `w^i_j u^j_x` as a vector of jet expressions.
    pub fn flow_vector(w: &[Vec<Expr>]) -> Vec<JetExpr> {
        w.iter()
            .map(|row| {
                let mut e = JetExpr::zero();
                for (j, c) in row.iter().enumerate() {
                    e.add_term(JetMono::var(JetVar::U(j as u8, 1)), c);
                }
                e
            })
            .collect()
    }
}

/// Reads `w^i_j` from a flow of the form `w^i_j u^j_x`.
pub fn hydrodynamic_matrix(flow: &[JetExpr], n: usize) -> Result<Vec<Vec<Expr>>, JetError> {
    let mut w = vec![vec![Expr::zero(); n]; n];
    for (i, f) in flow.iter().enumerate() {
        for (m, c) in f.terms() {
            match m.factors() {
                [(JetVar::U(j, 1), 1)] => w[i][*j as usize] = c.clone(),
                _ => return Err(JetError::NotHydrodynamic(format!("component {}", i + 1))),
            }
        }
    }
    Ok(w)
}
