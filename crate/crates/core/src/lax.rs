//! Lax pair, scalar reduction, Riccati expansion of the generating function,
//! and flows generated by densities.

use std::collections::BTreeMap;

use hydroham_kernel::{ArithError, Expr, Var};
use thiserror::Error;

use crate::conditions::ResidualReport;
use crate::jet::{hydrodynamic_matrix, EvolutionSystem, JetError, JetExpr, JetMono, JetSpace, JetVar};
use crate::par;
use crate::tensor::{det, ChartMap, Matrix, TensorError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LaxError {
    #[error("elimination needs A = [[0,1,0],[*,*,a],[*,*,*]] with a != 0")]
    Degenerate,
    #[error("denominator depends on the spectral parameter")]
    SpectralDenominator,
    #[error("branch {0} out of range")]
    Branch(usize),
    #[error("branch collision: the linear coefficient of the recursion vanishes")]
    Collision,
    #[error(transparent)]
    Jet(#[from] JetError),
    #[error(transparent)]
    Tensor(#[from] TensorError),
    #[error(transparent)]
    Arith(#[from] ArithError),
}

/// `psi_x = lambda A psi`, `psi_t = lambda B psi`.
#[derive(Clone, Debug)]
pub struct LaxPair {
    pub lambda: Var,
    pub a: Matrix,
    pub b: Matrix,
}

impl LaxPair {
    /// The pair in `q`-coordinates: `q` are the first six symbols, `fluxes` those of the system.
    pub fn oriented_associativity(q: &[Var], lambda: Var, fluxes: &[Expr]) -> LaxPair {
        let s = |i: usize| Expr::var(q[i]);
        let (z, o) = (Expr::zero(), Expr::one());
        let a = vec![
            vec![z.clone(), o.clone(), z.clone()],
            vec![s(0), s(2), s(4)],
            vec![s(1), s(3), s(5)],
        ];
        let b = vec![
            vec![z.clone(), z, o],
            vec![s(1), s(3), s(5)],
            vec![fluxes[1].clone(), fluxes[3].clone(), fluxes[5].clone()],
        ];
        LaxPair { lambda, a, b }
    }
}

/// `A_t - B_x + lambda [A, B]` entrywise on the jet space of `sys`.
pub fn zero_curvature(l: &LaxPair, sys: &EvolutionSystem) -> Result<ResidualReport, JetError> {
    let n = l.a.len();
    let lam = Expr::var(l.lambda);
    let idx: Vec<(usize, usize)> = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).collect();
    let vals = par::try_map(&idx, |&(i, j)| {
        let at = sys.total_t(&JetExpr::constant(l.a[i][j].clone()))?;
        let bx = sys.total_x(&JetExpr::constant(l.b[i][j].clone()))?;
        let mut comm = Expr::zero();
        for k in 0..n {
            comm = &comm + &(&(&l.a[i][k] * &l.b[k][j]) - &(&l.b[i][k] * &l.a[k][j]));
        }
        let mut r = &at - &bx;
        r.add_term(Default::default(), &(&lam * &comm));
        Ok(r)
    })?;
    let mut rep = ResidualReport::new("zero curvature");
    for ((i, j), v) in idx.into_iter().zip(vals) {
        rep.push(vec![i, j], v);
    }
    Ok(rep)
}

/// `det(lambda I - A)`.
pub fn char_poly(l: &LaxPair) -> Result<Expr, TensorError> {
    let lam = Expr::var(l.lambda);
    let m: Matrix = l
        .a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            row.iter()
                .enumerate()
                .map(|(j, a)| if i == j { &lam - a } else { -a })
                .collect()
        })
        .collect();
    det(&m)
}

/// Linear combination `sum c_k psi_{kx}`.
type Operator = Vec<JetExpr>;

fn op_dx(space: &JetSpace, op: &Operator) -> Result<Operator, JetError> {
    let mut out = vec![JetExpr::zero(); op.len() + 1];
    for (k, c) in op.iter().enumerate() {
        out[k].add_assign(&space.total_x(c)?);
        out[k + 1].add_assign(c);
    }
    Ok(out)
}

fn op_add_scaled(a: &mut Operator, b: &Operator, s: &Expr) {
    if a.len() < b.len() {
        a.resize(b.len(), JetExpr::zero());
    }
    for (k, c) in b.iter().enumerate() {
        a[k].add_scaled(c, s);
    }
}

/// Eliminates `psi^1`, `psi^2`; returns the coefficients of `psi, psi_x, psi_2x, psi_3x`,
/// normalized by `lambda^3 A_12^2` so that the top coefficient is `A_12`.
pub fn scalar_reduce(l: &LaxPair, space: &JetSpace) -> Result<[JetExpr; 4], LaxError> {
    let a = &l.a;
    if !(a[0][0].is_zero() && a[0][1].is_one() && a[0][2].is_zero()) || a[1][2].is_zero() {
        return Err(LaxError::Degenerate);
    }
    let lam = Expr::var(l.lambda);
    let lam_inv = lam.inv()?;
    let psi: Operator = vec![JetExpr::constant(Expr::one())];
    let psi1: Operator = op_dx(space, &psi)?.into_iter().map(|c| c.scale(&lam_inv)).collect();
    let mut psi2: Operator = op_dx(space, &psi1)?.into_iter().map(|c| c.scale(&lam_inv)).collect();
    op_add_scaled(&mut psi2, &psi, &-&a[1][0]);
    op_add_scaled(&mut psi2, &psi1, &-&a[1][1]);
    let inv12 = a[1][2].inv()?;
    let psi2: Operator = psi2.into_iter().map(|c| c.scale(&inv12)).collect();
    let mut eq: Operator = op_dx(space, &psi2)?.into_iter().map(|c| c.scale(&lam_inv)).collect();
    op_add_scaled(&mut eq, &psi, &-&a[2][0]);
    op_add_scaled(&mut eq, &psi1, &-&a[2][1]);
    op_add_scaled(&mut eq, &psi2, &-&a[2][2]);
    let norm = &(&lam * &(&lam * &lam)) * &(&a[1][2] * &a[1][2]);
    eq.resize(4, JetExpr::zero());
    Ok([0, 1, 2, 3].map(|k| eq[k].scale(&norm)))
}

/// Forward oracle: applies a scalar operator to `psi` with `psi_x, psi_2x, ...`
/// expanded through the first-order system; returns the components along `(psi, psi^1, psi^2)`.
pub fn substitution_oracle(l: &LaxPair, space: &JetSpace, coeffs: &[JetExpr]) -> Result<ResidualReport, JetError> {
    let n = l.a.len();
    let lam = Expr::var(l.lambda);
    let mut state: Vec<JetExpr> = (0..n)
        .map(|i| JetExpr::constant(if i == 0 { Expr::one() } else { Expr::zero() }))
        .collect();
    let mut acc = vec![JetExpr::zero(); n];
    for (k, c) in coeffs.iter().enumerate() {
        if k > 0 {
            let mut next: Vec<JetExpr> = state.iter().map(|s| space.total_x(s)).collect::<Result<_, _>>()?;
            for (i, s) in state.iter().enumerate() {
                for (j, nx) in next.iter_mut().enumerate() {
                    let f = &lam * &l.a[i][j];
                    if !f.is_zero() {
                        nx.add_scaled(s, &f);
                    }
                }
            }
            state = next;
        }
        for i in 0..n {
            acc[i].add_assign(&(c * &state[i]));
        }
    }
    let mut rep = ResidualReport::new("scalar reduction substitution");
    for (i, e) in acc.into_iter().enumerate() {
        rep.push(vec![i], e);
    }
    Ok(rep)
}

/// Leading relation `sum_j [lambda^{3-j}] a_j * lambda^j` of the Riccati equation at `r ~ lambda x`,
/// reusing the spectral symbol as the unknown `x`.
pub fn leading_relation(coeffs: &[JetExpr; 4], lambda: Var) -> Result<Expr, LaxError> {
    let mut acc = Expr::zero();
    let lam = Expr::var(lambda);
    for (j, a) in coeffs.iter().enumerate() {
        let parts = split_lambda(a, lambda)?;
        let top = parts.get(&(3 - j as i32)).cloned().unwrap_or_default();
        let c = top.as_scalar().ok_or(LaxError::Degenerate)?;
        acc = &acc + &(&c * &lam.pow(j as i32)?);
    }
    Ok(acc)
}

/// Splits coefficients into powers of the spectral parameter.
pub fn split_lambda(e: &JetExpr, lambda: Var) -> Result<BTreeMap<i32, JetExpr>, LaxError> {
    let mut out: BTreeMap<i32, JetExpr> = BTreeMap::new();
    for (m, c) in e.terms() {
        let (num, den) = c.canonical();
        if den.degree_in(lambda) > 0 {
            return Err(LaxError::SpectralDenominator);
        }
        let d = Expr::from_poly(den);
        for (k, p) in num.to_univariate(lambda).into_iter().enumerate() {
            if p.is_zero() {
                continue;
            }
            let v = Expr::from_poly(p).checked_div(&d)?;
            out.entry(k as i32).or_default().add_term(m.clone(), &v);
        }
    }
    out.retain(|_, v| !v.is_zero());
    Ok(out)
}

/// Rewrites `q`-jets through a chart: coefficients by `q = q(u)`, `q^i_x = J^i_s u^s_x`.
pub fn pullback_jet(e: &JetExpr, chart: &ChartMap, q_vars: &[Var], u_space: &JetSpace) -> Result<JetExpr, LaxError> {
    let coeffs = e.try_map_coeffs(|c| chart.pullback(c, q_vars))?;
    let n = chart.dim();
    let mut cache: BTreeMap<JetVar, JetExpr> = BTreeMap::new();
    for (m, _) in coeffs.terms() {
        for &(v, _) in m.factors() {
            if let JetVar::U(i, k) = v {
                if cache.contains_key(&v) {
                    continue;
                }
                let mut t = JetExpr::zero();
                for s in 0..n {
                    t.add_term(crate::jet::JetMono::var(JetVar::U(s as u8, 1)), &chart.j[i as usize][s]);
                }
                for _ in 1..k {
                    t = u_space.total_x(&t)?;
                }
                cache.insert(v, t);
            }
        }
    }
    Ok(coeffs.substitute_jets(&|v| cache.get(&v).cloned()))
}

/// Truncated Laurent series in `lambda` with jet coefficients.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Series {
    pub terms: BTreeMap<i32, JetExpr>,
}

impl Series {
    pub fn from_terms(terms: BTreeMap<i32, JetExpr>) -> Series {
        Series { terms }
    }

    pub fn coeff(&self, k: i32) -> JetExpr {
        self.terms.get(&k).cloned().unwrap_or_default()
    }

    fn add(&self, o: &Series) -> Series {
        let mut out = self.clone();
        for (k, v) in &o.terms {
            out.terms.entry(*k).or_default().add_assign(v);
        }
        out.terms.retain(|_, v| !v.is_zero());
        out
    }

    fn scale(&self, s: i64) -> Series {
        let e = Expr::from_int(s);
        Series {
            terms: self.terms.iter().map(|(k, v)| (*k, v.scale(&e))).collect(),
        }
    }

    fn mul(&self, o: &Series, floor: i32) -> Series {
        let mut out = Series::default();
        for (a, x) in &self.terms {
            for (b, y) in &o.terms {
                if a + b < floor {
                    continue;
                }
                out.terms.entry(a + b).or_default().add_assign(&(x * y));
            }
        }
        out.terms.retain(|_, v| !v.is_zero());
        out
    }

    fn dx(&self, space: &JetSpace) -> Result<Series, JetError> {
        let mut out = Series::default();
        for (k, v) in &self.terms {
            let d = space.total_x(v)?;
            if !d.is_zero() {
                out.terms.insert(*k, d);
            }
        }
        Ok(out)
    }
}

/// `a0 + a1 r + a2 (r^2 + r_x) + a3 (r^3 + 3 r r_x + r_xx)`, keeping powers `>= floor`.
pub fn riccati(a: &[Series; 4], r: &Series, space: &JetSpace, floor: i32) -> Result<Series, JetError> {
    let rx = r.dx(space)?;
    let rxx = rx.dx(space)?;
    let r2 = r.mul(r, floor - 6);
    let p2 = r2.add(&rx);
    let p3 = r2.mul(r, floor - 6).add(&r.mul(&rx, floor - 6).scale(3)).add(&rxx);
    let e = a[0]
        .add(&a[1].mul(r, floor))
        .add(&a[2].mul(&p2, floor))
        .add(&a[3].mul(&p3, floor));
    Ok(Series {
        terms: e.terms.into_iter().filter(|(k, _)| *k >= floor).collect(),
    })
}

/// Coefficients `h_{-1} = u^k, h_0, ..., h_depth` of one branch.
#[derive(Clone, Debug)]
pub struct GeneratingSeries {
    pub branch: usize,
    /// `[lambda^3] E(lambda u^k)`: vanishes on the branch.
    pub leading_residual: JetExpr,
    /// Coefficient of `h_i` in `[lambda^{2-i}] E`.
    pub linear: Expr,
    pub h: Vec<JetExpr>,
    /// `[lambda^{2-i}] E` after solving for `h_i`.
    pub order_residuals: Vec<JetExpr>,
}

/// Solves the Riccati equation order by order on branch `k` (zero-based field index).
pub fn riccati_expand(a: &[Series; 4], space: &JetSpace, field: Var, branch: usize, depth: usize) -> Result<GeneratingSeries, LaxError> {
    let mut r = Series::default();
    r.terms.insert(1, JetExpr::constant(Expr::var(field)));
    let leading = riccati(a, &r, space, 3)?.coeff(3);
    let mut r1 = r.clone();
    r1.terms.insert(0, JetExpr::constant(Expr::one()));
    let diff = &riccati(a, &r1, space, 2)?.coeff(2) - &riccati(a, &r, space, 2)?.coeff(2);
    let linear = diff.as_scalar().ok_or(LaxError::Degenerate)?;
    if linear.is_zero() {
        return Err(LaxError::Collision);
    }
    let inv = linear.inv()?;
    let mut h = Vec::new();
    let mut order_residuals = Vec::new();
    for i in 0..=depth as i32 {
        let rest = riccati(a, &r, space, 2 - i)?.coeff(2 - i);
        let hi = rest.scale(&-&inv);
        r.terms.insert(-i, hi.clone());
        order_residuals.push(riccati(a, &r, space, 2 - i)?.coeff(2 - i));
        h.push(hi);
    }
    Ok(GeneratingSeries {
        branch,
        leading_residual: leading,
        linear,
        h,
        order_residuals,
    })
}

/// `w^i_j` of the flow `gt^{ik} delta h / delta u^k = w^i_j u^j_x`.
///
/// The bracket of [`JetSpace::euler`] is `-delta h/delta u^k`, so the flow is `-gt * euler`.
/// Constant terms are dropped.
pub fn flows_from_density(space: &JetSpace, h: &JetExpr, gt: &Matrix) -> Result<Matrix, LaxError> {
    let n = space.dim();
    let e: Vec<JetExpr> = (0..n).map(|k| space.euler(h, k)).collect::<Result<_, _>>()?;
    let flow: Vec<JetExpr> = (0..n)
        .map(|i| {
            let mut f = JetExpr::zero();
            for k in 0..n {
                f.add_scaled(&e[k], &-&gt[i][k]);
            }
            // constant shifts of the potentials leave u = b_x unchanged
            let c = f.coeff(&JetMono::one());
            if c.is_constant() {
                f.add_term(JetMono::one(), &-&c);
            }
            f
        })
        .collect();
    Ok(hydrodynamic_matrix(&flow, n)?)
}

/// How a computed density relates to a reference one.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DensityMatch {
    Exact,
    ModuloTotalDerivative,
    Mismatch,
}

impl DensityMatch {
    pub fn as_str(self) -> &'static str {
        match self {
            DensityMatch::Exact => "exact",
            DensityMatch::ModuloTotalDerivative => "modulo total x-derivative",
            DensityMatch::Mismatch => "mismatch",
        }
    }
}

/// Variational derivatives of `a - b`, one per field.
pub fn variational_difference(space: &JetSpace, a: &JetExpr, b: &JetExpr) -> Result<Vec<JetExpr>, JetError> {
    let d = a - b;
    (0..space.dim()).map(|k| space.variational(&d, k)).collect()
}

pub fn match_density(space: &JetSpace, computed: &JetExpr, reference: &JetExpr) -> Result<DensityMatch, JetError> {
    if computed == reference {
        return Ok(DensityMatch::Exact);
    }
    let v = variational_difference(space, computed, reference)?;
    Ok(if v.iter().all(JetExpr::is_zero) {
        DensityMatch::ModuloTotalDerivative
    } else {
        DensityMatch::Mismatch
    })
}

/// Every monomial has total `x`-weight `w`.
pub fn is_quasihomogeneous(e: &JetExpr, w: u32) -> bool {
    e.terms().all(|(m, _)| m.x_weight() == w)
}
