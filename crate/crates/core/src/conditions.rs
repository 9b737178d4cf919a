//! Hamiltonian and compatibility condition checkers.

use std::collections::BTreeMap;

use hydroham_kernel::{AffineExpr, BigRational, Echelon, Expr, Int, Monomial, Poly, Solution, Var};

use crate::jet::{DirectFrame, EvolutionSystem, Frame, JetError, JetExpr, JetMono, JetVar};
use crate::par;
use crate::tensor::{Matrix, Metric, Tensor3};

/// A residual: a scalar, or a differential polynomial.
#[derive(Clone, Debug, PartialEq)]
pub enum Residual {
    Scalar(Expr),
    Jet(JetExpr),
}

impl Residual {
    pub fn is_zero(&self) -> bool {
        match self {
            Residual::Scalar(e) => e.is_zero(),
            Residual::Jet(j) => j.is_zero(),
        }
    }
}

impl From<Expr> for Residual {
    fn from(e: Expr) -> Residual {
        Residual::Scalar(e)
    }
}

impl From<JetExpr> for Residual {
    fn from(e: JetExpr) -> Residual {
        Residual::Jet(e)
    }
}

/// Named residuals keyed by zero-based index tuples, in enumeration order.
#[derive(Clone, Debug, PartialEq)]
pub struct ResidualReport {
    pub name: String,
    pub residuals: Vec<(Vec<usize>, Residual)>,
}

impl ResidualReport {
    pub fn new(name: impl Into<String>) -> ResidualReport {
        ResidualReport {
            name: name.into(),
            residuals: Vec::new(),
        }
    }

    /// Evaluates `f` on every tuple of `0..n` of length `arity`, in lexicographic order.
    pub fn tabulate(
        name: impl Into<String>,
        n: usize,
        arity: u32,
        f: impl Fn(&[usize]) -> Residual + Sync + Send,
    ) -> ResidualReport {
        let tuples = tuples(&vec![n; arity as usize]);
        let values = par::map(&tuples, |t| f(t));
        ResidualReport {
            name: name.into(),
            residuals: tuples.into_iter().zip(values).collect(),
        }
    }

    pub fn push(&mut self, index: Vec<usize>, r: impl Into<Residual>) {
        self.residuals.push((index, r.into()));
    }

    pub fn len(&self) -> usize {
        self.residuals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.residuals.is_empty()
    }

    pub fn nonzero(&self) -> usize {
        self.residuals.iter().filter(|(_, r)| !r.is_zero()).count()
    }

    pub fn passed(&self) -> bool {
        self.residuals.iter().all(|(_, r)| r.is_zero())
    }

    pub fn first_nonzero(&self) -> Option<(&[usize], &Residual)> {
        self.residuals
            .iter()
            .find(|(_, r)| !r.is_zero())
            .map(|(i, r)| (i.as_slice(), r))
    }

    pub fn get(&self, index: &[usize]) -> Option<&Residual> {
        self.residuals.iter().find(|(i, _)| i == index).map(|(_, r)| r)
    }
}

/// All tuples with `t[k] < dims[k]`, lexicographically.
pub fn tuples(dims: &[usize]) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for &d in dims {
        out = out
            .into_iter()
            .flat_map(|t| {
                (0..d).map(move |i| {
                    let mut t = t.clone();
                    t.push(i);
                    t
                })
            })
            .collect();
    }
    out
}

fn sum(it: impl IntoIterator<Item = Expr>) -> Expr {
    it.into_iter().fold(Expr::zero(), |acc, e| if e.is_zero() { acc } else { &acc + &e })
}

fn prod(a: &Expr, b: &Expr) -> Expr {
    if a.is_zero() || b.is_zero() {
        Expr::zero()
    } else {
        a * b
    }
}

fn half() -> Expr {
    hydroham_kernel::expr::ratio(1, 2)
}

/// Connection-type tensor `c_{ijk}` with its raised and mixed forms.
#[derive(Clone, Debug, PartialEq)]
pub struct CTensor {
    pub lower: Tensor3,
    /// `c^{ij}_k`
    pub upper: Tensor3,
    /// `c^s_{ml} = g^{sp} c_{pml}`
    pub mixed: Tensor3,
}

impl CTensor {
    pub fn from_metric(m: &Metric) -> CTensor {
        CTensor::from_lower(m, m.c_lower())
    }

    pub fn from_lower(m: &Metric, lower: Tensor3) -> CTensor {
        let upper = m.c_upper(&lower);
        let mixed = m.c_mixed(&lower);
        CTensor { lower, upper, mixed }
    }
}

/// Tail `sum C^{ab} w^i_{ak} u^k_x D^{-1} w^j_{bh} u^h_x` with symmetric constants.
#[derive(Clone, Debug, PartialEq)]
pub struct NonlocalTail {
    pub constants: Vec<Vec<Expr>>,
    /// `w[a][i][j] = w^i_{aj}`
    pub w: Vec<Matrix>,
}

impl NonlocalTail {
    pub fn new(constants: Vec<Vec<Expr>>, w: Vec<Matrix>) -> NonlocalTail {
        assert_eq!(constants.len(), w.len());
        NonlocalTail { constants, w }
    }

    pub fn empty() -> NonlocalTail {
        NonlocalTail {
            constants: Vec::new(),
            w: Vec::new(),
        }
    }

    /// Two flows with `c1 w1 w1 + c2 (w1 w2 + w2 w1) + c3 w2 w2`.
    pub fn pair(c: [BigRational; 3], w1: Matrix, w2: Matrix) -> NonlocalTail {
        let e = |r: &BigRational| Expr::from_rational(r);
        NonlocalTail {
            constants: vec![vec![e(&c[0]), e(&c[1])], vec![e(&c[1]), e(&c[2])]],
            w: vec![w1, w2],
        }
    }

    pub fn len(&self) -> usize {
        self.w.len()
    }

    pub fn is_empty(&self) -> bool {
        self.w.is_empty()
    }

    /// `w_{aij} = g_{is} w^s_{aj}`
    pub fn lowered(&self, m: &Metric) -> Vec<Matrix> {
        self.w.iter().map(|w| m.lower(w)).collect()
    }

    pub fn with_constants(&self, constants: Vec<Vec<Expr>>) -> NonlocalTail {
        NonlocalTail {
            constants,
            w: self.w.clone(),
        }
    }
}

/// (22), (28), (23), (27).
pub fn check_local_third_order(m: &Metric, c: &CTensor) -> [ResidualReport; 4] {
    let n = m.dim();
    let g = &m.g;
    let dg = &m.dg;
    let sym = ResidualReport::tabulate("(22) symmetry", n, 2, |t| (&g[t[0]][t[1]] - &g[t[1]][t[0]]).into());
    let third = hydroham_kernel::expr::ratio(1, 3);
    let c28 = ResidualReport::tabulate("(28) c from metric", n, 3, |t| {
        let (nn, k, mm) = (t[0], t[1], t[2]);
        (c.lower.get(nn, k, mm) - &(&(&dg[k][mm][nn] - &dg[mm][k][nn]) * &third)).into()
    });
    let cyc = ResidualReport::tabulate("(23) cyclic", n, 3, |t| {
        let (i, j, k) = (t[0], t[1], t[2]);
        (&(&dg[k][i][j] + &dg[i][j][k]) + &dg[j][k][i]).into()
    });
    let dc = derivative_of_lower(m, c);
    let c27 = ResidualReport::tabulate("(27) local c-condition", n, 4, |t| {
        let (nn, mm, l, k) = (t[0], t[1], t[2], t[3]);
        let quad = sum((0..n).map(|s| prod(c.mixed.get(s, mm, l), c.lower.get(s, nn, k))));
        (&dc[k][(nn * n + mm) * n + l] + &quad).into()
    });
    [sym, c28, cyc, c27]
}

/// `dc[k][(n*N + m)*N + l] = c_{nml,k}`
fn derivative_of_lower(m: &Metric, c: &CTensor) -> Vec<Vec<Expr>> {
    let n = m.dim();
    let idx: Vec<usize> = (0..n * n * n).collect();
    let grads: Vec<Vec<Expr>> = par::map(&idx, |&t| {
        let e = c.lower.get(t / (n * n), (t / n) % n, t % n);
        if e.is_zero() {
            vec![Expr::zero(); n]
        } else {
            m.frame.gradient(e)
        }
    });
    (0..n).map(|k| grads.iter().map(|g| g[k].clone()).collect()).collect()
}

/// (29), (30), (31).
pub fn check_nonlocal_third_order(m: &Metric, c: &CTensor, t: &NonlocalTail) -> [ResidualReport; 3] {
    let n = m.dim();
    let na = t.len();
    let wl = t.lowered(m);
    let tuples3 = tuples(&[na, n, n]);
    let mut skew = ResidualReport::new("(29) skew tails");
    for tp in &tuples3 {
        let (a, i, j) = (tp[0], tp[1], tp[2]);
        skew.push(tp.clone(), &wl[a][i][j] + &wl[a][j][i]);
    }
    let dwl: Vec<Vec<Vec<Vec<Expr>>>> = wl
        .iter()
        .map(|w| par::map(w, |row| row.iter().map(|e| m.frame.gradient(e)).collect()))
        .collect();
    let t4 = tuples(&[na, n, n, n]);
    let vals = par::map(&t4, |tp| {
        let (a, i, j, l) = (tp[0], tp[1], tp[2], tp[3]);
        let s = sum((0..n).map(|s| prod(c.mixed.get(s, i, j), &wl[a][s][l])));
        &dwl[a][i][j][l] - &s
    });
    let mut c30 = ResidualReport::new("(30) tail transport");
    for (tp, v) in t4.into_iter().zip(vals) {
        c30.push(tp, v);
    }
    let dc = derivative_of_lower(m, c);
    let c31 = ResidualReport::tabulate("(31) nonlocal c-condition", n, 4, |tp| {
        let (nn, mm, l, k) = (tp[0], tp[1], tp[2], tp[3]);
        let quad = sum((0..n).map(|s| prod(c.mixed.get(s, mm, l), c.lower.get(s, nn, k))));
        let mut tail = Expr::zero();
        for a in 0..na {
            for b in 0..na {
                if !t.constants[a][b].is_zero() {
                    tail = &tail + &prod(&t.constants[a][b], &prod(&wl[a][mm][l], &wl[b][nn][k]));
                }
            }
        }
        (&(&dc[k][(nn * n + mm) * n + l] + &quad) + &tail).into()
    });
    [skew, c30, c31]
}

/// The pair of conditions in `q`-components with `u` as parameters,
/// derivatives taken by the explicit chain rule `d/dq^l = (du^s/dq^l) d/du^s`.
pub fn check_q_conditions(
    m: &Metric,
    c: &CTensor,
    t: &NonlocalTail,
    params: &[Var],
    jinv: &Matrix,
) -> [ResidualReport; 2] {
    let n = m.dim();
    let na = t.len();
    let wl = t.lowered(m);
    let chain = |e: &Expr, l: usize| -> Expr {
        sum(params
            .iter()
            .enumerate()
            .filter(|(s, _)| !jinv[*s][l].is_zero())
            .map(|(s, &v)| prod(&e.diff(v), &jinv[s][l])))
    };
    let gi = &m.ginv;
    let first = ResidualReport::tabulate("(20) curvature-type condition", n, 4, |tp| {
        let (i, j, k, l) = (tp[0], tp[1], tp[2], tp[3]);
        let mut acc = chain(c.lower.get(i, j, k), l);
        for p in 0..n {
            let cp = c.lower.get(p, j, k);
            if cp.is_zero() {
                continue;
            }
            for q in 0..n {
                acc = &acc + &prod(&prod(&gi[p][q], cp), c.lower.get(q, i, l));
            }
        }
        for a in 0..na {
            for b in 0..na {
                acc = &acc + &prod(&t.constants[a][b], &prod(&wl[a][j][k], &wl[b][i][l]));
            }
        }
        acc.into()
    });
    let t4 = tuples(&[na, n, n, n]);
    let vals = par::map(&t4, |tp| {
        let (a, i, j, l) = (tp[0], tp[1], tp[2], tp[3]);
        let mut acc = chain(&wl[a][i][j], l);
        for p in 0..n {
            let cp = c.lower.get(p, i, j);
            if cp.is_zero() {
                continue;
            }
            for q in 0..n {
                acc = &acc - &prod(&prod(&gi[p][q], cp), &wl[a][q][l]);
            }
        }
        acc
    });
    let mut second = ResidualReport::new("(20) tail condition");
    for (tp, v) in t4.into_iter().zip(vals) {
        second.push(tp, v);
    }
    [first, second]
}

/// Derivative tables used by the coupling conditions.
struct CouplingData<'a> {
    n: usize,
    na: usize,
    sys: &'a EvolutionSystem,
    m: &'a Metric,
    c: &'a CTensor,
    t: &'a NonlocalTail,
    dgi: Vec<Matrix>,
    /// `dcu[h][(i*n + j)*n + k] = c^{ij}_{k,h}`
    dcu: Vec<Vec<Expr>>,
    /// `v3[i][j][k][l] = V^i_{jkl}`
    v3: Vec<Vec<Vec<Vec<Expr>>>>,
    /// `dw[a][i][k][h] = w^i_{ak,h}`
    dw: Vec<Vec<Vec<Vec<Expr>>>>,
}

impl<'a> CouplingData<'a> {
    fn new(sys: &'a EvolutionSystem, m: &'a Metric, c: &'a CTensor, t: &'a NonlocalTail) -> CouplingData<'a> {
        let n = m.dim();
        let frame = &m.frame;
        let idx: Vec<usize> = (0..n * n * n).collect();
        let grads: Vec<Vec<Expr>> = par::map(&idx, |&q| {
            let e = c.upper.get(q / (n * n), (q / n) % n, q % n);
            if e.is_zero() {
                vec![Expr::zero(); n]
            } else {
                frame.gradient(e)
            }
        });
        let dcu = (0..n).map(|h| grads.iter().map(|g| g[h].clone()).collect()).collect();
        let v3 = par::map(&sys.hess, |hi| {
            hi.iter()
                .map(|row| row.iter().map(|e| frame.gradient(e)).collect())
                .collect()
        });
        let dw = t
            .w
            .iter()
            .map(|w| par::map(w, |row| row.iter().map(|e| frame.gradient(e)).collect()))
            .collect();
        CouplingData {
            n,
            na: t.len(),
            sys,
            m,
            c,
            t,
            dgi: m.dginv(),
            dcu,
            v3,
            dw,
        }
    }

    fn v(&self, i: usize, j: usize) -> &Expr {
        &self.sys.jac[i][j]
    }

    fn v2(&self, i: usize, j: usize, k: usize) -> &Expr {
        &self.sys.hess[i][j][k]
    }

    fn cu(&self, i: usize, j: usize, k: usize) -> &Expr {
        self.c.upper.get(i, j, k)
    }

    fn dcu(&self, i: usize, j: usize, k: usize, h: usize) -> &Expr {
        &self.dcu[h][(i * self.n + j) * self.n + k]
    }

    fn e33(&self, i: usize, h: usize) -> Expr {
        let g = &self.m.ginv;
        sum((0..self.n).map(|j| &prod(self.v(i, j), &g[j][h]) - &prod(&g[i][j], self.v(h, j))))
    }

    fn e44(&self, i: usize, h: usize, l: usize) -> Expr {
        let n = self.n;
        let g = &self.m.ginv;
        let two = Expr::from_int(2);
        let mut acc = sum((0..n).map(|k| -&prod(&self.dgi[k][i][h], self.v(k, l))));
        for j in 0..n {
            acc = &acc - &prod(&two, &prod(&g[i][j], self.v2(h, j, l)));
            acc = &acc - &prod(self.cu(i, j, l), self.v(h, j));
            acc = &acc + &prod(self.v(i, j), &self.dgi[l][j][h]);
            acc = &acc + &prod(self.v(i, j), self.cu(j, h, l));
        }
        acc
    }

    fn e45(&self, i: usize, h: usize, l: usize) -> Expr {
        let g = &self.m.ginv;
        sum((0..self.n).map(|k| {
            let a = prod(&g[i][k], self.v2(h, k, l));
            let b = prod(self.cu(i, h, k), self.v(k, l));
            let c = prod(self.v(i, k), self.cu(k, h, l));
            &(&c - &a) - &b
        }))
    }

    /// `(rest, mixed)` with the family equal to `rest - mixed` as typeset and `rest + mixed`
    /// from the expansion, where `mixed` is the `V^i_j w^j w^h` tail group.
    fn e21_parts(&self, i: usize, h: usize, l: usize, m: usize) -> (Expr, Expr) {
        let n = self.n;
        let g = &self.m.ginv;
        let hf = half();
        let mut acc = Expr::zero();
        for j in 0..n {
            acc = &acc - &prod(&g[i][j], &self.v3[h][j][l][m]);
            let s1 = &prod(self.dcu(i, h, m, j), self.v(j, l)) + &prod(self.dcu(i, h, l, j), self.v(j, m));
            acc = &acc - &prod(&hf, &s1);
            acc = &acc - &prod(self.cu(i, h, j), self.v2(j, l, m));
            let s2 = &prod(self.cu(i, j, m), self.v2(h, j, l)) + &prod(self.cu(i, j, l), self.v2(h, j, m));
            acc = &acc - &prod(&hf, &s2);
            let s3 = &prod(self.v(i, j), self.dcu(j, h, m, l)) + &prod(self.v(i, j), self.dcu(j, h, l, m));
            acc = &acc + &prod(&hf, &s3);
        }
        let mut mixed = Expr::zero();
        for a in 0..self.na {
            for b in 0..self.na {
                let cab = &self.t.constants[a][b];
                if cab.is_zero() {
                    continue;
                }
                let (wa, wb) = (&self.t.w[a], &self.t.w[b]);
                let mut s = Expr::zero();
                let mut mx = Expr::zero();
                for k in 0..n {
                    let ww = &prod(&wa[i][l], &wb[k][m]) + &prod(&wa[i][m], &wb[k][l]);
                    s = &s + &prod(self.v(h, k), &ww);
                    let ww = &prod(&wa[k][l], &wb[h][m]) + &prod(&wa[k][m], &wb[h][l]);
                    mx = &mx + &prod(self.v(i, k), &ww);
                }
                let f = prod(&hf, cab);
                acc = &acc - &prod(&f, &s);
                mixed = &mixed + &prod(&f, &mx);
            }
        }
        (acc, mixed)
    }

    /// Family `(21)` over all index tuples, using its symmetry in `l, m`.
    fn table21(&self, name: &str, printed: bool) -> ResidualReport {
        let n = self.n;
        let half_tuples: Vec<Vec<usize>> = tuples(&[n, n, n, n]).into_iter().filter(|x| x[2] <= x[3]).collect();
        let values = par::map(&half_tuples, |x| {
            let (rest, mixed) = self.e21_parts(x[0], x[1], x[2], x[3]);
            if printed {
                &rest - &mixed
            } else {
                &rest + &mixed
            }
        });
        let mut at: BTreeMap<Vec<usize>, Expr> = half_tuples.into_iter().zip(values).collect();
        let mut r = ResidualReport::new(name);
        for x in tuples(&[n, n, n, n]) {
            let key = if x[2] <= x[3] { x.clone() } else { vec![x[0], x[1], x[3], x[2]] };
            let v = if x[2] < x[3] { at[&key].clone() } else { at.remove(&key).expect("tabulated") };
            r.push(x, v);
        }
        r
    }

    fn e42(&self, a: usize, i: usize, h: usize, m: usize) -> Expr {
        let w = &self.t.w[a];
        let dw = &self.dw[a];
        sum((0..self.n).map(|k| {
            let neg = sum([
                prod(&dw[i][h][k], self.v(k, m)),
                prod(&dw[i][m][k], self.v(k, h)),
                prod(&w[i][k], self.v2(k, m, h)),
                prod(&w[i][k], self.v2(k, h, m)),
            ]);
            let pos = &prod(self.v(i, k), &dw[k][m][h]) + &prod(self.v(i, k), &dw[k][h][m]);
            &pos - &neg
        }))
    }

    fn e43(&self, a: usize, i: usize, h: usize) -> Expr {
        let w = &self.t.w[a];
        sum((0..self.n).map(|k| &prod(self.v(i, k), &w[k][h]) - &prod(&w[i][k], self.v(k, h))))
    }
}

/// Names of the six coupling families, in report order.
pub const COUPLING_FAMILIES: [&str; 6] = ["(33)", "(44)", "(45)", "(21)", "(42)", "(43)"];

/// The six families of the coupling lemma; the `(21)` tail term carries the sign from the expansion.
pub fn check_coupling(sys: &EvolutionSystem, m: &Metric, c: &CTensor, t: &NonlocalTail) -> [ResidualReport; 6] {
    let d = CouplingData::new(sys, m, c, t);
    let n = d.n;
    let na = d.na;
    let r33 = ResidualReport::tabulate("(33) coupling", n, 2, |x| d.e33(x[0], x[1]).into());
    let r44 = ResidualReport::tabulate("(44) coupling", n, 3, |x| d.e44(x[0], x[1], x[2]).into());
    let r45 = ResidualReport::tabulate("(45) coupling", n, 3, |x| d.e45(x[0], x[1], x[2]).into());
    let r21 = d.table21("(21) coupling", false);
    let mut r42 = ResidualReport::new("(42) coupling");
    let t4 = tuples(&[na, n, n, n]);
    for (tp, v) in t4.iter().zip(par::map(&t4, |x| d.e42(x[0], x[1], x[2], x[3]))) {
        r42.push(tp.clone(), v);
    }
    let mut r43 = ResidualReport::new("(43) coupling");
    for tp in tuples(&[na, n, n]) {
        let v = d.e43(tp[0], tp[1], tp[2]);
        r43.push(tp, v);
    }
    [r33, r44, r45, r21, r42, r43]
}

/// The `(21)` family exactly as typeset.
pub fn check_printed_21(sys: &EvolutionSystem, m: &Metric, c: &CTensor, t: &NonlocalTail) -> ResidualReport {
    CouplingData::new(sys, m, c, t).table21("(21) as printed", true)
}

/// `B^i(p) = -g^{ij} p_{j,x} - c^{ij}_k u^k_x p_j - C^{ab} w^i_{ak} u^k_x r_b`.
pub fn operator_on_covector(m: &Metric, c: &CTensor, t: &NonlocalTail) -> Vec<JetExpr> {
    let n = m.dim();
    let na = t.len();
    (0..n)
        .map(|i| {
            let mut b = JetExpr::zero();
            for j in 0..n {
                b.add_term(JetMono::var(JetVar::P(j as u8, 1)), &-&m.ginv[i][j]);
                for k in 0..n {
                    let mono = JetMono::from_factors(vec![(JetVar::U(k as u8, 1), 1), (JetVar::P(j as u8, 0), 1)]);
                    b.add_term(mono, &-c.upper.get(i, j, k));
                }
            }
            for a in 0..na {
                for bb in 0..na {
                    let cab = &t.constants[a][bb];
                    if cab.is_zero() {
                        continue;
                    }
                    for k in 0..n {
                        let mono = JetMono::from_factors(vec![(JetVar::U(k as u8, 1), 1), (JetVar::R(bb as u8), 1)]);
                        b.add_term(mono, &-&prod(cab, &t.w[a][i][k]));
                    }
                }
            }
            b
        })
        .collect()
}

/// Coefficients of `l_F(B(p))`, collected into the six families, compared with the printed ones.
#[derive(Clone, Debug)]
pub struct CouplingOracle {
    /// Families as collected from the expansion, in printed normalization.
    pub derived: [ResidualReport; 6],
    /// `derived - printed` per family.
    pub agreement: [ResidualReport; 6],
    /// `derived - corrected` for the `(21)` family.
    pub corrected_21: ResidualReport,
    /// Monomials of the expansion outside every family.
    pub unclassified: ResidualReport,
}

impl CouplingOracle {
    pub fn agrees(&self) -> bool {
        self.agreement.iter().all(ResidualReport::passed) && self.unclassified.is_empty()
    }

    /// Families whose printed form disagrees with the expansion.
    pub fn discrepancies(&self) -> Vec<&str> {
        self.agreement
            .iter()
            .zip(COUPLING_FAMILIES)
            .filter(|(r, _)| !r.passed())
            .map(|(_, f)| f)
            .collect()
    }
}

/// Expands `l_F(B(p))` on the cotangent covering extended by the tail potentials.
pub fn coupling_expansion(
    sys: &EvolutionSystem,
    m: &Metric,
    c: &CTensor,
    t: &NonlocalTail,
) -> Result<Vec<JetExpr>, JetError> {
    let cov = sys.with_potentials(&t.w);
    let b = operator_on_covector(m, c, t);
    cov.linearize(&b)
}

pub fn coupling_oracle(
    sys: &EvolutionSystem,
    m: &Metric,
    c: &CTensor,
    t: &NonlocalTail,
) -> Result<CouplingOracle, JetError> {
    let expansion = coupling_expansion(sys, m, c, t)?;
    let d = CouplingData::new(sys, m, c, t);
    let n = d.n;
    let na = d.na;
    let mut unclassified = ResidualReport::new("unclassified monomials");
    // family -> index -> coefficient
    let mut found: [BTreeMap<Vec<usize>, Expr>; 6] = Default::default();
    for (i, comp) in expansion.iter().enumerate() {
        for (mono, coeff) in comp.terms() {
            use JetVar::*;
            let (fam, idx) = match mono.factors() {
                [(P(h, 2), 1)] => (0, vec![i, *h as usize]),
                [(U(l, 1), 1), (P(h, 1), 1)] => (1, vec![i, *h as usize, *l as usize]),
                [(U(l, 2), 1), (P(h, 0), 1)] => (2, vec![i, *h as usize, *l as usize]),
                [(U(l, 1), 1), (U(m, 1), 1), (P(h, 0), 1)] => (3, vec![i, *h as usize, *l as usize, *m as usize]),
                [(U(l, 1), 2), (P(h, 0), 1)] => (3, vec![i, *h as usize, *l as usize, *l as usize]),
                [(U(h, 1), 1), (U(m, 1), 1), (R(b), 1)] => (4, vec![*b as usize, i, *h as usize, *m as usize]),
                [(U(h, 1), 2), (R(b), 1)] => (4, vec![*b as usize, i, *h as usize, *h as usize]),
                [(U(h, 2), 1), (R(b), 1)] => (5, vec![*b as usize, i, *h as usize]),
                _ => {
                    unclassified.push(vec![i], JetExpr::term(mono.clone(), coeff.clone()));
                    continue;
                }
            };
            found[fam].insert(idx, coeff.clone());
        }
    }
    let get = |f: usize, idx: &[usize]| found[f].get(idx).cloned().unwrap_or_else(Expr::zero);
    let cmix = |b: usize, f: &dyn Fn(usize) -> Expr| sum((0..na).map(|a| prod(&t.constants[a][b], &f(a))));
    let two = Expr::from_int(2);
    let hf = half();

    let mut derived: [ResidualReport; 6] = COUPLING_FAMILIES.map(|f| ResidualReport::new(format!("{f} derived")));
    let mut agreement: [ResidualReport; 6] = COUPLING_FAMILIES.map(|f| ResidualReport::new(format!("{f} printed vs derived")));
    let mut record = |fam: usize, idx: Vec<usize>, dv: Expr, printed: Expr| {
        agreement[fam].push(idx.clone(), &dv - &printed);
        derived[fam].push(idx, dv);
    };
    for x in tuples(&[n, n]) {
        let p = d.e33(x[0], x[1]);
        record(0, x.clone(), get(0, &x), p);
    }
    for x in tuples(&[n, n, n]) {
        record(1, x.clone(), get(1, &x), d.e44(x[0], x[1], x[2]));
        record(2, x.clone(), get(2, &x), d.e45(x[0], x[1], x[2]));
    }
    let t21: Vec<Vec<usize>> = tuples(&[n, n, n, n]).into_iter().filter(|x| x[2] <= x[3]).collect();
    let p21 = par::map(&t21, |x| d.e21_parts(x[0], x[1], x[2], x[3]));
    let mut corrected_21 = ResidualReport::new("(21) sign-corrected vs derived");
    for (x, (rest, mixed)) in t21.into_iter().zip(p21) {
        let (p, q) = (&rest - &mixed, &rest + &mixed);
        let dv = get(3, &x);
        let norm = if x[2] < x[3] { &dv * &hf } else { dv };
        corrected_21.push(x.clone(), &norm - &q);
        record(3, x, norm, p);
    }
    for x in tuples(&[na, n, n, n]).into_iter().filter(|x| x[2] <= x[3]) {
        let (b, i, h, mm) = (x[0], x[1], x[2], x[3]);
        let p = cmix(b, &|a| d.e42(a, i, h, mm));
        let dv = get(4, &x);
        let norm = if h == mm { &dv * &two } else { dv };
        record(4, x, norm, p);
    }
    for x in tuples(&[na, n, n]) {
        let (b, i, h) = (x[0], x[1], x[2]);
        let p = cmix(b, &|a| d.e43(a, i, h));
        record(5, x.clone(), get(5, &x), p);
    }
    Ok(CouplingOracle {
        derived,
        agreement,
        corrected_21,
        unclassified,
    })
}

/// `l_F` of the flow `w^i_j u^j_x` on the system alone.
pub fn check_commuting(sys: &EvolutionSystem, w: &Matrix) -> Result<ResidualReport, JetError> {
    let phi = EvolutionSystem::flow_vector(w);
    let res = sys.linearize(&phi)?;
    let mut r = ResidualReport::new("commuting flow");
    for (i, e) in res.into_iter().enumerate() {
        r.push(vec![i], e);
    }
    Ok(r)
}

/// Outcome of [`derive_metric`].
#[derive(Clone, Debug)]
pub enum MetricOutcome {
    /// Unique after fixing `g_11 = 2`; `scale_freedom` free unknowns before.
    Unique { g: Matrix, scale_freedom: usize },
    Free { free: Vec<String> },
    Inconsistent,
}

#[derive(Clone, Debug)]
pub struct DerivedMetric {
    pub outcome: MetricOutcome,
    pub unknowns: Vec<String>,
    pub scalar_equations: usize,
    pub rank: usize,
    /// Every scalar equation evaluated at the solution.
    pub back_substitution: ResidualReport,
}

#[derive(Clone, Debug, Default)]
struct LinForm(BTreeMap<usize, Expr>);

impl LinForm {
    fn add_scaled(&mut self, o: &LinForm, s: &Expr) {
        if s.is_zero() {
            return;
        }
        for (&k, c) in &o.0 {
            let v = match self.0.get(&k) {
                Some(old) => old + &(c * s),
                None => c * s,
            };
            if v.is_zero() {
                self.0.remove(&k);
            } else {
                self.0.insert(k, v);
            }
        }
    }

    fn scaled(&self, s: &Expr) -> LinForm {
        let mut out = LinForm::default();
        out.add_scaled(self, s);
        out
    }
}

fn quadratic_monomials(vars: &[Var]) -> Vec<Monomial> {
    let mut out = vec![Monomial::one()];
    for &v in vars {
        out.push(Monomial::var(v, 1));
    }
    for (a, &v) in vars.iter().enumerate() {
        for &w in &vars[a..] {
            out.push(Monomial::var(v, 1).mul(&Monomial::var(w, 1)));
        }
    }
    out
}

/// Splits a linear form with rational-function coefficients into scalar equations.
fn scalar_equations(l: &LinForm) -> Vec<AffineExpr> {
    let mut den = Poly::one();
    for c in l.0.values() {
        let d = c.denominator();
        if d.is_one() {
            continue;
        }
        let g = hydroham_kernel::gcd(&den, &d);
        den = &den * &d.div_exact(&g).expect("gcd divides");
    }
    let dexpr = Expr::from_poly(den);
    let mut by_mono: BTreeMap<Monomial, AffineExpr> = BTreeMap::new();
    for (&k, c) in &l.0 {
        let num = &(c * &dexpr);
        debug_assert!(num.is_polynomial());
        for (mono, coef) in num.numerator().terms() {
            by_mono
                .entry(*mono)
                .or_default()
                .add_term(k, &Expr::from_integer(coef.clone()));
        }
    }
    by_mono.into_values().filter(|e| !e.is_zero()).collect()
}

/// Solves the lowered (33), (45), (44) for a metric with quadratic entries.
pub fn derive_metric(frame: &DirectFrame, fluxes: &[Expr], names: &[String]) -> DerivedMetric {
    let n = frame.dim();
    let vars = &frame.vars;
    let monos = quadratic_monomials(vars);
    let nm = monos.len();
    let entry = |i: usize, j: usize| {
        let (a, b) = if i <= j { (i, j) } else { (j, i) };
        a * n - a * (a + 1) / 2 + b
    };
    let n_entries = n * (n + 1) / 2;
    let mut unknowns = vec![String::new(); n_entries * nm];
    for i in 0..n {
        for j in i..n {
            for (k, mono) in monos.iter().enumerate() {
                let label: String = vars
                    .iter()
                    .zip(names)
                    .filter(|(v, _)| mono.exp(**v) > 0)
                    .map(|(v, name)| match mono.exp(*v) {
                        1 => format!("*{name}"),
                        e => format!("*{name}^{e}"),
                    })
                    .collect();
                unknowns[entry(i, j) * nm + k] = format!("g{}{}[1{}]", i + 1, j + 1, label);
            }
        }
    }
    let g: Vec<Vec<LinForm>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let e = entry(i, j);
                    LinForm(
                        monos
                            .iter()
                            .enumerate()
                            .map(|(k, m)| (e * nm + k, Expr::from_poly(Poly::monomial(*m, Int::ONE))))
                            .collect(),
                    )
                })
                .collect()
        })
        .collect();
    let dg: Vec<Vec<Vec<LinForm>>> = (0..n)
        .map(|k| {
            (0..n)
                .map(|i| {
                    (0..n)
                        .map(|j| {
                            let mut out = LinForm::default();
                            for (&id, c) in &g[i][j].0 {
                                let d = frame.partial(c, k);
                                if !d.is_zero() {
                                    out.0.insert(id, d);
                                }
                            }
                            out
                        })
                        .collect()
                })
                .collect()
        })
        .collect();
    let third = hydroham_kernel::expr::ratio(1, 3);
    let cl = |nn: usize, k: usize, m: usize| {
        let mut out = dg[k][m][nn].clone();
        out.add_scaled(&dg[m][k][nn], &Expr::from_int(-1));
        out.scaled(&third)
    };
    let jac: Vec<Vec<Expr>> = fluxes.iter().map(|v| frame.gradient(v)).collect();
    let hess: Vec<Vec<Vec<Expr>>> = jac.iter().map(|r| r.iter().map(|e| frame.gradient(e)).collect()).collect();

    let mut forms: Vec<LinForm> = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            let mut f = LinForm::default();
            for s in 0..n {
                f.add_scaled(&g[a][s], &jac[s][b]);
                f.add_scaled(&g[b][s], &-&jac[s][a]);
            }
            forms.push(f);
        }
    }
    let triples = tuples(&[n, n, n]);
    let f45 = par::map(&triples, |t| {
        let (a, b, l) = (t[0], t[1], t[2]);
        let mut f = LinForm::default();
        for h in 0..n {
            f.add_scaled(&g[b][h], &-&hess[h][a][l]);
        }
        for k in 0..n {
            f.add_scaled(&cl(b, a, k), &-&jac[k][l]);
            f.add_scaled(&cl(b, k, l), &jac[k][a]);
        }
        f
    });
    let f44 = par::map(&triples, |t| {
        let (a, b, l) = (t[0], t[1], t[2]);
        let mut f = LinForm::default();
        let two = Expr::from_int(-2);
        for k in 0..n {
            f.add_scaled(&dg[k][a][b], &jac[k][l]);
            f.add_scaled(&g[b][k], &(&two * &hess[k][a][l]));
            f.add_scaled(&cl(k, a, l), &-&jac[k][b]);
            f.add_scaled(&dg[l][k][b], &-&jac[k][a]);
            f.add_scaled(&cl(b, k, l), &jac[k][a]);
        }
        f
    });
    forms.extend(f45);
    forms.extend(f44);
    let eqs: Vec<AffineExpr> = par::map(&forms, scalar_equations).into_iter().flatten().collect();

    let total = unknowns.len();
    let mut ech = Echelon::new();
    let mut consistent = true;
    for e in &eqs {
        if !ech.insert(e.clone()) {
            consistent = false;
            break;
        }
    }
    let mut back = ResidualReport::new("metric back-substitution");
    if !consistent {
        return DerivedMetric {
            outcome: MetricOutcome::Inconsistent,
            unknowns,
            scalar_equations: eqs.len(),
            rank: ech.rank(),
            back_substitution: back,
        };
    }
    let rank = ech.rank();
    let freedom = total - rank;
    let scale_unknown = entry(0, 0) * nm;
    let mut fixed = ech.clone();
    let mut norm = AffineExpr::unknown(scale_unknown);
    norm.constant = Expr::from_int(-2);
    let normalizable = fixed.insert(norm);
    let outcome = match (normalizable, fixed.solution(total)) {
        (true, Solution::Unique(values)) => {
            for (k, e) in eqs.iter().enumerate() {
                back.push(vec![k], e.eval(&values));
            }
            let mut gm = vec![vec![Expr::zero(); n]; n];
            for i in 0..n {
                for j in 0..n {
                    let e = entry(i, j);
                    gm[i][j] = sum(monos.iter().enumerate().map(|(k, m)| {
                        prod(&values[e * nm + k], &Expr::from_poly(Poly::monomial(*m, Int::ONE)))
                    }));
                }
            }
            MetricOutcome::Unique {
                g: gm,
                scale_freedom: freedom,
            }
        }
        _ => match ech.solution(total) {
            Solution::Underdetermined { free, .. } => MetricOutcome::Free {
                free: free.iter().map(|&k| unknowns[k].clone()).collect(),
            },
            _ => MetricOutcome::Inconsistent,
        },
    };
    DerivedMetric {
        outcome,
        unknowns,
        scalar_equations: eqs.len(),
        rank,
        back_substitution: back,
    }
}
