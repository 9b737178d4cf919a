//! Metrics, connection-type tensors and changes of chart.

use std::sync::Arc;

use hydroham_kernel::{ArithError, Expr, Var};
use thiserror::Error;

use crate::jet::{DirectFrame, Frame, ParamFrame};
use crate::par;

pub type Matrix = Vec<Vec<Expr>>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TensorError {
    #[error("matrix is singular")]
    Singular,
    #[error("matrix is not square")]
    NotSquare,
    #[error("|det g| is not a perfect square of a rational function")]
    NoSquareRoot,
    #[error(transparent)]
    Arith(#[from] ArithError),
}

pub fn zeros(n: usize, m: usize) -> Matrix {
    vec![vec![Expr::zero(); m]; n]
}

pub fn identity(n: usize) -> Matrix {
    let mut m = zeros(n, n);
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = Expr::one();
    }
    m
}

pub fn transpose(a: &Matrix) -> Matrix {
    let n = a.len();
    let m = if n == 0 { 0 } else { a[0].len() };
    (0..m).map(|j| (0..n).map(|i| a[i][j].clone()).collect()).collect()
}

pub fn mat_mul(a: &Matrix, b: &Matrix) -> Matrix {
    let inner = b.len();
    let cols = if inner == 0 { 0 } else { b[0].len() };
    let rows: Vec<usize> = (0..a.len()).collect();
    par::map(&rows, |&i| {
        (0..cols)
            .map(|j| {
                let mut acc = Expr::zero();
                for k in 0..inner {
                    if !a[i][k].is_zero() && !b[k][j].is_zero() {
                        acc = &acc + &(&a[i][k] * &b[k][j]);
                    }
                }
                acc
            })
            .collect()
    })
}

pub fn mat_sub(a: &Matrix, b: &Matrix) -> Matrix {
    a.iter()
        .zip(b)
        .map(|(r, s)| r.iter().zip(s).map(|(x, y)| x - y).collect())
        .collect()
}

pub fn map_matrix(a: &Matrix, f: impl Fn(&Expr) -> Expr + Sync + Send) -> Matrix {
    par::map(a, |row| row.iter().map(&f).collect())
}

pub fn try_map_matrix(a: &Matrix, f: impl Fn(&Expr) -> Result<Expr, ArithError> + Sync + Send) -> Result<Matrix, ArithError> {
    par::try_map(a, |row| row.iter().map(&f).collect())
}

fn pick_pivot(a: &Matrix, col: usize, from: usize) -> Option<usize> {
    (from..a.len())
        .filter(|&r| !a[r][col].is_zero())
        .min_by_key(|&r| (!a[r][col].is_constant(), a[r][col].size()))
}

/// Gauss-Jordan inverse over the rational-function field.
pub fn inverse(m: &Matrix) -> Result<Matrix, TensorError> {
    let n = m.len();
    if m.iter().any(|r| r.len() != n) {
        return Err(TensorError::NotSquare);
    }
    let mut a = m.clone();
    let mut inv = identity(n);
    for col in 0..n {
        let p = pick_pivot(&a, col, col).ok_or(TensorError::Singular)?;
        a.swap(col, p);
        inv.swap(col, p);
        let s = a[col][col].inv()?;
        a[col] = a[col].iter().map(|x| x * &s).collect();
        inv[col] = inv[col].iter().map(|x| x * &s).collect();
        let (prow, pinv) = (a[col].clone(), inv[col].clone());
        for r in 0..n {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let f = a[r][col].clone();
            for j in 0..n {
                if !prow[j].is_zero() {
                    a[r][j] = &a[r][j] - &(&f * &prow[j]);
                }
                if !pinv[j].is_zero() {
                    inv[r][j] = &inv[r][j] - &(&f * &pinv[j]);
                }
            }
        }
    }
    Ok(inv)
}

/// Determinant by fraction-field elimination.
pub fn det(m: &Matrix) -> Result<Expr, TensorError> {
    let n = m.len();
    if m.iter().any(|r| r.len() != n) {
        return Err(TensorError::NotSquare);
    }
    let mut a = m.clone();
    let mut d = Expr::one();
    for col in 0..n {
        let Some(p) = pick_pivot(&a, col, col) else {
            return Ok(Expr::zero());
        };
        if p != col {
            a.swap(col, p);
            d = -&d;
        }
        d = &d * &a[col][col];
        let s = a[col][col].inv()?;
        for r in col + 1..n {
            if a[r][col].is_zero() {
                continue;
            }
            let f = &a[r][col] * &s;
            for j in col..n {
                if !a[col][j].is_zero() {
                    a[r][j] = &a[r][j] - &(&f * &a[col][j]);
                }
            }
        }
    }
    Ok(d)
}

/// Rank-3 array `t[i][j][k]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Tensor3 {
    pub n: usize,
    data: Vec<Expr>,
}

impl Tensor3 {
    pub fn zeros(n: usize) -> Tensor3 {
        Tensor3 {
            n,
            data: vec![Expr::zero(); n * n * n],
        }
    }

    pub fn from_fn(n: usize, f: impl Fn(usize, usize, usize) -> Expr + Sync + Send) -> Tensor3 {
        let idx: Vec<usize> = (0..n * n * n).collect();
        let data = par::map(&idx, |&t| f(t / (n * n), (t / n) % n, t % n));
        Tensor3 { n, data }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> &Expr {
        &self.data[(i * self.n + j) * self.n + k]
    }

    pub fn set(&mut self, i: usize, j: usize, k: usize, v: Expr) {
        let n = self.n;
        self.data[(i * n + j) * n + k] = v;
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Expr::is_zero)
    }
}

/// Covariant metric `g_{ij}` with its inverse, in a frame.
#[derive(Clone)]
pub struct Metric {
    pub g: Matrix,
    pub ginv: Matrix,
    pub frame: Arc<dyn Frame>,
    /// `dg[k][i][j] = g_{ij,k}`
    pub dg: Vec<Matrix>,
}

impl std::fmt::Debug for Metric {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Metric").field("g", &self.g).finish_non_exhaustive()
    }
}

impl Metric {
    pub fn new(g: Matrix, frame: Arc<dyn Frame>) -> Result<Metric, TensorError> {
        let n = g.len();
        if g.iter().any(|r| r.len() != n) || frame.dim() != n {
            return Err(TensorError::NotSquare);
        }
        let ginv = inverse(&g)?;
        let ks: Vec<usize> = (0..n).collect();
        let dg = par::map(&ks, |&k| {
            (0..n)
                .map(|i| (0..n).map(|j| frame.partial(&g[i][j], k)).collect())
                .collect()
        });
        Ok(Metric { g, ginv, frame, dg })
    }

    pub fn dim(&self) -> usize {
        self.g.len()
    }

    pub fn is_symmetric(&self) -> bool {
        let n = self.dim();
        (0..n).all(|i| (i + 1..n).all(|j| self.g[i][j] == self.g[j][i]))
    }

    /// `g^{ij}_{,k}`
    pub fn dginv(&self) -> Vec<Matrix> {
        let n = self.dim();
        let ks: Vec<usize> = (0..n).collect();
        par::map(&ks, |&k| map_matrix(&self.ginv, |e| self.frame.partial(e, k)))
    }

    /// `c_{nkm} = (g_{mn,k} - g_{kn,m}) / 3`.
    pub fn c_lower(&self) -> Tensor3 {
        let third = hydroham_kernel::expr::ratio(1, 3);
        Tensor3::from_fn(self.dim(), |n, k, m| &(&self.dg[k][m][n] - &self.dg[m][k][n]) * &third)
    }

    /// `c^{pq}_k = g^{qi} g^{pj} c_{ijk}`.
    pub fn c_upper(&self, cl: &Tensor3) -> Tensor3 {
        let n = self.dim();
        let gi = &self.ginv;
        Tensor3::from_fn(n, |p, q, k| {
            let mut acc = Expr::zero();
            for i in 0..n {
                if gi[q][i].is_zero() {
                    continue;
                }
                for j in 0..n {
                    if gi[p][j].is_zero() || cl.get(i, j, k).is_zero() {
                        continue;
                    }
                    acc = &acc + &(&(&gi[q][i] * &gi[p][j]) * cl.get(i, j, k));
                }
            }
            acc
        })
    }

    /// `c^s_{ml} = g^{sp} c_{pml}`.
    pub fn c_mixed(&self, cl: &Tensor3) -> Tensor3 {
        let n = self.dim();
        Tensor3::from_fn(n, |s, m, l| {
            let mut acc = Expr::zero();
            for p in 0..n {
                if !self.ginv[s][p].is_zero() {
                    acc = &acc + &(&self.ginv[s][p] * cl.get(p, m, l));
                }
            }
            acc
        })
    }

    /// Lowers the first index of a `(1,1)` tensor: `g_{is} w^s_j`.
    pub fn lower(&self, w: &Matrix) -> Matrix {
        mat_mul(&self.g, w)
    }

    pub fn det(&self) -> Result<Expr, TensorError> {
        det(&self.g)
    }

    /// `sqrt|det g|`, choosing the sign of `det g` that admits an exact root.
    pub fn delta(&self) -> Result<(Expr, i32), TensorError> {
        let d = self.det()?;
        if let Some(r) = d.sqrt() {
            return Ok((r, 1));
        }
        (-&d).sqrt().map(|r| (r, -1)).ok_or(TensorError::NoSquareRoot)
    }
}

/// Map `u -> q(u)` between two charts, with its Jacobian.
#[derive(Clone, Debug)]
pub struct ChartMap {
    pub params: Vec<Var>,
    pub q_of_u: Vec<Expr>,
    /// `j[i][s] = dq^i/du^s`
    pub j: Matrix,
    pub jinv: Matrix,
}

impl ChartMap {
    pub fn new(params: Vec<Var>, q_of_u: Vec<Expr>) -> Result<ChartMap, TensorError> {
        let j: Matrix = q_of_u
            .iter()
            .map(|q| params.iter().map(|&v| q.diff(v)).collect())
            .collect();
        let jinv = inverse(&j)?;
        Ok(ChartMap { params, q_of_u, j, jinv })
    }

    pub fn dim(&self) -> usize {
        self.q_of_u.len()
    }

    /// Frame of `q`-coordinates parametrized by `u`.
    pub fn param_frame(&self) -> ParamFrame {
        ParamFrame {
            params: self.params.clone(),
            jinv: self.jinv.clone(),
        }
    }

    pub fn source_frame(&self) -> DirectFrame {
        DirectFrame::new(self.params.clone())
    }

    /// Substitutes `q = q(u)` into an expression written in the `q`-workspace.
    pub fn pullback(&self, e: &Expr, q_vars: &[Var]) -> Result<Expr, ArithError> {
        let subs: Vec<(Var, Expr)> = q_vars.iter().copied().zip(self.q_of_u.iter().cloned()).collect();
        e.substitute(&subs)
    }

    pub fn pullback_matrix(&self, m: &Matrix, q_vars: &[Var]) -> Result<Matrix, ArithError> {
        try_map_matrix(m, |e| self.pullback(e, q_vars))
    }

    /// A `(1,1)` tensor from `u`-components to `q`-components: `J w J^{-1}`.
    pub fn transform_flow(&self, w: &Matrix) -> Matrix {
        mat_mul(&mat_mul(&self.j, w), &self.jinv)
    }

    /// Contravariant vector components `J v`.
    pub fn push_vector(&self, v: &[Expr]) -> Vec<Expr> {
        self.j
            .iter()
            .map(|row| row.iter().zip(v).fold(Expr::zero(), |acc, (a, b)| &acc + &(a * b)))
            .collect()
    }
}
