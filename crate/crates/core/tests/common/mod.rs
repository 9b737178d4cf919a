#![allow(dead_code)]

use std::sync::Arc;

use hydroham_core::jet::{DirectFrame, EvolutionSystem, Frame, JetExpr, JetMono, JetSpace, JetVar};
use hydroham_core::tensor::{Matrix, Metric};
use hydroham_kernel::{BigInt, BigRational, Expr, Var, Workspace};
use proptest::prelude::*;

pub const N: usize = 2;

pub fn ws() -> Workspace {
    Workspace::with_symbols(&["u1", "u2"]).unwrap()
}

pub fn frame() -> Arc<dyn Frame> {
    Arc::new(DirectFrame::first(N))
}

pub fn space() -> JetSpace {
    JetSpace::new(frame(), vec!["u1".into(), "u2".into()])
}

pub fn u(i: usize) -> Expr {
    Expr::var(Var(i as u8))
}

pub fn pw(e: &Expr, k: u32) -> Expr {
    e.pow(k as i32).unwrap()
}

pub fn int(k: i64) -> Expr {
    Expr::from_int(k)
}

pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Polynomial in `u1, u2` of degree at most `deg` with small integer coefficients.
pub fn poly(deg: u32) -> impl Strategy<Value = Expr> {
    let monos: Vec<(u32, u32)> = (0..=deg).flat_map(|a| (0..=deg - a).map(move |b| (a, b))).collect();
    let len = monos.len();
    prop::collection::vec(-3i64..4, len).prop_map(move |cs| {
        let mut e = Expr::zero();
        for (c, &(a, b)) in cs.iter().zip(&monos) {
            if *c != 0 {
                e = &e + &(&int(*c) * &(&pw(&u(0), a) * &pw(&u(1), b)));
            }
        }
        e
    })
}

/// `a / (1 + u1^2 + u2^2)`-type coefficient, nonsingular on the reals.
pub fn coeff() -> impl Strategy<Value = Expr> {
    (poly(2), 0i64..3).prop_map(|(p, k)| {
        let den = &(&int(1) + &(&int(k) * &pw(&u(0), 2))) + &pw(&u(1), 2);
        &p / &den
    })
}

pub fn jet_var() -> impl Strategy<Value = JetVar> {
    (0u8..N as u8, 1u8..3).prop_map(|(i, k)| JetVar::U(i, k))
}

/// Sum of a few terms, each a coefficient times a product of one or two jet variables.
pub fn jet_expr() -> impl Strategy<Value = JetExpr> {
    prop::collection::vec((coeff(), prop::collection::vec(jet_var(), 0..3)), 1..4).prop_map(|terms| {
        let mut e = JetExpr::zero();
        for (c, vars) in terms {
            let m = vars.into_iter().fold(JetMono::one(), |m, v| m.mul(&JetMono::var(v)));
            e.add_term(m, &c);
        }
        e
    })
}

pub fn system() -> impl Strategy<Value = EvolutionSystem> {
    (poly(3), poly(3)).prop_map(|(a, b)| EvolutionSystem::new(space(), vec![a, b]))
}

/// Symmetric metric: constant nondegenerate diagonal plus a small quadratic perturbation.
pub fn metric_matrix() -> impl Strategy<Value = Matrix> {
    ((1i64..4, 1i64..4), poly(2), poly(2), poly(2)).prop_map(|((a, b), p, q, r)| {
        vec![
            vec![&int(a) + &p, q.clone()],
            vec![q, &int(-b) + &r],
        ]
    })
}

pub fn metric(g: Matrix) -> Option<Metric> {
    Metric::new(g, frame()).ok()
}
