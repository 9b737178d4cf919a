mod common;

use std::collections::BTreeMap;

use common::*;
use hydroham_core::jet::{EvolutionSystem, JetExpr, JetMono, JetVar};
use hydroham_core::lax::{
    char_poly, flows_from_density, is_quasihomogeneous, match_density, zero_curvature, DensityMatch, LaxPair, Series,
};
use hydroham_core::tensor::{identity, zeros};
use hydroham_kernel::{Expr, Var, Workspace};
use proptest::prelude::*;

fn lambda_ws() -> (Workspace, Var) {
    let ws = Workspace::with_symbols(&["u1", "u2", "lambda"]).unwrap();
    (ws, Var(2))
}

#[test]
fn zero_matrix_has_characteristic_polynomial_lambda_cubed() {
    let (_, lam) = lambda_ws();
    let l = LaxPair { lambda: lam, a: zeros(3, 3), b: zeros(3, 3) };
    assert_eq!(char_poly(&l).unwrap(), pw(&Expr::var(lam), 3));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn companion_matrix_recovers_its_coefficients(c0 in -5i64..6, c1 in -5i64..6, c2 in -5i64..6) {
        let (_, lam) = lambda_ws();
        let (z, o) = (Expr::zero(), Expr::one());
        let a = vec![
            vec![z.clone(), o.clone(), z.clone()],
            vec![z.clone(), z.clone(), o],
            vec![int(-c0), int(-c1), int(-c2)],
        ];
        let l = LaxPair { lambda: lam, a, b: zeros(3, 3) };
        let x = Expr::var(lam);
        let expect = &(&(&pw(&x, 3) + &(&int(c2) * &pw(&x, 2))) + &(&int(c1) * &x)) + &int(c0);
        prop_assert_eq!(char_poly(&l).unwrap(), expect);
    }

    #[test]
    fn density_weight_is_preserved_by_total_x(e in jet_expr()) {
        let s = space();
        let mut by_weight: BTreeMap<u32, JetExpr> = BTreeMap::new();
        for (m, c) in e.terms() {
            by_weight.entry(m.x_weight()).or_default().add_term(m.clone(), c);
        }
        for (w, part) in by_weight {
            prop_assert!(is_quasihomogeneous(&part, w));
            let d = s.total_x(&part).unwrap();
            prop_assert!(d.is_zero() || is_quasihomogeneous(&d, w + 1));
        }
    }

    #[test]
    fn adding_a_total_derivative_keeps_the_density_class(e in jet_expr(), f in jet_expr()) {
        let s = space();
        let g = &e + &s.total_x(&f).unwrap();
        let m = match_density(&s, &g, &e).unwrap();
        prop_assert!(m != DensityMatch::Mismatch);
    }
}

#[test]
fn commuting_constant_pair_is_flat() {
    let (_, lam) = lambda_ws();
    let sys = EvolutionSystem::new(space(), vec![u(0), u(1)]);
    let a = vec![vec![int(1), int(2), int(0)], vec![int(0), int(1), int(0)], vec![int(0), int(0), int(3)]];
    let l = LaxPair { lambda: lam, a: a.clone(), b: a };
    assert!(zero_curvature(&l, &sys).unwrap().passed());
    let mut b = identity(3);
    b[1][0] = int(1);
    let l = LaxPair { lambda: lam, a: l.a, b };
    assert!(!zero_curvature(&l, &sys).unwrap().passed());
}

#[test]
fn total_derivative_density_gives_the_zero_flow() {
    let s = space();
    let gt = vec![vec![int(1), int(2)], vec![int(2), int(-1)]];
    let h = JetExpr::constant(u(0));
    assert_eq!(flows_from_density(&s, &h, &gt).unwrap(), zeros(2, 2));
}

#[test]
fn first_order_density_gives_a_hydrodynamic_flow() {
    let s = space();
    let gt = identity(2);
    // h = u1 u2_x: delta h / delta u = (u2_x, -u1_x)
    let h = JetExpr::term(JetMono::var(JetVar::U(1, 1)), u(0));
    let w = flows_from_density(&s, &h, &gt).unwrap();
    assert_eq!(w, vec![vec![int(0), int(1)], vec![int(-1), int(0)]]);
}

#[test]
fn series_coefficients_default_to_zero() {
    let mut t = BTreeMap::new();
    t.insert(1, JetExpr::constant(u(0)));
    let s = Series::from_terms(t);
    assert_eq!(s.coeff(1), JetExpr::constant(u(0)));
    assert!(s.coeff(0).is_zero());
}
