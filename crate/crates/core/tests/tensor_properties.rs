mod common;

use common::*;
use hydroham_core::conditions::{check_local_third_order, check_nonlocal_third_order, CTensor, NonlocalTail};
use hydroham_core::tensor::{identity, inverse, mat_mul, transpose, ChartMap, Matrix};
use hydroham_kernel::Expr;
use proptest::prelude::*;

fn skew(a: &Expr) -> Matrix {
    vec![vec![Expr::zero(), a.clone()], vec![-a, Expr::zero()]]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn inverse_is_two_sided(g in metric_matrix()) {
        let Some(m) = metric(g) else { return Ok(()) };
        prop_assert_eq!(mat_mul(&m.g, &m.ginv), identity(N));
        prop_assert_eq!(mat_mul(&m.ginv, &m.g), identity(N));
    }

    #[test]
    fn raising_then_lowering_recovers_c(g in metric_matrix()) {
        let Some(m) = metric(g) else { return Ok(()) };
        let c = CTensor::from_metric(&m);
        for i in 0..N {
            for j in 0..N {
                for k in 0..N {
                    let mut back = Expr::zero();
                    let mut mixed = Expr::zero();
                    for p in 0..N {
                        mixed = &mixed + &(&m.g[i][p] * c.mixed.get(p, j, k));
                        for q in 0..N {
                            back = &back + &(&(&m.g[i][q] * &m.g[j][p]) * c.upper.get(p, q, k));
                        }
                    }
                    prop_assert_eq!(&back, c.lower.get(i, j, k));
                    prop_assert_eq!(&mixed, c.lower.get(i, j, k));
                }
            }
        }
    }

    #[test]
    fn c_from_a_symmetric_metric_is_skew_in_the_outer_pair(g in metric_matrix()) {
        let Some(m) = metric(g) else { return Ok(()) };
        let c = CTensor::from_metric(&m);
        for i in 0..N {
            for j in 0..N {
                for k in 0..N {
                    prop_assert_eq!(c.lower.get(i, j, k), &-c.lower.get(i, k, j));
                }
            }
        }
        let [sym, c28, _, _] = check_local_third_order(&m, &c);
        prop_assert!(sym.passed() && c28.passed());
    }

    #[test]
    fn skew_tails_pass_and_symmetric_parts_fail(g in metric_matrix(), a in coeff(), s in 1i64..4) {
        let Some(m) = metric(g) else { return Ok(()) };
        if a.is_zero() {
            return Ok(());
        }
        let c = CTensor::from_metric(&m);
        let w = mat_mul(&m.ginv, &skew(&a));
        let t = NonlocalTail::new(vec![vec![int(1)]], vec![w.clone()]);
        prop_assert!(check_nonlocal_third_order(&m, &c, &t)[0].passed());
        let mut low = skew(&a);
        low[0][0] = int(s);
        let t = NonlocalTail::new(vec![vec![int(1)]], vec![mat_mul(&m.ginv, &low)]);
        prop_assert!(!check_nonlocal_third_order(&m, &c, &t)[0].passed());
    }

    #[test]
    fn chart_jacobians_are_inverse(a in 1i64..4, b in -3i64..4) {
        // q1 = a u1 + u2^2, q2 = u2 + b u1^2 u2 is invertible near the origin
        let q = vec![&(&int(a) * &u(0)) + &pw(&u(1), 2), &u(1) + &(&int(b) * &(&pw(&u(0), 2) * &u(1)))];
        let ch = ChartMap::new(vec![hydroham_kernel::Var(0), hydroham_kernel::Var(1)], q).unwrap();
        prop_assert_eq!(mat_mul(&ch.j, &ch.jinv), identity(N));
        prop_assert_eq!(inverse(&ch.jinv).unwrap(), ch.j.clone());
    }
}

#[test]
fn constant_diagonal_metric_passes_every_local_condition() {
    let m = metric(vec![vec![int(2), Expr::zero()], vec![Expr::zero(), int(-5)]]).unwrap();
    let c = CTensor::from_metric(&m);
    assert!(c.lower.is_zero());
    for r in check_local_third_order(&m, &c) {
        assert!(r.passed(), "{}", r.name);
    }
}

#[test]
fn asymmetric_metric_fails_symmetry() {
    let m = metric(vec![vec![int(1), u(0)], vec![Expr::zero(), int(1)]]).unwrap();
    assert!(!m.is_symmetric());
    let c = CTensor::from_metric(&m);
    let [sym, ..] = check_local_third_order(&m, &c);
    assert_eq!(sym.nonzero(), 2);
    assert_eq!(sym.first_nonzero().unwrap().0, &[0, 1]);
}

#[test]
fn transpose_of_symmetric_metric_is_itself() {
    let g = vec![vec![pw(&u(0), 2), u(1)], vec![u(1), int(3)]];
    assert_eq!(transpose(&g), g);
}
