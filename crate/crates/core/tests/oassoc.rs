use std::sync::OnceLock;

use hydroham_core::lax::char_poly;
use hydroham_core::oassoc::{build_bundle, run_case, Expect, OAssocBundle, OAssocError, CASES};
use hydroham_core::tensor::{det, identity, mat_mul};
use hydroham_kernel::{BigInt, BigRational, Expr, Var};

fn bundle() -> &'static OAssocBundle {
    static B: OnceLock<OAssocBundle> = OnceLock::new();
    B.get_or_init(|| build_bundle().expect("bundle builds"))
}

fn assert_met(case: &str) {
    let r = run_case(bundle(), case).unwrap();
    for c in &r.checks {
        assert!(c.met(), "{case}: {} expected {}, nonzero {}", c.report.name, c.expect.as_str(), c.report.nonzero());
    }
}

#[test]
fn viete_chart_roots_annihilate_the_characteristic_polynomial() {
    let b = bundle();
    let cp = char_poly(&b.lax).unwrap();
    for k in 0..3 {
        let mut subs: Vec<(Var, Expr)> = b.q_vars.iter().copied().zip(b.chart.q_of_u.iter().cloned()).collect();
        subs.push((b.lambda, Expr::var(b.u_vars[k])));
        let e = cp.substitute(&subs).unwrap();
        assert!(e.is_zero(), "root u{}", k + 1);
    }
}

#[test]
fn metric_determinant_is_minus_delta_squared() {
    let b = bundle();
    let d = det(&b.metric3.g).unwrap();
    let d2 = &b.delta * &b.delta;
    assert_eq!(d, -&d2);
}

#[test]
fn chart_jacobian_is_invertible() {
    let b = bundle();
    assert_eq!(mat_mul(&b.chart.j, &b.chart.jinv), identity(6));
}

#[test]
fn monge_metric_matches_numeric_evaluation_of_its_source() {
    // g33 = -2 (q1 + q4 q5) at a rational point
    let b = bundle();
    let r = |n: i64, d: i64| BigRational::new(BigInt::from(n), BigInt::from(d));
    let mut pt = vec![r(0, 1); b.ws_q.len()];
    for (k, v) in [(0, r(3, 2)), (3, r(-1, 3)), (4, r(5, 7))] {
        pt[k] = v;
    }
    let got = b.metric3_q.g[2][2].eval(&pt).unwrap();
    assert_eq!(got, r(-2, 1) * (r(3, 2) + r(-1, 3) * r(5, 7)));
}

#[test]
fn first_order_case() {
    assert_met("first-order");
}

#[test]
fn metric_case() {
    assert_met("metric");
}

#[test]
fn local_fail_case() {
    let r = run_case(bundle(), "local-fail").unwrap();
    assert!(r.met());
    let c27 = r.checks.iter().find(|c| c.report.name.starts_with("(27)")).unwrap();
    assert_eq!(c27.expect, Expect::Fail);
    assert!(c27.report.nonzero() > 0);
}

#[test]
fn nonlocal_case() {
    assert_met("nonlocal");
}

#[test]
fn zero_curvature_case() {
    assert_met("zero-curvature");
}

#[test]
fn densities_case_fails_only_on_the_exact_sum() {
    let r = run_case(bundle(), "densities").unwrap();
    let unmet: Vec<&str> = r.checks.iter().filter(|c| !c.met()).map(|c| c.report.name.as_str()).collect();
    assert_eq!(unmet, ["sum of the three first densities vanishes"]);
    assert!(r.check("sum of the three first densities is a total derivative").unwrap().met());
    assert!(r.notes.iter().any(|n| n == "h01: exact"));
}

#[test]
fn unknown_case_is_rejected() {
    assert!(matches!(run_case(bundle(), "nope"), Err(OAssocError::UnknownCase(_))));
    assert!(CASES.contains(&"theorem"));
}

#[test]
fn constants_are_those_of_the_theorem() {
    let b = bundle();
    let c: Vec<String> = b.constants.iter().map(ToString::to_string).collect();
    assert_eq!(c, ["2", "1", "2"]);
}
