#![allow(clippy::needless_range_loop)]

use hydroham_kernel::{
    parse, solve_linear, AffineExpr, BigInt, BigRational, Expr, Int, LinearSystem, Monomial,
    Poly, Solution, Var, Workspace,
};
use num_traits::{One, Zero};
use proptest::prelude::*;

const NVARS: u8 = 3;
const POINTS: usize = 32;
/// Agreeing points required per operation; poles may remove a few.
const MIN_HITS: usize = 20;

fn poly_strategy() -> impl Strategy<Value = Poly> {
    prop::collection::vec(((0u8..3, 0u8..3, 0u8..2), -6i64..7), 1..5).prop_map(|terms| {
        Poly::from_terms(
            terms
                .into_iter()
                .map(|((a, b, c), k)| {
                    let m = Monomial::one()
                        .with_exp(Var(0), a)
                        .with_exp(Var(1), b)
                        .with_exp(Var(2), c);
                    (m, Int::from(k))
                })
                .collect(),
        )
    })
}

fn expr_strategy() -> impl Strategy<Value = Expr> {
    (poly_strategy(), poly_strategy(), poly_strategy()).prop_map(|(n, d1, d2)| {
        let one = Poly::one();
        let d = if d1.is_zero() { one.clone() } else { d1 };
        let d = if d2.is_zero() { d } else { &d * &(&d2 + &Poly::var(Var(2))) };
        let d = if d.is_zero() { one } else { d };
        &Expr::from_poly(n) / &Expr::from_poly(d)
    })
}

fn points(seed: u64) -> Vec<Vec<BigRational>> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
    (0..POINTS)
        .map(|_| {
            (0..NVARS)
                .map(|_| {
                    BigRational::new(
                        BigInt::from(rng.gen_range(-40i64..41)),
                        BigInt::from(rng.gen_range(1i64..13)),
                    )
                })
                .collect()
        })
        .collect()
}

/// Value and derivative along `v` of a polynomial, by forward-mode dual numbers.
fn dual_poly(p: &Poly, pt: &[BigRational], v: usize) -> (BigRational, BigRational) {
    let mut val = BigRational::zero();
    let mut der = BigRational::zero();
    for (m, c) in p.terms() {
        let (mut a, mut b) = (BigRational::from_integer(c.to_bigint()), BigRational::zero());
        for (i, &e) in m.exps().iter().enumerate().take(NVARS as usize) {
            for _ in 0..e {
                let (x, dx) = (
                    pt[i].clone(),
                    if i == v { BigRational::one() } else { BigRational::zero() },
                );
                let na = &a * &x;
                let nb = &b * &x + &a * &dx;
                a = na;
                b = nb;
            }
        }
        val += a;
        der += b;
    }
    (val, der)
}

fn dual_expr(e: &Expr, pt: &[BigRational], v: usize) -> Option<(BigRational, BigRational)> {
    let (n, dn) = dual_poly(e.numerator(), pt, v);
    let (d, dd) = dual_poly(&e.denominator(), pt, v);
    if d.is_zero() {
        return None;
    }
    Some((&n / &d, (&dn * &d - &n * &dd) / (&d * &d)))
}

fn check_binary(a: &Expr, b: &Expr, r: &Expr, op: fn(&BigRational, &BigRational) -> Option<BigRational>) {
    let mut hits = 0;
    for pt in points(7) {
        let (Ok(x), Ok(y)) = (a.eval(&pt), b.eval(&pt)) else { continue };
        let Some(expect) = op(&x, &y) else { continue };
        let Ok(got) = r.eval(&pt) else { continue };
        assert_eq!(got, expect);
        hits += 1;
    }
    assert!(hits >= MIN_HITS, "{hits} usable points");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn add_then_sub_is_canonical(a in expr_strategy(), b in expr_strategy()) {
        let r = &(&a + &b) - &b;
        prop_assert_eq!(r.canonical(), a.canonical());
        let q = &(&a * &b) - &(&b * &a);
        prop_assert!(q.is_zero());
    }

    #[test]
    fn numeric_oracle_agrees(a in expr_strategy(), b in expr_strategy()) {
        check_binary(&a, &b, &(&a + &b), |x, y| Some(x + y));
        check_binary(&a, &b, &(&a - &b), |x, y| Some(x - y));
        check_binary(&a, &b, &(&a * &b), |x, y| Some(x * y));
        if !b.is_zero() {
            check_binary(&a, &b, &(&a / &b), |x, y| if y.is_zero() { None } else { Some(x / y) });
        }
    }

    #[test]
    fn diff_matches_dual_numbers(a in expr_strategy(), v in 0usize..3) {
        let d = a.diff(Var(v as u8));
        let mut hits = 0;
        for pt in points(11) {
            let Some((_, expect)) = dual_expr(&a, &pt, v) else { continue };
            let Ok(got) = d.eval(&pt) else { continue };
            prop_assert_eq!(got, expect);
            hits += 1;
        }
        prop_assert!(hits >= 20);
    }

    #[test]
    fn diff_is_linear_and_leibniz(a in expr_strategy(), b in expr_strategy(), v in 0u8..3) {
        let v = Var(v);
        let sum = (&a + &b).diff(v);
        prop_assert_eq!(sum, &a.diff(v) + &b.diff(v));
        let prod = (&a * &b).diff(v);
        prop_assert_eq!(prod, &(&a.diff(v) * &b) + &(&a * &b.diff(v)));
    }

    #[test]
    fn print_parse_roundtrip(a in expr_strategy()) {
        let ws = Workspace::with_symbols(&["x", "y", "z"]).unwrap();
        let text = ws.print(&a);
        let back = parse(&text, &ws).unwrap();
        prop_assert_eq!(&back, &a);
        prop_assert_eq!(ws.print(&back), text);
    }

    #[test]
    fn sqrt_of_square(a in expr_strategy()) {
        let sq = &a * &a;
        let r = sq.sqrt().expect("perfect square");
        prop_assert!(r == a || r == -&a);
        let shifted = &sq + &Expr::from_int(2);
        if let Some(r) = shifted.sqrt() {
            prop_assert_eq!(&r * &r, shifted);
        }
    }

    #[test]
    fn solutions_back_substitute(rows in prop::collection::vec(prop::collection::vec(-4i64..5, 4), 1..5), a in expr_strategy()) {
        let mut ls = LinearSystem::new((0..3).map(|i| format!("x{i}")).collect());
        for r in &rows {
            let mut e = AffineExpr::constant(&Expr::from_int(r[3]) * &a);
            for j in 0..3 {
                e.add_term(j, &Expr::from_int(r[j]));
            }
            ls.push(e);
        }
        match solve_linear(&ls) {
            Solution::Unique(values) => {
                for e in &ls.equations {
                    prop_assert!(e.eval(&values).is_zero());
                }
            }
            Solution::Underdetermined { general, .. } => {
                // Any choice of free values must satisfy every equation.
                let pick: Vec<Expr> = (0..3).map(|j| Expr::from_int(j as i64 + 2)).collect();
                let values: Vec<Expr> = general.iter().map(|g| g.eval(&pick)).collect();
                for e in &ls.equations {
                    prop_assert!(e.eval(&values).is_zero());
                }
            }
            Solution::Inconsistent { .. } => {}
        }
    }
}

#[test]
fn documented_examples() {
    let ws = Workspace::with_symbols(&["q1", "q2", "q3", "q4", "q5", "q6", "u1", "u2"]).unwrap();
    let p = |s: &str| parse(s, &ws).unwrap();
    assert!(p("0").is_zero());
    let c = p("q3*q6 - q4*q5 - q1");
    assert!(c.is_polynomial());
    assert_eq!(c.numerator().len(), 3);
    let f = p("(q2 + q4*q6)/q5");
    assert_eq!(f.denominator(), Poly::var(ws.lookup("q5").unwrap()));
    assert_eq!(p("((u1)^2 - (u2)^2) / (u1 - u2)"), p("u1 + u2"));
    assert_eq!(p("(q1*q5)/q5 + 0"), p("q1"));
    assert!((&f / &f).is_one());
    let q5 = ws.lookup("q5").unwrap();
    assert_eq!(p("2*(q5)^2").diff(q5), p("4*q5"));
    assert_eq!(p("-2*(q1 + q4*q5)").diff(ws.lookup("q1").unwrap()), p("-2"));
    assert!(p("7").diff(q5).is_zero());
    let mut pt = vec![BigRational::zero(); ws.len()];
    pt[2] = BigRational::from_integer(1.into());
    pt[5] = BigRational::from_integer(2.into());
    assert_eq!(p("q3+q6").eval(&pt).unwrap(), BigRational::from_integer(3.into()));
    assert!(p("1/q5").eval(&pt).is_err());
}

#[test]
fn from_exprs_extracts_coefficients() {
    let ws = Workspace::with_symbols(&["x", "y", "t"]).unwrap();
    let p = |s: &str| parse(s, &ws).unwrap();
    let unknowns = [ws.lookup("x").unwrap(), ws.lookup("y").unwrap()];
    let names = vec!["x".to_string(), "y".to_string()];
    let ls = LinearSystem::from_exprs(&[p("t*x + y - 1"), p("x - y")], &unknowns, names.clone()).unwrap();
    match ls.solve() {
        Solution::Unique(v) => {
            assert_eq!(v[0], p("1/(t + 1)"));
            assert_eq!(v[1], p("1/(t + 1)"));
        }
        s => panic!("{s:?}"),
    }
    assert!(LinearSystem::from_exprs(&[p("x*y")], &unknowns, names).is_err());
}
