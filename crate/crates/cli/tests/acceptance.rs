//! One line per acceptance criterion. Run with `--nocapture` to see the table.

#![allow(clippy::absurd_extreme_comparisons)]

use std::collections::BTreeMap;
use std::sync::OnceLock;

use hydroham_cli::report::{CheckEntry, Report};
use hydroham_cli::system_file::SystemFile;
use hydroham_core::jet::{JetExpr, JetMono, JetVar};
use hydroham_core::oassoc::{build_bundle, run_case, CaseReport, Check, OAssocBundle};
use hydroham_kernel::{BigInt, BigRational, Expr, Poly, Var};
use num_traits::{One, Zero};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

/// Residual entries allowed to be nonzero in a passing check: exact symbolic zero.
const NONZERO_ALLOWED: usize = 0;
/// Agreeing random rational points required per kernel operation class.
const MIN_ORACLE_POINTS: usize = 20;
const ORACLE_POINTS: usize = 32;
const RANDOM_JET_EXPRS: usize = 24;
const SEED: u64 = 0x5eed;

struct Fixture {
    bundle: OAssocBundle,
    cases: BTreeMap<&'static str, CaseReport>,
}

fn fixture() -> &'static Fixture {
    static F: OnceLock<Fixture> = OnceLock::new();
    F.get_or_init(|| {
        let bundle = build_bundle().expect("bundle builds");
        let mut cases = BTreeMap::new();
        for c in ["zero-curvature", "first-order", "metric", "local-fail", "densities", "nonlocal", "theorem"] {
            cases.insert(c, run_case(&bundle, c).expect("case runs"));
        }
        Fixture { bundle, cases }
    })
}

fn check<'a>(case: &str, name: &str) -> &'a Check {
    let r = &fixture().cases[case];
    r.checks
        .iter()
        .find(|c| c.report.name == name)
        .unwrap_or_else(|| panic!("{case}: no check named {name}"))
}

/// Every nonzero count within tolerance and the expected outcome met.
fn exact(case: &str, names: &[&str]) -> (bool, String) {
    let mut ok = true;
    let mut parts = Vec::new();
    for n in names {
        let c = check(case, n);
        let pass = c.report.nonzero() <= NONZERO_ALLOWED;
        ok &= pass;
        parts.push(format!("{n}: {}/{}", c.report.nonzero(), c.report.len()));
    }
    (ok, parts.join("; "))
}

/// Checks that must have at least one nonzero residual.
fn breaks(case: &str, names: &[&str]) -> (bool, String) {
    let mut ok = true;
    let mut parts = Vec::new();
    for n in names {
        let c = check(case, n);
        ok &= c.report.nonzero() > NONZERO_ALLOWED;
        parts.push(format!("{n}: {} nonzero", c.report.nonzero()));
    }
    (ok, parts.join("; "))
}

fn both(a: (bool, String), b: (bool, String)) -> (bool, String) {
    (a.0 && b.0, format!("{}; {}", a.1, b.1))
}

fn rational(rng: &mut StdRng) -> BigRational {
    BigRational::new(BigInt::from(rng.gen_range(-40i64..41)), BigInt::from(rng.gen_range(1i64..13)))
}

fn random_expr(rng: &mut StdRng, vars: u8) -> Expr {
    let poly = |rng: &mut StdRng| {
        let mut e = Expr::from_int(rng.gen_range(-3i64..4));
        for _ in 0..3 {
            let mut m = Expr::from_int(rng.gen_range(-5i64..6));
            for v in 0..vars {
                m = &m * &Expr::var(Var(v)).pow(rng.gen_range(0..3)).unwrap();
            }
            e = &e + &m;
        }
        e
    };
    let n = poly(rng);
    let d = &poly(rng) + &Expr::var(Var(0)).pow(2).unwrap();
    if d.is_zero() {
        n
    } else {
        &n / &d
    }
}

/// Value and directional derivative of a polynomial by forward-mode dual numbers.
fn dual(p: &Poly, pt: &[BigRational], v: usize) -> (BigRational, BigRational) {
    let mut val = BigRational::zero();
    let mut der = BigRational::zero();
    for (m, c) in p.terms() {
        let (mut a, mut b) = (BigRational::from_integer(c.to_bigint()), BigRational::zero());
        for (i, &e) in m.exps().iter().enumerate().take(pt.len()) {
            for _ in 0..e {
                let dx = if i == v { BigRational::one() } else { BigRational::zero() };
                let nb = &b * &pt[i] + &a * &dx;
                a = &a * &pt[i];
                b = nb;
            }
        }
        val += a;
        der += b;
    }
    (val, der)
}

fn kernel_oracle() -> (bool, String) {
    let mut rng = StdRng::seed_from_u64(SEED);
    let a = random_expr(&mut rng, 3);
    let b = random_expr(&mut rng, 3);
    let classes: [(&str, Expr); 5] = [
        ("add", &a + &b),
        ("sub", &a - &b),
        ("mul", &a * &b),
        ("div", &a / &b),
        ("diff", a.diff(Var(1))),
    ];
    let mut hits = [0usize; 5];
    for _ in 0..ORACLE_POINTS {
        let pt: Vec<BigRational> = (0..3).map(|_| rational(&mut rng)).collect();
        let (Ok(x), Ok(y)) = (a.eval(&pt), b.eval(&pt)) else { continue };
        for (k, (name, r)) in classes.iter().enumerate() {
            let expect = match *name {
                "add" => Some(&x + &y),
                "sub" => Some(&x - &y),
                "mul" => Some(&x * &y),
                "div" => (!y.is_zero()).then(|| &x / &y),
                _ => {
                    let (n, dn) = dual(a.numerator(), &pt, 1);
                    let (d, dd) = dual(&a.denominator(), &pt, 1);
                    (!d.is_zero()).then(|| (&dn * &d - &n * &dd) / (&d * &d))
                }
            };
            let (Some(expect), Ok(got)) = (expect, r.eval(&pt)) else { continue };
            if got != expect {
                return (false, format!("{name} disagrees"));
            }
            hits[k] += 1;
        }
    }
    let ok = hits.iter().all(|&h| h >= MIN_ORACLE_POINTS);
    (ok, format!("points per class add/sub/mul/div/diff = {hits:?}"))
}

fn commuting_derivatives() -> (bool, String) {
    let f = fixture();
    let sys = &f.bundle.system_q;
    let mut rng = StdRng::seed_from_u64(SEED + 1);
    let mut ok = true;
    for _ in 0..RANDOM_JET_EXPRS {
        let mut e = JetExpr::zero();
        for _ in 0..2 {
            let c = &Expr::var(f.bundle.q_vars[rng.gen_range(0..6)]) + &Expr::from_int(rng.gen_range(-2i64..3));
            let v = JetVar::U(rng.gen_range(0..6), rng.gen_range(1..3));
            e.add_term(JetMono::var(v), &c);
        }
        let xt = sys.total_x(&sys.total_t(&e).unwrap()).unwrap();
        let tx = sys.total_t(&sys.total_x(&e).unwrap()).unwrap();
        ok &= (&xt - &tx).is_zero();
    }
    (ok, format!("{RANDOM_JET_EXPRS} random jet expressions on the six-component system"))
}

fn determinism() -> (bool, String) {
    let f = fixture();
    let json = |case: &str| {
        let r = run_case(&f.bundle, case).unwrap();
        Report::from_case(&f.bundle, &r, false).to_json()
    };
    let cases = ["zero-curvature", "local-fail", "densities"];
    let ok = cases.iter().all(|c| json(c) == json(c));
    (ok, format!("two runs byte-identical for {}", cases.join(", ")))
}

fn criteria() -> Vec<(u8, &'static str, (bool, String))> {
    vec![
        (1, "zero curvature of the Lax pair", both(exact("zero-curvature", &["zero curvature"]), breaks("zero-curvature", &["zero curvature with the second flux shifted by q1"]))),
        (2, "characteristic polynomial", exact("zero-curvature", &["characteristic polynomial"])),
        (3, "conservation laws and Viete identity", exact("first-order", &["conservation laws of the system", "extra conservation laws in Viete coordinates", "Viete identity q3 + q6 = u1 + u2 + u3"])),
        (4, "first-order Hamiltonian structure", exact("first-order", &["first-order Hamiltonian flow", "momentum as quadratic form"])),
        (5, "derived metric equals the Monge metric", exact("metric", &["metric back-substitution", "derived metric equals the Monge metric"])),
        (6, "local third-order conditions fail only at (27)", both(exact("local-fail", &["(22) symmetry", "(28) c from metric", "(23) cyclic"]), breaks("local-fail", &["(27) local c-condition"]))),
        (7, "density recursion and vanishing sum", exact("densities", &["first densities match the printed ones modulo total derivatives", "sum of the three first densities vanishes"])),
        (8, "tails from densities", exact("densities", &["tail 1 from density h01 matches w16", "tail 2 from density h02 matches w18", "tail 1 lowered is skew", "tail 2 lowered is skew"])),
        (9, "theorem constants and their perturbations", both(
            exact("nonlocal", &["(20) curvature-type condition", "(20) tail condition"]),
            breaks("nonlocal", &[
                "(20) curvature-type condition, constants (1, 1, 2)",
                "(20) curvature-type condition, constants (3, 1, 2)",
                "(20) curvature-type condition, constants (2, 0, 2)",
                "(20) curvature-type condition, constants (2, 2, 2)",
                "(20) curvature-type condition, constants (2, 1, 1)",
                "(20) curvature-type condition, constants (2, 1, 3)",
            ]),
        )),
        (10, "coupling lemma against the derived expansion", both(
            exact("theorem", &[
                "(33) coupling", "(44) coupling", "(45) coupling", "(21) coupling", "(42) coupling", "(43) coupling",
                "(33) printed vs derived", "(44) printed vs derived", "(45) printed vs derived",
                "(42) printed vs derived", "(43) printed vs derived", "(21) sign-corrected vs derived", "unclassified monomials",
            ]),
            breaks("theorem", &["(21) printed vs derived"]),
        )),
        (11, "tail flows commute with the system", exact("theorem", &["tail flow 1 commutes with the system", "tail flow 2 commutes with the system"])),
        (12, "property suite", {
            let (a, b, c) = (kernel_oracle(), commuting_derivatives(), determinism());
            (a.0 && b.0 && c.0, format!("{}; {}; {}", a.1, b.1, c.1))
        }),
    ]
}

#[test]
fn acceptance_criteria() {
    let rows = criteria();
    let mut failed = Vec::new();
    for (id, title, (ok, detail)) in &rows {
        println!("criterion {id:>2} {} {title}: {detail}", if *ok { "PASS" } else { "FAIL" });
        if !ok {
            failed.push(*id);
        }
    }
    assert!(failed.is_empty(), "criteria failed: {failed:?}");
}

#[test]
fn bundle_file_reproduces_the_theorem_checks() {
    let text = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/../../docs/bundle.toml")).unwrap();
    let loaded = SystemFile::from_toml(&text).unwrap().load().unwrap();
    let from_file = loaded.run("docs/bundle.toml", false);
    let f = fixture();
    let theorem = Report::from_case(&f.bundle, &f.cases["theorem"], false);
    let strip = |c: &CheckEntry| (c.name.clone(), c.tuples, c.nonzero, c.met);
    for c in &from_file.checks {
        let t = theorem
            .checks
            .iter()
            .find(|t| t.name == c.name)
            .unwrap_or_else(|| panic!("theorem has no check named {}", c.name));
        assert_eq!(strip(c), strip(t));
    }
    assert!(from_file.met);
}
