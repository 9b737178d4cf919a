//! Multivariate polynomial gcd over the integers.
//!
//! The main path is the heuristic gcd (evaluate at a large integer, recurse,
//! reconstruct by symmetric `xi`-adic expansion, verify by exact division).
//! Structural shortcuts run first, and a primitive remainder sequence is the
//! fallback when the heuristic gives up.

use crate::int::Int;
use crate::poly::{Poly, Var, MAX_VARS};

/// Gcd normalized to a positive leading coefficient. `gcd(0, 0) = 0`.
pub fn gcd(a: &Poly, b: &Poly) -> Poly {
    if a.is_zero() {
        return normalize(b);
    }
    if b.is_zero() {
        return normalize(a);
    }
    let (ca, pa) = a.primitive();
    let (cb, pb) = b.primitive();
    let c = ca.gcd(&cb);
    let g = gcd_primitive(&pa, &pb);
    g.scale(&c)
}

fn normalize(p: &Poly) -> Poly {
    if p.lc().is_negative() {
        -p
    } else {
        p.clone()
    }
}

/// Gcd of two primitive polynomials with positive leading coefficients.
fn gcd_primitive(a: &Poly, b: &Poly) -> Poly {
    if a.is_constant() || b.is_constant() {
        return Poly::one();
    }
    if a == b {
        return a.clone();
    }
    let ma = a.monomial_content();
    let mb = b.monomial_content();
    let mono = ma.gcd(&mb);
    let a1 = if ma.is_one() { a.clone() } else { a.div_monomial(&ma) };
    let b1 = if mb.is_one() { b.clone() } else { b.div_monomial(&mb) };
    let core = gcd_no_monomial(&a1, &b1);
    if mono.is_one() {
        core
    } else {
        core.mul_monomial(&mono, &Int::ONE)
    }
}

/// Both inputs primitive, positive leading coefficient, no monomial factor.
fn gcd_no_monomial(a: &Poly, b: &Poly) -> Poly {
    if a.is_constant() || b.is_constant() {
        return Poly::one();
    }
    if a == b {
        return a.clone();
    }
    let (sa, sb) = (a.support(), b.support());
    if sa & sb == 0 {
        return Poly::one();
    }
    // A variable present in only one argument cannot occur in the gcd.
    let only = (sa ^ sb) & (sa | sb);
    if only != 0 {
        let v = Var(only.trailing_zeros() as u8);
        let (with, without) = if sa & (1 << v.0) != 0 { (a, b) } else { (b, a) };
        let mut g = without.clone();
        for c in with.to_univariate(v) {
            if c.is_zero() {
                continue;
            }
            g = gcd(&g, &c);
            if g.is_constant() {
                return Poly::one();
            }
        }
        return normalize(&g.primitive().1);
    }
    // Linear polynomials are irreducible.
    if a.total_degree() == 1 || b.total_degree() == 1 {
        let (lin, other) = if a.total_degree() == 1 { (a, b) } else { (b, a) };
        return if other.div_exact(lin).is_some() {
            lin.clone()
        } else {
            Poly::one()
        };
    }
    if a.len() <= b.len() {
        if b.div_exact(a).is_some() {
            return a.clone();
        }
    } else if a.div_exact(b).is_some() {
        return b.clone();
    }
    let vars: Vec<Var> = (0..MAX_VARS as u8)
        .map(Var)
        .filter(|v| sa & (1 << v.0) != 0)
        .collect();
    if let Some((h, _, _)) = heu_gcd(a, b, &vars) {
        return normalize(&h.primitive().1);
    }
    prs_gcd(a, b)
}

fn ground_content(p: &Poly) -> Int {
    let mut g = Int::ZERO;
    for (_, c) in p.terms() {
        g = g.gcd(c);
        if g.is_one() {
            break;
        }
    }
    g
}

/// Heuristic gcd returning `(h, a/h, b/h)`; `None` if every attempt failed.
fn heu_gcd(a: &Poly, b: &Poly, vars: &[Var]) -> Option<(Poly, Poly, Poly)> {
    if a.is_zero() || b.is_zero() {
        return None;
    }
    let Some((&v, rest)) = vars.split_last() else {
        let x = a.constant_value().unwrap();
        let y = b.constant_value().unwrap();
        let h = x.gcd(&y);
        return Some((
            Poly::constant(h.clone()),
            Poly::constant(x.div_exact(&h)),
            Poly::constant(y.div_exact(&h)),
        ));
    };
    let gc = ground_content(a).gcd(&ground_content(b));
    let a = a.div_int_exact(&gc);
    let b = b.div_int_exact(&gc);
    let na = a.max_norm();
    let nb = b.max_norm();
    let bound = &(&Int::from(2) * &na.clone().min(nb.clone())) + &Int::from(29);
    let alt = &Int::from(99) * &bound.isqrt();
    let lca = a.lc().abs();
    let lcb = b.lc().abs();
    let ratio = na.div_floor(&lca).min(nb.div_floor(&lcb));
    let mut xi = bound.min(alt).max(&(&Int::from(2) * &ratio) + &Int::from(2));

    for _ in 0..6 {
        let ea = a.eval_int(v, &xi);
        let eb = b.eval_int(v, &xi);
        if !ea.is_zero() && !eb.is_zero() {
            let rest_vars: Vec<Var> = rest
                .iter()
                .copied()
                .filter(|w| (ea.support() | eb.support()) & (1 << w.0) != 0)
                .collect();
            if let Some((h, cfa, cfb)) = heu_gcd(&ea, &eb, &rest_vars) {
                let h = interpolate(&h, &xi, v);
                let h = h.div_int_exact(&ground_content(&h));
                let h = normalize(&h);
                if let (Some(qa), Some(qb)) = (a.div_exact(&h), b.div_exact(&h)) {
                    return Some((h.scale(&gc), qa, qb));
                }
                let cfa = interpolate(&cfa, &xi, v);
                if let Some(h) = a.div_exact(&cfa) {
                    if let Some(qb) = b.div_exact(&h) {
                        return Some((h.scale(&gc), cfa, qb));
                    }
                }
                let cfb = interpolate(&cfb, &xi, v);
                if let Some(h) = b.div_exact(&cfb) {
                    if let Some(qa) = a.div_exact(&h) {
                        return Some((h.scale(&gc), qa, cfb));
                    }
                }
            }
        }
        // Next evaluation point, as in the classical GCDHEU schedule.
        let q = xi.isqrt().isqrt();
        xi = (&(&Int::from(73794) * &xi) * &q).div_floor(&Int::from(27011));
    }
    None
}

/// Reconstructs a polynomial in `v` from its image at `v = xi`.
fn interpolate(h: &Poly, xi: &Int, v: Var) -> Poly {
    let mut h = h.clone();
    let mut coeffs: Vec<Poly> = Vec::new();
    while !h.is_zero() {
        let g = Poly::from_terms(
            h.terms()
                .iter()
                .map(|(m, c)| (*m, c.symmetric_mod(xi)))
                .collect(),
        );
        let diff = &h - &g;
        h = diff.div_int_exact(xi);
        coeffs.push(g);
        if coeffs.len() > 255 {
            break;
        }
    }
    let p = Poly::from_univariate(v, &coeffs);
    normalize(&p)
}

/// Gcd by primitive pseudo-remainder sequences, recursing on contents.
fn prs_gcd(a: &Poly, b: &Poly) -> Poly {
    let common = a.support() & b.support();
    if common == 0 {
        return Poly::one();
    }
    let v = Var(common.trailing_zeros() as u8);
    let (ca, pa) = content_in(a, v);
    let (cb, pb) = content_in(b, v);
    let c = gcd(&ca, &cb);
    let (mut f, mut g) = if pa.degree_in(v) >= pb.degree_in(v) {
        (pa, pb)
    } else {
        (pb, pa)
    };
    while !g.is_zero() && g.degree_in(v) > 0 {
        let r = f.pseudo_rem(&g, v);
        f = g;
        g = if r.is_zero() { r } else { content_in(&r, v).1 };
    }
    let res = if g.is_zero() { f } else { Poly::one() };
    let res = normalize(&res.primitive().1);
    normalize(&(&res * &c))
}

/// Content with respect to `v` (gcd of coefficients) and the primitive part.
fn content_in(p: &Poly, v: Var) -> (Poly, Poly) {
    let coeffs = p.to_univariate(v);
    let mut g = Poly::zero();
    for c in &coeffs {
        if c.is_zero() {
            continue;
        }
        g = gcd(&g, c);
        if g.is_one() {
            break;
        }
    }
    let g = normalize(&g);
    if g.is_one() {
        return (g, normalize(p));
    }
    let q = p.div_exact(&g).expect("content divides");
    (g, normalize(&q))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x(i: u8) -> Poly {
        Poly::var(Var(i))
    }
    fn c(v: i64) -> Poly {
        Poly::constant(Int::from(v))
    }

    #[test]
    fn gcd_of_products() {
        let f = &(&x(0) - &x(1)) * &(&x(2) + &c(3));
        let g = &(&x(0) - &x(1)) * &(&(&x(0) * &x(2)) - &c(1));
        assert_eq!(gcd(&f, &g), &x(0) - &x(1));
        let h = &(&(&x(0) * &x(0)) + &(&x(1) * &x(2))) + &c(7);
        let f2 = &f * &h;
        let g2 = &g * &h;
        assert_eq!(gcd(&f2, &g2), &(&x(0) - &x(1)) * &h);
    }

    #[test]
    fn coprime_and_contents() {
        let f = (&x(0) + &c(1)).scale(&Int::from(6));
        let g = (&x(0) - &c(1)).scale(&Int::from(4));
        assert_eq!(gcd(&f, &g), c(2));
        assert_eq!(gcd(&Poly::zero(), &(-&x(1))), x(1));
    }

    #[test]
    fn prs_fallback_agrees() {
        let common = &(&x(0) * &x(1)) + &(&x(2) * &x(2)) + c(5);
        let f = &common * &(&(&x(0) * &x(0)) - &x(2));
        let g = &common * &(&x(1) + &(&x(0) * &x(2)));
        assert_eq!(prs_gcd(&f, &g), common);
    }
}
