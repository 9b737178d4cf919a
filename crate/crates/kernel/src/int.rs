//! Arbitrary-precision integers with an inline fast path for values that fit in `i64`.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::{BigInt, Sign};
use num_integer::Integer as _;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// An exact integer. Values that fit in an `i64` are stored inline; the
/// boxed big variant is only used when the value does not fit.
#[derive(Clone)]
pub enum Int {
    Small(i64),
    Big(Box<BigInt>),
}

impl Int {
    pub const ZERO: Int = Int::Small(0);
    pub const ONE: Int = Int::Small(1);

    fn from_big(b: BigInt) -> Int {
        match b.to_i64() {
            Some(v) => Int::Small(v),
            None => Int::Big(Box::new(b)),
        }
    }

    fn from_i128(v: i128) -> Int {
        match i64::try_from(v) {
            Ok(s) => Int::Small(s),
            Err(_) => Int::Big(Box::new(BigInt::from(v))),
        }
    }

    pub fn to_bigint(&self) -> BigInt {
        match self {
            Int::Small(v) => BigInt::from(*v),
            Int::Big(b) => (**b).clone(),
        }
    }

    pub fn to_i64(&self) -> Option<i64> {
        match self {
            Int::Small(v) => Some(*v),
            Int::Big(_) => None,
        }
    }

    #[inline]
    pub fn is_zero(&self) -> bool {
        matches!(self, Int::Small(0))
    }

    #[inline]
    pub fn is_one(&self) -> bool {
        matches!(self, Int::Small(1))
    }

    pub fn signum(&self) -> i32 {
        match self {
            Int::Small(v) => v.signum() as i32,
            Int::Big(b) => match b.sign() {
                Sign::Minus => -1,
                Sign::NoSign => 0,
                Sign::Plus => 1,
            },
        }
    }

    pub fn is_negative(&self) -> bool {
        self.signum() < 0
    }

    pub fn abs(&self) -> Int {
        if self.is_negative() {
            -self
        } else {
            self.clone()
        }
    }

    /// Number of significant bits of the absolute value.
    pub fn bits(&self) -> u64 {
        match self {
            Int::Small(v) => 64 - v.unsigned_abs().leading_zeros() as u64,
            Int::Big(b) => b.bits(),
        }
    }

    pub fn gcd(&self, other: &Int) -> Int {
        match (self, other) {
            (Int::Small(a), Int::Small(b)) => {
                let g = gcd_u64(a.unsigned_abs(), b.unsigned_abs());
                match i64::try_from(g) {
                    Ok(v) => Int::Small(v),
                    Err(_) => Int::Big(Box::new(BigInt::from(g))),
                }
            }
            _ => Int::from_big(self.to_bigint().gcd(&other.to_bigint())),
        }
    }

    /// Quotient of a division that is known to be exact.
    pub fn div_exact(&self, other: &Int) -> Int {
        debug_assert!(!other.is_zero());
        match (self, other) {
            (Int::Small(a), Int::Small(b)) => {
                debug_assert!(a % b == 0, "inexact integer division");
                Int::from_i128(*a as i128 / *b as i128)
            }
            _ => {
                let (q, r) = self.to_bigint().div_rem(&other.to_bigint());
                debug_assert!(r.is_zero(), "inexact integer division");
                Int::from_big(q)
            }
        }
    }

    /// Truncating division with remainder.
    pub fn div_rem(&self, other: &Int) -> (Int, Int) {
        match (self, other) {
            (Int::Small(a), Int::Small(b)) => {
                let (a, b) = (*a as i128, *b as i128);
                (Int::from_i128(a / b), Int::from_i128(a % b))
            }
            _ => {
                let (q, r) = self.to_bigint().div_rem(&other.to_bigint());
                (Int::from_big(q), Int::from_big(r))
            }
        }
    }

    /// Exact quotient if `other` divides `self`.
    pub fn checked_div(&self, other: &Int) -> Option<Int> {
        if other.is_zero() {
            return None;
        }
        let (q, r) = self.div_rem(other);
        r.is_zero().then_some(q)
    }

    /// Floor division.
    pub fn div_floor(&self, other: &Int) -> Int {
        Int::from_big(self.to_bigint().div_floor(&other.to_bigint()))
    }

    /// Representative of `self mod m` in `(-m/2, m/2]`, for `m > 0`.
    pub fn symmetric_mod(&self, m: &Int) -> Int {
        let r = Int::from_big(self.to_bigint().mod_floor(&m.to_bigint()));
        let twice = &r + &r;
        if twice.cmp(m) == Ordering::Greater {
            &r - m
        } else {
            r
        }
    }

    pub fn pow(&self, e: u32) -> Int {
        match self {
            Int::Small(v) => match v.checked_pow(e) {
                Some(p) => Int::Small(p),
                None => Int::from_big(num_traits::pow(BigInt::from(*v), e as usize)),
            },
            Int::Big(b) => Int::from_big(num_traits::pow((**b).clone(), e as usize)),
        }
    }

    pub fn isqrt(&self) -> Int {
        Int::from_big(self.to_bigint().sqrt())
    }
}

fn gcd_u64(mut a: u64, mut b: u64) -> u64 {
    if a == 0 {
        return b;
    }
    if b == 0 {
        return a;
    }
    let shift = (a | b).trailing_zeros();
    a >>= a.trailing_zeros();
    loop {
        b >>= b.trailing_zeros();
        if a > b {
            std::mem::swap(&mut a, &mut b);
        }
        b -= a;
        if b == 0 {
            return a << shift;
        }
    }
}

impl From<i64> for Int {
    fn from(v: i64) -> Int {
        Int::Small(v)
    }
}

impl From<i32> for Int {
    fn from(v: i32) -> Int {
        Int::Small(v as i64)
    }
}

impl From<BigInt> for Int {
    fn from(b: BigInt) -> Int {
        Int::from_big(b)
    }
}

impl From<&Int> for BigInt {
    fn from(v: &Int) -> BigInt {
        v.to_bigint()
    }
}

impl PartialEq for Int {
    fn eq(&self, other: &Int) -> bool {
        match (self, other) {
            (Int::Small(a), Int::Small(b)) => a == b,
            (Int::Big(a), Int::Big(b)) => a == b,
            _ => false,
        }
    }
}

impl Eq for Int {}

impl std::hash::Hash for Int {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        match self {
            Int::Small(v) => v.hash(state),
            Int::Big(b) => b.hash(state),
        }
    }
}

impl PartialOrd for Int {
    fn partial_cmp(&self, other: &Int) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Int {
    fn cmp(&self, other: &Int) -> Ordering {
        match (self, other) {
            (Int::Small(a), Int::Small(b)) => a.cmp(b),
            _ => self.to_bigint().cmp(&other.to_bigint()),
        }
    }
}

impl<'a> Add<&'a Int> for &'a Int {
    type Output = Int;
    fn add(self, rhs: &Int) -> Int {
        match (self, rhs) {
            (Int::Small(a), Int::Small(b)) => match a.checked_add(*b) {
                Some(s) => Int::Small(s),
                None => Int::from_i128(*a as i128 + *b as i128),
            },
            _ => Int::from_big(self.to_bigint() + rhs.to_bigint()),
        }
    }
}

impl<'a> Sub<&'a Int> for &'a Int {
    type Output = Int;
    fn sub(self, rhs: &Int) -> Int {
        match (self, rhs) {
            (Int::Small(a), Int::Small(b)) => match a.checked_sub(*b) {
                Some(s) => Int::Small(s),
                None => Int::from_i128(*a as i128 - *b as i128),
            },
            _ => Int::from_big(self.to_bigint() - rhs.to_bigint()),
        }
    }
}

impl<'a> Mul<&'a Int> for &'a Int {
    type Output = Int;
    fn mul(self, rhs: &Int) -> Int {
        match (self, rhs) {
            (Int::Small(a), Int::Small(b)) => match a.checked_mul(*b) {
                Some(s) => Int::Small(s),
                None => Int::from_i128(*a as i128 * *b as i128),
            },
            _ => Int::from_big(self.to_bigint() * rhs.to_bigint()),
        }
    }
}

impl Neg for &Int {
    type Output = Int;
    fn neg(self) -> Int {
        match self {
            Int::Small(a) => match a.checked_neg() {
                Some(s) => Int::Small(s),
                None => Int::from_i128(-(*a as i128)),
            },
            Int::Big(b) => Int::from_big(-(**b).clone()),
        }
    }
}

impl Neg for Int {
    type Output = Int;
    fn neg(self) -> Int {
        -&self
    }
}

impl Add for Int {
    type Output = Int;
    fn add(self, rhs: Int) -> Int {
        &self + &rhs
    }
}

impl Sub for Int {
    type Output = Int;
    fn sub(self, rhs: Int) -> Int {
        &self - &rhs
    }
}

impl Mul for Int {
    type Output = Int;
    fn mul(self, rhs: Int) -> Int {
        &self * &rhs
    }
}

impl Zero for Int {
    fn zero() -> Int {
        Int::ZERO
    }
    fn is_zero(&self) -> bool {
        Int::is_zero(self)
    }
}

impl One for Int {
    fn one() -> Int {
        Int::ONE
    }
}

impl fmt::Display for Int {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Int::Small(v) => write!(f, "{v}"),
            Int::Big(b) => write!(f, "{b}"),
        }
    }
}

impl fmt::Debug for Int {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Int {
    type Err = num_bigint::ParseBigIntError;
    fn from_str(s: &str) -> Result<Int, Self::Err> {
        match s.parse::<i64>() {
            Ok(v) => Ok(Int::Small(v)),
            Err(_) => BigInt::from_str(s).map(Int::from_big),
        }
    }
}

impl Signed for Int {
    fn abs(&self) -> Int {
        Int::abs(self)
    }
    fn abs_sub(&self, other: &Int) -> Int {
        if self <= other {
            Int::ZERO
        } else {
            self - other
        }
    }
    fn signum(&self) -> Int {
        Int::Small(Int::signum(self) as i64)
    }
    fn is_positive(&self) -> bool {
        Int::signum(self) > 0
    }
    fn is_negative(&self) -> bool {
        Int::is_negative(self)
    }
}

impl num_traits::Num for Int {
    type FromStrRadixErr = num_bigint::ParseBigIntError;
    fn from_str_radix(s: &str, radix: u32) -> Result<Int, Self::FromStrRadixErr> {
        BigInt::from_str_radix(s, radix).map(Int::from_big)
    }
}

impl std::ops::Div for Int {
    type Output = Int;
    fn div(self, rhs: Int) -> Int {
        self.div_rem(&rhs).0
    }
}

impl std::ops::Rem for Int {
    type Output = Int;
    fn rem(self, rhs: Int) -> Int {
        self.div_rem(&rhs).1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overflow_promotes_to_big() {
        let a = Int::from(i64::MAX);
        let b = &a + &Int::ONE;
        assert!(matches!(b, Int::Big(_)));
        assert_eq!((&b - &Int::ONE), a);
        let sq = &a * &a;
        assert_eq!(sq.div_exact(&a), a);
    }

    #[test]
    fn gcd_and_symmetric_mod() {
        assert_eq!(Int::from(12).gcd(&Int::from(-18)), Int::from(6));
        assert_eq!(Int::from(0).gcd(&Int::from(-5)), Int::from(5));
        assert_eq!(Int::from(7).symmetric_mod(&Int::from(10)), Int::from(-3));
        assert_eq!(Int::from(5).symmetric_mod(&Int::from(10)), Int::from(5));
        assert_eq!(Int::from(-4).symmetric_mod(&Int::from(10)), Int::from(-4));
    }

    #[test]
    fn min_value_negation() {
        let m = Int::from(i64::MIN);
        let n = -&m;
        assert!(n.signum() > 0);
        assert_eq!(-&n, m);
    }
}
