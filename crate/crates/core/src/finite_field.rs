//! Arithmetic in the prime field F_p for odd p.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, MulAssign, Neg, Sub, SubAssign};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FieldError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("p = 2 is not supported, the modulus must be an odd prime")]
    EvenPrime,
    #[error("zero has no inverse in F_{p}")]
    ZeroInverse { p: u64 },
}

/// An odd prime modulus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u64", into = "u64")]
pub struct Prime(u64);

impl Prime {
    pub fn new(p: u64) -> Result<Self, FieldError> {
        if p == 2 {
            return Err(FieldError::EvenPrime);
        }
        if !is_prime(p) {
            return Err(FieldError::NotPrime(p));
        }
        Ok(Prime(p))
    }

    pub fn get(self) -> u64 {
        self.0
    }

    /// (p - 1) / 2
    pub fn half(self) -> u64 {
        (self.0 - 1) / 2
    }

    pub fn zero(self) -> Fp {
        Fp { v: 0, p: self.0 }
    }

    pub fn one(self) -> Fp {
        Fp { v: 1, p: self.0 }
    }

    /// Reduces an arbitrary signed integer into the field.
    pub fn elem(self, x: i64) -> Fp {
        let p = self.0 as i128;
        let v = (x as i128).rem_euclid(p) as u64;
        Fp { v, p: self.0 }
    }

    pub fn elem_u(self, x: u64) -> Fp {
        Fp { v: x % self.0, p: self.0 }
    }

    /// All residues 0..p in increasing order.
    pub fn elements(self) -> impl Iterator<Item = Fp> {
        let p = self.0;
        (0..p).map(move |v| Fp { v, p })
    }

    /// Rebuilds an element from a stored residue. Panics if `v >= p`.
    pub fn from_residue(self, v: u64) -> Fp {
        assert!(v < self.0, "residue {v} out of range for F_{}", self.0);
        Fp { v, p: self.0 }
    }
}

impl TryFrom<u64> for Prime {
    type Error = FieldError;
    fn try_from(p: u64) -> Result<Self, FieldError> {
        Prime::new(p)
    }
}

impl From<Prime> for u64 {
    fn from(p: Prime) -> u64 {
        p.0
    }
}

impl fmt::Display for Prime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

// Deterministic Miller-Rabin; these bases cover all of u64.
fn is_prime(n: u64) -> bool {
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for b in BASES {
        if n.is_multiple_of(b) {
            return n == b;
        }
    }
    let mulmod = |a: u64, b: u64| ((a as u128 * b as u128) % n as u128) as u64;
    let powmod = |mut a: u64, mut e: u64| {
        let mut acc = 1u64;
        while e > 0 {
            if e & 1 == 1 {
                acc = mulmod(acc, a);
            }
            a = mulmod(a, a);
            e >>= 1;
        }
        acc
    };
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'outer: for b in BASES {
        let mut x = powmod(b, d);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mulmod(x, x);
            if x == n - 1 {
                continue 'outer;
            }
        }
        return false;
    }
    true
}

/// An element of F_p. Carries its modulus so that mixing fields is caught.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Fp {
    v: u64,
    p: u64,
}

impl Fp {
    pub fn value(self) -> u64 {
        self.v
    }

    pub fn modulus(self) -> Prime {
        Prime(self.p)
    }

    pub fn is_zero(self) -> bool {
        self.v == 0
    }

    /// The representative in (-p/2, p/2], handy for signs.
    pub fn signed(self) -> i64 {
        if self.v > self.p / 2 {
            self.v as i64 - self.p as i64
        } else {
            self.v as i64
        }
    }

    pub fn inv(self) -> Result<Fp, FieldError> {
        if self.v == 0 {
            return Err(FieldError::ZeroInverse { p: self.p });
        }
        let (mut r0, mut r1) = (self.p as i128, self.v as i128);
        let (mut t0, mut t1) = (0i128, 1i128);
        while r1 != 0 {
            let q = r0 / r1;
            (r0, r1) = (r1, r0 - q * r1);
            (t0, t1) = (t1, t0 - q * t1);
        }
        debug_assert_eq!(r0, 1);
        Ok(Fp { v: t0.rem_euclid(self.p as i128) as u64, p: self.p })
    }

    pub fn try_div(self, rhs: Fp) -> Result<Fp, FieldError> {
        Ok(self * rhs.inv()?)
    }

    pub fn pow(self, mut e: u64) -> Fp {
        let mut base = self;
        let mut acc = Fp { v: 1, p: self.p };
        while e > 0 {
            if e & 1 == 1 {
                acc *= base;
            }
            base *= base;
            e >>= 1;
        }
        acc
    }

    /// Signed exponent; negative powers need an invertible base.
    pub fn pow_i(self, e: i64) -> Result<Fp, FieldError> {
        if e >= 0 {
            Ok(self.pow(e as u64))
        } else {
            Ok(self.inv()?.pow(e.unsigned_abs()))
        }
    }

    /// (-1)^e in this field.
    pub fn sign(self, e: i64) -> Fp {
        let one = Fp { v: 1, p: self.p };
        if e.rem_euclid(2) == 0 {
            one
        } else {
            -one
        }
    }

    #[inline]
    fn check(self, rhs: Fp) {
        assert_eq!(self.p, rhs.p, "mixed moduli: F_{} and F_{}", self.p, rhs.p);
    }
}

impl fmt::Display for Fp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.v)
    }
}

impl Add for Fp {
    type Output = Fp;
    #[inline]
    fn add(self, rhs: Fp) -> Fp {
        self.check(rhs);
        let s = self.v as u128 + rhs.v as u128;
        Fp { v: (s % self.p as u128) as u64, p: self.p }
    }
}

impl Sub for Fp {
    type Output = Fp;
    #[inline]
    fn sub(self, rhs: Fp) -> Fp {
        self + (-rhs)
    }
}

impl Neg for Fp {
    type Output = Fp;
    #[inline]
    fn neg(self) -> Fp {
        if self.v == 0 {
            self
        } else {
            Fp { v: self.p - self.v, p: self.p }
        }
    }
}

impl Mul for Fp {
    type Output = Fp;
    #[inline]
    fn mul(self, rhs: Fp) -> Fp {
        self.check(rhs);
        let m = self.v as u128 * rhs.v as u128;
        Fp { v: (m % self.p as u128) as u64, p: self.p }
    }
}

impl AddAssign for Fp {
    fn add_assign(&mut self, rhs: Fp) {
        *self = *self + rhs;
    }
}

impl SubAssign for Fp {
    fn sub_assign(&mut self, rhs: Fp) {
        *self = *self - rhs;
    }
}

impl MulAssign for Fp {
    fn mul_assign(&mut self, rhs: Fp) {
        *self = *self * rhs;
    }
}

/// A rational number whose denominator is 1 or 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct HalfInt {
    num: i64,
    den: u8,
}

impl HalfInt {
    pub fn int(n: i64) -> Self {
        HalfInt { num: n, den: 1 }
    }

    /// `num / den` with `den` in {1, 2}; reduced on construction.
    pub fn new(num: i64, den: u8) -> Self {
        assert!(den == 1 || den == 2, "denominator must be 1 or 2");
        if den == 2 && num % 2 == 0 {
            HalfInt { num: num / 2, den: 1 }
        } else {
            HalfInt { num, den }
        }
    }

    pub fn as_integer(self) -> Option<i64> {
        (self.den == 1).then_some(self.num)
    }
}

impl From<i64> for HalfInt {
    fn from(n: i64) -> Self {
        HalfInt::int(n)
    }
}

/// `a choose b` mod p when a, b are naturals with a >= b, and 0 otherwise.
pub fn binomial(a: HalfInt, b: HalfInt, p: Prime) -> Fp {
    match (a.as_integer(), b.as_integer()) {
        (Some(a), Some(b)) if a >= 0 && b >= 0 && a >= b => binom(a as u64, b as u64, p),
        _ => p.zero(),
    }
}

/// `a choose b` mod p for naturals, via Lucas' theorem. Zero when b > a.
pub fn binom(mut a: u64, mut b: u64, p: Prime) -> Fp {
    if b > a {
        return p.zero();
    }
    let q = p.get();
    let mut acc = p.one();
    while b > 0 || a > 0 {
        let (ad, bd) = (a % q, b % q);
        if bd > ad {
            return p.zero();
        }
        acc *= small_binom(ad, bd, p);
        a /= q;
        b /= q;
    }
    acc
}

// Digits are below p, so every denominator factor is a unit.
fn small_binom(a: u64, b: u64, p: Prime) -> Fp {
    let b = b.min(a - b);
    let mut num = p.one();
    let mut den = p.one();
    for i in 0..b {
        num *= p.elem_u(a - i);
        den *= p.elem_u(i + 1);
    }
    num * den.inv().expect("digit factorials are units")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(p: u64) -> Prime {
        Prime::new(p).unwrap()
    }

    #[test]
    fn rejects_bad_moduli() {
        assert_eq!(Prime::new(2), Err(FieldError::EvenPrime));
        assert_eq!(Prime::new(9), Err(FieldError::NotPrime(9)));
        assert_eq!(Prime::new(1), Err(FieldError::NotPrime(1)));
        assert!(Prime::new(1_000_000_007).is_ok());
    }

    #[test]
    fn primality_agrees_with_trial_division() {
        let trial = |n: u64| n >= 2 && (2..n).take_while(|d| d * d <= n).all(|d| !n.is_multiple_of(d));
        for n in 3..5000u64 {
            assert_eq!(Prime::new(n).is_ok(), n % 2 == 1 && trial(n), "{n}");
        }
    }

    #[test]
    fn small_examples() {
        let p3 = f(3);
        assert_eq!((p3.elem(2) + p3.elem(2)).value(), 1);
        let p7 = f(7);
        let by_search = (1..7).find(|x| (3 * x) % 7 == 1).unwrap();
        assert_eq!(p7.elem(3).inv().unwrap().value(), by_search);
        assert_eq!(p7.zero().inv(), Err(FieldError::ZeroInverse { p: 7 }));
    }

    #[test]
    fn inverse_agrees_with_fermat() {
        for q in [3u64, 5, 7, 11, 13, 101] {
            let p = f(q);
            for a in p.elements().skip(1) {
                assert_eq!(a.inv().unwrap(), a.pow(q - 2));
                assert_eq!(a * a.inv().unwrap(), p.one());
                assert_eq!(a.pow(q - 1), p.one());
            }
        }
    }

    #[test]
    fn large_modulus_does_not_overflow() {
        let p = f(18_446_744_073_709_551_557); // largest prime below 2^64
        let a = p.elem_u(u64::MAX - 100);
        let b = a.inv().unwrap();
        assert_eq!(a * b, p.one());
        assert_eq!((a + a) - a, a);
    }

    #[test]
    fn binomial_examples() {
        let p5 = f(5);
        assert_eq!(binomial(3.into(), 0.into(), p5), p5.one());
        let p7 = f(7);
        // 6 choose 3 = 20
        assert_eq!(binomial(6.into(), 3.into(), p7).value(), 20 % 7);
        assert_eq!(binomial(HalfInt::int(3), HalfInt::new(1, 2), p7), p7.zero());
        assert_eq!(binomial(2.into(), 3.into(), p7), p7.zero());
        assert_eq!(binomial((-1).into(), 0.into(), p7), p7.zero());
        // Lucas: 10 choose 3 = 120 = 1 mod 7
        assert_eq!(binom(10, 3, p7).value(), 120 % 7);
    }

    #[test]
    fn binomial_matches_pascal_triangle() {
        let p = f(13);
        let mut row = vec![1u128];
        for a in 0..40u64 {
            for (b, &v) in row.iter().enumerate() {
                assert_eq!(binom(a, b as u64, p).value() as u128, v % 13, "{a} choose {b}");
            }
            let mut next = vec![1u128; row.len() + 1];
            for i in 1..row.len() {
                next[i] = row[i - 1] + row[i];
            }
            row = next;
        }
    }

    #[test]
    #[should_panic(expected = "mixed moduli")]
    fn mixing_fields_panics() {
        let _ = f(3).one() + f(5).one();
    }
}
