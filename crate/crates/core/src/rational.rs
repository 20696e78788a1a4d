//! Exact rational scalars, p-adic valuations and archimedean comparisons.
//!
//! Everything in the engine bottoms out here: formula evaluation, witness
//! checking and the ground cases of every elimination step.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// An exact rational number, always stored in lowest terms with a positive
/// denominator.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Rat(BigRational);

impl Rat {
    pub fn zero() -> Self {
        Rat(BigRational::zero())
    }

    pub fn one() -> Self {
        Rat(BigRational::one())
    }

    pub fn from_int(n: i64) -> Self {
        Rat(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn from_bigint(n: BigInt) -> Self {
        Rat(BigRational::from_integer(n))
    }

    /// `num / den`; fails on a zero denominator.
    pub fn new(num: i64, den: i64) -> Result<Self> {
        Self::from_bigints(BigInt::from(num), BigInt::from(den))
    }

    pub fn from_bigints(num: BigInt, den: BigInt) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::Arithmetic("zero denominator".into()));
        }
        Ok(Rat(BigRational::new(num, den)))
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.0.is_one()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn signum(&self) -> i32 {
        match self.0.numer().sign() {
            Sign::Minus => -1,
            Sign::NoSign => 0,
            Sign::Plus => 1,
        }
    }

    pub fn abs(&self) -> Self {
        Rat(self.0.abs())
    }

    pub fn checked_div(&self, other: &Rat) -> Result<Rat> {
        if other.is_zero() {
            return Err(Error::Arithmetic("division by zero".into()));
        }
        Ok(Rat(&self.0 / &other.0))
    }

    pub fn recip(&self) -> Result<Rat> {
        Rat::one().checked_div(self)
    }

    /// `base^exp` for a possibly negative exponent. `base` must be nonzero
    /// when `exp < 0`.
    pub fn pow(base: &Rat, exp: i64) -> Result<Rat> {
        if exp < 0 && base.is_zero() {
            return Err(Error::Arithmetic("zero to a negative power".into()));
        }
        let e = exp.unsigned_abs();
        let mut acc = BigRational::one();
        let mut b = base.0.clone();
        let mut k = e;
        while k > 0 {
            if k & 1 == 1 {
                acc *= &b;
            }
            b = &b * &b;
            k >>= 1;
        }
        if exp < 0 {
            acc = acc.recip();
        }
        Ok(Rat(acc))
    }

    /// `p^exp` for a prime (or any positive integer) `p`.
    pub fn prime_pow(p: u64, exp: i64) -> Rat {
        Rat::pow(&Rat::from_int(p as i64), exp).expect("p is nonzero")
    }

    pub fn floor(&self) -> BigInt {
        self.0.floor().to_integer()
    }

    pub fn ceil(&self) -> BigInt {
        self.0.ceil().to_integer()
    }

    pub fn as_bigrational(&self) -> &BigRational {
        &self.0
    }

    /// Residue class of a p-integral rational modulo `modulus` (coprime to the
    /// denominator), as a representative in `0..modulus`.
    pub fn residue_mod(&self, modulus: &BigInt) -> Result<BigInt> {
        let den = self.denom();
        let inv = mod_inverse(den, modulus)
            .ok_or_else(|| Error::Arithmetic(format!("{} is not invertible modulo {}", den, modulus)))?;
        Ok((self.numer() * inv).mod_floor(modulus))
    }
}

/// Inverse of `a` modulo `m` if it exists.
pub fn mod_inverse(a: &BigInt, m: &BigInt) -> Option<BigInt> {
    if m.is_one() {
        return Some(BigInt::zero());
    }
    let e = a.mod_floor(m).extended_gcd(m);
    if !e.gcd.is_one() {
        return None;
    }
    Some(e.x.mod_floor(m))
}

impl fmt::Display for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl fmt::Debug for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Rat {
    type Err = Error;

    /// Accepts `n` or `n/d` in decimal with an optional leading `-`.
    fn from_str(s: &str) -> Result<Rat> {
        let bad = || Error::Arithmetic(format!("malformed rational {:?}", s));
        let s = s.trim();
        let (num, den) = match s.split_once('/') {
            Some((n, d)) => (n.trim(), Some(d.trim())),
            None => (s, None),
        };
        let digits_ok = |t: &str, allow_sign: bool| {
            let t = if allow_sign { t.strip_prefix('-').unwrap_or(t) } else { t };
            !t.is_empty() && t.bytes().all(|b| b.is_ascii_digit())
        };
        if !digits_ok(num, true) {
            return Err(bad());
        }
        let n: BigInt = num.parse().map_err(|_| bad())?;
        match den {
            None => Ok(Rat::from_bigint(n)),
            Some(d) => {
                if !digits_ok(d, false) {
                    return Err(bad());
                }
                let d: BigInt = d.parse().map_err(|_| bad())?;
                Rat::from_bigints(n, d)
            }
        }
    }
}

impl From<i64> for Rat {
    fn from(n: i64) -> Self {
        Rat::from_int(n)
    }
}

macro_rules! forward_binop {
    ($tr:ident, $m:ident) => {
        impl $tr<&Rat> for &Rat {
            type Output = Rat;
            fn $m(self, rhs: &Rat) -> Rat {
                Rat((&self.0).$m(&rhs.0))
            }
        }
        impl $tr<Rat> for Rat {
            type Output = Rat;
            fn $m(self, rhs: Rat) -> Rat {
                Rat(self.0.$m(rhs.0))
            }
        }
        impl $tr<&Rat> for Rat {
            type Output = Rat;
            fn $m(self, rhs: &Rat) -> Rat {
                Rat(self.0.$m(&rhs.0))
            }
        }
    };
}

forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);

impl AddAssign<&Rat> for Rat {
    fn add_assign(&mut self, rhs: &Rat) {
        self.0 += &rhs.0;
    }
}

impl Neg for Rat {
    type Output = Rat;
    fn neg(self) -> Rat {
        Rat(-self.0)
    }
}

impl Neg for &Rat {
    type Output = Rat;
    fn neg(self) -> Rat {
        Rat(-&self.0)
    }
}

/// An element of the value set `Z ∪ {∞}`.
///
/// Valuations of rationals are bounded by the bit length of their numerator
/// and denominator, so `i64` holds every value that can arise from data.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub enum ValInt {
    Fin(i64),
    Inf,
}

impl ValInt {
    pub fn is_inf(self) -> bool {
        matches!(self, ValInt::Inf)
    }

    pub fn finite(self) -> Option<i64> {
        match self {
            ValInt::Fin(n) => Some(n),
            ValInt::Inf => None,
        }
    }

    /// Addition with `∞` absorbing.
    pub fn add(self, other: ValInt) -> ValInt {
        match (self, other) {
            (ValInt::Fin(a), ValInt::Fin(b)) => ValInt::Fin(a.checked_add(b).expect("value overflow")),
            _ => ValInt::Inf,
        }
    }

    /// `n·self` for `n ≥ 0`; `0·∞` is not needed by any caller and yields `∞`.
    pub fn scale(self, n: i64) -> ValInt {
        match self {
            ValInt::Fin(a) => ValInt::Fin(a.checked_mul(n).expect("value overflow")),
            ValInt::Inf => ValInt::Inf,
        }
    }

    /// Membership in `nZ ∪ {∞}`.
    pub fn divisible_by(self, n: u64) -> bool {
        match self {
            ValInt::Inf => true,
            ValInt::Fin(a) => a.rem_euclid(n as i64) == 0,
        }
    }
}

impl PartialOrd for ValInt {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ValInt {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (ValInt::Fin(a), ValInt::Fin(b)) => a.cmp(b),
            (ValInt::Fin(_), ValInt::Inf) => Ordering::Less,
            (ValInt::Inf, ValInt::Fin(_)) => Ordering::Greater,
            (ValInt::Inf, ValInt::Inf) => Ordering::Equal,
        }
    }
}

impl fmt::Display for ValInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValInt::Fin(n) => write!(f, "{}", n),
            ValInt::Inf => write!(f, "oo"),
        }
    }
}

impl fmt::Debug for ValInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

pub fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    if p < 4 {
        return true;
    }
    if p % 2 == 0 {
        return false;
    }
    let mut d = 3u64;
    while d.saturating_mul(d) <= p {
        if p % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

/// Exponent of `p` in a nonzero integer, by repeated division.
fn int_valuation(n: &BigInt, p: &BigInt) -> i64 {
    let mut n = n.abs();
    let mut k = 0;
    loop {
        let (q, r) = n.div_rem(p);
        if !r.is_zero() {
            return k;
        }
        n = q;
        k += 1;
    }
}

/// The p-adic valuation `v_p(a)`, `∞` exactly when `a = 0`.
pub fn vp(a: &Rat, p: u64) -> Result<ValInt> {
    if !is_prime(p) {
        return Err(Error::InvalidPlace(p.to_string()));
    }
    Ok(vp_unchecked(a, p))
}

/// [`vp`] for a `p` already known to be prime.
pub fn vp_unchecked(a: &Rat, p: u64) -> ValInt {
    if a.is_zero() {
        return ValInt::Inf;
    }
    let pb = BigInt::from(p);
    // numerator and denominator are coprime, so at most one is divisible by p
    ValInt::Fin(int_valuation(a.numer(), &pb) - int_valuation(a.denom(), &pb))
}

/// `|a| ≤ |b|` for the real absolute value.
pub fn abs_le_inf(a: &Rat, b: &Rat) -> bool {
    // |a.n|·b.d ≤ |b.n|·a.d with positive denominators
    let lhs = a.numer().abs() * b.denom();
    let rhs = b.numer().abs() * a.denom();
    lhs <= rhs
}

/// Whether `|a|` is the n-th power of a rational.
pub fn is_abs_nth_power(a: &Rat, n: u64) -> bool {
    if a.is_zero() || n == 1 {
        return true;
    }
    let n32 = match u32::try_from(n) {
        Ok(v) => v,
        Err(_) => return a.abs().is_one(),
    };
    let perfect = |m: &BigInt| {
        let r = m.abs().nth_root(n32);
        num_traits::pow::pow(r, n32 as usize) == m.abs()
    };
    perfect(a.numer()) && perfect(a.denom())
}

pub fn bigint_to_i64(n: &BigInt) -> Option<i64> {
    n.to_i64()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn r(s: &str) -> Rat {
        s.parse().unwrap()
    }

    #[test]
    fn valuation_examples() {
        assert_eq!(vp(&r("12"), 2).unwrap(), ValInt::Fin(2));
        assert_eq!(vp(&r("0"), 5).unwrap(), ValInt::Inf);
        assert_eq!(vp(&r("8/9"), 3).unwrap(), ValInt::Fin(-2));
        assert!(matches!(vp(&r("3"), 4), Err(Error::InvalidPlace(_))));
        assert!(matches!(vp(&r("3"), 1), Err(Error::InvalidPlace(_))));
    }

    #[test]
    fn abs_comparison_examples() {
        assert!(abs_le_inf(&r("-3"), &r("5")));
        assert!(!abs_le_inf(&r("1/2"), &r("1/3")));
        assert!(abs_le_inf(&r("-7/3"), &r("7/3")));
    }

    #[test]
    fn field_ops() {
        assert_eq!(r("1/2") + r("1/3"), r("5/6"));
        assert_eq!(r("2/3") * r("3/2"), Rat::one());
        assert!(r("1").checked_div(&Rat::zero()).is_err());
        assert_eq!(-r("2/4"), r("-1/2"));
        assert_eq!(r("-6/4").to_string(), "-3/2");
        assert_eq!(r("10/5").to_string(), "2");
    }

    #[test]
    fn parse_rejects_garbage() {
        for bad in ["", "1/", "/2", "1/-2", "x", "1.5", "--1", "1/0"] {
            assert!(bad.parse::<Rat>().is_err(), "{}", bad);
        }
    }

    #[test]
    fn nth_powers() {
        assert!(is_abs_nth_power(&r("-9/4"), 2));
        assert!(!is_abs_nth_power(&r("2"), 2));
        assert!(is_abs_nth_power(&r("8/27"), 3));
        assert!(is_abs_nth_power(&r("0"), 5));
    }

    #[test]
    fn residues() {
        let m = BigInt::from(9);
        // 1/2 ≡ 5 mod 9
        assert_eq!(r("1/2").residue_mod(&m).unwrap(), BigInt::from(5));
        assert!(r("1/3").residue_mod(&m).is_err());
    }

    fn arb_rat() -> impl Strategy<Value = Rat> {
        (-200i64..200, 1i64..60).prop_map(|(n, d)| Rat::new(n, d).unwrap())
    }

    fn arb_prime() -> impl Strategy<Value = u64> {
        prop::sample::select(vec![2u64, 3, 5, 7, 11])
    }

    proptest! {
        #[test]
        fn ultrametric(a in arb_rat(), b in arb_rat(), p in arb_prime()) {
            let va = vp(&a, p).unwrap();
            let vb = vp(&b, p).unwrap();
            let vs = vp(&(&a + &b), p).unwrap();
            prop_assert!(vs >= va.min(vb));
            if va != vb {
                prop_assert_eq!(vs, va.min(vb));
            }
        }

        #[test]
        fn compatible_with_scalars(l in arb_rat(), a in arb_rat(), p in arb_prime()) {
            prop_assert_eq!(vp(&(&l * &a), p).unwrap(), vp(&l, p).unwrap().add(vp(&a, p).unwrap()));
        }

        #[test]
        fn surjective(n in -10i64..=10, p in arb_prime()) {
            prop_assert_eq!(vp(&Rat::prime_pow(p, n), p).unwrap(), ValInt::Fin(n));
        }

        #[test]
        fn abs_multiplicative(a in arb_rat(), b in arb_rat(), c in arb_rat()) {
            // |a| ≤ |b| implies |ac| ≤ |bc|
            if abs_le_inf(&a, &b) {
                prop_assert!(abs_le_inf(&(&a * &c), &(&b * &c)));
            }
            prop_assert!(abs_le_inf(&a, &a));
        }

        #[test]
        fn display_roundtrip(a in arb_rat()) {
            prop_assert_eq!(a.to_string().parse::<Rat>().unwrap(), a);
        }
    }
}
