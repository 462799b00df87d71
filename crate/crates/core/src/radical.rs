//! Exact scalars of the form `sum_i q_i * sqrt(r_i)` with rational `q_i` and
//! distinct square-free radicands `r_i`.
//!
//! Square roots of distinct square-free integers are linearly independent
//! over the rationals, so the term map is canonical: two radicals are equal
//! as real numbers exactly when their maps are equal.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;
use core::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::{Integer, Roots};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Splits `n` into `(outer, inner)` with `n = outer^2 * inner` and `inner`
/// square-free.
///
/// Trial division only runs while `p^3 <= rest`; past that point the
/// remainder has at most two prime factors, all larger than `p`, so it is
/// either a prime square or square-free.
pub fn square_free_split(n: &BigUint) -> (BigUint, BigUint) {
    if n.is_zero() {
        return (BigUint::zero(), BigUint::zero());
    }
    if let Some(small) = n.to_u64() {
        let (o, i) = square_free_split_u64(small);
        return (BigUint::from(o), BigUint::from(i));
    }
    let mut rest = n.clone();
    let mut outer = BigUint::one();
    let mut inner = BigUint::one();
    let mut p = BigUint::from(2u32);
    while &p * &p * &p <= rest {
        let mut count = 0u32;
        while (&rest % &p).is_zero() {
            rest /= &p;
            count += 1;
        }
        if count > 0 {
            outer *= p.pow(count / 2);
            if count % 2 == 1 {
                inner *= &p;
            }
        }
        if let Some(small) = rest.to_u64() {
            let (o, i) = square_free_split_u64(small);
            return (outer * o, inner * i);
        }
        p += 1u32;
    }
    let root = rest.sqrt();
    if &root * &root == rest && !rest.is_one() {
        outer *= root;
    } else {
        inner *= rest;
    }
    (outer, inner)
}

fn square_free_split_u64(n: u64) -> (u64, u64) {
    let mut rest = n;
    let mut outer = 1u64;
    let mut inner = 1u64;
    let mut p = 2u64;
    while (p as u128) * (p as u128) * (p as u128) <= rest as u128 {
        let mut count = 0u32;
        while rest.is_multiple_of(p) {
            rest /= p;
            count += 1;
        }
        if count > 0 {
            outer *= p.pow(count / 2);
            if count % 2 == 1 {
                inner *= p;
            }
        }
        p += if p == 2 { 1 } else { 2 };
    }
    let root = rest.sqrt();
    if root * root == rest && rest != 1 {
        outer *= root;
    } else {
        inner *= rest;
    }
    (outer, inner)
}

/// Exact element of `Q(sqrt 2, sqrt 3, sqrt 5, ...)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Radical {
    terms: BTreeMap<BigUint, BigRational>,
}

impl Radical {
    pub fn zero() -> Self {
        Radical::default()
    }

    pub fn one() -> Self {
        Radical::from_rational(BigRational::one())
    }

    pub fn from_integer(value: i64) -> Self {
        Radical::from_rational(BigRational::from_integer(BigInt::from(value)))
    }

    pub fn from_ratio(numer: i64, denom: i64) -> Self {
        Radical::from_rational(BigRational::new(BigInt::from(numer), BigInt::from(denom)))
    }

    pub fn from_rational(value: BigRational) -> Self {
        let mut terms = BTreeMap::new();
        if !value.is_zero() {
            terms.insert(BigUint::one(), value);
        }
        Radical { terms }
    }

    /// `coefficient * sqrt(radicand)` for an arbitrary (not necessarily
    /// square-free) radicand.
    pub fn term(coefficient: BigRational, radicand: &BigUint) -> Self {
        if coefficient.is_zero() || radicand.is_zero() {
            return Radical::zero();
        }
        let (outer, inner) = square_free_split(radicand);
        let mut terms = BTreeMap::new();
        terms.insert(inner, coefficient * BigRational::from_integer(BigInt::from(outer)));
        Radical { terms }
    }

    /// Principal square root of a nonnegative rational. Returns `None` for
    /// negative input.
    pub fn sqrt(value: &BigRational) -> Option<Self> {
        if value.is_negative() {
            return None;
        }
        if value.is_zero() {
            return Some(Radical::zero());
        }
        // value is kept reduced, so numer and denom are coprime and the
        // product of their square-free parts is square-free.
        let numer = value.numer().magnitude();
        let denom = value.denom().magnitude();
        let (no, ni) = square_free_split(numer);
        let (d_o, di) = square_free_split(denom);
        let coefficient = BigRational::new(BigInt::from(no), BigInt::from(d_o * &di));
        let mut terms = BTreeMap::new();
        terms.insert(ni * di, coefficient);
        Some(Radical { terms })
    }

    /// `sign(value) * sqrt(|value|)`, the usual form of coupling coefficients.
    pub fn signed_sqrt(value: &BigRational) -> Self {
        let root = Radical::sqrt(&value.abs()).expect("abs is nonnegative");
        if value.is_negative() {
            -root
        } else {
            root
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// `(radicand, coefficient)` pairs in increasing radicand order.
    pub fn terms(&self) -> impl Iterator<Item = (&BigUint, &BigRational)> {
        self.terms.iter()
    }

    /// Builds a radical from square-free terms, merging duplicates.
    pub fn from_terms<I>(terms: I) -> Self
    where
        I: IntoIterator<Item = (BigUint, BigRational)>,
    {
        let mut out = Radical::zero();
        for (radicand, coefficient) in terms {
            out += Radical::term(coefficient, &radicand);
        }
        out
    }

    /// The value as a rational, when it has no irrational part.
    pub fn to_rational(&self) -> Option<BigRational> {
        match self.terms.len() {
            0 => Some(BigRational::zero()),
            1 => {
                let (r, c) = self.terms.iter().next()?;
                r.is_one().then(|| c.clone())
            }
            _ => None,
        }
    }

    pub fn scale(&self, factor: &BigRational) -> Self {
        if factor.is_zero() {
            return Radical::zero();
        }
        Radical {
            terms: self.terms.iter().map(|(r, c)| (r.clone(), c * factor)).collect(),
        }
    }

    pub fn to_f64(&self) -> f64 {
        self.terms
            .iter()
            .map(|(r, c)| rational_to_f64(c) * libm::sqrt(r.to_f64().unwrap_or(f64::INFINITY)))
            .sum()
    }

    /// Sum of `|q_i| sqrt(r_i)`; bounds the magnitude and sets the scale for
    /// rounding error in [`Radical::to_f64`].
    pub fn abs_sum_f64(&self) -> f64 {
        self.terms
            .iter()
            .map(|(r, c)| rational_to_f64(c).abs() * libm::sqrt(r.to_f64().unwrap_or(f64::INFINITY)))
            .sum()
    }

    /// Exact sign of the real value.
    pub fn signum(&self) -> Ordering {
        match self.terms.len() {
            0 => return Ordering::Equal,
            1 => {
                let c = self.terms.values().next().expect("one term");
                return if c.is_positive() { Ordering::Greater } else { Ordering::Less };
            }
            _ => {}
        }
        let approx = self.to_f64();
        if approx.abs() > 1e-9 * self.abs_sum_f64() {
            return if approx > 0.0 { Ordering::Greater } else { Ordering::Less };
        }
        exact_signum(self)
    }

    /// Multiplicative inverse, when it exists.
    pub fn inverse(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        // Rationalize by repeatedly multiplying with a conjugate until the
        // denominator has no square roots left.
        let mut numer = Radical::one();
        let mut denom = self.clone();
        while denom.to_rational().is_none() {
            let prime = split_prime(&denom);
            let conj = conjugate_at(&denom, &prime);
            numer = &numer * &conj;
            denom = &denom * &conj;
        }
        let d = denom.to_rational()?;
        Some(numer.scale(&(BigRational::one() / d)))
    }
}

/// Smallest prime dividing some radicand of `x` (which must have one).
fn split_prime(x: &Radical) -> BigUint {
    let radicand = x.terms.keys().find(|r| !r.is_one()).expect("irrational part");
    smallest_prime_factor(radicand)
}

fn smallest_prime_factor(n: &BigUint) -> BigUint {
    let mut p = BigUint::from(2u32);
    while &p * &p <= *n {
        if (n % &p).is_zero() {
            return p;
        }
        p += 1u32;
    }
    n.clone()
}

/// Flips the sign of every term whose radicand is divisible by `prime`.
fn conjugate_at(x: &Radical, prime: &BigUint) -> Radical {
    Radical {
        terms: x
            .terms
            .iter()
            .map(|(r, c)| {
                if (r % prime).is_zero() {
                    (r.clone(), -c.clone())
                } else {
                    (r.clone(), c.clone())
                }
            })
            .collect(),
    }
}

/// Writes `x = a + b sqrt(p)` with `a`, `b` free of the prime `p` and decides
/// the sign from `sign(a)`, `sign(b)` and `sign(a^2 - p b^2)`.
fn exact_signum(x: &Radical) -> Ordering {
    if x.terms.len() <= 1 {
        return x.signum();
    }
    let prime = split_prime(x);
    let mut a = Radical::zero();
    let mut b = Radical::zero();
    for (r, c) in &x.terms {
        if (r % &prime).is_zero() {
            b.terms.insert(r / &prime, c.clone());
        } else {
            a.terms.insert(r.clone(), c.clone());
        }
    }
    let sa = a.signum();
    let sb = b.signum();
    if sb == Ordering::Equal {
        return sa;
    }
    if sa == Ordering::Equal || sa == sb {
        return if sa == Ordering::Equal { sb } else { sa };
    }
    let p = BigRational::from_integer(BigInt::from(prime));
    let disc = &(&a * &a) - &(&b * &b).scale(&p);
    match disc.signum() {
        Ordering::Greater => sa,
        Ordering::Less => sb,
        Ordering::Equal => Ordering::Equal,
    }
}

pub(crate) fn rational_to_f64(q: &BigRational) -> f64 {
    q.to_f64().unwrap_or_else(|| {
        let n = q.numer().to_f64().unwrap_or(f64::NAN);
        let d = q.denom().to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

impl<'a> Add<&'a Radical> for &'a Radical {
    type Output = Radical;
    fn add(self, rhs: &Radical) -> Radical {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Add for Radical {
    type Output = Radical;
    fn add(mut self, rhs: Radical) -> Radical {
        self += &rhs;
        self
    }
}

impl AddAssign<&Radical> for Radical {
    fn add_assign(&mut self, rhs: &Radical) {
        for (r, c) in &rhs.terms {
            add_term(&mut self.terms, r, c);
        }
    }
}

impl AddAssign for Radical {
    fn add_assign(&mut self, rhs: Radical) {
        *self += &rhs;
    }
}

fn add_term(terms: &mut BTreeMap<BigUint, BigRational>, radicand: &BigUint, coefficient: &BigRational) {
    if coefficient.is_zero() {
        return;
    }
    match terms.get_mut(radicand) {
        Some(existing) => {
            *existing += coefficient;
            if existing.is_zero() {
                terms.remove(radicand);
            }
        }
        None => {
            terms.insert(radicand.clone(), coefficient.clone());
        }
    }
}

impl<'a> Sub<&'a Radical> for &'a Radical {
    type Output = Radical;
    fn sub(self, rhs: &Radical) -> Radical {
        let mut out = self.clone();
        out += &-rhs;
        out
    }
}

impl Sub for Radical {
    type Output = Radical;
    fn sub(self, rhs: Radical) -> Radical {
        &self - &rhs
    }
}

impl Neg for &Radical {
    type Output = Radical;
    fn neg(self) -> Radical {
        Radical {
            terms: self.terms.iter().map(|(r, c)| (r.clone(), -c.clone())).collect(),
        }
    }
}

impl Neg for Radical {
    type Output = Radical;
    fn neg(mut self) -> Radical {
        for c in self.terms.values_mut() {
            *c = -core::mem::take(c);
        }
        self
    }
}

impl<'a> Mul<&'a Radical> for &'a Radical {
    type Output = Radical;
    fn mul(self, rhs: &Radical) -> Radical {
        let mut terms = BTreeMap::new();
        for (ra, ca) in &self.terms {
            for (rb, cb) in &rhs.terms {
                // sqrt(a) sqrt(b) = g sqrt((a/g)(b/g)) with g = gcd(a, b); the
                // cofactors of square-free numbers are coprime and square-free.
                let g = ra.gcd(rb);
                let radicand = (ra / &g) * (rb / &g);
                let coefficient = ca * cb * BigRational::from_integer(BigInt::from_biguint(Sign::Plus, g));
                add_term(&mut terms, &radicand, &coefficient);
            }
        }
        Radical { terms }
    }
}

impl Mul for Radical {
    type Output = Radical;
    fn mul(self, rhs: Radical) -> Radical {
        &self * &rhs
    }
}

impl core::iter::Sum for Radical {
    fn sum<I: Iterator<Item = Radical>>(iter: I) -> Radical {
        let mut acc = Radical::zero();
        for x in iter {
            acc += &x;
        }
        acc
    }
}

impl fmt::Display for Radical {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (r, c)) in self.terms.iter().enumerate() {
            let (sign, mag) = if c.is_negative() { ("-", -c.clone()) } else { ("+", c.clone()) };
            if i == 0 {
                if sign == "-" {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", sign)?;
            }
            if r.is_one() {
                write!(f, "{}", mag)?;
            } else if mag.is_one() {
                write!(f, "√{}", r)?;
            } else {
                write!(f, "({})√{}", mag, r)?;
            }
        }
        Ok(())
    }
}

/// Helper for building small rationals in code and tests.
pub fn rational(numer: i64, denom: i64) -> BigRational {
    BigRational::new(BigInt::from(numer), BigInt::from(denom))
}

/// Collects the distinct radicands of several values.
pub fn radicands<'a, I: IntoIterator<Item = &'a Radical>>(values: I) -> Vec<BigUint> {
    let mut out: Vec<BigUint> = values.into_iter().flat_map(|v| v.terms.keys().cloned()).collect();
    out.sort();
    out.dedup();
    out
}
