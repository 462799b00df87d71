//! Angular momentum states, Clebsch-Gordan coefficients and spherical tensor
//! matrix elements, all in exact arithmetic.

use alloc::format;
use alloc::vec::Vec;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::{Error, HalfInt, Radical, Result};

/// Basis ket `|ell, m>`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AngularState {
    pub ell: HalfInt,
    pub m: HalfInt,
}

impl AngularState {
    pub fn new(ell: HalfInt, m: HalfInt) -> Result<Self> {
        check_pair("ℓ", ell, m)?;
        Ok(AngularState { ell, m })
    }

    pub fn is_valid(ell: HalfInt, m: HalfInt) -> bool {
        check_pair("ℓ", ell, m).is_ok()
    }
}

impl core::fmt::Display for AngularState {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "|{},{}>", self.ell, self.m)
    }
}

fn check_pair(name: &str, j: HalfInt, m: HalfInt) -> Result<()> {
    if j < HalfInt::ZERO {
        return Err(Error::InvalidQuantumNumbers(format!("{name} = {j} is negative")));
    }
    if m.abs() > j {
        return Err(Error::InvalidQuantumNumbers(format!("|m| = {} exceeds {name} = {j}", m.abs())));
    }
    if !j.same_parity(m) {
        return Err(Error::InvalidQuantumNumbers(format!(
            "{name} = {j} and m = {m} mix integer and half-integer values"
        )));
    }
    Ok(())
}

/// Factorials `0!, 1!, ..., n!` as big integers.
struct Factorials(Vec<BigUint>);

impl Factorials {
    fn up_to(n: usize) -> Self {
        let mut table = Vec::with_capacity(n + 1);
        table.push(BigUint::one());
        for k in 1..=n {
            let next = &table[k - 1] * BigUint::from(k);
            table.push(next);
        }
        Factorials(table)
    }

    fn get(&self, twice: i64) -> &BigUint {
        debug_assert!(twice >= 0 && twice % 2 == 0);
        &self.0[(twice / 2) as usize]
    }
}

/// Clebsch-Gordan coefficient `<j1 m1; j2 m2 | J M>` in the Condon-Shortley
/// convention, evaluated exactly with Racah's single-sum formula.
///
/// The result is always a single signed square root of a rational.
pub fn clebsch_gordan(
    j1: HalfInt,
    m1: HalfInt,
    j2: HalfInt,
    m2: HalfInt,
    j: HalfInt,
    m: HalfInt,
) -> Result<Radical> {
    check_pair("j1", j1, m1)?;
    check_pair("j2", j2, m2)?;
    check_pair("J", j, m)?;
    if m != m1 + m2 {
        return Ok(Radical::zero());
    }
    if j < (j1 - j2).abs() || j > j1 + j2 || !(j1 + j2 + j).is_integer() {
        return Ok(Radical::zero());
    }
    // All quantities below are doubled integers; every factorial argument is
    // even once the selection rules pass.
    let (dj1, dm1, dj2, dm2, dj, dm) = (j1.twice(), m1.twice(), j2.twice(), m2.twice(), j.twice(), m.twice());
    let facts = Factorials::up_to(((dj1 + dj2 + dj) / 2 + 1) as usize);
    let f = |twice: i64| facts.get(twice).clone();

    let mut num = BigUint::from((dj + 1) as u64);
    num *= f(dj + dj1 - dj2) * f(dj - dj1 + dj2) * f(dj1 + dj2 - dj);
    num *= f(dj + dm) * f(dj - dm) * f(dj1 - dm1) * f(dj1 + dm1) * f(dj2 - dm2) * f(dj2 + dm2);
    let den = f(dj1 + dj2 + dj + 2);
    let under_root = BigRational::new(BigInt::from(num), BigInt::from(den));

    let k_min = 0.max(dj2 - dj - dm1).max(dj1 - dj + dm2);
    let k_max = (dj1 + dj2 - dj).min(dj1 - dm1).min(dj2 + dm2);
    let mut sum = BigRational::zero();
    let mut k = k_min;
    while k <= k_max {
        let denom = f(k) * f(dj1 + dj2 - dj - k) * f(dj1 - dm1 - k) * f(dj2 + dm2 - k) * f(dj - dj2 + dm1 + k) * f(dj - dj1 - dm2 + k);
        let term = BigRational::new(BigInt::one(), BigInt::from(denom));
        if (k / 2) % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
        k += 2;
    }
    let root = Radical::sqrt(&under_root).expect("factorial ratio is positive");
    Ok(root.scale(&sum))
}

/// Matrix element `<ell_out, m_out| Y^r_dm |ell_in, m_in>` with unit reduced
/// matrix element, i.e. the coupling coefficient
/// `<ell_in m_in; r dm | ell_out m_out>`.
///
/// Target states outside their manifold give zero; an invalid source state is
/// an error.
pub fn y_matrix_element(
    ell_out: HalfInt,
    m_out: HalfInt,
    r: i64,
    dm: i64,
    ell_in: HalfInt,
    m_in: HalfInt,
) -> Result<Radical> {
    if r < 1 {
        return Err(Error::InvalidQuantumNumbers(format!("tensor rank r = {r} must be at least 1")));
    }
    if dm.abs() > r {
        return Err(Error::InvalidQuantumNumbers(format!("|δm| = {} exceeds rank {r}", dm.abs())));
    }
    check_pair("ℓ", ell_in, m_in)?;
    if m_out != m_in + HalfInt::from_int(dm) || (ell_out - ell_in).abs() > HalfInt::from_int(r) {
        return Ok(Radical::zero());
    }
    if !AngularState::is_valid(ell_out, m_out) {
        return Ok(Radical::zero());
    }
    let rank = HalfInt::from_int(r);
    clebsch_gordan(ell_in, m_in, rank, HalfInt::from_int(dm), ell_out, m_out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radical::rational;

    fn h(twice: i64) -> HalfInt {
        HalfInt::from_twice(twice)
    }

    /// Independent oracle: Wigner's explicit table for `j2 = 1`, squared.
    fn cg_j2_one_squared(j: HalfInt, m: HalfInt, dm: i64, dj: i64) -> BigRational {
        let jj = j.to_rational();
        let mm = m.to_rational();
        let one = BigRational::one();
        let two = &one + &one;
        match (dj, dm) {
            (1, 1) => (&jj + &mm + &one) * (&jj + &mm + &two) / ((&two * &jj + &one) * (&two * &jj + &two)),
            (1, 0) => (&jj - &mm + &one) * (&jj + &mm + &one) / ((&two * &jj + &one) * (&jj + &one)),
            (1, -1) => (&jj - &mm + &one) * (&jj - &mm + &two) / ((&two * &jj + &one) * (&two * &jj + &two)),
            (0, 1) => (&jj - &mm) * (&jj + &mm + &one) / (&two * &jj * (&jj + &one)),
            (0, 0) => &mm * &mm / (&jj * (&jj + &one)),
            (0, -1) => (&jj + &mm) * (&jj - &mm + &one) / (&two * &jj * (&jj + &one)),
            (-1, 1) => (&jj - &mm - &one) * (&jj - &mm) / (&two * &jj * (&two * &jj + &one)),
            (-1, 0) => (&jj - &mm) * (&jj + &mm) / (&jj * (&two * &jj + &one)),
            (-1, -1) => (&jj + &mm) * (&jj + &mm - &one) / (&two * &jj * (&two * &jj + &one)),
            _ => unreachable!(),
        }
    }

    #[test]
    fn trivial_and_triangle() {
        let z = HalfInt::ZERO;
        assert_eq!(clebsch_gordan(z, z, z, z, z, z).unwrap(), Radical::one());
        let one = HalfInt::from_int(1);
        assert!(clebsch_gordan(one, one, one, -one, HalfInt::from_int(3), z).unwrap().is_zero());
        assert!(clebsch_gordan(one, one, one, z, one, z).unwrap().is_zero());
    }

    #[test]
    fn invalid_arguments_rejected() {
        let one = HalfInt::from_int(1);
        assert!(clebsch_gordan(one, HalfInt::from_int(2), one, HalfInt::ZERO, one, HalfInt::ZERO).is_err());
        assert!(clebsch_gordan(one, h(1), one, HalfInt::ZERO, one, HalfInt::ZERO).is_err());
        assert!(clebsch_gordan(-one, HalfInt::ZERO, one, HalfInt::ZERO, one, HalfInt::ZERO).is_err());
    }

    #[test]
    fn known_values() {
        // <1/2 1/2; 1/2 -1/2 | 1 0> = 1/sqrt 2, <1/2 -1/2; 1/2 1/2 | 0 0> = -1/sqrt 2
        let c = clebsch_gordan(h(1), h(1), h(1), h(-1), h(2), h(0)).unwrap();
        assert_eq!(c, Radical::sqrt(&rational(1, 2)).unwrap());
        let c = clebsch_gordan(h(1), h(-1), h(1), h(1), h(0), h(0)).unwrap();
        assert_eq!(c, -Radical::sqrt(&rational(1, 2)).unwrap());
        // <2 1; 1 0 | 1 1>^2 = (l^2 - m^2)/(l(2l+1)) = 3/10 at l = 2, m = 1
        let c = clebsch_gordan(h(4), h(2), h(2), h(0), h(2), h(2)).unwrap();
        assert_eq!(&c * &c, Radical::from_ratio(3, 10));
        assert_eq!(c.signum(), core::cmp::Ordering::Less);
    }

    #[test]
    fn matches_rank_one_table() {
        for tj in 1..=12i64 {
            let j = h(tj);
            let mut tm = -tj;
            while tm <= tj {
                for dj in -1..=1i64 {
                    for dm in -1..=1i64 {
                        let big_j = j + HalfInt::from_int(dj);
                        let big_m = h(tm) + HalfInt::from_int(dm);
                        if big_j < HalfInt::ZERO || big_m.abs() > big_j {
                            continue;
                        }
                        let c = clebsch_gordan(j, h(tm), HalfInt::from_int(1), HalfInt::from_int(dm), big_j, big_m).unwrap();
                        let sq = (&c * &c).to_rational().unwrap();
                        assert_eq!(sq, cg_j2_one_squared(j, h(tm), dm, dj), "j={j} m={} dm={dm} dj={dj}", h(tm));
                    }
                }
                tm += 2;
            }
        }
    }

    #[test]
    fn orthogonality() {
        // sum_{m1,m2} C^{JM} C^{J'M'} = delta_JJ' delta_MM' for j1, j2 <= 2
        for tj1 in 0..=4i64 {
            for tj2 in 0..=4i64 {
                let (j1, j2) = (h(tj1), h(tj2));
                let totals: Vec<(HalfInt, HalfInt)> = {
                    let mut v = Vec::new();
                    let mut tj = (tj1 - tj2).abs();
                    while tj <= tj1 + tj2 {
                        let mut tm = -tj;
                        while tm <= tj {
                            v.push((h(tj), h(tm)));
                            tm += 2;
                        }
                        tj += 2;
                    }
                    v
                };
                for &(ja, ma) in &totals {
                    for &(jb, mb) in &totals {
                        let mut acc = Radical::zero();
                        let mut tm1 = -tj1;
                        while tm1 <= tj1 {
                            let mut tm2 = -tj2;
                            while tm2 <= tj2 {
                                let a = clebsch_gordan(j1, h(tm1), j2, h(tm2), ja, ma).unwrap();
                                let b = clebsch_gordan(j1, h(tm1), j2, h(tm2), jb, mb).unwrap();
                                acc += &a * &b;
                                tm2 += 2;
                            }
                            tm1 += 2;
                        }
                        let expected = if ja == jb && ma == mb { Radical::one() } else { Radical::zero() };
                        assert_eq!(acc, expected);
                    }
                }
            }
        }
    }

    #[test]
    fn y_element_rank_one_profiles() {
        let ell = HalfInt::from_int(5);
        // dl = -1, dm = 0: proportional to sqrt(l^2 - m^2)
        let mut ratio: Option<Radical> = None;
        for tm in (-8..=8).step_by(2) {
            let m = h(tm);
            let y = y_matrix_element(ell - HalfInt::from_int(1), m, 1, 0, ell, m).unwrap();
            let closed = Radical::sqrt(&(ell.to_rational().pow(2) - m.to_rational().pow(2))).unwrap();
            let r = &y * &closed.inverse().unwrap();
            match &ratio {
                None => ratio = Some(r),
                Some(prev) => assert_eq!(prev, &r),
            }
        }
        // dl = +1, dm = +1: proportional to sqrt((l+m+1)(l+m+2))
        let mut ratio: Option<Radical> = None;
        for tm in (-10..=10).step_by(2) {
            let m = h(tm);
            let y = y_matrix_element(ell + HalfInt::from_int(1), m + HalfInt::from_int(1), 1, 1, ell, m).unwrap();
            let one = BigRational::one();
            let s = ell.to_rational() + m.to_rational();
            let closed = Radical::sqrt(&((&s + &one) * (&s + &one + &one))).unwrap();
            let r = &y * &closed.inverse().unwrap();
            match &ratio {
                None => ratio = Some(r),
                Some(prev) => assert_eq!(prev, &r),
            }
        }
        assert!(y_matrix_element(ell, h(2), 1, 0, ell, h(0)).unwrap().is_zero());
        assert!(y_matrix_element(ell, h(0), 0, 0, ell, h(0)).is_err());
        assert!(y_matrix_element(ell, h(0), 1, 2, ell, h(0)).is_err());
    }
}
