//! Codeword pairs on a single ℓ₀ manifold and the code families built from
//! them.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;

use crate::angular::AngularState;
use crate::{Error, HalfInt, Radical, Result};

/// Whether a family is built to the error-correction bounds or to the weaker
/// error-detection bounds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub enum Mode {
    #[default]
    Correction,
    Detection,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Family {
    Symmetric,
    Detection,
    CounterSymmetric(Mode),
    Binomial(Mode),
    Search,
    Custom,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Symmetric => "symmetric",
            Family::Detection => "detection",
            Family::CounterSymmetric(Mode::Correction) => "counter_symmetric",
            Family::CounterSymmetric(Mode::Detection) => "counter_symmetric_detect",
            Family::Binomial(Mode::Correction) => "binomial",
            Family::Binomial(Mode::Detection) => "binomial_detect",
            Family::Search => "search",
            Family::Custom => "custom",
        }
    }

    pub fn from_name(name: &str) -> Option<Family> {
        Some(match name {
            "symmetric" => Family::Symmetric,
            "detection" => Family::Detection,
            "counter_symmetric" => Family::CounterSymmetric(Mode::Correction),
            "counter_symmetric_detect" => Family::CounterSymmetric(Mode::Detection),
            "binomial" => Family::Binomial(Mode::Correction),
            "binomial_detect" => Family::Binomial(Mode::Detection),
            "search" => Family::Search,
            "custom" => Family::Custom,
            _ => return None,
        })
    }
}

/// Sparse state on the ℓ₀ manifold, amplitudes keyed by `m`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Codeword {
    pub ell0: HalfInt,
    amplitudes: BTreeMap<HalfInt, Radical>,
}

impl Codeword {
    /// Zero amplitudes are dropped; nothing else is checked (see [`validate`]).
    pub fn new<I: IntoIterator<Item = (HalfInt, Radical)>>(ell0: HalfInt, amplitudes: I) -> Self {
        let mut map: BTreeMap<HalfInt, Radical> = BTreeMap::new();
        for (m, a) in amplitudes {
            *map.entry(m).or_default() += a;
        }
        map.retain(|_, a| !a.is_zero());
        Codeword { ell0, amplitudes: map }
    }

    /// Codeword with amplitudes `sqrt(p_m)`.
    pub fn from_probabilities<'a, I>(ell0: HalfInt, probs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (HalfInt, &'a BigRational)>,
    {
        let mut out = Vec::new();
        for (m, p) in probs {
            let amp = Radical::sqrt(p).ok_or_else(|| Error::Internal(format!("negative probability {p} at m = {m}")))?;
            out.push((m, amp));
        }
        Ok(Codeword::new(ell0, out))
    }

    pub fn amplitudes(&self) -> &BTreeMap<HalfInt, Radical> {
        &self.amplitudes
    }

    pub fn amplitude(&self, m: HalfInt) -> Option<&Radical> {
        self.amplitudes.get(&m)
    }

    pub fn support(&self) -> impl Iterator<Item = HalfInt> + '_ {
        self.amplitudes.keys().copied()
    }

    /// `|a_m|^2` for every supported `m`.
    pub fn probabilities(&self) -> impl Iterator<Item = (HalfInt, Radical)> + '_ {
        self.amplitudes.iter().map(|(m, a)| (*m, a * a))
    }

    pub fn norm_squared(&self) -> Radical {
        self.amplitudes.values().map(|a| a * a).sum()
    }

    pub fn inner(&self, other: &Codeword) -> Radical {
        self.amplitudes
            .iter()
            .filter_map(|(m, a)| other.amplitudes.get(m).map(|b| a * b))
            .sum()
    }
}

/// A pair of codewords `|0̄>`, `|1̄>` on one manifold.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Code {
    pub zero: Codeword,
    pub one: Codeword,
    pub family: Family,
    /// Constructor parameters in construction order.
    pub parameters: Vec<(String, HalfInt)>,
}

impl Code {
    pub fn new(zero: Codeword, one: Codeword, family: Family, parameters: Vec<(String, HalfInt)>) -> Result<Self> {
        if zero.ell0 != one.ell0 {
            return Err(Error::ManifoldMismatch { expected: zero.ell0, found: one.ell0 });
        }
        Ok(Code { zero, one, family, parameters })
    }

    pub fn ell0(&self) -> HalfInt {
        self.zero.ell0
    }

    pub fn codeword(&self, which: usize) -> &Codeword {
        if which == 0 {
            &self.zero
        } else {
            &self.one
        }
    }

    /// The code with `|0̄>` and `|1̄>` exchanged.
    pub fn swapped(&self) -> Code {
        Code { zero: self.one.clone(), one: self.zero.clone(), family: self.family, parameters: self.parameters.clone() }
    }

    /// Smallest distance between two supported basis states, counting a
    /// state supported by both codewords as distance zero. `None` for fewer
    /// than two support points.
    pub fn support_spacing(&self) -> Option<HalfInt> {
        let mut points: Vec<HalfInt> = self.zero.support().chain(self.one.support()).collect();
        points.sort();
        points.windows(2).map(|w| w[1] - w[0]).min()
    }

    /// Every supported `m`, sorted and deduplicated.
    pub fn support(&self) -> Vec<HalfInt> {
        let mut points: Vec<HalfInt> = self.zero.support().chain(self.one.support()).collect();
        points.sort();
        points.dedup();
        points
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Finding {
    ManifoldMismatch { zero: HalfInt, one: HalfInt },
    EmptyCodeword { codeword: usize },
    OutOfManifold { codeword: usize, m: HalfInt },
    NegativeAmplitude { codeword: usize, m: HalfInt },
    NotNormalized { codeword: usize, norm_squared: Radical },
    NonOrthogonal { inner: Radical },
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Finding::ManifoldMismatch { zero, one } => write!(f, "codewords on different manifolds (ℓ = {zero} vs {one})"),
            Finding::EmptyCodeword { codeword } => write!(f, "codeword {codeword} is empty"),
            Finding::OutOfManifold { codeword, m } => write!(f, "codeword {codeword} supported at invalid m = {m}"),
            Finding::NegativeAmplitude { codeword, m } => write!(f, "codeword {codeword} has a negative amplitude at m = {m}"),
            Finding::NotNormalized { codeword, norm_squared } => {
                write!(f, "codeword {codeword}: normalization ≠ 1 (norm² = {norm_squared})")
            }
            Finding::NonOrthogonal { inner } => write!(f, "codewords are non-orthogonal (<0|1> = {inner})"),
        }
    }
}

/// Structural checks: manifold bounds, nonnegative amplitudes, normalization
/// and orthogonality. Support spacing is reported by
/// [`Code::support_spacing`] and enforced by the reduction check.
pub fn validate(code: &Code) -> Vec<Finding> {
    let mut findings = Vec::new();
    if code.zero.ell0 != code.one.ell0 {
        findings.push(Finding::ManifoldMismatch { zero: code.zero.ell0, one: code.one.ell0 });
    }
    for (i, cw) in [&code.zero, &code.one].into_iter().enumerate() {
        if cw.amplitudes.is_empty() {
            findings.push(Finding::EmptyCodeword { codeword: i });
            continue;
        }
        for (m, a) in &cw.amplitudes {
            if !AngularState::is_valid(cw.ell0, *m) {
                findings.push(Finding::OutOfManifold { codeword: i, m: *m });
            }
            if a.signum() == Ordering::Less {
                findings.push(Finding::NegativeAmplitude { codeword: i, m: *m });
            }
        }
        let norm = cw.norm_squared();
        if norm != Radical::one() {
            findings.push(Finding::NotNormalized { codeword: i, norm_squared: norm });
        }
    }
    let inner = code.zero.inner(&code.one);
    if !inner.is_zero() {
        findings.push(Finding::NonOrthogonal { inner });
    }
    findings
}

fn need(ok: bool, message: impl FnOnce() -> String) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::Parameter(message()))
    }
}

fn sqrt_q(q: BigRational) -> Radical {
    Radical::sqrt(&q).expect("nonnegative by construction")
}

fn q(h: HalfInt) -> BigRational {
    h.to_rational()
}

fn params(pairs: &[(&str, HalfInt)]) -> Vec<(String, HalfInt)> {
    pairs.iter().map(|(k, v)| (String::from(*k), *v)).collect()
}

/// `|0̄> = (|ℓ,-m1> + |ℓ,m1>)/√2`,
/// `|1̄> = √(1 - m1²/m2²)|ℓ,0> + √(m1²/2m2²)(|ℓ,-m2> + |ℓ,m2>)`.
pub fn symmetric_code(ell: HalfInt, m1: HalfInt, m2: HalfInt) -> Result<Code> {
    need(ell.is_integer() && m1.is_integer() && m2.is_integer(), || {
        format!("symmetric code requires integer ℓ, m1, m2 (got ℓ = {ell}, m1 = {m1}, m2 = {m2})")
    })?;
    need(ell >= HalfInt::from_int(6), || format!("symmetric code requires ℓ ≥ 6 (got ℓ = {ell})"))?;
    need(m1 >= HalfInt::from_int(3), || format!("symmetric code requires m1 ≥ 3 (got m1 = {m1})"))?;
    need(m2 >= m1 + HalfInt::from_int(3), || format!("symmetric code requires m2 ≥ m1 + 3 (got m1 = {m1}, m2 = {m2})"))?;
    need(m2 <= ell, || format!("symmetric code requires m2 ≤ ℓ (got m2 = {m2}, ℓ = {ell})"))?;

    let half = BigRational::new(BigInt::from(1), BigInt::from(2));
    let ratio = (q(m1) * q(m1)) / (q(m2) * q(m2));
    let zero = Codeword::new(ell, [(-m1, sqrt_q(half.clone())), (m1, sqrt_q(half.clone()))]);
    let side = sqrt_q(&ratio * &half);
    let one = Codeword::new(
        ell,
        [(-m2, side.clone()), (HalfInt::ZERO, sqrt_q(BigRational::one() - &ratio)), (m2, side)],
    );
    Code::new(zero, one, Family::Symmetric, params(&[("ell", ell), ("m1", m1), ("m2", m2)]))
}

/// `|0̄> = (|ℓ,-m> + |ℓ,m>)/√2`, `|1̄> = |ℓ,0>`.
pub fn detection_code(ell: HalfInt, m: HalfInt) -> Result<Code> {
    need(ell.is_integer() && m.is_integer(), || format!("detection code requires integer ℓ and m (got ℓ = {ell}, m = {m})"))?;
    need(ell >= HalfInt::from_int(2), || format!("detection code requires ℓ ≥ 2 (got ℓ = {ell})"))?;
    need(m >= HalfInt::from_int(2), || format!("detection code requires m ≥ 2 (got m = {m})"))?;
    need(m <= ell, || format!("detection code requires m ≤ ℓ (got m = {m}, ℓ = {ell})"))?;
    let half = BigRational::new(BigInt::from(1), BigInt::from(2));
    let zero = Codeword::new(ell, [(-m, sqrt_q(half.clone())), (m, sqrt_q(half))]);
    let one = Codeword::new(ell, [(HalfInt::ZERO, Radical::one())]);
    Code::new(zero, one, Family::Detection, params(&[("ell", ell), ("m", m)]))
}

/// `|0̄> = √(m2/(m1+m2))|ℓ,-m1> + √(m1/(m1+m2))|ℓ,m2>` and its mirror image
/// `|1̄>` under `m → -m`.
pub fn counter_symmetric_code(ell: HalfInt, m1: HalfInt, m2: HalfInt, mode: Mode) -> Result<Code> {
    let (min_ell, min_m1, gap) = match mode {
        Mode::Correction => (HalfInt::from_twice(9), HalfInt::from_twice(3), HalfInt::from_int(3)),
        Mode::Detection => (HalfInt::from_int(3), HalfInt::from_int(1), HalfInt::from_int(2)),
    };
    need(ell.same_parity(m1) && ell.same_parity(m2), || {
        format!("counter-symmetric code requires m1, m2 to match the integer/half-integer character of ℓ (got ℓ = {ell}, m1 = {m1}, m2 = {m2})")
    })?;
    need(ell >= min_ell, || format!("counter-symmetric code requires ℓ ≥ {min_ell} (got ℓ = {ell})"))?;
    need(m1 >= min_m1, || format!("counter-symmetric code requires m1 ≥ {min_m1} (got m1 = {m1})"))?;
    need(m2 >= m1 + gap, || format!("counter-symmetric code requires m2 ≥ m1 + {gap} (got m1 = {m1}, m2 = {m2})"))?;
    need(m2 <= ell, || format!("counter-symmetric code requires m2 ≤ ℓ (got m2 = {m2}, ℓ = {ell})"))?;

    let total = q(m1) + q(m2);
    let big = sqrt_q(q(m2) / &total);
    let small = sqrt_q(q(m1) / &total);
    let zero = Codeword::new(ell, [(-m1, big.clone()), (m2, small.clone())]);
    let one = Codeword::new(ell, [(-m2, small), (m1, big)]);
    Code::new(zero, one, Family::CounterSymmetric(mode), params(&[("ell", ell), ("m1", m1), ("m2", m2)]))
}

fn binomial(n: u64, k: u64) -> BigInt {
    (0..k).fold(BigInt::one(), |acc, i| acc * BigInt::from(n - i) / BigInt::from(i + 1))
}

/// Binomial-like code of order `n`: with `N = 2n+1` (correction) or `N = n+1`
/// (detection), `|0̄>/|1̄>` place amplitude `√(C(N,k)/2^(N-1))` on
/// `m = -m0 + kN` for even/odd `k = 0..N`.
pub fn binomial_ae_code(n: i64, ell0: HalfInt, m0: HalfInt, mode: Mode) -> Result<Code> {
    need(n >= 1, || format!("binomial code requires n ≥ 1 (got n = {n})"))?;
    let spacing = match mode {
        Mode::Correction => 2 * n + 1,
        Mode::Detection => n + 1,
    };
    let floor = HalfInt::from_twice(spacing * spacing);
    need(ell0 >= floor, || format!("binomial code of order {n} requires ℓ₀ ≥ {floor} (got ℓ₀ = {ell0})"))?;
    need(m0 >= floor, || format!("binomial code of order {n} requires m0 ≥ {floor} (got m0 = {m0})"))?;
    need(ell0.same_parity(m0), || format!("binomial code requires m0 to match the character of ℓ₀ (got ℓ₀ = {ell0}, m0 = {m0})"))?;
    let top = -m0 + HalfInt::from_int(spacing * spacing);
    need(m0 <= ell0 && top <= ell0, || {
        format!("binomial code support [{}, {top}] must lie within |m| ≤ ℓ₀ = {ell0}", -m0)
    })?;

    let denom = BigInt::from(2).pow((spacing - 1) as u32);
    let mut zero = Vec::new();
    let mut one = Vec::new();
    for k in 0..=spacing {
        let m = -m0 + HalfInt::from_int(k * spacing);
        let amp = sqrt_q(BigRational::new(binomial(spacing as u64, k as u64), denom.clone()));
        if k % 2 == 0 {
            zero.push((m, amp));
        } else {
            one.push((m, amp));
        }
    }
    Code::new(
        Codeword::new(ell0, zero),
        Codeword::new(ell0, one),
        Family::Binomial(mode),
        params(&[("n", HalfInt::from_int(n)), ("ell0", ell0), ("m0", m0)]),
    )
}
