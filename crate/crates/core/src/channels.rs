//! Noise operators on a single angular momentum manifold: the nine
//! first-order absorption/emission/dephasing operators, general order-n
//! transition channels built from spherical tensor elements, powers of the
//! dephasing operator, and resolved rank-one transitions.
//!
//! Operators are stored unnormalized. Knill-Laflamme verdicts do not change
//! when an operator is multiplied by a nonzero scalar, so proportionality
//! constants are dropped throughout.

use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;

use crate::angular::{y_matrix_element, AngularState};
use crate::{Error, HalfInt, Radical, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum OpLabel {
    /// Emission `E_dm`, lowering ℓ by one.
    E(i64),
    /// Absorption `G_dm`, raising ℓ by one.
    G(i64),
    /// Same-manifold `L_dm`.
    L(i64),
    /// Order-r transition `K^{r(dl)}_dm`.
    General { r: i64, dl: i64, dm: i64 },
    /// Power of the dephasing operator, `m^k`.
    MPower(u32),
    RankOne { from: AngularState, to: AngularState },
    /// `a† b`.
    Product(Box<OpLabel>, Box<OpLabel>),
    Adjoint(Box<OpLabel>),
}

fn signed(v: i64) -> String {
    if v > 0 {
        format!("+{v}")
    } else {
        format!("{v}")
    }
}

impl fmt::Display for OpLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let dm = |v: i64| if v == 0 { String::from("0") } else { signed(v) };
        match self {
            OpLabel::E(d) => write!(f, "E{}", dm(*d)),
            OpLabel::G(d) => write!(f, "G{}", dm(*d)),
            OpLabel::L(d) => write!(f, "L{}", dm(*d)),
            OpLabel::General { r, dl, dm: d } => write!(f, "K[r={r},dl={},dm={}]", dm(*dl), dm(*d)),
            OpLabel::MPower(k) => write!(f, "m^{k}"),
            OpLabel::RankOne { from, to } => write!(f, "{to}<{},{}|", from.ell, from.m),
            OpLabel::Product(a, b) => write!(f, "({a})†({b})"),
            OpLabel::Adjoint(a) => write!(f, "({a})†"),
        }
    }
}

/// Sparse operator sending `|source_ell, m>` to
/// `entry(m) |source_ell + delta_ell, m + delta_m>`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KrausOperator {
    pub source_ell: HalfInt,
    pub delta_ell: i64,
    pub delta_m: i64,
    /// Tensor rank; 0 for dephasing powers.
    pub rank: i64,
    pub label: OpLabel,
    entries: BTreeMap<HalfInt, Radical>,
}

impl KrausOperator {
    /// Builds an operator, dropping zero entries and entries whose source or
    /// target falls outside its manifold.
    pub fn from_entries<I>(source_ell: HalfInt, delta_ell: i64, delta_m: i64, rank: i64, label: OpLabel, entries: I) -> Self
    where
        I: IntoIterator<Item = (HalfInt, Radical)>,
    {
        let target_ell = source_ell + HalfInt::from_int(delta_ell);
        let entries = entries
            .into_iter()
            .filter(|(m, v)| {
                !v.is_zero()
                    && AngularState::is_valid(source_ell, *m)
                    && AngularState::is_valid(target_ell, *m + HalfInt::from_int(delta_m))
            })
            .collect();
        KrausOperator { source_ell, delta_ell, delta_m, rank, label, entries }
    }

    pub fn target_ell(&self) -> HalfInt {
        self.source_ell + HalfInt::from_int(self.delta_ell)
    }

    pub fn entry(&self, m: HalfInt) -> Option<&Radical> {
        self.entries.get(&m)
    }

    /// Nonzero entries keyed by source `m`, in increasing `m`.
    pub fn entries(&self) -> impl Iterator<Item = (HalfInt, &Radical)> {
        self.entries.iter().map(|(m, v)| (*m, v))
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    /// Applies the operator to a sparse state on the source manifold and
    /// returns the image keyed by target `m`.
    pub fn apply(&self, state: &BTreeMap<HalfInt, Radical>) -> BTreeMap<HalfInt, Radical> {
        let shift = HalfInt::from_int(self.delta_m);
        state
            .iter()
            .filter_map(|(m, amp)| self.entries.get(m).map(|e| (*m + shift, e * amp)))
            .filter(|(_, v)| !v.is_zero())
            .collect()
    }

    /// The Hermitian adjoint (entries are real), acting on the target manifold.
    pub fn adjoint(&self) -> KrausOperator {
        let shift = HalfInt::from_int(self.delta_m);
        KrausOperator {
            source_ell: self.target_ell(),
            delta_ell: -self.delta_ell,
            delta_m: -self.delta_m,
            rank: self.rank,
            label: OpLabel::Adjoint(Box::new(self.label.clone())),
            entries: self.entries.iter().map(|(m, v)| (*m + shift, v.clone())).collect(),
        }
    }

    pub fn scaled(&self, factor: &BigRational) -> KrausOperator {
        let mut out = self.clone();
        out.entries = self
            .entries
            .iter()
            .map(|(m, v)| (*m, v.scale(factor)))
            .filter(|(_, v)| !v.is_zero())
            .collect();
        out
    }

    /// Same transition and support, with entries compared exactly.
    pub fn same_action(&self, other: &KrausOperator) -> bool {
        self.source_ell == other.source_ell
            && self.delta_ell == other.delta_ell
            && self.delta_m == other.delta_m
            && self.entries == other.entries
    }

    /// The constant `c` with `self = c * other`, if one exists.
    pub fn ratio_to(&self, other: &KrausOperator) -> Option<Radical> {
        if self.source_ell != other.source_ell
            || self.delta_ell != other.delta_ell
            || self.delta_m != other.delta_m
            || self.entries.len() != other.entries.len()
        {
            return None;
        }
        let mut ratio: Option<Radical> = None;
        for ((ma, a), (mb, b)) in self.entries.iter().zip(other.entries.iter()) {
            if ma != mb {
                return None;
            }
            let r = a * &b.inverse()?;
            match &ratio {
                None => ratio = Some(r),
                Some(prev) if *prev == r => {}
                Some(_) => return None,
            }
        }
        ratio.or_else(|| Some(Radical::one()))
    }
}

/// A set of Kraus operators sharing a source manifold.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ErrorSet {
    pub operators: Vec<KrausOperator>,
    pub order_n: i64,
    pub description: String,
}

impl ErrorSet {
    pub fn new(operators: Vec<KrausOperator>, order_n: i64, description: impl Into<String>) -> Result<Self> {
        if let Some(first) = operators.first() {
            if let Some(bad) = operators.iter().find(|op| op.source_ell != first.source_ell) {
                return Err(Error::ManifoldMismatch { expected: first.source_ell, found: bad.source_ell });
            }
        }
        Ok(ErrorSet { operators, order_n, description: description.into() })
    }

    pub fn source_ell(&self) -> Option<HalfInt> {
        self.operators.first().map(|op| op.source_ell)
    }

    pub fn len(&self) -> usize {
        self.operators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.operators.is_empty()
    }
}

fn manifold(ell: HalfInt) -> impl Iterator<Item = HalfInt> {
    let t = ell.twice();
    (-t..=t).step_by(2).map(HalfInt::from_twice)
}

fn sqrt_of(value: BigRational) -> Radical {
    // Out-of-manifold edges can produce small negative products; they are
    // discarded by `from_entries` anyway.
    Radical::sqrt(&value).unwrap_or_else(Radical::zero)
}

/// The nine first-order operators `E_dm`, `G_dm`, `L_dm` with `|dm| <= 1`,
/// using the square-root coefficients of the spontaneous emission model.
pub fn first_order_channel(ell0: HalfInt) -> Result<ErrorSet> {
    if ell0 < HalfInt::from_int(1) {
        return Err(Error::Domain(format!("first-order channel needs ℓ ≥ 1, got ℓ = {ell0}")));
    }
    let l = ell0.to_rational();
    let one = BigRational::one();
    let two = &one + &one;
    let mut ops = Vec::with_capacity(9);
    for dm in -1i64..=1 {
        let s = BigRational::from_integer(BigInt::from(dm));
        let entries = manifold(ell0).map(|m| {
            let m = m.to_rational();
            let v = match dm {
                0 => &l * &l - &m * &m,
                // (ℓ ∓ m − 1)(ℓ ∓ m)
                _ => (&l - &s * &m - &one) * (&l - &s * &m),
            };
            sqrt_of(v)
        });
        ops.push(KrausOperator::from_entries(ell0, -1, dm, 1, OpLabel::E(dm), manifold(ell0).zip(entries)));
    }
    for dm in -1i64..=1 {
        let s = BigRational::from_integer(BigInt::from(dm));
        let entries = manifold(ell0).map(|m| {
            let m = m.to_rational();
            let v = match dm {
                0 => (&l + &one) * (&l + &one) - &m * &m,
                // (ℓ ± m + 1)(ℓ ± m + 2)
                _ => (&l + &s * &m + &one) * (&l + &s * &m + &two),
            };
            sqrt_of(v)
        });
        ops.push(KrausOperator::from_entries(ell0, 1, dm, 1, OpLabel::G(dm), manifold(ell0).zip(entries)));
    }
    for dm in -1i64..=1 {
        let s = BigRational::from_integer(BigInt::from(dm));
        let entries = manifold(ell0).map(|m| {
            let mr = m.to_rational();
            match dm {
                0 => Radical::from_rational(mr),
                // (ℓ ∓ m)(ℓ ± m + 1)
                _ => sqrt_of((&l - &s * &mr) * (&l + &s * &mr + &one)),
            }
        });
        ops.push(KrausOperator::from_entries(ell0, 0, dm, 1, OpLabel::L(dm), manifold(ell0).zip(entries)));
    }
    ErrorSet::new(ops, 1, format!("first-order absorption/emission/dephasing on ℓ = {ell0}"))
}

/// All transitions `K^{r(dl)}_dm` with `1 <= r <= n` and `|dl|, |dm| <= r`,
/// `(2r+1)^2` operators per rank.
pub fn order_n_channel(ell0: HalfInt, n: i64) -> Result<ErrorSet> {
    if n < 1 {
        return Err(Error::Domain(format!("channel order must be at least 1, got {n}")));
    }
    if ell0 < HalfInt::from_int(n) {
        return Err(Error::Domain(format!("order-{n} channel needs ℓ₀ ≥ {n}, got ℓ₀ = {ell0}")));
    }
    let mut ops = Vec::new();
    for r in 1..=n {
        for dl in -r..=r {
            for dm in -r..=r {
                let target = ell0 + HalfInt::from_int(dl);
                let mut entries = Vec::new();
                for m in manifold(ell0) {
                    let v = y_matrix_element(target, m + HalfInt::from_int(dm), r, dm, ell0, m)?;
                    entries.push((m, v));
                }
                ops.push(KrausOperator::from_entries(ell0, dl, dm, r, OpLabel::General { r, dl, dm }, entries));
            }
        }
    }
    ErrorSet::new(ops, n, format!("order-{n} transitions on ℓ₀ = {ell0}"))
}

/// `{m^k : 0 <= k <= n}` restricted to `window` (the whole manifold when
/// `None`).
pub fn dephasing_set(ell0: HalfInt, n: u32, window: Option<(HalfInt, HalfInt)>) -> ErrorSet {
    let (lo, hi) = window.unwrap_or((-ell0, ell0));
    let ms: Vec<HalfInt> = manifold(ell0).filter(|m| *m >= lo && *m <= hi).collect();
    let ops = (0..=n)
        .map(|k| {
            let entries = ms.iter().map(|m| (*m, Radical::from_rational(m.to_rational().pow(k as i32))));
            KrausOperator::from_entries(ell0, 0, 0, 0, OpLabel::MPower(k), entries)
        })
        .collect();
    ErrorSet { operators: ops, order_n: n as i64, description: format!("dephasing powers m^0..m^{n} on ℓ₀ = {ell0}") }
}

/// Rank-one `|ell_out, m_out><ell, m|`.
pub fn resolved_transition(ell: HalfInt, m: HalfInt, ell_out: HalfInt, m_out: HalfInt) -> Result<KrausOperator> {
    let from = AngularState::new(ell, m)?;
    let to = AngularState::new(ell_out, m_out)?;
    if from == to {
        return Err(Error::Domain(format!("resolved transition must change the state, got {from} → {to}")));
    }
    let dl = (ell_out - ell).as_integer().ok_or_else(|| {
        Error::InvalidQuantumNumbers(format!("ℓ cannot change by the half-integer {}", ell_out - ell))
    })?;
    let dm = (m_out - m).as_integer().expect("parity checked by AngularState");
    Ok(KrausOperator::from_entries(
        ell,
        dl,
        dm,
        dl.abs().max(dm.abs()),
        OpLabel::RankOne { from, to },
        [(m, Radical::one())],
    ))
}

/// `a† b` as an operator on the common source manifold. Zero unless both
/// operators land in the same manifold.
pub fn adjoint_compose(a: &KrausOperator, b: &KrausOperator) -> Result<KrausOperator> {
    if a.source_ell != b.source_ell {
        return Err(Error::ManifoldMismatch { expected: a.source_ell, found: b.source_ell });
    }
    let label = OpLabel::Product(Box::new(a.label.clone()), Box::new(b.label.clone()));
    let shift = b.delta_m - a.delta_m;
    if a.delta_ell != b.delta_ell {
        return Ok(KrausOperator::from_entries(a.source_ell, 0, shift, a.rank + b.rank, label, []));
    }
    let entries: Vec<_> = b
        .entries()
        .filter_map(|(m, _)| compose_entry(a, b, m).map(|(av, bv)| (m, av * bv)))
        .collect();
    Ok(KrausOperator::from_entries(a.source_ell, 0, shift, a.rank + b.rank, label, entries))
}

/// Entry `<ℓ, m + shift| a† b |ℓ, m>` of the composite without building it.
/// `None` when it vanishes structurally.
pub fn compose_entry<'a>(a: &'a KrausOperator, b: &'a KrausOperator, m: HalfInt) -> Option<(&'a Radical, &'a Radical)> {
    if a.delta_ell != b.delta_ell {
        return None;
    }
    let bv = b.entry(m)?;
    let av = a.entry(m + HalfInt::from_int(b.delta_m - a.delta_m))?;
    Some((av, bv))
}
