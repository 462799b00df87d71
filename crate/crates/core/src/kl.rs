//! Knill-Laflamme verification.
//!
//! [`kl_check`] evaluates `<ī| a† b |j̄>` for every ordered operator pair,
//! [`detection_check`] the single-operator conditions, [`reduction_check`]
//! the spacing + moment-matching conditions that imply the full check, and
//! [`support_exclusion_check`] the support restriction imposed by resolved
//! rank-one transitions.
//!
//! Two engines share the same code path: exact radical arithmetic (the
//! default and the reference) and `f64` with a relative tolerance.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;
use core::fmt;

use num_rational::BigRational;

use crate::angular::AngularState;
use crate::channels::{order_n_channel, ErrorSet, KrausOperator, OpLabel};
use crate::codes::{Code, Codeword, Mode};
use crate::{Error, HalfInt, Radical, Result};

pub const DEFAULT_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub enum Engine {
    #[default]
    Exact,
    /// `f64` arithmetic; a quantity counts as zero when it is below
    /// `tolerance` times the sum of magnitudes of the terms that produced it.
    Float { tolerance: f64 },
}

impl Engine {
    pub fn float() -> Self {
        Engine::Float { tolerance: DEFAULT_TOLERANCE }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Engine::Exact => "exact",
            Engine::Float { .. } => "float",
        }
    }
}

/// A computed scalar, exact or approximate depending on the engine.
#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    Exact(Radical),
    Float(f64),
}

impl Value {
    pub fn approx(&self) -> f64 {
        match self {
            Value::Exact(r) => r.to_f64(),
            Value::Float(x) => *x,
        }
    }

    pub fn exact(&self) -> Option<&Radical> {
        match self {
            Value::Exact(r) => Some(r),
            Value::Float(_) => None,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Exact(r) => write!(f, "{r}"),
            Value::Float(x) => write!(f, "{x:e}"),
        }
    }
}

/// Scalar arithmetic shared by both engines. `scale` accumulates the sum of
/// term magnitudes so the float engine can judge cancellation.
trait Scalar: Clone {
    fn zero() -> Self;
    fn from_radical(r: &Radical) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn add(&mut self, other: &Self);
    fn sub(&self, other: &Self) -> Self;
    fn magnitude(&self) -> f64;
    fn vanishes(&self, scale: f64, engine: Engine) -> bool;
    fn into_value(self) -> Value;
}

impl Scalar for Radical {
    fn zero() -> Self {
        Radical::zero()
    }
    fn from_radical(r: &Radical) -> Self {
        r.clone()
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn add(&mut self, other: &Self) {
        *self += other;
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn magnitude(&self) -> f64 {
        self.abs_sum_f64()
    }
    fn vanishes(&self, _scale: f64, _engine: Engine) -> bool {
        self.is_zero()
    }
    fn into_value(self) -> Value {
        Value::Exact(self)
    }
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn from_radical(r: &Radical) -> Self {
        r.to_f64()
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn add(&mut self, other: &Self) {
        *self += other;
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
    fn vanishes(&self, scale: f64, engine: Engine) -> bool {
        let tol = match engine {
            Engine::Float { tolerance } => tolerance,
            Engine::Exact => 0.0,
        };
        self.abs() <= tol * scale
    }
    fn into_value(self) -> Value {
        Value::Float(self)
    }
}

#[derive(Clone, Debug)]
struct Acc<S> {
    value: S,
    scale: f64,
}

impl<S: Scalar> Acc<S> {
    fn zero() -> Self {
        Acc { value: S::zero(), scale: 0.0 }
    }
    fn push(&mut self, term: S) {
        self.scale += term.magnitude();
        self.value.add(&term);
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Condition {
    /// `<0̄|·|1̄> = 0`
    OffDiagonal01,
    /// `<1̄|·|0̄> = 0`
    OffDiagonal10,
    /// `<0̄|·|0̄> = <1̄|·|1̄>`
    Diagonal,
}

impl Condition {
    pub fn name(self) -> &'static str {
        match self {
            Condition::OffDiagonal01 => "off_diagonal_01",
            Condition::OffDiagonal10 => "off_diagonal_10",
            Condition::Diagonal => "diagonal",
        }
    }
}

/// KL constants of one operator pair (`op_b` is `None` for detection
/// checks, which involve single operators).
#[derive(Clone, Debug, PartialEq)]
pub struct KlPair {
    pub op_a: OpLabel,
    pub op_b: Option<OpLabel>,
    pub c00: Value,
    pub c11: Value,
    pub c01: Value,
    pub c10: Value,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Violation {
    /// Index into [`KlReport::pairs`].
    pub pair: usize,
    pub condition: Condition,
    pub residual: Value,
}

#[derive(Clone, Debug, PartialEq)]
pub struct KlReport {
    pub engine: Engine,
    /// `true` for the product conditions, `false` for detection conditions.
    pub correction: bool,
    pub pairs: Vec<KlPair>,
    /// Pairs that vanish because the operators land in different manifolds.
    pub structurally_satisfied: Vec<(OpLabel, Option<OpLabel>)>,
    pub violations: Vec<Violation>,
}

impl KlReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

type Image<S> = BTreeMap<HalfInt, S>;

fn image<S: Scalar>(op: &KrausOperator, cw: &Codeword) -> Image<S> {
    let shift = HalfInt::from_int(op.delta_m);
    cw.amplitudes()
        .iter()
        .filter_map(|(m, amp)| op.entry(*m).map(|e| (*m + shift, S::from_radical(e).mul(&S::from_radical(amp)))))
        .collect()
}

fn codeword_image<S: Scalar>(cw: &Codeword) -> Image<S> {
    cw.amplitudes().iter().map(|(m, a)| (*m, S::from_radical(a))).collect()
}

fn dot<S: Scalar>(a: &Image<S>, b: &Image<S>) -> Acc<S> {
    let mut acc = Acc::zero();
    let (small, large) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    for (m, x) in small {
        if let Some(y) = large.get(m) {
            acc.push(x.mul(y));
        }
    }
    acc
}

fn judge<S: Scalar>(
    engine: Engine,
    index: usize,
    c: [Acc<S>; 4],
    violations: &mut Vec<Violation>,
) -> [Value; 4] {
    let [c00, c11, c01, c10] = c;
    if !c01.value.vanishes(c01.scale, engine) {
        violations.push(Violation { pair: index, condition: Condition::OffDiagonal01, residual: c01.value.clone().into_value() });
    }
    if !c10.value.vanishes(c10.scale, engine) {
        violations.push(Violation { pair: index, condition: Condition::OffDiagonal10, residual: c10.value.clone().into_value() });
    }
    let diff = c00.value.sub(&c11.value);
    if !diff.vanishes(c00.scale + c11.scale, engine) {
        violations.push(Violation { pair: index, condition: Condition::Diagonal, residual: diff.into_value() });
    }
    [c00.value.into_value(), c11.value.into_value(), c01.value.into_value(), c10.value.into_value()]
}

fn check_manifold(code: &Code, errors: &ErrorSet) -> Result<()> {
    match errors.source_ell() {
        Some(ell) if ell != code.ell0() => Err(Error::ManifoldMismatch { expected: code.ell0(), found: ell }),
        _ => Ok(()),
    }
}

fn kl_generic<S: Scalar>(code: &Code, errors: &ErrorSet, engine: Engine) -> KlReport {
    let images: Vec<[Image<S>; 2]> =
        errors.operators.iter().map(|op| [image(op, &code.zero), image(op, &code.one)]).collect();
    let mut pairs = Vec::new();
    let mut structural = Vec::new();
    let mut violations = Vec::new();
    for (a, ia) in errors.operators.iter().zip(&images) {
        for (b, ib) in errors.operators.iter().zip(&images) {
            if a.delta_ell != b.delta_ell {
                structural.push((a.label.clone(), Some(b.label.clone())));
                continue;
            }
            // <ī| a† b |j̄> = (a|ī>) · (b|j̄>)
            let c = [dot(&ia[0], &ib[0]), dot(&ia[1], &ib[1]), dot(&ia[0], &ib[1]), dot(&ia[1], &ib[0])];
            let [c00, c11, c01, c10] = judge(engine, pairs.len(), c, &mut violations);
            pairs.push(KlPair { op_a: a.label.clone(), op_b: Some(b.label.clone()), c00, c11, c01, c10 });
        }
    }
    KlReport { engine, correction: true, pairs, structurally_satisfied: structural, violations }
}

fn detection_generic<S: Scalar>(code: &Code, errors: &ErrorSet, engine: Engine) -> KlReport {
    let words: [Image<S>; 2] = [codeword_image(&code.zero), codeword_image(&code.one)];
    let mut pairs = Vec::new();
    let mut structural = Vec::new();
    let mut violations = Vec::new();
    for op in &errors.operators {
        if op.delta_ell != 0 {
            structural.push((op.label.clone(), None));
            continue;
        }
        let img: [Image<S>; 2] = [image(op, &code.zero), image(op, &code.one)];
        // <ī| a |j̄> = <ī| · (a|j̄>)
        let c = [dot(&words[0], &img[0]), dot(&words[1], &img[1]), dot(&words[0], &img[1]), dot(&words[1], &img[0])];
        let [c00, c11, c01, c10] = judge(engine, pairs.len(), c, &mut violations);
        pairs.push(KlPair { op_a: op.label.clone(), op_b: None, c00, c11, c01, c10 });
    }
    KlReport { engine, correction: false, pairs, structurally_satisfied: structural, violations }
}

/// Full error-correction conditions `<ī| a† b |j̄> = c_ab δ_ij` over all
/// ordered pairs, including `a = b`.
pub fn kl_check(code: &Code, errors: &ErrorSet, engine: Engine) -> Result<KlReport> {
    check_manifold(code, errors)?;
    Ok(match engine {
        Engine::Exact => kl_generic::<Radical>(code, errors, engine),
        Engine::Float { .. } => kl_generic::<f64>(code, errors, engine),
    })
}

/// Error-detection conditions `<ī| a |j̄> = c_a δ_ij` for each operator.
pub fn detection_check(code: &Code, errors: &ErrorSet, engine: Engine) -> Result<KlReport> {
    check_manifold(code, errors)?;
    Ok(match engine {
        Engine::Exact => detection_generic::<Radical>(code, errors, engine),
        Engine::Float { .. } => detection_generic::<f64>(code, errors, engine),
    })
}

/// `<m̂^k>` for `k = 0..=k_max`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MomentTable {
    pub values: Vec<Radical>,
}

pub fn moments(codeword: &Codeword, k_max: u32) -> MomentTable {
    let probs: Vec<(BigRational, Radical)> = codeword.probabilities().map(|(m, p)| (m.to_rational(), p)).collect();
    let values = (0..=k_max)
        .map(|k| probs.iter().map(|(m, p)| p.scale(&m.pow(k as i32))).sum())
        .collect();
    MomentTable { values }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReductionReport {
    pub mode: Mode,
    pub n: i64,
    pub spacing: Option<HalfInt>,
    pub required_spacing: i64,
    pub spacing_ok: bool,
    pub moments: [MomentTable; 2],
    /// Powers `k >= 1` whose moments differ between the codewords.
    pub mismatched: Vec<u32>,
}

impl ReductionReport {
    pub fn passed(&self) -> bool {
        self.spacing_ok && self.mismatched.is_empty()
    }
}

/// Spacing plus moment matching: support spacing at least `2n+1` and
/// `<0̄|m̂^k|0̄> = <1̄|m̂^k|1̄>` for `1 <= k <= 2n` (correction), or spacing
/// `n+1` and `k <= n` (detection).
pub fn reduction_check(code: &Code, n: i64, mode: Mode, engine: Engine) -> ReductionReport {
    let (required, k_max) = match mode {
        Mode::Correction => (2 * n + 1, 2 * n),
        Mode::Detection => (n + 1, n),
    };
    let spacing = code.support_spacing();
    let spacing_ok = spacing.is_some_and(|s| s >= HalfInt::from_int(required));
    let k_max = k_max.max(0) as u32;
    let tables = [moments(&code.zero, k_max), moments(&code.one, k_max)];
    let mismatched = (1..=k_max)
        .filter(|&k| {
            let (a, b) = (&tables[0].values[k as usize], &tables[1].values[k as usize]);
            match engine {
                Engine::Exact => a != b,
                Engine::Float { .. } => {
                    let (x, y) = (a.to_f64(), b.to_f64());
                    !(x - y).vanishes(x.abs() + y.abs(), engine)
                }
            }
        })
        .collect();
    ReductionReport { mode, n, spacing, required_spacing: required, spacing_ok, moments: tables, mismatched }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EquivalenceReport {
    pub n: i64,
    pub mode: Mode,
    pub kl_pass: bool,
    pub reduction_pass: bool,
    /// Reduction passes but the full check fails. Never expected.
    pub soundness_violation: bool,
    /// The full check passes without the reduction conditions; recorded as
    /// a finding only.
    pub converse_finding: bool,
}

impl EquivalenceReport {
    pub fn agree(&self) -> bool {
        self.kl_pass == self.reduction_pass
    }
}

/// Runs the full check against the order-n channel and the reduction check,
/// and compares them.
pub fn equivalence_oracle(code: &Code, n: i64, mode: Mode, engine: Engine) -> Result<EquivalenceReport> {
    let channel = order_n_channel(code.ell0(), n)?;
    equivalence_with(code, &channel, mode, engine)
}

/// [`equivalence_oracle`] with a prebuilt channel (reused across many codes).
pub fn equivalence_with(code: &Code, channel: &ErrorSet, mode: Mode, engine: Engine) -> Result<EquivalenceReport> {
    let n = channel.order_n;
    let kl_pass = match mode {
        Mode::Correction => kl_check(code, channel, engine)?.passed(),
        Mode::Detection => detection_check(code, channel, engine)?.passed(),
    };
    let reduction_pass = reduction_check(code, n, mode, engine).passed();
    Ok(EquivalenceReport {
        n,
        mode,
        kl_pass,
        reduction_pass,
        soundness_violation: reduction_pass && !kl_pass,
        converse_finding: kl_pass && !reduction_pass,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExclusionReport {
    /// Source states of resolved transitions that the code occupies.
    pub offending: Vec<AngularState>,
}

impl ExclusionReport {
    pub fn passed(&self) -> bool {
        self.offending.is_empty()
    }
}

/// A resolved transition `|φ><ψ|` is only correctable when the code has no
/// support on `|ψ>`; fails for every resolved operator whose source state
/// lies in the code support.
pub fn support_exclusion_check(code: &Code, resolved: &[KrausOperator]) -> ExclusionReport {
    let support = code.support();
    let mut offending: Vec<AngularState> = resolved
        .iter()
        .filter(|op| op.source_ell == code.ell0())
        .flat_map(|op| op.entries().map(|(m, _)| m).collect::<Vec<_>>())
        .filter(|m| support.binary_search(m).is_ok())
        .map(|m| AngularState { ell: code.ell0(), m })
        .collect();
    offending.sort();
    offending.dedup();
    ExclusionReport { offending }
}

/// Builds the error set `{1, op}` on the code manifold for cross-checking
/// resolved transitions with [`kl_check`].
pub fn identity_plus(code: &Code, op: &KrausOperator) -> Result<ErrorSet> {
    let identity = crate::channels::dephasing_set(code.ell0(), 0, None).operators.remove(0);
    ErrorSet::new(alloc::vec![identity, op.clone()], 0, format!("{{1, {}}}", op.label))
}

/// Residual of a failed condition, for display.
pub fn describe_violation(report: &KlReport, v: &Violation) -> alloc::string::String {
    let pair = &report.pairs[v.pair];
    match &pair.op_b {
        Some(b) => format!("{}†{}: {} residual {} ≈ {:e}", pair.op_a, b, v.condition.name(), v.residual, v.residual.approx()),
        None => format!("{}: {} residual {} ≈ {:e}", pair.op_a, v.condition.name(), v.residual, v.residual.approx()),
    }
}
