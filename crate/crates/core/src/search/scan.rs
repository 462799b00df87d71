//! Enumerating supports under a few ansätze and solving each one.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use super::{solution_to_code, solve, SearchProblem, Solution, Vertex};
use crate::channels::{order_n_channel, ErrorSet};
use crate::codes::Mode;
use crate::kl::{detection_check, kl_check, Engine};
use crate::{Error, HalfInt, Result};

/// Largest ℓ₀ accepted by a scan.
pub const MAX_ELL0: HalfInt = HalfInt::from_int(30);
/// Largest number of support points per codeword.
pub const MAX_POINTS: usize = 6;
/// Largest number of candidate supports a scan will solve.
pub const MAX_CONFIGURATIONS: u128 = 200_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Ansatz {
    /// Both supports symmetric under `m → -m`.
    Symmetric,
    /// `support1 = -support0`.
    CounterSymmetric,
    /// Alternating points of one arithmetic progression.
    UniformSpacing,
    /// Every pair of disjoint supports within the caps.
    ExhaustiveSmall,
}

impl Ansatz {
    pub fn name(self) -> &'static str {
        match self {
            Ansatz::Symmetric => "symmetric",
            Ansatz::CounterSymmetric => "counter_symmetric",
            Ansatz::UniformSpacing => "uniform_spacing",
            Ansatz::ExhaustiveSmall => "exhaustive_small",
        }
    }
}

impl fmt::Display for Ansatz {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Ansatz {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.replace('-', "_").as_str() {
            "symmetric" => Ansatz::Symmetric,
            "counter_symmetric" => Ansatz::CounterSymmetric,
            "uniform_spacing" | "uniform" => Ansatz::UniformSpacing,
            "exhaustive_small" | "exhaustive" => Ansatz::ExhaustiveSmall,
            _ => return Err(Error::Domain(format!("unknown ansatz `{s}`"))),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScanConfig {
    pub min_ell0: HalfInt,
    pub max_ell0: HalfInt,
    pub n: i64,
    pub ansatz: Ansatz,
    pub mode: Mode,
    /// Points per codeword.
    pub max_points: usize,
}

impl ScanConfig {
    pub fn new(n: i64, ansatz: Ansatz, mode: Mode, max_ell0: HalfInt) -> Self {
        ScanConfig { min_ell0: HalfInt::from_twice(1), max_ell0, n, ansatz, mode, max_points: 3 }
    }

    pub fn spacing(&self) -> i64 {
        match self.mode {
            Mode::Correction => 2 * self.n + 1,
            Mode::Detection => self.n + 1,
        }
    }

    fn ell_values(&self) -> impl Iterator<Item = HalfInt> {
        let lo = self.min_ell0.twice().max(0);
        (lo..=self.max_ell0.twice()).map(HalfInt::from_twice)
    }

    fn check_caps(&self) -> Result<()> {
        if self.n < 1 {
            return Err(Error::Domain(format!("order must be at least 1, got {}", self.n)));
        }
        if self.max_ell0 > MAX_ELL0 {
            return Err(Error::Domain(format!("scans are capped at ℓ₀ ≤ {MAX_ELL0}, got {}", self.max_ell0)));
        }
        if self.max_points == 0 || self.max_points > MAX_POINTS {
            return Err(Error::Domain(format!(
                "points per codeword must be within 1..={MAX_POINTS}, got {}",
                self.max_points
            )));
        }
        Ok(())
    }
}

/// `C(n, k)` in `u128`, saturating.
fn choose(n: i64, k: i64) -> u128 {
    if k < 0 || n < k {
        return 0;
    }
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul((n - i) as u128) / (i + 1) as u128;
    }
    acc
}

/// Ways to pick `k` of `slots` consecutive positions with gaps of at least
/// `spacing`.
fn spaced(slots: i64, k: i64, spacing: i64) -> u128 {
    if k == 0 {
        return 1;
    }
    choose(slots - (spacing - 1) * (k - 1), k)
}

/// Upper bound on the number of candidate supports a scan visits.
pub fn estimate_configurations(config: &ScanConfig) -> u128 {
    let s = config.spacing();
    let p = config.max_points as i64;
    config
        .ell_values()
        .map(|ell| {
            let slots = ell.twice() + 1;
            match config.ansatz {
                Ansatz::CounterSymmetric => (1..=p).map(|k| spaced(slots, k, s)).sum::<u128>(),
                Ansatz::Symmetric => {
                    let half = ell.twice() / 2 + 1;
                    (1..=p).map(|k| spaced(half, k, s).saturating_mul(1u128 << k.min(100))).sum::<u128>()
                }
                Ansatz::UniformSpacing => {
                    (s..=slots).map(|_| (2..=2 * p).map(|_| slots as u128).sum::<u128>()).sum::<u128>()
                }
                Ansatz::ExhaustiveSmall => (2..=2 * p)
                    .map(|k| spaced(slots, k, s).saturating_mul(1u128 << (k - 1).min(100)))
                    .sum::<u128>(),
            }
        })
        .fold(0u128, u128::saturating_add)
}

fn manifold(ell: HalfInt) -> Vec<HalfInt> {
    let t = ell.twice();
    (-t..=t).step_by(2).map(HalfInt::from_twice).collect()
}

/// Subsets of sorted `points` with consecutive gaps of at least `spacing`
/// and sizes `1..=max`.
fn spaced_subsets(points: &[HalfInt], spacing: HalfInt, max: usize) -> Vec<Vec<HalfInt>> {
    fn rec(points: &[HalfInt], start: usize, spacing: HalfInt, max: usize, cur: &mut Vec<HalfInt>, out: &mut Vec<Vec<HalfInt>>) {
        for i in start..points.len() {
            if cur.last().is_some_and(|&l| points[i] - l < spacing) {
                continue;
            }
            cur.push(points[i]);
            out.push(cur.clone());
            if cur.len() < max {
                rec(points, i + 1, spacing, max, cur, out);
            }
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(points, 0, spacing, max, &mut Vec::new(), &mut out);
    out
}

fn min_gap(a: &[HalfInt], b: &[HalfInt]) -> Option<HalfInt> {
    let mut all: Vec<HalfInt> = a.iter().chain(b).copied().collect();
    all.sort();
    all.windows(2).map(|w| w[1] - w[0]).min()
}

/// Candidate problems at one ℓ₀, in a deterministic order.
pub fn problems_at(config: &ScanConfig, ell0: HalfInt) -> Vec<SearchProblem> {
    let s = HalfInt::from_int(config.spacing());
    let pts = manifold(ell0);
    let mk = |a: Vec<HalfInt>, b: Vec<HalfInt>| SearchProblem::new(ell0, a, b, config.n, config.mode);
    let mut out = Vec::new();
    match config.ansatz {
        Ansatz::CounterSymmetric => {
            for a in spaced_subsets(&pts, s, config.max_points) {
                let mut b: Vec<HalfInt> = a.iter().map(|&m| -m).collect();
                b.sort();
                // (S, -S) and (-S, S) are the same code with labels swapped.
                if b < a || min_gap(&a, &b).is_none_or(|g| g < s) {
                    continue;
                }
                out.push(mk(a, b));
            }
        }
        Ansatz::Symmetric => {
            let nonneg: Vec<HalfInt> = pts.iter().copied().filter(|m| *m >= HalfInt::ZERO).collect();
            let mirror = |half: &[HalfInt]| {
                let mut v: Vec<HalfInt> = half.iter().flat_map(|&m| if m == HalfInt::ZERO { alloc::vec![m] } else { alloc::vec![-m, m] }).collect();
                v.sort();
                v.dedup();
                v
            };
            let halves = spaced_subsets(&nonneg, s, config.max_points);
            for a in &halves {
                for b in &halves {
                    let (full_a, full_b) = (mirror(a), mirror(b));
                    if full_a.len() > config.max_points || full_b.len() > config.max_points || full_b < full_a {
                        continue;
                    }
                    if min_gap(&full_a, &full_b).is_none_or(|g| g < s) {
                        continue;
                    }
                    out.push(mk(full_a, full_b));
                }
            }
        }
        Ansatz::UniformSpacing => {
            let top = ell0.twice();
            for d in config.spacing()..=top {
                for count in 2..=(2 * config.max_points as i64) {
                    for &start in &pts {
                        let last = start + HalfInt::from_int(d * (count - 1));
                        if last > ell0 {
                            break;
                        }
                        let (mut a, mut b) = (Vec::new(), Vec::new());
                        for k in 0..count {
                            let m = start + HalfInt::from_int(d * k);
                            if k % 2 == 0 {
                                a.push(m)
                            } else {
                                b.push(m)
                            }
                        }
                        out.push(mk(a, b));
                    }
                }
            }
        }
        Ansatz::ExhaustiveSmall => {
            for union in spaced_subsets(&pts, s, 2 * config.max_points) {
                if union.len() < 2 {
                    continue;
                }
                // The lowest point always goes to codeword 0.
                let rest = union.len() - 1;
                for mask in 0u32..(1 << rest) {
                    let (mut a, mut b) = (alloc::vec![union[0]], Vec::new());
                    for (i, &m) in union[1..].iter().enumerate() {
                        if mask & (1 << i) == 0 {
                            a.push(m)
                        } else {
                            b.push(m)
                        }
                    }
                    if b.is_empty() || a.len() > config.max_points || b.len() > config.max_points {
                        continue;
                    }
                    out.push(mk(a, b));
                }
            }
        }
    }
    out.sort();
    out
}

/// All candidate problems, refusing when the estimate exceeds
/// [`MAX_CONFIGURATIONS`].
pub fn enumerate_problems(config: &ScanConfig) -> Result<Vec<SearchProblem>> {
    config.check_caps()?;
    let estimate = estimate_configurations(config);
    if estimate > MAX_CONFIGURATIONS {
        return Err(Error::SearchSpaceTooLarge { estimate, cap: MAX_CONFIGURATIONS });
    }
    Ok(config.ell_values().flat_map(|ell| problems_at(config, ell)).collect())
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct ScanRow {
    pub ell0: HalfInt,
    pub n: i64,
    pub ansatz: Ansatz,
    pub support0: Vec<HalfInt>,
    pub support1: Vec<HalfInt>,
    pub probs: Vertex,
    /// The code built from the row passed the full check against the
    /// order-n channel (or the detection check in detection mode).
    pub kl_verified: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScanTable {
    pub config: ScanConfig,
    pub rows: Vec<ScanRow>,
    pub configurations: usize,
}

impl ScanTable {
    /// Smallest ℓ₀ with a verified feasible code.
    pub fn minimal_ell0(&self) -> Option<HalfInt> {
        self.rows.iter().filter(|r| r.kl_verified).map(|r| r.ell0).min()
    }
}

/// Channel used to verify rows at `ell0`, when the order fits the manifold.
pub fn verification_channel(config: &ScanConfig, ell0: HalfInt) -> Option<ErrorSet> {
    order_n_channel(ell0, config.n).ok()
}

/// Solves one candidate and verifies its representative solution (see
/// [`SolutionFamily::particular`](super::SolutionFamily::particular)).
pub fn evaluate(config: &ScanConfig, problem: &SearchProblem, channel: Option<&ErrorSet>, engine: Engine) -> Result<Option<ScanRow>> {
    let family = match solve(problem)? {
        Solution::Feasible(f) => f,
        Solution::Infeasible(_) => return Ok(None),
    };
    let code = solution_to_code(problem, &family.particular)?;
    let kl_verified = match (channel, config.mode) {
        (Some(ch), Mode::Correction) => kl_check(&code, ch, engine)?.passed(),
        (Some(ch), Mode::Detection) => detection_check(&code, ch, engine)?.passed(),
        (None, _) => false,
    };
    Ok(Some(ScanRow {
        ell0: problem.ell0,
        n: config.n,
        ansatz: config.ansatz,
        support0: problem.support0.clone(),
        support1: problem.support1.clone(),
        probs: family.particular,
        kl_verified,
    }))
}

/// Sequential scan; rows sorted by (ℓ₀, supports, probabilities).
pub fn scan(config: &ScanConfig, engine: Engine) -> Result<ScanTable> {
    let problems = enumerate_problems(config)?;
    let mut by_ell: BTreeMap<HalfInt, Vec<&SearchProblem>> = BTreeMap::new();
    for p in &problems {
        by_ell.entry(p.ell0).or_default().push(p);
    }
    let mut rows = Vec::new();
    for (ell, ps) in by_ell {
        let channel = verification_channel(config, ell);
        for p in ps {
            rows.extend(evaluate(config, p, channel.as_ref(), engine)?);
        }
    }
    rows.sort();
    Ok(ScanTable { config: config.clone(), rows, configurations: problems.len() })
}

/// Human-readable description of a scan's extent.
pub fn describe(config: &ScanConfig) -> String {
    format!(
        "n = {}, {} ansatz, {:?} mode, ℓ₀ ∈ [{}, {}], ≤ {} points per codeword",
        config.n, config.ansatz, config.mode, config.min_ell0, config.max_ell0, config.max_points
    )
}
