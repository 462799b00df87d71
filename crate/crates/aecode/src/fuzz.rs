//! Randomized cross-checking of the reduction against the full conditions.
//!
//! Every case is drawn from its own ChaCha stream (`seed`, case index), so
//! a run is reproducible and independent of the thread count.

use std::collections::BTreeMap;

use aecode_core::channels::order_n_channel;
use aecode_core::kl::{equivalence_with, Engine};
use aecode_core::search::{solution_to_code, solve, SearchProblem, Solution, Vertex};
use aecode_core::{Code, Codeword, ErrorSet, Family, HalfInt, Mode, Result};
use num_bigint::BigInt;
use num_rational::BigRational;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::format::code_to_json;
use crate::parallel::with_pool;

pub const DEFAULT_SEED: u64 = 0x5EED_AE01;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FuzzConfig {
    pub n: i64,
    pub cases: usize,
    pub seed: u64,
    pub mode: Mode,
    /// Largest ℓ₀ drawn.
    pub max_ell0: HalfInt,
}

impl FuzzConfig {
    /// `max_ell0` defaults to 14, raised for large `n` so that well-spaced
    /// supports with `2n+2` points still fit.
    pub fn new(n: i64, cases: usize, seed: u64) -> Self {
        let s = 2 * n + 1;
        let max_ell0 = HalfInt::from_int(14).max(HalfInt::from_twice(s * s) + HalfInt::from_int(6));
        FuzzConfig { n, cases, seed, mode: Mode::Correction, max_ell0 }
    }

    fn required_spacing(&self) -> i64 {
        match self.mode {
            Mode::Correction => 2 * self.n + 1,
            Mode::Detection => self.n + 1,
        }
    }
}

/// How a case was generated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CaseKind {
    /// Random point of a solved, well-spaced support.
    Solved,
    /// A solved code with probability moved between two of its points.
    Perturbed,
    /// A solved support with a gap below the required spacing.
    Tight,
    /// Random support and random probabilities.
    Random,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct KindTally {
    pub cases: usize,
    pub reduction_pass: usize,
    pub kl_pass: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FuzzReport {
    pub n: i64,
    pub mode: String,
    pub seed: u64,
    pub cases: usize,
    pub reduction_pass: usize,
    pub kl_pass: usize,
    pub agreements: usize,
    /// Cases where the full check passed without the reduction conditions.
    pub converse_findings: usize,
    /// Codes (as JSON) where the reduction passed and the full check failed.
    pub soundness_violations: Vec<String>,
    pub by_kind: BTreeMap<CaseKind, KindTally>,
}

impl FuzzReport {
    pub fn passed(&self) -> bool {
        self.soundness_violations.is_empty()
    }
}

fn rng_for(seed: u64, case: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(case as u64);
    rng
}

fn manifold(ell0: HalfInt) -> Vec<HalfInt> {
    let t = ell0.twice();
    (-t..=t).step_by(2).map(HalfInt::from_twice).collect()
}

/// Sorted points with consecutive gaps drawn from `gaps` on a random ℓ₀ in
/// `[lo, hi]` (doubled) wide enough to hold them.
fn spaced_points(rng: &mut ChaCha8Rng, lo: i64, hi: i64, count: usize, gaps: &[i64]) -> Option<(HalfInt, Vec<HalfInt>)> {
    let steps: Vec<i64> = (1..count).map(|_| *gaps.choose(rng).expect("nonempty gaps")).collect();
    let width: i64 = steps.iter().sum();
    if width > hi {
        return None;
    }
    let ell0 = HalfInt::from_twice(rng.gen_range(lo.max(width)..=hi));
    let slots = manifold(ell0);
    let room = slots.len() as i64 - 1 - width;
    let start = slots[rng.gen_range(0..=room) as usize];
    let mut out = vec![start];
    for s in steps {
        out.push(*out.last().expect("nonempty") + HalfInt::from_int(s));
    }
    Some((ell0, out))
}

/// Splits sorted points into two nonempty codeword supports of at most four
/// points whose membership changes at least `changes` times along `m`.
fn assign(rng: &mut ChaCha8Rng, points: &[HalfInt], changes: usize) -> Option<(Vec<HalfInt>, Vec<HalfInt>)> {
    for _ in 0..64 {
        let mut side = vec![rng.gen_bool(0.5)];
        for _ in 1..points.len() {
            let prev = *side.last().expect("nonempty");
            // Mostly alternate; moment matching needs many sign changes.
            side.push(if rng.gen_bool(0.8) { !prev } else { prev });
        }
        let flips = side.windows(2).filter(|w| w[0] != w[1]).count();
        let a: Vec<HalfInt> = points.iter().zip(&side).filter(|(_, s)| **s).map(|(m, _)| *m).collect();
        let b: Vec<HalfInt> = points.iter().zip(&side).filter(|(_, s)| !**s).map(|(m, _)| *m).collect();
        if flips >= changes && !a.is_empty() && !b.is_empty() && a.len() <= 4 && b.len() <= 4 {
            return Some((a, b));
        }
    }
    None
}

fn random_rational(rng: &mut ChaCha8Rng) -> BigRational {
    BigRational::new(BigInt::from(rng.gen_range(1..=20)), BigInt::from(rng.gen_range(1..=20)))
}

fn normalized(weights: Vec<BigRational>) -> Vec<BigRational> {
    let total: BigRational = weights.iter().sum();
    weights.into_iter().map(|w| w / &total).collect()
}

fn code_from(ell0: HalfInt, s0: &[HalfInt], p: &[BigRational], s1: &[HalfInt], q: &[BigRational]) -> Result<Code> {
    let zero = Codeword::from_probabilities(ell0, s0.iter().copied().zip(p))?;
    let one = Codeword::from_probabilities(ell0, s1.iter().copied().zip(q))?;
    Code::new(zero, one, Family::Custom, Vec::new())
}

/// A random convex combination of the vertices, or the representative point
/// when vertices are not listed.
fn random_feasible_point(rng: &mut ChaCha8Rng, problem: &SearchProblem) -> Result<Option<Vertex>> {
    let family = match solve(problem)? {
        Solution::Feasible(f) => f,
        Solution::Infeasible(_) => return Ok(None),
    };
    let Some(vertices) = family.vertices else { return Ok(Some(family.particular)) };
    let weights = normalized(vertices.iter().map(|_| random_rational(rng)).collect());
    let mix = |pick: fn(&Vertex) -> &Vec<BigRational>| -> Vec<BigRational> {
        (0..pick(&vertices[0]).len())
            .map(|i| vertices.iter().zip(&weights).map(|(v, w)| &pick(v)[i] * w).sum())
            .collect()
    };
    Ok(Some(Vertex { p: mix(|v| &v.p), q: mix(|v| &v.q) }))
}

fn max_moment(config: &FuzzConfig) -> usize {
    match config.mode {
        Mode::Correction => 2 * config.n as usize,
        Mode::Detection => config.n as usize,
    }
}

/// Two measures agreeing on `k` moments differ in sign at least `k+1`
/// times, so supports are drawn with at least `k+2` points and as many
/// alternations.
fn solved_code(rng: &mut ChaCha8Rng, config: &FuzzConfig, lo: i64, hi: i64, gaps: &[i64]) -> Result<Option<Code>> {
    let k = max_moment(config);
    let count = rng.gen_range((k + 2).min(8)..=(k + 4).min(8));
    let Some((ell0, points)) = spaced_points(rng, lo, hi, count, gaps) else { return Ok(None) };
    let Some((s0, s1)) = assign(rng, &points, (k + 1).min(count - 1)) else { return Ok(None) };
    let problem = SearchProblem::new(ell0, s0, s1, config.n, config.mode);
    match random_feasible_point(rng, &problem)? {
        Some(v) => Ok(Some(solution_to_code(&problem, &v)?)),
        None => Ok(None),
    }
}

fn perturb(rng: &mut ChaCha8Rng, code: &Code) -> Result<Option<Code>> {
    let which = rng.gen_range(0..2);
    let word = code.codeword(which);
    let mut probs: Vec<(HalfInt, BigRational)> =
        word.probabilities().map(|(m, p)| (m, p.to_rational().expect("squared amplitudes are rational"))).collect();
    if probs.len() < 2 {
        return Ok(None);
    }
    let (i, j) = (rng.gen_range(0..probs.len()), rng.gen_range(0..probs.len()));
    if i == j {
        return Ok(None);
    }
    let delta = &probs[i].1 * BigRational::new(BigInt::from(rng.gen_range(1..=9)), BigInt::from(10));
    probs[i].1 -= &delta;
    probs[j].1 += &delta;
    let moved = Codeword::from_probabilities(code.ell0(), probs.iter().map(|(m, p)| (*m, p)))?;
    let (zero, one) = if which == 0 { (moved, code.one.clone()) } else { (code.zero.clone(), moved) };
    Ok(Some(Code::new(zero, one, Family::Custom, Vec::new())?))
}

fn random_code(rng: &mut ChaCha8Rng, ell0: HalfInt) -> Result<Option<Code>> {
    let mut slots = manifold(ell0);
    slots.shuffle(rng);
    let count = rng.gen_range(2..=6).min(slots.len());
    let mut points = slots[..count].to_vec();
    points.sort();
    let Some((s0, s1)) = assign(rng, &points, 0) else { return Ok(None) };
    let p = normalized(s0.iter().map(|_| random_rational(rng)).collect());
    let q = normalized(s1.iter().map(|_| random_rational(rng)).collect());
    Ok(Some(code_from(ell0, &s0, &p, &s1, &q)?))
}

const ATTEMPTS: usize = 500;

/// Draws case `index`: picks a kind, then retries inside the same stream
/// until that kind yields a code (falling back to a random code).
pub fn generate_case(config: &FuzzConfig, index: usize) -> Result<(CaseKind, Code)> {
    let mut rng = rng_for(config.seed, index);
    let s = config.required_spacing();
    let lo = HalfInt::from_int(config.n).twice().max(2);
    let hi = config.max_ell0.twice().max(lo);
    let kind = match rng.gen_range(0..100) {
        0..=39 => CaseKind::Solved,
        40..=59 => CaseKind::Perturbed,
        60..=74 => CaseKind::Tight,
        _ => CaseKind::Random,
    };
    let wide: Vec<i64> = (s..=s + 3).chain([s, s]).collect();
    let narrow: Vec<i64> = (1..=s + 1).collect();
    for _ in 0..ATTEMPTS {
        let drawn = match kind {
            CaseKind::Solved => solved_code(&mut rng, config, lo, hi, &wide)?,
            CaseKind::Perturbed => match solved_code(&mut rng, config, lo, hi, &wide)? {
                Some(c) => perturb(&mut rng, &c)?,
                None => None,
            },
            CaseKind::Tight => solved_code(&mut rng, config, lo, hi, &narrow)?
                .filter(|c| c.support_spacing().is_some_and(|g| g < HalfInt::from_int(s))),
            CaseKind::Random => {
                let ell0 = HalfInt::from_twice(rng.gen_range(lo..=hi));
                random_code(&mut rng, ell0)?
            }
        };
        if let Some(code) = drawn {
            return Ok((kind, code));
        }
    }
    loop {
        let ell0 = HalfInt::from_twice(rng.gen_range(lo..=hi));
        if let Some(code) = random_code(&mut rng, ell0)? {
            return Ok((CaseKind::Random, code));
        }
    }
}

/// Verdicts for one case.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CaseOutcome {
    pub kind: CaseKind,
    pub code: Code,
    pub kl_pass: bool,
    pub reduction_pass: bool,
}

/// Generates and checks `config.cases` cases on `jobs` threads, in case
/// order.
pub fn run_cases(config: &FuzzConfig, engine: Engine, jobs: usize) -> Result<Vec<CaseOutcome>> {
    let lo = HalfInt::from_int(config.n).twice().max(2);
    let channels: BTreeMap<HalfInt, ErrorSet> = with_pool(jobs, || {
        (lo..=config.max_ell0.twice().max(lo))
            .into_par_iter()
            .map(|t| {
                let ell = HalfInt::from_twice(t);
                order_n_channel(ell, config.n).map(|c| (ell, c))
            })
            .collect::<Result<_>>()
    })?;
    with_pool(jobs, || {
        (0..config.cases)
            .into_par_iter()
            .map(|i| {
                let (kind, code) = generate_case(config, i)?;
                let r = equivalence_with(&code, &channels[&code.ell0()], config.mode, engine)?;
                Ok(CaseOutcome { kind, code, kl_pass: r.kl_pass, reduction_pass: r.reduction_pass })
            })
            .collect::<Result<Vec<_>>>()
    })
}

/// Tallies outcomes into a report.
pub fn summarize(config: &FuzzConfig, outcomes: &[CaseOutcome]) -> FuzzReport {
    let mut report = FuzzReport {
        n: config.n,
        mode: format!("{:?}", config.mode).to_lowercase(),
        seed: config.seed,
        cases: outcomes.len(),
        reduction_pass: 0,
        kl_pass: 0,
        agreements: 0,
        converse_findings: 0,
        soundness_violations: Vec::new(),
        by_kind: BTreeMap::new(),
    };
    for o in outcomes {
        let tally = report.by_kind.entry(o.kind).or_default();
        tally.cases += 1;
        tally.reduction_pass += usize::from(o.reduction_pass);
        tally.kl_pass += usize::from(o.kl_pass);
        report.reduction_pass += usize::from(o.reduction_pass);
        report.kl_pass += usize::from(o.kl_pass);
        report.agreements += usize::from(o.kl_pass == o.reduction_pass);
        report.converse_findings += usize::from(o.kl_pass && !o.reduction_pass);
        if o.reduction_pass && !o.kl_pass {
            report.soundness_violations.push(code_to_json(&o.code));
        }
    }
    report
}

pub fn fuzz(config: &FuzzConfig, engine: Engine, jobs: usize) -> Result<FuzzReport> {
    Ok(summarize(config, &run_cases(config, engine, jobs)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cases_are_reproducible() {
        let config = FuzzConfig::new(1, 20, 7);
        for i in 0..20 {
            assert_eq!(generate_case(&config, i).unwrap(), generate_case(&config, i).unwrap());
        }
    }

    #[test]
    fn small_run_is_sound_and_thread_independent() {
        let config = FuzzConfig::new(1, 150, DEFAULT_SEED);
        let a = fuzz(&config, Engine::Exact, 1).unwrap();
        let b = fuzz(&config, Engine::Exact, 2).unwrap();
        assert_eq!(a, b);
        assert!(a.passed());
        assert!(a.reduction_pass > 0 && a.reduction_pass < a.cases);
        assert_eq!(a.by_kind.len(), 4);
    }
}
