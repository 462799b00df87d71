//! Code search on squared amplitudes.
//!
//! Over a fixed support the diagonal Knill-Laflamme conditions become linear
//! in the probabilities `p_m = |a_m|^2`: two normalizations plus equality of
//! the moments `sum p_m m^k` for `k = 1..=2n` (`k <= n` for detection).
//! Feasible codes are the points of the resulting polytope.

pub mod linalg;
pub mod scan;

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::angular::AngularState;
use crate::codes::{validate, Code, Codeword, Family, Mode};
use crate::{Error, HalfInt, Result};

use linalg::{enumerate_vertices, phase_one, rref, Q};

/// Polytopes with at most this many free dimensions get their vertices
/// listed; larger ones are described by a particular solution and a null
/// basis.
pub const MAX_ENUMERATED_DIMENSION: usize = 4;

const MAX_BASES: usize = 200_000;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SearchProblem {
    pub ell0: HalfInt,
    pub support0: Vec<HalfInt>,
    pub support1: Vec<HalfInt>,
    pub order_n: i64,
    pub mode: Mode,
}

impl SearchProblem {
    pub fn new(ell0: HalfInt, support0: Vec<HalfInt>, support1: Vec<HalfInt>, order_n: i64, mode: Mode) -> Self {
        SearchProblem { ell0, support0, support1, order_n, mode }
    }

    /// Highest moment power constrained by the system.
    pub fn max_moment(&self) -> i64 {
        match self.mode {
            Mode::Correction => 2 * self.order_n,
            Mode::Detection => self.order_n,
        }
    }

    /// Minimum spacing that makes off-diagonal conditions automatic.
    pub fn required_spacing(&self) -> i64 {
        match self.mode {
            Mode::Correction => 2 * self.order_n + 1,
            Mode::Detection => self.order_n + 1,
        }
    }

    pub fn spacing(&self) -> Option<HalfInt> {
        let mut all: Vec<HalfInt> = self.support0.iter().chain(&self.support1).copied().collect();
        all.sort();
        all.windows(2).map(|w| w[1] - w[0]).min()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RowLabel {
    /// `sum p = 1` (codeword 0) or `sum q = 1` (codeword 1).
    Normalization(usize),
    /// `sum p m^k - sum q m^k = 0`.
    Moment(u32),
}

impl fmt::Display for RowLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RowLabel::Normalization(i) => write!(f, "normalization of codeword {i}"),
            RowLabel::Moment(k) => write!(f, "moment <m^{k}>"),
        }
    }
}

/// `A x = b` over the unknowns `(p_0.., q_0..)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearSystem {
    pub matrix: Vec<Vec<Q>>,
    pub rhs: Vec<Q>,
    pub rows: Vec<RowLabel>,
    pub split: usize,
}

impl LinearSystem {
    pub fn unknowns(&self) -> usize {
        self.matrix.first().map_or(0, Vec::len)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Warning {
    /// Spacing below the order's requirement; the moment system alone then
    /// does not imply the off-diagonal conditions.
    SpacingBelowRequirement { spacing: Option<HalfInt>, required: i64 },
}

pub fn build_system(problem: &SearchProblem) -> Result<(LinearSystem, Vec<Warning>)> {
    if problem.support0.is_empty() || problem.support1.is_empty() {
        return Err(Error::Domain(String::from("both codewords need a nonempty support")));
    }
    if problem.order_n < 1 {
        return Err(Error::Domain(format!("order must be at least 1, got {}", problem.order_n)));
    }
    for &m in problem.support0.iter().chain(&problem.support1) {
        AngularState::new(problem.ell0, m)?;
    }
    let mut all: Vec<HalfInt> = problem.support0.iter().chain(&problem.support1).copied().collect();
    all.sort();
    if all.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::Domain(String::from("supports must be disjoint and free of repeats")));
    }
    let mut warnings = Vec::new();
    let spacing = problem.spacing();
    if !spacing.is_some_and(|s| s >= HalfInt::from_int(problem.required_spacing())) {
        warnings.push(Warning::SpacingBelowRequirement { spacing, required: problem.required_spacing() });
    }

    let s0 = problem.support0.len();
    let width = s0 + problem.support1.len();
    let mut matrix = Vec::new();
    let mut rhs = Vec::new();
    let mut rows = Vec::new();
    for i in 0..2 {
        matrix.push((0..width).map(|c| if (c < s0) == (i == 0) { Q::one() } else { Q::zero() }).collect());
        rhs.push(Q::one());
        rows.push(RowLabel::Normalization(i));
    }
    for k in 1..=problem.max_moment() as u32 {
        let row = problem
            .support0
            .iter()
            .map(|m| m.to_rational().pow(k as i32))
            .chain(problem.support1.iter().map(|m| -m.to_rational().pow(k as i32)))
            .collect();
        matrix.push(row);
        rhs.push(Q::zero());
        rows.push(RowLabel::Moment(k));
    }
    Ok((LinearSystem { matrix, rhs, rows, split: s0 }, warnings))
}

/// A feasible probability assignment.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Vertex {
    pub p: Vec<Q>,
    pub q: Vec<Q>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolutionFamily {
    /// A feasible point: the centroid of the vertices when they are listed,
    /// otherwise the simplex's first feasible vertex.
    pub particular: Vertex,
    /// Directions spanning the affine solution set of the equalities.
    pub null_basis: Vec<Vec<Q>>,
    /// Vertices of the feasible polytope, sorted, when its free dimension is
    /// at most [`MAX_ENUMERATED_DIMENSION`].
    pub vertices: Option<Vec<Vertex>>,
    pub free_dimension: usize,
    pub warnings: Vec<Warning>,
}

/// Proof of infeasibility: multipliers `y` for the rows with `yᵀA <= 0`
/// and `yᵀb > 0` (or `yᵀA = 0`, `yᵀb ≠ 0` when the equalities alone clash).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Certificate {
    pub multipliers: Vec<(RowLabel, Q)>,
    /// `true` when even signed amplitudes-squared could not satisfy the rows.
    pub equalities_inconsistent: bool,
}

impl Certificate {
    /// Highest moment taking part in the contradiction.
    pub fn unmatched_moment(&self) -> Option<u32> {
        self.multipliers
            .iter()
            .filter_map(|(r, _)| match r {
                RowLabel::Moment(k) => Some(*k),
                RowLabel::Normalization(_) => None,
            })
            .max()
    }
}

impl fmt::Display for Certificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "infeasible: ")?;
        for (i, (row, y)) in self.multipliers.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({y})·[{row}]")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Solution {
    Feasible(SolutionFamily),
    Infeasible(Certificate),
}

impl Solution {
    pub fn family(&self) -> Option<&SolutionFamily> {
        match self {
            Solution::Feasible(f) => Some(f),
            Solution::Infeasible(_) => None,
        }
    }
}

fn split(x: Vec<Q>, at: usize) -> Vertex {
    let mut p = x;
    let q = p.split_off(at);
    Vertex { p, q }
}

fn certificate(system: &LinearSystem, y: Vec<Q>, equalities_inconsistent: bool) -> Certificate {
    let multipliers = system.rows.iter().copied().zip(y).filter(|(_, v)| !v.is_zero()).collect();
    Certificate { multipliers, equalities_inconsistent }
}

/// Mean of the vertices: feasible, and fixed by every symmetry of the
/// polytope (in particular `m → -m` for mirror-symmetric supports).
fn centroid(vertices: &[Vertex]) -> Vertex {
    let count = Q::from_integer(vertices.len().into());
    let mean = |pick: fn(&Vertex) -> &Vec<Q>| -> Vec<Q> {
        let width = pick(&vertices[0]).len();
        (0..width).map(|i| vertices.iter().map(|v| pick(v)[i].clone()).sum::<Q>() / &count).collect()
    };
    Vertex { p: mean(|v| &v.p), q: mean(|v| &v.q) }
}

pub fn solve(problem: &SearchProblem) -> Result<Solution> {
    let (system, warnings) = build_system(problem)?;
    let reduced = rref(&system.matrix, &system.rhs);
    if let Some(y) = reduced.inconsistency {
        return Ok(Solution::Infeasible(certificate(&system, y, true)));
    }
    let tableau = match phase_one(&system.matrix, &system.rhs) {
        Ok(t) => t,
        Err(y) => return Ok(Solution::Infeasible(certificate(&system, y, false))),
    };
    let free_dimension = system.unknowns() - reduced.rank();
    let null_basis = reduced.null_basis();
    let vertices = if free_dimension <= MAX_ENUMERATED_DIMENSION {
        let vs = enumerate_vertices(tableau.clone(), MAX_BASES)
            .ok_or_else(|| Error::Internal(String::from("vertex enumeration exceeded its basis budget")))?;
        Some(vs.into_iter().map(|x| split(x, system.split)).collect::<Vec<_>>())
    } else {
        None
    };
    let particular = match &vertices {
        Some(vs) if !vs.is_empty() => centroid(vs),
        Some(_) => return Err(Error::Internal(String::from("feasible polytope without vertices"))),
        None => split(tableau.vertex(), system.split),
    };
    let mut vertices = vertices;
    if let Some(vs) = vertices.as_mut() {
        vs.sort();
    }
    Ok(Solution::Feasible(SolutionFamily { particular, null_basis, vertices, free_dimension, warnings }))
}

/// Codewords with amplitudes `sqrt(p)` and `sqrt(q)`.
pub fn solution_to_code(problem: &SearchProblem, vertex: &Vertex) -> Result<Code> {
    if vertex.p.len() != problem.support0.len() || vertex.q.len() != problem.support1.len() {
        return Err(Error::Internal(String::from("vertex does not match the problem's supports")));
    }
    if vertex.p.iter().chain(&vertex.q).any(|x| x < &Q::zero()) {
        return Err(Error::Internal(String::from("negative probability in a polytope vertex")));
    }
    let zero = Codeword::from_probabilities(problem.ell0, problem.support0.iter().copied().zip(&vertex.p))?;
    let one = Codeword::from_probabilities(problem.ell0, problem.support1.iter().copied().zip(&vertex.q))?;
    let code = Code::new(
        zero,
        one,
        Family::Search,
        alloc::vec![(String::from("ell0"), problem.ell0), (String::from("n"), HalfInt::from_int(problem.order_n))],
    )?;
    if let Some(f) = validate(&code).into_iter().next() {
        return Err(Error::Internal(format!("search produced an invalid code: {f}")));
    }
    Ok(code)
}

/// Sum of a probability vector (for checks).
pub fn total(v: &[Q]) -> Q {
    v.iter().fold(BigRational::zero(), |acc, x| acc + x)
}
