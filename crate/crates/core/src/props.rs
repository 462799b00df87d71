//! Structural properties of the transition operators: polynomial products
//! and adjoint symmetries.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use num_rational::BigRational;

use crate::angular::AngularState;
use crate::channels::{compose_entry, first_order_channel, order_n_channel, KrausOperator, OpLabel};
use crate::poly::{fit_polynomial, Polynomial};
use crate::{HalfInt, Radical, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FitOutcome {
    /// Diagonal entries agree with one polynomial of degree at most the bound.
    Fits(Polynomial),
    /// The operators land in different manifolds, so the product is zero.
    StructurallyZero,
    /// Fewer points than needed to test the bound.
    TooFewPoints,
    /// No polynomial within the bound fits.
    Fails,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PairFit {
    pub a: OpLabel,
    pub b: OpLabel,
    /// `r_a + r_b`.
    pub degree_bound: usize,
    /// Values of `m` used in the fit.
    pub points: usize,
    pub outcome: FitOutcome,
}

impl PairFit {
    /// True unless the fit was attempted and failed.
    pub fn ok(&self) -> bool {
        !matches!(self.outcome, FitOutcome::Fails)
    }
}

/// The points `(m, <m| a† b |m>)` over every `m` whose intermediate state is
/// inside the target manifold. Entries outside the operators' supports are
/// genuine zeros there.
pub fn diagonal_product(a: &KrausOperator, b: &KrausOperator) -> Vec<(BigRational, Radical)> {
    let target = a.source_ell + HalfInt::from_int(a.delta_ell);
    let t = a.source_ell.twice();
    (-t..=t)
        .step_by(2)
        .map(HalfInt::from_twice)
        .filter(|&m| AngularState::is_valid(target, m + HalfInt::from_int(b.delta_m)))
        .map(|m| {
            let v = compose_entry(a, b, m).map_or_else(Radical::zero, |(x, y)| x * y);
            (m.to_rational(), v)
        })
        .collect()
}

/// Fits `<m| a† b |m>` for one pair of operators with equal `delta_m`.
pub fn fit_pair(a: &KrausOperator, b: &KrausOperator) -> Result<PairFit> {
    let degree_bound = (a.rank + b.rank) as usize;
    let mut fit = PairFit { a: a.label.clone(), b: b.label.clone(), degree_bound, points: 0, outcome: FitOutcome::StructurallyZero };
    if a.delta_ell != b.delta_ell || a.source_ell != b.source_ell {
        return Ok(fit);
    }
    let data = diagonal_product(a, b);
    fit.points = data.len();
    fit.outcome = if data.len() < degree_bound + 2 {
        FitOutcome::TooFewPoints
    } else {
        match fit_polynomial(&data, degree_bound)? {
            Some(p) => FitOutcome::Fits(p),
            None => FitOutcome::Fails,
        }
    };
    Ok(fit)
}

/// All ordered pairs of the order-n channel on `ell0` with equal `delta_m`.
/// Pairs with unequal `delta_ell` are listed as structurally zero.
pub fn product_polynomial_fits(ell0: HalfInt, n: i64) -> Result<Vec<PairFit>> {
    let channel = order_n_channel(ell0, n)?;
    let mut out = Vec::new();
    for a in &channel.operators {
        for b in channel.operators.iter().filter(|b| b.delta_m == a.delta_m) {
            out.push(fit_pair(a, b)?);
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymmetryCheck {
    pub relation: String,
    pub j: HalfInt,
    pub delta_m: i64,
    pub holds: bool,
}

/// `E_dm(J+1)† = G_-dm(J)` and `L_dm† = L_-dm`, entrywise, for
/// `J = 1..=j_max`.
pub fn symmetry_relations(j_max: i64) -> Result<Vec<SymmetryCheck>> {
    let mut out = Vec::new();
    for j in 1..=j_max {
        let jj = HalfInt::from_int(j);
        let upper = first_order_channel(jj + HalfInt::from_int(1))?;
        let lower = first_order_channel(jj)?;
        let find = |set: &'_ crate::ErrorSet, label: OpLabel| set.operators.iter().find(|op| op.label == label).cloned();
        for dm in -1..=1 {
            let holds = match (find(&upper, OpLabel::E(dm)), find(&lower, OpLabel::G(-dm))) {
                (Some(e), Some(g)) => e.adjoint().same_action(&g),
                _ => false,
            };
            out.push(SymmetryCheck { relation: format!("E{dm:+}(J+1)† = G{:+}(J)", -dm), j: jj, delta_m: dm, holds });
            let holds = match (find(&lower, OpLabel::L(dm)), find(&lower, OpLabel::L(-dm))) {
                (Some(l), Some(r)) => l.adjoint().same_action(&r),
                _ => false,
            };
            out.push(SymmetryCheck { relation: format!("L{dm:+}† = L{:+}", -dm), j: jj, delta_m: dm, holds });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn products_fit_at_small_ell() {
        let fits = product_polynomial_fits(HalfInt::from_int(6), 2).unwrap();
        assert!(fits.iter().all(PairFit::ok));
        assert!(fits.iter().any(|f| f.outcome == FitOutcome::StructurallyZero));
        let same = fits.iter().find(|f| f.a == f.b).unwrap();
        // a†a is a sum of squares and never the zero polynomial.
        assert!(matches!(&same.outcome, FitOutcome::Fits(p) if !p.is_zero()));
    }

    #[test]
    fn symmetries_hold() {
        assert!(symmetry_relations(4).unwrap().iter().all(|c| c.holds));
    }
}
