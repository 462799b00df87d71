//! Exact polynomial interpolation with radical coefficients.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::{Error, Radical, Result};

/// Polynomial in one rational variable, coefficients lowest degree first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Polynomial {
    coefficients: Vec<Radical>,
}

impl Polynomial {
    pub fn new(mut coefficients: Vec<Radical>) -> Self {
        while coefficients.last().is_some_and(Radical::is_zero) {
            coefficients.pop();
        }
        Polynomial { coefficients }
    }

    pub fn coefficients(&self) -> &[Radical] {
        &self.coefficients
    }

    pub fn is_zero(&self) -> bool {
        self.coefficients.is_empty()
    }

    /// Degree, with the zero polynomial reported as `None`.
    pub fn degree(&self) -> Option<usize> {
        self.coefficients.len().checked_sub(1)
    }

    pub fn eval(&self, x: &BigRational) -> Radical {
        let mut acc = Radical::zero();
        for c in self.coefficients.iter().rev() {
            acc = &acc.scale(x) + c;
        }
        acc
    }
}

/// Fits the unique polynomial of degree at most `max_degree` through the
/// first `max_degree + 1` points and checks the remaining points against it.
///
/// Returns `Ok(None)` when the data do not lie on such a polynomial.
pub fn fit_polynomial(points: &[(BigRational, Radical)], max_degree: usize) -> Result<Option<Polynomial>> {
    if points.len() < max_degree + 2 {
        return Err(Error::Domain(format!(
            "fitting degree {max_degree} needs at least {} points, got {}",
            max_degree + 2,
            points.len()
        )));
    }
    let mut xs: Vec<&BigRational> = points.iter().map(|(x, _)| x).collect();
    xs.sort();
    if let Some(w) = xs.windows(2).find(|w| w[0] == w[1]) {
        return Err(Error::Domain(format!("duplicate abscissa m = {}", w[0])));
    }

    let nodes = &points[..=max_degree];
    // Newton divided differences, in place.
    let mut table: Vec<Radical> = nodes.iter().map(|(_, y)| y.clone()).collect();
    for level in 1..=max_degree {
        for i in (level..=max_degree).rev() {
            let span = &nodes[i].0 - &nodes[i - level].0;
            let diff = &table[i] - &table[i - 1];
            table[i] = diff.scale(&(BigRational::one() / span));
        }
    }
    // Expand the Newton form into monomial coefficients.
    let mut coefficients = vec![Radical::zero(); max_degree + 1];
    let mut basis: Vec<BigRational> = vec![BigRational::one()];
    for (k, newton) in table.iter().enumerate() {
        for (power, b) in basis.iter().enumerate() {
            if !b.is_zero() {
                coefficients[power] += newton.scale(b);
            }
        }
        if k < max_degree {
            // basis *= (x - x_k)
            let root = &nodes[k].0;
            let mut next = vec![BigRational::zero(); basis.len() + 1];
            for (power, b) in basis.iter().enumerate() {
                next[power + 1] += b;
                next[power] -= b * root;
            }
            basis = next;
        }
    }
    let poly = Polynomial::new(coefficients);
    let consistent = points.iter().all(|(x, y)| poly.eval(x) == *y);
    Ok(consistent.then_some(poly))
}
