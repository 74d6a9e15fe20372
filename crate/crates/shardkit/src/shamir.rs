//! Classic (t,n) Shamir dealing and Lagrange reconstruction.
//!
//! The extended scheme in [`crate::extended`] generalizes this module; it is
//! kept as the plain baseline and as the reconstruction core shared by both.

use std::collections::BTreeMap;

use crate::compartments::NodePath;
use crate::error::{Error, Result};
use crate::field::{FieldElement, FieldSource, OpCounter, PrimeModulus};

/// f(x) = constant + c1*x + ... + c_deg * x^deg over GF(p).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolynomialSpec {
    constant: FieldElement,
    coefficients: Vec<FieldElement>,
}

impl PolynomialSpec {
    pub fn new(constant: FieldElement, coefficients: Vec<FieldElement>) -> Result<Self> {
        for c in &coefficients {
            if c.modulus() != constant.modulus() {
                return Err(Error::ModulusMismatch);
            }
        }
        Ok(Self {
            constant,
            coefficients,
        })
    }

    pub fn degree(&self) -> usize {
        self.coefficients.len()
    }

    pub fn constant(&self) -> FieldElement {
        self.constant
    }

    pub fn modulus(&self) -> PrimeModulus {
        self.constant.modulus()
    }

    /// Horner evaluation; exactly `degree` multiplications.
    pub fn evaluate(&self, x: FieldElement, counter: &mut OpCounter) -> Result<FieldElement> {
        let mut acc = match self.coefficients.last() {
            Some(&c) => c,
            None => return Ok(self.constant),
        };
        for &c in self.coefficients.iter().rev().skip(1) {
            acc = acc.mul(x, counter)?.add(c)?;
        }
        acc.mul(x, counter)?.add(self.constant)
    }
}

/// One dealt share: a point (x, f(x)) with x != 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Point {
    x: FieldElement,
    y: FieldElement,
}

impl Point {
    pub fn new(x: FieldElement, y: FieldElement) -> Result<Self> {
        if x.modulus() != y.modulus() {
            return Err(Error::ModulusMismatch);
        }
        if x.is_zero() {
            // x = 0 would hand out the constant term directly.
            return Err(Error::InvalidParameters("point with x = 0".into()));
        }
        Ok(Self { x, y })
    }

    pub fn x(self) -> FieldElement {
        self.x
    }

    pub fn y(self) -> FieldElement {
        self.y
    }
}

/// Deals n points at x = 1..n on a fresh degree-(t-1) polynomial with the
/// secret as constant term.
pub fn deal_shamir(
    secret: FieldElement,
    t: usize,
    n: usize,
    source: &mut dyn FieldSource,
    counter: &mut OpCounter,
) -> Result<(PolynomialSpec, Vec<Point>)> {
    let p = secret.modulus();
    if t == 0 {
        return Err(Error::InvalidParameters("threshold t = 0".into()));
    }
    if t > n {
        return Err(Error::InvalidParameters(format!(
            "threshold {t} exceeds share count {n}"
        )));
    }
    if n as u64 >= p.value() {
        return Err(Error::InvalidParameters(format!(
            "cannot issue {n} distinct nonzero x-coordinates in GF({})",
            p.value()
        )));
    }
    let coefficients: Vec<FieldElement> = (1..t).map(|_| source.draw(p)).collect();
    let poly = PolynomialSpec::new(secret, coefficients)?;
    let points = (1..=n as u64)
        .map(|x| {
            let x = p.element(x);
            Point::new(x, poly.evaluate(x, counter)?)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((poly, points))
}

/// Recovers the constant term from at least t distinct-x points.
///
/// Duplicate x with equal y is deduplicated; duplicate x with different y is
/// an inconsistency. Exactly t points feed the result; any extra point is
/// checked for consistency (its t-subset must agree) with a scratch counter.
pub fn reconstruct_shamir(
    points: &[Point],
    t: usize,
    counter: &mut OpCounter,
) -> Result<FieldElement> {
    if t == 0 {
        return Err(Error::InvalidParameters("threshold t = 0".into()));
    }
    let distinct = dedup_points(points)?;
    if distinct.len() < t {
        return Err(Error::InsufficientShares {
            path: NodePath::root(),
        });
    }
    let base = &distinct[..t];
    let secret = lagrange_constant(base, counter)?;
    if distinct.len() > t {
        let mut scratch = OpCounter::new();
        for extra in &distinct[t..] {
            let mut subset: Vec<Point> = base[..t - 1].to_vec();
            subset.push(*extra);
            if lagrange_constant(&subset, &mut scratch)? != secret {
                return Err(Error::InconsistentShares {
                    path: NodePath::root(),
                });
            }
        }
    }
    Ok(secret)
}

/// Deduplicates points by x (sorted ascending); conflicting y values are an
/// inconsistency.
pub(crate) fn dedup_points(points: &[Point]) -> Result<Vec<Point>> {
    let Some(first) = points.first() else {
        return Ok(Vec::new());
    };
    let mut by_x: BTreeMap<u64, Point> = BTreeMap::new();
    for pt in points {
        if pt.x().modulus() != first.x().modulus() {
            return Err(Error::ModulusMismatch);
        }
        if let Some(prev) = by_x.insert(pt.x().value(), *pt) {
            if prev.y() != pt.y() {
                return Err(Error::InconsistentShares {
                    path: NodePath::root(),
                });
            }
        }
    }
    Ok(by_x.into_values().collect())
}

/// Lagrange interpolation at x = 0 over exactly the given points:
/// sum_i y_i * prod_{j != i} (-x_j) / (x_i - x_j).
///
/// t(t-1) multiplications, t(t-1) inversions (each fraction is one division).
pub(crate) fn lagrange_constant(points: &[Point], counter: &mut OpCounter) -> Result<FieldElement> {
    let p = points
        .first()
        .ok_or_else(|| Error::InvalidParameters("no points".into()))?
        .x()
        .modulus();
    let mut sum = p.element(0);
    for (i, pi) in points.iter().enumerate() {
        let mut term = pi.y();
        for (j, pj) in points.iter().enumerate() {
            if i == j {
                continue;
            }
            term = term
                .mul(pj.x().neg(), counter)?
                .div(pi.x().sub(pj.x())?, counter)?;
        }
        sum = sum.add(term)?;
    }
    Ok(sum)
}
