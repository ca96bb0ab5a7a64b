//! Normalization of raw attribute values to informational values in `[0, 1]`.
//!
//! Two families are supported: min-max range normalization across the
//! alternatives of a choice task, and piecewise-linear fuzzy membership
//! functions whose breakpoints are the attribute cut-offs. Cut-offs may be
//! fixed or resolved per decision-maker from demographic covariates through
//! a cumulative log-link, which keeps the breakpoints ordered for any finite
//! coefficients.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math::exp;

/// Whether larger raw values carry more utility.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Direction {
    Positive,
    Negative,
}

/// Range normalization across the alternatives of one task.
///
/// Positive: `(x - min) / (max - min)`. Negative: `(max - x) / (max - min)`.
/// A degenerate range (all values equal) maps every entry to 0.5: identical
/// values cancel in utility differences, so the constant is immaterial.
pub fn normalize_minmax(values: &[f64], direction: Direction) -> Result<Vec<f64>> {
    if values.len() < 2 {
        return Err(Error::DimensionMismatch {
            what: "min-max normalization needs at least two values",
            expected: 2,
            found: values.len(),
        });
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("attribute values"));
    }
    let mut out = Vec::with_capacity(values.len());
    minmax_into(values, direction, &mut out);
    Ok(out)
}

pub(crate) fn minmax_into(values: &[f64], direction: Direction, out: &mut Vec<f64>) {
    let (lo, hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    let range = hi - lo;
    out.clear();
    if range == 0.0 {
        out.extend(values.iter().map(|_| 0.5));
        return;
    }
    match direction {
        Direction::Positive => out.extend(values.iter().map(|v| (v - lo) / range)),
        Direction::Negative => out.extend(values.iter().map(|v| (hi - v) / range)),
    }
}

/// Membership function families, without their breakpoints.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum MembershipShape {
    HalfTriangularIncreasing,
    HalfTriangularDecreasing,
    Trapezoidal,
}

impl MembershipShape {
    pub fn n_points(self) -> usize {
        match self {
            MembershipShape::Trapezoidal => 4,
            _ => 2,
        }
    }

    pub fn point_names(self) -> &'static [&'static str] {
        match self {
            MembershipShape::Trapezoidal => &["a", "b", "c", "d"],
            _ => &["a", "b"],
        }
    }

    /// Positive for increasing shapes, negative for the decreasing one.
    /// Trapezoids have no single direction.
    pub fn direction(self) -> Option<Direction> {
        match self {
            MembershipShape::HalfTriangularIncreasing => Some(Direction::Positive),
            MembershipShape::HalfTriangularDecreasing => Some(Direction::Negative),
            MembershipShape::Trapezoidal => None,
        }
    }
}

/// A piecewise-linear membership function with its cut-off points in raw
/// attribute units. Intervals are half-open on the left, `(a, b]`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum MembershipFunction {
    /// 0 for `x ≤ a`, `(x-a)/(b-a)` on `(a, b]`, 1 above `b`.
    HalfTriangularIncreasing { a: f64, b: f64 },
    /// 1 for `x ≤ a`, `(b-x)/(b-a)` on `(a, b]`, 0 above `b`.
    HalfTriangularDecreasing { a: f64, b: f64 },
    /// 0 outside `(a, d]`, rising on `(a, b]`, 1 on `(b, c]`, falling on `(c, d]`.
    Trapezoidal { a: f64, b: f64, c: f64, d: f64 },
}

impl MembershipFunction {
    /// Validates the breakpoints for `shape`.
    pub fn new(shape: MembershipShape, points: &[f64]) -> Result<Self> {
        if points.len() != shape.n_points() {
            return Err(Error::DimensionMismatch {
                what: "membership cut-off points",
                expected: shape.n_points(),
                found: points.len(),
            });
        }
        if points.iter().any(|p| !p.is_finite()) {
            return Err(Error::NonFinite("membership cut-off points"));
        }
        let f = match shape {
            MembershipShape::HalfTriangularIncreasing => {
                MembershipFunction::HalfTriangularIncreasing {
                    a: points[0],
                    b: points[1],
                }
            }
            MembershipShape::HalfTriangularDecreasing => {
                MembershipFunction::HalfTriangularDecreasing {
                    a: points[0],
                    b: points[1],
                }
            }
            MembershipShape::Trapezoidal => MembershipFunction::Trapezoidal {
                a: points[0],
                b: points[1],
                c: points[2],
                d: points[3],
            },
        };
        f.check()?;
        Ok(f)
    }

    fn check(&self) -> Result<()> {
        match *self {
            MembershipFunction::HalfTriangularIncreasing { a, b }
            | MembershipFunction::HalfTriangularDecreasing { a, b } => {
                if a < b {
                    Ok(())
                } else {
                    Err(Error::InvalidMembership(format!(
                        "half-triangular requires a < b, got a = {a}, b = {b}"
                    )))
                }
            }
            MembershipFunction::Trapezoidal { a, b, c, d } => {
                if a <= b && b <= c && c <= d && a < d {
                    Ok(())
                } else {
                    Err(Error::InvalidMembership(format!(
                        "trapezoid requires a ≤ b ≤ c ≤ d and a < d, got ({a}, {b}, {c}, {d})"
                    )))
                }
            }
        }
    }

    pub fn shape(&self) -> MembershipShape {
        match self {
            MembershipFunction::HalfTriangularIncreasing { .. } => {
                MembershipShape::HalfTriangularIncreasing
            }
            MembershipFunction::HalfTriangularDecreasing { .. } => {
                MembershipShape::HalfTriangularDecreasing
            }
            MembershipFunction::Trapezoidal { .. } => MembershipShape::Trapezoidal,
        }
    }

    pub fn points(&self) -> Vec<f64> {
        match *self {
            MembershipFunction::HalfTriangularIncreasing { a, b }
            | MembershipFunction::HalfTriangularDecreasing { a, b } => alloc::vec![a, b],
            MembershipFunction::Trapezoidal { a, b, c, d } => alloc::vec![a, b, c, d],
        }
    }

    /// Normalized value of raw `x`, always in `[0, 1]` for finite `x`.
    #[inline]
    pub fn value(&self, x: f64) -> f64 {
        membership_value(x, self)
    }
}

/// Evaluates a membership function at raw value `x`.
#[inline]
pub fn membership_value(x: f64, f: &MembershipFunction) -> f64 {
    match *f {
        MembershipFunction::HalfTriangularDecreasing { a, b } => {
            if x <= a {
                1.0
            } else if x <= b {
                (b - x) / (b - a)
            } else {
                0.0
            }
        }
        MembershipFunction::HalfTriangularIncreasing { a, b } => {
            if x <= a {
                0.0
            } else if x <= b {
                (x - a) / (b - a)
            } else {
                1.0
            }
        }
        MembershipFunction::Trapezoidal { a, b, c, d } => {
            if x <= a || x > d {
                0.0
            } else if x <= b {
                (x - a) / (b - a)
            } else if x <= c {
                1.0
            } else {
                (d - x) / (d - c)
            }
        }
    }
}

/// Demographic parameterization of the cut-off points of one membership
/// function.
///
/// `coefficients[k]` is the coefficient vector of point `k` over the
/// covariate vector `z` (whose first entry is the intercept 1). Points are
/// resolved cumulatively: `p_0 = exp(γ_0·z)` and `p_k = p_{k-1} + exp(γ_k·z)`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CutoffParameterization {
    pub shape: MembershipShape,
    pub coefficients: Vec<Vec<f64>>,
}

impl CutoffParameterization {
    pub fn new(shape: MembershipShape, coefficients: Vec<Vec<f64>>) -> Result<Self> {
        if coefficients.len() != shape.n_points() {
            return Err(Error::DimensionMismatch {
                what: "cut-off coefficient sets",
                expected: shape.n_points(),
                found: coefficients.len(),
            });
        }
        Ok(Self {
            shape,
            coefficients,
        })
    }

    /// Constant-only parameterization reproducing the given ordered points.
    pub fn from_points(shape: MembershipShape, points: &[f64]) -> Result<Self> {
        MembershipFunction::new(shape, points)?;
        let mut coefficients = Vec::with_capacity(points.len());
        let mut prev = 0.0;
        for (k, &p) in points.iter().enumerate() {
            let gap = if k == 0 { p } else { p - prev };
            if !(gap > 0.0) {
                return Err(Error::InvalidMembership(format!(
                    "log-link needs strictly positive first point and gaps, got gap {gap} at point {k}"
                )));
            }
            coefficients.push(alloc::vec![crate::math::ln(gap)]);
            prev = p;
        }
        Ok(Self {
            shape,
            coefficients,
        })
    }

    /// Resolved breakpoints for covariate vector `z`.
    pub fn resolve_points(&self, z: &[f64]) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(self.coefficients.len());
        resolve_into(&self.coefficients, z, &mut out)?;
        Ok(out)
    }

    pub fn resolve(&self, z: &[f64]) -> Result<MembershipFunction> {
        let points = self.resolve_points(z)?;
        MembershipFunction::new(self.shape, &points)
    }
}

pub(crate) fn resolve_into(coefficients: &[Vec<f64>], z: &[f64], out: &mut Vec<f64>) -> Result<()> {
    out.clear();
    let mut acc = 0.0;
    for gamma in coefficients {
        if gamma.len() != z.len() {
            return Err(Error::DimensionMismatch {
                what: "cut-off covariates",
                expected: gamma.len(),
                found: z.len(),
            });
        }
        let index: f64 = gamma.iter().zip(z).map(|(g, v)| g * v).sum();
        if !index.is_finite() {
            return Err(Error::NonFinite("cut-off linear index"));
        }
        acc += exp(index);
        if !acc.is_finite() {
            return Err(Error::NonFinite("resolved cut-off"));
        }
        out.push(acc);
    }
    Ok(())
}

/// Two-point cut-offs `(lower, upper)`: `lower = exp(γ_l·z)`,
/// `upper = lower + exp(γ_u·z)`. `z[0]` must be the intercept 1.
pub fn resolve_cutoffs(param: &CutoffParameterization, z: &[f64]) -> Result<(f64, f64)> {
    if param.coefficients.len() != 2 {
        return Err(Error::DimensionMismatch {
            what: "two-point cut-off parameterization",
            expected: 2,
            found: param.coefficients.len(),
        });
    }
    let p = param.resolve_points(z)?;
    Ok((p[0], p[1]))
}
