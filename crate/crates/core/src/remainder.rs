//! The convexity remainder `R_N(X, Y) = |X+Y|^N - |X|^N - N |X|^{N-2} X.Y`
//! of the map `Z -> |Z|^N`, its collinear (radial) specialization, and the
//! two-sided bounds it satisfies.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::Dimension;

/// Slack allowed for floating-point cancellation when comparing the two sides
/// of an inequality: a multiple of machine epsilon times the magnitude of the
/// terms involved.
const ROUNDOFF_SLACK: f64 = 64.0 * f64::EPSILON;

/// A vector of `R^N`.
#[derive(Clone, Debug, PartialEq)]
pub struct VecN(Vec<f64>);

impl VecN {
    pub fn new(components: Vec<f64>) -> Self {
        Self(components)
    }

    pub fn zeros(dim: Dimension) -> Self {
        Self(vec![0.0; dim.get() as usize])
    }

    /// `scale * e_1` in dimension `dim`.
    pub fn axis(dim: Dimension, scale: f64) -> Self {
        let mut v = Self::zeros(dim);
        v.0[0] = scale;
        v
    }

    pub fn components(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    pub fn dot(&self, other: &Self) -> f64 {
        self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum()
    }

    fn plus(&self, other: &Self) -> Self {
        Self(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }
}

impl From<Vec<f64>> for VecN {
    fn from(v: Vec<f64>) -> Self {
        Self(v)
    }
}

/// Signed radial components of `grad v_N` and `grad u` for a radial `u`.
///
/// `a` is the radial component of `grad v_N`, which points toward the origin,
/// so `a <= 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RadialGradientPair {
    pub a: f64,
    pub b: f64,
}

impl RadialGradientPair {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if a > 0.0 {
            return Err(Error::Domain(format!(
                "radial component of grad v_N must be non-positive, got {a}"
            )));
        }
        Ok(Self { a, b })
    }
}

fn check_len(dim: Dimension, v: &VecN) -> Result<()> {
    let expected = dim.get() as usize;
    if v.len() != expected {
        return Err(Error::DimensionMismatch {
            expected,
            found: v.len(),
        });
    }
    Ok(())
}

/// `R_N(X, Y)`. For `N = 2` the remainder is exactly `|Y|^2`.
pub fn remainder_vec(dim: Dimension, x: &VecN, y: &VecN) -> Result<f64> {
    check_len(dim, x)?;
    check_len(dim, y)?;
    let n = dim.get() as i32;
    if n == 2 {
        return Ok(y.dot(y));
    }
    let xn = x.norm();
    Ok(x.plus(y).norm().powi(n) - xn.powi(n) - f64::from(n) * xn.powi(n - 2) * x.dot(y))
}

/// `R_N(a e_1, b e_1) = |a+b|^N - |a|^N - N |a|^{N-2} a b`.
///
/// Performs the same floating-point operations as [`remainder_vec`] on
/// collinear inputs, so the two agree exactly.
pub fn remainder_radial(dim: Dimension, pair: RadialGradientPair) -> f64 {
    remainder_scalar(dim.get() as i32, pair.a, pair.b)
}

#[inline]
pub(crate) fn remainder_scalar(n: i32, a: f64, b: f64) -> f64 {
    if n == 2 {
        return b * b;
    }
    let an = a.abs();
    (a + b).abs().powi(n) - an.powi(n) - f64::from(n) * an.powi(n - 2) * (a * b)
}

/// `c_N = N (N-1) 2^{N-4}` for `N >= 3`; 1 for `N = 2`, where `R_2 = |Y|^2`.
pub fn upper_bound_constant(dim: Dimension) -> f64 {
    let n = dim.get();
    if n == 2 {
        1.0
    } else {
        f64::from(n) * f64::from(n - 1) * 2f64.powi(n as i32 - 4)
    }
}

/// Outcome of checking `0 <= R_N(X,Y) <= c_N (|Y|^N + |Y|^2 |X|^{N-2})`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TwoSidedBound {
    pub remainder: f64,
    pub upper: f64,
    /// `upper - remainder`; non-negative when the bound holds.
    pub upper_margin: f64,
    pub pass: bool,
}

pub fn check_two_sided_bound(dim: Dimension, x: &VecN, y: &VecN) -> Result<TwoSidedBound> {
    let r = remainder_vec(dim, x, y)?;
    let n = dim.get() as i32;
    let (xn, yn) = (x.norm(), y.norm());
    let upper = upper_bound_constant(dim) * (yn.powi(n) + yn * yn * xn.powi(n - 2));
    let scale = x.plus(y).norm().powi(n) + xn.powi(n) + upper;
    let slack = ROUNDOFF_SLACK * scale;
    Ok(TwoSidedBound {
        remainder: r,
        upper,
        upper_margin: upper - r,
        pass: r >= -slack && r <= upper + slack,
    })
}

/// Outcome of a one-sided comparison `lhs >= rhs`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LowerBound {
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub pass: bool,
}

/// `R_N(X,Y) >= (N/2) |X|^{N-2} |Y|^2`, valid for even `N >= 4`.
pub fn check_even_lower_bound(dim: Dimension, x: &VecN, y: &VecN) -> Result<LowerBound> {
    let n = dim.get();
    if !n.is_multiple_of(2) || n < 4 {
        return Err(Error::Domain(format!(
            "the even-dimension lower bound needs an even N >= 4, got {n}"
        )));
    }
    let r = remainder_vec(dim, x, y)?;
    let xn = x.norm();
    let rhs = f64::from(n) / 2.0 * xn.powi(n as i32 - 2) * y.dot(y);
    let scale = x.plus(y).norm().powi(n as i32) + xn.powi(n as i32) + rhs;
    Ok(LowerBound {
        lhs: r,
        rhs,
        margin: r - rhs,
        pass: r >= rhs - ROUNDOFF_SLACK * scale,
    })
}

/// Outcome of the two binomial inequalities used for the even-dimension bound.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BinomialCheck {
    /// `(a+b)^k - (a^k + k a^{k-1} b + b^k)`.
    pub first_margin: f64,
    /// `(a+b)^k - (a^k + k a^{k-1} b + k a b^{k-1} + b^k)`, present for `k >= 3`.
    pub second_margin: Option<f64>,
    pub pass: bool,
}

/// Checks `(a+b)^k >= a^k + k a^{k-1} b + b^k` (`k >= 2`) and, for `k >= 3`,
/// `(a+b)^k >= a^k + k a^{k-1} b + k a b^{k-1} + b^k`, where `a >= 0` and
/// `a + b >= 0`.
pub fn check_binomial_inequalities(k: u32, a: f64, b: f64) -> Result<BinomialCheck> {
    if k < 2 {
        return Err(Error::Domain(format!("exponent k must be >= 2, got {k}")));
    }
    if !(a >= 0.0) || !(a + b >= 0.0) || !b.is_finite() {
        return Err(Error::Domain(format!(
            "need a >= 0 and a + b >= 0, got a = {a}, b = {b}"
        )));
    }
    let ki = k as i32;
    let kf = f64::from(k);
    let lhs = (a + b).powi(ki);
    let t_ak = a.powi(ki);
    let t_lin = kf * a.powi(ki - 1) * b;
    let t_bk = b.powi(ki);
    let first_rhs = t_ak + t_lin + t_bk;
    let mut scale = lhs.abs() + t_ak.abs() + t_lin.abs() + t_bk.abs();
    let first_margin = lhs - first_rhs;

    let second_margin = (k >= 3).then(|| {
        let t_mix = kf * a * b.powi(ki - 1);
        scale += t_mix.abs();
        lhs - (first_rhs + t_mix)
    });
    let slack = ROUNDOFF_SLACK * scale;
    let pass = first_margin >= -slack && second_margin.is_none_or(|m| m >= -slack);
    Ok(BinomialCheck {
        first_margin,
        second_margin,
        pass,
    })
}
