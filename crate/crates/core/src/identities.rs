//! Exact checks of the binomial-weighted Beta integrals behind the harmonic
//! constant, plus floating-point tails of the same integrals.
//!
//! `int_0^inf t^k / (1+t)^n dt = k! (n-k-2)! / (n-1)!`, so
//! `binom(n-1, k)` times it is `1 / (n-k-1)` and the sum over `k` is the
//! harmonic number `H_{n-1}`.

use std::io::Write;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{harmonic_number, Dimension};

fn factorial(m: u32) -> BigInt {
    (1..=m).fold(BigInt::one(), |acc, i| acc * BigInt::from(i))
}

fn binomial(n: u32, k: u32) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    factorial(n) / (factorial(k) * factorial(n - k))
}

fn check_nk(n: u32, k: u32) -> Result<()> {
    if n < 2 {
        return Err(Error::InvalidDimension(n));
    }
    if k > n - 2 {
        return Err(Error::Domain(format!("need 0 <= k <= n-2, got n = {n}, k = {k}")));
    }
    Ok(())
}

/// `int_0^inf t^k / (1+t)^n dt = k! (n-k-2)! / (n-1)!` for `0 <= k <= n-2`.
pub fn beta_integral_exact(n: u32, k: u32) -> Result<BigRational> {
    check_nk(n, k)?;
    Ok(BigRational::new(factorial(k) * factorial(n - k - 2), factorial(n - 1)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum IdentityKind {
    /// `binom(n-1,k) int_0^inf t^k/(1+t)^n = 1/(n-k-1)`
    Induction,
    /// `sum_k 1/(n-k-1) = H_{n-1}`
    HarmonicClosure,
}

#[derive(Clone, Debug, PartialEq)]
pub struct IdentityRecord {
    pub kind: IdentityKind,
    pub n: u32,
    /// `None` for the harmonic closure, which sums over `k`.
    pub k: Option<u32>,
    pub exact_value: BigRational,
    pub claimed: BigRational,
    pub matches: bool,
}

impl IdentityRecord {
    fn new(kind: IdentityKind, n: u32, k: Option<u32>, exact_value: BigRational, claimed: BigRational) -> Self {
        let matches = exact_value == claimed;
        Self {
            kind,
            n,
            k,
            exact_value,
            claimed,
            matches,
        }
    }
}

impl Serialize for IdentityRecord {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("IdentityRecord", 6)?;
        st.serialize_field("kind", &self.kind)?;
        st.serialize_field("n", &self.n)?;
        st.serialize_field("k", &self.k)?;
        st.serialize_field("exact_value", &self.exact_value.to_string())?;
        st.serialize_field("claimed", &self.claimed.to_string())?;
        st.serialize_field("match", &self.matches)?;
        st.end()
    }
}

pub fn induction_identity(n: u32, k: u32) -> Result<IdentityRecord> {
    let integral = beta_integral_exact(n, k)?;
    let exact = BigRational::from_integer(binomial(n - 1, k)) * integral;
    let claimed = BigRational::new(BigInt::one(), BigInt::from(n - k - 1));
    Ok(IdentityRecord::new(IdentityKind::Induction, n, Some(k), exact, claimed))
}

/// Compares `sum_{k=0}^{n-2} 1/(n-k-1)` with the harmonic number computed
/// independently by the geometry module.
pub fn harmonic_closure(n: u32) -> Result<IdentityRecord> {
    let dim = Dimension::new(n)?;
    let sum = (0..=n - 2).fold(BigRational::zero(), |acc, k| {
        acc + BigRational::new(BigInt::one(), BigInt::from(n - k - 1))
    });
    Ok(IdentityRecord::new(
        IdentityKind::HarmonicClosure,
        n,
        None,
        sum,
        harmonic_number(dim.get() - 1),
    ))
}

/// Every induction record for `2 <= n <= n_max`, followed by the harmonic
/// closure for each `n`.
pub fn identity_table(n_max: u32) -> Result<Vec<IdentityRecord>> {
    let mut out = Vec::new();
    for n in 2..=n_max {
        for k in 0..=n - 2 {
            out.push(induction_identity(n, k)?);
        }
    }
    for n in 2..=n_max {
        out.push(harmonic_closure(n)?);
    }
    Ok(out)
}

/// CSV with columns `kind, n, k, numerator, denominator, claimed, match`.
pub fn write_identity_csv<W: Write>(records: &[IdentityRecord], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["kind", "n", "k", "numerator", "denominator", "claimed", "match"])?;
    for r in records {
        let kind = match r.kind {
            IdentityKind::Induction => "induction",
            IdentityKind::HarmonicClosure => "harmonic_closure",
        };
        w.write_record([
            kind.to_string(),
            r.n.to_string(),
            r.k.map(|k| k.to_string()).unwrap_or_default(),
            r.exact_value.numer().to_string(),
            r.exact_value.denom().to_string(),
            r.claimed.to_string(),
            r.matches.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Upper bound `R^{k+1-n} / (n-k-1)` on `int_R^inf t^k/(1+t)^n dt`, from
/// `t^k/(1+t)^n <= t^{k-n}`.
pub fn remainder_bound(n: u32, k: u32, big_r: f64) -> Result<f64> {
    check_nk(n, k)?;
    if !(big_r > 1.0) {
        return Err(Error::Domain(format!("need R > 1, got {big_r}")));
    }
    let e = f64::from(k) + 1.0 - f64::from(n);
    Ok((e * big_r.ln()).exp() / f64::from(n - k - 1))
}

/// `P(Binomial(m, y) >= j0)`, summed from the small end.
fn binomial_upper_tail(m: u32, y: f64, j0: u32) -> f64 {
    let mut terms: Vec<f64> = (j0..=m)
        .map(|j| {
            let c = binomial(m, j).to_f64().unwrap_or(f64::INFINITY);
            c * y.powi(j as i32) * (1.0 - y).powi((m - j) as i32)
        })
        .collect();
    terms.sort_by(f64::total_cmp);
    terms.iter().sum()
}

/// `binom(n-1,k) int_T^inf t^k/(1+t)^n dt`, in closed form:
/// `1/(n-k-1) P(Binomial(n-1, 1/(1+T)) >= n-k-1)`.
pub fn weighted_beta_tail(n: u32, k: u32, t: f64) -> Result<f64> {
    check_nk(n, k)?;
    if !(t >= 0.0) {
        return Err(Error::Domain(format!("need T >= 0, got {t}")));
    }
    let y = 1.0 / (1.0 + t);
    Ok(binomial_upper_tail(n - 1, y, n - k - 1) / f64::from(n - k - 1))
}

/// `sum_k binom(n-1,k) int_T^inf t^k/(1+t)^n dt` with `T = r^{n/(n-1)}`.
/// This is the exact distance `J(W_r) + H_{n-1}` of the minimizing family
/// from the sharp bound.
pub fn minimizing_family_gap(n: u32, r: f64) -> Result<f64> {
    let dim = Dimension::new(n)?;
    if !(r >= 0.0) {
        return Err(Error::InvalidRadius(r));
    }
    let t = r.powf(dim.conjugate_exponent());
    let mut terms = (0..=n - 2)
        .map(|k| weighted_beta_tail(n, k, t))
        .collect::<Result<Vec<_>>>()?;
    terms.sort_by(f64::total_cmp);
    Ok(terms.iter().sum())
}

/// Bound on [`minimizing_family_gap`]-type tails built from
/// [`remainder_bound`]: `sum_k binom(n-1,k) T^{k+1-n}/(n-k-1)`.
pub fn weighted_tail_bound(n: u32, t: f64) -> Result<f64> {
    let mut total = 0.0;
    for k in 0..=n.saturating_sub(2) {
        let c = binomial(n - 1, k).to_f64().unwrap_or(f64::INFINITY);
        total += c * remainder_bound(n, k, t)?;
    }
    Ok(total)
}

/// Nearest `f64` to an exact rational.
pub fn rational_to_f64(q: &BigRational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}
