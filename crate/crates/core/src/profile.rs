//! Radial profiles `u(|x|)` and the constructions applied to them: the smooth
//! cutoff, truncation, the `eta_k` multipliers, the two transforms between
//! `R^N` and the unit ball, the minimizing family and the counterexample
//! series.
//!
//! A [`Profile`] is immutable and cheap to clone. Every profile carries the
//! radii where its slope may jump (its *breaks*) and, optionally, a radius
//! beyond which it is constant; integration code uses both.

use std::fmt;
use std::io::{Read, Write};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Geometry;

type Func = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Tolerance for the boundary condition `u(1) = 0`.
pub const BOUNDARY_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileKind {
    Sampled,
    Analytic,
}

/// The profile equals `value` for every radius `>= radius`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Flat {
    pub radius: f64,
    pub value: f64,
}

#[derive(Clone)]
pub struct Profile {
    value: Func,
    slope: Func,
    breaks: Arc<[f64]>,
    flat: Option<Flat>,
    kind: ProfileKind,
}

impl fmt::Debug for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Profile")
            .field("kind", &self.kind)
            .field("breaks", &self.breaks.len())
            .field("flat", &self.flat)
            .finish()
    }
}

fn normalize_breaks(mut breaks: Vec<f64>, flat: Option<Flat>) -> Arc<[f64]> {
    let limit = flat.map_or(f64::INFINITY, |f| f.radius);
    breaks.retain(|b| b.is_finite() && *b > 0.0 && *b <= limit);
    if let Some(f) = flat {
        if f.radius > 0.0 && f.radius.is_finite() {
            breaks.push(f.radius);
        }
    }
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    breaks.into()
}

impl Profile {
    /// A closed-form profile from its value and slope.
    pub fn analytic<V, S>(value: V, slope: S) -> Self
    where
        V: Fn(f64) -> f64 + Send + Sync + 'static,
        S: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            value: Arc::new(value),
            slope: Arc::new(slope),
            breaks: Arc::from(Vec::new()),
            flat: None,
            kind: ProfileKind::Analytic,
        }
    }

    pub fn with_breaks(mut self, breaks: Vec<f64>) -> Self {
        let mut all = self.breaks.to_vec();
        all.extend(breaks);
        self.breaks = normalize_breaks(all, self.flat);
        self
    }

    /// Declares the profile constant, equal to `value`, on `[radius, inf)`.
    pub fn with_flat(mut self, radius: f64, value: f64) -> Self {
        self.flat = Some(Flat { radius, value });
        self.breaks = normalize_breaks(self.breaks.to_vec(), self.flat);
        self
    }

    fn with_kind(mut self, kind: ProfileKind) -> Self {
        self.kind = kind;
        self
    }

    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    pub fn constant(c: f64) -> Self {
        Self::analytic(move |_| c, |_| 0.0).with_flat(0.0, c)
    }

    pub fn value(&self, r: f64) -> f64 {
        match self.flat {
            Some(f) if r >= f.radius => f.value,
            _ => (self.value)(r),
        }
    }

    /// Radial derivative; at a break the one-sided derivative from the right.
    pub fn slope(&self, r: f64) -> f64 {
        match self.flat {
            Some(f) if r >= f.radius => 0.0,
            _ => (self.slope)(r),
        }
    }

    pub fn breaks(&self) -> &[f64] {
        &self.breaks
    }

    pub fn flat(&self) -> Option<Flat> {
        self.flat
    }

    /// Radius beyond which the profile vanishes identically, if any.
    pub fn support_bound(&self) -> Option<f64> {
        self.flat.filter(|f| f.value == 0.0).map(|f| f.radius)
    }

    pub fn kind(&self) -> ProfileKind {
        self.kind
    }

    fn combined_kind(&self, other: &Self) -> ProfileKind {
        if self.kind == ProfileKind::Analytic && other.kind == ProfileKind::Analytic {
            ProfileKind::Analytic
        } else {
            ProfileKind::Sampled
        }
    }

    fn combined_flat(&self, other: &Self, op: impl Fn(f64, f64) -> f64) -> Option<Flat> {
        match (self.flat, other.flat) {
            (Some(a), Some(b)) => Some(Flat {
                radius: a.radius.max(b.radius),
                value: op(a.value, b.value),
            }),
            _ => None,
        }
    }

    fn merged_breaks(&self, other: &Self) -> Vec<f64> {
        self.breaks.iter().chain(other.breaks.iter()).copied().collect()
    }

    pub fn add(&self, other: &Self) -> Self {
        let (a, b) = (self.clone(), other.clone());
        let (a2, b2) = (self.clone(), other.clone());
        let flat = self.combined_flat(other, |x, y| x + y);
        let mut p = Self::analytic(move |r| a.value(r) + b.value(r), move |r| a2.slope(r) + b2.slope(r))
            .with_kind(self.combined_kind(other));
        p.flat = flat;
        p.with_breaks(self.merged_breaks(other))
    }

    /// Pointwise product, with the slope from the product rule.
    pub fn mul(&self, other: &Self) -> Self {
        let (a, b) = (self.clone(), other.clone());
        let (a2, b2) = (self.clone(), other.clone());
        let flat = self.combined_flat(other, |x, y| x * y);
        let mut p = Self::analytic(
            move |r| a.value(r) * b.value(r),
            move |r| a2.slope(r) * b2.value(r) + a2.value(r) * b2.slope(r),
        )
        .with_kind(self.combined_kind(other));
        p.flat = flat;
        p.with_breaks(self.merged_breaks(other))
    }

    pub fn scale(&self, factor: f64) -> Self {
        let (a, a2) = (self.clone(), self.clone());
        let mut p = Self::analytic(move |r| factor * a.value(r), move |r| factor * a2.slope(r))
            .with_kind(self.kind);
        p.flat = self.flat.map(|f| Flat {
            value: factor * f.value,
            ..f
        });
        p.with_breaks(self.breaks.to_vec())
    }

    /// `u + c`.
    pub fn shift(&self, c: f64) -> Self {
        let (a, a2) = (self.clone(), self.clone());
        let mut p = Self::analytic(move |r| a.value(r) + c, move |r| a2.slope(r)).with_kind(self.kind);
        p.flat = self.flat.map(|f| Flat {
            value: f.value + c,
            ..f
        });
        p.with_breaks(self.breaks.to_vec())
    }

    /// `rho -> u(factor * rho)`.
    pub fn dilate(&self, factor: f64) -> Result<Self> {
        if !(factor > 0.0 && factor.is_finite()) {
            return Err(Error::Domain(format!("dilation factor must be positive, got {factor}")));
        }
        let (a, a2) = (self.clone(), self.clone());
        let mut p = Self::analytic(move |r| a.value(factor * r), move |r| factor * a2.slope(factor * r))
            .with_kind(self.kind);
        p.flat = self.flat.map(|f| Flat {
            radius: f.radius / factor,
            ..f
        });
        Ok(p.with_breaks(self.breaks.iter().map(|b| b / factor).collect()))
    }

    /// Radii used to probe the profile numerically: its breaks plus a
    /// geometric grid reaching out to the flat radius (or `far` when the
    /// profile has none).
    pub fn probe_points(&self, far: f64) -> Vec<f64> {
        let extent = self.flat.map_or(far, |f| f.radius.max(1e-6));
        let mut pts = geometric_grid(extent, 1.01, 1e-6_f64.min(extent / 2.0));
        pts.extend(self.breaks.iter().copied().filter(|b| *b <= extent));
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts
    }

    /// Largest `|u|` over [`Profile::probe_points`] and the flat value.
    pub fn sup_abs_estimate(&self, far: f64) -> f64 {
        let mut m = self.flat.map_or(0.0, |f| f.value.abs());
        for r in self.probe_points(far) {
            // left and right limits at breaks agree for continuous profiles
            m = m.max(self.value(r).abs());
        }
        m
    }

    pub fn sample(&self, nodes: &[f64]) -> Result<SampledProfile> {
        let values = nodes.iter().map(|&r| self.value(r)).collect();
        SampledProfile::new(nodes.to_vec(), values, SampledTail::Constant)
    }

    /// Writes `r,value,slope` rows at the given radii.
    pub fn write_csv<W: Write>(&self, nodes: &[f64], writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        for &r in nodes {
            w.serialize(CsvRow {
                r,
                value: self.value(r),
                slope: self.slope(r),
            })?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct CsvRow {
    r: f64,
    value: f64,
    slope: f64,
}

/// What a sampled profile does past its last node.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SampledTail {
    /// Identically zero; the last sample must be 0.
    Zero,
    /// Keeps the last sampled value.
    Constant,
}

/// Piecewise-linear profile through `(nodes[i], values[i])`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampledProfile {
    nodes: Vec<f64>,
    values: Vec<f64>,
    tail: SampledTail,
}

impl SampledProfile {
    pub fn new(nodes: Vec<f64>, values: Vec<f64>, tail: SampledTail) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(Error::InvalidSamples("need at least 2 nodes".into()));
        }
        if nodes.len() != values.len() {
            return Err(Error::InvalidSamples(format!(
                "{} nodes but {} values",
                nodes.len(),
                values.len()
            )));
        }
        if nodes[0] != 0.0 {
            return Err(Error::InvalidSamples(format!("first node must be 0, got {}", nodes[0])));
        }
        if nodes.windows(2).any(|w| !(w[1] > w[0])) || !nodes.iter().all(|x| x.is_finite()) {
            return Err(Error::InvalidSamples("nodes must be finite and strictly increasing".into()));
        }
        if !values.iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidSamples("values must be finite".into()));
        }
        if tail == SampledTail::Zero && *values.last().expect("non-empty") != 0.0 {
            return Err(Error::InvalidSamples("a zero tail needs a zero last value".into()));
        }
        Ok(Self { nodes, values, tail })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn tail(&self) -> SampledTail {
        self.tail
    }

    fn segment(&self, r: f64) -> usize {
        // index i with nodes[i] <= r < nodes[i+1]
        let i = self.nodes.partition_point(|&x| x <= r);
        i.saturating_sub(1).min(self.nodes.len() - 2)
    }

    pub fn value_at(&self, r: f64) -> f64 {
        let last = self.nodes.len() - 1;
        if r >= self.nodes[last] {
            return self.values[last];
        }
        let i = self.segment(r);
        let (x0, x1) = (self.nodes[i], self.nodes[i + 1]);
        let t = (r - x0) / (x1 - x0);
        self.values[i] + t * (self.values[i + 1] - self.values[i])
    }

    pub fn slope_at(&self, r: f64) -> f64 {
        if r >= self.nodes[self.nodes.len() - 1] {
            return 0.0;
        }
        let i = self.segment(r);
        (self.values[i + 1] - self.values[i]) / (self.nodes[i + 1] - self.nodes[i])
    }

    pub fn into_profile(self) -> Profile {
        let last = *self.nodes.last().expect("non-empty");
        let last_value = *self.values.last().expect("non-empty");
        let breaks = self.nodes[1..].to_vec();
        let s = Arc::new(self);
        let s2 = Arc::clone(&s);
        Profile::analytic(move |r| s.value_at(r), move |r| s2.slope_at(r))
            .with_kind(ProfileKind::Sampled)
            .with_flat(last, last_value)
            .with_breaks(breaks)
    }

    /// Reads `r,value[,slope]` rows; the slope column, if present, is ignored
    /// since it is implied by the values.
    pub fn read_csv<R: Read>(reader: R, tail: SampledTail) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(reader);
        let headers = rdr.headers()?.clone();
        let col = |name: &str| {
            headers
                .iter()
                .position(|h| h.trim() == name)
                .ok_or_else(|| Error::InvalidSamples(format!("missing column `{name}`")))
        };
        let (ir, iv) = (col("r")?, col("value")?);
        let mut nodes = Vec::new();
        let mut values = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            let parse = |i: usize| -> Result<f64> {
                rec.get(i)
                    .unwrap_or("")
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| Error::InvalidSamples(format!("bad number: {e}")))
            };
            nodes.push(parse(ir)?);
            values.push(parse(iv)?);
        }
        Self::new(nodes, values, tail)
    }
}

impl From<SampledProfile> for Profile {
    fn from(s: SampledProfile) -> Self {
        s.into_profile()
    }
}

/// `[0, first, first*ratio, ..., upper]`.
pub fn geometric_grid(upper: f64, ratio: f64, first: f64) -> Vec<f64> {
    let mut nodes = vec![0.0];
    if !(upper > 0.0) {
        return nodes;
    }
    let mut x = first.min(upper);
    while x < upper * (1.0 - 1e-12) {
        nodes.push(x);
        x *= ratio;
    }
    nodes.push(upper);
    nodes
}

/// Default sampling grid: ratio 1.05 starting at `1e-4`.
pub fn default_grid(upper: f64) -> Vec<f64> {
    geometric_grid(upper, 1.05, 1e-4)
}

/// Piecewise-linear hat: `height` at the origin, 0 from `radius` on.
pub fn hat(height: f64, radius: f64) -> Result<Profile> {
    if !(radius > 0.0) {
        return Err(Error::Domain(format!("hat radius must be positive, got {radius}")));
    }
    Ok(SampledProfile::new(vec![0.0, radius], vec![height, 0.0], SampledTail::Zero)?.into_profile())
}

fn smooth_step_kernel(t: f64) -> f64 {
    if t > 0.0 {
        (-1.0 / t).exp()
    } else {
        0.0
    }
}

fn smooth_step_kernel_prime(t: f64) -> f64 {
    if t > 0.0 {
        (-1.0 / t).exp() / (t * t)
    } else {
        0.0
    }
}

/// The bump `Psi(s)`: 1 for `s <= 1/2`, 0 for `s >= 1`, and `C^inf` between.
fn psi(s: f64) -> f64 {
    if s <= 0.5 {
        return 1.0;
    }
    if s >= 1.0 {
        return 0.0;
    }
    let a = smooth_step_kernel(2.0 - 2.0 * s);
    let b = smooth_step_kernel(2.0 * s - 1.0);
    a / (a + b)
}

fn psi_prime(s: f64) -> f64 {
    if s <= 0.5 || s >= 1.0 {
        return 0.0;
    }
    let a = smooth_step_kernel(2.0 - 2.0 * s);
    let b = smooth_step_kernel(2.0 * s - 1.0);
    let da = -2.0 * smooth_step_kernel_prime(2.0 - 2.0 * s);
    let db = 2.0 * smooth_step_kernel_prime(2.0 * s - 1.0);
    (da * b - a * db) / ((a + b) * (a + b))
}

/// Smooth radial cutoff `Psi_r(rho) = Psi(rho / r)`.
pub fn cutoff_psi(r_scale: f64) -> Result<Profile> {
    if !(r_scale > 0.0 && r_scale.is_finite()) {
        return Err(Error::Domain(format!("cutoff scale must be positive, got {r_scale}")));
    }
    Ok(Profile::analytic(
        move |rho| psi(rho / r_scale),
        move |rho| psi_prime(rho / r_scale) / r_scale,
    )
    .with_flat(r_scale, 0.0)
    .with_breaks(vec![0.5 * r_scale]))
}

/// Radii in `[0, extent]` where `f` changes sign, located by scanning the
/// probe points and bisecting each bracket.
fn sign_changes(f: impl Fn(f64) -> f64, points: &[f64]) -> Vec<f64> {
    let mut roots = Vec::new();
    for w in points.windows(2) {
        let (mut lo, mut hi) = (w[0], w[1]);
        let (flo, fhi) = (f(lo), f(hi));
        if flo == 0.0 || flo.signum() == fhi.signum() || fhi == 0.0 {
            if fhi == 0.0 {
                roots.push(hi);
            }
            continue;
        }
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if f(mid).signum() == flo.signum() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        roots.push(0.5 * (lo + hi));
    }
    roots
}

/// `max(-lambda, min(u, lambda))`.
pub fn truncate(u: &Profile, lambda: f64) -> Result<Profile> {
    if !(lambda > 0.0) {
        return Err(Error::Domain(format!("truncation level must be positive, got {lambda}")));
    }
    let points = u.probe_points(1e6);
    let mut new_breaks = sign_changes(|r| u.value(r) - lambda, &points);
    new_breaks.extend(sign_changes(|r| u.value(r) + lambda, &points));
    let (a, a2) = (u.clone(), u.clone());
    let mut p = Profile::analytic(
        move |r| a.value(r).clamp(-lambda, lambda),
        move |r| {
            if a2.value(r).abs() > lambda {
                0.0
            } else {
                a2.slope(r)
            }
        },
    )
    .with_kind(u.kind());
    p.flat = u.flat().map(|f| Flat {
        value: f.value.clamp(-lambda, lambda),
        ..f
    });
    new_breaks.extend(u.breaks().iter().copied());
    Ok(p.with_breaks(new_breaks))
}

/// The multiplier `eta_k` together with `k* = (1 - k^{-1/k})^{-k}`, the
/// radius where it reaches 0. For large `k`, `k*` overflows to infinity and
/// the returned profile has no flat region.
pub fn eta_k(k: u32) -> Result<(Profile, f64)> {
    if k < 2 {
        return Err(Error::Domain(format!("eta_k needs k >= 2, got {k}")));
    }
    let kf = f64::from(k);
    let inner = (-kf.ln() / kf).exp();
    let ln_k_star = -kf * (-(-kf.ln() / kf).exp_m1()).ln();
    let k_star = ln_k_star.exp();
    let value = move |rho: f64| {
        if rho <= 1.0 {
            inner
        } else {
            (-rho.ln() / kf).exp() + inner - 1.0
        }
    };
    let slope = move |rho: f64| {
        if rho < 1.0 {
            0.0
        } else {
            -(1.0 / kf) * (-(1.0 / kf + 1.0) * rho.ln()).exp()
        }
    };
    let mut p = Profile::analytic(value, slope).with_breaks(vec![1.0]);
    if k_star.is_finite() {
        p = p.with_flat(k_star, 0.0);
    }
    Ok((p, k_star))
}

fn require_boundary_zero(u: &Profile) -> Result<()> {
    let b = u.value(1.0);
    if b.abs() > BOUNDARY_TOLERANCE {
        return Err(Error::BoundaryNotZero(b));
    }
    Ok(())
}

fn require_positive_radius(r: f64) -> Result<()> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::InvalidRadius(r));
    }
    Ok(())
}

/// `v_N(rho) - v_N(r)`, cancellation-free.
fn potential_difference(geom: &Geometry, rho: f64, r: f64) -> f64 {
    geom.n() * (geom.stretched(r).ln_1p() - geom.stretched(rho).ln_1p())
}

/// Lifts a profile on the unit ball to `R^N`:
/// `u_r(rho) = u(rho / r) - v_N(rho) + v_N(r)` on `[0, r]`, 0 beyond.
pub fn lift_to_space(u: &Profile, r: f64, geom: &Geometry) -> Result<Profile> {
    require_positive_radius(r)?;
    require_boundary_zero(u)?;
    let (a, a2) = (u.clone(), u.clone());
    let (g, g2) = (geom.clone(), geom.clone());
    let breaks: Vec<f64> = u.breaks().iter().filter(|b| **b < 1.0).map(|b| b * r).collect();
    Ok(Profile::analytic(
        move |rho| a.value(rho / r) + potential_difference(&g, r, rho),
        move |rho| a2.slope(rho / r) / r + g2.g(rho),
    )
    .with_kind(u.kind())
    .with_flat(r, 0.0)
    .with_breaks(breaks))
}

/// Projects a profile on `R^N` onto the unit ball:
/// `W(rho) = u(r rho) Psi(rho) + v_N(r rho) - v_N(r)` on `[0, 1]`, 0 beyond.
pub fn project_to_ball(u: &Profile, r: f64, geom: &Geometry) -> Result<Profile> {
    require_positive_radius(r)?;
    let (a, a2) = (u.clone(), u.clone());
    let (g, g2) = (geom.clone(), geom.clone());
    let mut breaks: Vec<f64> = u.breaks().iter().map(|b| b / r).filter(|b| *b < 1.0).collect();
    breaks.push(0.5);
    Ok(Profile::analytic(
        move |rho| a.value(r * rho) * psi(rho) + potential_difference(&g, r * rho, r),
        move |rho| {
            let x = r * rho;
            r * a2.slope(x) * psi(rho) + a2.value(x) * psi_prime(rho) - r * g2.g(x)
        },
    )
    .with_kind(u.kind())
    .with_flat(1.0, 0.0)
    .with_breaks(breaks))
}

/// `W_r(rho) = N ln[(1 + r^{N/(N-1)}) / (1 + (r rho)^{N/(N-1)})]` on the unit
/// ball: the projection of the zero profile.
pub fn minimizing_family(geom: &Geometry, r: f64) -> Result<Profile> {
    require_positive_radius(r)?;
    let (g, g2) = (geom.clone(), geom.clone());
    Ok(Profile::analytic(
        move |rho| potential_difference(&g, r * rho, r),
        move |rho| -r * g2.g(r * rho),
    )
    .with_flat(1.0, 0.0))
}

/// Height `1 / (k sqrt(ln k))` of the `k`-th counterexample bump.
pub fn counterexample_height(k: u64) -> f64 {
    let kf = k as f64;
    1.0 / (kf * kf.ln().sqrt())
}

/// Partial sum over `k = 2..=K` of triangular bumps of height
/// `1 / (k sqrt(ln k))` supported on `[k - 1/2, k + 1/2]`.
pub fn counterexample_profile(big_k: u64) -> Result<Profile> {
    if big_k < 2 {
        return Err(Error::Domain(format!("need K >= 2, got {big_k}")));
    }
    let bump = move |rho: f64| -> Option<(u64, f64)> {
        let k = rho.round();
        let d = rho - k;
        if k < 2.0 || k > big_k as f64 || d.abs() > 0.5 {
            None
        } else {
            Some((k as u64, d))
        }
    };
    let breaks: Vec<f64> = (2..=big_k)
        .flat_map(|k| {
            let kf = k as f64;
            [kf - 0.5, kf]
        })
        .collect();
    Ok(Profile::analytic(
        move |rho| bump(rho).map_or(0.0, |(k, d)| counterexample_height(k) * (1.0 - 2.0 * d.abs())),
        move |rho| {
            bump(rho).map_or(0.0, |(k, d)| {
                let h = counterexample_height(k);
                if d < 0.0 {
                    2.0 * h
                } else {
                    -2.0 * h
                }
            })
        },
    )
    .with_flat(big_k as f64 + 0.5, 0.0)
    .with_breaks(breaks))
}

/// `A * Psi_R`: a smooth bump of height `amplitude` supported in `[0, R]`.
pub fn smooth_bump(amplitude: f64, radius: f64) -> Result<Profile> {
    Ok(cutoff_psi(radius)?.scale(amplitude))
}

/// `a (v_N(rho) - v_N(R))` truncated to `[0, R]`: a rescaled member of the
/// logarithmic family, continuous and vanishing from `R` on.
pub fn log_family(geom: &Geometry, amplitude: f64, radius: f64) -> Result<Profile> {
    require_positive_radius(radius)?;
    let (g, g2) = (geom.clone(), geom.clone());
    Ok(Profile::analytic(
        move |rho| amplitude * potential_difference(&g, rho, radius),
        move |rho| -amplitude * g2.g(rho),
    )
    .with_flat(radius, 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Dimension;
    use proptest::prelude::*;

    fn geom(n: u32) -> Geometry {
        Geometry::new(Dimension::new(n).unwrap())
    }

    fn check_slope(p: &Profile, points: &[f64]) {
        for &r in points {
            let h = 1e-5 * r.max(1.0);
            let fd = (p.value(r + h) - p.value(r - h)) / (2.0 * h);
            let s = p.slope(r);
            assert!((fd - s).abs() <= 1e-6 * (1.0 + s.abs()), "r={r}: fd {fd} slope {s}");
        }
    }

    #[test]
    fn cutoff_shape() {
        let p = cutoff_psi(2.0).unwrap();
        assert_eq!(p.value(0.0), 1.0);
        assert_eq!(p.value(2.0), 0.0);
        assert_eq!(p.value(1.0), 1.0);
        assert_eq!(p.slope(1.0), 0.0);
        assert!(p.slope(1.0 - 1e-9).abs() < 1e-12 && p.slope(1.0 + 1e-9).abs() < 1e-12);
        let mid = p.value(1.5);
        assert!(mid > 0.0 && mid < 1.0);
        assert!(p.slope(1.5) < 0.0);
        assert_eq!(p.support_bound(), Some(2.0));
        check_slope(&p, &[1.1, 1.3, 1.5, 1.7, 1.9]);
        for i in 0..=100 {
            let v = p.value(0.025 * f64::from(i));
            assert!((0.0..=1.0).contains(&v));
        }
    }

    #[test]
    fn truncation() {
        let c = Profile::constant(5.0);
        let t = truncate(&c, 2.0).unwrap();
        assert_eq!(t.value(0.3), 2.0);
        assert_eq!(t.value(1e9), 2.0);

        let u = SampledProfile::new(vec![0.0, 1.0], vec![3.0, 0.0], SampledTail::Zero).unwrap().into_profile();
        let unchanged = truncate(&u, 3.5).unwrap();
        for &r in &[0.0, 0.2, 0.7, 1.0, 4.0] {
            assert_eq!(unchanged.value(r), u.value(r));
        }
        let t = truncate(&u, 1.5).unwrap();
        assert_eq!(t.value(0.0), 1.5);
        assert_eq!(t.value(0.4), 1.5);
        assert_eq!(t.slope(0.4), 0.0);
        assert!((t.value(0.75) - 0.75).abs() < 1e-15);
        assert_eq!(t.slope(0.75), -3.0);
        assert!(t.breaks().iter().any(|b| (b - 0.5).abs() < 1e-12), "{:?}", t.breaks());
        assert!(truncate(&u, 0.0).is_err());
    }

    #[test]
    fn eta_pieces() {
        for k in 2..=12 {
            let (p, ks) = eta_k(k).unwrap();
            let kf = f64::from(k);
            let inner = kf.powf(-1.0 / kf);
            assert!((p.value(1.0) - inner).abs() < 1e-15);
            let outer_at_one = 1f64.powf(-1.0 / kf) + inner - 1.0;
            assert!((outer_at_one - inner).abs() < 1e-15);
            assert!((ks - (1.0 - inner).powf(-kf)).abs() <= 1e-12 * ks);
            assert!(((-ks.ln() / kf).exp() + inner - 1.0).abs() < 1e-12);
            assert_eq!(p.value(ks * 1.01), 0.0);
        }
        let (p, ks) = eta_k(4).unwrap();
        let closed = (1.0 - 4f64.powf(-0.25)).powi(-4);
        assert!((ks / closed - 1.0).abs() < 1e-13);
        let just_inside = ((-ks.ln() / 4.0).exp() + 4f64.powf(-0.25) - 1.0).abs();
        assert!(just_inside < 1e-12);
        check_slope(&p, &[1.5, 3.0, 20.0, 100.0]);
        assert!(eta_k(1).is_err());
    }

    #[test]
    fn eta_is_non_increasing() {
        let (p, ks) = eta_k(5).unwrap();
        let mut prev = p.value(1.0);
        let mut r = 1.0;
        while r < ks * 1.1 {
            let v = p.value(r);
            assert!(v <= prev + 1e-15);
            prev = v;
            r *= 1.1;
        }
    }

    #[test]
    fn eta_approaches_one() {
        let values: Vec<f64> = (2..=200).map(|k| eta_k(k).unwrap().0.value(10.0)).collect();
        assert!(values.windows(2).all(|w| w[1] >= w[0]));
        let k0 = values.iter().position(|&v| v >= 0.9).unwrap();
        assert!(values[k0..].iter().all(|&v| v >= 0.9));
        let (huge, ks) = eta_k(400).unwrap();
        assert!(ks.is_infinite());
        assert!(huge.flat().is_none());
        assert!(huge.value(1e300) > 0.0);
    }

    #[test]
    fn lift_examples() {
        let g = geom(2);
        let zero = Profile::zero();
        let lifted = lift_to_space(&zero, 3.0, &g).unwrap();
        assert!((lifted.value(0.0) + 2.0 * 10f64.ln()).abs() < 1e-14);
        assert_eq!(lifted.value(3.0), 0.0);
        assert!(lifted.value(3.0 - 1e-12).abs() < 1e-10);
        for &rho in &[0.5_f64, 1.0, 2.9] {
            let expect = -2.0 * ((1.0 + 9.0) / (1.0 + rho * rho)).ln();
            assert!((lifted.value(rho) - expect).abs() < 1e-14);
        }
        check_slope(&lifted, &[0.3, 1.0, 2.0]);
        let bad = Profile::constant(1.0);
        assert!(matches!(lift_to_space(&bad, 3.0, &g), Err(Error::BoundaryNotZero(_))));
    }

    #[test]
    fn projection_examples() {
        let g = geom(2);
        let w = project_to_ball(&Profile::zero(), 3.0, &g).unwrap();
        assert!((w.value(0.0) - 4.605170185988091).abs() < 1e-13);
        assert_eq!(w.value(1.0), 0.0);
        let fam = minimizing_family(&g, 3.0).unwrap();
        for &rho in &[0.0, 0.1, 0.5, 0.9, 1.0] {
            assert!((fam.value(rho) - w.value(rho)).abs() < 1e-14);
            let expect = 2.0 * (10.0 / (1.0 + 9.0 * rho * rho)).ln();
            assert!((fam.value(rho) - expect).abs() < 1e-13);
        }
        check_slope(&fam, &[0.1, 0.4, 0.8]);
        check_slope(&w, &[0.1, 0.4, 0.6, 0.8]);
        let bump = smooth_bump(1.3, 1.5).unwrap();
        for r in [5.0, 17.0] {
            let p = project_to_ball(&bump, r, &geom(3)).unwrap();
            assert!(p.value(1.0).abs() < 1e-15);
            check_slope(&p, &[0.01, 0.05, 0.3, 0.7]);
        }
    }

    #[test]
    fn lift_then_project_recovers_inner_part() {
        let g = geom(3);
        let u = smooth_bump(0.8, 0.5).unwrap();
        let r = 7.0;
        let round_trip = project_to_ball(&lift_to_space(&u, r, &g).unwrap(), r, &g).unwrap();
        for i in 0..=50 {
            let rho = 0.01 * f64::from(i);
            assert!((round_trip.value(rho) - u.value(rho)).abs() < 1e-12, "rho={rho}");
        }
    }

    #[test]
    fn counterexample_shape() {
        let p = counterexample_profile(50).unwrap();
        for k in 2..=50u64 {
            let kf = k as f64;
            let h = 1.0 / (kf * kf.ln().sqrt());
            assert!((p.value(kf) - h).abs() < 1e-15);
            assert!((p.slope(kf - 0.25) - 2.0 * h).abs() < 1e-15);
            assert!((p.slope(kf + 0.25) + 2.0 * h).abs() < 1e-15);
        }
        // bumps touch at half-integers
        assert!(p.value(10.5).abs() < 1e-15);
        assert!((p.value(10.75) - 0.5 * counterexample_height(11)).abs() < 1e-15);
        assert_eq!(p.value(50.75), 0.0);
        assert_eq!(p.value(1.0), 0.0);
        assert_eq!(p.support_bound(), Some(50.5));
    }

    #[test]
    fn algebra_and_slopes() {
        let g = geom(3);
        let a = smooth_bump(1.0, 2.0).unwrap();
        let b = log_family(&g, 0.3, 4.0).unwrap();
        let h = hat(2.0, 3.0).unwrap();
        let sum = a.add(&b).add(&h.scale(-0.5));
        check_slope(&sum, &[0.2, 0.9, 1.4, 2.5, 3.5]);
        let prod = a.mul(&b).mul(&h);
        check_slope(&prod, &[0.2, 0.9, 1.4, 1.8]);
        assert_eq!(prod.kind(), ProfileKind::Sampled);
        assert_eq!(a.mul(&b).kind(), ProfileKind::Analytic);
        assert_eq!(sum.support_bound(), Some(4.0));
        let shifted = sum.shift(2.5);
        assert_eq!(shifted.value(10.0), 2.5);
        assert_eq!(shifted.support_bound(), None);
        let d = b.dilate(2.0).unwrap();
        assert!((d.value(1.0) - b.value(2.0)).abs() < 1e-15);
        assert_eq!(d.support_bound(), Some(2.0));
        check_slope(&d, &[0.3, 1.0, 1.7]);
    }

    #[test]
    fn sampled_validation() {
        assert!(SampledProfile::new(vec![0.0], vec![1.0], SampledTail::Constant).is_err());
        assert!(SampledProfile::new(vec![0.1, 1.0], vec![1.0, 0.0], SampledTail::Zero).is_err());
        assert!(SampledProfile::new(vec![0.0, 1.0, 1.0], vec![1.0, 0.0, 0.0], SampledTail::Zero).is_err());
        assert!(SampledProfile::new(vec![0.0, 1.0], vec![1.0, 0.5], SampledTail::Zero).is_err());
        let s = SampledProfile::new(vec![0.0, 1.0], vec![1.0, 0.5], SampledTail::Constant).unwrap();
        let p = s.into_profile();
        assert_eq!(p.value(7.0), 0.5);
        assert_eq!(p.slope(0.5), -0.5);
    }

    #[test]
    fn csv_round_trip() {
        let p = SampledProfile::new(vec![0.0, 0.5, 2.0], vec![1.0, 2.0, 0.0], SampledTail::Zero)
            .unwrap()
            .into_profile();
        let mut buf = Vec::new();
        p.write_csv(&[0.0, 0.5, 2.0], &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("r,value,slope\n"));
        let back = SampledProfile::read_csv(buf.as_slice(), SampledTail::Zero).unwrap().into_profile();
        for &r in &[0.0, 0.25, 0.5, 1.2, 2.0, 3.0] {
            assert_eq!(back.value(r), p.value(r));
        }
    }

    #[test]
    fn grids() {
        let g = default_grid(1.0);
        assert_eq!(g[0], 0.0);
        assert_eq!(g[1], 1e-4);
        assert_eq!(*g.last().unwrap(), 1.0);
        assert!(g.windows(2).all(|w| w[1] > w[0]));
        assert!(g.windows(2).skip(1).all(|w| w[1] / w[0] <= 1.05 + 1e-12));
    }

    proptest! {
        #[test]
        fn truncate_is_idempotent(vals in prop::collection::vec(-5.0..5.0f64, 2..8), lambda in 0.1..4.0f64) {
            let nodes: Vec<f64> = (0..vals.len()).map(|i| i as f64 * 0.7).collect();
            let mut vals = vals;
            *vals.last_mut().unwrap() = 0.0;
            let u = SampledProfile::new(nodes, vals, SampledTail::Zero).unwrap().into_profile();
            let once = truncate(&u, lambda).unwrap();
            let twice = truncate(&once, lambda).unwrap();
            for i in 0..=100 {
                let r = 0.05 * f64::from(i);
                prop_assert_eq!(once.value(r), twice.value(r));
            }
        }

        #[test]
        fn sampled_slope_matches_values(vals in prop::collection::vec(-5.0..5.0f64, 3..8)) {
            let nodes: Vec<f64> = (0..vals.len()).map(|i| (i as f64).powf(1.3)).collect();
            let p = SampledProfile::new(nodes.clone(), vals, SampledTail::Constant).unwrap().into_profile();
            for w in nodes.windows(2) {
                let mid = 0.5 * (w[0] + w[1]);
                let fd = (p.value(mid + 1e-6) - p.value(mid - 1e-6)) / 2e-6;
                prop_assert!((fd - p.slope(mid)).abs() < 1e-6 * (1.0 + fd.abs()));
            }
        }
    }
}
