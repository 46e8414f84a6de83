//! Adaptive one-dimensional quadrature.
//!
//! A global adaptive scheme built on the 10-point Gauss / 21-point Kronrod
//! pair: the interval with the largest error estimate is bisected until the
//! summed estimate meets the tolerance or the subdivision budget runs out.
//! Integrals over `[a, inf)` are mapped onto `[0, 1)` with
//! `rho = a + t / (1 - t)`, and finite segments spanning many decades are
//! integrated in `ln rho`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Geometry;
use crate::profile::Profile;

/// Kronrod abscissae on `[0, 1]`; odd indices are the Gauss nodes.
const XGK: [f64; 11] = [
    0.995_657_163_025_808_1,
    0.973_906_528_517_171_7,
    0.930_157_491_355_708_2,
    0.865_063_366_688_984_5,
    0.780_817_726_586_416_9,
    0.679_409_568_299_024_4,
    0.562_757_134_668_604_7,
    0.433_395_394_129_247_2,
    0.294_392_862_701_460_2,
    0.148_874_338_981_631_22,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874,
    0.032_558_162_307_964_725,
    0.054_755_896_574_351_995,
    0.075_039_674_810_919_96,
    0.093_125_454_583_697_6,
    0.109_387_158_802_297_64,
    0.123_491_976_262_065_84,
    0.134_709_217_311_473_34,
    0.142_775_938_577_060_09,
    0.147_739_104_901_338_49,
    0.149_445_554_002_916_9,
];

const WG: [f64; 5] = [
    0.066_671_344_308_688_14,
    0.149_451_349_150_580_6,
    0.219_086_362_515_982_04,
    0.269_266_719_309_996_35,
    0.295_524_224_714_752_87,
];

/// Segments with `b / a` above this ratio are integrated in `ln rho`.
const LOG_MAP_RATIO: f64 = 1e3;

/// How `[a, inf)` is brought onto a finite interval.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InfiniteTransform {
    /// `t = (rho - a) / (1 + rho - a)`.
    Rational,
    /// Integrate `[a, split]` directly and `[split, inf)` rationally.
    SplitAt(f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
    pub infinite_transform: InfiniteTransform,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            rel_tol: 1e-10,
            max_subdivisions: 2000,
            infinite_transform: InfiniteTransform::Rational,
        }
    }
}

impl QuadratureConfig {
    pub fn with_tolerance(abs_tol: f64, rel_tol: f64) -> Self {
        Self {
            abs_tol,
            rel_tol,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0 && self.rel_tol > 0.0) {
            return Err(Error::Config(format!(
                "tolerances must be positive (abs {}, rel {})",
                self.abs_tol, self.rel_tol
            )));
        }
        if self.max_subdivisions == 0 {
            return Err(Error::Config("max_subdivisions must be >= 1".into()));
        }
        if let InfiniteTransform::SplitAt(s) = self.infinite_transform {
            if !(s.is_finite() && s > 0.0) {
                return Err(Error::Config(format!("split point must be positive, got {s}")));
            }
        }
        Ok(())
    }

    fn tolerance_for(&self, value: f64) -> f64 {
        self.abs_tol.max(self.rel_tol * value.abs())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegralResult {
    pub value: f64,
    pub error_estimate: f64,
    pub subdivisions_used: usize,
    pub converged: bool,
}

impl IntegralResult {
    pub fn zero() -> Self {
        Self {
            value: 0.0,
            error_estimate: 0.0,
            subdivisions_used: 0,
            converged: true,
        }
    }

    /// A known closed-form contribution with no quadrature error.
    pub fn exact(value: f64) -> Self {
        Self {
            value,
            ..Self::zero()
        }
    }

    /// Sum of two independent estimates.
    pub fn combine(self, other: Self) -> Self {
        Self {
            value: self.value + other.value,
            error_estimate: self.error_estimate + other.error_estimate,
            subdivisions_used: self.subdivisions_used + other.subdivisions_used,
            converged: self.converged && other.converged,
        }
    }

    pub fn scaled(self, factor: f64) -> Self {
        Self {
            value: self.value * factor,
            error_estimate: self.error_estimate * factor.abs(),
            ..self
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Map {
    Identity,
    /// `rho = exp(x)`
    Log,
    /// `rho = offset + x / (1 - x)`, `x in [0, 1)`
    Tail { offset: f64 },
}

impl Map {
    #[inline]
    fn apply(self, x: f64) -> (f64, f64) {
        match self {
            Map::Identity => (x, 1.0),
            Map::Log => {
                let e = x.exp();
                (e, e)
            }
            Map::Tail { offset } => {
                let d = 1.0 - x;
                (offset + x / d, 1.0 / (d * d))
            }
        }
    }
}

#[derive(Clone, Copy, Debug)]
struct Piece {
    segment: usize,
    map: Map,
    lo: f64,
    hi: f64,
    value: f64,
    error: f64,
}

struct HeapEntry {
    error: f64,
    index: usize,
}

impl PartialEq for HeapEntry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for HeapEntry {}
impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.index.cmp(&self.index))
    }
}

fn rescale_error(err: f64, resabs: f64, resasc: f64) -> f64 {
    let mut err = err.abs();
    if resasc != 0.0 && err != 0.0 {
        let scale = (200.0 * err / resasc).powf(1.5);
        err = if scale < 1.0 { resasc * scale } else { resasc };
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * resabs);
    }
    err
}

/// One 21-point Kronrod evaluation of `f(map(x)) * map'(x)` over `[lo, hi]`.
fn kronrod21<F: Fn(f64) -> f64>(f: &F, map: Map, lo: f64, hi: f64) -> Result<(f64, f64)> {
    let eval = |x: f64| -> Result<f64> {
        let (rho, jac) = map.apply(x);
        let y = f(rho);
        let out = if y == 0.0 { 0.0 } else { y * jac };
        if out.is_finite() {
            Ok(out)
        } else {
            Err(Error::NonFiniteIntegrand {
                location: rho,
                value: y,
            })
        }
    };
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let fc = eval(center)?;
    let mut resg = 0.0;
    let mut resk = WGK[10] * fc;
    let mut resabs = resk.abs();
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    for (j, wg) in WG.iter().enumerate() {
        let jtw = 2 * j + 1;
        let dx = half * XGK[jtw];
        let (f1, f2) = (eval(center - dx)?, eval(center + dx)?);
        fv1[jtw] = f1;
        fv2[jtw] = f2;
        resg += wg * (f1 + f2);
        resk += WGK[jtw] * (f1 + f2);
        resabs += WGK[jtw] * (f1.abs() + f2.abs());
    }
    for j in 0..5 {
        let jtwm1 = 2 * j;
        let dx = half * XGK[jtwm1];
        let (f1, f2) = (eval(center - dx)?, eval(center + dx)?);
        fv1[jtwm1] = f1;
        fv2[jtwm1] = f2;
        resk += WGK[jtwm1] * (f1 + f2);
        resabs += WGK[jtwm1] * (f1.abs() + f2.abs());
    }
    let reskh = 0.5 * resk;
    let mut resasc = WGK[10] * (fc - reskh).abs();
    for j in 0..10 {
        resasc += WGK[j] * ((fv1[j] - reskh).abs() + (fv2[j] - reskh).abs());
    }
    let scale = half.abs();
    let err = rescale_error((resk - resg) * half, resabs * scale, resasc * scale);
    Ok((resk * half, err))
}

/// The 21-point Kronrod rule on `[0, 1]` as `(nodes, weights)`.
pub(crate) fn kronrod21_unit_rule() -> ([f64; 21], [f64; 21]) {
    let mut x = [0.0; 21];
    let mut w = [0.0; 21];
    for j in 0..10 {
        x[j] = 0.5 * (1.0 - XGK[j]);
        w[j] = 0.5 * WGK[j];
        x[20 - j] = 0.5 * (1.0 + XGK[j]);
        w[20 - j] = 0.5 * WGK[j];
    }
    x[10] = 0.5;
    w[10] = 0.5 * WGK[10];
    (x, w)
}

fn is_splittable(lo: f64, hi: f64) -> bool {
    let mid = 0.5 * (lo + hi);
    (hi - lo) > 100.0 * f64::EPSILON * mid.abs().max(f64::MIN_POSITIVE) && mid > lo && mid < hi
}

/// Kahan-Babuska (Neumaier) summation.
fn neumaier_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0;
    let mut c = 0.0;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            c += (sum - t) + v;
        } else {
            c += (v - t) + sum;
        }
        sum = t;
    }
    sum + c
}

/// Global adaptive integration over a set of mapped segments.
fn adaptive<F: Fn(f64) -> f64>(
    f: &F,
    segments: &[(Map, f64, f64)],
    cfg: &QuadratureConfig,
) -> Result<IntegralResult> {
    cfg.validate()?;
    let mut pieces = Vec::with_capacity(segments.len() + 2 * cfg.max_subdivisions);
    let mut heap = BinaryHeap::new();
    for (segment, &(map, lo, hi)) in segments.iter().enumerate() {
        if !(hi > lo) {
            continue;
        }
        let (value, error) = kronrod21(f, map, lo, hi)?;
        let index = pieces.len();
        pieces.push(Piece {
            segment,
            map,
            lo,
            hi,
            value,
            error,
        });
        heap.push(HeapEntry { error, index });
    }
    let mut total: f64 = pieces.iter().map(|p| p.value).sum();
    let mut total_err: f64 = pieces.iter().map(|p| p.error).sum();
    let mut used = 0;
    while total_err > cfg.tolerance_for(total) && used < cfg.max_subdivisions {
        let Some(entry) = heap.pop() else { break };
        let p = pieces[entry.index];
        if !is_splittable(p.lo, p.hi) {
            // too narrow to bisect; leave it out of further refinement
            continue;
        }
        let mid = 0.5 * (p.lo + p.hi);
        let (v1, e1) = kronrod21(f, p.map, p.lo, mid)?;
        let (v2, e2) = kronrod21(f, p.map, mid, p.hi)?;
        used += 1;
        total += v1 + v2 - p.value;
        total_err += e1 + e2 - p.error;
        pieces[entry.index] = Piece {
            hi: mid,
            value: v1,
            error: e1,
            ..p
        };
        heap.push(HeapEntry {
            error: e1,
            index: entry.index,
        });
        let index = pieces.len();
        pieces.push(Piece {
            lo: mid,
            value: v2,
            error: e2,
            ..p
        });
        heap.push(HeapEntry { error: e2, index });
        if used % 256 == 0 {
            total_err = pieces.iter().map(|p| p.error).sum();
        }
    }
    pieces.sort_by(|a, b| a.segment.cmp(&b.segment).then(a.lo.total_cmp(&b.lo)));
    let value = neumaier_sum(pieces.iter().map(|p| p.value));
    let abs_sum: f64 = pieces.iter().map(|p| p.value.abs()).sum();
    let error_estimate =
        neumaier_sum(pieces.iter().map(|p| p.error)) + 4.0 * f64::EPSILON * abs_sum;
    Ok(IntegralResult {
        value,
        error_estimate,
        subdivisions_used: used,
        converged: error_estimate <= cfg.tolerance_for(value),
    })
}

/// Splits `[a, b]` (with `b` possibly infinite) at the given break points
/// and picks a map for each piece.
fn build_segments(a: f64, b: f64, breaks: &[f64], cfg: &QuadratureConfig) -> Vec<(Map, f64, f64)> {
    let mut points: Vec<f64> = breaks
        .iter()
        .copied()
        .filter(|&x| x > a && x < b && x.is_finite())
        .collect();
    if b.is_infinite() {
        if let InfiniteTransform::SplitAt(s) = cfg.infinite_transform {
            if s > a {
                points.push(s);
            }
        }
    }
    points.push(a);
    points.sort_by(f64::total_cmp);
    points.dedup();
    let mut segments = Vec::with_capacity(points.len() + 1);
    for w in points.windows(2) {
        segments.push(finite_segment(w[0], w[1]));
    }
    let last = *points.last().expect("at least the lower limit");
    if b.is_infinite() {
        segments.push((Map::Tail { offset: last }, 0.0, 1.0));
    } else if b > last {
        segments.push(finite_segment(last, b));
    }
    segments
}

fn finite_segment(lo: f64, hi: f64) -> (Map, f64, f64) {
    if lo > 0.0 && hi / lo > LOG_MAP_RATIO {
        (Map::Log, lo.ln(), hi.ln())
    } else {
        (Map::Identity, lo, hi)
    }
}

fn check_interval(a: f64, b: f64) -> Result<()> {
    if !a.is_finite() || b.is_nan() || b == f64::NEG_INFINITY || !(a < b) {
        return Err(Error::InvalidInterval { a, b });
    }
    Ok(())
}

/// Integrates `f` over `[a, b]`; `b` may be `f64::INFINITY`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, cfg: &QuadratureConfig) -> Result<IntegralResult> {
    integrate_with_breaks(f, a, b, &[], cfg)
}

/// Like [`integrate`], but the interval is first cut at every break point
/// (kinks, jumps in a derivative) before adaptive refinement.
pub fn integrate_with_breaks<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    breaks: &[f64],
    cfg: &QuadratureConfig,
) -> Result<IntegralResult> {
    check_interval(a, b)?;
    let segments = build_segments(a, b, breaks, cfg);
    adaptive(&f, &segments, cfg)
}

/// `int_{R^N} g(|x|) dx = omega_{N-1} int_0^inf g(rho) rho^{N-1} drho`.
pub fn integrate_radial<F: Fn(f64) -> f64>(geom: &Geometry, g: F, cfg: &QuadratureConfig) -> Result<IntegralResult> {
    integrate_radial_range(geom, g, 0.0, f64::INFINITY, &[], cfg)
}

/// Radial integral over the shell `a <= |x| <= b`.
pub fn integrate_radial_range<F: Fn(f64) -> f64>(
    geom: &Geometry,
    g: F,
    a: f64,
    b: f64,
    breaks: &[f64],
    cfg: &QuadratureConfig,
) -> Result<IntegralResult> {
    let omega = geom.constants().sphere_measure;
    let n = geom.n_int();
    let res = integrate_with_breaks(
        |rho| {
            let v = g(rho);
            if v == 0.0 {
                0.0
            } else {
                v * rho.powi(n - 1)
            }
        },
        a,
        b,
        breaks,
        cfg,
    )?;
    Ok(res.scaled(omega))
}

/// Radial integral of a quantity built pointwise from a profile:
/// `omega_{N-1} int_lo^hi h(rho, u(rho), u'(rho)) rho^{N-1} drho`, cut at
/// every kink of the profile. `hi = None` integrates to infinity.
pub fn integrate_profile_break_aware<H>(
    geom: &Geometry,
    profile: &Profile,
    lo: f64,
    hi: Option<f64>,
    integrand: H,
    cfg: &QuadratureConfig,
) -> Result<IntegralResult>
where
    H: Fn(f64, f64, f64) -> f64,
{
    let hi = hi.unwrap_or(f64::INFINITY);
    if !(hi > lo) {
        return Ok(IntegralResult::zero());
    }
    integrate_radial_range(
        geom,
        |rho| integrand(rho, profile.value(rho), profile.slope(rho)),
        lo,
        hi,
        profile.breaks(),
        cfg,
    )
}

/// Partial integrals `int_a^{R_i} f` over increasing truncation radii, used
/// to flag integrals that keep growing.
#[derive(Clone, Debug, Serialize)]
pub struct TruncationProbe {
    pub radii: Vec<f64>,
    pub partials: Vec<f64>,
    pub increments: Vec<f64>,
    /// True when every increment is positive and none falls below half of
    /// its predecessor, i.e. the partial sums show no sign of levelling off.
    pub growing: bool,
}

pub fn truncation_probe<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    radii: &[f64],
    breaks: &[f64],
    cfg: &QuadratureConfig,
) -> Result<TruncationProbe> {
    let mut partials = Vec::with_capacity(radii.len());
    let mut acc = 0.0;
    let mut prev = a;
    for &r in radii {
        if !(r > prev) {
            return Err(Error::Domain("truncation radii must be increasing".into()));
        }
        acc += integrate_with_breaks(&f, prev, r, breaks, cfg)?.value;
        partials.push(acc);
        prev = r;
    }
    let increments: Vec<f64> = partials.windows(2).map(|w| w[1] - w[0]).collect();
    let growing = !increments.is_empty()
        && increments.iter().all(|&d| d > 0.0)
        && increments.windows(2).all(|w| w[1] >= 0.5 * w[0]);
    Ok(TruncationProbe {
        radii: radii.to_vec(),
        partials,
        increments,
        growing,
    })
}
