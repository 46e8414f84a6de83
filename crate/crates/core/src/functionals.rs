//! The weighted norm, the Onofri functional `I`, the Carleson-Chang
//! functional `J` and the integral asymptotics of `v_N`, for radial profiles.
//!
//! Beyond the flat radius of a profile every integral is taken in closed
//! form: the remainder `H_N` vanishes there, and the `mu_N`-integrals of `c`
//! and `e^c` are `c` and `e^c` times the tail measure.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{Geometry, GeometryConstants};
use crate::profile::{Profile, BOUNDARY_TOLERANCE};
use crate::quadrature::{integrate, integrate_profile_break_aware, IntegralResult, QuadratureConfig};
use crate::remainder::remainder_scalar;

/// Largest admissible `sup |u|`.
pub const MAGNITUDE_CAP: f64 = 50.0;

/// How far out the magnitude of a profile without a flat region is probed.
const PROBE_RADIUS: f64 = 1e6;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NamedIntegral {
    pub name: &'static str,
    #[serde(flatten)]
    pub result: IntegralResult,
}

impl NamedIntegral {
    fn new(name: &'static str, result: IntegralResult) -> Self {
        Self { name, result }
    }
}

/// The three parts of `||u||_{mu_N}`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NormBreakdown {
    /// `int |u| dmu_N`
    pub weighted_l1: f64,
    /// `||grad u||_N`
    pub grad_n: f64,
    /// `(int |grad u|^2 |grad v_N|^{N-2} dx)^{1/2}`
    pub mixed: f64,
    pub total: f64,
    pub weighted_l1_converged: bool,
    pub grad_n_converged: bool,
    pub mixed_converged: bool,
    pub membership_failed: bool,
    pub diagnostics: Vec<NamedIntegral>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FunctionalKind {
    Onofri,
    CarlesonChang,
}

#[derive(Clone, Debug, Serialize)]
pub struct FunctionalReport {
    pub kind: FunctionalKind,
    pub dirichlet_term: f64,
    pub mean_term: f64,
    pub log_term: f64,
    pub value: f64,
    /// `J + H_{N-1}` for the Carleson-Chang functional.
    pub margin: Option<f64>,
    /// Sum of the quadrature error estimates, propagated to `value`.
    pub error_estimate: f64,
    pub quadrature_diagnostics: Vec<NamedIntegral>,
    /// Convergence flags of the norm components (`I` only).
    pub membership: Option<MembershipFlags>,
    pub geometry: GeometryConstants,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct MembershipFlags {
    pub weighted_l1_converged: bool,
    pub grad_n_converged: bool,
    pub mixed_converged: bool,
    pub membership_failed: bool,
}

fn check_magnitude(u: &Profile) -> Result<()> {
    let found = u.sup_abs_estimate(PROBE_RADIUS);
    if !(found <= MAGNITUDE_CAP) {
        return Err(Error::ProfileTooLarge {
            found,
            cap: MAGNITUDE_CAP,
        });
    }
    Ok(())
}

/// Radius where quadrature stops (`None`: integrate to infinity) and the
/// constant value taken from there on.
fn split(u: &Profile) -> (Option<f64>, f64) {
    match u.flat() {
        Some(f) => (Some(f.radius), f.value),
        None => (None, 0.0),
    }
}

fn tail_beyond(geom: &Geometry, radius: Option<f64>) -> f64 {
    radius.map_or(0.0, |r| geom.tail_measure(r))
}

pub fn w_mu_norm(geom: &Geometry, u: &Profile, cfg: &QuadratureConfig) -> Result<NormBreakdown> {
    let (end, c) = split(u);
    let n = geom.n_int();
    let l1 = integrate_profile_break_aware(geom, u, 0.0, end, |rho, v, _| v.abs() * geom.mu(rho), cfg)?
        .combine(IntegralResult::exact(c.abs() * tail_beyond(geom, end)));
    let grad = integrate_profile_break_aware(geom, u, 0.0, end, |_, _, s| s.abs().powi(n), cfg)?;
    let mixed = integrate_profile_break_aware(
        geom,
        u,
        0.0,
        end,
        |rho, _, s| {
            if s == 0.0 {
                0.0
            } else {
                s * s * geom.g(rho).powi(n - 2)
            }
        },
        cfg,
    )?;
    let weighted_l1 = l1.value;
    let grad_n = grad.value.max(0.0).powf(1.0 / geom.n());
    let mixed_v = mixed.value.max(0.0).sqrt();
    Ok(NormBreakdown {
        weighted_l1,
        grad_n,
        mixed: mixed_v,
        total: weighted_l1 + grad_n + mixed_v,
        weighted_l1_converged: l1.converged,
        grad_n_converged: grad.converged,
        mixed_converged: mixed.converged,
        membership_failed: !(l1.converged && grad.converged && mixed.converged),
        diagnostics: vec![
            NamedIntegral::new("weighted_l1", l1),
            NamedIntegral::new("grad_n_pow_n", grad),
            NamedIntegral::new("mixed_squared", mixed),
        ],
    })
}

/// `int_{R^N} H_N(u, mu_N) dx` with `H_N = R_N(grad v_N, grad u)`.
pub fn h_integral(geom: &Geometry, u: &Profile, cfg: &QuadratureConfig) -> Result<IntegralResult> {
    let (end, _) = split(u);
    let n = geom.n_int();
    integrate_profile_break_aware(
        geom,
        u,
        0.0,
        end,
        |rho, _, s| {
            if s == 0.0 {
                0.0
            } else {
                remainder_scalar(n, -geom.g(rho), s)
            }
        },
        cfg,
    )
}

/// `I(u) = (1/w~_N) int H_N + int u dmu_N - ln int e^u dmu_N`.
pub fn onofri_i(geom: &Geometry, u: &Profile, cfg: &QuadratureConfig) -> Result<FunctionalReport> {
    check_magnitude(u)?;
    let consts = geom.constants();
    let (end, c) = split(u);
    let tail = tail_beyond(geom, end);
    let h = h_integral(geom, u, cfg)?;
    let mean = integrate_profile_break_aware(geom, u, 0.0, end, |rho, v, _| v * geom.mu(rho), cfg)?
        .combine(IntegralResult::exact(c * tail));
    let exp = integrate_profile_break_aware(geom, u, 0.0, end, |rho, v, _| v.exp() * geom.mu(rho), cfg)?
        .combine(IntegralResult::exact(c.exp() * tail));
    if !exp.converged || !exp.value.is_finite() || !(exp.value > 0.0) {
        return Err(Error::Divergent(format!(
            "exponential integral {} (error estimate {})",
            exp.value, exp.error_estimate
        )));
    }
    let norm = w_mu_norm(geom, u, cfg)?;
    let dirichlet_term = h.value / consts.omega_tilde;
    let log_term = exp.value.ln();
    let error_estimate = h.error_estimate / consts.omega_tilde + mean.error_estimate + exp.error_estimate / exp.value;
    Ok(FunctionalReport {
        kind: FunctionalKind::Onofri,
        dirichlet_term,
        mean_term: mean.value,
        log_term,
        value: dirichlet_term + mean.value - log_term,
        margin: None,
        error_estimate,
        quadrature_diagnostics: vec![
            NamedIntegral::new("h_integral", h),
            NamedIntegral::new("mean", mean),
            NamedIntegral::new("exp_mean", exp),
        ],
        membership: Some(MembershipFlags {
            weighted_l1_converged: norm.weighted_l1_converged,
            grad_n_converged: norm.grad_n_converged,
            mixed_converged: norm.mixed_converged,
            membership_failed: norm.membership_failed,
        }),
        geometry: consts.clone(),
    })
}

/// `J(u) = (1/w~_N) int_{B_1} |grad u|^N - ln((1/V_N) int_{B_1} e^u)` for
/// `u` vanishing on the unit sphere. Only values on `[0, 1]` are used.
pub fn cc_j(geom: &Geometry, u: &Profile, cfg: &QuadratureConfig) -> Result<FunctionalReport> {
    let boundary = u.value(1.0);
    if boundary.abs() > BOUNDARY_TOLERANCE {
        return Err(Error::BoundaryNotZero(boundary));
    }
    check_magnitude(u)?;
    let consts = geom.constants();
    let n = geom.n_int();
    let grad = integrate_profile_break_aware(geom, u, 0.0, Some(1.0), |_, _, s| s.abs().powi(n), cfg)?;
    let exp = integrate_profile_break_aware(geom, u, 0.0, Some(1.0), |_, v, _| v.exp(), cfg)?;
    let dirichlet_term = grad.value / consts.omega_tilde;
    let average = exp.value / consts.ball_volume;
    let log_term = average.ln();
    let value = dirichlet_term - log_term;
    Ok(FunctionalReport {
        kind: FunctionalKind::CarlesonChang,
        dirichlet_term,
        mean_term: 0.0,
        log_term,
        value,
        margin: Some(value + geom.harmonic()),
        error_estimate: grad.error_estimate / consts.omega_tilde + exp.error_estimate / exp.value,
        quadrature_diagnostics: vec![NamedIntegral::new("grad_n_pow_n", grad), NamedIntegral::new("exp_integral", exp)],
        membership: None,
        geometry: consts.clone(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DirichletAsymptotic {
    pub r: f64,
    /// `(1/w~_N) int_{B_r} |grad v_N|^N = int_0^T t^{N-1}/(1+t)^N dt`
    pub numeric: f64,
    /// `(N/(N-1)) ln r - H_{N-1}`
    pub asymptote: f64,
    /// `numeric - asymptote`, evaluated without cancellation as
    /// `ln(1 + 1/T) + int_{ln(1+T)}^inf [1 - (1 - e^{-s})^{N-1}] ds`.
    pub gap: f64,
    /// `numeric - asymptote - gap`; zero up to quadrature error.
    pub consistency: f64,
    pub diagnostics: Vec<NamedIntegral>,
}

pub fn gradv_dirichlet_asymptotic(geom: &Geometry, r: f64, cfg: &QuadratureConfig) -> Result<DirichletAsymptotic> {
    if !(r > 1.0 && r.is_finite()) {
        return Err(Error::Domain(format!("need r > 1, got {r}")));
    }
    let n = geom.n();
    let t_max = geom.stretched(r);
    let numeric = crate::quadrature::integrate_with_breaks(
        |t: f64| {
            if t == 0.0 {
                return 0.0;
            }
            // (t/(1+t))^{N-1} / (1+t)
            ((n - 1.0) * (-1.0 / (1.0 + t)).ln_1p() - t.ln_1p()).exp()
        },
        0.0,
        t_max,
        &[1.0],
        cfg,
    )?;
    let tail = integrate(
        |s: f64| -((n - 1.0) * (-(-s).exp()).ln_1p()).exp_m1(),
        t_max.ln_1p(),
        f64::INFINITY,
        cfg,
    )?;
    let asymptote = n / (n - 1.0) * r.ln() - geom.harmonic();
    let gap = (1.0 / t_max).ln_1p() + tail.value;
    Ok(DirichletAsymptotic {
        r,
        numeric: numeric.value,
        asymptote,
        gap,
        consistency: numeric.value - asymptote - gap,
        diagnostics: vec![NamedIntegral::new("numeric", numeric), NamedIntegral::new("gap_tail", tail)],
    })
}

/// `N^2 int_0^inf rho^{N-1} ln(1 + rho^{N/(N-1)}) (1 + rho^{N/(N-1)})^{-N} drho`,
/// which equals `N H_{N-1}`.
pub fn log_weight_integral(geom: &Geometry, cfg: &QuadratureConfig) -> Result<IntegralResult> {
    let n = geom.n();
    let ni = geom.n_int();
    let res = crate::quadrature::integrate_with_breaks(
        |rho: f64| {
            if rho == 0.0 {
                return 0.0;
            }
            let t = geom.stretched(rho);
            rho.powi(ni - 1) * t.ln_1p() * (-n * t.ln_1p()).exp()
        },
        0.0,
        f64::INFINITY,
        &[1.0],
        cfg,
    )?;
    Ok(res.scaled(n * n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Dimension;
    use crate::identities::minimizing_family_gap;
    use crate::profile::{hat, lift_to_space, minimizing_family, smooth_bump};
    use std::f64::consts::PI;

    fn geom(n: u32) -> Geometry {
        Geometry::new(Dimension::new(n).unwrap())
    }

    fn tight() -> QuadratureConfig {
        QuadratureConfig::with_tolerance(1e-12, 1e-12)
    }

    #[test]
    fn norm_examples() {
        let g = geom(3);
        let z = w_mu_norm(&g, &Profile::zero(), &tight()).unwrap();
        assert_eq!((z.weighted_l1, z.grad_n, z.mixed, z.total), (0.0, 0.0, 0.0, 0.0));
        let one = w_mu_norm(&g, &Profile::constant(1.0), &tight()).unwrap();
        assert!((one.weighted_l1 - 1.0).abs() < 1e-12);
        assert_eq!((one.grad_n, one.mixed), (0.0, 0.0));
        assert!(!one.membership_failed);
        let h = hat(1.0, 2.0).unwrap();
        let b = w_mu_norm(&g, &h, &tight()).unwrap();
        assert!((b.total - (b.weighted_l1 + b.grad_n + b.mixed)).abs() < 1e-15);
        // |slope| = 1/2 on the ball of radius 2
        let expect = (4.0 * PI * 0.125 * 8.0 / 3.0).powf(1.0 / 3.0);
        assert!((b.grad_n - expect).abs() < 1e-10);
    }

    #[test]
    fn h_integral_examples() {
        let g = geom(2);
        assert_eq!(h_integral(&g, &Profile::constant(2.0), &tight()).unwrap().value, 0.0);
        // planar case: H_2 = |grad u|^2; the hat has slope -1 on [0, 1]
        let h = h_integral(&g, &hat(1.0, 1.0).unwrap(), &tight()).unwrap();
        assert!((h.value / PI - 1.0).abs() < 1e-10);
        let lifted = lift_to_space(&Profile::zero(), 3.0, &g).unwrap();
        let v = h_integral(&g, &lifted, &tight()).unwrap().value;
        let expect = 16.0 * PI * (10f64.ln() - 0.9);
        assert!((v - expect).abs() < 1e-9 * expect, "{v} vs {expect}");
    }

    #[test]
    fn onofri_examples() {
        for n in 2..=4 {
            let g = geom(n);
            let zero = onofri_i(&g, &Profile::zero(), &tight()).unwrap();
            assert_eq!(zero.value, 0.0);
            let c = onofri_i(&g, &Profile::constant(3.7), &tight()).unwrap();
            assert!(c.value.abs() < 1e-9, "n={n} {}", c.value);
        }
        let g = geom(2);
        let h = onofri_i(&g, &hat(1.0, 1.0).unwrap(), &tight()).unwrap();
        assert!(h.value > 0.0);
        assert!((h.value - (h.dirichlet_term + h.mean_term - h.log_term)).abs() < 1e-15);
        let too_big = Profile::constant(60.0);
        assert!(matches!(onofri_i(&g, &too_big, &tight()), Err(Error::ProfileTooLarge { .. })));
    }

    #[test]
    fn lifted_zero_approaches_limit() {
        let g = geom(2);
        let r: f64 = 1e3;
        let t = r * r;
        let rep = onofri_i(&g, &lift_to_space(&Profile::zero(), r, &g).unwrap(), &tight()).unwrap();
        // closed form 1 - 1/(1+T) + ln((1+T)/(1+2T))
        let exact = 1.0 - 1.0 / (1.0 + t) + ((1.0 + t) / (1.0 + 2.0 * t)).ln();
        assert!((rep.value - exact).abs() < 1e-8, "{} vs {exact}", rep.value);
        assert!((rep.value - (1.0 - 2f64.ln())).abs() < 5e-3);
    }

    #[test]
    fn carleson_chang_examples() {
        let g = geom(2);
        let z = cc_j(&g, &Profile::zero(), &tight()).unwrap();
        assert_eq!(z.value, 0.0);
        for &(r, expect) in &[(3.0, -0.9), (10.0, -100.0 / 101.0), (100.0, -1e4 / 10001.0)] {
            let w = minimizing_family(&g, r).unwrap();
            let j = cc_j(&g, &w, &tight()).unwrap();
            assert!((j.value - expect).abs() < 1e-9, "r={r}: {} vs {expect}", j.value);
            assert!((j.margin.unwrap() - (1.0 + expect)).abs() < 1e-9);
        }
        assert!(matches!(
            cc_j(&g, &Profile::constant(1.0), &tight()),
            Err(Error::BoundaryNotZero(_))
        ));
    }

    #[test]
    fn minimizing_family_matches_beta_tails() {
        for n in 3..=5 {
            let g = geom(n);
            for &r in &[2.0, 10.0, 100.0] {
                let j = cc_j(&g, &minimizing_family(&g, r).unwrap(), &tight()).unwrap();
                let gap = minimizing_family_gap(n, r).unwrap();
                assert!((j.margin.unwrap() - gap).abs() < 1e-9, "n={n} r={r}");
            }
        }
    }

    #[test]
    fn dilation_invariance() {
        for n in 2..=4 {
            let g = geom(n);
            let r = 3.0;
            let w = smooth_bump(1.2, r).unwrap().add(&hat(0.5, 2.0).unwrap());
            let big = w.dilate(r).unwrap();
            assert!((big.value(1.0)).abs() < 1e-15);
            let ni = g.n_int();
            let d_r = integrate_profile_break_aware(&g, &w, 0.0, Some(r), |_, _, s| s.abs().powi(ni), &tight()).unwrap();
            let d_1 = integrate_profile_break_aware(&g, &big, 0.0, Some(1.0), |_, _, s| s.abs().powi(ni), &tight()).unwrap();
            assert!((d_r.value - d_1.value).abs() < 1e-10 * d_r.value);
            let vol = g.constants().ball_volume;
            let e_r = integrate_profile_break_aware(&g, &w, 0.0, Some(r), |_, v, _| v.exp(), &tight()).unwrap();
            let e_1 = integrate_profile_break_aware(&g, &big, 0.0, Some(1.0), |_, v, _| v.exp(), &tight()).unwrap();
            let avg_r = e_r.value / (vol * r.powi(ni));
            let avg_1 = e_1.value / vol;
            assert!((avg_r - avg_1).abs() < 1e-10 * avg_1);
        }
    }

    #[test]
    fn dirichlet_asymptotic_examples() {
        let g = geom(2);
        let e = std::f64::consts::E;
        let a = gradv_dirichlet_asymptotic(&g, e, &tight()).unwrap();
        let t = e * e;
        let closed = (1.0 + t).ln() - 1.0 + 1.0 / (1.0 + t);
        assert!((a.numeric - closed).abs() < 1e-12);
        assert!((a.asymptote - 1.0).abs() < 1e-15);
        assert!((a.gap - (closed - 1.0)).abs() < 1e-12);
        let g10 = gradv_dirichlet_asymptotic(&g, 10.0, &tight()).unwrap();
        let g100 = gradv_dirichlet_asymptotic(&g, 100.0, &tight()).unwrap();
        assert!(g100.gap.abs() < g10.gap.abs());
        let g3 = gradv_dirichlet_asymptotic(&geom(3), 1e3, &tight()).unwrap();
        assert!(g3.gap.abs() < 0.01);
        assert!(g3.consistency.abs() < 1e-10);
        assert!(gradv_dirichlet_asymptotic(&g, 1.0, &tight()).is_err());
    }

    #[test]
    fn log_weight_examples() {
        for (n, expect) in [(2, 2.0), (3, 4.5), (4, 22.0 / 3.0), (5, 5.0 * 25.0 / 12.0)] {
            let v = log_weight_integral(&geom(n), &tight()).unwrap();
            assert!((v.value - expect).abs() < 1e-9, "n={n}: {}", v.value);
        }
    }

    #[test]
    fn shift_invariance_of_i() {
        let g = geom(3);
        let u = smooth_bump(1.5, 2.0).unwrap().add(&hat(-0.7, 0.8).unwrap());
        let base = onofri_i(&g, &u, &tight()).unwrap().value;
        for c in [-4.0, -0.3, 2.2] {
            let shifted = onofri_i(&g, &u.shift(c), &tight()).unwrap().value;
            assert!((shifted - base).abs() < 1e-9, "c={c}");
        }
        assert!(base > 0.0);
    }
}
