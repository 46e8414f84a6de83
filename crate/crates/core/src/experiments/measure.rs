use std::time::Instant;

use super::{dims, finish, or_default, sorted_radii, Case, Report, RunConfig};
use crate::error::Result;
use crate::functionals::{gradv_dirichlet_asymptotic, log_weight_integral};
use crate::identities::{identity_table, weighted_tail_bound, IdentityKind};
use crate::quadrature::{integrate_radial, integrate_radial_range};

pub(super) const TABLE_N_MAX: u32 = 20;

/// Total mass of `mu_N` and its tail beyond each radius, against the closed
/// forms.
pub fn cmd_verify_measure(cfg: &RunConfig) -> Result<Report> {
    let start = Instant::now();
    let geoms = dims(cfg, 2..=6)?;
    let radii = sorted_radii(&or_default(&cfg.r_list, &[1.0]))?;
    let mut cases = Vec::new();
    for g in &geoms {
        let n = g.dim().get();
        let total = integrate_radial(g, |rho| g.mu(rho), &cfg.quadrature)?;
        let tol = if n == 2 { 1e-9 } else { 1e-8 };
        let residual = if total.converged { (total.value - 1.0).abs() } else { f64::INFINITY };
        cases.push(
            Case::new()
                .param("check", "total_mass")
                .param("n", n)
                .value("total", total.value)
                .value("error_estimate", total.error_estimate)
                .value("converged", total.converged)
                .check(residual, tol),
        );
        for &r in &radii {
            let tail = integrate_radial_range(g, |rho| g.mu(rho), r, f64::INFINITY, &[], &cfg.quadrature)?;
            let closed = g.tail_measure(r);
            let residual = if tail.converged { (tail.value - closed).abs() } else { f64::INFINITY };
            cases.push(
                Case::new()
                    .param("check", "tail_measure")
                    .param("n", n)
                    .param("r", r)
                    .value("quadrature", tail.value)
                    .value("closed_form", closed)
                    .value("error_estimate", tail.error_estimate)
                    .check(residual, 1e-9),
            );
        }
    }
    finish(cfg, start, &geoms, cases)
}

/// Exact identity table for `n <= 20`, the log-weight integral against
/// `N H_{N-1}` and the Dirichlet asymptotics of `v_N` against their tail
/// bound.
pub fn cmd_identities(cfg: &RunConfig) -> Result<Report> {
    let start = Instant::now();
    let mut cases = Vec::new();
    for rec in identity_table(TABLE_N_MAX)? {
        let kind = match rec.kind {
            IdentityKind::Induction => "induction",
            IdentityKind::HarmonicClosure => "harmonic_closure",
        };
        cases.push(
            Case::new()
                .param("check", kind)
                .param("n", rec.n)
                .param("k", rec.k)
                .value("exact_value", rec.exact_value.to_string())
                .value("claimed", rec.claimed.to_string())
                .holds(rec.matches),
        );
    }
    let geoms = dims(cfg, 2..=4)?;
    let radii = sorted_radii(&or_default(&cfg.r_list, &[1e3]))?;
    for g in &geoms {
        let n = g.dim().get();
        let expect = g.n() * g.harmonic();
        let lw = log_weight_integral(g, &cfg.quadrature)?;
        let tol = if n == 2 { 1e-9 } else { 1e-8 };
        cases.push(
            Case::new()
                .param("check", "log_weight_integral")
                .param("n", n)
                .value("quadrature", lw.value)
                .value("expected", expect)
                .value("error_estimate", lw.error_estimate)
                .check((lw.value - expect).abs(), tol),
        );
        for &r in &radii {
            let a = gradv_dirichlet_asymptotic(g, r, &cfg.quadrature)?;
            let t = g.stretched(r);
            let prediction = 1.0 / t + weighted_tail_bound(n, t)?;
            cases.push(
                Case::new()
                    .param("check", "dirichlet_asymptotic")
                    .param("n", n)
                    .param("r", r)
                    .value("numeric", a.numeric)
                    .value("asymptote", a.asymptote)
                    .value("gap", a.gap)
                    .value("consistency", a.consistency)
                    .value("prediction", prediction)
                    .check(a.gap.abs(), prediction),
            );
        }
    }
    finish(cfg, start, &geoms, cases)
}
