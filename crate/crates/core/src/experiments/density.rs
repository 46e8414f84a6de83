use std::time::Instant;

use super::{decreasing, dims, finish, or_default, Case, Report, RunConfig};
use crate::error::Result;
use crate::functionals::{w_mu_norm, NormBreakdown};
use crate::geometry::Geometry;
use crate::identities::harmonic_closure;
use crate::profile::{eta_k, truncate, Profile};

/// `8 / (1 + rho^2)`: bounded, with full support. A target with unbounded
/// values would need a `ln ln`-type gradient tail, too slow to resolve in
/// double precision.
fn bounded_target() -> Profile {
    Profile::analytic(
        |r| 8.0 / (1.0 + r * r),
        |r| -16.0 * r / ((1.0 + r * r) * (1.0 + r * r)),
    )
}

fn norm_case(stage: &str, n: u32, target: &str, nb: &NormBreakdown) -> Case {
    Case::new()
        .param("stage", stage)
        .param("n", n)
        .param("target", target)
        .value("distance", nb.total)
        .value("weighted_l1", nb.weighted_l1)
        .value("grad_n", nb.grad_n)
        .value("mixed", nb.mixed)
        .value("membership_failed", nb.membership_failed)
}

fn truncation_stage(g: &Geometry, cfg: &RunConfig, cases: &mut Vec<Case>) -> Result<()> {
    let n = g.dim().get();
    let sup = 8.0;
    let bounded = bounded_target();
    let mut distances = Vec::new();
    for lambda in [1.0, 2.0, 4.0, 8.0, 16.0] {
        let d = bounded.add(&truncate(&bounded, lambda)?.scale(-1.0));
        let nb = w_mu_norm(g, &d, &cfg.quadrature)?;
        distances.push(nb.total);
        let case = norm_case("truncation", n, "bounded", &nb).param("lambda", lambda);
        // once lambda reaches sup |u| the truncation changes nothing
        cases.push(if lambda >= sup {
            case.check(nb.total, 0.0)
        } else {
            case.holds(nb.total > 0.0 && !nb.membership_failed)
        });
    }
    let positive: Vec<f64> = distances.iter().copied().filter(|&d| d > 0.0).collect();
    cases.push(
        Case::new()
            .param("stage", "truncation_trend")
            .param("n", n)
            .param("target", "bounded")
            .value("distances", &distances)
            .holds(decreasing(&positive) && distances.windows(2).all(|w| w[1] <= w[0])),
    );
    Ok(())
}

fn eta_stage(g: &Geometry, cfg: &RunConfig, cases: &mut Vec<Case>) -> Result<()> {
    let n = g.dim().get();
    let u = Profile::constant(1.0);
    let ks = or_default(&cfg.k_list, &(2..=64).collect::<Vec<u32>>());
    let mut distances = Vec::new();
    for &k in &ks {
        let (eta, k_star) = eta_k(k)?;
        let d = u.add(&u.mul(&eta).scale(-1.0));
        let nb = w_mu_norm(g, &d, &cfg.quadrature)?;
        distances.push(nb.total);
        cases.push(
            norm_case("eta", n, "one", &nb)
                .param("k", k)
                .value("k_star", k_star)
                .holds(!nb.membership_failed),
        );
    }
    cases.push(
        Case::new()
            .param("stage", "eta_trend")
            .param("n", n)
            .param("target", "one")
            .value("distances", &distances)
            .holds(decreasing(&distances)),
    );
    Ok(())
}

/// Distances from a target to its truncations and to its `eta_k` cutoffs,
/// which must shrink toward 0.
pub fn cmd_density_demo(cfg: &RunConfig) -> Result<Report> {
    let start = Instant::now();
    let geoms = dims(cfg, 2..=2)?;
    let mut cases = Vec::new();
    for g in &geoms {
        truncation_stage(g, cfg, &mut cases)?;
        eta_stage(g, cfg, &mut cases)?;
        let n = g.dim().get();
        let rec = harmonic_closure(n)?;
        cases.push(
            Case::new()
                .param("stage", "constants")
                .param("n", n)
                .value("harmonic", rec.exact_value.to_string())
                .value("omega_tilde", g.constants().omega_tilde)
                .value("sphere_measure", g.constants().sphere_measure)
                .holds(rec.matches),
        );
    }
    finish(cfg, start, &geoms, cases)
}
