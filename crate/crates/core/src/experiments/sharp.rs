use std::time::Instant;

use rand::Rng;

use super::descent::{descend, gradient_check, DiscreteJ};
use super::{decreasing, dims, finish, or_default, rng, sorted_radii, Case, Report, RunConfig, TestProfile};
use crate::error::{Error, Result};
use crate::functionals::{cc_j, onofri_i};
use crate::geometry::Geometry;
use crate::identities::minimizing_family_gap;
use crate::profile::{default_grid, geometric_grid, lift_to_space, minimizing_family, project_to_ball, smooth_bump, Profile};

/// Largest admissible `J(W_r) + H_{N-1}` at the largest radius of a sweep.
pub const FINAL_GAP_THRESHOLD: f64 = 0.02;
/// Largest admissible sandwich gap at the largest radius of a sweep.
pub const SANDWICH_FINAL_GAP: f64 = 5e-3;
/// Slack below `-H_{N-1}` tolerated before strictness counts as violated.
const STRICTNESS_SLACK: f64 = 1e-8;
const CLOSED_FORM_TOL: f64 = 1e-9;
const GRADIENT_TOL: f64 = 1e-5;
const GRADIENT_NODES: usize = 20;

/// 20-node grid on `[0, 1]`: 0 and a geometric ladder from `1e-2` to 1.
fn gradient_grid() -> Vec<f64> {
    let ratio = 100f64.powf(1.0 / (GRADIENT_NODES as f64 - 2.0));
    let mut g = geometric_grid(1.0, ratio, 1e-2);
    g.truncate(GRADIENT_NODES);
    *g.last_mut().expect("non-empty") = 1.0;
    g
}

/// `J` along the minimizing family, plus the optimizer's gradient check and
/// a projected descent that must stay above `-H_{N-1}`.
pub fn cmd_minimize_cc(cfg: &RunConfig) -> Result<Report> {
    let start = Instant::now();
    let geoms = dims(cfg, 2..=2)?;
    let mut cases = Vec::new();
    for g in &geoms {
        let n = g.dim().get();
        let h = g.harmonic();
        let default: &[f64] = if n == 2 { &[3.0, 10.0, 100.0] } else { &[10.0, 30.0, 100.0, 300.0] };
        let radii = sorted_radii(&or_default(&cfg.r_list, default))?;
        let mut js = Vec::new();
        let mut gaps = Vec::new();
        for &r in &radii {
            let rep = cc_j(g, &minimizing_family(g, r)?, &cfg.quadrature)?;
            let gap = rep.margin.unwrap_or(f64::NAN);
            let exact = minimizing_family_gap(n, r)?;
            js.push(rep.value);
            gaps.push(gap);
            cases.push(
                Case::new()
                    .param("check", "family_closed_form")
                    .param("n", n)
                    .param("r", r)
                    .value("J", rep.value)
                    .value("closed_form", exact - h)
                    .value("gap", gap)
                    .value("error_estimate", rep.error_estimate)
                    .check((gap - exact).abs(), CLOSED_FORM_TOL),
            );
            cases.push(
                Case::new()
                    .param("check", "strictness")
                    .param("n", n)
                    .param("r", r)
                    .value("J", rep.value)
                    .value("bound", -h)
                    .check(-gap, STRICTNESS_SLACK),
            );
        }
        let shrinking = decreasing(&js) && decreasing(&gaps);
        cases.push(
            Case::new()
                .param("check", "monotone_approach")
                .param("n", n)
                .value("J", &js)
                .value("gaps", &gaps)
                .holds(shrinking),
        );
        let final_gap = *gaps.last().expect("at least one radius");
        cases.push(
            Case::new()
                .param("check", "final_gap")
                .param("n", n)
                .param("r", *radii.last().expect("at least one radius"))
                .value("gap", final_gap)
                .check(final_gap, FINAL_GAP_THRESHOLD),
        );

        let nodes = gradient_grid();
        let dj = DiscreteJ::new(g, nodes.clone())?;
        let mut rg = rng(cfg.seed, 200 + u64::from(n));
        let amp = rg.gen_range(0.5..3.0);
        let u: Vec<f64> = nodes
            .iter()
            .map(|&x| (1.0 - x) * (amp + 0.3 * rg.gen_range(-1.0..1.0)))
            .collect();
        let check = gradient_check(&dj, &u, 1e-6)?;
        cases.push(
            Case::new()
                .param("check", "gradient")
                .param("n", n)
                .param("nodes", nodes.len())
                .value("relative_error", check.relative_error)
                .check(check.relative_error, GRADIENT_TOL),
        );

        if cfg.descent_steps > 0 {
            let grid = default_grid(1.0);
            let dj = DiscreteJ::new(g, grid.clone())?;
            let w = minimizing_family(g, 3.0)?;
            let u0: Vec<f64> = grid.iter().map(|&x| w.value(x)).collect();
            let trace = descend(&dj, &u0, cfg.descent_steps)?;
            cases.push(
                Case::new()
                    .param("check", "descent")
                    .param("n", n)
                    .param("nodes", grid.len())
                    .value("initial", trace.initial)
                    .value("best", trace.best)
                    .value("steps_taken", trace.steps_taken)
                    .value("margin", trace.best + h)
                    .check(-(trace.best + h), STRICTNESS_SLACK),
            );
        }
    }
    finish(cfg, start, &geoms, cases)
}

fn test_profile(p: TestProfile) -> Result<Profile> {
    match p {
        TestProfile::Zero => Ok(Profile::zero()),
        TestProfile::Bump { amplitude, radius } => {
            if !(radius > 0.0 && radius <= 0.5) {
                return Err(Error::Config(format!(
                    "the sandwich bump must be supported in [0, 1/2], got radius {radius}"
                )));
            }
            smooth_bump(amplitude, radius)
        }
    }
}

/// Limit of `I(u_r)` as `r -> inf`:
/// `(1/w~) int_{B_1} |grad u|^N + H_{N-1} - ln((1/V_N) int_{B_1} e^u + N - 1)`.
fn lift_limit(g: &Geometry, u: &Profile, cfg: &RunConfig) -> Result<f64> {
    let j = cc_j(g, u, &cfg.quadrature)?;
    Ok(j.dirichlet_term + g.harmonic() - (j.log_term.exp() + g.n() - 1.0).ln())
}

/// Both directions of the equivalence between the sharp bounds for `I` and
/// `J`, through the projection and lift transforms.
pub fn cmd_equivalence_sandwich(cfg: &RunConfig) -> Result<Report> {
    let start = Instant::now();
    let geoms = dims(cfg, 2..=2)?;
    let radii = sorted_radii(&or_default(&cfg.r_list, &[10.0, 100.0, 1000.0]))?;
    let u = test_profile(cfg.test_profile)?;
    let is_zero = cfg.test_profile == TestProfile::Zero;
    let mut cases = Vec::new();
    for g in &geoms {
        let n = g.dim().get();
        let h = g.harmonic();
        let target_ge = onofri_i(g, &u, &cfg.quadrature)?.value;
        let target_le = lift_limit(g, &u, cfg)?;
        let mut ge_gaps = Vec::new();
        let mut le_gaps = Vec::new();
        for &r in &radii {
            let j = cc_j(g, &project_to_ball(&u, r, g)?, &cfg.quadrature)?;
            let gap = j.value + h - target_ge;
            ge_gaps.push(gap.abs());
            let mut case = Case::new()
                .param("direction", "ge")
                .param("n", n)
                .param("r", r)
                .value("J_plus_H", j.value + h)
                .value("target", target_ge)
                .value("gap", gap);
            case = if is_zero {
                let exact = minimizing_family_gap(n, r)?;
                case.value("closed_form_gap", exact).check((gap - exact).abs(), 1e-8)
            } else {
                case.holds(gap.is_finite())
            };
            cases.push(case);

            let i = onofri_i(g, &lift_to_space(&u, r, g)?, &cfg.quadrature)?;
            let gap = i.value - target_le;
            le_gaps.push(gap.abs());
            cases.push(
                Case::new()
                    .param("direction", "le")
                    .param("n", n)
                    .param("r", r)
                    .value("I", i.value)
                    .value("target", target_le)
                    .value("gap", gap)
                    .value("error_estimate", i.error_estimate)
                    .holds(gap.is_finite()),
            );
        }
        for (dir, gaps) in [("ge", &ge_gaps), ("le", &le_gaps)] {
            cases.push(
                Case::new()
                    .param("direction", dir)
                    .param("n", n)
                    .param("check", "monotone_gap")
                    .value("gaps", gaps)
                    .holds(gaps.windows(2).all(|w| w[1] <= w[0])),
            );
            let last = *gaps.last().expect("at least one radius");
            cases.push(
                Case::new()
                    .param("direction", dir)
                    .param("n", n)
                    .param("check", "final_gap")
                    .param("r", *radii.last().expect("at least one radius"))
                    .value("gap", last)
                    .check(last, SANDWICH_FINAL_GAP),
            );
        }
    }
    finish(cfg, start, &geoms, cases)
}
