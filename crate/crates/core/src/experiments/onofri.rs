use std::time::Instant;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{dims, finish, rng, Case, Report, RunConfig};
use crate::error::Result;
use crate::functionals::onofri_i;
use crate::geometry::Geometry;
use crate::profile::{hat, log_family, smooth_bump, Profile, SampledProfile, SampledTail};

const DEFAULT_PROFILES: usize = 200;
const TOLERANCE: f64 = 1e-8;

fn random_simple(rng: &mut ChaCha8Rng, geom: &Geometry, family: usize) -> Result<(String, Profile)> {
    Ok(match family {
        0 => {
            let (h, r) = (rng.gen_range(-3.0..3.0), rng.gen_range(0.2..5.0));
            (format!("hat(h={h:.4},R={r:.4})"), hat(h, r)?)
        }
        1 => {
            let (a, r) = (rng.gen_range(-3.0..3.0), rng.gen_range(0.3..5.0));
            (format!("bump(A={a:.4},R={r:.4})"), smooth_bump(a, r)?)
        }
        2 => {
            let (a, r) = (rng.gen_range(-1.0..1.0), rng.gen_range(0.5..20.0));
            (format!("log_family(a={a:.4},R={r:.4})"), log_family(geom, a, r)?)
        }
        _ => {
            let m = rng.gen_range(3..=8);
            let mut nodes = vec![0.0];
            for _ in 1..m {
                let last = *nodes.last().expect("non-empty");
                nodes.push(last + rng.gen_range(0.1..1.5));
            }
            let mut values: Vec<f64> = (0..m).map(|_| rng.gen_range(-2.0..2.0)).collect();
            values[m - 1] = 0.0;
            (
                format!("sampled(m={m})"),
                SampledProfile::new(nodes, values, SampledTail::Zero)?.into_profile(),
            )
        }
    })
}

/// Random admissible profile: a hat, a smooth bump, a truncated member of
/// the logarithmic family, a random piecewise-linear profile, or the sum of
/// two of these. `index` picks the family so that all of them occur.
pub fn random_profile(rng: &mut ChaCha8Rng, geom: &Geometry, index: usize) -> Result<(String, Profile)> {
    let family = index % 5;
    if family < 4 {
        return random_simple(rng, geom, family);
    }
    let (f1, f2) = (rng.gen_range(0..4), rng.gen_range(0..4));
    let (n1, p1) = random_simple(rng, geom, f1)?;
    let (n2, p2) = random_simple(rng, geom, f2)?;
    Ok((format!("{n1}+{n2}"), p1.add(&p2)))
}

fn dump(p: &Profile) -> Vec<[f64; 2]> {
    let extent = p.flat().map_or(10.0, |f| f.radius.max(1e-3));
    (0..=24).map(|i| extent * f64::from(i) / 24.0).map(|r| [r, p.value(r)]).collect()
}

/// Fuzzes `I(u) >= 0` and `I(u + c) = I(u)` over random profiles.
pub fn cmd_verify_onofri(cfg: &RunConfig) -> Result<Report> {
    let start = Instant::now();
    let geoms = dims(cfg, 2..=4)?;
    let count = cfg.samples.unwrap_or(DEFAULT_PROFILES);
    let mut cases = Vec::new();
    for g in &geoms {
        let n = g.dim().get();
        let zero = onofri_i(g, &Profile::zero(), &cfg.quadrature)?;
        cases.push(
            Case::new()
                .param("n", n)
                .param("index", -1)
                .param("family", "zero")
                .value("I", zero.value)
                .check(zero.value.abs(), 0.0),
        );
        let mut r = rng(cfg.seed, 100 + u64::from(n));
        for index in 0..count {
            let (name, u) = random_profile(&mut r, g, index)?;
            let c = r.gen_range(-5.0..5.0);
            let base = onofri_i(g, &u, &cfg.quadrature)?;
            let shifted = onofri_i(g, &u.shift(c), &cfg.quadrature)?;
            let shift_dev = (shifted.value - base.value).abs();
            let residual = (-base.value).max(shift_dev);
            let mut case = Case::new()
                .param("n", n)
                .param("index", index)
                .param("family", name)
                .value("I", base.value)
                .value("I_shifted", shifted.value)
                .value("shift", c)
                .value("shift_deviation", shift_dev)
                .value("error_estimate", base.error_estimate)
                .value("membership_failed", base.membership.map(|m| m.membership_failed))
                .check(residual, TOLERANCE);
            if !case.pass {
                case = case.value("profile_dump", dump(&u));
            }
            cases.push(case);
        }
    }
    finish(cfg, start, &geoms, cases)
}
