//! Verification suites and parameter sweeps behind the `onofri-lab` CLI.
//!
//! Every command turns a [`RunConfig`] into a [`Report`]: a list of cases,
//! each with its parameters, measured values, a residual and a verdict.

mod bounds;
mod config;
mod counterexample;
mod density;
pub mod descent;
mod measure;
mod onofri;
mod report;
mod sharp;

use std::ops::RangeInclusive;
use std::path::PathBuf;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub use bounds::cmd_verify_bounds;
pub use config::{parse_list, Command, RunConfig, TestProfile};
pub use counterexample::cmd_counterexample;
pub use density::cmd_density_demo;
pub use measure::{cmd_identities, cmd_verify_measure};
pub use onofri::{cmd_verify_onofri, random_profile};
pub use report::{Case, Report};
pub use sharp::{cmd_equivalence_sandwich, cmd_minimize_cc, FINAL_GAP_THRESHOLD, SANDWICH_FINAL_GAP};

use crate::error::{Error, Result};
use crate::geometry::{Dimension, Geometry};

pub fn run(cfg: &RunConfig) -> Result<Report> {
    cfg.quadrature.validate()?;
    match cfg.command {
        Command::VerifyMeasure => cmd_verify_measure(cfg),
        Command::VerifyBounds => cmd_verify_bounds(cfg),
        Command::VerifyOnofri => cmd_verify_onofri(cfg),
        Command::MinimizeCc => cmd_minimize_cc(cfg),
        Command::EquivalenceSandwich => cmd_equivalence_sandwich(cfg),
        Command::Counterexample => cmd_counterexample(cfg),
        Command::DensityDemo => cmd_density_demo(cfg),
        Command::Identities => cmd_identities(cfg),
    }
}

/// Writes the JSON and CSV files of a report (plus the identity table for
/// the `identities` command) into `cfg.out`, if set.
pub fn write_outputs(cfg: &RunConfig, report: &Report) -> Result<Vec<PathBuf>> {
    let Some(dir) = &cfg.out else {
        return Ok(Vec::new());
    };
    let (json, csv) = report.write_to(dir)?;
    let mut written = vec![json, csv];
    if cfg.command == Command::Identities {
        let path = dir.join("identities_table.csv");
        let file = std::fs::File::create(&path)?;
        crate::identities::write_identity_csv(&crate::identities::identity_table(measure::TABLE_N_MAX)?, file)?;
        written.push(path);
    }
    Ok(written)
}

/// The configured dimension, or every dimension in `default`.
fn dims(cfg: &RunConfig, default: RangeInclusive<u32>) -> Result<Vec<Geometry>> {
    match cfg.n {
        Some(d) => Ok(vec![Geometry::new(d)]),
        None => default.map(|n| Dimension::new(n).map(Geometry::new)).collect(),
    }
}

fn require_dims(geoms: &[Geometry], min: u32, what: &str) -> Result<()> {
    if let Some(g) = geoms.iter().find(|g| g.dim().get() < min) {
        return Err(Error::Config(format!("{what} needs N >= {min}, got {}", g.dim())));
    }
    Ok(())
}

/// Independent, reproducible random stream for `(seed, stream)`.
fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

fn finish(cfg: &RunConfig, start: Instant, geoms: &[Geometry], cases: Vec<Case>) -> Result<Report> {
    let pass = !cases.is_empty() && cases.iter().all(|c| c.pass);
    Ok(Report {
        command: cfg.command.name().to_string(),
        config: serde_json::to_value(cfg)?,
        geometry: geoms.iter().map(|g| g.constants().clone()).collect(),
        cases,
        pass,
        wall_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

fn or_default<T: Clone>(list: &[T], default: &[T]) -> Vec<T> {
    if list.is_empty() {
        default.to_vec()
    } else {
        list.to_vec()
    }
}

/// Whether the sequence is strictly decreasing.
fn decreasing(xs: &[f64]) -> bool {
    xs.windows(2).all(|w| w[1] < w[0])
}

/// Sorted copy of `xs` without duplicates.
fn sorted_radii(xs: &[f64]) -> Result<Vec<f64>> {
    let mut v = xs.to_vec();
    if v.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
        return Err(Error::Config(format!("radii must be positive and finite: {xs:?}")));
    }
    v.sort_by(f64::total_cmp);
    v.dedup();
    Ok(v)
}
