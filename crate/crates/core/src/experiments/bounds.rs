use std::time::Instant;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use super::{dims, finish, rng, Case, Report, RunConfig};
use crate::error::Result;
use crate::geometry::Dimension;
use crate::remainder::{check_binomial_inequalities, check_even_lower_bound, check_two_sided_bound, VecN};

const DEFAULT_PAIRS: usize = 100_000;
const EDGE_PAIRS: usize = 1_000;

/// Components uniform in `[-1, 1]`, scaled by `10^U(-2, 2)`.
fn random_vec(rng: &mut ChaCha8Rng, dim: Dimension) -> VecN {
    let scale = 10f64.powf(rng.gen_range(-2.0..2.0));
    VecN::new((0..dim.get()).map(|_| scale * rng.gen_range(-1.0..1.0)).collect())
}

struct Tally {
    checked: usize,
    violations: usize,
    worst_margin: f64,
    witness: Option<serde_json::Value>,
}

impl Tally {
    fn new() -> Self {
        Self {
            checked: 0,
            violations: 0,
            worst_margin: f64::INFINITY,
            witness: None,
        }
    }

    fn record(&mut self, pass: bool, margin: f64, witness: impl FnOnce() -> serde_json::Value) {
        self.checked += 1;
        self.worst_margin = self.worst_margin.min(margin);
        if !pass {
            self.violations += 1;
            if self.witness.is_none() {
                self.witness = Some(witness());
            }
        }
    }

    fn case(self, batch: &str, n: u32) -> Case {
        Case::new()
            .param("batch", batch)
            .param("n", n)
            .value("checked", self.checked)
            .value("violations", self.violations)
            .value("worst_relative_margin", self.worst_margin)
            .value("witness", self.witness)
            .check(self.violations as f64, 0.0)
    }
}

fn relative(margin: f64, scale: f64) -> f64 {
    if scale > 0.0 {
        margin / scale
    } else {
        margin
    }
}

/// Fuzzes the two-sided remainder bound, its equality cases, the
/// even-dimension lower bound and the binomial inequalities behind it.
pub fn cmd_verify_bounds(cfg: &RunConfig) -> Result<Report> {
    let start = Instant::now();
    let geoms = dims(cfg, 2..=6)?;
    let pairs = cfg.samples.unwrap_or(DEFAULT_PAIRS);
    let mut cases = Vec::new();
    for g in &geoms {
        let dim = g.dim();
        let n = dim.get();
        let mut r = rng(cfg.seed, u64::from(n));

        let mut t = Tally::new();
        for _ in 0..pairs {
            let (x, y) = (random_vec(&mut r, dim), random_vec(&mut r, dim));
            let b = check_two_sided_bound(dim, &x, &y)?;
            let lower = relative(b.remainder, b.upper);
            let upper = relative(b.upper_margin, b.upper);
            t.record(b.pass, lower.min(upper), || json!({"x": x.components(), "y": y.components(), "remainder": b.remainder, "upper": b.upper}));
        }
        cases.push(t.case("two_sided", n));

        let mut t = Tally::new();
        let zero = VecN::zeros(dim);
        for _ in 0..EDGE_PAIRS {
            let x = random_vec(&mut r, dim);
            let b = check_two_sided_bound(dim, &x, &zero)?;
            let exact = b.remainder == 0.0 && b.upper == 0.0;
            t.record(b.pass && exact, -b.remainder.abs(), || json!({"x": x.components(), "remainder": b.remainder}));
            let y = random_vec(&mut r, dim);
            let b = check_two_sided_bound(dim, &zero, &y)?;
            let expect = y.norm().powi(n as i32);
            let exact = (b.remainder - expect).abs() <= 1e-12 * expect;
            t.record(b.pass && exact, relative(b.upper_margin, b.upper), || json!({"y": y.components(), "remainder": b.remainder}));
        }
        cases.push(t.case("edge", n));

        if n >= 4 && n % 2 == 0 {
            let mut t = Tally::new();
            for _ in 0..pairs {
                let (x, y) = (random_vec(&mut r, dim), random_vec(&mut r, dim));
                let b = check_even_lower_bound(dim, &x, &y)?;
                t.record(b.pass, relative(b.margin, b.lhs.abs() + b.rhs.abs()), || json!({"x": x.components(), "y": y.components(), "lhs": b.lhs, "rhs": b.rhs}));
            }
            cases.push(t.case("even_lower", n));
        }

        let mut t = Tally::new();
        for _ in 0..pairs {
            let a = 10f64.powf(r.gen_range(-2.0..2.0)) * r.gen_range(0.0..1.0);
            let b = r.gen_range(-a..(10.0 * a + 1.0));
            let c = check_binomial_inequalities(n, a, b)?;
            let scale = (a.abs() + b.abs()).powi(n as i32);
            let m = c.second_margin.map_or(c.first_margin, |s| s.min(c.first_margin));
            t.record(c.pass, relative(m, scale), || json!({"k": n, "a": a, "b": b}));
        }
        cases.push(t.case("binomial", n));
    }
    finish(cfg, start, &geoms, cases)
}
