use std::time::Instant;

use super::{dims, finish, or_default, require_dims, Case, Report, RunConfig};
use crate::error::{Error, Result};
use crate::functionals::w_mu_norm;
use crate::geometry::Geometry;
use crate::profile::{counterexample_height, counterexample_profile};
use crate::quadrature::integrate_radial_range;

/// Change of `grad_n(u_K)` allowed between consecutive `K`.
pub const GRAD_CAUCHY_TOL: f64 = 1e-3;
/// Bumps below this index are left out of the fits.
const FIT_FROM: u64 = 10;

/// Least-squares `c` in `y_k ~ c x_k`.
fn fit(xs: &[f64], ys: &[f64]) -> f64 {
    let num: f64 = xs.iter().zip(ys).map(|(x, y)| x * y).sum();
    let den: f64 = xs.iter().map(|x| x * x).sum();
    num / den
}

/// Per-bump contributions of bump `k` (index `k - 2`) to the mixed
/// seminorm squared and to `||grad u||_N^N`.
struct Bumps {
    mixed: Vec<f64>,
    grad: Vec<f64>,
}

impl Bumps {
    fn compute(g: &Geometry, max_k: u64, cfg: &RunConfig) -> Result<Self> {
        let n = g.n_int();
        let omega = g.constants().sphere_measure;
        let mut mixed = Vec::with_capacity(max_k as usize);
        let mut grad = Vec::with_capacity(max_k as usize);
        for k in 2..=max_k {
            let kf = k as f64;
            let s = 2.0 * counterexample_height(k);
            let m = integrate_radial_range(g, |rho| s * s * g.g(rho).powi(n - 2), kf - 0.5, kf + 0.5, &[kf], &cfg.quadrature)?;
            mixed.push(m.value);
            grad.push(omega * s.powi(n) * ((kf + 0.5).powi(n) - (kf - 0.5).powi(n)) / g.n());
        }
        Ok(Self { mixed, grad })
    }

    /// Sum over bumps `from..=to`.
    fn mixed_sum(&self, from: u64, to: u64) -> f64 {
        self.mixed[(from - 2) as usize..=(to - 2) as usize].iter().sum()
    }
}

fn ratio_band(ys: &[f64], xs: &[f64], c: f64) -> (f64, f64) {
    ys.iter().zip(xs).fold((f64::INFINITY, 0.0_f64), |(lo, hi), (y, x)| {
        let q = y / (c * x);
        (lo.min(q), hi.max(q))
    })
}

/// Norm trends of the counterexample series `u_K`: `||grad u_K||_N` settles
/// while the mixed seminorm keeps growing like `sum 1/(k ln k)`.
pub fn cmd_counterexample(cfg: &RunConfig) -> Result<Report> {
    let start = Instant::now();
    let geoms = dims(cfg, 4..=4)?;
    require_dims(&geoms, 3, "the counterexample")?;
    let mut big_ks = or_default(&cfg.big_k_list, &[100, 1_000, 10_000]);
    big_ks.sort_unstable();
    big_ks.dedup();
    if big_ks.iter().any(|&k| k < 2 * FIT_FROM) {
        return Err(Error::Config(format!("K values must be at least {}", 2 * FIT_FROM)));
    }
    let k_max = *big_ks.last().expect("non-empty");
    let mut cases = Vec::new();
    for g in &geoms {
        let n = g.dim().get();
        let bumps = Bumps::compute(g, 2 * k_max, cfg)?;
        let ks: Vec<u64> = (FIT_FROM..=k_max).collect();
        let harmonic_x: Vec<f64> = ks.iter().map(|&k| 1.0 / (k as f64 * (k as f64).ln())).collect();
        let grad_x: Vec<f64> = ks
            .iter()
            .map(|&k| 1.0 / (k as f64 * (k as f64).ln().powf(g.n() / 2.0)))
            .collect();
        let mixed_y: Vec<f64> = ks.iter().map(|&k| bumps.mixed[(k - 2) as usize]).collect();
        let grad_y: Vec<f64> = ks.iter().map(|&k| bumps.grad[(k - 2) as usize]).collect();
        let c = fit(&harmonic_x, &mixed_y);
        let c_grad = fit(&grad_x, &grad_y);
        let (lo, hi) = ratio_band(&mixed_y, &harmonic_x, c);
        cases.push(
            Case::new()
                .param("check", "mixed_increment_band")
                .param("n", n)
                .value("c", c)
                .value("min_ratio", lo)
                .value("max_ratio", hi)
                .holds(lo >= 0.5 && hi <= 2.0),
        );
        let (lo, hi) = ratio_band(&grad_y, &grad_x, c_grad);
        cases.push(
            Case::new()
                .param("check", "grad_increment_band")
                .param("n", n)
                .value("c", c_grad)
                .value("min_ratio", lo)
                .value("max_ratio", hi)
                .holds(lo >= 0.5 && hi <= 2.0),
        );

        let mut norms = Vec::new();
        for &k in &big_ks {
            let nb = w_mu_norm(g, &counterexample_profile(k)?, &cfg.quadrature)?;
            let mixed_sq = nb.mixed * nb.mixed;
            let summed = bumps.mixed_sum(2, k);
            let grad_summed: f64 = bumps.grad[..(k - 1) as usize].iter().sum::<f64>().powf(1.0 / g.n());
            cases.push(
                Case::new()
                    .param("check", "norm")
                    .param("n", n)
                    .param("K", k)
                    .value("weighted_l1", nb.weighted_l1)
                    .value("grad_n", nb.grad_n)
                    .value("mixed_squared", mixed_sq)
                    .value("bump_sum_mixed_squared", summed)
                    .value("bump_sum_grad_n", grad_summed)
                    .value("membership_failed", nb.membership_failed)
                    .check(((mixed_sq - summed) / summed).abs().max(((nb.grad_n - grad_summed) / grad_summed).abs()), 1e-8),
            );
            norms.push((k, nb.grad_n, mixed_sq));
        }
        for w in norms.windows(2) {
            let ((k1, g1, m1), (k2, g2, m2)) = (w[0], w[1]);
            let predicted: f64 = ((k1 + 1)..=k2).map(|k| 1.0 / (k as f64 * (k as f64).ln())).sum::<f64>() * c;
            let growth = m2 - m1;
            cases.push(
                Case::new()
                    .param("check", "mixed_growth")
                    .param("n", n)
                    .param("K_from", k1)
                    .param("K_to", k2)
                    .value("increase", growth)
                    .value("fitted_increase", predicted)
                    .check(0.5 * predicted - growth, 0.0),
            );
            cases.push(
                Case::new()
                    .param("check", "grad_n_cauchy")
                    .param("n", n)
                    .param("K_from", k1)
                    .param("K_to", k2)
                    .value("grad_n_from", g1)
                    .value("grad_n_to", g2)
                    .check((g2 - g1).abs(), GRAD_CAUCHY_TOL),
            );
        }
        let doubling: Vec<f64> = big_ks.iter().map(|&k| bumps.mixed_sum(k + 1, 2 * k)).collect();
        let sustained = doubling.iter().all(|&d| d > 0.0) && doubling.windows(2).all(|w| w[1] >= 0.5 * w[0]);
        cases.push(
            Case::new()
                .param("check", "doubling_probe")
                .param("n", n)
                .value("K", &big_ks)
                .value("increase_K_to_2K", &doubling)
                .holds(sustained),
        );
    }
    finish(cfg, start, &geoms, cases)
}
