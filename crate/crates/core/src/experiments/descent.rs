//! `J` restricted to piecewise-linear profiles on a fixed grid, with its
//! exact gradient, and a projected descent that keeps `u(1) = 0`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::Geometry;
use crate::quadrature::kronrod21_unit_rule;

/// `J(u)` for the piecewise-linear profile through `(nodes[i], u[i])`.
///
/// The Dirichlet part is exact per segment; the exponential part uses a fixed
/// 21-point rule per segment, so the discrete functional is smooth in `u`.
#[derive(Clone, Debug)]
pub struct DiscreteJ {
    n: i32,
    nodes: Vec<f64>,
    /// `(omega / w~) (rho_{i+1}^N - rho_i^N) / N` per segment
    dirichlet_weights: Vec<f64>,
    /// rule points `t_q` on `[0, 1]`
    t: [f64; 21],
    /// `N h_i w_q rho_q^{N-1}` per segment and rule point
    exp_weights: Vec<[f64; 21]>,
}

impl DiscreteJ {
    pub fn new(geom: &Geometry, nodes: Vec<f64>) -> Result<Self> {
        if nodes.len() < 2 || nodes[0] != 0.0 || *nodes.last().expect("non-empty") != 1.0 {
            return Err(Error::InvalidSamples("grid must run from 0 to 1".into()));
        }
        if nodes.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidSamples("grid must be strictly increasing".into()));
        }
        let n = geom.n_int();
        let consts = geom.constants();
        let scale = consts.sphere_measure / consts.omega_tilde;
        let (t, w) = kronrod21_unit_rule();
        let mut dirichlet_weights = Vec::with_capacity(nodes.len() - 1);
        let mut exp_weights = Vec::with_capacity(nodes.len() - 1);
        for s in nodes.windows(2) {
            let (a, b) = (s[0], s[1]);
            dirichlet_weights.push(scale * (b.powi(n) - a.powi(n)) / geom.n());
            let h = b - a;
            let mut ew = [0.0; 21];
            for q in 0..21 {
                let rho = a + h * t[q];
                ew[q] = geom.n() * h * w[q] * rho.powi(n - 1);
            }
            exp_weights.push(ew);
        }
        Ok(Self {
            n,
            nodes,
            dirichlet_weights,
            t,
            exp_weights,
        })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    fn check(&self, u: &[f64]) -> Result<()> {
        if u.len() != self.nodes.len() {
            return Err(Error::InvalidSamples(format!(
                "{} values for {} nodes",
                u.len(),
                self.nodes.len()
            )));
        }
        Ok(())
    }

    pub fn value(&self, u: &[f64]) -> Result<f64> {
        Ok(self.evaluate(u, false)?.0)
    }

    /// `J(u)` and `dJ/du_i` for every node.
    pub fn value_and_gradient(&self, u: &[f64]) -> Result<(f64, Vec<f64>)> {
        self.evaluate(u, true)
    }

    fn evaluate(&self, u: &[f64], with_gradient: bool) -> Result<(f64, Vec<f64>)> {
        self.check(u)?;
        let nf = f64::from(self.n);
        let mut d = 0.0;
        let mut e = 0.0;
        let mut gd = vec![0.0; u.len()];
        let mut ge = vec![0.0; u.len()];
        for i in 0..u.len() - 1 {
            let h = self.nodes[i + 1] - self.nodes[i];
            let s = (u[i + 1] - u[i]) / h;
            let a = s.abs();
            d += self.dirichlet_weights[i] * a.powi(self.n);
            if with_gradient && a > 0.0 {
                let ds = self.dirichlet_weights[i] * nf * a.powi(self.n - 2) * s / h;
                gd[i + 1] += ds;
                gd[i] -= ds;
            }
            for q in 0..21 {
                let tq = self.t[q];
                let f = self.exp_weights[i][q] * (u[i] * (1.0 - tq) + u[i + 1] * tq).exp();
                e += f;
                if with_gradient {
                    ge[i] += f * (1.0 - tq);
                    ge[i + 1] += f * tq;
                }
            }
        }
        if !(e.is_finite() && e > 0.0) {
            return Err(Error::Domain(format!("exponential integral is {e}")));
        }
        let grad = if with_gradient {
            gd.iter().zip(&ge).map(|(a, b)| a - b / e).collect()
        } else {
            Vec::new()
        };
        Ok((d - e.ln(), grad))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct GradientCheck {
    pub analytic: Vec<f64>,
    pub finite_difference: Vec<f64>,
    /// `||analytic - fd||_2 / ||fd||_2` over the free nodes.
    pub relative_error: f64,
}

/// Compares the analytic gradient with central differences of step `h`,
/// skipping the last node, which is pinned by `u(1) = 0`.
pub fn gradient_check(j: &DiscreteJ, u: &[f64], h: f64) -> Result<GradientCheck> {
    let (_, analytic) = j.value_and_gradient(u)?;
    let free = u.len() - 1;
    let mut fd = Vec::with_capacity(free);
    let mut w = u.to_vec();
    for i in 0..free {
        w[i] = u[i] + h;
        let plus = j.value(&w)?;
        w[i] = u[i] - h;
        let minus = j.value(&w)?;
        w[i] = u[i];
        fd.push((plus - minus) / (2.0 * h));
    }
    let diff: f64 = analytic[..free].iter().zip(&fd).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
    let norm: f64 = fd.iter().map(|x| x * x).sum::<f64>().sqrt();
    Ok(GradientCheck {
        analytic: analytic[..free].to_vec(),
        finite_difference: fd,
        relative_error: if norm > 0.0 { diff / norm } else { diff },
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct DescentTrace {
    pub initial: f64,
    pub best: f64,
    pub steps_taken: usize,
    pub values: Vec<f64>,
    #[serde(skip)]
    pub best_profile: Vec<f64>,
}

/// Projected gradient descent with Armijo backtracking; the last node stays 0.
pub fn descend(j: &DiscreteJ, u0: &[f64], steps: usize) -> Result<DescentTrace> {
    let mut u = u0.to_vec();
    *u.last_mut().ok_or_else(|| Error::InvalidSamples("empty profile".into()))? = 0.0;
    let (mut value, mut grad) = j.value_and_gradient(&u)?;
    let initial = value;
    let mut values = vec![value];
    let mut t = 1.0;
    let mut taken = 0;
    for _ in 0..steps {
        let last = grad.len() - 1;
        grad[last] = 0.0;
        let g2: f64 = grad.iter().map(|g| g * g).sum();
        if g2 == 0.0 {
            break;
        }
        let mut accepted = None;
        while t > 1e-14 {
            let trial: Vec<f64> = u.iter().zip(&grad).map(|(x, g)| x - t * g).collect();
            if let Ok(v) = j.value(&trial) {
                if v <= value - 1e-4 * t * g2 {
                    accepted = Some((trial, v));
                    break;
                }
            }
            t *= 0.5;
        }
        let Some((next, _)) = accepted else { break };
        u = next;
        let (v, g) = j.value_and_gradient(&u)?;
        value = v;
        grad = g;
        values.push(value);
        taken += 1;
        t *= 2.0;
    }
    let best = values.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(DescentTrace {
        initial,
        best,
        steps_taken: taken,
        values,
        best_profile: u,
    })
}
