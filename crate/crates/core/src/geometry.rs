//! Dimension-dependent constants, the radial probability density `mu_N`,
//! its log-potential `v_N = ln mu_N`, and the N-Laplacian identity satisfied
//! by `v_N`.
//!
//! Everything here is radial: a point of `R^N` is represented by its distance
//! `r >= 0` to the origin.

use std::fmt;

use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};

/// Ambient dimension `N >= 2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct Dimension(u32);

impl Dimension {
    pub fn new(n: u32) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidDimension(n));
        }
        Ok(Self(n))
    }

    pub fn get(self) -> u32 {
        self.0
    }

    pub(crate) fn as_f64(self) -> f64 {
        f64::from(self.0)
    }

    /// The exponent `N / (N - 1)` appearing in `1 + r^{N/(N-1)}`.
    pub fn conjugate_exponent(self) -> f64 {
        self.as_f64() / (self.as_f64() - 1.0)
    }
}

impl TryFrom<u32> for Dimension {
    type Error = Error;

    fn try_from(n: u32) -> Result<Self> {
        Self::new(n)
    }
}

impl From<Dimension> for u32 {
    fn from(d: Dimension) -> u32 {
        d.0
    }
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Exact harmonic number `H_m = 1 + 1/2 + ... + 1/m` (`H_0 = 0`).
pub fn harmonic_number(m: u32) -> BigRational {
    (1..=m).fold(BigRational::zero(), |acc, k| {
        acc + BigRational::new(One::one(), k.into())
    })
}

/// Constants attached to one dimension.
#[derive(Clone, Debug, PartialEq)]
pub struct GeometryConstants {
    pub dim: Dimension,
    /// `V_N`, the volume of the unit ball.
    pub ball_volume: f64,
    /// `omega_{N-1}`, the measure of the unit sphere.
    pub sphere_measure: f64,
    /// `N^N (N/(N-1))^{N-1} omega_{N-1}`, the sharp Dirichlet normalization.
    pub omega_tilde: f64,
    /// `H_{N-1}`, the magnitude of the sharp Carleson-Chang constant.
    pub harmonic: BigRational,
}

impl GeometryConstants {
    pub fn harmonic_f64(&self) -> f64 {
        self.harmonic.to_f64().unwrap_or(f64::NAN)
    }
}

impl Serialize for GeometryConstants {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr {
            n: u32,
            ball_volume: f64,
            sphere_measure: f64,
            omega_tilde: f64,
            harmonic: String,
            harmonic_value: f64,
        }
        Repr {
            n: self.dim.get(),
            ball_volume: self.ball_volume,
            sphere_measure: self.sphere_measure,
            omega_tilde: self.omega_tilde,
            harmonic: self.harmonic.to_string(),
            harmonic_value: self.harmonic_f64(),
        }
        .serialize(serializer)
    }
}

/// `Gamma(n/2 + 1)`: an integer factorial for even `n`, a half-integer
/// product times `sqrt(pi)` for odd `n`.
fn gamma_half_plus_one(n: u32) -> f64 {
    if n.is_multiple_of(2) {
        (1..=n / 2).map(f64::from).product()
    } else {
        // Gamma(1/2) = sqrt(pi), Gamma(x + 1) = x Gamma(x)
        let mut g = std::f64::consts::PI.sqrt();
        let mut x = 0.5;
        while x < f64::from(n) / 2.0 + 1.0 - 1e-9 {
            g *= x;
            x += 1.0;
        }
        g
    }
}

pub fn constants(dim: Dimension) -> GeometryConstants {
    let n = dim.as_f64();
    let ball_volume = std::f64::consts::PI.powf(n / 2.0) / gamma_half_plus_one(dim.get());
    let sphere_measure = n * ball_volume;
    let omega_tilde = n.powi(dim.get() as i32) * (n / (n - 1.0)).powi(dim.get() as i32 - 1) * sphere_measure;
    GeometryConstants {
        dim,
        ball_volume,
        sphere_measure,
        omega_tilde,
        harmonic: harmonic_number(dim.get() - 1),
    }
}

/// `r^p` evaluated as `exp(p ln r)`, with `r = 0` mapped to 0 (for `p > 0`).
pub(crate) fn radial_power(r: f64, p: f64) -> f64 {
    if r == 0.0 {
        if p == 0.0 {
            1.0
        } else {
            0.0
        }
    } else {
        (p * r.ln()).exp()
    }
}

fn check_radius(r: f64) -> Result<()> {
    if r.is_finite() && r >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidRadius(r))
    }
}

/// How derivatives are taken in [`Geometry::n_laplacian_residual`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Differentiation {
    Analytic,
    /// Nested central differences with the given step.
    FiniteDifference { step: f64 },
}

/// The radial density, potential and constants for one dimension.
#[derive(Clone, Debug)]
pub struct Geometry {
    constants: GeometryConstants,
    exponent: f64,
    gradient_scale: f64,
}

impl Geometry {
    pub fn new(dim: Dimension) -> Self {
        let n = dim.as_f64();
        Self {
            constants: constants(dim),
            exponent: dim.conjugate_exponent(),
            gradient_scale: n * n / (n - 1.0),
        }
    }

    pub fn dim(&self) -> Dimension {
        self.constants.dim
    }

    pub fn n(&self) -> f64 {
        self.constants.dim.as_f64()
    }

    pub fn n_int(&self) -> i32 {
        self.constants.dim.get() as i32
    }

    pub fn constants(&self) -> &GeometryConstants {
        &self.constants
    }

    pub fn harmonic(&self) -> f64 {
        self.constants.harmonic_f64()
    }

    /// `T = r^{N/(N-1)}`, the variable in which most radial integrals become
    /// rational.
    pub fn stretched(&self, r: f64) -> f64 {
        radial_power(r, self.exponent)
    }

    /// Unchecked density; `r` must be non-negative.
    pub(crate) fn mu(&self, r: f64) -> f64 {
        let t = self.stretched(r);
        1.0 / (self.constants.ball_volume * (1.0 + t).powi(self.n_int()))
    }

    /// Unchecked potential `ln mu_N(r)`.
    pub(crate) fn v(&self, r: f64) -> f64 {
        -self.constants.ball_volume.ln() - self.n() * self.stretched(r).ln_1p()
    }

    /// Unchecked `|grad v_N|` at radius `r`.
    pub(crate) fn g(&self, r: f64) -> f64 {
        let b = 1.0 / (self.n() - 1.0);
        let num = radial_power(r, b);
        if num == 0.0 {
            return 0.0;
        }
        self.gradient_scale * num / (1.0 + self.stretched(r))
    }

    pub fn mu_density(&self, r: f64) -> Result<f64> {
        check_radius(r)?;
        Ok(self.mu(r))
    }

    pub fn v_potential(&self, r: f64) -> Result<f64> {
        check_radius(r)?;
        Ok(self.v(r))
    }

    /// `|grad v_N|(r) = (N^2/(N-1)) r^{1/(N-1)} / (1 + r^{N/(N-1)})`.
    pub fn grad_v_magnitude(&self, r: f64) -> Result<f64> {
        check_radius(r)?;
        Ok(self.g(r))
    }

    /// Radius where `|grad v_N|` peaks: `(N-1)^{-(N-1)/N}`.
    pub fn grad_v_argmax(&self) -> f64 {
        (self.n() - 1.0).powf(-(self.n() - 1.0) / self.n())
    }

    /// Signed radial derivative of `|grad v_N|`.
    fn g_prime(&self, r: f64) -> f64 {
        let n = self.n();
        let b = 1.0 / (n - 1.0);
        let t = self.stretched(r);
        self.gradient_scale * radial_power(r, b - 1.0) * (b - t) / ((1.0 + t) * (1.0 + t))
    }

    /// Residual of `Delta_N v_N = -N^N (N/(N-1))^{N-1} V_N mu_N` at radius
    /// `r > 0`, with the radial N-Laplacian
    /// `(|f'|^{N-2} f')' + ((N-1)/r) |f'|^{N-2} f'` of `f = v_N`.
    pub fn n_laplacian_residual(&self, r: f64, method: Differentiation) -> Result<f64> {
        check_radius(r)?;
        if r == 0.0 {
            return Err(Error::Domain(
                "the radial N-Laplacian is singular at r = 0".into(),
            ));
        }
        let n = self.n();
        let lap = match method {
            Differentiation::Analytic => {
                let g = self.g(r);
                // f' = -g, so |f'|^{N-2} f' = -g^{N-1}
                -(n - 1.0) * g.powi(self.n_int() - 2) * self.g_prime(r)
                    - (n - 1.0) / r * g.powi(self.n_int() - 1)
            }
            Differentiation::FiniteDifference { step } => {
                if !(step > 0.0 && step < r) {
                    return Err(Error::Domain(format!(
                        "finite-difference step {step} must lie in (0, r)"
                    )));
                }
                let flux = |x: f64| {
                    let d = (self.v(x + step) - self.v(x - step)) / (2.0 * step);
                    d.abs().powi(self.n_int() - 2) * d
                };
                (flux(r + step) - flux(r - step)) / (2.0 * step) + (n - 1.0) / r * flux(r)
            }
        };
        Ok(lap - self.n_laplacian_rhs(r))
    }

    /// `-N^N (N/(N-1))^{N-1} V_N mu_N(r)`.
    pub fn n_laplacian_rhs(&self, r: f64) -> f64 {
        let n = self.n();
        -n.powi(self.n_int()) * (n / (n - 1.0)).powi(self.n_int() - 1)
            * self.constants.ball_volume
            * self.mu(r)
    }

    /// `mu_N(B_r) = (T / (1 + T))^{N-1}` with `T = r^{N/(N-1)}`.
    pub fn ball_measure(&self, r: f64) -> f64 {
        let t = self.stretched(r);
        if t.is_infinite() {
            return 1.0;
        }
        ((self.n() - 1.0) * (-1.0 / (1.0 + t)).ln_1p()).exp()
    }

    /// `mu_N(R^N \ B_r) = 1 - r^N / (1 + r^{N/(N-1)})^{N-1}`, evaluated without
    /// cancellation for large `r`.
    pub fn tail_measure(&self, r: f64) -> f64 {
        let t = self.stretched(r);
        if t.is_infinite() {
            return 0.0;
        }
        -((self.n() - 1.0) * (-1.0 / (1.0 + t)).ln_1p()).exp_m1()
    }
}
