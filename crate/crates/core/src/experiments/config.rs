use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::Dimension;
use crate::quadrature::{InfiniteTransform, QuadratureConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    VerifyMeasure,
    VerifyBounds,
    VerifyOnofri,
    MinimizeCc,
    EquivalenceSandwich,
    Counterexample,
    DensityDemo,
    Identities,
}

impl Command {
    pub const ALL: [Command; 8] = [
        Command::VerifyMeasure,
        Command::VerifyBounds,
        Command::VerifyOnofri,
        Command::MinimizeCc,
        Command::EquivalenceSandwich,
        Command::Counterexample,
        Command::DensityDemo,
        Command::Identities,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::VerifyMeasure => "verify-measure",
            Command::VerifyBounds => "verify-bounds",
            Command::VerifyOnofri => "verify-onofri",
            Command::MinimizeCc => "minimize-cc",
            Command::EquivalenceSandwich => "equivalence-sandwich",
            Command::Counterexample => "counterexample",
            Command::DensityDemo => "density-demo",
            Command::Identities => "identities",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Command {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Command::ALL
            .into_iter()
            .find(|c| c.name() == s || c.name().replace('-', "_") == s)
            .ok_or_else(|| Error::Config(format!("unknown command `{s}`")))
    }
}

/// Profile used by the sandwich experiment.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum TestProfile {
    Zero,
    /// `amplitude * Psi(rho / radius)`
    Bump { amplitude: f64, radius: f64 },
}

impl FromStr for TestProfile {
    type Err = Error;

    /// `zero`, `bump` (amplitude 1, radius 1/2) or `bump:<amplitude>:<radius>`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.trim().split(':').collect();
        match parts.as_slice() {
            ["zero"] => Ok(TestProfile::Zero),
            ["bump"] => Ok(TestProfile::Bump {
                amplitude: 1.0,
                radius: 0.5,
            }),
            ["bump", a, r] => Ok(TestProfile::Bump {
                amplitude: parse_f64("test_profile amplitude", a)?,
                radius: parse_f64("test_profile radius", r)?,
            }),
            _ => Err(Error::Config(format!("unknown test profile `{s}`"))),
        }
    }
}

/// Everything a run depends on. Empty lists and `None` select the
/// command's defaults.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: Command,
    pub n: Option<Dimension>,
    pub seed: u64,
    pub quadrature: QuadratureConfig,
    pub r_list: Vec<f64>,
    pub k_list: Vec<u32>,
    pub big_k_list: Vec<u64>,
    /// Fuzz sample count (pairs for the bounds suite, profiles otherwise).
    pub samples: Option<usize>,
    /// Projected-gradient steps in `minimize-cc`; 0 disables the descent.
    pub descent_steps: usize,
    pub test_profile: TestProfile,
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn new(command: Command) -> Self {
        Self {
            command,
            n: None,
            seed: 0,
            quadrature: QuadratureConfig::default(),
            r_list: Vec::new(),
            k_list: Vec::new(),
            big_k_list: Vec::new(),
            samples: None,
            descent_steps: 40,
            test_profile: TestProfile::Zero,
            out: None,
        }
    }

    pub fn with_n(mut self, n: u32) -> Result<Self> {
        self.n = Some(Dimension::new(n)?);
        Ok(self)
    }

    /// Applies `key = value` lines; blank lines and `#` comments are skipped.
    /// Keys may use `-` or `_`.
    pub fn apply_config_text(&mut self, text: &str) -> Result<()> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected key=value, got `{raw}`", lineno + 1))
            })?;
            self.set(&key.trim().replace('-', "_"), value.trim())
                .map_err(|e| Error::Config(format!("line {}: {e}", lineno + 1)))?;
        }
        self.quadrature.validate()
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "command" => self.command = value.parse()?,
            "n" => self.n = Some(Dimension::new(parse_num(key, value)?)?),
            "seed" => self.seed = parse_num(key, value)?,
            "abs_tol" => self.quadrature.abs_tol = parse_f64(key, value)?,
            "rel_tol" => self.quadrature.rel_tol = parse_f64(key, value)?,
            "max_subdivisions" => self.quadrature.max_subdivisions = parse_num(key, value)?,
            "split_at" => {
                self.quadrature.infinite_transform = if value == "none" || value == "rational" {
                    InfiniteTransform::Rational
                } else {
                    InfiniteTransform::SplitAt(parse_f64(key, value)?)
                }
            }
            "r_list" => self.r_list = parse_list(key, value, |s| parse_f64("r_list", s))?,
            "k_list" => self.k_list = parse_list(key, value, |s| parse_num("k_list", s))?,
            "big_k_list" | "k_big_list" => self.big_k_list = parse_list(key, value, |s| parse_num("big_k_list", s))?,
            "samples" => self.samples = Some(parse_num(key, value)?),
            "descent_steps" => self.descent_steps = parse_num(key, value)?,
            "test_profile" => self.test_profile = value.parse()?,
            "out" => self.out = Some(PathBuf::from(value)),
            _ => return Err(Error::Config(format!("unknown key `{key}`"))),
        }
        Ok(())
    }
}

fn parse_f64(key: &str, s: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|e| Error::Config(format!("{key}: `{s}`: {e}")))
}

fn parse_num<T: FromStr>(key: &str, s: &str) -> Result<T>
where
    T::Err: fmt::Display,
{
    s.trim()
        .parse::<T>()
        .map_err(|e| Error::Config(format!("{key}: `{s}`: {e}")))
}

/// Comma-separated list; `a..b` expands an integer range.
pub fn parse_list<T>(key: &str, s: &str, item: impl Fn(&str) -> Result<T>) -> Result<Vec<T>>
where
    T: FromStr,
    T::Err: fmt::Display,
{
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        if let Some((a, b)) = part.split_once("..") {
            let (a, b): (u64, u64) = (parse_num(key, a)?, parse_num(key, b)?);
            for i in a..=b {
                out.push(parse_num(key, &i.to_string())?);
            }
        } else {
            out.push(item(part)?);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_text_overrides() {
        let mut c = RunConfig::new(Command::MinimizeCc);
        c.apply_config_text(
            "# sweep\nn = 3\nr-list = 10, 30,100\nabs_tol=1e-12\nk_list = 2..4\nsplit_at = 100\n\ntest_profile = bump:2:0.25\n",
        )
        .unwrap();
        assert_eq!(c.n.unwrap().get(), 3);
        assert_eq!(c.r_list, vec![10.0, 30.0, 100.0]);
        assert_eq!(c.k_list, vec![2, 3, 4]);
        assert_eq!(c.quadrature.abs_tol, 1e-12);
        assert_eq!(c.quadrature.infinite_transform, InfiniteTransform::SplitAt(100.0));
        assert_eq!(
            c.test_profile,
            TestProfile::Bump {
                amplitude: 2.0,
                radius: 0.25
            }
        );
        assert!(c.apply_config_text("bogus = 1").is_err());
        assert!(c.apply_config_text("n = 1").is_err());
        assert!(c.apply_config_text("abs_tol = -1").is_err());
        assert!(c.apply_config_text("no equals sign").is_err());
    }

    #[test]
    fn command_names_round_trip() {
        for c in Command::ALL {
            assert_eq!(c.name().parse::<Command>().unwrap(), c);
        }
        assert!("verify".parse::<Command>().is_err());
    }
}
