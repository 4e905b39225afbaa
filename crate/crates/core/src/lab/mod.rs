//! Experiment driver: configuration, the six experiment kinds, and output.
//!
//! An [`ExperimentConfig`] is assembled from a JSON file and/or command-line
//! flags, validated, and handed to [`run`]. Every experiment returns a
//! [`RunRecord`] holding one row per configured case plus the list of
//! violated assertions; the CLI maps a nonempty failure list to exit code 1.

mod cli;
mod experiments;
mod record;

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::quadrature::Exponent;
use crate::rng;
use crate::{Poly, C64};

pub use cli::run_cli;
pub use experiments::{
    run, run_certify, run_converge, run_perturb_element, run_perturb_functional, run_ryabykh,
    run_solve,
};
pub use record::{Failure, Format, RunRecord};

/// Slack allowed when checking that `‖φ‖_n` is nondecreasing in `n`.
pub const MONOTONE_SLACK: f64 = 1e-10;
/// Slack allowed when checking that a distance column is nonincreasing in a
/// degree sweep; covers solver noise once the extremal has stabilized.
pub const DISTANCE_SLACK: f64 = 1e-9;
/// A distance column has "converged to 0" once it is below this value.
pub const CONVERGENCE_THRESHOLD: f64 = 1e-6;
/// The convergence threshold is enforced only when the smallest ε is at most this.
pub const SMALL_EPSILON: f64 = 1e-7;
/// Bound on extremality residuals and recovered-moment errors.
pub const CERTIFICATE_TOL: f64 = 1e-7;
/// Most negative slack accepted in the Hardy-space bound.
pub const RYABYKH_TOL: f64 = 1e-8;

pub const DEFAULT_RADII: [f64; 4] = [0.5, 0.9, 0.99, 1.0];
pub const DEFAULT_EPSILONS: [f64; 7] = [1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7];
pub const DEFAULT_SWEEP_DEGREES: [usize; 5] = [2, 4, 8, 16, 24];
pub const DEFAULT_DEGREE: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    Solve,
    Converge,
    PerturbFunctional,
    PerturbElement,
    Ryabykh,
    Certify,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::Solve => "solve",
            Kind::Converge => "converge",
            Kind::PerturbFunctional => "perturb-functional",
            Kind::PerturbElement => "perturb-element",
            Kind::Ryabykh => "ryabykh",
            Kind::Certify => "certify",
        }
    }

    fn is_perturbation(self) -> bool {
        matches!(self, Kind::PerturbFunctional | Kind::PerturbElement)
    }

    pub fn default_format(self) -> Format {
        match self {
            Kind::Solve | Kind::Certify => Format::Json,
            _ => Format::Csv,
        }
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Rejected configuration; maps to exit code 2.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{0}")]
pub struct ConfigError(pub String);

fn bad(msg: impl Into<String>) -> ConfigError {
    ConfigError(msg.into())
}

/// Polynomial written as comma-separated coefficients, each `re:im` or a bare
/// real; `random:D` draws a unit-`A²` polynomial of degree `D` from the seed.
#[derive(Clone, Debug, PartialEq)]
pub enum PolySpec {
    Explicit(Poly),
    Random { degree: usize },
}

impl PolySpec {
    fn resolve(&self, seed: u64, stream: u64) -> Poly {
        match self {
            PolySpec::Explicit(p) => p.clone(),
            // distinct streams keep kernel and perturbation independent
            PolySpec::Random { degree } => {
                rng::random_poly(&mut rng::seeded(seed.wrapping_add(stream)), *degree)
            }
        }
    }
}

fn parse_complex(s: &str) -> Result<C64, ConfigError> {
    let s = s.trim();
    let num = |t: &str| {
        t.trim()
            .parse::<f64>()
            .ok()
            .filter(|x| x.is_finite())
            .ok_or_else(|| bad(format!("invalid coefficient {s:?}")))
    };
    match s.split_once(':') {
        Some((re, im)) => Ok(C64::new(num(re)?, num(im)?)),
        None => Ok(C64::new(num(s)?, 0.0)),
    }
}

impl FromStr for PolySpec {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, ConfigError> {
        if let Some(d) = s.trim().strip_prefix("random:") {
            let degree = d
                .trim()
                .parse()
                .map_err(|_| bad(format!("invalid random degree {d:?}")))?;
            return Ok(PolySpec::Random { degree });
        }
        let coeffs = s
            .split(',')
            .map(parse_complex)
            .collect::<Result<Vec<_>, _>>()?;
        Ok(PolySpec::Explicit(Poly::new(coeffs)))
    }
}

impl<'de> Deserialize<'de> for PolySpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Pairs(Poly),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Pairs(p) => Ok(PolySpec::Explicit(p)),
            Raw::Text(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// Config file contents; every field may instead come from a flag.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub kind: Option<Kind>,
    pub p: Option<f64>,
    pub kernel: Option<PolySpec>,
    pub degrees: Option<Vec<i64>>,
    pub epsilons: Option<Vec<f64>>,
    pub perturbation: Option<PolySpec>,
    pub radii: Option<Vec<f64>>,
    pub seed: Option<u64>,
    pub multistart: Option<usize>,
    pub output_path: Option<PathBuf>,
    pub format: Option<Format>,
    pub timing: Option<bool>,
}

impl ConfigFile {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        serde_json::from_str(text).map_err(|e| bad(format!("config file: {e}")))
    }

    /// Fields set in `other` win.
    pub fn overridden_by(self, other: ConfigFile) -> ConfigFile {
        ConfigFile {
            kind: other.kind.or(self.kind),
            p: other.p.or(self.p),
            kernel: other.kernel.or(self.kernel),
            degrees: other.degrees.or(self.degrees),
            epsilons: other.epsilons.or(self.epsilons),
            perturbation: other.perturbation.or(self.perturbation),
            radii: other.radii.or(self.radii),
            seed: other.seed.or(self.seed),
            multistart: other.multistart.or(self.multistart),
            output_path: other.output_path.or(self.output_path),
            format: other.format.or(self.format),
            timing: other.timing.or(self.timing),
        }
    }
}

/// A validated experiment.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub kind: Kind,
    pub p: f64,
    pub kernel: Poly,
    pub degrees: Vec<usize>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub epsilons: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub perturbation: Option<Poly>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub radii: Vec<f64>,
    pub seed: u64,
    pub multistart: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output_path: Option<PathBuf>,
    pub format: Format,
    #[serde(skip)]
    pub timing: bool,
}

impl ExperimentConfig {
    pub fn exponent(&self) -> Exponent {
        Exponent::new(self.p).expect("validated")
    }

    /// The single degree used by the perturbation experiments.
    pub fn fixed_degree(&self) -> usize {
        self.degrees[0]
    }

    pub fn from_file(file: ConfigFile) -> Result<Self, ConfigError> {
        let kind = file.kind.ok_or_else(|| bad("experiment kind is required"))?;
        let p = file.p.ok_or_else(|| bad("--p is required"))?;
        if !(p.is_finite() && p > 1.0) {
            return Err(bad(format!("p must satisfy 1 < p < ∞, got {p}")));
        }
        let seed = file.seed.unwrap_or(0);
        let kernel = file
            .kernel
            .ok_or_else(|| bad("--kernel is required"))?
            .resolve(seed, 0);
        if kernel.is_zero() {
            return Err(bad("kernel must be nonzero"));
        }

        let degrees: Vec<usize> = match file.degrees {
            Some(d) => d
                .into_iter()
                .map(|n| usize::try_from(n).map_err(|_| bad(format!("negative degree {n}"))))
                .collect::<Result<_, _>>()?,
            None if kind == Kind::Converge => DEFAULT_SWEEP_DEGREES.to_vec(),
            None => vec![DEFAULT_DEGREE],
        };
        if degrees.is_empty() {
            return Err(bad("degrees must be nonempty"));
        }
        if degrees.windows(2).any(|w| w[0] >= w[1]) {
            return Err(bad("degrees must be strictly increasing"));
        }
        if kind.is_perturbation() && degrees.len() != 1 {
            return Err(bad(format!("{kind} runs at a single fixed degree")));
        }

        let epsilons = if kind.is_perturbation() {
            let e = file.epsilons.unwrap_or_else(|| DEFAULT_EPSILONS.to_vec());
            if e.is_empty() {
                return Err(bad("epsilons must be nonempty"));
            }
            if e.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
                return Err(bad("epsilons must be finite and nonnegative"));
            }
            if e.windows(2).any(|w| w[0] <= w[1]) {
                return Err(bad("epsilons must be strictly decreasing"));
            }
            e
        } else {
            Vec::new()
        };

        let perturbation = if kind.is_perturbation() {
            let n = degrees[0];
            let h = file
                .perturbation
                .unwrap_or(PolySpec::Random { degree: n })
                .resolve(seed, 1);
            if h.is_zero() {
                return Err(bad("perturbation must be nonzero"));
            }
            Some(h)
        } else {
            None
        };

        let radii = if kind == Kind::Ryabykh {
            let r = file.radii.unwrap_or_else(|| DEFAULT_RADII.to_vec());
            if r.is_empty() || r.iter().any(|x| !(*x > 0.0 && *x <= 1.0)) {
                return Err(bad("radii must lie in (0, 1]"));
            }
            r
        } else {
            Vec::new()
        };

        let multistart = file.multistart.unwrap_or(1);
        if multistart < 1 {
            return Err(bad("multistart must be at least 1"));
        }

        Ok(ExperimentConfig {
            kind,
            p,
            kernel,
            degrees,
            epsilons,
            perturbation,
            radii,
            seed,
            multistart,
            output_path: file.output_path,
            format: file.format.unwrap_or(kind.default_format()),
            timing: file.timing.unwrap_or(false),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn file(kind: Kind) -> ConfigFile {
        ConfigFile {
            kind: Some(kind),
            p: Some(2.0),
            kernel: Some("0,1".parse().unwrap()),
            ..Default::default()
        }
    }

    #[test]
    fn kernel_shorthand() {
        let PolySpec::Explicit(p) = "1:0.5, 0,-2:1".parse().unwrap() else {
            panic!()
        };
        assert_eq!(
            p.coeffs(),
            &[C64::new(1.0, 0.5), C64::new(0.0, 0.0), C64::new(-2.0, 1.0)]
        );
        assert!("1,x".parse::<PolySpec>().is_err());
        assert!("1,".parse::<PolySpec>().is_err());
        assert_eq!("random:3".parse::<PolySpec>().unwrap(), PolySpec::Random { degree: 3 });
    }

    #[test]
    fn defaults_per_kind() {
        let c = ExperimentConfig::from_file(file(Kind::Converge)).unwrap();
        assert_eq!(c.degrees, DEFAULT_SWEEP_DEGREES);
        assert_eq!(c.format, Format::Csv);
        let c = ExperimentConfig::from_file(file(Kind::Solve)).unwrap();
        assert_eq!(c.degrees, [DEFAULT_DEGREE]);
        assert_eq!(c.format, Format::Json);
        let c = ExperimentConfig::from_file(file(Kind::PerturbFunctional)).unwrap();
        assert_eq!(c.epsilons, DEFAULT_EPSILONS);
        let h = c.perturbation.unwrap();
        assert_eq!(h.degree(), Some(DEFAULT_DEGREE));
        let again = ExperimentConfig::from_file(file(Kind::PerturbFunctional)).unwrap();
        assert_eq!(again.perturbation.unwrap(), h);
    }

    #[test]
    fn invalid_configs() {
        let check = |f: ConfigFile| ExperimentConfig::from_file(f).is_err();
        assert!(check(ConfigFile { p: Some(1.0), ..file(Kind::Solve) }));
        assert!(check(ConfigFile { p: Some(f64::INFINITY), ..file(Kind::Solve) }));
        assert!(check(ConfigFile { degrees: Some(vec![2, 2]), ..file(Kind::Solve) }));
        assert!(check(ConfigFile { degrees: Some(vec![4, 2]), ..file(Kind::Solve) }));
        assert!(check(ConfigFile { degrees: Some(vec![-1]), ..file(Kind::Solve) }));
        assert!(check(ConfigFile { kernel: Some("0,0".parse().unwrap()), ..file(Kind::Solve) }));
        assert!(check(ConfigFile {
            epsilons: Some(vec![1e-2, 1e-1]),
            ..file(Kind::PerturbElement)
        }));
        assert!(check(ConfigFile {
            degrees: Some(vec![2, 4]),
            ..file(Kind::PerturbElement)
        }));
        assert!(check(ConfigFile { radii: Some(vec![1.5]), ..file(Kind::Ryabykh) }));
        assert!(check(ConfigFile { kind: None, ..file(Kind::Solve) }));
    }

    #[test]
    fn config_file_json() {
        let f = ConfigFile::from_json(
            r#"{"kind":"perturb-functional","p":4,"kernel":[[1,0],[1,0]],
                "perturbation":"0,0,1","degrees":[8],"epsilons":[0.1,0.01,0]}"#,
        )
        .unwrap();
        let c = ExperimentConfig::from_file(f).unwrap();
        assert_eq!(c.kind, Kind::PerturbFunctional);
        assert_eq!(c.kernel, Poly::from_real(&[1.0, 1.0]));
        assert_eq!(c.perturbation, Some(Poly::from_real(&[0.0, 0.0, 1.0])));
        assert!(ConfigFile::from_json(r#"{"kind":"solve","bogus":1}"#).is_err());
    }

    #[test]
    fn flags_override_file() {
        let base = file(Kind::Solve);
        let flags = ConfigFile { p: Some(4.0), ..Default::default() };
        let merged = base.overridden_by(flags);
        assert_eq!(merged.p, Some(4.0));
        assert_eq!(merged.kind, Some(Kind::Solve));
    }
}
