//! Initial configurations: site positions and species.
//!
//! Sites are numbered from 1 in left-to-right order. On the right half-line
//! site `i` sits at `x_i > origin`; a two-sided configuration with `n` sites
//! per side holds `2n + 1` sites with site `n + 1` at the origin.

use std::fmt;
use std::str::FromStr;

use rand::distributions::Open01;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::law::ClusterLaw;
use crate::rng::{trial_stream, SALT_CENTER, SALT_CONFIG, SALT_LEFT};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("site window {j}..={k} is invalid for a configuration of {n} sites")]
    Index { j: usize, k: usize, n: usize },
    #[error("positions must be strictly increasing (site {0})")]
    NotIncreasing(usize),
    #[error("site {0} is not to the right of the origin")]
    LeftOfOrigin(usize),
    #[error("{0} positions but {1} species")]
    Length(usize, usize),
    #[error("fixture line {line}: {reason}")]
    Fixture { line: usize, reason: String },
    #[error("invalid parameter: {0}")]
    Parameter(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Species {
    LeftArrow,
    RightArrow,
    /// A cluster with the given number of blockades; zero marks a vacant site.
    Cluster(u32),
}

impl Species {
    pub fn velocity(self) -> i8 {
        match self {
            Species::LeftArrow => -1,
            Species::RightArrow => 1,
            Species::Cluster(_) => 0,
        }
    }

    pub fn is_arrow(self) -> bool {
        !matches!(self, Species::Cluster(_))
    }

    /// Whether the site takes part in the dynamics at all.
    pub fn is_live(self) -> bool {
        !matches!(self, Species::Cluster(0))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    RightHalfLine,
    TwoSided,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SpacingLaw {
    Exponential { rate: f64 },
    Uniform { lo: f64, hi: f64 },
}

impl Default for SpacingLaw {
    fn default() -> Self {
        SpacingLaw::Exponential { rate: 1.0 }
    }
}

impl SpacingLaw {
    pub fn validate(&self) -> Result<(), ConfigError> {
        match *self {
            SpacingLaw::Exponential { rate } if rate > 0.0 && rate.is_finite() => Ok(()),
            SpacingLaw::Uniform { lo, hi } if lo >= 0.0 && hi > lo && hi.is_finite() => Ok(()),
            other => Err(ConfigError::Parameter(format!("bad spacing law {other:?}"))),
        }
    }

    /// Draws a strictly positive gap.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.sample(Open01);
        match *self {
            SpacingLaw::Exponential { rate } => -u.ln() / rate,
            SpacingLaw::Uniform { lo, hi } => lo + (hi - lo) * u,
        }
    }
}

impl fmt::Display for SpacingLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            SpacingLaw::Exponential { rate } if rate == 1.0 => write!(f, "exp"),
            SpacingLaw::Exponential { rate } => write!(f, "exp:{rate}"),
            SpacingLaw::Uniform { lo, hi } if lo == 0.0 && hi == 1.0 => write!(f, "uniform"),
            SpacingLaw::Uniform { lo, hi } => write!(f, "uniform:{lo},{hi}"),
        }
    }
}

impl FromStr for SpacingLaw {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || ConfigError::Parameter(format!("cannot parse spacing law {s:?}"));
        let num = |t: &str| t.trim().parse::<f64>().map_err(|_| bad());
        let (kind, args) = match s.trim().split_once(':') {
            Some((k, a)) => (k, Some(a)),
            None => (s.trim(), None),
        };
        let law = match (kind, args) {
            ("exp", None) => SpacingLaw::Exponential { rate: 1.0 },
            ("exp", Some(a)) => SpacingLaw::Exponential { rate: num(a)? },
            ("uniform", None) => SpacingLaw::Uniform { lo: 0.0, hi: 1.0 },
            ("uniform", Some(a)) => {
                let (lo, hi) = a.split_once(',').ok_or_else(bad)?;
                SpacingLaw::Uniform { lo: num(lo)?, hi: num(hi)? }
            }
            _ => return Err(bad()),
        };
        law.validate()?;
        Ok(law)
    }
}

/// An ordered particle configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct Configuration {
    positions: Vec<f64>,
    species: Vec<Species>,
    origin: f64,
    side: Side,
}

impl Configuration {
    pub fn new(positions: Vec<f64>, species: Vec<Species>, origin: f64, side: Side) -> Result<Self, ConfigError> {
        if positions.len() != species.len() {
            return Err(ConfigError::Length(positions.len(), species.len()));
        }
        for (i, w) in positions.windows(2).enumerate() {
            if !(w[1] > w[0]) {
                return Err(ConfigError::NotIncreasing(i + 2));
            }
        }
        if side == Side::RightHalfLine {
            if let Some(i) = positions.iter().position(|x| !(*x > origin)) {
                return Err(ConfigError::LeftOfOrigin(i + 1));
            }
        }
        Ok(Self { positions, species, origin, side })
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn origin(&self) -> f64 {
        self.origin
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    pub fn species(&self) -> &[Species] {
        &self.species
    }

    /// Position of 1-based `site`.
    pub fn position(&self, site: usize) -> f64 {
        self.positions[site - 1]
    }

    /// Species of 1-based `site`, with its initial multiplicity.
    pub fn species_at(&self, site: usize) -> Species {
        self.species[site - 1]
    }

    /// The site sitting exactly at the origin, if any.
    pub fn center_site(&self) -> Option<usize> {
        self.positions
            .binary_search_by(|x| x.total_cmp(&self.origin))
            .ok()
            .map(|i| i + 1)
    }

    /// Restriction to sites `j..=k` (1-based, inclusive). Positions, origin
    /// and side are kept as they are.
    pub fn sub_config(&self, j: usize, k: usize) -> Result<Configuration, ConfigError> {
        if j == 0 || j > k || k > self.len() {
            return Err(ConfigError::Index { j, k, n: self.len() });
        }
        Ok(Configuration {
            positions: self.positions[j - 1..k].to_vec(),
            species: self.species[j - 1..k].to_vec(),
            origin: self.origin,
            side: self.side,
        })
    }

    pub fn count_arrows(&self) -> usize {
        self.species.iter().filter(|s| s.is_arrow()).count()
    }

    /// Total number of blockade units over all clusters.
    pub fn blockade_units(&self) -> u64 {
        self.species
            .iter()
            .map(|s| match s {
                Species::Cluster(m) => u64::from(*m),
                _ => 0,
            })
            .sum()
    }

    /// Writes the line-oriented fixture format read by [`Configuration::from_fixture`].
    pub fn to_fixture(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("@origin {:?}\n", self.origin));
        out.push_str(match self.side {
            Side::RightHalfLine => "@side right\n",
            Side::TwoSided => "@side two\n",
        });
        for (x, s) in self.positions.iter().zip(&self.species) {
            match s {
                Species::LeftArrow => out.push_str(&format!("{x:?} L\n")),
                Species::RightArrow => out.push_str(&format!("{x:?} R\n")),
                Species::Cluster(m) => out.push_str(&format!("{x:?} C {m}\n")),
            }
        }
        out
    }

    /// Parses a fixture: one site per line, `position species [multiplicity]`
    /// where species is `L`, `R` or `C`. Blank lines and `#` comments are
    /// ignored; `@origin x` and `@side right|two` set the frame (defaults 0
    /// and right).
    pub fn from_fixture(text: &str) -> Result<Configuration, ConfigError> {
        let mut origin = 0.0;
        let mut side = Side::RightHalfLine;
        let mut positions = Vec::new();
        let mut species = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let fail = |reason: &str| ConfigError::Fixture { line: line_no, reason: reason.to_string() };
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let tokens: Vec<&str> = line.split_whitespace().collect();
            match tokens.as_slice() {
                ["@origin", x] => origin = x.parse().map_err(|_| fail("bad origin"))?,
                ["@side", "right"] => side = Side::RightHalfLine,
                ["@side", "two"] => side = Side::TwoSided,
                [x, kind, rest @ ..] if !x.starts_with('@') => {
                    let pos: f64 = x.parse().map_err(|_| fail("bad position"))?;
                    if !pos.is_finite() {
                        return Err(fail("position is not finite"));
                    }
                    let sp = match (*kind, rest) {
                        ("L", []) => Species::LeftArrow,
                        ("R", []) => Species::RightArrow,
                        ("C", [m]) => Species::Cluster(m.parse().map_err(|_| fail("bad multiplicity"))?),
                        ("C", []) => Species::Cluster(1),
                        _ => return Err(fail("expected L, R or C [multiplicity]")),
                    };
                    positions.push(pos);
                    species.push(sp);
                }
                _ => return Err(fail("unrecognized line")),
            }
        }
        Configuration::new(positions, species, origin, side)
    }
}

/// Everything needed to generate the configurations of an experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentParams {
    pub p: f64,
    pub law: ClusterLaw,
    pub spacing: SpacingLaw,
    /// Sites on the right half-line, or per side for two-sided windows.
    pub n: usize,
    pub seed: u64,
    pub side: Side,
}

impl ExperimentParams {
    pub fn new(p: f64, law: ClusterLaw, n: usize, seed: u64) -> Self {
        Self { p, law, spacing: SpacingLaw::default(), n, seed, side: Side::RightHalfLine }
    }

    pub fn with_spacing(mut self, spacing: SpacingLaw) -> Self {
        self.spacing = spacing;
        self
    }

    pub fn with_side(mut self, side: Side) -> Self {
        self.side = side;
        self
    }

    pub fn with_n(mut self, n: usize) -> Self {
        self.n = n;
        self
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(0.0..=1.0).contains(&self.p) {
            return Err(ConfigError::Parameter(format!("p = {} is outside [0, 1]", self.p)));
        }
        if self.n == 0 {
            return Err(ConfigError::Parameter("n must be positive".into()));
        }
        self.spacing.validate()
    }
}

/// Draws the species of one site: a cluster with probability `p`, otherwise
/// a left or right arrow with equal probability.
pub fn sample_species<R: Rng + ?Sized>(p: f64, law: &ClusterLaw, rng: &mut R) -> Species {
    let u: f64 = rng.gen();
    if u < p {
        Species::Cluster(law.sample(rng))
    } else if u < p + 0.5 * (1.0 - p) {
        Species::LeftArrow
    } else {
        Species::RightArrow
    }
}

/// One half of the line, seen from the origin.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HalfLine {
    Right,
    Left,
}

/// Generates `params.n` sites of one half-line of trial `trial`, oriented as
/// a right-half-line configuration. The left half comes back mirrored:
/// positions negated and arrow directions swapped, which maps its dynamics
/// onto the right half-line exactly.
///
/// Each half draws from its own stream, so the right half of a two-sided
/// trial is the same realization as the one-sided trial with the same index.
pub fn sample_half_line(params: &ExperimentParams, trial: u64, half: HalfLine) -> Configuration {
    let salt = match half {
        HalfLine::Right => SALT_CONFIG,
        HalfLine::Left => SALT_LEFT,
    };
    let mut rng = trial_stream(params.seed, salt, trial);
    let mut positions = Vec::with_capacity(params.n);
    let mut species = Vec::with_capacity(params.n);
    let mut x = 0.0;
    for _ in 0..params.n {
        x += params.spacing.sample(&mut rng);
        positions.push(x);
        species.push(sample_species(params.p, &params.law, &mut rng));
    }
    Configuration { positions, species, origin: 0.0, side: Side::RightHalfLine }
}

/// Draws the species of the site at the origin of a two-sided trial.
pub fn sample_center(params: &ExperimentParams, trial: u64) -> Species {
    let mut rng = trial_stream(params.seed, SALT_CENTER, trial);
    sample_species(params.p, &params.law, &mut rng)
}

impl Configuration {
    /// Reflection through the origin: positions negated, arrows swapped.
    pub fn mirrored(&self) -> Configuration {
        let positions = self.positions.iter().rev().map(|x| 2.0 * self.origin - x).collect();
        let species = self
            .species
            .iter()
            .rev()
            .map(|s| match s {
                Species::LeftArrow => Species::RightArrow,
                Species::RightArrow => Species::LeftArrow,
                c => *c,
            })
            .collect();
        let side = match self.side {
            Side::RightHalfLine => Side::TwoSided,
            Side::TwoSided => {
                if self.positions.last().is_some_and(|x| *x < self.origin) {
                    Side::RightHalfLine
                } else {
                    Side::TwoSided
                }
            }
        };
        Configuration { positions, species, origin: self.origin, side }
    }
}

/// Generates the configuration of trial `trial`.
///
/// Sites are drawn in order of distance from the origin, so the
/// configuration for a smaller `n` is always the central part of the one for
/// a larger `n`.
pub fn sample_config(params: &ExperimentParams, trial: u64) -> Configuration {
    let right = sample_half_line(params, trial, HalfLine::Right);
    match params.side {
        Side::RightHalfLine => right,
        Side::TwoSided => {
            let left = sample_half_line(params, trial, HalfLine::Left);
            Configuration::two_sided(&left, sample_center(params, trial), &right)
        }
    }
}

impl Configuration {
    /// Joins two half-lines around a site at the origin. `left` is given in
    /// right-half-line orientation, as returned by [`sample_half_line`].
    pub fn two_sided(left: &Configuration, center: Species, right: &Configuration) -> Configuration {
        let left = left.mirrored();
        let mut positions = left.positions;
        let mut species = left.species;
        positions.push(0.0);
        species.push(center);
        positions.extend_from_slice(&right.positions);
        species.extend_from_slice(&right.species);
        Configuration { positions, species, origin: 0.0, side: Side::TwoSided }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(p: f64, n: usize) -> ExperimentParams {
        ExperimentParams::new(p, ClusterLaw::delta(1), n, 42)
    }

    #[test]
    fn all_clusters_when_p_is_one() {
        let c = sample_config(&params(1.0, 1000), 0);
        assert!(c.species().iter().all(|s| *s == Species::Cluster(1)));
    }

    #[test]
    fn arrow_directions_are_balanced_when_p_is_zero() {
        let n = 1_000_000;
        let c = sample_config(&params(0.0, n), 3);
        let left = c.species().iter().filter(|s| **s == Species::LeftArrow).count();
        assert_eq!(c.count_arrows(), n);
        let frac = left as f64 / n as f64;
        assert!((frac - 0.5).abs() < 3.0 * (0.25 / n as f64).sqrt(), "{frac}");
    }

    #[test]
    fn cluster_fraction_matches_p() {
        let n = 1_000_000;
        let c = sample_config(&params(0.25, n), 11);
        let frac = (n - c.count_arrows()) as f64 / n as f64;
        assert!((frac - 0.25).abs() < 3.0 * (0.25 * 0.75 / n as f64).sqrt(), "{frac}");
    }

    #[test]
    fn generation_is_deterministic() {
        let p = params(0.4, 500).with_spacing(SpacingLaw::Uniform { lo: 0.0, hi: 1.0 });
        assert_eq!(sample_config(&p, 9), sample_config(&p, 9));
        assert_ne!(sample_config(&p, 9), sample_config(&p, 10));
    }

    #[test]
    fn smaller_windows_are_prefixes() {
        let big = sample_config(&params(0.3, 400), 5);
        let small = sample_config(&params(0.3, 150), 5);
        assert_eq!(big.sub_config(1, 150).unwrap(), small);

        let two = params(0.3, 100).with_side(Side::TwoSided);
        let big = sample_config(&two, 2);
        let small = sample_config(&two.clone().with_n(40), 2);
        assert_eq!(big.sub_config(61, 141).unwrap(), small);
        assert_eq!(big.center_site(), Some(101));
    }

    #[test]
    fn two_sided_halves_match_half_line_streams() {
        let two = params(0.4, 50).with_side(Side::TwoSided);
        let c = sample_config(&two, 7);
        let right = sample_half_line(&two, 7, HalfLine::Right);
        let left = sample_half_line(&two, 7, HalfLine::Left);
        assert_eq!(c.sub_config(52, 101).unwrap().positions(), right.positions());
        assert_eq!(c.sub_config(52, 101).unwrap().species(), right.species());
        assert_eq!(right, sample_config(&two.clone().with_side(Side::RightHalfLine), 7));
        assert_eq!(c.sub_config(1, 50).unwrap().mirrored(), left);
        assert_eq!(left.mirrored().mirrored(), left);
    }

    #[test]
    fn sub_config_bounds() {
        let c = sample_config(&params(0.5, 10), 0);
        assert_eq!(c.sub_config(1, 10).unwrap(), c);
        assert_eq!(c.sub_config(2, 2).unwrap().len(), 1);
        assert_eq!(c.sub_config(2, 2).unwrap().position(1), c.position(2));
        assert!(c.sub_config(0, 3).is_err());
        assert!(c.sub_config(4, 3).is_err());
        assert!(c.sub_config(1, 11).is_err());
    }

    #[test]
    fn spacings_are_positive_under_both_laws() {
        for spacing in [SpacingLaw::default(), SpacingLaw::Uniform { lo: 0.0, hi: 1.0 }] {
            let c = sample_config(&params(0.5, 10_000).with_spacing(spacing), 1);
            assert!(c.positions()[0] > 0.0);
            assert!(c.positions().windows(2).all(|w| w[1] > w[0]));
        }
    }

    #[test]
    fn constructor_validates() {
        use Species::*;
        assert!(Configuration::new(vec![1.0, 1.0], vec![LeftArrow, RightArrow], 0.0, Side::RightHalfLine).is_err());
        assert!(Configuration::new(vec![-1.0, 1.0], vec![LeftArrow, RightArrow], 0.0, Side::RightHalfLine).is_err());
        assert!(Configuration::new(vec![-1.0, 1.0], vec![LeftArrow, RightArrow], 0.0, Side::TwoSided).is_ok());
        assert!(Configuration::new(vec![1.0], vec![], 0.0, Side::TwoSided).is_err());
    }

    #[test]
    fn fixture_round_trip() {
        let c = sample_config(&params(0.5, 200).with_side(Side::TwoSided), 8);
        assert_eq!(Configuration::from_fixture(&c.to_fixture()).unwrap(), c);
        let text = "# hand made\n1 R\n2.5 C 3  # a cluster\n\n4 L\n";
        let c = Configuration::from_fixture(text).unwrap();
        assert_eq!(c.species(), &[Species::RightArrow, Species::Cluster(3), Species::LeftArrow]);
        assert!(Configuration::from_fixture("1 X\n").is_err());
        assert!(Configuration::from_fixture("2 L\n1 R\n").is_err());
    }

    #[test]
    fn spacing_spec_parses() {
        assert_eq!("exp".parse::<SpacingLaw>().unwrap(), SpacingLaw::Exponential { rate: 1.0 });
        assert_eq!("uniform".parse::<SpacingLaw>().unwrap(), SpacingLaw::Uniform { lo: 0.0, hi: 1.0 });
        assert_eq!("uniform:1,3".parse::<SpacingLaw>().unwrap().to_string(), "uniform:1,3");
        assert!("uniform:3,1".parse::<SpacingLaw>().is_err());
        assert!("gamma".parse::<SpacingLaw>().is_err());
    }
}
