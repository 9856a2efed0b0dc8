//! Cluster-size distributions.
//!
//! A [`ClusterLaw`] is the law of the number of blockades stacked at a
//! cluster site. It exposes the probability generating function
//! `f(t) = E[t^X]` with its first two derivatives, the mean and variance,
//! and an inverse-CDF sampler.
//!
//! Laws are written as short specs on the command line and in config files:
//! `delta:k`, `geom:beta`, `twopoint:k`, `pmf:w0,w1,...`, `powerlaw:alpha,cutoff`.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Tolerated total-mass error for a custom PMF before it is renormalized.
pub const PMF_RENORMALIZE_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LawError {
    #[error("argument t = {0} is outside [0, 1]")]
    Domain(f64),
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("cannot parse law spec {spec:?}: {reason}")]
    Parse { spec: String, reason: String },
}

/// The parametric family a law was built from.
#[derive(Debug, Clone, PartialEq)]
pub enum LawFamily {
    /// Every cluster has exactly `k` blockades.
    Delta(u32),
    /// `P(X = k) = (1 - beta)^(k-1) beta` for `k >= 1`.
    Geometric(f64),
    /// Mass `(k-1)/k` at 0 and `1/k` at `k`.
    TwoPoint(u32),
    /// Explicit weights `w0, w1, ...`.
    CustomPmf(Vec<f64>),
    /// `P(X = k) ∝ k^-alpha` for `1 <= k <= cutoff`.
    PowerLaw { alpha: f64, cutoff: u32 },
}

/// An immutable cluster-size distribution.
///
/// Finite-support families keep their PMF and CDF tables, so evaluation and
/// sampling never re-derive them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct ClusterLaw {
    family: LawFamily,
    pmf: Vec<f64>,
    cdf: Vec<f64>,
}

/// Mean and variance of a law. The variance is `f64::INFINITY` when the
/// second moment diverges.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub mean: f64,
    pub variance: f64,
}

impl ClusterLaw {
    pub fn delta(k: u32) -> Self {
        let mut pmf = vec![0.0; k as usize + 1];
        pmf[k as usize] = 1.0;
        Self::from_table(LawFamily::Delta(k), pmf)
    }

    pub fn geometric(beta: f64) -> Result<Self, LawError> {
        if !(beta > 0.0 && beta < 1.0) {
            return Err(LawError::Parameter(format!(
                "geometric parameter must lie in (0, 1), got {beta}"
            )));
        }
        Ok(Self {
            family: LawFamily::Geometric(beta),
            pmf: Vec::new(),
            cdf: Vec::new(),
        })
    }

    pub fn two_point(k: u32) -> Result<Self, LawError> {
        if k == 0 {
            return Err(LawError::Parameter("two-point size must be >= 1".into()));
        }
        let kf = f64::from(k);
        let mut pmf = vec![0.0; k as usize + 1];
        pmf[0] += (kf - 1.0) / kf;
        pmf[k as usize] += 1.0 / kf;
        Ok(Self::from_table(LawFamily::TwoPoint(k), pmf))
    }

    /// Builds a law from explicit weights. Weights summing to within
    /// [`PMF_RENORMALIZE_TOL`] of one are renormalized, anything else is
    /// rejected.
    pub fn custom(weights: Vec<f64>) -> Result<Self, LawError> {
        if weights.is_empty() {
            return Err(LawError::Parameter("empty pmf".into()));
        }
        if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
            return Err(LawError::Parameter(format!("pmf weight {w} is not a nonnegative number")));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > PMF_RENORMALIZE_TOL {
            return Err(LawError::Parameter(format!("pmf weights sum to {total}, not 1")));
        }
        let pmf: Vec<f64> = weights.iter().map(|w| w / total).collect();
        Ok(Self::from_table(LawFamily::CustomPmf(weights), pmf))
    }

    pub fn power_law(alpha: f64, cutoff: u32) -> Result<Self, LawError> {
        if !(alpha > 1.0) || !alpha.is_finite() {
            return Err(LawError::Parameter(format!("power-law exponent must exceed 1, got {alpha}")));
        }
        if cutoff == 0 {
            return Err(LawError::Parameter("power-law cutoff must be >= 1".into()));
        }
        let mut pmf = vec![0.0; cutoff as usize + 1];
        for (k, w) in pmf.iter_mut().enumerate().skip(1) {
            *w = (k as f64).powf(-alpha);
        }
        let z: f64 = pmf.iter().sum();
        pmf.iter_mut().for_each(|w| *w /= z);
        Ok(Self::from_table(LawFamily::PowerLaw { alpha, cutoff }, pmf))
    }

    fn from_table(family: LawFamily, pmf: Vec<f64>) -> Self {
        let mut acc = 0.0;
        let mut cdf: Vec<f64> = pmf
            .iter()
            .map(|w| {
                acc += w;
                acc
            })
            .collect();
        if let Some(last) = cdf.last_mut() {
            *last = 1.0;
        }
        Self { family, pmf, cdf }
    }

    pub fn family(&self) -> &LawFamily {
        &self.family
    }

    /// `P(X = k)`.
    pub fn pmf(&self, k: u32) -> f64 {
        match self.family {
            LawFamily::Geometric(beta) if k >= 1 => (1.0 - beta).powi(k as i32 - 1) * beta,
            LawFamily::Geometric(_) => 0.0,
            _ => self.pmf.get(k as usize).copied().unwrap_or(0.0),
        }
    }

    /// `P(X > k)`.
    pub fn tail(&self, k: u32) -> f64 {
        match self.family {
            LawFamily::Geometric(beta) => (1.0 - beta).powi(k as i32),
            _ => self.pmf.iter().skip(k as usize + 1).sum(),
        }
    }

    /// Largest size with positive mass, `None` for unbounded support.
    pub fn max_size(&self) -> Option<u32> {
        match self.family {
            LawFamily::Geometric(_) => None,
            _ => self.pmf.iter().rposition(|w| *w > 0.0).map(|k| k as u32),
        }
    }

    fn check_domain(t: f64) -> Result<(), LawError> {
        if (0.0..=1.0).contains(&t) {
            Ok(())
        } else {
            Err(LawError::Domain(t))
        }
    }

    /// Probability generating function `f(t) = Σ μ_k t^k`.
    pub fn pgf(&self, t: f64) -> Result<f64, LawError> {
        Self::check_domain(t)?;
        Ok(match self.family {
            LawFamily::Delta(k) => t.powi(k as i32),
            LawFamily::Geometric(beta) => beta * t / (1.0 - (1.0 - beta) * t),
            LawFamily::TwoPoint(k) => {
                let kf = f64::from(k);
                (kf - 1.0) / kf + t.powi(k as i32) / kf
            }
            _ => self.table_sum(t, 0),
        })
    }

    /// `f'(t)`.
    pub fn pgf_d1(&self, t: f64) -> Result<f64, LawError> {
        Self::check_domain(t)?;
        Ok(match self.family {
            LawFamily::Delta(0) => 0.0,
            LawFamily::Delta(k) => f64::from(k) * t.powi(k as i32 - 1),
            LawFamily::Geometric(beta) => beta / (1.0 - (1.0 - beta) * t).powi(2),
            LawFamily::TwoPoint(k) => t.powi(k as i32 - 1),
            _ => self.table_sum(t, 1),
        })
    }

    /// `f''(t)`.
    pub fn pgf_d2(&self, t: f64) -> Result<f64, LawError> {
        Self::check_domain(t)?;
        Ok(match self.family {
            LawFamily::Delta(k) | LawFamily::TwoPoint(k) if k < 2 => 0.0,
            LawFamily::Delta(k) => {
                let kf = f64::from(k);
                kf * (kf - 1.0) * t.powi(k as i32 - 2)
            }
            LawFamily::TwoPoint(k) => (f64::from(k) - 1.0) * t.powi(k as i32 - 2),
            LawFamily::Geometric(beta) => {
                2.0 * beta * (1.0 - beta) / (1.0 - (1.0 - beta) * t).powi(3)
            }
            _ => self.table_sum(t, 2),
        })
    }

    /// `Σ_k k(k-1)..(k-order+1) μ_k t^(k-order)` over the PMF table.
    fn table_sum(&self, t: f64, order: u32) -> f64 {
        self.pmf
            .iter()
            .enumerate()
            .skip(order as usize)
            .filter(|(_, w)| **w > 0.0)
            .map(|(k, w)| {
                let falling: f64 = (0..order).map(|i| (k as u32 - i) as f64).product();
                falling * w * t.powi((k as u32 - order) as i32)
            })
            .sum()
    }

    pub fn moments(&self) -> Moments {
        let mean = self.pgf_d1(1.0).expect("t = 1 is in the domain");
        let d2 = self.pgf_d2(1.0).expect("t = 1 is in the domain");
        let variance = if d2.is_infinite() { f64::INFINITY } else { d2 + mean - mean * mean };
        Moments { mean, variance }
    }

    /// Draws one cluster size.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u32 {
        match self.family {
            LawFamily::Delta(k) => k,
            LawFamily::Geometric(beta) => {
                // U in (0, 1] so ln U is finite.
                let u: f64 = 1.0 - rng.gen::<f64>();
                let k = 1.0 + (u.ln() / (1.0 - beta).ln()).floor();
                if k >= f64::from(u32::MAX) { u32::MAX } else { k as u32 }
            }
            _ => {
                let u: f64 = rng.gen();
                let idx = self.cdf.partition_point(|c| *c <= u);
                idx.min(self.cdf.len() - 1) as u32
            }
        }
    }

    /// Draws a size conditioned on being at least one.
    pub fn sample_positive<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<u32, LawError> {
        if self.pmf(0) >= 1.0 {
            return Err(LawError::Parameter("law has no mass on positive sizes".into()));
        }
        loop {
            let k = self.sample(rng);
            if k > 0 {
                return Ok(k);
            }
        }
    }
}

impl fmt::Display for ClusterLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.family {
            LawFamily::Delta(k) => write!(f, "delta:{k}"),
            LawFamily::Geometric(beta) => write!(f, "geom:{beta}"),
            LawFamily::TwoPoint(k) => write!(f, "twopoint:{k}"),
            LawFamily::CustomPmf(w) => {
                let parts: Vec<String> = w.iter().map(|x| x.to_string()).collect();
                write!(f, "pmf:{}", parts.join(","))
            }
            LawFamily::PowerLaw { alpha, cutoff } => write!(f, "powerlaw:{alpha},{cutoff}"),
        }
    }
}

impl FromStr for ClusterLaw {
    type Err = LawError;

    fn from_str(spec: &str) -> Result<Self, Self::Err> {
        let fail = |reason: &str| LawError::Parse { spec: spec.to_string(), reason: reason.to_string() };
        let (kind, args) = spec.trim().split_once(':').ok_or_else(|| fail("expected <family>:<args>"))?;
        let num = |s: &str| s.trim().parse::<f64>().map_err(|_| fail("bad number"));
        let int = |s: &str| s.trim().parse::<u32>().map_err(|_| fail("bad integer"));
        match kind.trim() {
            "delta" => Ok(Self::delta(int(args)?)),
            "geom" => Self::geometric(num(args)?),
            "twopoint" => Self::two_point(int(args)?),
            "pmf" => Self::custom(args.split(',').map(num).collect::<Result<_, _>>()?),
            "powerlaw" => {
                let (a, c) = args.split_once(',').ok_or_else(|| fail("expected alpha,cutoff"))?;
                Self::power_law(num(a)?, int(c)?)
            }
            _ => Err(fail("unknown family")),
        }
    }
}

impl TryFrom<String> for ClusterLaw {
    type Error = LawError;
    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<ClusterLaw> for String {
    fn from(law: ClusterLaw) -> String {
        law.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn all_families() -> Vec<ClusterLaw> {
        vec![
            ClusterLaw::delta(1),
            ClusterLaw::delta(3),
            ClusterLaw::geometric(0.5).unwrap(),
            ClusterLaw::geometric(0.2).unwrap(),
            ClusterLaw::two_point(5).unwrap(),
            ClusterLaw::custom(vec![0.2, 0.3, 0.1, 0.4]).unwrap(),
            ClusterLaw::power_law(2.5, 100).unwrap(),
        ]
    }

    #[test]
    fn pgf_spot_values() {
        assert_eq!(ClusterLaw::delta(1).pgf(0.5).unwrap(), 0.5);
        let g = ClusterLaw::geometric(0.5).unwrap();
        assert!((g.pgf(0.5).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        for law in all_families() {
            assert!((law.pgf(1.0).unwrap() - 1.0).abs() < 1e-12, "{law}");
        }
    }

    #[test]
    fn pgf_rejects_outside_unit_interval() {
        let law = ClusterLaw::delta(2);
        assert_eq!(law.pgf(1.5), Err(LawError::Domain(1.5)));
        assert!(law.pgf_d1(-0.1).is_err());
        assert!(law.pgf_d2(f64::NAN).is_err());
    }

    #[test]
    fn derivative_spot_values() {
        let d1 = ClusterLaw::delta(1);
        for t in [0.0, 0.3, 1.0] {
            assert_eq!(d1.pgf_d1(t).unwrap(), 1.0);
            assert_eq!(d1.pgf_d2(t).unwrap(), 0.0);
        }
        assert!((ClusterLaw::geometric(0.5).unwrap().pgf_d1(1.0).unwrap() - 2.0).abs() < 1e-14);
        for k in [1, 2, 5, 9] {
            let law = ClusterLaw::two_point(k).unwrap();
            assert!((law.pgf_d1(1.0).unwrap() - 1.0).abs() < 1e-14);
            assert!((law.pgf_d2(1.0).unwrap() - f64::from(k - 1)).abs() < 1e-12);
        }
    }

    #[test]
    fn moments_match_known_values() {
        assert_eq!(ClusterLaw::delta(1).moments(), Moments { mean: 1.0, variance: 0.0 });
        let m = ClusterLaw::geometric(0.5).unwrap().moments();
        assert!((m.mean - 2.0).abs() < 1e-14 && (m.variance - 2.0).abs() < 1e-13);
        let m = ClusterLaw::two_point(7).unwrap().moments();
        assert!((m.mean - 1.0).abs() < 1e-14 && (m.variance - 6.0).abs() < 1e-12);
    }

    /// Second-order stencil: centered in the interior, one-sided at the ends.
    fn fd(g: impl Fn(f64) -> f64, t: f64, h: f64) -> f64 {
        if t - h < 0.0 {
            (-3.0 * g(t) + 4.0 * g(t + h) - g(t + 2.0 * h)) / (2.0 * h)
        } else if t + h > 1.0 {
            (3.0 * g(t) - 4.0 * g(t - h) + g(t - 2.0 * h)) / (2.0 * h)
        } else {
            (g(t + h) - g(t - h)) / (2.0 * h)
        }
    }

    #[test]
    fn derivatives_agree_with_finite_differences() {
        let h = 1e-5;
        for law in all_families() {
            for t in [0.0, 0.25, 0.5, 0.75, 1.0] {
                let fd1 = fd(|x| law.pgf(x).unwrap(), t, h);
                let fd2 = fd(|x| law.pgf_d1(x).unwrap(), t, h);
                let d1 = law.pgf_d1(t).unwrap();
                let d2 = law.pgf_d2(t).unwrap();
                assert!((fd1 - d1).abs() <= 1e-6 * d1.abs().max(1e-3), "{law} t={t}: {fd1} vs {d1}");
                assert!((fd2 - d2).abs() <= 1e-6 * d2.abs().max(1e-3), "{law} t={t}: {fd2} vs {d2}");
            }
        }
    }

    #[test]
    fn pgf_is_nondecreasing_and_convex() {
        for law in all_families() {
            let grid: Vec<f64> = (0..=200).map(|i| i as f64 / 200.0).collect();
            let vals: Vec<f64> = grid.iter().map(|t| law.pgf(*t).unwrap()).collect();
            for w in vals.windows(3) {
                assert!(w[1] >= w[0] - 1e-15, "{law}");
                assert!(w[2] - 2.0 * w[1] + w[0] >= -1e-12, "{law}");
            }
        }
    }

    #[test]
    fn custom_pmf_renormalizes_or_rejects() {
        let law = ClusterLaw::custom(vec![0.5, 0.5 + 5e-10]).unwrap();
        assert!((law.pmf(0) + law.pmf(1) - 1.0).abs() < 1e-15);
        assert!(ClusterLaw::custom(vec![0.5, 0.6]).is_err());
        assert!(ClusterLaw::custom(vec![1.2, -0.2]).is_err());
    }

    #[test]
    fn samples_match_moments() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 1_000_000;
        for law in all_families() {
            let draws: Vec<f64> = (0..n).map(|_| f64::from(law.sample(&mut rng))).collect();
            let mean = draws.iter().sum::<f64>() / n as f64;
            let var = draws.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            let m = law.moments();
            let se = (m.variance / n as f64).sqrt();
            assert!((mean - m.mean).abs() <= 4.0 * se + 1e-12, "{law}: mean {mean} vs {}", m.mean);
            // crude band for the variance: the fourth moment is bounded by the max size here
            let se_var = (draws.iter().map(|x| (x - mean).powi(4)).sum::<f64>() / n as f64 / n as f64).sqrt();
            assert!((var - m.variance).abs() <= 4.0 * se_var + 1e-12, "{law}: var {var} vs {}", m.variance);
        }
    }

    #[test]
    fn delta_sampler_is_constant_and_pmf_frequencies_match() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let d3 = ClusterLaw::delta(3);
        assert!((0..1000).all(|_| d3.sample(&mut rng) == 3));
        let half = ClusterLaw::custom(vec![0.5, 0.5]).unwrap();
        let n = 1_000_000;
        let zeros = (0..n).filter(|_| half.sample(&mut rng) == 0).count() as f64 / n as f64;
        assert!((zeros - 0.5).abs() < 3.0 * (0.25 / n as f64).sqrt());
    }

    #[test]
    fn spec_grammar_round_trips() {
        for s in ["delta:1", "geom:0.5", "twopoint:5", "pmf:0.25,0.5,0.25", "powerlaw:2.5,100"] {
            let law: ClusterLaw = s.parse().unwrap();
            assert_eq!(law.to_string(), s);
        }
        assert!("geom:1.5".parse::<ClusterLaw>().is_err());
        assert!("cauchy:1".parse::<ClusterLaw>().is_err());
        assert!("powerlaw:2.5".parse::<ClusterLaw>().is_err());
    }

    #[test]
    fn tail_and_pmf_are_consistent() {
        for law in all_families() {
            let head: f64 = (0..=5).map(|k| law.pmf(k)).sum();
            assert!((head + law.tail(5) - 1.0).abs() < 1e-12, "{law}");
        }
    }
}
