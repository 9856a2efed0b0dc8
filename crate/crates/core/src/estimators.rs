//! Monte Carlo estimators for `q`, `θ`, `s_k`, `r_k`, the `W` curve and the
//! arrival-distance symmetry.
//!
//! Trials run in parallel on the rayon pool. Each trial owns its random
//! streams and reduces to integer tallies, and tallies are merged by
//! addition, so a report does not depend on the number of worker threads.
//!
//! Every resolution made by an estimator is checked for survivor separation
//! and both conservation identities; results land in [`InvariantCounts`].
//! [`InvariantPolicy`] adds the more expensive per-path checks.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};
use thiserror::Error;

use crate::analytics::{self, AnalyticsError};
use crate::config::{
    sample_half_line, ConfigError, Configuration, ExperimentParams, HalfLine, Side, Species,
};
use crate::law::LawError;
use crate::resolver::{
    check_final_state, count_survivors, fate_from_records, resolve_with, CollisionKind,
    CollisionRecord, CollisionSink, CollisionTally, FirstParticleFate, ResolveError, Survivors,
};
use crate::rng::{trial_stream, SALT_AUX, SALT_CENTER};

/// Confidence level of every interval in a report.
pub const CI_LEVEL: f64 = 0.95;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EstimateError {
    #[error(transparent)]
    Resolve(#[from] ResolveError),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Analytics(#[from] AnalyticsError),
    #[error(transparent)]
    Law(#[from] LawError),
    #[error("invalid request: {0}")]
    Invalid(String),
}

/// Two-sided standard normal quantile for confidence `level`.
fn z_value(level: f64) -> f64 {
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    normal.inverse_cdf(0.5 + level / 2.0)
}

/// Wilson score interval for a binomial proportion.
pub fn wilson_ci(successes: u64, trials: u64, level: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let phat = successes as f64 / n;
    let z = z_value(level);
    let z2 = z * z;
    let centre = (phat + z2 / (2.0 * n)) / (1.0 + z2 / n);
    let half = z / (1.0 + z2 / n) * (phat * (1.0 - phat) / n + z2 / (4.0 * n * n)).sqrt();
    let lo = if successes == 0 { 0.0 } else { (centre - half).max(0.0) };
    let hi = if successes == trials { 1.0 } else { (centre + half).min(1.0) };
    (lo.min(phat), hi.max(phat))
}

/// Which of the costlier per-path invariants run inside estimators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct InvariantPolicy {
    /// Superadditivity is checked on the prefix window of this many sites.
    pub superadditivity_window: usize,
    /// Random cut points checked per trial; 0 disables the check.
    pub superadditivity_cuts: usize,
    /// Ladder windows up to this size are re-resolved on their own and
    /// compared with the value read off the largest window.
    pub ladder_check_window: usize,
}

impl Default for InvariantPolicy {
    fn default() -> Self {
        Self { superadditivity_window: 1000, superadditivity_cuts: 1, ladder_check_window: 2000 }
    }
}

impl InvariantPolicy {
    pub fn off() -> Self {
        Self { superadditivity_window: 0, superadditivity_cuts: 0, ladder_check_window: 0 }
    }
}

/// How many structural checks ran and how many failed.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct InvariantCounts {
    pub outcomes: u64,
    pub superadditivity_cuts: u64,
    pub ladder_windows: u64,
    pub violations: u64,
}

impl InvariantCounts {
    fn merge(self, o: Self) -> Self {
        Self {
            outcomes: self.outcomes + o.outcomes,
            superadditivity_cuts: self.superadditivity_cuts + o.superadditivity_cuts,
            ladder_windows: self.ladder_windows + o.ladder_windows,
            violations: self.violations + o.violations,
        }
    }
}

/// A point estimate with its interval and provenance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimateReport {
    pub quantity: String,
    pub estimate: f64,
    pub trials: u64,
    /// Success count for proportions.
    pub successes: Option<u64>,
    pub std_error: f64,
    pub ci: (f64, f64),
    pub level: f64,
    pub n_sites: usize,
    pub params: ExperimentParams,
    pub analytic: Option<f64>,
    /// Trials left out of the estimate.
    pub excluded: u64,
    pub note: Option<String>,
    pub invariants: InvariantCounts,
}

impl EstimateReport {
    pub fn proportion(quantity: &str, successes: u64, trials: u64, params: &ExperimentParams, n_sites: usize) -> Self {
        let estimate = if trials == 0 { 0.0 } else { successes as f64 / trials as f64 };
        let std_error = if trials == 0 { 0.0 } else { (estimate * (1.0 - estimate) / trials as f64).sqrt() };
        Self {
            quantity: quantity.to_string(),
            estimate,
            trials,
            successes: Some(successes),
            std_error,
            ci: wilson_ci(successes, trials, CI_LEVEL),
            level: CI_LEVEL,
            n_sites,
            params: params.clone(),
            analytic: None,
            excluded: 0,
            note: None,
            invariants: InvariantCounts::default(),
        }
    }

    /// Normal-approximation interval for a sample mean.
    pub fn mean(quantity: &str, mean: f64, std_error: f64, trials: u64, params: &ExperimentParams, n_sites: usize) -> Self {
        let z = z_value(CI_LEVEL);
        Self {
            quantity: quantity.to_string(),
            estimate: mean,
            trials,
            successes: None,
            std_error,
            ci: (mean - z * std_error, mean + z * std_error),
            level: CI_LEVEL,
            n_sites,
            params: params.clone(),
            analytic: None,
            excluded: 0,
            note: None,
            invariants: InvariantCounts::default(),
        }
    }

    pub fn with_analytic(mut self, value: f64) -> Self {
        self.analytic = Some(value);
        self
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    pub fn with_invariants(mut self, inv: InvariantCounts) -> Self {
        self.invariants = inv;
        self
    }
}

/// Collision sink for estimator trials: conservation tallies, time order and
/// the first collision of the particle at site 1.
#[derive(Default)]
struct TrialSink {
    tally: CollisionTally,
    last_time: f64,
    out_of_order: bool,
    first_site: Option<CollisionRecord>,
}

impl CollisionSink for TrialSink {
    fn record(&mut self, rec: &CollisionRecord) {
        self.tally.record(rec);
        if rec.time < self.last_time * (1.0 - 4.0 * f64::EPSILON) {
            self.out_of_order = true;
        }
        self.last_time = rec.time;
        if self.first_site.is_none() {
            let hits_first = match rec.kind {
                CollisionKind::ArrowArrow { left_site, .. } => left_site == 1,
                CollisionKind::ArrowCluster { arrow_site, .. } => arrow_site == 1,
            };
            if hits_first {
                self.first_site = Some(*rec);
            }
        }
    }
}

struct Checked {
    survivors: Survivors,
    fate: FirstParticleFate,
}

fn resolve_checked(config: &Configuration, inv: &mut InvariantCounts) -> Result<Checked, ResolveError> {
    let mut sink = TrialSink::default();
    let survivors = resolve_with(config, &mut sink)?;
    inv.outcomes += 1;
    if sink.out_of_order || check_final_state(config, &survivors.sites, sink.tally).is_err() {
        inv.violations += 1;
    }
    let fate = fate_from_records(config, sink.first_site.iter());
    Ok(Checked { survivors, fate })
}

/// Smallest site of a surviving left arrow, i.e. the first left arrow to
/// reach the origin of a right-half-line window.
fn first_exit_site(s: &Survivors) -> Option<usize> {
    s.sites.iter().find(|x| x.species == Species::LeftArrow).map(|x| x.site)
}

/// First cut `k` in `cuts` with `W(j, l) < W(j, k) + W(k+1, l)`.
pub fn superadditivity_violation(
    config: &Configuration,
    j: usize,
    l: usize,
    cuts: impl IntoIterator<Item = usize>,
) -> Result<Option<usize>, ResolveError> {
    let w = |a: usize, b: usize| -> Result<i64, ResolveError> {
        let sub = config.sub_config(a, b)?;
        Ok(count_survivors(&resolve_with(&sub, &mut ())?.sites).w())
    };
    let whole = w(j, l)?;
    for k in cuts {
        if whole < w(j, k)? + w(k + 1, l)? {
            return Ok(Some(k));
        }
    }
    Ok(None)
}

/// Policy-driven superadditivity check on one right-half-line realization.
fn check_superadditivity(
    config: &Configuration,
    params: &ExperimentParams,
    trial: u64,
    policy: &InvariantPolicy,
    inv: &mut InvariantCounts,
) -> Result<(), ResolveError> {
    let m = policy.superadditivity_window.min(config.len());
    if policy.superadditivity_cuts == 0 || m < 2 {
        return Ok(());
    }
    let mut rng = trial_stream(params.seed, SALT_AUX, trial);
    let cuts: Vec<usize> = (0..policy.superadditivity_cuts).map(|_| rng.gen_range(1..m)).collect();
    inv.superadditivity_cuts += cuts.len() as u64;
    if superadditivity_violation(config, 1, m, cuts)?.is_some() {
        inv.violations += 1;
    }
    Ok(())
}

/// Runs `trials` trials starting at index `first` and sums their tallies.
fn run_trials<T, F>(first: u64, trials: u64, f: F) -> Result<T, EstimateError>
where
    T: Send,
    F: Fn(u64) -> Result<T, EstimateError> + Sync + Send,
    T: Merge,
{
    (first..first + trials).into_par_iter().map(f).try_reduce(T::zero, |a, b| Ok(a.merge(b)))
}

trait Merge: Sized {
    fn zero() -> Self;
    fn merge(self, other: Self) -> Self;
}

fn add_vec(mut a: Vec<u64>, b: Vec<u64>) -> Vec<u64> {
    if a.len() < b.len() {
        a.resize(b.len(), 0);
    }
    for (x, y) in a.iter_mut().zip(b) {
        *x += y;
    }
    a
}

fn check_right_half(params: &ExperimentParams) -> Result<(), EstimateError> {
    params.validate()?;
    if params.side != Side::RightHalfLine {
        return Err(EstimateError::Invalid("this estimator needs right-half-line windows".into()));
    }
    Ok(())
}

fn check_ladder(ladder: &[usize]) -> Result<(), EstimateError> {
    if ladder.is_empty() || ladder[0] == 0 || ladder.windows(2).any(|w| w[0] >= w[1]) {
        return Err(EstimateError::Invalid("window ladder must be strictly increasing and positive".into()));
    }
    Ok(())
}

#[derive(Default)]
struct LadderTally {
    hits: Vec<u64>,
    inv: InvariantCounts,
}

impl Merge for LadderTally {
    fn zero() -> Self {
        Self::default()
    }
    fn merge(self, o: Self) -> Self {
        Self { hits: add_vec(self.hits, o.hits), inv: self.inv.merge(o.inv) }
    }
}

/// `Q_n` for every `n` in `ladder`, from nested windows of the same
/// realizations.
///
/// A left arrow's fate depends only on the sites to its left, so the first
/// left arrow to reach the origin in the largest window also decides every
/// smaller window. Windows up to [`InvariantPolicy::ladder_check_window`]
/// are re-resolved on their own to confirm this and the monotonicity of the
/// indicators. The largest window is a lower estimate of `q`.
pub fn estimate_q(
    params: &ExperimentParams,
    ladder: &[usize],
    trials: u64,
    policy: &InvariantPolicy,
) -> Result<Vec<EstimateReport>, EstimateError> {
    check_ladder(ladder)?;
    let top = *ladder.last().expect("nonempty ladder");
    let params = params.clone().with_n(top);
    check_right_half(&params)?;
    let tally: LadderTally = run_trials(0, trials, |t| {
        let mut inv = InvariantCounts::default();
        let config = sample_half_line(&params, t, HalfLine::Right);
        let out = resolve_checked(&config, &mut inv)?;
        let first = first_exit_site(&out.survivors);
        let hits: Vec<u64> = ladder.iter().map(|&m| u64::from(first.is_some_and(|s| s <= m))).collect();
        let mut prev = false;
        for (&m, &h) in ladder.iter().zip(&hits) {
            if m > policy.ladder_check_window || m == top {
                continue;
            }
            let sub = config.sub_config(1, m)?;
            let visited = first_exit_site(&resolve_checked(&sub, &mut inv)?.survivors).is_some();
            inv.ladder_windows += 1;
            if visited != (h == 1) || (prev && !visited) {
                inv.violations += 1;
            }
            prev = visited;
        }
        check_superadditivity(&config, &params, t, policy, &mut inv)?;
        Ok(LadderTally { hits, inv })
    })?;
    let analytic = analytics::solve_q(&params.law, params.p)?;
    let hits = if tally.hits.is_empty() { vec![0; ladder.len()] } else { tally.hits };
    Ok(ladder
        .iter()
        .zip(hits)
        .map(|(&m, h)| {
            EstimateReport::proportion("q", h, trials, &params.clone().with_n(m), m)
                .with_analytic(analytic)
                .with_invariants(tally.inv)
        })
        .collect())
}

/// Builds the two-sided window of a `θ` trial: both half-lines of the trial
/// and a cluster of size at least one at the origin.
pub fn theta_config(params: &ExperimentParams, trial: u64) -> Result<Configuration, EstimateError> {
    let right = sample_half_line(params, trial, HalfLine::Right);
    let left = sample_half_line(params, trial, HalfLine::Left);
    let mut rng = trial_stream(params.seed, SALT_CENTER, trial);
    let size = params.law.sample_positive(&mut rng)?;
    Ok(Configuration::two_sided(&left, Species::Cluster(size), &right))
}

/// `θ_n` for every per-side window size in `ladder`.
///
/// The cluster at the origin is unvisited exactly when neither half-line,
/// resolved on its own, sends an arrow to the origin. The right half is
/// resolved first and the left half only when the right half leaves the
/// origin unvisited in the smallest window. Finite windows overestimate `θ`.
pub fn estimate_theta_ladder(
    params: &ExperimentParams,
    ladder: &[usize],
    trials: u64,
    policy: &InvariantPolicy,
) -> Result<Vec<EstimateReport>, EstimateError> {
    check_ladder(ladder)?;
    let top = *ladder.last().expect("nonempty ladder");
    let params = params.clone().with_n(top);
    params.validate()?;
    if params.side != Side::TwoSided {
        return Err(EstimateError::Invalid("theta needs two-sided windows".into()));
    }
    if params.law.pmf(0) >= 1.0 {
        return Err(EstimateError::Invalid("the law puts no mass on positive sizes".into()));
    }
    let tally: LadderTally = run_trials(0, trials, |t| {
        let mut inv = InvariantCounts::default();
        let right = sample_half_line(&params, t, HalfLine::Right);
        let first_r = first_exit_site(&resolve_checked(&right, &mut inv)?.survivors);
        check_superadditivity(&right, &params, t, policy, &mut inv)?;
        let first_l = if first_r.is_some_and(|s| s <= ladder[0]) {
            None
        } else {
            let left = sample_half_line(&params, t, HalfLine::Left);
            first_exit_site(&resolve_checked(&left, &mut inv)?.survivors)
        };
        let hits = ladder
            .iter()
            .map(|&m| u64::from(first_r.map_or(true, |s| s > m) && first_l.map_or(true, |s| s > m)))
            .collect();
        Ok(LadderTally { hits, inv })
    })?;
    let analytic = analytics::theta_from_q(analytics::solve_q(&params.law, params.p)?);
    let hits = if tally.hits.is_empty() { vec![0; ladder.len()] } else { tally.hits };
    Ok(ladder
        .iter()
        .zip(hits)
        .map(|(&m, h)| {
            EstimateReport::proportion("theta", h, trials, &params.clone().with_n(m), 2 * m + 1)
                .with_analytic(analytic)
                .with_invariants(tally.inv)
                .with_note("origin holds a cluster conditioned on size >= 1")
        })
        .collect())
}

/// `θ_n` on two-sided windows of `params.n` sites per side.
pub fn estimate_theta(params: &ExperimentParams, trials: u64, policy: &InvariantPolicy) -> Result<EstimateReport, EstimateError> {
    let mut v = estimate_theta_ladder(params, &[params.n], trials, policy)?;
    Ok(v.pop().expect("one rung"))
}

/// Raw tallies behind [`estimate_sr`].
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct SrCounts {
    pub trials: u64,
    /// Origin visited in the window.
    pub visited: u64,
    /// Site 1 is a right arrow annihilated by a left arrow.
    pub arrow_pair: u64,
    pub arrow_pair_visited: u64,
    /// Site 1 is a right arrow that leaves the window.
    pub survived: u64,
    /// `cluster_visited[k]`: site 1 hit a cluster of initial size `k` and the
    /// origin was visited. The last entry collects all larger sizes.
    pub cluster_visited: Vec<u64>,
    pub cluster_unvisited: Vec<u64>,
    pub invariants: InvariantCounts,
}

impl Merge for SrCounts {
    fn zero() -> Self {
        Self::default()
    }
    fn merge(self, o: Self) -> Self {
        Self {
            trials: self.trials + o.trials,
            visited: self.visited + o.visited,
            arrow_pair: self.arrow_pair + o.arrow_pair,
            arrow_pair_visited: self.arrow_pair_visited + o.arrow_pair_visited,
            survived: self.survived + o.survived,
            cluster_visited: add_vec(self.cluster_visited, o.cluster_visited),
            cluster_unvisited: add_vec(self.cluster_unvisited, o.cluster_unvisited),
            invariants: self.invariants.merge(o.invariants),
        }
    }
}

impl SrCounts {
    pub fn s_total(&self) -> u64 {
        self.cluster_visited.iter().sum()
    }

    pub fn r_total(&self) -> u64 {
        self.cluster_unvisited.iter().sum()
    }
}

/// Monte Carlo residual of the one-step recursion and its delta-method
/// standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RecursionCheck {
    pub residual: f64,
    pub std_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SrRow {
    pub k: u32,
    pub s: EstimateReport,
    pub r: EstimateReport,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SrReport {
    pub counts: SrCounts,
    pub rows: Vec<SrRow>,
    pub q: EstimateReport,
    pub arrow_pair: EstimateReport,
    pub survived: EstimateReport,
    /// `ŝ + r̂ + P̂(pair) + P̂(survived)`, to be compared with `(1-p)/2`.
    pub closure: EstimateReport,
    pub recursion: RecursionCheck,
}

/// Joint frequencies of the fate of site 1 and a visit to the origin.
pub fn estimate_sr(
    params: &ExperimentParams,
    trials: u64,
    k_max: u32,
    policy: &InvariantPolicy,
) -> Result<SrReport, EstimateError> {
    check_right_half(params)?;
    let buckets = k_max as usize + 2;
    let counts: SrCounts = run_trials(0, trials, |t| {
        let mut c = SrCounts {
            trials: 1,
            cluster_visited: vec![0; buckets],
            cluster_unvisited: vec![0; buckets],
            ..SrCounts::default()
        };
        let config = sample_half_line(params, t, HalfLine::Right);
        let out = resolve_checked(&config, &mut c.invariants)?;
        check_superadditivity(&config, params, t, policy, &mut c.invariants)?;
        let visited = first_exit_site(&out.survivors).is_some();
        c.visited = u64::from(visited);
        match out.fate {
            FirstParticleFate::AnnihilatedWithArrow => {
                c.arrow_pair = 1;
                c.arrow_pair_visited = u64::from(visited);
            }
            FirstParticleFate::AnnihilatedWithClusterOfInitialSize(k) => {
                let b = (k as usize).min(buckets - 1);
                if visited {
                    c.cluster_visited[b] = 1;
                } else {
                    c.cluster_unvisited[b] = 1;
                }
            }
            FirstParticleFate::SurvivedWindow => c.survived = 1,
            FirstParticleFate::SiteVacantOrNotRightArrow => {}
        }
        Ok(c)
    })?;
    sr_report(params, counts, k_max)
}

fn sr_report(params: &ExperimentParams, mut counts: SrCounts, k_max: u32) -> Result<SrReport, EstimateError> {
    let buckets = k_max as usize + 2;
    counts.cluster_visited.resize(buckets, 0);
    counts.cluster_unvisited.resize(buckets, 0);
    let (law, p, n, trials) = (&params.law, params.p, params.n, counts.trials);
    let q = analytics::solve_q(law, p)?;
    let inv = counts.invariants;
    let rows = (0..=k_max)
        .map(|k| {
            let i = k as usize;
            let mut s = EstimateReport::proportion(&format!("s_{k}"), counts.cluster_visited[i], trials, params, n)
                .with_invariants(inv);
            let mut r = EstimateReport::proportion(&format!("r_{k}"), counts.cluster_unvisited[i], trials, params, n)
                .with_invariants(inv);
            s.analytic = Some(analytics::sk_formula(law, p, q, k)?);
            r.analytic = analytics::rk_formula(law, p, q, k).ok();
            Ok(SrRow { k, s, r })
        })
        .collect::<Result<Vec<_>, EstimateError>>()?;
    let q_rep = EstimateReport::proportion("q", counts.visited, trials, params, n).with_analytic(q).with_invariants(inv);
    let mut arrow_pair = EstimateReport::proportion("arrow_pair", counts.arrow_pair, trials, params, n).with_invariants(inv);
    arrow_pair.analytic = analytics::arrow_pair_formula(law, p, q).ok();
    let survived = EstimateReport::proportion("survived_window", counts.survived, trials, params, n)
        .with_analytic(0.0)
        .with_invariants(inv);
    let right_arrow_events = counts.s_total() + counts.r_total() + counts.arrow_pair + counts.survived;
    let closure = EstimateReport::proportion("first_site_right_arrow", right_arrow_events, trials, params, n)
        .with_analytic((1.0 - p) / 2.0)
        .with_invariants(inv);
    let recursion = recursion_check(&counts, params)?;
    Ok(SrReport { counts, rows, q: q_rep, arrow_pair, survived, closure, recursion })
}

/// Evaluates `(1-p)/2 + p q f(q) + s + q P(pair) - q` at the estimates.
///
/// All four estimates come from the same trials, so the standard error is
/// propagated through their joint covariance.
pub fn recursion_check(counts: &SrCounts, params: &ExperimentParams) -> Result<RecursionCheck, EstimateError> {
    let n = counts.trials as f64;
    if counts.trials == 0 {
        return Err(EstimateError::Invalid("no trials".into()));
    }
    let (law, p) = (&params.law, params.p);
    let q = counts.visited as f64 / n;
    let s = counts.s_total() as f64 / n;
    let a = counts.arrow_pair as f64 / n;
    let va = counts.arrow_pair_visited as f64 / n;
    let f = law.pgf(q)?;
    let residual = (1.0 - p) / 2.0 + p * q * f + s + q * a - q;
    let gq = p * f + p * q * law.pgf_d1(q)? + a - 1.0;
    let (gs, ga) = (1.0, q);
    // the s-event implies a visit; the s- and pair-events are disjoint
    let var = gq * gq * q * (1.0 - q)
        + gs * gs * s * (1.0 - s)
        + ga * ga * a * (1.0 - a)
        + 2.0 * gq * gs * (s - q * s)
        + 2.0 * gq * ga * (va - q * a)
        - 2.0 * gs * ga * s * a;
    Ok(RecursionCheck { residual, std_error: (var.max(0.0) / n).sqrt() })
}

#[derive(Default)]
struct WTally {
    sum: Vec<i64>,
    sum_sq: Vec<u128>,
    inv: InvariantCounts,
}

impl Merge for WTally {
    fn zero() -> Self {
        Self::default()
    }
    fn merge(mut self, o: Self) -> Self {
        if self.sum.len() < o.sum.len() {
            self.sum.resize(o.sum.len(), 0);
            self.sum_sq.resize(o.sum.len(), 0);
        }
        for (i, (a, b)) in o.sum.into_iter().zip(o.sum_sq).enumerate() {
            self.sum[i] += a;
            self.sum_sq[i] += b;
        }
        self.inv = self.inv.merge(o.inv);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WCurveReport {
    /// Mean of `W(1, n) / n` for each window.
    pub points: Vec<EstimateReport>,
    /// `max(0, max_n mean W(1, n) / n)`.
    pub theta_sup: EstimateReport,
    /// `|theta_sup - θ|` exceeds five standard errors.
    pub flagged: bool,
}

/// Mean `W(1, n) / n` over windows of one realization per trial.
pub fn estimate_w_curve(
    params: &ExperimentParams,
    windows: &[usize],
    trials: u64,
    policy: &InvariantPolicy,
) -> Result<WCurveReport, EstimateError> {
    check_ladder(windows)?;
    let top = *windows.last().expect("nonempty");
    let params = params.clone().with_n(top);
    check_right_half(&params)?;
    let tally: WTally = run_trials(0, trials, |t| {
        let mut inv = InvariantCounts::default();
        let config = sample_half_line(&params, t, HalfLine::Right);
        let mut sum = Vec::with_capacity(windows.len());
        let mut sum_sq = Vec::with_capacity(windows.len());
        for &m in windows {
            let sub = config.sub_config(1, m)?;
            let w = count_survivors(&resolve_checked(&sub, &mut inv)?.survivors.sites).w();
            sum.push(w);
            sum_sq.push(u128::from(w.unsigned_abs()).pow(2));
        }
        check_superadditivity(&config, &params, t, policy, &mut inv)?;
        Ok(WTally { sum, sum_sq, inv })
    })?;
    let nt = trials.max(1) as f64;
    let theta = analytics::theta_from_q(analytics::solve_q(&params.law, params.p)?);
    let points: Vec<EstimateReport> = windows
        .iter()
        .enumerate()
        .map(|(i, &m)| {
            let (s, s2) = (tally.sum.get(i).copied().unwrap_or(0), tally.sum_sq.get(i).copied().unwrap_or(0));
            let mean = s as f64 / nt;
            let var = (s2 as f64 / nt - mean * mean).max(0.0) * nt / (nt - 1.0).max(1.0);
            let mf = m as f64;
            EstimateReport::mean("w_over_n", mean / mf, (var / nt).sqrt() / mf, trials, &params.clone().with_n(m), m)
                .with_invariants(tally.inv)
        })
        .collect();
    let best = points
        .iter()
        .max_by(|a, b| a.estimate.total_cmp(&b.estimate))
        .expect("nonempty");
    let mut theta_sup = best.clone();
    theta_sup.quantity = "theta_sup".into();
    theta_sup.estimate = best.estimate.max(0.0);
    theta_sup.ci = (best.ci.0.max(0.0), best.ci.1.max(0.0));
    theta_sup.analytic = Some(theta);
    let flagged = (theta_sup.estimate - theta).abs() > 5.0 * best.std_error.max(f64::MIN_POSITIVE);
    if flagged {
        theta_sup.note = Some(format!(
            "differs from the two-sided theta {theta:.6} by more than five standard errors; \
             the finite-window supremum is only a lower approximant"
        ));
    }
    Ok(WCurveReport { points, theta_sup, flagged })
}

/// Starting distances of the arrows that reach the origin, in arrival order:
/// left arrows from the right half-line and right arrows from the left one.
#[derive(Debug, Clone, PartialEq)]
pub struct ArrivalLists {
    pub from_left: Vec<f64>,
    pub from_right: Vec<f64>,
}

/// Resolves both half-lines of `trial` independently.
pub fn arrival_lists(params: &ExperimentParams, trial: u64, inv: &mut InvariantCounts) -> Result<ArrivalLists, EstimateError> {
    let right = sample_half_line(params, trial, HalfLine::Right);
    let left = sample_half_line(params, trial, HalfLine::Left);
    let from_right = resolve_checked(&right, inv)?.survivors.left_exit_times;
    let from_left = resolve_checked(&left, inv)?.survivors.left_exit_times;
    Ok(ArrivalLists { from_left, from_right })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SymmetryReport {
    pub j: usize,
    pub k: usize,
    /// `P(D→_j < D←_{k+1-j})`.
    pub forward: EstimateReport,
    /// `P(D→_{k+1-j} < D←_j)`, from an independent block of trials.
    pub reverse: EstimateReport,
    pub paired_sum: f64,
    pub paired_ci: (f64, f64),
}

#[derive(Default)]
struct ArrivalTally {
    /// Per requested pair: (hits, usable trials, excluded trials).
    cells: Vec<[u64; 3]>,
    inv: InvariantCounts,
}

impl Merge for ArrivalTally {
    fn zero() -> Self {
        Self::default()
    }
    fn merge(mut self, o: Self) -> Self {
        if self.cells.len() < o.cells.len() {
            self.cells.resize(o.cells.len(), [0; 3]);
        }
        for (a, b) in self.cells.iter_mut().zip(o.cells) {
            for i in 0..3 {
                a[i] += b[i];
            }
        }
        self.inv = self.inv.merge(o.inv);
        self
    }
}

/// Tallies `D→_a < D←_b` (1-based arrival ranks) for each `(a, b)`.
fn arrival_block(params: &ExperimentParams, first: u64, trials: u64, ranks: &[(usize, usize)]) -> Result<ArrivalTally, EstimateError> {
    run_trials(first, trials, |t| {
        let mut inv = InvariantCounts::default();
        let lists = arrival_lists(params, t, &mut inv)?;
        let cells = ranks
            .iter()
            .map(|&(a, b)| match (lists.from_left.get(a - 1), lists.from_right.get(b - 1)) {
                (Some(x), Some(y)) => [u64::from(x < y), 1, 0],
                _ => [0, 0, 1],
            })
            .collect();
        Ok(ArrivalTally { cells, inv })
    })
}

/// Arrival-distance symmetry for several `(j, k)` at once. The forward terms
/// use trials `0..trials` and the reverse terms trials `trials..2 trials`;
/// trials short of the required arrivals are excluded per term.
pub fn estimate_arrival_symmetry_many(
    params: &ExperimentParams,
    pairs: &[(usize, usize)],
    trials: u64,
) -> Result<Vec<SymmetryReport>, EstimateError> {
    check_right_half(params)?;
    for &(j, k) in pairs {
        if j == 0 || j > k {
            return Err(EstimateError::Invalid(format!("need 1 <= j <= k, got ({j}, {k})")));
        }
    }
    let fwd: Vec<(usize, usize)> = pairs.iter().map(|&(j, k)| (j, k + 1 - j)).collect();
    let rev: Vec<(usize, usize)> = pairs.iter().map(|&(j, k)| (k + 1 - j, j)).collect();
    let a = arrival_block(params, 0, trials, &fwd)?;
    let b = arrival_block(params, trials, trials, &rev)?;
    let inv = a.inv.merge(b.inv);
    let z = z_value(CI_LEVEL);
    let cell = |t: &ArrivalTally, i: usize| t.cells.get(i).copied().unwrap_or([0, 0, 0]);
    Ok(pairs
        .iter()
        .enumerate()
        .map(|(i, &(j, k))| {
            let mk = |c: [u64; 3], label: String| {
                let mut r = EstimateReport::proportion(&label, c[0], c[1], params, params.n)
                    .with_analytic(0.5)
                    .with_invariants(inv);
                r.excluded = c[2];
                r
            };
            let forward = mk(cell(&a, i), format!("P(D_right_{j} < D_left_{})", k + 1 - j));
            let reverse = mk(cell(&b, i), format!("P(D_right_{} < D_left_{j})", k + 1 - j));
            let paired_sum = forward.estimate + reverse.estimate;
            let se = (forward.std_error.powi(2) + reverse.std_error.powi(2)).sqrt();
            SymmetryReport { j, k, forward, reverse, paired_sum, paired_ci: (paired_sum - z * se, paired_sum + z * se) }
        })
        .collect())
}

pub fn estimate_arrival_symmetry(
    params: &ExperimentParams,
    j: usize,
    k: usize,
    trials: u64,
) -> Result<SymmetryReport, EstimateError> {
    Ok(estimate_arrival_symmetry_many(params, &[(j, k)], trials)?.remove(0))
}
