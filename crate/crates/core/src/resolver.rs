//! Exact resolution of the collision dynamics of a finite configuration.
//!
//! Live particles are kept in a doubly linked list in position order. Every
//! adjacent pair that approaches is a candidate collision; candidates sit in
//! a min-heap keyed by `(time, left site)` and are invalidated
//! lazily: a popped candidate is used only if both particles are still alive
//! and still adjacent. Each collision removes at least one arrow, so there
//! are at most `#arrows` collisions and the whole run is `O(n log n)`.
//!
//! [`resolve_naive`] applies the same rules by rescanning every adjacent pair
//! before each collision. It exists as an oracle for [`resolve`].

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::Serialize;
use thiserror::Error;

use crate::config::{ConfigError, Configuration, Side, Species};

const NIL: u32 = u32::MAX;
const DEAD: u32 = u32::MAX - 1;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ResolveError {
    /// Three particles meet at one point at one time. Continuous spacings
    /// make this a null event, so it is reported instead of guessed at.
    #[error("triple collision of sites {sites:?} at time {time}")]
    TripleCollision { time: f64, sites: [usize; 3] },
    #[error(transparent)]
    Config(#[from] ConfigError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum CollisionKind {
    ArrowArrow { left_site: usize, right_site: usize },
    /// An arrow removed one blockade unit from a cluster.
    ArrowCluster { arrow_site: usize, cluster_site: usize, remaining: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CollisionRecord {
    pub time: f64,
    pub position: f64,
    pub kind: CollisionKind,
}

impl CollisionRecord {
    /// The two sites involved, left one first.
    pub fn sites(&self) -> (usize, usize) {
        match self.kind {
            CollisionKind::ArrowArrow { left_site, right_site } => (left_site, right_site),
            CollisionKind::ArrowCluster { arrow_site, cluster_site, .. } => {
                (arrow_site.min(cluster_site), arrow_site.max(cluster_site))
            }
        }
    }
}

/// Receives collisions as they are executed.
pub trait CollisionSink {
    fn record(&mut self, rec: &CollisionRecord);
}

impl CollisionSink for Vec<CollisionRecord> {
    fn record(&mut self, rec: &CollisionRecord) {
        self.push(*rec);
    }
}

/// Discards every collision.
impl CollisionSink for () {
    fn record(&mut self, _: &CollisionRecord) {}
}

/// A particle alive at the end; clusters carry their remaining multiplicity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Survivor {
    pub site: usize,
    pub species: Species,
}

/// Final state of a resolution, without the collision log.
#[derive(Debug, Clone, PartialEq)]
pub struct Survivors {
    pub side: Side,
    pub sites: Vec<Survivor>,
    /// Times at which surviving left arrows cross the origin (right half-line only).
    pub left_exit_times: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub side: Side,
    pub collisions: Vec<CollisionRecord>,
    pub survivors: Vec<Survivor>,
    pub left_exit_times: Vec<f64>,
}

/// Meeting time of two particles given as `(position, velocity)`, the first
/// one to the left of the second. `None` if they never meet.
pub fn collision_time(left: (f64, i8), right: (f64, i8)) -> Option<f64> {
    let closing = left.1 - right.1;
    if closing <= 0 {
        None
    } else {
        Some((right.0 - left.0) / f64::from(closing))
    }
}

/// A pending collision of two adjacent particles.
///
/// Candidates are ordered by time, then by left site. Two distinct valid
/// candidates with equal times involve disjoint pairs, so ordering them by
/// left site is the same as ordering them by collision position.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Candidate {
    /// Bit pattern of a nonnegative time; integer order equals numeric order.
    time_bits: u64,
    left: u32,
    right: u32,
}

impl Candidate {
    fn time(&self) -> f64 {
        f64::from_bits(self.time_bits)
    }
}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

// Reversed so that `BinaryHeap` pops the earliest candidate.
impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        (other.time_bits, other.left).cmp(&(self.time_bits, self.left))
    }
}

/// Mutable per-run particle state shared by both resolvers.
struct Particles<'a> {
    pos: &'a [f64],
    vel: Vec<i8>,
    mult: Vec<u32>,
}

impl<'a> Particles<'a> {
    fn new(config: &'a Configuration) -> Self {
        let species = config.species();
        Particles {
            pos: config.positions(),
            vel: species.iter().map(|s| s.velocity()).collect(),
            mult: species
                .iter()
                .map(|s| match s {
                    Species::Cluster(m) => *m,
                    _ => 1,
                })
                .collect(),
        }
    }

    fn candidate(&self, l: u32, r: u32) -> Option<Candidate> {
        let (li, ri) = (l as usize, r as usize);
        collision_time((self.pos[li], self.vel[li]), (self.pos[ri], self.vel[ri])).map(|time| Candidate {
            // +0.0 so that a zero gap never produces the bits of -0.0
            time_bits: (time + 0.0).to_bits(),
            left: l,
            right: r,
        })
    }

    fn same_time(&self, a: u32, b: u32, time: f64) -> bool {
        a != NIL && b != NIL && self.candidate(a, b).is_some_and(|c| c.time() == time)
    }

    /// Executes the collision of `c`, returning the record and which of the
    /// two particles were removed.
    fn apply(&mut self, c: &Candidate) -> (CollisionRecord, bool, bool) {
        let (l, r) = (c.left as usize, c.right as usize);
        let (kind, gone_l, gone_r) = match (self.vel[l], self.vel[r]) {
            (1, -1) => (CollisionKind::ArrowArrow { left_site: l + 1, right_site: r + 1 }, true, true),
            (1, 0) => {
                self.mult[r] -= 1;
                let remaining = self.mult[r];
                (CollisionKind::ArrowCluster { arrow_site: l + 1, cluster_site: r + 1, remaining }, true, remaining == 0)
            }
            (0, -1) => {
                self.mult[l] -= 1;
                let remaining = self.mult[l];
                (CollisionKind::ArrowCluster { arrow_site: r + 1, cluster_site: l + 1, remaining }, remaining == 0, true)
            }
            (a, b) => unreachable!("velocities {a} and {b} do not approach"),
        };
        let time = c.time();
        let position = self.pos[l] + f64::from(self.vel[l]) * time;
        (CollisionRecord { time, position, kind }, gone_l, gone_r)
    }

    fn survivor(&self, config: &Configuration, i: usize) -> Survivor {
        let species = match config.species()[i] {
            Species::Cluster(_) => Species::Cluster(self.mult[i]),
            s => s,
        };
        Survivor { site: i + 1, species }
    }
}

fn finish(config: &Configuration, sites: Vec<Survivor>) -> Survivors {
    let left_exit_times = if config.side() == Side::RightHalfLine {
        sites
            .iter()
            .filter(|s| s.species == Species::LeftArrow)
            .map(|s| config.position(s.site) - config.origin())
            .collect()
    } else {
        Vec::new()
    };
    Survivors { side: config.side(), sites, left_exit_times }
}

/// Resolves `config`, streaming every collision into `sink` in execution order.
pub fn resolve_with<S: CollisionSink + ?Sized>(config: &Configuration, sink: &mut S) -> Result<Survivors, ResolveError> {
    let n = config.len();
    let mut parts = Particles::new(config);
    // `next[i] == DEAD` marks a removed particle; a removed particle is never
    // the `next` of a live one, so one comparison validates a candidate.
    let mut prev = vec![NIL; n];
    let mut next = vec![NIL; n];

    let mut initial = Vec::with_capacity(n / 2);
    let mut last = NIL;
    for (i, s) in config.species().iter().enumerate() {
        let i = i as u32;
        if !s.is_live() {
            next[i as usize] = DEAD;
            continue;
        }
        if last != NIL {
            next[last as usize] = i;
            prev[i as usize] = last;
            initial.extend(parts.candidate(last, i));
        }
        last = i;
    }
    let mut heap = BinaryHeap::from(initial);

    while let Some(c) = heap.pop() {
        let (l, r) = (c.left as usize, c.right as usize);
        if next[l] != c.right {
            continue;
        }
        let (pl, nr) = (prev[l], next[r]);
        if parts.same_time(pl, c.left, c.time()) {
            return Err(ResolveError::TripleCollision { time: c.time(), sites: [pl as usize + 1, l + 1, r + 1] });
        }
        if parts.same_time(c.right, nr, c.time()) {
            return Err(ResolveError::TripleCollision { time: c.time(), sites: [l + 1, r + 1, nr as usize + 1] });
        }
        let (rec, gone_l, gone_r) = parts.apply(&c);
        sink.record(&rec);
        let a = if gone_l { pl } else { c.left };
        let b = if gone_r { nr } else { c.right };
        if gone_l {
            next[l] = DEAD;
        }
        if gone_r {
            next[r] = DEAD;
        }
        if a != NIL {
            next[a as usize] = b;
        }
        if b != NIL {
            prev[b as usize] = a;
        }
        if a != NIL && b != NIL {
            heap.extend(parts.candidate(a, b));
        }
    }

    let sites = (0..n).filter(|i| next[*i] != DEAD).map(|i| parts.survivor(config, i)).collect();
    Ok(finish(config, sites))
}

/// Resolves `config` and returns the full collision log with the survivors.
pub fn resolve(config: &Configuration) -> Result<Outcome, ResolveError> {
    let mut log = Vec::new();
    let s = resolve_with(config, &mut log)?;
    Ok(Outcome { side: s.side, collisions: log, survivors: s.sites, left_exit_times: s.left_exit_times })
}

/// Quadratic reference resolver: before every collision it rescans all
/// adjacent live pairs for the earliest one.
pub fn resolve_naive(config: &Configuration) -> Result<Outcome, ResolveError> {
    let mut parts = Particles::new(config);
    let mut live: Vec<u32> = (0..config.len() as u32).filter(|i| config.species()[*i as usize].is_live()).collect();
    let mut collisions = Vec::new();
    loop {
        let best = live
            .windows(2)
            .enumerate()
            .filter_map(|(i, w)| parts.candidate(w[0], w[1]).map(|c| (i, c)))
            .max_by(|a, b| a.1.cmp(&b.1));
        let Some((i, c)) = best else { break };
        let before = if i > 0 { live[i - 1] } else { NIL };
        let after = live.get(i + 2).copied().unwrap_or(NIL);
        if parts.same_time(before, c.left, c.time()) {
            return Err(ResolveError::TripleCollision {
                time: c.time(),
                sites: [before as usize + 1, c.left as usize + 1, c.right as usize + 1],
            });
        }
        if parts.same_time(c.right, after, c.time()) {
            return Err(ResolveError::TripleCollision {
                time: c.time(),
                sites: [c.left as usize + 1, c.right as usize + 1, after as usize + 1],
            });
        }
        let (rec, gone_l, gone_r) = parts.apply(&c);
        collisions.push(rec);
        if gone_r {
            live.remove(i + 1);
        }
        if gone_l {
            live.remove(i);
        }
    }
    let sites = live.iter().map(|i| parts.survivor(config, *i as usize)).collect();
    let s = finish(config, sites);
    Ok(Outcome { side: s.side, collisions, survivors: s.sites, left_exit_times: s.left_exit_times })
}

/// Whether the origin is reached by a left arrow, and by how many.
pub fn origin_visited_by_left(outcome: &Outcome) -> (bool, usize) {
    let count = outcome.left_exit_times.len();
    (count > 0, count)
}

/// How the particle at site 1 ends, when it is a right arrow.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum FirstParticleFate {
    AnnihilatedWithArrow,
    /// Hit a cluster whose initial size was the given value.
    AnnihilatedWithClusterOfInitialSize(u32),
    SurvivedWindow,
    SiteVacantOrNotRightArrow,
}

/// Classifies the fate of site 1 from a collision log.
pub fn first_particle_fate(outcome: &Outcome, config: &Configuration) -> FirstParticleFate {
    fate_from_records(config, outcome.collisions.iter())
}

pub(crate) fn fate_from_records<'a>(
    config: &Configuration,
    mut records: impl Iterator<Item = &'a CollisionRecord>,
) -> FirstParticleFate {
    if config.is_empty() || config.species_at(1) != Species::RightArrow {
        return FirstParticleFate::SiteVacantOrNotRightArrow;
    }
    records
        .find_map(|rec| match rec.kind {
            CollisionKind::ArrowArrow { left_site: 1, .. } => Some(FirstParticleFate::AnnihilatedWithArrow),
            CollisionKind::ArrowCluster { arrow_site: 1, cluster_site, .. } => match config.species_at(cluster_site) {
                Species::Cluster(k) => Some(FirstParticleFate::AnnihilatedWithClusterOfInitialSize(k)),
                _ => unreachable!("cluster site holds an arrow"),
            },
            _ => None,
        })
        .unwrap_or(FirstParticleFate::SurvivedWindow)
}

/// Surviving blockade units and arrows of each direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct SurvivingCounts {
    pub blockades: u64,
    pub left: u64,
    pub right: u64,
}

impl SurvivingCounts {
    /// Surviving blockade units minus surviving arrows.
    pub fn w(&self) -> i64 {
        self.blockades as i64 - self.left as i64 - self.right as i64
    }
}

pub fn count_survivors(sites: &[Survivor]) -> SurvivingCounts {
    sites.iter().fold(SurvivingCounts::default(), |mut acc, s| {
        match s.species {
            Species::LeftArrow => acc.left += 1,
            Species::RightArrow => acc.right += 1,
            Species::Cluster(m) => acc.blockades += u64::from(m),
        }
        acc
    })
}

pub fn surviving_counts(outcome: &Outcome) -> SurvivingCounts {
    count_survivors(&outcome.survivors)
}

/// `W(j, k)`: surviving blockade units minus surviving arrows when only
/// sites `j..=k` are present.
pub fn w_statistic(config: &Configuration, j: usize, k: usize) -> Result<i64, ResolveError> {
    let sub = config.sub_config(j, k)?;
    Ok(count_survivors(&resolve_with(&sub, &mut ())?.sites).w())
}

/// A broken structural invariant of an outcome.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum InvariantViolation {
    #[error("collision {0} happens before its predecessor")]
    TimeOrder(usize),
    #[error("survivors at sites {0} and {1} would still meet")]
    SurvivorOrder(usize, usize),
    #[error("arrow balance: {initial} initial, {surviving} surviving, {arrow_arrow} arrow-arrow, {arrow_cluster} arrow-cluster")]
    ArrowBalance { initial: u64, surviving: u64, arrow_arrow: u64, arrow_cluster: u64 },
    #[error("blockade balance: {initial} initial units, {surviving} surviving, {arrow_cluster} absorbed")]
    BlockadeBalance { initial: u64, surviving: u64, arrow_cluster: u64 },
}

/// Collision tallies used for the conservation identities.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CollisionTally {
    pub arrow_arrow: u64,
    pub arrow_cluster: u64,
}

impl CollisionSink for CollisionTally {
    fn record(&mut self, rec: &CollisionRecord) {
        match rec.kind {
            CollisionKind::ArrowArrow { .. } => self.arrow_arrow += 1,
            CollisionKind::ArrowCluster { .. } => self.arrow_cluster += 1,
        }
    }
}

/// Checks survivor separation and both conservation identities.
pub fn check_final_state(
    config: &Configuration,
    sites: &[Survivor],
    tally: CollisionTally,
) -> Result<(), InvariantViolation> {
    for w in sites.windows(2) {
        if w[0].species.velocity() > w[1].species.velocity() {
            return Err(InvariantViolation::SurvivorOrder(w[0].site, w[1].site));
        }
    }
    let counts = count_survivors(sites);
    let initial = config.count_arrows() as u64;
    let surviving = counts.left + counts.right;
    if initial - surviving != 2 * tally.arrow_arrow + tally.arrow_cluster {
        return Err(InvariantViolation::ArrowBalance {
            initial,
            surviving,
            arrow_arrow: tally.arrow_arrow,
            arrow_cluster: tally.arrow_cluster,
        });
    }
    let units = config.blockade_units();
    if units - counts.blockades != tally.arrow_cluster {
        return Err(InvariantViolation::BlockadeBalance {
            initial: units,
            surviving: counts.blockades,
            arrow_cluster: tally.arrow_cluster,
        });
    }
    Ok(())
}

/// All structural invariants of a full outcome.
pub fn check_outcome(config: &Configuration, outcome: &Outcome) -> Result<(), InvariantViolation> {
    for (i, w) in outcome.collisions.windows(2).enumerate() {
        // one-ulp slack: successive times come from different float expressions
        if w[1].time < w[0].time * (1.0 - 4.0 * f64::EPSILON) {
            return Err(InvariantViolation::TimeOrder(i + 1));
        }
    }
    let mut tally = CollisionTally::default();
    outcome.collisions.iter().for_each(|c| tally.record(c));
    check_final_state(config, &outcome.survivors, tally)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Species::*;

    fn cfg(sites: &[(f64, Species)]) -> Configuration {
        let (pos, sp) = sites.iter().copied().unzip();
        Configuration::new(pos, sp, 0.0, Side::RightHalfLine).unwrap()
    }

    fn two_sided(sites: &[(f64, Species)]) -> Configuration {
        let (pos, sp) = sites.iter().copied().unzip();
        Configuration::new(pos, sp, 0.0, Side::TwoSided).unwrap()
    }

    #[test]
    fn collision_time_examples() {
        assert_eq!(collision_time((0.0, 1), (2.0, -1)), Some(1.0));
        assert_eq!(collision_time((0.0, 1), (3.0, 0)), Some(3.0));
        assert_eq!(collision_time((0.0, 0), (3.0, -1)), Some(3.0));
        assert_eq!(collision_time((0.0, -1), (1.0, 1)), None);
        assert_eq!(collision_time((0.0, 1), (1.0, 1)), None);
        assert_eq!(collision_time((0.0, 0), (1.0, 0)), None);
    }

    #[test]
    fn head_on_pair() {
        let c = cfg(&[(1.0, RightArrow), (2.0, LeftArrow)]);
        let out = resolve(&c).unwrap();
        assert_eq!(
            out.collisions,
            vec![CollisionRecord {
                time: 0.5,
                position: 1.5,
                kind: CollisionKind::ArrowArrow { left_site: 1, right_site: 2 }
            }]
        );
        assert!(out.survivors.is_empty());
        assert_eq!(resolve_naive(&c).unwrap(), out);
    }

    #[test]
    fn two_arrows_deplete_a_double_cluster() {
        let c = cfg(&[(5.0, Cluster(2)), (6.0, LeftArrow), (8.0, LeftArrow)]);
        let out = resolve(&c).unwrap();
        let times: Vec<f64> = out.collisions.iter().map(|r| r.time).collect();
        assert_eq!(times, vec![1.0, 3.0]);
        assert_eq!(
            out.collisions[1].kind,
            CollisionKind::ArrowCluster { arrow_site: 3, cluster_site: 1, remaining: 0 }
        );
        assert!(out.survivors.is_empty());
        assert_eq!(resolve_naive(&c).unwrap(), out);
    }

    #[test]
    fn later_left_arrow_beats_earlier_right_arrow() {
        // The left arrow reaches the cluster first; the right arrow then passes
        // the emptied site. A left-to-right stack would pair → with • instead.
        let c = two_sided(&[(-3.0, RightArrow), (0.0, Cluster(1)), (1.0, LeftArrow)]);
        let out = resolve(&c).unwrap();
        assert_eq!(out.collisions.len(), 1);
        assert_eq!(out.collisions[0].time, 1.0);
        assert_eq!(
            out.collisions[0].kind,
            CollisionKind::ArrowCluster { arrow_site: 3, cluster_site: 2, remaining: 0 }
        );
        assert_eq!(out.survivors, vec![Survivor { site: 1, species: RightArrow }]);
        assert_eq!(resolve_naive(&c).unwrap(), out);
    }

    #[test]
    fn vacant_sites_are_transparent() {
        let c = cfg(&[(1.0, RightArrow), (1.5, Cluster(0)), (2.0, LeftArrow)]);
        let out = resolve(&c).unwrap();
        assert_eq!(out.collisions[0].kind, CollisionKind::ArrowArrow { left_site: 1, right_site: 3 });
        assert!(out.survivors.is_empty());
    }

    #[test]
    fn triple_collision_is_rejected() {
        let c = two_sided(&[(-1.0, RightArrow), (0.0, Cluster(2)), (1.0, LeftArrow)]);
        assert!(matches!(resolve(&c), Err(ResolveError::TripleCollision { .. })));
        assert!(matches!(resolve_naive(&c), Err(ResolveError::TripleCollision { .. })));
    }

    #[test]
    fn equal_times_on_disjoint_pairs_go_left_first() {
        let c = two_sided(&[(0.0, RightArrow), (2.0, LeftArrow), (10.0, RightArrow), (12.0, LeftArrow)]);
        let out = resolve(&c).unwrap();
        assert_eq!(out.collisions[0].position, 1.0);
        assert_eq!(out.collisions[1].position, 11.0);
        assert_eq!(resolve_naive(&c).unwrap(), out);
    }

    #[test]
    fn origin_visits() {
        let all_clusters = cfg(&[(1.0, Cluster(1)), (2.0, Cluster(3))]);
        assert_eq!(origin_visited_by_left(&resolve(&all_clusters).unwrap()), (false, 0));
        let lone = cfg(&[(1.0, LeftArrow)]);
        let out = resolve(&lone).unwrap();
        assert_eq!(origin_visited_by_left(&out), (true, 1));
        assert_eq!(out.left_exit_times, vec![1.0]);
        let absorbed = cfg(&[(1.0, Cluster(1)), (2.0, LeftArrow), (3.0, LeftArrow)]);
        let out = resolve(&absorbed).unwrap();
        assert_eq!(origin_visited_by_left(&out), (true, 1));
        assert_eq!(out.left_exit_times, vec![3.0]);
    }

    #[test]
    fn first_particle_fates() {
        let c = cfg(&[(1.0, LeftArrow), (2.0, RightArrow)]);
        assert_eq!(first_particle_fate(&resolve(&c).unwrap(), &c), FirstParticleFate::SiteVacantOrNotRightArrow);
        let c = cfg(&[(1.0, RightArrow), (2.0, LeftArrow)]);
        assert_eq!(first_particle_fate(&resolve(&c).unwrap(), &c), FirstParticleFate::AnnihilatedWithArrow);
        let c = cfg(&[(1.0, RightArrow), (2.0, Cluster(3)), (9.0, LeftArrow)]);
        assert_eq!(
            first_particle_fate(&resolve(&c).unwrap(), &c),
            FirstParticleFate::AnnihilatedWithClusterOfInitialSize(3)
        );
        let c = cfg(&[(1.0, RightArrow), (2.0, RightArrow)]);
        assert_eq!(first_particle_fate(&resolve(&c).unwrap(), &c), FirstParticleFate::SurvivedWindow);
    }

    #[test]
    fn w_statistic_examples() {
        let c = cfg(&[(1.0, Cluster(1))]);
        assert_eq!(w_statistic(&c, 1, 1).unwrap(), 1);
        let c = cfg(&[(1.0, LeftArrow)]);
        assert_eq!(w_statistic(&c, 1, 1).unwrap(), -1);
        let c = cfg(&[(1.0, Cluster(2)), (2.0, LeftArrow)]);
        let out = resolve(&c).unwrap();
        assert_eq!(surviving_counts(&out), SurvivingCounts { blockades: 1, left: 0, right: 0 });
        assert_eq!(w_statistic(&c, 1, 2).unwrap(), 1);
        assert!(w_statistic(&c, 2, 3).is_err());
    }

    #[test]
    fn invariant_checker_catches_tampering() {
        let c = cfg(&[(1.0, RightArrow), (2.0, Cluster(2)), (3.5, LeftArrow), (4.0, LeftArrow)]);
        let mut out = resolve(&c).unwrap();
        check_outcome(&c, &out).unwrap();
        out.collisions.pop();
        assert!(check_outcome(&c, &out).is_err());
        let mut out = resolve(&c).unwrap();
        out.survivors.push(Survivor { site: 5, species: LeftArrow });
        assert!(check_outcome(&c, &out).is_err());
    }
}
