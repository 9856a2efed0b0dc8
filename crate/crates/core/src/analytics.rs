//! Closed-form quantities: the critical density, the visit probability `q(p)`
//! as the root of `F(q) = p`, the collision-type probabilities `s` and `r`,
//! and the one-step recursion they satisfy.
//!
//! The fixed-point map is `F(v) = (1-v)^2 / D(v)` with
//! `D(v) = 1 + v^2 - 2 v f(v) - v^2 (1 - v^2) f'(v)`.
//! Since `D` has a double root at `v = 1`, the root finder works with the
//! reduced form `F(v) = 1 / G(v)`, `G(v) = D(v) / (1-v)^2`, which expands to
//! `G(v) = 1 + 2 Σ_j j v^j P(X >= j) + v^2 f'(v)`. Every term of `G` is
//! nonnegative and increasing in `v`, so `F` is strictly decreasing on
//! `[0, 1]` with `F(0) = 1` and `F(1) = 1 / E[(X+1)^2]`.

use serde::Serialize;
use thiserror::Error;

use crate::law::{ClusterLaw, LawError, LawFamily};

/// Bisection stops once the bracket is narrower than this.
pub const ROOT_TOL: f64 = 1e-12;
/// Iteration cap for bisection.
pub const ROOT_MAX_ITER: usize = 200;
/// `D(v)` at or below this is treated as singular by [`f_of_v`].
pub const SINGULAR_TOL: f64 = 1e-15;
/// Truncation target for the per-size series on unbounded laws.
pub const SERIES_TOL: f64 = 1e-14;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalyticsError {
    #[error(transparent)]
    Law(#[from] LawError),
    #[error("denominator {denominator:e} at v = {v} is singular")]
    Singular { v: f64, denominator: f64 },
    #[error("no sign change for F(v) - {p} on [{lo}, {hi}]")]
    Bracket { p: f64, lo: f64, hi: f64 },
    #[error("{0}")]
    Domain(String),
}

/// Critical density `1 / ((E X + 1)^2 + var X)`, zero for infinite variance.
pub fn pc(law: &ClusterLaw) -> f64 {
    let m = law.moments();
    if !m.variance.is_finite() {
        return 0.0;
    }
    1.0 / ((m.mean + 1.0).powi(2) + m.variance)
}

/// `D(v) = 1 + v^2 - 2 v f(v) - v^2 (1 - v^2) f'(v)`.
pub fn implicit_denominator(law: &ClusterLaw, v: f64) -> Result<f64, AnalyticsError> {
    let f = law.pgf(v)?;
    let d1 = law.pgf_d1(v)?;
    Ok(1.0 + v * v - 2.0 * v * f - v * v * (1.0 - v * v) * d1)
}

/// `G(v) = D(v) / (1-v)^2`, evaluated without cancellation.
pub fn reduced_denominator(law: &ClusterLaw, v: f64) -> Result<f64, AnalyticsError> {
    let d1 = law.pgf_d1(v)?;
    let tail_part = match *law.family() {
        LawFamily::Geometric(beta) => {
            // Σ_j j v^j (1-β)^(j-1)
            let w = 1.0 - (1.0 - beta) * v;
            v / (w * w)
        }
        _ => {
            let kmax = law.max_size().unwrap_or(0);
            let mut at_least = 0.0;
            let mut acc = 0.0;
            for j in (1..=kmax).rev() {
                at_least += law.pmf(j);
                acc += f64::from(j) * v.powi(j as i32) * at_least;
            }
            acc
        }
    };
    Ok(1.0 + 2.0 * tail_part + v * v * d1)
}

/// `F(v) = (1-v)^2 / D(v)` for `v` in `[0, 1)`.
pub fn f_of_v(law: &ClusterLaw, v: f64) -> Result<f64, AnalyticsError> {
    if !(0.0..1.0).contains(&v) {
        return Err(AnalyticsError::Domain(format!("F is evaluated on [0, 1), got v = {v}")));
    }
    let d = implicit_denominator(law, v)?;
    if !(d > SINGULAR_TOL) {
        return Err(AnalyticsError::Singular { v, denominator: d });
    }
    Ok((1.0 - v).powi(2) / d)
}

/// `F(v) = 1 / G(v)` on the closed interval `[0, 1]`, with `F(1) = pc`.
pub fn f_of_v_reduced(law: &ClusterLaw, v: f64) -> Result<f64, AnalyticsError> {
    let g = reduced_denominator(law, v)?;
    if !(g.is_finite() && g > 0.0) {
        return Err(AnalyticsError::Singular { v, denominator: g });
    }
    Ok(1.0 / g)
}

/// Visit probability `q(p)`: 1 at or below `pc`, otherwise the root of
/// `F(v) = p` found by bisection.
pub fn solve_q(law: &ClusterLaw, p: f64) -> Result<f64, AnalyticsError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(AnalyticsError::Domain(format!("p must lie in [0, 1], got {p}")));
    }
    if p <= pc(law) {
        return Ok(1.0);
    }
    let g = |v: f64| f_of_v_reduced(law, v).map(|f| f - p);
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    let g_lo = g(lo)?;
    if g_lo == 0.0 {
        return Ok(lo);
    }
    let g_hi = g(hi)?;
    if !(g_lo > 0.0 && g_hi < 0.0) {
        return Err(AnalyticsError::Bracket { p, lo, hi });
    }
    for _ in 0..ROOT_MAX_ITER {
        if hi - lo <= ROOT_TOL {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if g(mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Critical density of the geometric law, `β^2 / (β^2 + β + 2)`.
fn pc_geometric(beta: f64) -> f64 {
    beta * beta / (beta * beta + beta + 2.0)
}

/// Closed-form `q(p)` for the geometric law.
pub fn q_geometric_closed(beta: f64, p: f64) -> Result<f64, AnalyticsError> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(AnalyticsError::Domain(format!("beta must lie in (0, 1), got {beta}")));
    }
    let pcg = pc_geometric(beta);
    if !(p <= 1.0 && p >= pcg * (1.0 - 1e-12)) {
        return Err(AnalyticsError::Domain(format!(
            "closed form holds on [{pcg}, 1], got p = {p}"
        )));
    }
    let root = (p * p * beta - p * p - p * beta + 2.0 * p).max(0.0).sqrt();
    let num = root - p * beta + beta - 1.0;
    let den = p * beta * beta - p * beta + p - beta * beta + 2.0 * beta - 1.0;
    // num and den vanish together at p = (1-β)^2 / (β^2 - β + 1); the
    // conjugate form (1-p) / (root + pβ - β + 1) is equal and regular there.
    let q = if den.abs() > 1e-6 { num / den } else { (1.0 - p) / (root + p * beta - beta + 1.0) };
    Ok(q.min(1.0))
}

fn check_q(q: f64) -> Result<(), AnalyticsError> {
    if (0.0..=1.0).contains(&q) {
        Ok(())
    } else {
        Err(AnalyticsError::Domain(format!("q must lie in [0, 1], got {q}")))
    }
}

fn check_q_open(q: f64) -> Result<(), AnalyticsError> {
    check_q(q)?;
    if q == 1.0 {
        return Err(AnalyticsError::Singular { v: q, denominator: 0.0 });
    }
    Ok(())
}

/// `s = p q^2 f'(q) / 2`.
pub fn s_formula(law: &ClusterLaw, p: f64, q: f64) -> Result<f64, AnalyticsError> {
    check_q(q)?;
    Ok(p * q * q * law.pgf_d1(q)? / 2.0)
}

/// `s_k = p μ_k q^(k+1) k / 2`.
pub fn sk_formula(law: &ClusterLaw, p: f64, q: f64, k: u32) -> Result<f64, AnalyticsError> {
    check_q(q)?;
    let kf = f64::from(k);
    Ok(p * law.pmf(k) * q.powi(k as i32 + 1) * kf / 2.0)
}

/// `r = p q (q^2 f'(q) - q f'(q) - f(q) + 1) / (1 - q)`.
pub fn r_formula(law: &ClusterLaw, p: f64, q: f64) -> Result<f64, AnalyticsError> {
    check_q_open(q)?;
    let f = law.pgf(q)?;
    let d1 = law.pgf_d1(q)?;
    Ok(p * q * (q * q * d1 - q * d1 - f + 1.0) / (1.0 - q))
}

/// `r_k = p μ_k q (k q^(k+1) - k q^k - q^k + 1) / (1 - q)`.
pub fn rk_formula(law: &ClusterLaw, p: f64, q: f64, k: u32) -> Result<f64, AnalyticsError> {
    check_q_open(q)?;
    let kf = f64::from(k);
    let qk = q.powi(k as i32);
    Ok(p * law.pmf(k) * q * (kf * qk * q - kf * qk - qk + 1.0) / (1.0 - q))
}

/// Probability that the first site is a right arrow annihilated by a left
/// arrow: `(1-p)/2 - s - r`.
pub fn arrow_pair_formula(law: &ClusterLaw, p: f64, q: f64) -> Result<f64, AnalyticsError> {
    Ok((1.0 - p) / 2.0 - s_formula(law, p, q)? - r_formula(law, p, q)?)
}

/// Largest size `K` kept in per-size sums at `q`.
///
/// Both `s_k` and `r_k` are at most `p μ_k / (1 - q)`, so the discarded mass
/// is below `P(X > K) / (1 - q)`, which is pushed under [`SERIES_TOL`].
pub fn series_cutoff(law: &ClusterLaw, q: f64) -> u32 {
    if let Some(k) = law.max_size() {
        return k;
    }
    let scale = 1.0 / (1.0 - q.min(1.0 - 1e-12));
    let mut k = 1;
    while law.tail(k) * scale >= SERIES_TOL && k < 1_000_000 {
        k += 1;
    }
    k
}

/// `Σ_k s_k` truncated by [`series_cutoff`].
pub fn sk_series(law: &ClusterLaw, p: f64, q: f64) -> Result<f64, AnalyticsError> {
    (1..=series_cutoff(law, q)).map(|k| sk_formula(law, p, q, k)).sum()
}

/// `Σ_k r_k` truncated by [`series_cutoff`].
pub fn rk_series(law: &ClusterLaw, p: f64, q: f64) -> Result<f64, AnalyticsError> {
    (1..=series_cutoff(law, q)).map(|k| rk_formula(law, p, q, k)).sum()
}

/// Right side minus left side of
/// `q = (1-p)/2 + p q f(q) + s + q ((1-p)/2 - s - r)`.
pub fn recursion_residual(law: &ClusterLaw, p: f64, q: f64) -> Result<f64, AnalyticsError> {
    let s = s_formula(law, p, q)?;
    let r = r_formula(law, p, q)?;
    let half = (1.0 - p) / 2.0;
    Ok(half + p * q * law.pgf(q)? + s + q * (half - s - r) - q)
}

/// Survival probability of a blockade at the origin, `(1 - q)^2`.
pub fn theta_from_q(q: f64) -> f64 {
    (1.0 - q) * (1.0 - q)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvePoint {
    pub p: f64,
    pub q: f64,
    pub theta: f64,
}

/// `(p, q, θ)` along a grid of densities.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalyticCurve {
    pub law: ClusterLaw,
    pub pc: f64,
    pub points: Vec<CurvePoint>,
}

pub fn tabulate_curve(law: &ClusterLaw, grid: &[f64]) -> Result<AnalyticCurve, AnalyticsError> {
    let points = grid
        .iter()
        .map(|&p| {
            let q = solve_q(law, p)?;
            Ok(CurvePoint { p, q, theta: theta_from_q(q) })
        })
        .collect::<Result<Vec<_>, AnalyticsError>>()?;
    Ok(AnalyticCurve { law: law.clone(), pc: pc(law), points })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn families() -> Vec<ClusterLaw> {
        vec![
            ClusterLaw::delta(1),
            ClusterLaw::delta(3),
            ClusterLaw::geometric(0.5).unwrap(),
            ClusterLaw::two_point(5).unwrap(),
            ClusterLaw::custom(vec![0.2, 0.3, 0.1, 0.4]).unwrap(),
            ClusterLaw::power_law(2.5, 10).unwrap(),
        ]
    }

    fn grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
        (0..n)
            .map(|i| if i + 1 == n { hi } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 })
            .collect()
    }

    #[test]
    fn critical_densities() {
        assert!((pc(&ClusterLaw::delta(1)) - 0.25).abs() < 1e-15);
        for k in 1..8 {
            let law = ClusterLaw::two_point(k).unwrap();
            assert!((pc(&law) - 1.0 / f64::from(k + 3)).abs() < 1e-14, "k = {k}");
        }
        assert!((pc(&ClusterLaw::geometric(0.5).unwrap()) - 1.0 / 11.0).abs() < 1e-15);
        for beta in [0.2, 0.5, 0.8] {
            let law = ClusterLaw::geometric(beta).unwrap();
            assert!((pc(&law) - pc_geometric(beta)).abs() < 1e-15);
        }
    }

    #[test]
    fn single_blockade_denominator_and_root() {
        let law = ClusterLaw::delta(1);
        for v in grid(0.0, 0.99, 40) {
            let d = implicit_denominator(&law, v).unwrap();
            assert!((d - (1.0 - v * v).powi(2)).abs() < 1e-14);
            let f = f_of_v(&law, v).unwrap();
            assert!((f - 1.0 / (1.0 + v).powi(2)).abs() < 1e-12);
        }
        assert!((solve_q(&law, 4.0 / 9.0).unwrap() - 0.5).abs() < 1e-12);
        for p in grid(0.25, 1.0, 50) {
            let q = solve_q(&law, p).unwrap();
            assert!((q - (p.powf(-0.5) - 1.0)).abs() < 1e-10, "p = {p}");
        }
    }

    #[test]
    fn reduced_form_matches_direct_form() {
        let mut laws = families();
        laws.push(ClusterLaw::power_law(2.5, 1000).unwrap());
        for law in laws {
            for v in grid(0.0, 0.99, 34) {
                let a = f_of_v(&law, v).unwrap();
                let b = f_of_v_reduced(&law, v).unwrap();
                assert!((a - b).abs() < 1e-9 * b, "{law} v = {v}: {a} vs {b}");
            }
            assert!((f_of_v_reduced(&law, 1.0).unwrap() - pc(&law)).abs() < 1e-13);
        }
    }

    // F(1 - e) - pc is of order e E[X^3] pc, so heavy-tailed laws approach
    // the endpoint slowly: the cutoff-50 power law misses 1e-3 at e = 1e-4.
    #[test]
    fn f_endpoints() {
        for law in families() {
            assert!((f_of_v(&law, 0.0).unwrap() - 1.0).abs() < 1e-15);
            let near = f_of_v(&law, 1.0 - 1e-4).unwrap();
            assert!((near - pc(&law)).abs() < 1e-3 * pc(&law), "{law}: {near}");
        }
        assert!(matches!(f_of_v(&ClusterLaw::delta(1), 1.0), Err(AnalyticsError::Domain(_))));
    }

    #[test]
    fn geometric_closed_form_agrees_with_bisection() {
        let q = q_geometric_closed(0.5, 0.5).unwrap();
        assert!((q - 0.32455532033675905).abs() < 1e-14);
        assert!((q_geometric_closed(0.5, 1.0 / 11.0).unwrap() - 1.0).abs() < 1e-12);
        assert!(q_geometric_closed(0.5, 1.0).unwrap().abs() < 1e-15);
        assert!(q_geometric_closed(0.5, 0.05).is_err());
        // removable singularity of the printed quotient
        let q3 = q_geometric_closed(0.5, 1.0 / 3.0).unwrap();
        let law = ClusterLaw::geometric(0.5).unwrap();
        assert!((q3 - solve_q(&law, 1.0 / 3.0).unwrap()).abs() < 1e-10);
        for beta in [0.2, 0.5, 0.8] {
            let law = ClusterLaw::geometric(beta).unwrap();
            for p in grid(pc(&law), 1.0, 21) {
                let a = solve_q(&law, p).unwrap();
                let b = q_geometric_closed(beta, p).unwrap();
                assert!((a - b).abs() < 1e-10, "beta {beta} p {p}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn q_is_monotone_and_continuous_at_pc() {
        for law in families() {
            let ps = grid(0.0, 1.0, 101);
            let qs: Vec<f64> = ps.iter().map(|&p| solve_q(&law, p).unwrap()).collect();
            assert!(qs.windows(2).all(|w| w[1] <= w[0]), "{law}");
            assert_eq!(qs[100], 0.0);
            let c = pc(&law);
            let mut prev = f64::INFINITY;
            for e in [1e-2, 1e-4, 1e-6, 1e-8] {
                let gap = 1.0 - solve_q(&law, c + e).unwrap();
                assert!(gap < prev && gap < 10.0 * e.sqrt(), "{law} e {e}: {gap}");
                prev = gap;
            }
        }
    }

    #[test]
    fn collision_types() {
        let law = ClusterLaw::geometric(0.5).unwrap();
        let q = q_geometric_closed(0.5, 0.5).unwrap();
        assert!((sk_formula(&law, 0.5, q, 1).unwrap() - 0.013167).abs() < 1e-6);
        assert_eq!(s_formula(&law, 0.3, 0.0).unwrap(), 0.0);
        assert_eq!(r_formula(&law, 0.3, 0.0).unwrap(), 0.0);
        assert!(r_formula(&law, 0.3, 1.0).is_err());
        let d1 = ClusterLaw::delta(1);
        for q in grid(0.0, 0.95, 20) {
            assert!((s_formula(&d1, 0.3, q).unwrap() - 0.15 * q * q).abs() < 1e-15);
            assert!((rk_formula(&d1, 0.3, q, 1).unwrap() - 0.3 * q * (1.0 - q)).abs() < 1e-14);
        }
        let tp = ClusterLaw::two_point(5).unwrap();
        for k in 1..5 {
            assert_eq!(sk_formula(&tp, 0.3, 0.7, k).unwrap(), 0.0);
            assert_eq!(rk_formula(&tp, 0.3, 0.7, k).unwrap(), 0.0);
        }
    }

    #[test]
    fn per_size_series_sum_to_totals() {
        for law in families() {
            for p in grid(pc(&law) + 1e-3, 1.0, 10) {
                let q = solve_q(&law, p).unwrap();
                let s = s_formula(&law, p, q).unwrap();
                let r = r_formula(&law, p, q).unwrap();
                assert!((sk_series(&law, p, q).unwrap() - s).abs() < 1e-10, "{law} p {p}");
                assert!((rk_series(&law, p, q).unwrap() - r).abs() < 1e-10, "{law} p {p}");
            }
        }
    }

    #[test]
    fn recursion_holds_at_roots() {
        assert_eq!(recursion_residual(&ClusterLaw::delta(1), 1.0, 0.0).unwrap(), 0.0);
        let r = recursion_residual(&ClusterLaw::delta(1), 4.0 / 9.0, 0.5).unwrap();
        assert!(r.abs() < 1e-12);
        for law in families() {
            for p in grid(pc(&law) + 1e-3, 1.0, 20) {
                let q = solve_q(&law, p).unwrap();
                let res = recursion_residual(&law, p, q).unwrap();
                assert!(res.abs() < 1e-9, "{law} p {p}: {res}");
                let pair = arrow_pair_formula(&law, p, q).unwrap();
                assert!(pair >= -1e-12, "{law} p {p}: {pair}");
            }
        }
    }

    #[test]
    fn curve_tabulation() {
        let law = ClusterLaw::geometric(0.5).unwrap();
        let curve = tabulate_curve(&law, &[0.05, 1.0 / 11.0, 0.5, 1.0]).unwrap();
        let qs: Vec<f64> = curve.points.iter().map(|c| c.q).collect();
        assert_eq!(&qs[..2], &[1.0, 1.0]);
        assert!((qs[2] - 0.3245553).abs() < 1e-7);
        assert_eq!(qs[3], 0.0);
        assert_eq!(theta_from_q(0.5), 0.25);
        assert_eq!(theta_from_q(1.0), 0.0);
        assert_eq!(theta_from_q(0.0), 1.0);
        assert!(curve.points.iter().all(|c| c.theta == theta_from_q(c.q)));
    }
}
