//! Space-time diagrams: position across, time upward, one polyline per
//! particle from its start to its annihilation or to the time horizon.

use std::fmt::Write as _;

use thiserror::Error;

use crate::config::{Configuration, Species};
use crate::resolver::{CollisionKind, Outcome};

/// Largest configuration drawn.
pub const MAX_SVG_SITES: usize = 5000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DiagramError {
    #[error("{n} sites is too many to draw (limit {max}); resolve a sub-window or write CSV instead")]
    TooLarge { n: usize, max: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SvgOptions {
    pub width: f64,
    pub height: f64,
    /// Last time shown. Defaults to 1.2 times the last collision.
    pub horizon: Option<f64>,
}

impl Default for SvgOptions {
    fn default() -> Self {
        Self { width: 1200.0, height: 700.0, horizon: None }
    }
}

/// Renders `outcome`, which must be the resolution of `config`.
pub fn space_time_svg(config: &Configuration, outcome: &Outcome, opts: &SvgOptions) -> Result<String, DiagramError> {
    let n = config.len();
    if n > MAX_SVG_SITES {
        return Err(DiagramError::TooLarge { n, max: MAX_SVG_SITES });
    }
    let mut death = vec![f64::INFINITY; n];
    for rec in &outcome.collisions {
        match rec.kind {
            CollisionKind::ArrowArrow { left_site, right_site } => {
                death[left_site - 1] = rec.time;
                death[right_site - 1] = rec.time;
            }
            CollisionKind::ArrowCluster { arrow_site, cluster_site, remaining } => {
                death[arrow_site - 1] = rec.time;
                if remaining == 0 {
                    death[cluster_site - 1] = rec.time;
                }
            }
        }
    }
    let last = outcome.collisions.last().map_or(0.0, |r| r.time);
    let horizon = opts.horizon.unwrap_or(if last > 0.0 { 1.2 * last } else { 1.0 });

    let xs = config.positions();
    let (mut lo, mut hi) = (config.origin(), config.origin());
    for x in xs {
        lo = lo.min(*x);
        hi = hi.max(*x);
    }
    let pad = 0.05 * (hi - lo).max(1.0);
    let (lo, hi) = (lo - pad, hi + pad);
    let sx = |x: f64| (x - lo) / (hi - lo) * opts.width;
    let sy = |t: f64| opts.height - t / horizon * opts.height;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#,
        w = opts.width,
        h = opts.height
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let ox = sx(config.origin());
    let _ = writeln!(
        svg,
        r##"<line x1="{ox:.2}" y1="0" x2="{ox:.2}" y2="{h}" stroke="#bbb" stroke-dasharray="4 4"/>"##,
        h = opts.height
    );
    for (i, (&x0, &s)) in xs.iter().zip(config.species()).enumerate() {
        if !s.is_live() {
            continue;
        }
        let end = death[i].min(horizon);
        let v = f64::from(s.velocity());
        let (colour, width) = match s {
            Species::LeftArrow => ("#1f5fbf", 1.0),
            Species::RightArrow => ("#c0392b", 1.0),
            Species::Cluster(m) => ("#222", 1.0 + f64::from(m).ln_1p()),
        };
        let _ = writeln!(
            svg,
            r#"<polyline data-site="{site}" points="{:.2},{:.2} {:.2},{:.2}" stroke="{colour}" stroke-width="{width:.2}" fill="none"/>"#,
            sx(x0),
            sy(0.0),
            sx(x0 + v * end),
            sy(end),
            site = i + 1
        );
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Side;
    use crate::resolver::resolve;

    #[test]
    fn one_polyline_per_live_particle() {
        let config = Configuration::new(
            vec![1.0, 2.0, 3.0, 5.5],
            vec![Species::RightArrow, Species::Cluster(0), Species::Cluster(2), Species::LeftArrow],
            0.0,
            Side::RightHalfLine,
        )
        .unwrap();
        let out = resolve(&config).unwrap();
        let svg = space_time_svg(&config, &out, &SvgOptions::default()).unwrap();
        assert_eq!(svg.matches("<polyline").count(), 3);
        assert!(svg.starts_with("<svg") && svg.ends_with("</svg>\n"));
    }

    #[test]
    fn rejects_large_configurations() {
        let n = MAX_SVG_SITES + 1;
        let config = Configuration::new(
            (1..=n).map(|i| i as f64).collect(),
            vec![Species::Cluster(1); n],
            0.0,
            Side::RightHalfLine,
        )
        .unwrap();
        let out = resolve(&config).unwrap();
        assert_eq!(
            space_time_svg(&config, &out, &SvgOptions::default()),
            Err(DiagramError::TooLarge { n, max: MAX_SVG_SITES })
        );
    }
}
