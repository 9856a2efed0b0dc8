use std::fmt::Write as _;
use std::fs;

use clustered_ba::analytics::{self, tabulate_curve};
use clustered_ba::config::Side;
use clustered_ba::diagram::{space_time_svg, SvgOptions, MAX_SVG_SITES};
use clustered_ba::estimators::{
    estimate_arrival_symmetry, estimate_q, estimate_sr, estimate_theta, estimate_theta_ladder,
    estimate_w_curve, EstimateError, EstimateReport, InvariantPolicy,
};
use clustered_ba::resolver::{CollisionKind, Outcome};
use clustered_ba::{resolve as resolve_fast, resolve_naive, Configuration, ExperimentParams, Species};
use serde_json::{json, Value};

use crate::grid::parse_grid;
use crate::manifest::RunManifest;
use crate::output::{emit, emit_csv, fmt17, fmt_opt};
use crate::{CliError, EstimateArgs, Format, Quantity, ResolveArgs, SolveArgs, SweepArgs};

fn failure(e: impl std::fmt::Display) -> CliError {
    CliError::Failure(e.to_string())
}

fn estimate_error(e: EstimateError) -> CliError {
    match e {
        EstimateError::Invalid(_) | EstimateError::Config(_) | EstimateError::Law(_) => CliError::Usage(e.to_string()),
        _ => CliError::Failure(e.to_string()),
    }
}

fn json_text(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("json value serializes") + "\n"
}

pub fn solve(a: SolveArgs) -> Result<(), CliError> {
    let grid = parse_grid(&a.p)?;
    let mut manifest = RunManifest::start(
        "solve",
        json!({ "law": a.law.to_string(), "p": a.p, "format": if a.format == Format::Json { "json" } else { "csv" } }),
        None,
    );
    let curve = tabulate_curve(&a.law, &grid).map_err(failure)?;
    manifest.output(a.out.as_deref());
    manifest.finish();
    match a.format {
        Format::Json => {
            let body = json!({ "manifest": manifest, "law": curve.law, "pc": curve.pc, "points": curve.points });
            emit(a.out.as_deref(), &json_text(&body))
        }
        Format::Csv => {
            let mut csv = String::from("p,q,theta,pc\n");
            for pt in &curve.points {
                let _ = writeln!(csv, "{},{},{},{}", fmt17(pt.p), fmt17(pt.q), fmt17(pt.theta), fmt17(curve.pc));
            }
            emit_csv(a.out.as_deref(), &csv, &manifest)
        }
    }
}

pub fn estimate(a: EstimateArgs) -> Result<(), CliError> {
    let mut params = ExperimentParams::new(a.p, a.law.clone(), a.n, a.seed).with_spacing(a.spacing);
    let policy = InvariantPolicy { superadditivity_cuts: a.superadditivity_cuts, ..InvariantPolicy::default() };
    let mut ladder: Vec<usize> = a.ladder.iter().copied().filter(|m| *m < a.n).collect();
    ladder.sort_unstable();
    ladder.dedup();
    ladder.push(a.n);
    let quantity = match a.quantity {
        Quantity::Q => "q",
        Quantity::Theta => "theta",
        Quantity::Sr => "sr",
        Quantity::Wcurve => "wcurve",
        Quantity::Symmetry => "symmetry",
    };
    let mut manifest = RunManifest::start(
        "estimate",
        json!({
            "quantity": quantity, "law": a.law.to_string(), "p": a.p, "n": a.n, "trials": a.trials,
            "spacing": a.spacing.to_string(), "ladder": ladder, "k_max": a.k_max, "j": a.j, "k": a.k,
            "superadditivity_cuts": a.superadditivity_cuts,
        }),
        Some(a.seed),
    );
    let (reports, extra): (Vec<EstimateReport>, Value) = match a.quantity {
        Quantity::Q => (estimate_q(&params, &ladder, a.trials, &policy).map_err(estimate_error)?, Value::Null),
        Quantity::Theta => {
            params = params.with_side(Side::TwoSided);
            (estimate_theta_ladder(&params, &ladder, a.trials, &policy).map_err(estimate_error)?, Value::Null)
        }
        Quantity::Sr => {
            let rep = estimate_sr(&params, a.trials, a.k_max, &policy).map_err(estimate_error)?;
            let mut v: Vec<EstimateReport> = rep.rows.iter().flat_map(|r| [r.s.clone(), r.r.clone()]).collect();
            v.extend([rep.q, rep.arrow_pair, rep.survived, rep.closure]);
            (v, json!({ "recursion": rep.recursion }))
        }
        Quantity::Wcurve => {
            let rep = estimate_w_curve(&params, &ladder, a.trials, &policy).map_err(estimate_error)?;
            let mut v = rep.points;
            v.push(rep.theta_sup);
            (v, json!({ "theta_sup_flagged": rep.flagged }))
        }
        Quantity::Symmetry => {
            let rep = estimate_arrival_symmetry(&params, a.j, a.k, a.trials).map_err(estimate_error)?;
            (vec![rep.forward, rep.reverse], json!({ "paired_sum": rep.paired_sum, "paired_ci": rep.paired_ci }))
        }
    };
    manifest.output(a.out.as_deref());
    manifest.finish();
    let mut body = json!({ "manifest": manifest, "reports": reports });
    if !extra.is_null() {
        body["extra"] = extra;
    }
    emit(a.out.as_deref(), &json_text(&body))
}

fn collisions_csv(outcome: &Outcome) -> String {
    let mut csv = String::from("time,position,kind,left_site,right_site,remaining\n");
    for rec in &outcome.collisions {
        let (l, r) = rec.sites();
        let (kind, remaining) = match rec.kind {
            CollisionKind::ArrowArrow { .. } => ("arrow_arrow", String::new()),
            CollisionKind::ArrowCluster { remaining, .. } => ("arrow_cluster", remaining.to_string()),
        };
        let _ = writeln!(csv, "{},{},{kind},{l},{r},{remaining}", fmt17(rec.time), fmt17(rec.position));
    }
    csv
}

fn survivors_csv(config: &Configuration, outcome: &Outcome) -> String {
    let mut csv = String::from("site,position,species,multiplicity,exit_time\n");
    let mut exits = outcome.left_exit_times.iter();
    for s in &outcome.survivors {
        let (species, mult) = match s.species {
            Species::LeftArrow => ("left", String::new()),
            Species::RightArrow => ("right", String::new()),
            Species::Cluster(m) => ("cluster", m.to_string()),
        };
        let exit = if s.species == Species::LeftArrow { fmt_opt(exits.next().copied()) } else { String::new() };
        let _ = writeln!(csv, "{},{},{species},{mult},{exit}", s.site, fmt17(config.position(s.site)));
    }
    csv
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

pub fn resolve(a: ResolveArgs) -> Result<(), CliError> {
    let text = fs::read_to_string(&a.fixture)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", a.fixture.display())))?;
    let config = Configuration::from_fixture(&text).map_err(|e| CliError::Usage(e.to_string()))?;
    if a.svg.is_some() && config.len() > MAX_SVG_SITES {
        return Err(CliError::Usage(format!(
            "{} sites is too many for an SVG (limit {MAX_SVG_SITES}); drop --svg or cut the fixture to a sub-window",
            config.len()
        )));
    }
    let mut manifest = RunManifest::start(
        "resolve",
        json!({ "fixture": a.fixture, "naive": a.naive, "sites": config.len() }),
        None,
    );
    let outcome = if a.naive { resolve_naive(&config) } else { resolve_fast(&config) }.map_err(failure)?;
    manifest.output(a.collisions.as_deref());
    manifest.output(a.survivors.as_deref());
    manifest.output(a.svg.as_deref());
    manifest.finish();
    emit_csv(a.collisions.as_deref(), &collisions_csv(&outcome), &manifest)?;
    if let Some(path) = a.survivors.as_deref() {
        emit_csv(Some(path), &survivors_csv(&config, &outcome), &manifest)?;
    }
    if let Some(path) = a.svg.as_deref() {
        let svg = space_time_svg(&config, &outcome, &SvgOptions::default()).map_err(|e| CliError::Usage(e.to_string()))?;
        let meta = format!("<metadata>{}</metadata>\n", xml_escape(manifest.to_json_pretty().trim_end()));
        let split = svg.find('\n').map_or(svg.len(), |i| i + 1);
        let svg = format!("{}{}{}", &svg[..split], meta, &svg[split..]);
        emit(Some(path), &svg)?;
    }
    Ok(())
}

struct SweepRow {
    p: f64,
    q_hat: EstimateReport,
    theta_hat: EstimateReport,
}

fn sweep_point(params: &ExperimentParams, trials: u64) -> Result<SweepRow, CliError> {
    let policy = InvariantPolicy::default();
    let q_hat = estimate_q(params, &[params.n], trials, &policy).map_err(estimate_error)?.remove(0);
    let two = params.clone().with_side(Side::TwoSided);
    let theta_hat = estimate_theta(&two, trials, &policy).map_err(estimate_error)?;
    Ok(SweepRow { p: params.p, q_hat, theta_hat })
}

pub fn sweep(a: SweepArgs) -> Result<(), CliError> {
    let grid = parse_grid(&a.p)?;
    let combos: Vec<_> = a.law.iter().flat_map(|l| a.spacing.iter().map(move |s| (l, *s))).collect();
    let labelled = combos.len() > 1;
    let mut manifest = RunManifest::start(
        "sweep",
        json!({
            "law": a.law.iter().map(ToString::to_string).collect::<Vec<_>>(),
            "spacing": a.spacing.iter().map(ToString::to_string).collect::<Vec<_>>(),
            "p": a.p, "n": a.n, "trials": a.trials, "analytic_only": a.analytic_only,
        }),
        Some(a.seed),
    );
    let prefix_header = if labelled { "law,spacing," } else { "" };
    let mut csv = String::from(prefix_header);
    csv.push_str(if a.analytic_only {
        "p,q,theta,pc\n"
    } else {
        "p,n,trials,q_hat,ci_lo,ci_hi,q_analytic,theta_hat,theta_analytic\n"
    });
    for (law, spacing) in combos {
        let prefix = if labelled { format!("{law},{spacing},") } else { String::new() };
        let pc = analytics::pc(law);
        for &p in &grid {
            let q = analytics::solve_q(law, p).map_err(failure)?;
            let theta = analytics::theta_from_q(q);
            if a.analytic_only {
                let _ = writeln!(csv, "{prefix}{},{},{},{}", fmt17(p), fmt17(q), fmt17(theta), fmt17(pc));
                continue;
            }
            let params = ExperimentParams::new(p, law.clone(), a.n, a.seed).with_spacing(spacing);
            let row = sweep_point(&params, a.trials)?;
            let _ = writeln!(
                csv,
                "{prefix}{},{},{},{},{},{},{},{},{}",
                fmt17(row.p),
                a.n,
                a.trials,
                fmt17(row.q_hat.estimate),
                fmt17(row.q_hat.ci.0),
                fmt17(row.q_hat.ci.1),
                fmt17(q),
                fmt17(row.theta_hat.estimate),
                fmt17(theta)
            );
        }
    }
    manifest.output(a.out.as_deref());
    manifest.finish();
    emit_csv(a.out.as_deref(), &csv, &manifest)
}

