//! Prints `Q_n` along a doubling ladder next to the analytic `q`.
//!
//! `cargo run --release --example window_bias -- <law> <p> <n_max> <trials>`

use std::time::Instant;

use clustered_ba::estimators::{estimate_q, InvariantPolicy};
use clustered_ba::{ClusterLaw, ExperimentParams};

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let law: ClusterLaw = args.first().map_or("delta:1", String::as_str).parse().expect("law spec");
    let p: f64 = args.get(1).map_or(Ok(0.3), |s| s.parse()).expect("p");
    let n_max: usize = args.get(2).map_or(Ok(10_000), |s| s.parse()).expect("n");
    let trials: u64 = args.get(3).map_or(Ok(1000), |s| s.parse()).expect("trials");
    let mut ladder = vec![n_max];
    while ladder[0] > 100 {
        ladder.insert(0, ladder[0] / 2);
    }
    let start = Instant::now();
    let reps = estimate_q(&ExperimentParams::new(p, law, n_max, 1), &ladder, trials, &InvariantPolicy::off())
        .expect("estimate");
    for r in &reps {
        println!(
            "n={:>8} q_hat={:.5} ci=({:.5},{:.5}) q={:.5}",
            r.n_sites,
            r.estimate,
            r.ci.0,
            r.ci.1,
            r.analytic.unwrap_or(f64::NAN)
        );
    }
    eprintln!("{:.1?}", start.elapsed());
}
