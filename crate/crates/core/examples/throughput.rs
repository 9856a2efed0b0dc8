//! Times configuration sampling and resolution for one window size.
//!
//! `cargo run --release --example throughput -- [n] [trials] [p]`

use std::time::Instant;

use clustered_ba::resolver::resolve_with;
use clustered_ba::{sample_config, ClusterLaw, ExperimentParams};

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let n: usize = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(100_000);
    let trials: u64 = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(50);
    let p: f64 = args.get(3).and_then(|s| s.parse().ok()).unwrap_or(0.3);
    let params = ExperimentParams::new(p, ClusterLaw::delta(1), n, 1);

    let t0 = Instant::now();
    let configs: Vec<_> = (0..trials).map(|t| sample_config(&params, t)).collect();
    let sample = t0.elapsed();
    let t1 = Instant::now();
    let mut visited = 0;
    for c in &configs {
        visited += usize::from(!resolve_with(c, &mut ()).unwrap().left_exit_times.is_empty());
    }
    let solve = t1.elapsed();
    let per_site = |d: std::time::Duration| d.as_secs_f64() * 1e9 / (n as f64 * trials as f64);
    println!("n={n} trials={trials} p={p} visited={visited}");
    println!("sample  {:.1} ns/site", per_site(sample));
    println!("resolve {:.1} ns/site", per_site(solve));
}
