use clustered_ba::analytics::{self, q_geometric_closed, recursion_residual, solve_q};
use clustered_ba::estimators::{estimate_arrival_symmetry, superadditivity_violation};
use clustered_ba::resolver::check_outcome;
use clustered_ba::rng::{trial_stream, SALT_AUX};
use clustered_ba::{resolve, resolve_naive, sample_config, ClusterLaw, ExperimentParams, SpacingLaw};
use rand::Rng;

const LAWS: [&str; 5] = ["delta:1", "delta:3", "geom:0.5", "twopoint:5", "pmf:0.2,0.5,0.3"];
const PS: [f64; 4] = [0.1, 0.25, 0.5, 0.9];
const SIGMAS: f64 = 4.0;

fn law(s: &str) -> ClusterLaw {
    s.parse().expect("built-in law parses")
}

fn report(name: &str, ok: bool, detail: String) -> bool {
    println!("{} {name}: {detail}", if ok { "PASS" } else { "FAIL" });
    ok
}

fn random_params(seed: u64, i: u64) -> ExperimentParams {
    let mut rng = trial_stream(seed, SALT_AUX, i);
    let n = rng.gen_range(1..=200);
    let l = law(LAWS[rng.gen_range(0..LAWS.len())]);
    let p = PS[rng.gen_range(0..PS.len())];
    let spacing = if rng.gen_bool(0.5) { SpacingLaw::Exponential { rate: 1.0 } } else { SpacingLaw::Uniform { lo: 0.0, hi: 2.0 } };
    ExperimentParams::new(p, l, n, seed).with_spacing(spacing)
}

fn oracle_and_superadditivity(seed: u64, configs: usize) -> (bool, bool) {
    let (mut mismatches, mut broken, mut errors, mut super_fail, mut cuts) = (0u64, 0u64, 0u64, 0u64, 0u64);
    for i in 0..configs as u64 {
        let params = random_params(seed, i);
        let config = sample_config(&params, i);
        match (resolve(&config), resolve_naive(&config)) {
            (Ok(a), Ok(b)) => {
                mismatches += u64::from(a != b);
                broken += u64::from(check_outcome(&config, &a).is_err());
            }
            _ => errors += 1,
        }
        let n = config.len();
        if n >= 2 {
            cuts += (n - 1) as u64;
            match superadditivity_violation(&config, 1, n, 1..n) {
                Ok(None) => {}
                _ => super_fail += 1,
            }
        }
    }
    let oracle = report(
        "oracle",
        mismatches == 0 && broken == 0 && errors == 0,
        format!("{configs} configurations, {mismatches} mismatches, {broken} invariant failures, {errors} errors"),
    );
    let sup = report(
        "superadditivity",
        super_fail == 0,
        format!("{cuts} cuts over {configs} configurations, {super_fail} violations"),
    );
    (oracle, sup)
}

fn grid(lo: f64, hi: f64, k: usize) -> impl Iterator<Item = f64> {
    (0..k).map(move |i| if i + 1 == k { hi } else { lo + (hi - lo) * i as f64 / (k - 1) as f64 })
}

fn erratum() -> bool {
    let delta = law("delta:1");
    let mut worst: f64 = 0.0;
    for p in grid(0.25, 1.0, 40) {
        let q = solve_q(&delta, p).unwrap_or(f64::NAN);
        worst = worst.max((q - (1.0 / p.sqrt() - 1.0)).abs());
    }
    for beta in [0.3, 0.5, 0.8] {
        let g = law(&format!("geom:{beta}"));
        let pc = analytics::pc(&g);
        for p in grid(pc, 1.0, 25) {
            let a = solve_q(&g, p).unwrap_or(f64::NAN);
            let b = q_geometric_closed(beta, p).unwrap_or(f64::NAN);
            worst = worst.max((a - b).abs());
        }
    }
    report("erratum", worst <= 1e-10, format!("max |q - closed form| = {worst:.3e}"))
}

fn closure() -> bool {
    let mut worst: f64 = 0.0;
    for name in LAWS.iter().copied().chain(["powerlaw:2.5,10"]) {
        let l = law(name);
        let pc = analytics::pc(&l);
        for p in grid(pc.max(1e-3), 1.0, 20) {
            let r = solve_q(&l, p).and_then(|q| recursion_residual(&l, p, q)).unwrap_or(f64::NAN);
            worst = worst.max(r.abs());
        }
    }
    report("closure", worst < 1e-9, format!("max |recursion residual| = {worst:.3e}"))
}

fn symmetry(seed: u64) -> bool {
    let params = ExperimentParams::new(0.3, law("delta:1"), 200, seed);
    let mut ok = true;
    let mut detail = Vec::new();
    for (j, k) in [(1, 1), (1, 2)] {
        match estimate_arrival_symmetry(&params, j, k, 2000) {
            Ok(r) => {
                let se = (r.forward.std_error.powi(2) + r.reverse.std_error.powi(2)).sqrt();
                ok &= (r.paired_sum - 1.0).abs() <= SIGMAS * se.max(1e-3);
                detail.push(format!("({j},{k}) sum {:.4} se {:.4}", r.paired_sum, se));
            }
            Err(e) => {
                ok = false;
                detail.push(format!("({j},{k}) error {e}"));
            }
        }
    }
    report("symmetry", ok, detail.join(", "))
}

/// Runs every suite, printing one line each. Deterministic for a given seed.
pub fn run(seed: u64, configs: usize) -> bool {
    let (oracle, sup) = oracle_and_superadditivity(seed, configs);
    let results = [oracle, erratum(), closure(), sup, symmetry(seed)];
    results.iter().all(|&x| x)
}
