use clustered_ba::config::{sample_config, Configuration, ExperimentParams, Side, SpacingLaw};
use clustered_ba::resolver::resolve;
use clustered_ba::ClusterLaw;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn fixture_text_resolves_identically(
        p in 0.0..=1.0f64,
        n in 1..150usize,
        seed in any::<u64>(),
        two_sided in any::<bool>(),
        uniform in any::<bool>(),
    ) {
        let side = if two_sided { Side::TwoSided } else { Side::RightHalfLine };
        let spacing = if uniform { SpacingLaw::Uniform { lo: 0.0, hi: 1.0 } } else { SpacingLaw::default() };
        let params = ExperimentParams::new(p, ClusterLaw::geometric(0.4).unwrap(), n, seed)
            .with_side(side)
            .with_spacing(spacing);
        let config = sample_config(&params, 3);
        let reread = Configuration::from_fixture(&config.to_fixture()).unwrap();
        prop_assert_eq!(&reread, &config);
        prop_assert_eq!(resolve(&reread).unwrap(), resolve(&config).unwrap());
    }
}

#[test]
fn hand_written_fixture() {
    let text = "# three sites\n@origin 0\n@side right\n5 C 2\n6 L\n8 L\n";
    let config = Configuration::from_fixture(text).unwrap();
    let out = resolve(&config).unwrap();
    assert_eq!(out.collisions.len(), 2);
    assert!(out.survivors.is_empty());
}
