// Plant three markers in a synthetic corpus and find them again with z-statistics.
//
// Run with `cargo run --example analyze_planted`.

use zdebias::synth::generate;
use zdebias::zstats::count_dataset;
use zdebias::{biased_features, expected_z, full_report, BiasSpec, FeatureConfig, Label, ZConfig};

pub fn run_example() -> zdebias::Result<()> {
    let specs = [
        BiasSpec::new("nobody", Label::Contradiction, 600, 0.8).seeded(1),
        BiasSpec::new("outdoors", Label::Entailment, 400, 0.7).seeded(2),
        BiasSpec::new("tall", Label::Neutral, 300, 0.6).in_premise().seeded(3),
    ];
    let data = generate(&specs, 5_000, 2_000, 7)?;
    let table = count_dataset(&data, &FeatureConfig::default(), None)?;
    let report = full_report(&table, &ZConfig::default());
    let biased = biased_features(&table, &ZConfig { k: 5, ..ZConfig::default() });

    println!("{} instances, {} distinct features", data.len(), table.num_features());
    for spec in &specs {
        let row = report
            .get(&spec.feature_name(), spec.target_label)
            .expect("marker was counted");
        println!(
            "{:<22} n={:<4} z={:>7.3} (expected {:.3})",
            spec.feature_name(),
            row.n,
            row.z,
            expected_z(spec)
        );
        assert!((row.z - expected_z(spec)).abs() < 1e-9);
    }
    for label in Label::ALL {
        let top: Vec<String> = biased
            .rows(label)
            .iter()
            .map(|r| format!("{} ({:.1})", r.feature, r.z))
            .collect();
        println!("B({label}) = {}", top.join(", "));
        assert_eq!(
            biased.rows(label)[0].feature.as_str(),
            specs.iter().find(|s| s.target_label == label).unwrap().feature_name()
        );
    }
    Ok(())
}

fn main() -> zdebias::Result<()> {
    run_example()
}
