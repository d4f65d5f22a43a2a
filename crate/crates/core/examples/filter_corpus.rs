// Batch-wise z-filtering of a biased corpus, with the per-batch trace.
//
// Run with `cargo run --example filter_corpus`.

use zdebias::synth::generate;
use zdebias::zstats::count_dataset;
use zdebias::{full_report, z_filter, BiasSpec, Dataset, FeatureConfig, FilterConfig, Label, ZConfig};

fn marker_z(data: &Dataset, spec: &BiasSpec) -> zdebias::Result<f64> {
    let table = count_dataset(data, &FeatureConfig::default(), None)?;
    let report = full_report(&table, &ZConfig::default());
    Ok(report.get(&spec.feature_name(), spec.target_label).map_or(0.0, |r| r.z))
}

pub fn run_example() -> zdebias::Result<()> {
    let specs = [
        BiasSpec::new("nobody", Label::Contradiction, 1_000, 0.9).seeded(1),
        BiasSpec::new("sleeping", Label::Neutral, 1_000, 0.85).seeded(2),
    ];
    let data = generate(&specs, 8_000, 3_000, 11)?;
    let config = FilterConfig {
        batch_size: 1_000,
        ..FilterConfig::default()
    };
    let outcome = z_filter(&data, None, &config, None)?;

    for t in &outcome.trace {
        println!(
            "batch {:>2}: accepted {:>4} rejected {:>4} |B| = {:?}",
            t.batch, t.accepted, t.rejected, t.biased_sizes
        );
    }
    println!(
        "accepted {}, rejected {} ({:.1}%)",
        outcome.accepted.len(),
        outcome.rejected.len(),
        100.0 * outcome.rejection_rate()
    );
    for spec in &specs {
        let before = marker_z(&data, spec)?;
        let after = marker_z(&outcome.accepted, spec)?;
        println!("{}: z {before:.2} -> {after:.2}", spec.feature_name());
        assert!(after < 0.25 * before);
    }
    Ok(())
}

fn main() -> zdebias::Result<()> {
    run_example()
}
