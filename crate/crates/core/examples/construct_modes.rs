// Combine an original and a generated dataset in the four construction modes.
//
// Run with `cargo run --example construct_modes`.

use zdebias::synth::generate;
use zdebias::{construct, BiasSpec, ConstructMode, Dataset, FilterConfig, Instance, Label};

/// Re-ids a dataset so two generated corpora can be combined.
fn prefixed(data: Dataset, prefix: &str) -> zdebias::Result<Dataset> {
    let name = data.name.clone();
    let instances = data
        .into_instances()
        .into_iter()
        .map(|inst| Instance {
            id: format!("{prefix}{}", inst.id),
            ..inst
        })
        .collect();
    Dataset::new(name, instances)
}

pub fn run_example() -> zdebias::Result<()> {
    let original = prefixed(
        generate(&[BiasSpec::new("nobody", Label::Contradiction, 300, 0.9).seeded(1)], 1_500, 500, 1)?,
        "orig-",
    )?;
    let generated = prefixed(
        generate(&[BiasSpec::new("outdoors", Label::Entailment, 600, 0.9).seeded(2)], 3_000, 500, 2)?,
        "gen-",
    )?;
    let config = FilterConfig {
        batch_size: 500,
        ..FilterConfig::default()
    };

    for mode in [ConstructMode::MergePlain, ConstructMode::ZAug, ConstructMode::ParZ, ConstructMode::SeqZ] {
        let out = construct(mode, &original, &generated, &config, None)?;
        let from_original = out.ids().filter(|id| id.starts_with("orig-")).count();
        println!(
            "{mode:<10?} {:>5} instances ({from_original} original, {} generated)",
            out.len(),
            out.len() - from_original
        );
        if mode == ConstructMode::ZAug {
            assert_eq!(from_original, original.len());
        }
    }
    Ok(())
}

fn main() -> zdebias::Result<()> {
    run_example()
}
