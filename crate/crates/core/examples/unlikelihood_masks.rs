// Token masks for instances rejected by z-filtering.
//
// Run with `cargo run --example unlikelihood_masks`.

use zdebias::synth::generate;
use zdebias::ulmask::{masks_from_rejections, read_mask_file, write_mask_file};
use zdebias::{z_filter, BiasSpec, FeatureConfig, FilterConfig, Label, Masker};

pub fn run_example() -> zdebias::Result<()> {
    let specs = [
        BiasSpec::new("nobody", Label::Contradiction, 400, 0.9).seeded(1),
        BiasSpec::new("tall", Label::Neutral, 300, 0.9).in_premise().seeded(2),
    ];
    let data = generate(&specs, 1_500, 300, 3)?;
    let config = FilterConfig {
        batch_size: 250,
        ..FilterConfig::default()
    };
    let outcome = z_filter(&data, None, &config, None)?;

    // Each rejection carries the biased features that caused it, so every
    // rejected instance gets a mask.
    let masks = masks_from_rejections(&outcome.rejected, &outcome.rejections, true)?;
    let dir = tempfile::tempdir().map_err(|e| zdebias::Error::Config(e.to_string()))?;
    let path = dir.path().join("masks.jsonl");
    write_mask_file(&masks, &path)?;
    assert_eq!(read_mask_file(&path)?, masks);
    println!("{} rejected instances masked", masks.len());

    // Masking against the final biased sets instead needs every instance to
    // still contain one of them.
    let features = FeatureConfig::default();
    let masker = Masker::new(&outcome.final_biased, &features);
    let still_biased = outcome.rejected.iter().filter(|inst| masker.compute(inst).is_ok()).count();
    println!("{still_biased} of them also match the final biased sets");

    for m in masks.iter().take(5) {
        let show = |tokens: &[String], mask: &[u8]| {
            tokens
                .iter()
                .zip(mask)
                .map(|(t, &b)| if b == 0 { format!("[{t}]") } else { t.clone() })
                .collect::<Vec<_>>()
                .join(" ")
        };
        println!("{}: {}  ||  {}", m.id, show(&m.premise_tokens, &m.premise_mask), show(&m.hypothesis_tokens, &m.hypothesis_mask));
    }
    assert_eq!(masks.len(), outcome.rejected.len());
    Ok(())
}

fn main() -> zdebias::Result<()> {
    run_example()
}
