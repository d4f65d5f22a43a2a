// Train the bag-of-words hypothesis-only model, save it, and use it for
// confidence filtering and as a feature.
//
// Run with `cargo run --example hypothesis_only`.

use zdebias::synth::generate;
use zdebias::zstats::count_dataset;
use zdebias::{
    biased_features, confidence_filter, BiasSpec, BowModel, ConfidenceConfig, FeatureConfig, Label, ProbSource,
    ZConfig,
};

pub fn run_example() -> zdebias::Result<()> {
    let specs = [
        BiasSpec::new("never", Label::Contradiction, 500, 0.95).seeded(1),
        BiasSpec::new("someone", Label::Entailment, 500, 0.95).seeded(2),
    ];
    let data = generate(&specs, 2_000, 400, 5)?;
    let model = BowModel::train(&data, 1.0)?;

    let dir = tempfile::tempdir().map_err(|e| zdebias::Error::Config(e.to_string()))?;
    let path = dir.path().join("model.json");
    model.save(&path)?;
    let model = BowModel::load(&path)?;
    println!("vocabulary of {} tokens", model.vocab_size());
    println!("p(label | \"never\") = {:?}", model.predict_proba("never"));

    let config = ConfidenceConfig {
        tau: 0.6,
        prob_source: ProbSource::BuiltinBow,
    };
    let (kept, dropped) = confidence_filter(&data, &config, Some(&model))?;
    println!("confidence filter at tau 0.6: kept {}, dropped {}", kept.len(), dropped.len());

    let features = FeatureConfig {
        use_hypo_pred: true,
        ..FeatureConfig::default()
    };
    let table = count_dataset(&data, &features, Some(&model))?;
    let biased = biased_features(&table, &ZConfig { k: 3, ..ZConfig::default() });
    for label in Label::ALL {
        let names: Vec<&str> = biased.features(label).map(|f| f.as_str()).collect();
        println!("B({label}) = {names:?}");
    }
    assert!(biased.contains(Label::Contradiction, "hypo-only-pred=2"));
    Ok(())
}

fn main() -> zdebias::Result<()> {
    run_example()
}
