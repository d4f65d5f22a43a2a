// The command-line workflow, driven in-process: synth, analyze, filter, mask.
//
// Run with `cargo run --example cli_pipeline`. The same steps with the binary:
//
// ```text
// zdebias synth   --spec spec.toml --out-dir out/synth
// zdebias analyze --input out/synth/synth.jsonl --out-dir out/analyze
// zdebias filter  --input out/synth/synth.jsonl --out-dir out/filter --batch-size 500
// zdebias mask    --input out/filter/rejected.jsonl --rejections out/filter/rejections.jsonl --out-dir out/mask
// ```

use zdebias::cli::run_from_args;

const SPEC: &str = r#"
background_count = 3000
vocab_size = 500
seed = 1

[[bias]]
marker = "nobody"
placement = "hypothesis"
target_label = "contradiction"
occurrences = 500
target_fraction = 0.9
rng_seed = 2
"#;

pub fn run_example() -> zdebias::Result<()> {
    let dir = tempfile::tempdir().map_err(|e| zdebias::Error::Config(e.to_string()))?;
    let root = dir.path().to_str().expect("utf-8 temp path").to_owned();
    let spec = format!("{root}/spec.toml");
    std::fs::write(&spec, SPEC).map_err(|e| zdebias::Error::Config(e.to_string()))?;

    run_from_args(["synth", "--spec", &spec, "--out-dir", &format!("{root}/synth")])?;
    let corpus = format!("{root}/synth/synth.jsonl");
    run_from_args(["analyze", "--input", &corpus, "--out-dir", &format!("{root}/analyze"), "--k", "3"])?;
    run_from_args(["filter", "--input", &corpus, "--out-dir", &format!("{root}/filter"), "--batch-size", "500"])?;
    run_from_args([
        "mask",
        "--input",
        &format!("{root}/filter/rejected.jsonl"),
        "--rejections",
        &format!("{root}/filter/rejections.jsonl"),
        "--out-dir",
        &format!("{root}/mask"),
    ])?;

    let topk = std::fs::read_to_string(format!("{root}/analyze/topk.tsv")).map_err(|e| zdebias::Error::Config(e.to_string()))?;
    print!("{topk}");
    let trace = std::fs::read_to_string(format!("{root}/filter/trace.jsonl")).map_err(|e| zdebias::Error::Config(e.to_string()))?;
    print!("{trace}");
    let masks = zdebias::ulmask::read_mask_file(std::path::Path::new(&format!("{root}/mask/masks.jsonl")))?;
    println!("{} masks written", masks.len());
    assert!(topk.contains("contradiction\t1\tnobody@hypothesis"));
    Ok(())
}

fn main() -> zdebias::Result<()> {
    run_example()
}
