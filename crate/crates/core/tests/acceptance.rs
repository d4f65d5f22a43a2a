//! Acceptance criteria 1-10.
//!
//! Each test prints one `criterion N ... PASS|FAIL` line and then asserts,
//! so `cargo test --test acceptance -- --nocapture --test-threads 1` gives a
//! readable scoreboard.

mod support;

use std::collections::BTreeSet;
use std::io::Write;
use std::path::Path;
use std::sync::{Mutex, MutexGuard};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rayon::prelude::*;
use rand_chacha::ChaCha8Rng;
use support::{exact_z, items, reference_filter, toy_corpus, toy_family};
use zdebias::synth::generate;
use zdebias::ulmask::compute_mask;
use zdebias::zstats::{count_dataset, ZRow};
use zdebias::{
    biased_features, confidence_filter, construct, expected_z, full_report, z_filter, z_score, BiasSpec,
    BiasedFeatureSets, ConfidenceConfig, ConstructMode, Dataset, FeatureConfig, FeatureId, FilterConfig,
    Instance, Label, TableMode, ZConfig,
};

/// Criteria run one at a time so each runtime budget is measured alone.
fn serial() -> MutexGuard<'static, ()> {
    static LOCK: Mutex<()> = Mutex::new(());
    LOCK.lock().unwrap_or_else(|poisoned| poisoned.into_inner())
}

fn report(n: u32, name: &str, pass: bool, detail: String, elapsed: Duration, budget: Duration) {
    let within = elapsed <= budget;
    let verdict = if pass && within { "PASS" } else { "FAIL" };
    // Written to the raw stderr handle so the verdict shows without --nocapture.
    let line = format!("criterion {n:>2} {name:<34} {verdict}  ({detail}; {elapsed:.2?} of {budget:.0?})\n");
    let _ = std::io::stderr().write_all(line.as_bytes());
    assert!(pass, "criterion {n} failed: {detail}");
    assert!(within, "criterion {n} exceeded its runtime budget");
}

fn ids(d: &Dataset) -> Vec<String> {
    d.ids().map(str::to_owned).collect()
}

fn filter_config(k: usize, batch_size: usize) -> FilterConfig {
    FilterConfig {
        batch_size,
        zconfig: ZConfig { k, ..ZConfig::default() },
        ..FilterConfig::default()
    }
}

#[test]
fn criterion_01_equation_oracle() {
    let _serial = serial();
    let start = Instant::now();
    // Frozen 50-digit evaluations, rounded to double.
    let frozen = [
        (150, 300, 6.123724356957945),
        (0, 12, -2.449489742783178),
        (6, 6, 3.464101615137754),
        (900, 1000, 38.01315561749642),
        (100, 300, 0.0),
    ];
    let mut worst: f64 = 0.0;
    for (c, n, z) in frozen {
        worst = worst.max((z_score(c, n, 1.0 / 3.0).unwrap() - z).abs());
        worst = worst.max((exact_z(c, n) - z).abs());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..1000 {
        let n = rng.random_range(1..=1_000_000u64);
        let c = rng.random_range(0..=n);
        worst = worst.max((z_score(c, n, 1.0 / 3.0).unwrap() - exact_z(c, n)).abs());
    }
    report(
        1,
        "equation oracle",
        worst <= 1e-9,
        format!("max abs error {worst:.2e}"),
        start.elapsed(),
        Duration::from_secs(1),
    );
}

#[test]
fn criterion_02_planted_bias_recovery() {
    let _serial = serial();
    let start = Instant::now();
    let cfg = FeatureConfig::default();
    let zcfg = ZConfig::default();
    let grid: Vec<(f64, usize, u64)> = [0.5, 0.7, 0.9]
        .into_iter()
        .flat_map(|p| [100, 300, 1000].into_iter().flat_map(move |n| (0..10u64).map(move |seed| (p, n, seed))))
        .collect();
    // Each run is small enough to fit one counting shard, so the runs
    // themselves are spread over the pool.
    let outcomes: Vec<(Vec<String>, f64)> = grid
        .par_iter()
        .map(|&(p, n, seed)| {
            // One marker per label with equal (p, n) keeps the overall label mix balanced.
            let specs: Vec<BiasSpec> = Label::ALL
                .iter()
                .enumerate()
                .map(|(i, &l)| BiasSpec::new(format!("mk{i}"), l, n, p).seeded(seed * 10 + i as u64))
                .collect();
            let data = generate(&specs, 300, 200_000, seed).unwrap();
            let table = count_dataset(&data, &cfg, None).unwrap();
            let rep = full_report(&table, &zcfg);
            let biased = biased_features(&table, &zcfg);
            let mut failures = Vec::new();
            let mut margin = f64::INFINITY;
            for spec in &specs {
                let name = spec.feature_name();
                let z = rep.get(&name, spec.target_label).map(|r| r.z).unwrap_or(f64::NAN);
                let top = biased.rows(spec.target_label);
                let ok_z = (z - expected_z(spec)).abs() <= 1e-9;
                let ok_rank = top.first().is_some_and(|r| r.feature.as_str() == name);
                if let Some(second) = top.get(1) {
                    margin = margin.min(top[0].z - second.z);
                }
                if !(ok_z && ok_rank) {
                    failures.push(format!("p={p} n={n} seed={seed} {name}: z={z}"));
                }
            }
            (failures, margin)
        })
        .collect();
    let runs = 3 * grid.len();
    let failures: Vec<String> = outcomes.iter().flat_map(|(f, _)| f.iter().cloned()).collect();
    let margin = outcomes.iter().map(|o| o.1).fold(f64::INFINITY, f64::min);
    report(
        2,
        "planted-bias recovery",
        failures.is_empty(),
        format!("{runs} markers, {} misses, min rank-1 margin {margin:.3} {failures:?}", failures.len()),
        start.elapsed(),
        Duration::from_secs(10),
    );
}

#[test]
fn criterion_03_brute_force_equivalence() {
    let _serial = serial();
    let start = Instant::now();
    let cfg = FeatureConfig::default();
    let cases = toy_family(50);
    let mut mismatches = Vec::new();
    let mut total_rejected = 0;
    for (i, case) in cases.iter().enumerate() {
        let fc = filter_config(case.k, case.batch_size);
        let out = z_filter(&case.input, case.seed.as_ref(), &fc, None).unwrap();
        let seed_items = case.seed.as_ref().map(|s| items(s, &cfg)).unwrap_or_default();
        let oracle = reference_filter(&items(&case.input, &cfg), &seed_items, case.k, 1, case.batch_size);
        total_rejected += oracle.rejected.len();
        if ids(&out.accepted) != oracle.accepted || ids(&out.rejected) != oracle.rejected {
            mismatches.push(i);
        }
    }
    report(
        3,
        "filter brute-force equivalence",
        mismatches.is_empty() && total_rejected > 0,
        format!("50 toy corpora, {total_rejected} oracle rejections, mismatched cases {mismatches:?}"),
        start.elapsed(),
        Duration::from_secs(30),
    );
}

#[test]
fn criterion_04_incremental_vs_recompute() {
    let _serial = serial();
    let start = Instant::now();
    let mut differing = Vec::new();
    for (i, case) in toy_family(50).iter().enumerate() {
        for freeze in [false, true] {
            let incremental = FilterConfig {
                freeze_seed_bias: freeze,
                ..filter_config(case.k, case.batch_size)
            };
            let recompute = FilterConfig {
                table_mode: TableMode::Recompute,
                ..incremental.clone()
            };
            let a = z_filter(&case.input, case.seed.as_ref(), &incremental, None).unwrap();
            let b = z_filter(&case.input, case.seed.as_ref(), &recompute, None).unwrap();
            let bits = |s: &BiasedFeatureSets| -> Vec<(String, u64, u64)> {
                Label::ALL
                    .iter()
                    .flat_map(|&l| s.rows(l).iter().map(|r: &ZRow| (r.feature.to_string(), r.z.to_bits(), r.p_hat.to_bits())))
                    .collect()
            };
            if a != b || bits(&a.final_biased) != bits(&b.final_biased) {
                differing.push((i, freeze));
            }
        }
    }
    report(
        4,
        "incremental vs recompute",
        differing.is_empty(),
        format!("100 runs, differing {differing:?}"),
        start.elapsed(),
        Duration::from_secs(30),
    );
}

fn planted_corpus(background: usize, markers: usize, per_marker: usize, p: f64, seed: u64) -> (Dataset, Vec<BiasSpec>) {
    let specs: Vec<BiasSpec> = (0..markers)
        .map(|i| BiasSpec::new(format!("planted{i}"), Label::ALL[i % 3], per_marker, p).seeded(seed + 1 + i as u64))
        .collect();
    (generate(&specs, background, 5_000, seed).unwrap(), specs)
}

fn max_planted_z(data: &Dataset, specs: &[BiasSpec]) -> f64 {
    let table = count_dataset(data, &FeatureConfig::default(), None).unwrap();
    let rep = full_report(&table, &ZConfig::default());
    specs
        .iter()
        .filter_map(|s| rep.get(&s.feature_name(), s.target_label).map(|r| r.z))
        .fold(f64::NEG_INFINITY, f64::max)
}

#[test]
fn criterion_05_debiasing_effect() {
    let _serial = serial();
    let start = Instant::now();
    let (data, specs) = planted_corpus(40_000, 10, 1_000, 0.9, 5);
    assert_eq!(data.len(), 50_000);
    let before = max_planted_z(&data, &specs);
    let out = z_filter(&data, None, &filter_config(20, 1_000), None).unwrap();
    let after = max_planted_z(&out.accepted, &specs);
    report(
        5,
        "debiasing effect",
        (before - 38.01315561749642).abs() < 1e-9 && after <= 0.25 * before,
        format!(
            "max planted z {before:.2} -> {after:.2} ({:.1}%), rejected {:.1}%",
            100.0 * after / before,
            100.0 * out.rejection_rate()
        ),
        start.elapsed(),
        Duration::from_secs(120),
    );
}

#[test]
fn criterion_06_heavy_bias_rejection() {
    let _serial = serial();
    let start = Instant::now();
    let (data, _) = planted_corpus(1_000, 9, 1_000, 0.9, 6);
    let out = z_filter(&data, None, &filter_config(20, 1_000), None).unwrap();
    let rate = out.rejection_rate();
    report(
        6,
        "heavy-bias rejection",
        rate >= 0.70,
        format!("{} instances, 90% marked, rejection rate {:.1}%", data.len(), 100.0 * rate),
        start.elapsed(),
        Duration::from_secs(60),
    );
}

#[test]
fn criterion_07_construction_mode_algebra() {
    let _serial = serial();
    let start = Instant::now();
    let mut problems = Vec::new();
    for i in 0..20u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(700 + i);
        let vocab = rng.random_range(5..=30);
        let d0 = toy_corpus(&mut rng, "o", 120, vocab);
        let dg = toy_corpus(&mut rng, "g", 120, vocab);
        let cfg = filter_config(1 + (i as usize) % 3, [1, 7, 50][(i as usize) % 3]);
        let run = |m| construct(m, &d0, &dg, &cfg, None).unwrap();

        let zaug = run(ConstructMode::ZAug);
        if zaug.instances()[..d0.len()] != *d0.instances() {
            problems.push(format!("{i}: zaug does not start with d0"));
        }
        let z_dg = z_filter(&dg, Some(&d0), &cfg, None).unwrap().accepted;
        if ids(&zaug) != ids(&z_dg) {
            problems.push(format!("{i}: zaug"));
        }

        let z0 = z_filter(&d0, None, &cfg, None).unwrap().accepted;
        let zg = z_filter(&dg, None, &cfg, None).unwrap().accepted;
        let parz: BTreeSet<String> = ids(&run(ConstructMode::ParZ)).into_iter().collect();
        let union: BTreeSet<String> = ids(&z0).into_iter().chain(ids(&zg)).collect();
        if parz != union {
            problems.push(format!("{i}: parz"));
        }

        let seqz = z_filter(&dg, Some(&z0), &cfg, None).unwrap().accepted;
        if run(ConstructMode::SeqZ) != Dataset::new(format!("{}+{}", d0.name, dg.name), seqz.into_instances()).unwrap() {
            problems.push(format!("{i}: seqz"));
        }

        if run(ConstructMode::MergePlain).len() != d0.len() + dg.len() {
            problems.push(format!("{i}: plain"));
        }
    }
    report(
        7,
        "construction-mode algebra",
        problems.is_empty(),
        format!("20 input pairs, problems {problems:?}"),
        start.elapsed(),
        Duration::from_secs(10),
    );
}

#[test]
fn criterion_08_confidence_filter() {
    let _serial = serial();
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut instances = Vec::new();
    for i in 0..500 {
        let label = Label::ALL[i % 3];
        let gold = match i % 5 {
            0 => 0.95,
            1 => f64::from_bits(0.95f64.to_bits() + 1),
            _ => rng.random_range(0.0..1.0),
        };
        let mut probs = [(1.0 - gold) / 2.0; 3];
        probs[label.index()] = gold;
        instances.push(Instance::new(format!("c{i}"), "p", "h", label).with_probs(probs));
    }
    let data = Dataset::new("conf", instances).unwrap();
    let cfg = ConfidenceConfig::default();
    let (kept, dropped) = confidence_filter(&data, &cfg, None).unwrap();
    let gold = |x: &Instance| x.model_probs.unwrap()[x.label.index()];
    let strict = kept.iter().all(|x| gold(x) > 0.95);
    let complete = dropped.iter().all(|x| gold(x) <= 0.95) && kept.len() + dropped.len() == data.len();
    let boundary_dropped = dropped.iter().filter(|x| gold(x) == 0.95).count() == 100;
    let (again, none) = confidence_filter(&kept, &cfg, None).unwrap();
    let idempotent = again.instances() == kept.instances() && none.is_empty();
    report(
        8,
        "confidence filter",
        strict && complete && boundary_dropped && idempotent,
        format!(
            "kept {}, dropped {}; strict={strict} boundary_dropped={boundary_dropped} idempotent={idempotent}",
            kept.len(),
            dropped.len()
        ),
        start.elapsed(),
        Duration::from_secs(1),
    );
}

struct MaskCase {
    premise: &'static str,
    hypothesis: &'static str,
    label: Label,
    biased: &'static [&'static str],
    mask_premise: bool,
    premise_mask: &'static [u8],
    hypothesis_mask: &'static [u8],
}

const E: Label = Label::Entailment;
const N: Label = Label::Neutral;
const C: Label = Label::Contradiction;

#[rustfmt::skip]
const MASK_CASES: [MaskCase; 20] = [
    // Single unigram.
    MaskCase { premise: "a man sleeps", hypothesis: "nobody sleeps", label: C, biased: &["nobody@hypothesis"], mask_premise: true, premise_mask: &[1, 1, 1], hypothesis_mask: &[0, 1] },
    // Repeated unigram.
    MaskCase { premise: "x", hypothesis: "not here not there", label: C, biased: &["not@hypothesis"], mask_premise: true, premise_mask: &[1], hypothesis_mask: &[0, 1, 0, 1] },
    // Bigram.
    MaskCase { premise: "x", hypothesis: "a cat is sleeping", label: C, biased: &["is sleeping@hypothesis"], mask_premise: true, premise_mask: &[1], hypothesis_mask: &[1, 1, 0, 0] },
    // Repeated bigram.
    MaskCase { premise: "x", hypothesis: "the dog the dog runs", label: E, biased: &["the dog@hypothesis"], mask_premise: true, premise_mask: &[1], hypothesis_mask: &[0, 0, 0, 0, 1] },
    // Overlapping bigram occurrences.
    MaskCase { premise: "x", hypothesis: "no no no", label: C, biased: &["no no@hypothesis"], mask_premise: true, premise_mask: &[1], hypothesis_mask: &[0, 0, 0] },
    // Unigram and bigram together.
    MaskCase { premise: "x", hypothesis: "people are outside today", label: E, biased: &["outside@hypothesis", "people are@hypothesis"], mask_premise: true, premise_mask: &[1], hypothesis_mask: &[0, 0, 0, 1] },
    // Punctuation and case are normalised before matching.
    MaskCase { premise: "x", hypothesis: "Nobody, NOBODY!", label: C, biased: &["nobody@hypothesis"], mask_premise: true, premise_mask: &[1], hypothesis_mask: &[0, 0] },
    // Premise unigram.
    MaskCase { premise: "a tall man", hypothesis: "someone", label: N, biased: &["tall@premise"], mask_premise: true, premise_mask: &[1, 0, 1], hypothesis_mask: &[1] },
    // Premise bigram repeated.
    MaskCase { premise: "red car red car", hypothesis: "vehicle", label: N, biased: &["red car@premise"], mask_premise: true, premise_mask: &[0, 0, 0, 0], hypothesis_mask: &[1] },
    // Premise masking switched off.
    MaskCase { premise: "a tall man", hypothesis: "someone", label: N, biased: &["tall@premise"], mask_premise: false, premise_mask: &[1, 1, 1], hypothesis_mask: &[1] },
    // A premise trigger does not touch the same token in the hypothesis.
    MaskCase { premise: "tall tree", hypothesis: "tall grass", label: N, biased: &["tall@premise"], mask_premise: true, premise_mask: &[0, 1], hypothesis_mask: &[1, 1] },
    // A hypothesis trigger does not touch the premise.
    MaskCase { premise: "tall tree", hypothesis: "tall grass", label: N, biased: &["tall@hypothesis"], mask_premise: true, premise_mask: &[1, 1], hypothesis_mask: &[0, 1] },
    // Biased features of other labels are ignored.
    MaskCase { premise: "x", hypothesis: "nobody sleeps", label: E, biased: &["sleeps@hypothesis"], mask_premise: true, premise_mask: &[1], hypothesis_mask: &[1, 0] },
    // The null feature masks the whole hypothesis.
    MaskCase { premise: "a b", hypothesis: "c d e", label: E, biased: &["null"], mask_premise: true, premise_mask: &[1, 1], hypothesis_mask: &[0, 0, 0] },
    // Hypothesis length bucket.
    MaskCase { premise: "a", hypothesis: "one two", label: N, biased: &["hypo-len<5"], mask_premise: true, premise_mask: &[1], hypothesis_mask: &[0, 0] },
    // Length ratio bucket: 2 / 4 = 0.5.
    MaskCase { premise: "a b c d", hypothesis: "a b", label: E, biased: &["len-ratio∈[0.5,0.75)"], mask_premise: true, premise_mask: &[1, 1, 1, 1], hypothesis_mask: &[0, 0] },
    // Full lexical overlap.
    MaskCase { premise: "a dog runs", hypothesis: "dog runs", label: E, biased: &["full-lex-overlap"], mask_premise: true, premise_mask: &[1, 1, 1], hypothesis_mask: &[0, 0] },
    // Overlap threshold.
    MaskCase { premise: "a dog runs", hypothesis: "dog sleeps", label: E, biased: &["lex-overlap>0.4"], mask_premise: true, premise_mask: &[1, 1, 1], hypothesis_mask: &[0, 0] },
    // Absorbing rule: a non-n-gram trigger wins over a partial n-gram mask.
    MaskCase { premise: "x", hypothesis: "nobody is here", label: C, biased: &["nobody@hypothesis", "hypo-len<5"], mask_premise: true, premise_mask: &[1], hypothesis_mask: &[0, 0, 0] },
    // Absorbing rule leaves premise n-gram masking intact.
    MaskCase { premise: "tall man", hypothesis: "someone waits", label: N, biased: &["tall@premise", "null"], mask_premise: true, premise_mask: &[0, 1], hypothesis_mask: &[0, 0] },
];

fn biased_set(label: Label, names: &[&str]) -> BiasedFeatureSets {
    let mut sets: [Vec<ZRow>; 3] = Default::default();
    for (rank, name) in names.iter().enumerate() {
        sets[label.index()].push(ZRow {
            feature: FeatureId::new(*name),
            label,
            n: 10,
            p_hat: 1.0,
            z: 10.0 - rank as f64,
        });
    }
    BiasedFeatureSets::from_rows(sets)
}

#[test]
fn criterion_09_mask_correctness() {
    let _serial = serial();
    let start = Instant::now();
    let cfg = FeatureConfig::default();
    let mut wrong = Vec::new();
    for (i, case) in MASK_CASES.iter().enumerate() {
        let inst = Instance::new(format!("m{i}"), case.premise, case.hypothesis, case.label);
        // Case 12 lists its biased feature under the wrong label on purpose,
        // next to a real trigger so the instance still counts as rejected.
        let biased = if i == 12 {
            let mut sets: [Vec<ZRow>; 3] = Default::default();
            for (label, name) in [(C, "nobody@hypothesis"), (E, "sleeps@hypothesis")] {
                sets[label.index()].push(ZRow { feature: FeatureId::new(name), label, n: 5, p_hat: 1.0, z: 3.0 });
            }
            BiasedFeatureSets::from_rows(sets)
        } else {
            biased_set(case.label, case.biased)
        };
        let masker = zdebias::Masker::new(&biased, &cfg).mask_premise(case.mask_premise);
        let got = if case.mask_premise {
            compute_mask(&inst, &biased, &cfg, None)
        } else {
            masker.compute(&inst)
        };
        match got {
            Ok(m) if m.premise_mask == case.premise_mask && m.hypothesis_mask == case.hypothesis_mask => {}
            other => wrong.push(format!("case {i}: {other:?}")),
        }
    }
    report(
        9,
        "mask correctness",
        wrong.is_empty(),
        format!("20 hand-built cases, wrong {wrong:?}"),
        start.elapsed(),
        Duration::from_secs(1),
    );
}

fn cli(args: &[&str]) {
    zdebias::cli::run_from_args(args.iter().copied()).unwrap();
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn output_files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.file_name().unwrap() != "manifest.json")
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
        .collect();
    files.sort();
    files
}

const SYNTH_SPEC: &str = r#"
background_count = BACKGROUND
vocab_size = 100
seed = 10

[[bias]]
marker = "never"
placement = "hypothesis"
target_label = "contradiction"
occurrences = 20000
target_fraction = 0.8
rng_seed = 1

[[bias]]
marker = "outdoors"
placement = "hypothesis"
target_label = "entailment"
occurrences = 20000
target_fraction = 0.7
rng_seed = 2

[[bias]]
marker = "tall"
placement = "premise"
target_label = "neutral"
occurrences = 10000
target_fraction = 0.6
rng_seed = 3
"#;

#[test]
fn criterion_10_determinism_and_throughput() {
    let _serial = serial();
    let tmp = tempfile::tempdir().unwrap();
    let root = tmp.path();

    // Byte-identical outputs across thread counts, on a 60k corpus.
    let start = Instant::now();
    let spec = root.join("small.toml");
    std::fs::write(&spec, SYNTH_SPEC.replace("BACKGROUND", "10000")).unwrap();
    let synth_dir = root.join("small");
    cli(&["synth", "--spec", path(&spec), "--out-dir", path(&synth_dir)]);
    let corpus = synth_dir.join("synth.jsonl");
    let mut runs = Vec::new();
    for threads in ["1", "2", "8"] {
        let a = root.join(format!("analyze-{threads}"));
        let f = root.join(format!("filter-{threads}"));
        cli(&["analyze", "--input", path(&corpus), "--out-dir", path(&a), "--threads", threads, "--dump-features"]);
        cli(&["filter", "--input", path(&corpus), "--out-dir", path(&f), "--threads", threads, "--batch-size", "5000"]);
        runs.push((output_files(&a), output_files(&f)));
    }
    let identical = runs.windows(2).all(|w| w[0] == w[1]);
    let determinism_time = start.elapsed();

    // Throughput: analyze + filter over one million instances.
    let spec = root.join("large.toml");
    std::fs::write(&spec, SYNTH_SPEC.replace("BACKGROUND", "950000")).unwrap();
    let large_dir = root.join("large");
    cli(&["synth", "--spec", path(&spec), "--out-dir", path(&large_dir)]);
    let corpus = large_dir.join("synth.jsonl");
    let start = Instant::now();
    cli(&["analyze", "--input", path(&corpus), "--out-dir", path(&root.join("analyze-large"))]);
    cli(&["filter", "--input", path(&corpus), "--out-dir", path(&root.join("filter-large"))]);
    let elapsed = start.elapsed();
    let accepted = std::fs::read_to_string(root.join("filter-large/accepted.jsonl")).unwrap().lines().count();
    let rejected = std::fs::read_to_string(root.join("filter-large/rejected.jsonl")).unwrap().lines().count();

    report(
        10,
        "determinism and throughput",
        identical && accepted + rejected == 1_000_000,
        format!(
            "threads 1/2/8 identical={identical} ({determinism_time:.2?}); 1M analyze+filter on {} core(s)",
            std::thread::available_parallelism().map_or(1, |n| n.get())
        ),
        elapsed,
        Duration::from_secs(600),
    );
}
