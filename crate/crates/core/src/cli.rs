//! Command-line front end. Every command writes its outputs plus a
//! `manifest.json` into `--out-dir`.
//!
//! | command             | outputs                                              |
//! |---------------------|------------------------------------------------------|
//! | `analyze`           | `report.tsv`, `topk.tsv`, `plot.jsonl`, `features.jsonl` (with `--dump-features`) |
//! | `filter`            | `accepted.jsonl`, `rejected.jsonl`, `biased.tsv`, `trace.jsonl`, `rejections.jsonl` |
//! | `construct`         | `constructed.jsonl`                                  |
//! | `train-hypo`        | `model.json`                                         |
//! | `confidence-filter` | `kept.jsonl`, `dropped.jsonl`                        |
//! | `mask`              | `masks.jsonl`                                        |
//! | `synth`             | `synth.jsonl`                                        |

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::config::ToolConfig;
use crate::data::{read_dataset, write_dataset, Schema};
use crate::error::{Error, Result};
use crate::export::{
    read_biased_tsv, read_rejections, write_biased_tsv, write_feature_line, write_file, write_plot_jsonl,
    write_rejections_jsonl, write_report_tsv, write_topk_tsv, write_trace_jsonl,
};
use crate::features::HypoPredictor;
use crate::hypoclf::{confidence_filter, BowModel, ProbSource};
use crate::manifest::RunManifest;
use crate::synth::SynthSpec;
use crate::ulmask::{emit_mask_file, masks_from_rejections, write_mask_file, Masker};
use crate::zfilter::{construct, extract_all, z_filter, ConstructMode};
use crate::zstats::{biased_features, count_dataset, full_report};

pub const EXIT_PARSE: i32 = 65;
pub const EXIT_IO: i32 = 74;
pub const EXIT_CONFIG: i32 = 78;

/// Process exit code for a failed run.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Io { .. } => EXIT_IO,
        Error::Config(_) => EXIT_CONFIG,
        _ => EXIT_PARSE,
    }
}

#[derive(Debug, Parser)]
#[command(name = "zdebias", version, about = "z-statistic bias analysis and filtering for premise/hypothesis datasets")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Score every feature-label pair and export reports.
    Analyze(AnalyzeArgs),
    /// Split a dataset into accepted and rejected instances.
    Filter(FilterArgs),
    /// Combine an original and a generated dataset.
    Construct(ConstructArgs),
    /// Train the bag-of-words hypothesis-only model.
    TrainHypo(TrainHypoArgs),
    /// Keep instances whose gold label is predicted with confidence above tau.
    ConfidenceFilter(ConfidenceArgs),
    /// Write unlikelihood token masks for rejected instances.
    Mask(MaskArgs),
    /// Generate a dataset with planted biases.
    Synth(SynthArgs),
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// TOML configuration file; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out_dir: PathBuf,
    /// Worker threads (default: all cores). Outputs do not depend on it.
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct StatArgs {
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub min_count: Option<u64>,
    /// Bag-of-words model for the hypothesis-only prediction feature.
    #[arg(long)]
    pub hypo_model: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct FilterKnobs {
    #[arg(long)]
    pub batch_size: Option<usize>,
    /// Compute biased features once from the seed and keep them fixed.
    #[arg(long)]
    pub freeze_seed_bias: bool,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = Schema::Native)]
    pub schema: Schema,
    #[command(flatten)]
    pub stats: StatArgs,
    /// Also write every instance's feature set to features.jsonl.
    #[arg(long)]
    pub dump_features: bool,
}

#[derive(Debug, Args)]
pub struct FilterArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub seed_dataset: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Schema::Native)]
    pub schema: Schema,
    #[command(flatten)]
    pub stats: StatArgs,
    #[command(flatten)]
    pub knobs: FilterKnobs,
}

#[derive(Debug, Args)]
pub struct ConstructArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long, value_enum)]
    pub mode: ConstructMode,
    /// The original dataset.
    #[arg(long)]
    pub original: PathBuf,
    /// The generated dataset.
    #[arg(long)]
    pub generated: PathBuf,
    #[arg(long, value_enum, default_value_t = Schema::Native)]
    pub schema: Schema,
    #[command(flatten)]
    pub stats: StatArgs,
    #[command(flatten)]
    pub knobs: FilterKnobs,
}

#[derive(Debug, Args)]
pub struct TrainHypoArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = Schema::Native)]
    pub schema: Schema,
    #[arg(long)]
    pub smoothing: Option<f64>,
}

#[derive(Debug, Args)]
pub struct ConfidenceArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = Schema::Native)]
    pub schema: Schema,
    #[arg(long)]
    pub tau: Option<f64>,
    #[arg(long, value_enum)]
    pub prob_source: Option<ProbSource>,
    #[arg(long)]
    pub hypo_model: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct MaskArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Rejected instances (native schema), e.g. a filter run's rejected.jsonl.
    #[arg(long)]
    pub input: PathBuf,
    /// Rejection certificates from the same filter run (rejections.jsonl).
    /// Masks each instance by the features that rejected it.
    #[arg(long, required_unless_present = "biased", conflicts_with = "biased")]
    pub rejections: Option<PathBuf>,
    /// Biased-feature TSV, e.g. a filter run's biased.tsv. Every instance
    /// must contain a member of this set for its label.
    #[arg(long)]
    pub biased: Option<PathBuf>,
    #[arg(long)]
    pub hypo_model: Option<PathBuf>,
    /// Leave premise tokens unmasked even for @premise triggers.
    #[arg(long)]
    pub no_premise_mask: bool,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// TOML generation spec.
    #[arg(long)]
    pub spec: PathBuf,
    /// Overrides the spec's top-level seed.
    #[arg(long)]
    pub seed: Option<u64>,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Analyze(_) => "analyze",
            Command::Filter(_) => "filter",
            Command::Construct(_) => "construct",
            Command::TrainHypo(_) => "train-hypo",
            Command::ConfidenceFilter(_) => "confidence-filter",
            Command::Mask(_) => "mask",
            Command::Synth(_) => "synth",
        }
    }

    fn common(&self) -> &CommonArgs {
        match self {
            Command::Analyze(a) => &a.common,
            Command::Filter(a) => &a.common,
            Command::Construct(a) => &a.common,
            Command::TrainHypo(a) => &a.common,
            Command::ConfidenceFilter(a) => &a.common,
            Command::Mask(a) => &a.common,
            Command::Synth(a) => &a.common,
        }
    }
}

/// Parses `args` (without the program name) and runs the command.
pub fn run_from_args<I, S>(args: I) -> Result<()>
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    let args: Vec<String> = args.into_iter().map(Into::into).collect();
    let cli = Cli::try_parse_from(std::iter::once("zdebias".to_owned()).chain(args.iter().cloned()))
        .map_err(|e| Error::Config(e.to_string()))?;
    run(cli, args)
}

/// Runs a parsed command; `args` is recorded in the manifest.
pub fn run(cli: Cli, args: Vec<String>) -> Result<()> {
    let common = cli.command.common().clone();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(common.threads.unwrap_or(0))
        .build()
        .map_err(|e| Error::Config(e.to_string()))?;
    std::fs::create_dir_all(&common.out_dir).map_err(|e| Error::io(&common.out_dir, e))?;
    let config = ToolConfig::load_or_default(common.config.as_deref())?;
    let mut ctx = Ctx {
        config,
        manifest: RunManifest::new(cli.command.name(), args, serde_json::Value::Null),
        out_dir: common.out_dir.clone(),
    };
    if let Some(path) = &common.config {
        ctx.manifest.add_input(path)?;
    }
    pool.install(|| {
        dispatch(cli.command, &mut ctx)?;
        ctx.finish()
    })
}

struct Ctx {
    config: ToolConfig,
    manifest: RunManifest,
    out_dir: PathBuf,
}

impl Ctx {
    fn out(&self, name: &str) -> PathBuf {
        self.out_dir.join(name)
    }

    fn apply_stats(&mut self, stats: &StatArgs) {
        if let Some(k) = stats.k {
            self.config.zstats.k = k;
        }
        if let Some(m) = stats.min_count {
            self.config.zstats.min_count = m;
        }
        if stats.hypo_model.is_some() {
            self.config.features.use_hypo_pred = true;
        }
    }

    fn apply_knobs(&mut self, knobs: &FilterKnobs) {
        if let Some(b) = knobs.batch_size {
            self.config.filter.batch_size = b;
        }
        if knobs.freeze_seed_bias {
            self.config.filter.freeze_seed_bias = true;
        }
    }

    fn input(&mut self, path: &Path, schema: Schema) -> Result<crate::data::Dataset> {
        self.manifest.add_input(path)?;
        read_dataset(path, schema)
    }

    fn model(&mut self, path: Option<&Path>) -> Result<Option<BowModel>> {
        path.map(|p| {
            self.manifest.add_input(p)?;
            BowModel::load(p)
        })
        .transpose()
    }

    /// Validates the resolved configuration and records it.
    fn resolve(&mut self) -> Result<()> {
        self.config.validate()?;
        self.manifest.config = serde_json::to_value(&self.config).expect("config serializes");
        Ok(())
    }

    fn finish(self) -> Result<()> {
        self.manifest.write(&self.out_dir)
    }
}

fn as_predictor(model: &Option<BowModel>) -> Option<&dyn HypoPredictor> {
    model.as_ref().map(|m| m as &dyn HypoPredictor)
}

fn dispatch(command: Command, ctx: &mut Ctx) -> Result<()> {
    match command {
        Command::Analyze(a) => cmd_analyze(a, ctx),
        Command::Filter(a) => cmd_filter(a, ctx),
        Command::Construct(a) => cmd_construct(a, ctx),
        Command::TrainHypo(a) => cmd_train_hypo(a, ctx),
        Command::ConfidenceFilter(a) => cmd_confidence_filter(a, ctx),
        Command::Mask(a) => cmd_mask(a, ctx),
        Command::Synth(a) => cmd_synth(a, ctx),
    }
}

fn cmd_analyze(a: AnalyzeArgs, ctx: &mut Ctx) -> Result<()> {
    ctx.apply_stats(&a.stats);
    ctx.resolve()?;
    let model = ctx.model(a.stats.hypo_model.as_deref())?;
    let data = ctx.input(&a.input, a.schema)?;
    let predictor = as_predictor(&model);

    let table = count_dataset(&data, &ctx.config.features, predictor)?;
    let report = full_report(&table, &ctx.config.zstats);
    let biased = biased_features(&table, &ctx.config.zstats);
    log::info!(
        "analyzed {} instances, {} features, biased set sizes {:?}",
        data.len(),
        table.num_features(),
        biased.sizes()
    );

    write_file(&ctx.out("report.tsv"), |out| write_report_tsv(out, &report))?;
    write_file(&ctx.out("topk.tsv"), |out| write_topk_tsv(out, &biased))?;
    write_file(&ctx.out("plot.jsonl"), |out| write_plot_jsonl(out, &report))?;

    if a.dump_features {
        let path = ctx.out("features.jsonl");
        let mut chunks = Vec::new();
        for chunk in data.instances().chunks(10_000) {
            chunks.push((chunk, extract_all(chunk, &ctx.config.features, predictor)?));
        }
        write_file(&path, |out| {
            for (chunk, fvs) in &chunks {
                for (inst, fv) in chunk.iter().zip(fvs) {
                    write_feature_line(out, &inst.id, fv)?;
                }
            }
            Ok(())
        })?;
    }
    Ok(())
}

fn cmd_filter(a: FilterArgs, ctx: &mut Ctx) -> Result<()> {
    ctx.apply_stats(&a.stats);
    ctx.apply_knobs(&a.knobs);
    ctx.resolve()?;
    let model = ctx.model(a.stats.hypo_model.as_deref())?;
    let input = ctx.input(&a.input, a.schema)?;
    let seed = match &a.seed_dataset {
        Some(p) => Some(ctx.input(p, a.schema)?),
        None => None,
    };

    let outcome = z_filter(&input, seed.as_ref(), &ctx.config.filter_config(), as_predictor(&model))?;
    log::info!(
        "accepted {}, rejected {} ({:.1}% of input)",
        outcome.accepted.len(),
        outcome.rejected.len(),
        100.0 * outcome.rejection_rate()
    );

    write_dataset(&outcome.accepted, &ctx.out("accepted.jsonl"))?;
    write_dataset(&outcome.rejected, &ctx.out("rejected.jsonl"))?;
    write_file(&ctx.out("biased.tsv"), |out| write_biased_tsv(out, &outcome.final_biased))?;
    write_file(&ctx.out("trace.jsonl"), |out| write_trace_jsonl(out, &outcome.trace))?;
    write_file(&ctx.out("rejections.jsonl"), |out| write_rejections_jsonl(out, &outcome.rejections))
}

fn cmd_construct(a: ConstructArgs, ctx: &mut Ctx) -> Result<()> {
    ctx.apply_stats(&a.stats);
    ctx.apply_knobs(&a.knobs);
    ctx.resolve()?;
    let model = ctx.model(a.stats.hypo_model.as_deref())?;
    let d0 = ctx.input(&a.original, a.schema)?;
    let dg = ctx.input(&a.generated, a.schema)?;
    let out = construct(a.mode, &d0, &dg, &ctx.config.filter_config(), as_predictor(&model))?;
    log::info!("{:?}: {} + {} -> {}", a.mode, d0.len(), dg.len(), out.len());
    write_dataset(&out, &ctx.out("constructed.jsonl"))
}

fn cmd_train_hypo(a: TrainHypoArgs, ctx: &mut Ctx) -> Result<()> {
    if let Some(s) = a.smoothing {
        ctx.config.hypo.smoothing = s;
    }
    ctx.resolve()?;
    let data = ctx.input(&a.input, a.schema)?;
    let model = BowModel::train(&data, ctx.config.hypo.smoothing)?;
    model.save(&ctx.out("model.json"))
}

fn cmd_confidence_filter(a: ConfidenceArgs, ctx: &mut Ctx) -> Result<()> {
    if let Some(t) = a.tau {
        ctx.config.confidence.tau = t;
    }
    if let Some(s) = a.prob_source {
        ctx.config.confidence.prob_source = s;
    }
    ctx.resolve()?;
    let model = ctx.model(a.hypo_model.as_deref())?;
    if ctx.config.confidence.prob_source == ProbSource::BuiltinBow && model.is_none() {
        return Err(Error::Config("--prob-source bow needs --hypo-model".into()));
    }
    let data = ctx.input(&a.input, a.schema)?;
    let (kept, dropped) = confidence_filter(&data, &ctx.config.confidence, model.as_ref())?;
    log::info!("kept {}, dropped {}", kept.len(), dropped.len());
    write_dataset(&kept, &ctx.out("kept.jsonl"))?;
    write_dataset(&dropped, &ctx.out("dropped.jsonl"))
}

fn cmd_mask(a: MaskArgs, ctx: &mut Ctx) -> Result<()> {
    if a.no_premise_mask {
        ctx.config.mask.mask_premise = false;
    }
    if a.hypo_model.is_some() {
        ctx.config.features.use_hypo_pred = true;
    }
    ctx.resolve()?;
    let model = ctx.model(a.hypo_model.as_deref())?;
    let rejected = ctx.input(&a.input, Schema::Native)?;
    let out = ctx.out("masks.jsonl");
    if let Some(path) = &a.rejections {
        ctx.manifest.add_input(path)?;
        let rejections = read_rejections(path)?;
        let masks = masks_from_rejections(&rejected, &rejections, ctx.config.mask.mask_premise)?;
        return write_mask_file(&masks, &out);
    }
    let path = a.biased.as_deref().expect("clap requires --biased without --rejections");
    ctx.manifest.add_input(path)?;
    let biased = read_biased_tsv(path)?;
    let masker = Masker::new(&biased, &ctx.config.features)
        .with_predictor(as_predictor(&model))
        .mask_premise(ctx.config.mask.mask_premise);
    emit_mask_file(&rejected, &masker, &out)
}

fn cmd_synth(a: SynthArgs, ctx: &mut Ctx) -> Result<()> {
    ctx.resolve()?;
    ctx.manifest.add_input(&a.spec)?;
    let text = std::fs::read_to_string(&a.spec).map_err(|e| Error::io(&a.spec, e))?;
    let mut spec: SynthSpec =
        toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", a.spec.display())))?;
    if let Some(seed) = a.seed {
        spec.seed = seed;
    }
    ctx.manifest.rng_seeds.push(spec.seed);
    ctx.manifest.rng_seeds.extend(spec.biases.iter().map(|b| b.rng_seed));
    let data = spec.generate()?;
    write_dataset(&data, &ctx.out("synth.jsonl"))
}
