//! Request-level replay: joint online training of the context and main
//! models with progressive validation, scoring with one context
//! prediction per request, and the variant experiment runner.
//!
//! Per request the pipeline runs, in order:
//!
//! 1. the context model predicts once on the projected context,
//! 2. the prediction is bucketized into the derived feature,
//! 3. for every impression the main model predicts (recorded), then
//!    updates on the label, then the context model updates on that label.
//!
//! No prediction recorded for an impression depends on its own label.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::context::{
    augment, bucketize, check_context_input, ContextProjection, CtxBucketizer, DerivedCtxFeature,
    IntegrationMode,
};
use crate::datagen::{concat, encode_stream, EncodedRequest, SyntheticConfig, SyntheticWorld};
use crate::error::{Error, Result};
use crate::eval::{rig, rig_lift, MetricsAccumulator, MetricsReport};
use crate::model::{FfmModel, TrainConfig};
use crate::schema::{FeatureVector, FieldSchema};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct PipelineCounters {
    pub requests: u64,
    pub ctx_evals: u64,
    pub main_evals: u64,
    pub total_flops_ctx: u64,
    pub total_flops_main: u64,
    pub wall_time_ns: u64,
}

impl PipelineCounters {
    pub fn merge(&mut self, other: &PipelineCounters) {
        self.requests += other.requests;
        self.ctx_evals += other.ctx_evals;
        self.main_evals += other.main_evals;
        self.total_flops_ctx += other.total_flops_ctx;
        self.total_flops_main += other.total_flops_main;
        self.wall_time_ns += other.wall_time_ns;
    }

    /// Main-model FLOPs per scored impression.
    pub fn flops_per_ad(&self) -> f64 {
        ratio(self.total_flops_main, self.main_evals)
    }

    /// Serving FLOPs per request; the context model is charged only when
    /// its prediction is consumed.
    pub fn flops_per_request(&self, include_context: bool) -> f64 {
        let ctx = if include_context { self.total_flops_ctx } else { 0 };
        ratio(self.total_flops_main + ctx, self.requests)
    }
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Training and featurization settings shared by both models.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub main: TrainConfig,
    pub ctx: TrainConfig,
    pub bucketizer: CtxBucketizer,
    pub warmup_fraction: f64,
    pub strict_ts: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            main: TrainConfig::default(),
            ctx: TrainConfig {
                learning_rate: 0.2,
                seed: 1,
                ..TrainConfig::default()
            },
            bucketizer: CtxBucketizer::default(),
            warmup_fraction: 0.2,
            strict_ts: false,
        }
    }
}

/// One progressive-validation record.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoredImpression {
    /// Index of the impression in stream order.
    pub position: u64,
    pub label: u8,
    /// Main-model prediction before its update.
    pub p: f64,
    /// Context-model prediction for the impression's request.
    pub ctx_p: f64,
    pub bucket: u32,
}

/// The context and main models wired together under one integration mode.
#[derive(Debug, Clone)]
pub struct Pipeline {
    projection: ContextProjection,
    bucketizer: CtxBucketizer,
    mode: IntegrationMode,
    derived_field: u32,
    main: FfmModel,
    ctx: FfmModel,
}

impl Pipeline {
    pub fn new(schema: FieldSchema, mode: IntegrationMode, config: &PipelineConfig) -> Result<Self> {
        let projection = ContextProjection::from_schema(&schema)?;
        let ctx = FfmModel::new(projection.context_schema().clone(), config.ctx.clone())?;
        let main = FfmModel::new(schema, config.main.clone())?;
        Self::from_models(main, ctx, mode, config.bucketizer.clone())
    }

    pub fn from_models(
        main: FfmModel,
        ctx: FfmModel,
        mode: IntegrationMode,
        bucketizer: CtxBucketizer,
    ) -> Result<Self> {
        let schema = main.schema();
        schema.validate_main()?;
        mode.validate(schema)?;
        let derived_field = schema
            .derived_field()
            .ok_or_else(|| Error::Config("main schema has no derived field".into()))?;
        let projection = ContextProjection::from_schema(schema)?;
        if ctx.schema() != projection.context_schema() {
            return Err(Error::SchemaMismatch(
                "context model schema does not match the context fields of the main schema".into(),
            ));
        }
        Ok(Self {
            projection,
            bucketizer,
            mode,
            derived_field,
            main,
            ctx,
        })
    }

    pub fn main(&self) -> &FfmModel {
        &self.main
    }

    pub fn ctx(&self) -> &FfmModel {
        &self.ctx
    }

    pub fn mode(&self) -> &IntegrationMode {
        &self.mode
    }

    pub fn projection(&self) -> &ContextProjection {
        &self.projection
    }

    pub fn into_models(self) -> (FfmModel, FfmModel) {
        (self.main, self.ctx)
    }

    pub fn scorer(&self) -> Scorer<'_> {
        Scorer {
            ctx: &self.ctx,
            main: &self.main,
            projection: &self.projection,
            bucketizer: &self.bucketizer,
            mode: &self.mode,
            derived_field: self.derived_field,
        }
    }

    /// Trains on one request, reporting each impression's pre-update
    /// prediction to `record`.
    pub fn train_request(
        &mut self,
        req: &EncodedRequest,
        counters: &mut PipelineCounters,
        mut record: impl FnMut(usize, u8, f64, &DerivedCtxFeature),
    ) -> Result<()> {
        counters.requests += 1;
        if req.is_empty() {
            return Ok(());
        }
        let (ctx_fv, derived) = self.scorer().context_feature(&req.context, counters)?;
        for (i, (item, &label)) in req.items.iter().zip(&req.clicks).enumerate() {
            let input = self.scorer().main_input(&req.context, item, &derived)?;
            counters.main_evals += 1;
            counters.total_flops_main += self.main.prediction_flops(input.len());
            let p = self.main.update(&input, label)?;
            record(i, label, p, &derived);
            self.ctx.update(&ctx_fv, label)?;
        }
        Ok(())
    }
}

/// Read-only scoring against immutable models.
#[derive(Debug, Clone, Copy)]
pub struct Scorer<'a> {
    pub ctx: &'a FfmModel,
    pub main: &'a FfmModel,
    pub projection: &'a ContextProjection,
    pub bucketizer: &'a CtxBucketizer,
    pub mode: &'a IntegrationMode,
    pub derived_field: u32,
}

impl Scorer<'_> {
    /// Runs the context model once and returns its input and the derived feature.
    pub fn context_feature(
        &self,
        context: &FeatureVector,
        counters: &mut PipelineCounters,
    ) -> Result<(FeatureVector, DerivedCtxFeature)> {
        let ctx_fv = self.projection.project(context);
        check_context_input(self.ctx, &ctx_fv)?;
        let p = self.ctx.predict_proba(&ctx_fv)?;
        counters.ctx_evals += 1;
        counters.total_flops_ctx += self.ctx.prediction_flops(ctx_fv.len());
        let derived = bucketize(p, self.bucketizer, self.derived_field)?;
        Ok((ctx_fv, derived))
    }

    pub fn main_input(
        &self,
        context: &FeatureVector,
        item: &FeatureVector,
        derived: &DerivedCtxFeature,
    ) -> Result<FeatureVector> {
        augment(&concat(context, item)?, derived, self.mode)
    }

    /// Scores the candidates of one request, best first; ties go to the
    /// lower candidate index.
    pub fn score(
        &self,
        context: &FeatureVector,
        items: &[FeatureVector],
        counters: &mut PipelineCounters,
    ) -> Result<Vec<(usize, f64)>> {
        counters.requests += 1;
        if items.is_empty() {
            return Ok(Vec::new());
        }
        let (_, derived) = self.context_feature(context, counters)?;
        let mut ranked = Vec::with_capacity(items.len());
        for (i, item) in items.iter().enumerate() {
            let input = self.main_input(context, item, &derived)?;
            counters.main_evals += 1;
            counters.total_flops_main += self.main.prediction_flops(input.len());
            ranked.push((i, self.main.predict_proba(&input)?));
        }
        ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        Ok(ranked)
    }
}

pub fn score_request(
    scorer: &Scorer<'_>,
    req: &EncodedRequest,
    counters: &mut PipelineCounters,
) -> Result<Vec<(usize, f64)>> {
    scorer.score(&req.context, &req.items, counters)
}

#[derive(Debug, Clone)]
pub struct ReplayOutcome {
    pub pipeline: Pipeline,
    /// Post-warmup progressive-validation predictions.
    pub accumulator: MetricsAccumulator,
    pub predictions: Vec<ScoredImpression>,
    pub counters: PipelineCounters,
    pub total_impressions: u64,
}

impl ReplayOutcome {
    /// Accumulator over predictions with `position >= start`.
    pub fn accumulator_from(&self, start: u64) -> MetricsAccumulator {
        let mut acc = MetricsAccumulator::with_scores();
        for s in self.predictions.iter().filter(|s| s.position >= start) {
            acc.push(s.label, s.p);
        }
        acc
    }
}

fn warmup_cutoff(total: u64, warmup_fraction: f64) -> u64 {
    (warmup_fraction * total as f64).floor() as u64
}

/// Replays a chronologically ordered request stream through a fresh pipeline.
pub fn replay_train(
    requests: &[EncodedRequest],
    schema: &FieldSchema,
    mode: IntegrationMode,
    config: &PipelineConfig,
) -> Result<ReplayOutcome> {
    let pipeline = Pipeline::new(schema.clone(), mode, config)?;
    replay_with(pipeline, requests, config)
}

/// Continues training an existing pipeline on a request stream.
pub fn replay_with(
    mut pipeline: Pipeline,
    requests: &[EncodedRequest],
    config: &PipelineConfig,
) -> Result<ReplayOutcome> {
    if !(0.0..1.0).contains(&config.warmup_fraction) {
        return Err(Error::Plan(format!(
            "warmup_fraction must be in [0, 1), got {}",
            config.warmup_fraction
        )));
    }
    let total: u64 = requests.iter().map(|r| r.len() as u64).sum();
    let cutoff = warmup_cutoff(total, config.warmup_fraction);
    let mut counters = PipelineCounters::default();
    let mut accumulator = MetricsAccumulator::new();
    let mut predictions = Vec::with_capacity((total - cutoff) as usize);
    let mut position = 0u64;
    let mut last_ts: Option<i64> = None;
    let started = Instant::now();

    for req in requests {
        if let Some(prev) = last_ts {
            if req.ts < prev {
                if config.strict_ts {
                    return Err(Error::Replay(format!(
                        "request `{}` has ts {} earlier than {prev}",
                        req.request_id, req.ts
                    )));
                }
                log::warn!("request `{}` is out of timestamp order", req.request_id);
            }
        }
        last_ts = Some(last_ts.map_or(req.ts, |p| p.max(req.ts)));
        let base = position;
        pipeline.train_request(req, &mut counters, |i, label, p, derived| {
            let pos = base + i as u64;
            if pos >= cutoff {
                accumulator.push(label, p);
                predictions.push(ScoredImpression {
                    position: pos,
                    label,
                    p,
                    ctx_p: derived.raw_p,
                    bucket: derived.bucket_index,
                });
            }
        })?;
        position += req.len() as u64;
    }
    counters.wall_time_ns = started.elapsed().as_nanos() as u64;
    Ok(ReplayOutcome {
        pipeline,
        accumulator,
        predictions,
        counters,
        total_impressions: total,
    })
}

/// Scores every request without training.
pub fn replay_score(
    pipeline: &Pipeline,
    requests: &[EncodedRequest],
) -> Result<(MetricsAccumulator, PipelineCounters)> {
    let scorer = pipeline.scorer();
    let mut counters = PipelineCounters::default();
    let mut acc = MetricsAccumulator::with_scores();
    let started = Instant::now();
    for req in requests {
        let ranked = score_request(&scorer, req, &mut counters)?;
        let mut by_index = vec![0.0; ranked.len()];
        for (i, p) in ranked {
            by_index[i] = p;
        }
        for (p, &label) in by_index.into_iter().zip(&req.clicks) {
            acc.push(label, p);
        }
    }
    counters.wall_time_ns = started.elapsed().as_nanos() as u64;
    Ok((acc, counters))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentPlan {
    pub variants: Vec<IntegrationMode>,
    pub warmup_fraction: f64,
    pub eval_fraction: f64,
    pub seeds: Vec<u64>,
    pub day_chunks: usize,
    /// Worker threads across seeds and variants; 1 runs sequentially.
    pub threads: usize,
}

impl ExperimentPlan {
    /// Baseline, Replace(every context field) and Add.
    pub fn default_for(schema: &FieldSchema) -> Self {
        Self {
            variants: vec![
                IntegrationMode::Baseline,
                IntegrationMode::replace_all(schema),
                IntegrationMode::Add,
            ],
            warmup_fraction: 0.2,
            eval_fraction: 0.5,
            seeds: vec![1, 2, 3],
            day_chunks: 6,
            threads: 1,
        }
    }

    pub fn validate(&self, schema: &FieldSchema) -> Result<()> {
        let bad = |m: String| Err(Error::Plan(m));
        if !(0.0..1.0).contains(&self.warmup_fraction) {
            return bad(format!("warmup_fraction must be in [0, 1), got {}", self.warmup_fraction));
        }
        if !(self.eval_fraction > 0.0 && self.eval_fraction <= 1.0) {
            return bad(format!("eval_fraction must be in (0, 1], got {}", self.eval_fraction));
        }
        if self.warmup_fraction + self.eval_fraction > 1.0 + 1e-12 {
            return bad("warmup_fraction + eval_fraction exceeds 1".into());
        }
        if self.day_chunks == 0 {
            return bad("day_chunks must be at least 1".into());
        }
        if self.seeds.is_empty() {
            return bad("at least one seed is required".into());
        }
        if !self.variants.contains(&IntegrationMode::Baseline) {
            return bad("the variants must include baseline".into());
        }
        for v in &self.variants {
            v.validate(schema).map_err(|e| Error::Plan(e.to_string()))?;
        }
        Ok(())
    }

    fn eval_start(&self, total: u64) -> u64 {
        total - (self.eval_fraction * total as f64).floor() as u64
    }
}

/// Per-seed outcome of one variant.
#[derive(Debug, Clone)]
pub struct VariantRun {
    pub mode: IntegrationMode,
    pub report: MetricsReport,
    pub counters: PipelineCounters,
    /// `(label, prediction)` over the evaluation slice, in stream order.
    pub eval_predictions: Vec<(u8, f64)>,
}

#[derive(Debug, Clone)]
pub struct SeedRun {
    pub seed: u64,
    pub variants: Vec<VariantRun>,
}

impl SeedRun {
    pub fn variant(&self, name: &str) -> Option<&VariantRun> {
        self.variants.iter().find(|v| v.mode.name() == name)
    }
}

/// Cross-seed summary of one variant.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VariantSummary {
    pub mode: String,
    pub rig: f64,
    pub rig_lift_pct: f64,
    pub rig_lift_pp: f64,
    pub rig_lift_min: f64,
    pub rig_lift_max: f64,
    pub flops_per_ad: f64,
    pub flops_per_request: f64,
    pub flops_change_pct: f64,
    pub flops_per_request_change_pct: f64,
    pub auc: f64,
    pub log_loss: f64,
    pub gamma: f64,
    pub n: u64,
}

#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub plan: ExperimentPlan,
    pub seeds: Vec<SeedRun>,
    pub summary: Vec<VariantSummary>,
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

fn run_variant(
    requests: &[EncodedRequest],
    schema: &FieldSchema,
    mode: &IntegrationMode,
    plan: &ExperimentPlan,
    config: &PipelineConfig,
) -> Result<VariantRun> {
    let cfg = PipelineConfig {
        warmup_fraction: plan.warmup_fraction,
        ..config.clone()
    };
    let outcome = replay_train(requests, schema, mode.clone(), &cfg)?;
    let start = plan.eval_start(outcome.total_impressions);
    let acc = outcome.accumulator_from(start);
    let c = outcome.counters;
    let report = MetricsReport::from_accumulator(
        mode.name(),
        &acc,
        c.flops_per_ad(),
        c.flops_per_request(mode.uses_context()),
    )?;
    let eval_predictions = outcome
        .predictions
        .iter()
        .filter(|s| s.position >= start)
        .map(|s| (s.label, s.p))
        .collect();
    Ok(VariantRun {
        mode: mode.clone(),
        report,
        counters: c,
        eval_predictions,
    })
}

/// Generates and encodes the log of one seed.
pub fn encoded_dataset(synth: &SyntheticConfig, hash_bits: u32) -> Result<(FieldSchema, Vec<EncodedRequest>)> {
    let schema = synth.schema()?;
    let world = SyntheticWorld::new(synth.clone())?;
    let requests = encode_stream(world.records().map(Ok), &schema, hash_bits)?;
    Ok((schema, requests))
}

fn run_seed(
    seed: u64,
    plan: &ExperimentPlan,
    synth: &SyntheticConfig,
    config: &PipelineConfig,
    parallel: bool,
) -> Result<SeedRun> {
    let synth = SyntheticConfig {
        seed,
        ..synth.clone()
    };
    let (schema, requests) = encoded_dataset(&synth, config.main.hash_bits)?;
    let runs: Vec<Result<VariantRun>> = if parallel {
        plan.variants
            .par_iter()
            .map(|m| run_variant(&requests, &schema, m, plan, config))
            .collect()
    } else {
        plan.variants
            .iter()
            .map(|m| run_variant(&requests, &schema, m, plan, config))
            .collect()
    };
    let mut variants = runs.into_iter().collect::<Result<Vec<_>>>()?;
    let baseline = variants
        .iter()
        .find(|v| v.mode == IntegrationMode::Baseline)
        .map(|v| v.report.clone())
        .ok_or_else(|| Error::Plan("no baseline variant".into()))?;
    for v in &mut variants {
        v.report = v.report.clone().with_lifts(&baseline);
    }
    Ok(SeedRun { seed, variants })
}

/// Runs every variant on every seed and summarizes lifts against the
/// same seed's baseline.
pub fn run_experiment(
    plan: &ExperimentPlan,
    synth: &SyntheticConfig,
    config: &PipelineConfig,
) -> Result<ExperimentOutput> {
    plan.validate(&synth.schema()?)?;
    let seeds: Vec<SeedRun> = if plan.threads > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(plan.threads)
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
        pool.install(|| {
            plan.seeds
                .par_iter()
                .map(|&s| run_seed(s, plan, synth, config, true))
                .collect::<Result<Vec<_>>>()
        })?
    } else {
        plan.seeds
            .iter()
            .map(|&s| run_seed(s, plan, synth, config, false))
            .collect::<Result<Vec<_>>>()?
    };

    let summary = plan
        .variants
        .iter()
        .map(|mode| {
            let reports: Vec<&MetricsReport> = seeds
                .iter()
                .filter_map(|s| s.variant(mode.name()))
                .map(|v| &v.report)
                .collect();
            let lifts: Vec<f64> = reports.iter().map(|r| r.rig_lift_pct.unwrap_or(0.0)).collect();
            VariantSummary {
                mode: mode.name().to_string(),
                rig: mean(reports.iter().map(|r| r.rig)),
                rig_lift_pct: mean(lifts.iter().copied()),
                rig_lift_pp: mean(reports.iter().map(|r| r.rig_lift_pp.unwrap_or(0.0))),
                rig_lift_min: lifts.iter().copied().fold(f64::INFINITY, f64::min),
                rig_lift_max: lifts.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                flops_per_ad: mean(reports.iter().map(|r| r.flops_per_ad)),
                flops_per_request: mean(reports.iter().map(|r| r.flops_per_request)),
                flops_change_pct: mean(reports.iter().map(|r| r.flops_change_pct.unwrap_or(0.0))),
                flops_per_request_change_pct: mean(
                    reports.iter().map(|r| r.flops_per_request_change_pct.unwrap_or(0.0)),
                ),
                auc: mean(reports.iter().map(|r| r.auc.unwrap_or(f64::NAN))),
                log_loss: mean(reports.iter().map(|r| r.log_loss)),
                gamma: mean(reports.iter().map(|r| r.gamma)),
                n: reports.iter().map(|r| r.n).sum(),
            }
        })
        .collect();

    Ok(ExperimentOutput {
        plan: plan.clone(),
        seeds,
        summary,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DailyLift {
    pub chunk_index: usize,
    pub lift_pct: f64,
    pub n: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DailyLiftReport {
    pub variant: String,
    pub rows: Vec<DailyLift>,
    /// Plain mean of the chunk lifts.
    pub mean_lift_pct: f64,
    /// Mean of the chunk lifts weighted by chunk size.
    pub weighted_mean_lift_pct: f64,
}

fn slice_rig(preds: &[(u8, f64)]) -> Result<f64> {
    let mut acc = MetricsAccumulator::new();
    for &(l, p) in preds {
        acc.push(l, p);
    }
    rig(&acc)
}

/// Splits the evaluation slice into `chunks` contiguous pieces and
/// reports the per-piece RIG lift of the context-feature variant.
///
/// The compared variant is `add` when present, else the first
/// non-baseline variant, else the baseline itself.
pub fn daily_lift_report(output: &ExperimentOutput, chunks: usize) -> Result<DailyLiftReport> {
    if chunks == 0 {
        return Err(Error::Report("chunk count must be at least 1".into()));
    }
    let variant_name = if output.plan.variants.contains(&IntegrationMode::Add) {
        "add"
    } else {
        output
            .plan
            .variants
            .iter()
            .find(|m| m.uses_context())
            .map_or("baseline", |m| m.name())
    };
    let mut per_chunk = vec![Vec::new(); chunks];
    let mut sizes = vec![0u64; chunks];
    for seed in &output.seeds {
        let base = seed
            .variant("baseline")
            .ok_or_else(|| Error::Report("missing baseline variant".into()))?;
        let var = seed
            .variant(variant_name)
            .ok_or_else(|| Error::Report(format!("missing `{variant_name}` variant")))?;
        let len = base.eval_predictions.len();
        if var.eval_predictions.len() != len {
            return Err(Error::Report("variants evaluated different slices".into()));
        }
        for c in 0..chunks {
            let (lo, hi) = (c * len / chunks, (c + 1) * len / chunks);
            if lo == hi {
                return Err(Error::Report(format!("chunk {c} is empty")));
            }
            let b = slice_rig(&base.eval_predictions[lo..hi])?;
            let v = slice_rig(&var.eval_predictions[lo..hi])?;
            per_chunk[c].push(rig_lift(v, b).pct);
            sizes[c] += (hi - lo) as u64;
        }
    }
    let rows: Vec<DailyLift> = per_chunk
        .iter()
        .zip(&sizes)
        .enumerate()
        .map(|(c, (lifts, &n))| DailyLift {
            chunk_index: c,
            lift_pct: mean(lifts.iter().copied()),
            n,
        })
        .collect();
    let total: u64 = sizes.iter().sum();
    let weighted = rows
        .iter()
        .map(|r| r.lift_pct * r.n as f64)
        .sum::<f64>()
        / total as f64;
    Ok(DailyLiftReport {
        variant: variant_name.to_string(),
        mean_lift_pct: mean(rows.iter().map(|r| r.lift_pct)),
        weighted_mean_lift_pct: weighted,
        rows,
    })
}

/// Scoring-only replay summary for the serving simulator.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ServeSummary {
    pub counters: PipelineCounters,
    pub requests_per_sec: f64,
    pub flops_per_request_with_ctx: f64,
    pub flops_per_request_without_ctx: f64,
    pub ctx_flops_share: f64,
}

pub fn simulate_serving(pipeline: &Pipeline, requests: &[EncodedRequest]) -> Result<ServeSummary> {
    let (_, counters) = replay_score(pipeline, requests)?;
    let secs = counters.wall_time_ns as f64 / 1e9;
    let with_ctx = counters.flops_per_request(true);
    let without = counters.flops_per_request(false);
    let total = counters.total_flops_ctx + counters.total_flops_main;
    Ok(ServeSummary {
        counters,
        requests_per_sec: if secs > 0.0 { counters.requests as f64 / secs } else { 0.0 },
        flops_per_request_with_ctx: with_ctx,
        flops_per_request_without_ctx: without,
        ctx_flops_share: ratio(counters.total_flops_ctx, total),
    })
}
