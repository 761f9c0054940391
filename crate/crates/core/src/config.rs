//! Flat `key = value` run configuration.
//!
//! Every key has a default listed in [`KEYS`]. Files hold one assignment per
//! line; `#` starts a comment. Unknown keys are rejected. The resolved
//! configuration renders back into the same format, so an echoed file
//! reproduces the run that wrote it.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::context::{CtxBucketizer, IntegrationMode};
use crate::datagen::SyntheticConfig;
use crate::error::{Error, Result};
use crate::model::{ModelKind, TrainConfig};
use crate::schema::FieldSchema;
use crate::sim::{ExperimentPlan, PipelineConfig};

/// `(key, default, description)` for every accepted key.
pub const KEYS: &[(&str, &str, &str)] = &[
    ("gen.n_context_fields", "4", "number of context fields"),
    ("gen.n_item_fields", "4", "number of item fields"),
    ("gen.cardinality", "1000", "distinct values per field"),
    ("gen.beta_ctx", "0.8", "scale of the context main effect"),
    ("gen.beta_item", "0.8", "scale of the item main effect"),
    ("gen.beta_int", "0.3", "scale of the context x item interaction"),
    ("gen.base_ctr", "0.2", "target mean click rate"),
    ("gen.n_requests", "200000", "requests per generated log"),
    ("gen.candidates_per_request", "4", "impressions per request"),
    ("gen.seed", "1", "generator seed for gen, train, eval and serve-sim"),
    ("main.kind", "ffm", "main model kind: ffm, logistic or intercept"),
    ("main.learning_rate", "0.1", "main model AdaGrad step size"),
    ("main.l2", "1e-5", "main model L2 penalty"),
    ("main.init_scale", "0.1", "main model latent init scale"),
    ("main.k", "4", "main model latent dimension"),
    ("main.hash_bits", "20", "feature hash width, shared by both models"),
    ("main.clip_eps", "1e-6", "main model probability clip"),
    ("main.seed", "0", "main model latent init seed"),
    ("ctx_model.kind", "ffm", "context model kind"),
    ("ctx_model.learning_rate", "0.2", "context model AdaGrad step size"),
    ("ctx_model.l2", "1e-5", "context model L2 penalty"),
    ("ctx_model.init_scale", "0.1", "context model latent init scale"),
    ("ctx_model.k", "4", "context model latent dimension"),
    ("ctx_model.clip_eps", "1e-6", "context model probability clip"),
    ("ctx_model.seed", "1", "context model latent init seed"),
    ("ctx.buckets", "32", "equal-width bucket count, ignored when ctx.edges is set"),
    ("ctx.edges", "", "comma-separated interior bucket edges in (0, 1)"),
    ("ctx.mode", "add", "mode for train, eval and serve-sim: baseline, replace or add"),
    ("ctx.replace_fields", "", "comma-separated context field names to replace; empty means all"),
    ("plan.variants", "baseline,replace,add", "experiment variants"),
    ("plan.warmup_fraction", "0.2", "leading share of impressions never scored"),
    ("plan.eval_fraction", "0.5", "trailing share of impressions used for metrics"),
    ("plan.seeds", "1,2,3", "comma-separated generator seeds for experiment"),
    ("plan.day_chunks", "6", "contiguous chunks in the lift series"),
    ("threads", "1", "worker threads across seeds and variants"),
    ("strict_ts", "false", "fail on out-of-order timestamps instead of warning"),
    ("out", "out", "output directory"),
    ("model_dir", "", "checkpoint directory for eval and serve-sim; empty means out"),
];

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    values: BTreeMap<&'static str, String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            values: KEYS.iter().map(|(k, d, _)| (*k, d.to_string())).collect(),
        }
    }
}

fn canonical(key: &str) -> Result<&'static str> {
    KEYS.iter()
        .map(|(k, _, _)| *k)
        .find(|k| *k == key)
        .ok_or_else(|| Error::Config(format!("unknown key `{key}`")))
}

fn list(raw: &str) -> impl Iterator<Item = &str> {
    raw.split(',').map(str::trim).filter(|s| !s.is_empty())
}

impl RunConfig {
    /// Parses `key = value` lines over the defaults.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", i + 1)))?;
            cfg.set(key.trim(), value.trim())
                .map_err(|e| Error::Config(format!("line {}: {e}", i + 1)))?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = canonical(key)?;
        self.values.insert(key, value.to_string());
        Ok(())
    }

    /// Applies a `key=value` override.
    pub fn set_pair(&mut self, pair: &str) -> Result<()> {
        let (k, v) = pair
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("override `{pair}` is not key=value")))?;
        self.set(k.trim(), v.trim())
    }

    pub fn get(&self, key: &str) -> Result<&str> {
        Ok(self.values[canonical(key)?].as_str())
    }

    fn parsed<T: std::str::FromStr>(&self, key: &str) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        let raw = self.get(key)?;
        raw.parse()
            .map_err(|e| Error::Config(format!("`{key}` = `{raw}`: {e}")))
    }

    /// Checks every typed key and the derived structures.
    pub fn validate(&self) -> Result<()> {
        let synth = self.synthetic()?;
        let schema = synth.schema()?;
        self.pipeline_config()?;
        self.mode(&schema)?;
        self.plan(&schema)?.validate(&schema)?;
        if self.threads()? == 0 {
            return Err(Error::Config("`threads` must be at least 1".into()));
        }
        self.strict_ts()?;
        Ok(())
    }

    pub fn synthetic(&self) -> Result<SyntheticConfig> {
        let cfg = SyntheticConfig {
            n_context_fields: self.parsed("gen.n_context_fields")?,
            n_item_fields: self.parsed("gen.n_item_fields")?,
            cardinality: self.parsed("gen.cardinality")?,
            beta_ctx: self.parsed("gen.beta_ctx")?,
            beta_item: self.parsed("gen.beta_item")?,
            beta_int: self.parsed("gen.beta_int")?,
            base_ctr: self.parsed("gen.base_ctr")?,
            n_requests: self.parsed("gen.n_requests")?,
            candidates_per_request: self.parsed("gen.candidates_per_request")?,
            seed: self.parsed("gen.seed")?,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn train(&self, prefix: &str, hash_bits: u32) -> Result<TrainConfig> {
        let key = |name: &str| format!("{prefix}.{name}");
        let cfg = TrainConfig {
            kind: self.parsed::<ModelKind>(&key("kind"))?,
            learning_rate: self.parsed(&key("learning_rate"))?,
            l2: self.parsed(&key("l2"))?,
            init_scale: self.parsed(&key("init_scale"))?,
            k: self.parsed(&key("k"))?,
            hash_bits,
            clip_eps: self.parsed(&key("clip_eps"))?,
            seed: self.parsed(&key("seed"))?,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn bucketizer(&self) -> Result<CtxBucketizer> {
        let edges = self.get("ctx.edges")?;
        if edges.trim().is_empty() {
            return CtxBucketizer::equal_width(self.parsed("ctx.buckets")?);
        }
        let edges = list(edges)
            .map(|e| {
                e.parse::<f64>()
                    .map_err(|err| Error::Config(format!("`ctx.edges` entry `{e}`: {err}")))
            })
            .collect::<Result<Vec<_>>>()?;
        CtxBucketizer::with_edges(edges)
    }

    pub fn pipeline_config(&self) -> Result<PipelineConfig> {
        let hash_bits = self.parsed("main.hash_bits")?;
        Ok(PipelineConfig {
            main: self.train("main", hash_bits)?,
            ctx: self.train("ctx_model", hash_bits)?,
            bucketizer: self.bucketizer()?,
            warmup_fraction: self.parsed("plan.warmup_fraction")?,
            strict_ts: self.strict_ts()?,
        })
    }

    fn mode_named(&self, name: &str, schema: &FieldSchema) -> Result<IntegrationMode> {
        let mode = match name {
            "baseline" => IntegrationMode::Baseline,
            "add" => IntegrationMode::Add,
            "replace" => {
                let names: Vec<&str> = list(self.get("ctx.replace_fields")?).collect();
                if names.is_empty() {
                    IntegrationMode::replace_all(schema)
                } else {
                    let ids = names
                        .iter()
                        .map(|n| {
                            schema
                                .by_name(n)
                                .map(|f| f.field_id)
                                .ok_or_else(|| Error::Config(format!("unknown context field `{n}`")))
                        })
                        .collect::<Result<_>>()?;
                    IntegrationMode::Replace(ids)
                }
            }
            other => return Err(Error::Config(format!("unknown mode `{other}`"))),
        };
        mode.validate(schema)?;
        Ok(mode)
    }

    /// The single mode used by train, eval and serve-sim.
    pub fn mode(&self, schema: &FieldSchema) -> Result<IntegrationMode> {
        self.mode_named(self.get("ctx.mode")?.trim(), schema)
    }

    pub fn plan(&self, schema: &FieldSchema) -> Result<ExperimentPlan> {
        let variants = list(self.get("plan.variants")?)
            .map(|v| self.mode_named(v, schema))
            .collect::<Result<Vec<_>>>()?;
        let seeds = list(self.get("plan.seeds")?)
            .map(|s| {
                s.parse::<u64>()
                    .map_err(|e| Error::Config(format!("`plan.seeds` entry `{s}`: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ExperimentPlan {
            variants,
            warmup_fraction: self.parsed("plan.warmup_fraction")?,
            eval_fraction: self.parsed("plan.eval_fraction")?,
            seeds,
            day_chunks: self.parsed("plan.day_chunks")?,
            threads: self.threads()?,
        })
    }

    pub fn threads(&self) -> Result<usize> {
        self.parsed("threads")
    }

    pub fn strict_ts(&self) -> Result<bool> {
        self.parsed("strict_ts")
    }

    pub fn out_dir(&self) -> Result<PathBuf> {
        Ok(PathBuf::from(self.get("out")?))
    }

    pub fn model_dir(&self) -> Result<PathBuf> {
        let dir = self.get("model_dir")?;
        if dir.is_empty() {
            self.out_dir()
        } else {
            Ok(PathBuf::from(dir))
        }
    }

    /// Every key in table order with its resolved value.
    pub fn render(&self) -> String {
        let mut s = String::from("# resolved ctxctr configuration\n");
        for (key, _, doc) in KEYS {
            let _ = writeln!(s, "# {doc}\n{key} = {}", self.values[key]);
        }
        s
    }
}
