//! The `ctxctr` command line.
//!
//! ```text
//! ctxctr gen [LOG]          write a synthetic log (default <out>/log.jsonl)
//! ctxctr train LOG          replay a log, write main.ckpt and ctx.ckpt
//! ctxctr eval LOG           score a log with saved checkpoints, no updates
//! ctxctr experiment         baseline / replace / add over several seeds
//! ctxctr serve-sim LOG      scoring-only replay with cost counters
//! ctxctr report [DIR]       print the table and lift series of an experiment
//! ```
//!
//! Exit codes: 0 on success, 1 on usage errors, 2 on runtime errors. Runtime
//! errors also print one JSON object on stderr.

use std::ffi::OsString;
use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::checkpoint;
use crate::config::RunConfig;
use crate::datagen::{encode_stream, schema_for_record, write_log, EncodedRequest, ImpressionRecord, LogReader, SyntheticWorld};
use crate::error::{Error, Result};
use crate::eval::MetricsReport;
use crate::report::{self, DailyRow, ReportRow};
use crate::schema::FieldSchema;
use crate::sim::{
    daily_lift_report, replay_score, replay_train, run_experiment, simulate_serving, ExperimentOutput,
    Pipeline, ServeSummary,
};

pub const MAIN_CHECKPOINT: &str = "main.ckpt";
pub const CTX_CHECKPOINT: &str = "ctx.ckpt";
pub const RESOLVED_CONFIG: &str = "resolved_config.txt";

#[derive(Debug, Parser)]
#[command(name = "ctxctr", version, about = "Online CTR prediction with a context-only auxiliary model")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub shared: Shared,
}

#[derive(Debug, Args)]
pub struct Shared {
    /// Flat key = value configuration file
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Generator seed; for experiment, the single seed to run
    #[arg(long, global = true, value_name = "N")]
    pub seed: Option<u64>,
    /// Output directory
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Worker threads across seeds and variants
    #[arg(long, global = true, value_name = "N")]
    pub threads: Option<usize>,
    /// Fail on out-of-order timestamps
    #[arg(long, global = true)]
    pub strict_ts: bool,
    /// Override one configuration key
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a synthetic impression log
    Gen { log: Option<PathBuf> },
    /// Train both models on a log and save checkpoints
    Train { log: PathBuf },
    /// Score a log with saved checkpoints without updating them
    Eval { log: PathBuf },
    /// Run every variant on every seed and write the reports
    Experiment,
    /// Replay a log in scoring-only mode and report costs
    ServeSim { log: PathBuf },
    /// Print the table and lift series of a finished experiment
    Report { dir: Option<PathBuf> },
}

impl Shared {
    /// File config, then overrides, then dedicated flags.
    pub fn resolve(&self, experiment: bool) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        for pair in &self.overrides {
            cfg.set_pair(pair)?;
        }
        if let Some(seed) = self.seed {
            cfg.set("gen.seed", &seed.to_string())?;
            if experiment {
                cfg.set("plan.seeds", &seed.to_string())?;
            }
        }
        if let Some(out) = &self.out {
            cfg.set("out", &out.to_string_lossy())?;
        }
        if let Some(t) = self.threads {
            cfg.set("threads", &t.to_string())?;
        }
        if self.strict_ts {
            cfg.set("strict_ts", "true")?;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Creates `dir` and writes every file through a temporary sibling.
pub fn write_outputs(dir: &Path, files: &[(&str, String)]) -> Result<()> {
    fs::create_dir_all(dir)?;
    for (name, contents) in files {
        let tmp = dir.join(format!(".{name}.tmp"));
        fs::write(&tmp, contents)?;
        fs::rename(&tmp, dir.join(name))?;
    }
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct GenSummary {
    pub path: PathBuf,
    pub n_requests: usize,
    pub impressions: usize,
    pub empirical_ctr: f64,
}

pub fn cmd_gen(cfg: &RunConfig, out_path: &Path) -> Result<GenSummary> {
    let synth = cfg.synthetic()?;
    let world = SyntheticWorld::new(synth.clone())?;
    let records: Vec<ImpressionRecord> = world.records().collect();
    let clicks: u64 = records.iter().map(|r| u64::from(r.click)).sum();
    let mut buf = Vec::new();
    write_log(&records, &mut buf)?;
    let dir = out_path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = out_path
        .file_name()
        .ok_or_else(|| Error::Config(format!("`{}` is not a file path", out_path.display())))?
        .to_string_lossy()
        .into_owned();
    let text = String::from_utf8(buf).map_err(|e| Error::Input(e.to_string()))?;
    write_outputs(dir, &[(&name, text)])?;
    write_outputs(&cfg.out_dir()?, &[(RESOLVED_CONFIG, cfg.render())])?;
    Ok(GenSummary {
        path: out_path.to_path_buf(),
        n_requests: synth.n_requests,
        impressions: records.len(),
        empirical_ctr: if records.is_empty() { 0.0 } else { clicks as f64 / records.len() as f64 },
    })
}

/// Reads and hashes a log. An empty log yields no schema.
pub fn load_log(path: &Path, cfg: &RunConfig) -> Result<(Option<FieldSchema>, Vec<EncodedRequest>)> {
    let file = fs::File::open(path).map_err(|e| Error::Input(format!("cannot open {}: {e}", path.display())))?;
    let records = LogReader::new(BufReader::new(file), cfg.strict_ts()?).collect::<Result<Vec<_>>>()?;
    let Some(first) = records.first() else {
        return Ok((None, Vec::new()));
    };
    let schema = schema_for_record(first)?;
    let hash_bits = cfg.pipeline_config()?.main.hash_bits;
    let requests = encode_stream(records.into_iter().map(Ok), &schema, hash_bits)?;
    Ok((Some(schema), requests))
}

fn require_schema(schema: Option<FieldSchema>, path: &Path) -> Result<FieldSchema> {
    schema.ok_or_else(|| Error::Input(format!("log {} has no impressions", path.display())))
}

pub fn cmd_train(cfg: &RunConfig, log_path: &Path) -> Result<MetricsReport> {
    let (schema, requests) = load_log(log_path, cfg)?;
    let schema = require_schema(schema, log_path)?;
    let pcfg = cfg.pipeline_config()?;
    let mode = cfg.mode(&schema)?;
    let outcome = replay_train(&requests, &schema, mode.clone(), &pcfg)?;
    let c = outcome.counters;
    let report = MetricsReport::from_accumulator(
        mode.name(),
        &outcome.accumulator_from(0),
        c.flops_per_ad(),
        c.flops_per_request(mode.uses_context()),
    )?;
    let (main, ctx) = outcome.pipeline.into_models();
    let mut main_buf = Vec::new();
    let mut ctx_buf = Vec::new();
    checkpoint::write_model(&main, &mut main_buf)?;
    checkpoint::write_model(&ctx, &mut ctx_buf)?;
    let text = |b: Vec<u8>| String::from_utf8(b).map_err(|e| Error::Checkpoint(e.to_string()));
    write_outputs(
        &cfg.out_dir()?,
        &[
            (MAIN_CHECKPOINT, text(main_buf)?),
            (CTX_CHECKPOINT, text(ctx_buf)?),
            (RESOLVED_CONFIG, cfg.render()),
        ],
    )?;
    Ok(report)
}

/// Loads both checkpoints from the configured model directory.
pub fn load_pipeline(cfg: &RunConfig, schema: &FieldSchema) -> Result<Pipeline> {
    let dir = cfg.model_dir()?;
    let main = checkpoint::load(&dir.join(MAIN_CHECKPOINT))?;
    let ctx = checkpoint::load(&dir.join(CTX_CHECKPOINT))?;
    if main.schema() != schema {
        return Err(Error::SchemaMismatch(format!(
            "checkpoint in {} was trained on different fields than the log",
            dir.display()
        )));
    }
    Pipeline::from_models(main, ctx, cfg.mode(schema)?, cfg.bucketizer()?)
}

pub fn cmd_eval(cfg: &RunConfig, log_path: &Path) -> Result<MetricsReport> {
    let (schema, requests) = load_log(log_path, cfg)?;
    let schema = require_schema(schema, log_path)?;
    let pipeline = load_pipeline(cfg, &schema)?;
    let (acc, c) = replay_score(&pipeline, &requests)?;
    MetricsReport::from_accumulator(
        pipeline.mode().name(),
        &acc,
        c.flops_per_ad(),
        c.flops_per_request(pipeline.mode().uses_context()),
    )
}

/// Runs the experiment and writes its files. Nothing is written unless
/// every variant succeeded.
pub fn cmd_experiment(cfg: &RunConfig) -> Result<ExperimentOutput> {
    let synth = cfg.synthetic()?;
    let schema = synth.schema()?;
    let plan = cfg.plan(&schema)?;
    let output = run_experiment(&plan, &synth, &cfg.pipeline_config()?)?;
    let daily = daily_lift_report(&output, plan.day_chunks)?;
    let rows = report::report_rows(&output);
    let files = [
        ("report.csv", report::to_csv(&rows)?),
        ("report_seeds.csv", report::to_csv(&report::seed_rows(&output))?),
        ("daily_lifts.csv", report::to_csv(&report::daily_rows(&daily))?),
        ("counters.json", report::counters_json(&output)?),
        ("table.txt", report::table_text(&rows)),
        (RESOLVED_CONFIG, cfg.render()),
    ];
    write_outputs(&cfg.out_dir()?, &files)?;
    Ok(output)
}

pub fn cmd_serve_sim(cfg: &RunConfig, log_path: &Path) -> Result<ServeSummary> {
    let (schema, requests) = load_log(log_path, cfg)?;
    let Some(schema) = schema else {
        return Ok(ServeSummary {
            counters: Default::default(),
            requests_per_sec: 0.0,
            flops_per_request_with_ctx: 0.0,
            flops_per_request_without_ctx: 0.0,
            ctx_flops_share: 0.0,
        });
    };
    let dir = cfg.model_dir()?;
    let pipeline = if dir.join(MAIN_CHECKPOINT).exists() && dir.join(CTX_CHECKPOINT).exists() {
        load_pipeline(cfg, &schema)?
    } else {
        log::warn!("no checkpoints in {}, scoring with fresh models", dir.display());
        Pipeline::new(schema.clone(), cfg.mode(&schema)?, &cfg.pipeline_config()?)?
    };
    simulate_serving(&pipeline, &requests)
}

/// Renders the table and the lift series stored in an experiment directory.
pub fn cmd_report(dir: &Path) -> Result<String> {
    let read = |name: &str| {
        fs::read_to_string(dir.join(name))
            .map_err(|e| Error::Report(format!("cannot read {}: {e}", dir.join(name).display())))
    };
    let rows: Vec<ReportRow> = report::from_csv(&read("report.csv")?)?;
    let daily: Vec<DailyRow> = report::from_csv(&read("daily_lifts.csv")?)?;
    Ok(format!("{}\n{}", report::table_text(&rows), report::lift_series_text(&daily)))
}

fn json_line<T: Serialize>(value: &T) -> Result<String> {
    serde_json::to_string(value).map_err(|e| Error::Report(e.to_string()))
}

fn execute(cli: &Cli) -> Result<String> {
    let cfg = cli.shared.resolve(matches!(cli.command, Command::Experiment))?;
    match &cli.command {
        Command::Gen { log } => {
            let path = log.clone().unwrap_or(cfg.out_dir()?.join("log.jsonl"));
            let s = cmd_gen(&cfg, &path)?;
            Ok(format!(
                "wrote {} ({} requests, {} impressions)\nn_requests {}\nempirical_ctr {:.6}",
                s.path.display(),
                s.n_requests,
                s.impressions,
                s.n_requests,
                s.empirical_ctr
            ))
        }
        Command::Train { log } => {
            let report = cmd_train(&cfg, log)?;
            Ok(format!(
                "progressive validation: {}\ncheckpoints written to {}",
                json_line(&report)?,
                cfg.out_dir()?.display()
            ))
        }
        Command::Eval { log } => json_line(&cmd_eval(&cfg, log)?),
        Command::Experiment => {
            cmd_experiment(&cfg)?;
            let dir = cfg.out_dir()?;
            Ok(format!("{}\nwrote {}", cmd_report(&dir)?, dir.display()))
        }
        Command::ServeSim { log } => json_line(&cmd_serve_sim(&cfg, log)?),
        Command::Report { dir } => cmd_report(&dir.clone().unwrap_or(cfg.out_dir()?)),
    }
}

#[derive(Serialize)]
struct ErrorLine<'a> {
    error: &'a str,
    message: String,
}

/// Parses `args` and runs the command, returning the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(text) => {
            println!("{text}");
            0
        }
        Err(e) => {
            let line = ErrorLine {
                error: e.kind(),
                message: e.to_string(),
            };
            eprintln!("{}", serde_json::to_string(&line).unwrap_or_else(|_| e.to_string()));
            2
        }
    }
}

pub fn main() -> ! {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    std::process::exit(run(std::env::args_os()))
}
