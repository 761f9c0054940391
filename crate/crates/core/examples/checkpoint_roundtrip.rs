// Train, save, load, and confirm the loaded model predicts bit for bit the
// same as the original.

use ctxctr::checkpoint;
use ctxctr::context::IntegrationMode;
use ctxctr::datagen::SyntheticConfig;
use ctxctr::sim::{encoded_dataset, replay_score, replay_train, Pipeline, PipelineConfig};

pub fn run_example() -> ctxctr::Result<usize> {
    let synth = SyntheticConfig { n_requests: 1_000, cardinality: 50, ..SyntheticConfig::default() };
    let (schema, requests) = encoded_dataset(&synth, 20)?;
    let config = PipelineConfig::default();
    let trained = replay_train(&requests, &schema, IntegrationMode::Add, &config)?.pipeline;

    let dir = tempfile::tempdir()?;
    checkpoint::save(trained.main(), &dir.path().join("main.ckpt"))?;
    checkpoint::save(trained.ctx(), &dir.path().join("ctx.ckpt"))?;
    let loaded = Pipeline::from_models(
        checkpoint::load(&dir.path().join("main.ckpt"))?,
        checkpoint::load(&dir.path().join("ctx.ckpt"))?,
        IntegrationMode::Add,
        config.bucketizer.clone(),
    )?;

    let before = replay_score(&trained, &requests)?.0;
    let after = replay_score(&loaded, &requests)?.0;
    let same = before
        .scores()
        .unwrap_or_default()
        .iter()
        .zip(after.scores().unwrap_or_default())
        .filter(|(a, b)| a.0.to_bits() == b.0.to_bits())
        .count();
    println!("{same} of {} predictions identical after reload", before.n());
    Ok(same)
}

fn main() -> ctxctr::Result<()> {
    run_example()?;
    Ok(())
}
