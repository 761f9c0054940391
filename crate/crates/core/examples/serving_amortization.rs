// One context prediction per request is shared by every candidate, so its
// share of the per-request cost falls as requests grow.

use ctxctr::context::IntegrationMode;
use ctxctr::datagen::SyntheticConfig;
use ctxctr::sim::{encoded_dataset, simulate_serving, Pipeline, PipelineConfig};

pub fn run_example() -> ctxctr::Result<Vec<(usize, u64, f64)>> {
    let mut rows = Vec::new();
    for candidates in [1, 4, 16] {
        let synth = SyntheticConfig {
            n_requests: 500,
            candidates_per_request: candidates,
            cardinality: 100,
            ..SyntheticConfig::default()
        };
        let (schema, requests) = encoded_dataset(&synth, 20)?;
        let pipeline = Pipeline::new(schema, IntegrationMode::Add, &PipelineConfig::default())?;
        let s = simulate_serving(&pipeline, &requests)?;
        println!(
            "{candidates:>2} candidates: ctx_evals {:>4}, main_evals {:>5}, FLOPs/request {:>6.0}, context share {:.3}",
            s.counters.ctx_evals, s.counters.main_evals, s.flops_per_request_with_ctx, s.ctx_flops_share
        );
        rows.push((candidates, s.counters.ctx_evals, s.ctx_flops_share));
    }
    Ok(rows)
}

fn main() -> ctxctr::Result<()> {
    run_example()?;
    Ok(())
}
