// Baseline, Replace and Add compared on a few seeds, with the comparison
// table and the per-chunk lift series.
//
// Pass `full` to run the default 200k-request configuration.

use ctxctr::datagen::SyntheticConfig;
use ctxctr::report::{daily_rows, lift_series_text, report_rows, table_text};
use ctxctr::sim::{daily_lift_report, run_experiment, ExperimentOutput, ExperimentPlan, PipelineConfig};

fn experiment(synth: &SyntheticConfig) -> ctxctr::Result<ExperimentOutput> {
    let plan = ExperimentPlan::default_for(&synth.schema()?);
    let output = run_experiment(&plan, synth, &PipelineConfig::default())?;
    let daily = daily_lift_report(&output, plan.day_chunks)?;
    println!("{}", table_text(&report_rows(&output)));
    println!("{}", lift_series_text(&daily_rows(&daily)));
    Ok(output)
}

pub fn run_example() -> ctxctr::Result<ExperimentOutput> {
    experiment(&SyntheticConfig { n_requests: 4_000, cardinality: 50, ..SyntheticConfig::default() })
}

fn main() -> ctxctr::Result<()> {
    if std::env::args().any(|a| a == "full") {
        experiment(&SyntheticConfig::default())?;
    } else {
        run_example()?;
    }
    Ok(())
}
