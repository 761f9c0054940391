// A context-only model's prediction turned into one bucketized feature and
// injected into the main model's input under each integration mode.

use ctxctr::context::{augment, bucketize, predict_context_ctr, ContextProjection, CtxBucketizer, IntegrationMode};
use ctxctr::model::{FfmModel, TrainConfig};
use ctxctr::schema::{Entry, FeatureVector, FieldSchema};

pub fn run_example() -> ctxctr::Result<Vec<(String, usize)>> {
    let schema = FieldSchema::from_names(&["site", "hour"], &["ad", "advertiser"], true)?;
    let projection = ContextProjection::from_schema(&schema)?;
    let mut ctx_model = FfmModel::new(projection.context_schema().clone(), TrainConfig::default())?;

    let full = FeatureVector::new(vec![
        Entry::one_hot(0, 11),
        Entry::one_hot(1, 7),
        Entry::one_hot(2, 301),
        Entry::one_hot(3, 42),
    ])?;
    let ctx_fv = projection.project(&full);
    for label in [1, 0, 0, 1, 1] {
        ctx_model.update(&ctx_fv, label)?;
    }

    let p = predict_context_ctr(&ctx_model, &ctx_fv)?;
    let derived_field = schema.derived_field().expect("schema has a derived field");
    let derived = bucketize(p, &CtxBucketizer::default(), derived_field)?;
    println!("context CTR {p:.4} -> bucket {} of 32", derived.bucket_index);

    let mut sizes = Vec::new();
    for mode in [IntegrationMode::Baseline, IntegrationMode::replace_all(&schema), IntegrationMode::Add] {
        let input = augment(&full, &derived, &mode)?;
        println!("{:<9} {} active features", mode.name(), input.len());
        sizes.push((mode.name().to_string(), input.len()));
    }
    Ok(sizes)
}

fn main() -> ctxctr::Result<()> {
    run_example()?;
    Ok(())
}
