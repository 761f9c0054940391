// Online training of a field-aware factorization machine on a synthetic
// stream, with predict-then-update (progressive) log-loss.

use ctxctr::datagen::{generate, vectorize, SyntheticConfig};
use ctxctr::eval::{rig, MetricsAccumulator};
use ctxctr::model::{FfmModel, ModelKind, TrainConfig};

fn train(kind: ModelKind, config: &SyntheticConfig) -> ctxctr::Result<f64> {
    let schema = config.schema()?;
    let train = TrainConfig { kind, hash_bits: 18, ..TrainConfig::default() };
    let mut model = FfmModel::new(schema.clone(), train)?;
    let mut acc = MetricsAccumulator::new();
    for record in generate(config.clone())? {
        let fv = vectorize(&record, &schema, 18)?;
        acc.push(record.click, model.update(&fv, record.click)?);
    }
    rig(&acc)
}

pub fn run_example() -> ctxctr::Result<Vec<(ModelKind, f64)>> {
    let config = SyntheticConfig { n_requests: 5_000, cardinality: 50, ..SyntheticConfig::default() };
    let mut out = Vec::new();
    for kind in [ModelKind::Intercept, ModelKind::Logistic, ModelKind::Ffm] {
        let r = train(kind, &config)?;
        println!("{kind:<10} progressive RIG {r:.4}");
        out.push((kind, r));
    }
    Ok(out)
}

fn main() -> ctxctr::Result<()> {
    run_example()?;
    Ok(())
}
