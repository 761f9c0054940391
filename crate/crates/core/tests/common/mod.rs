#![allow(dead_code)]

use ctxctr::model::{FfmModel, TrainConfig};
use ctxctr::schema::{Entry, FeatureVector, FieldSchema};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A small FFM with every weight the example touches set explicitly.
pub struct Instance {
    pub model: FfmModel,
    pub fv: FeatureVector,
    pub label: u8,
}

pub fn random_instance(seed: u64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_fields = rng.random_range(1..=4usize);
    let k = rng.random_range(1..=3usize);
    let names: Vec<String> = (0..n_fields).map(|f| format!("f{f}")).collect();
    let split = rng.random_range(0..=n_fields);
    let schema = FieldSchema::from_names(&names[..split], &names[split..], false).unwrap();
    let config = TrainConfig { k, hash_bits: 8, ..TrainConfig::default() };
    let mut model = FfmModel::new(schema, config).unwrap();

    let mut entries = Vec::new();
    for f in 0..n_fields as u32 {
        // small index range so fields share weights now and then
        let index = rng.random_range(0..6u32);
        entries.push(Entry::new(f, index, rng.random_range(0.5..1.5)));
    }
    let fv = FeatureVector::new(entries).unwrap();
    model.set_bias(rng.random_range(-0.5..0.5));
    for e in fv.entries() {
        model.set_linear(e.index, rng.random_range(-0.5..0.5));
        for g in 0..n_fields as u32 {
            let v: Vec<f64> = (0..k).map(|_| rng.random_range(-0.7..0.7)).collect();
            model.set_latent(e.index, g, &v).unwrap();
        }
    }
    let label = rng.random_range(0..2u8);
    Instance { model, fv, label }
}

/// Unclipped log-loss as a function of the logit.
pub fn loss_at(model: &FfmModel, fv: &FeatureVector, label: u8) -> f64 {
    let z = model.predict_logit(fv).unwrap();
    let softplus = if z > 0.0 { z + (-z).exp().ln_1p() } else { z.exp().ln_1p() };
    softplus - f64::from(label) * z
}

fn central(h: f64, mut at: impl FnMut(f64) -> f64, w: f64) -> f64 {
    (at(w + h) - at(w - h)) / (2.0 * h)
}

fn rel_err(a: f64, n: f64) -> f64 {
    (a - n).abs() / a.abs().max(n.abs()).max(1e-7)
}

/// Largest relative error between the analytic gradient and central
/// differences with step `h`, over every coordinate.
pub fn max_gradient_error(inst: &Instance, h: f64) -> f64 {
    let Instance { model, fv, label } = inst;
    let grad = model.gradient(fv, *label).unwrap();
    let mut worst = 0.0f64;

    let mut m = model.clone();
    let n = central(h, |w| { m.set_bias(w); loss_at(&m, fv, *label) }, model.bias());
    worst = worst.max(rel_err(grad.bias, n));

    for &(index, g) in &grad.linear {
        let mut m = model.clone();
        let w0 = model.linear_weight(index);
        let n = central(h, |w| { m.set_linear(index, w); loss_at(&m, fv, *label) }, w0);
        worst = worst.max(rel_err(g, n));
    }
    for ((index, field), g) in &grad.latent {
        let base = model.latent_vector(*index, *field);
        for (c, &gc) in g.iter().enumerate() {
            let mut m = model.clone();
            let n = central(
                h,
                |w| {
                    let mut v = base.clone();
                    v[c] = w;
                    m.set_latent(*index, *field, &v).unwrap();
                    loss_at(&m, fv, *label)
                },
                base[c],
            );
            worst = worst.max(rel_err(gc, n));
        }
    }
    worst
}
