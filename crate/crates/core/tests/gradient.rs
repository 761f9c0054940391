mod common;

use common::{max_gradient_error, random_instance};
use ctxctr::model::{FfmModel, TrainConfig};
use ctxctr::schema::{Entry, FeatureVector, FieldSchema};

#[test]
fn analytic_gradient_matches_central_differences() {
    for seed in 0..200 {
        let err = max_gradient_error(&random_instance(seed), 1e-5);
        assert!(err < 1e-4, "seed {seed}: relative error {err}");
    }
}

#[test]
fn gradient_covers_exactly_the_touched_coordinates() {
    let inst = random_instance(11);
    let grad = inst.model.gradient(&inst.fv, inst.label).unwrap();
    let n = inst.fv.len();
    let distinct_idx: std::collections::BTreeSet<u32> = inst.fv.entries().iter().map(|e| e.index).collect();
    assert_eq!(grad.linear.len(), distinct_idx.len());
    assert!(grad.latent.len() <= n * n.saturating_sub(1));
}

// Values from an independent re-implementation: bias 0.1, linear
// {3: 0.2, 5: -0.3, 9: 0.05}, explicit k = 2 latents, two steps with labels 1
// then 0 at lr 0.1, l2 1e-5.
#[test]
fn two_adagrad_steps_match_reference() {
    let schema = FieldSchema::from_names(&["a", "b"], &["c"], false).unwrap();
    let config = TrainConfig { k: 2, learning_rate: 0.1, l2: 1e-5, ..TrainConfig::default() };
    let mut m = FfmModel::new(schema, config).unwrap();
    m.set_bias(0.1);
    for (i, w) in [(3, 0.2), (5, -0.3), (9, 0.05)] {
        m.set_linear(i, w);
    }
    let latents: [((u32, u32), [f64; 2]); 6] = [
        ((3, 1), [0.3, -0.2]),
        ((3, 2), [0.1, 0.4]),
        ((5, 0), [-0.5, 0.25]),
        ((5, 2), [0.2, 0.2]),
        ((9, 0), [0.15, -0.35]),
        ((9, 1), [0.6, 0.05]),
    ];
    for ((i, f), v) in latents {
        m.set_latent(i, f, &v).unwrap();
    }
    let fv = FeatureVector::new(vec![Entry::new(0, 3, 1.0), Entry::new(1, 5, 0.5), Entry::new(2, 9, 2.0)]).unwrap();

    let close = |a: f64, b: f64| (a - b).abs() <= 1e-13 * b.abs().max(1.0);
    assert!(close(m.predict_logit(&fv).unwrap(), 0.030000000000000027));
    assert!(close(m.update(&fv, 1).unwrap(), 0.5074994375506203));
    assert!(close(m.update(&fv, 0).unwrap(), 0.7021380676979653));
    assert!(close(m.bias(), 0.11813183782211098));
    assert!(close(m.linear_weight(5), -0.28186767952651914));
    let v = m.latent_vector(5, 2);
    assert!(close(v[0], 0.21429678711232392));
    assert!(close(v[1], 0.20262559698845398));
    assert!(close(m.predict_logit(&fv).unwrap(), 0.18619370409160735));
}
