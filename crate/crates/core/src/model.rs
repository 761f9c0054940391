//! Field-aware factorization machine with a logistic output, trained
//! online with per-coordinate AdaGrad.
//!
//! The logit of a feature vector `x` is
//!
//! ```text
//! phi(x) = bias + sum_j w_j x_j + sum_{a<b} <v_{a, field(b)}, v_{b, field(a)}> x_a x_b
//! ```
//!
//! Weights live in sparse maps and are created on first update. Latent
//! vectors that were never updated read as the value their lazy
//! initialization would produce, computed from a counter-based hash of
//! `(seed, feature index, target field, coordinate)`, so prediction never
//! mutates the model.

use std::fmt;
use std::ops::Deref;
use std::str::FromStr;
use std::sync::Arc;

use rustc_hash::FxHashMap;

use crate::error::{Error, Result};
use crate::flops;
use crate::schema::{FeatureVector, FieldSchema};

/// Added to the AdaGrad denominator, never stored.
pub const ADAGRAD_EPS: f64 = 1e-10;

/// Which member of the family a model evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ModelKind {
    /// Bias, linear terms and field-aware pairwise interactions.
    #[default]
    Ffm,
    /// Bias and linear terms only.
    Logistic,
    /// Bias only; features are validated and ignored.
    Intercept,
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelKind::Ffm => "ffm",
            ModelKind::Logistic => "logistic",
            ModelKind::Intercept => "intercept",
        })
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ffm" => Ok(ModelKind::Ffm),
            "logistic" => Ok(ModelKind::Logistic),
            "intercept" => Ok(ModelKind::Intercept),
            other => Err(Error::Config(format!("unknown model kind `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub kind: ModelKind,
    pub learning_rate: f64,
    pub l2: f64,
    pub init_scale: f64,
    pub k: usize,
    pub hash_bits: u32,
    pub clip_eps: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            kind: ModelKind::Ffm,
            learning_rate: 0.1,
            l2: 1e-5,
            init_scale: 0.1,
            k: 4,
            hash_bits: 20,
            clip_eps: 1e-6,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return bad(format!("learning_rate must be > 0, got {}", self.learning_rate));
        }
        if !(self.l2.is_finite() && self.l2 >= 0.0) {
            return bad(format!("l2 must be >= 0, got {}", self.l2));
        }
        if !(self.init_scale.is_finite() && self.init_scale > 0.0) {
            return bad(format!("init_scale must be > 0, got {}", self.init_scale));
        }
        if self.k == 0 {
            return bad("k must be positive".into());
        }
        if !(8..=30).contains(&self.hash_bits) {
            return bad(format!("hash_bits must be in [8, 30], got {}", self.hash_bits));
        }
        if !(self.clip_eps > 0.0 && self.clip_eps < 0.5) {
            return bad(format!("clip_eps must be in (0, 0.5), got {}", self.clip_eps));
        }
        Ok(())
    }

    pub fn feature_space(&self) -> u64 {
        1u64 << self.hash_bits
    }
}

pub fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Logistic loss of a (pre-clipped) probability.
pub fn log_loss(label: u8, p: f64) -> f64 {
    if label == 1 {
        -p.ln()
    } else {
        -(1.0 - p).ln()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub(crate) struct Weight {
    pub(crate) w: f64,
    pub(crate) acc: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct LatentSlot {
    pub(crate) w: Vec<f64>,
    pub(crate) acc: Vec<f64>,
}

pub type LatentKey = (u32, u32);

/// Loss gradient with respect to every coordinate an example touches.
///
/// Coordinates shared by several terms (hash collisions) appear once with
/// their contributions summed. Regularization is not included.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradient {
    pub bias: f64,
    pub linear: Vec<(u32, f64)>,
    pub latent: Vec<(LatentKey, Vec<f64>)>,
}

/// A field-aware factorization machine and its AdaGrad state.
#[derive(Debug, Clone, PartialEq)]
pub struct FfmModel {
    schema: FieldSchema,
    config: TrainConfig,
    bias: Weight,
    pub(crate) linear: FxHashMap<u32, Weight>,
    pub(crate) latent: FxHashMap<LatentKey, LatentSlot>,
    update_count: u64,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Latent coordinates of one example, laid out `[entry][target field][k]`
/// over the distinct fields present in the example.
struct Gathered {
    fields: Vec<u32>,
    field_pos: Vec<usize>,
    vecs: Vec<f64>,
    k: usize,
}

impl Gathered {
    fn slot(&self, entry: usize, field_slot: usize) -> &[f64] {
        let g = self.fields.len();
        let start = (entry * g + field_slot) * self.k;
        &self.vecs[start..start + self.k]
    }
}

impl FfmModel {
    pub fn new(schema: FieldSchema, config: TrainConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            schema,
            config,
            bias: Weight::default(),
            linear: FxHashMap::default(),
            latent: FxHashMap::default(),
            update_count: 0,
        })
    }

    pub fn schema(&self) -> &FieldSchema {
        &self.schema
    }

    pub fn config(&self) -> &TrainConfig {
        &self.config
    }

    pub fn bias(&self) -> f64 {
        self.bias.w
    }

    pub fn bias_accumulator(&self) -> f64 {
        self.bias.acc
    }

    pub fn update_count(&self) -> u64 {
        self.update_count
    }

    pub fn touched_linear(&self) -> usize {
        self.linear.len()
    }

    pub fn touched_latent(&self) -> usize {
        self.latent.len()
    }

    pub fn linear_weight(&self, index: u32) -> f64 {
        self.linear.get(&index).map_or(0.0, |w| w.w)
    }

    pub fn linear_accumulator(&self, index: u32) -> f64 {
        self.linear.get(&index).map_or(0.0, |w| w.acc)
    }

    /// The latent vector of `index` towards `target_field`, initialized
    /// on the fly when it has never been updated.
    pub fn latent_vector(&self, index: u32, target_field: u32) -> Vec<f64> {
        let mut out = vec![0.0; self.config.k];
        self.read_latent(index, target_field, &mut out);
        out
    }

    pub fn latent_accumulator(&self, index: u32, target_field: u32) -> Vec<f64> {
        self.latent
            .get(&(index, target_field))
            .map_or_else(|| vec![0.0; self.config.k], |s| s.acc.clone())
    }

    pub fn set_bias(&mut self, value: f64) {
        self.bias.w = value;
    }

    pub fn set_linear(&mut self, index: u32, value: f64) {
        self.linear.entry(index).or_default().w = value;
    }

    pub fn set_latent(&mut self, index: u32, target_field: u32, value: &[f64]) -> Result<()> {
        if value.len() != self.config.k {
            return Err(Error::Input(format!(
                "latent vector has {} entries, expected k = {}",
                value.len(),
                self.config.k
            )));
        }
        let k = self.config.k;
        let slot = self.latent.entry((index, target_field)).or_insert_with(|| LatentSlot {
            w: vec![0.0; k],
            acc: vec![0.0; k],
        });
        slot.w.copy_from_slice(value);
        Ok(())
    }

    /// The value lazy initialization assigns to one latent coordinate.
    pub fn init_latent_coord(&self, index: u32, target_field: u32, coord: usize) -> f64 {
        let mut h = splitmix64(self.config.seed);
        h = splitmix64(h ^ u64::from(index));
        h = splitmix64(h ^ ((u64::from(target_field) << 32) | coord as u64));
        let unit = (h >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
        unit * self.config.init_scale / (self.config.k as f64).sqrt()
    }

    fn read_latent(&self, index: u32, target_field: u32, out: &mut [f64]) {
        match self.latent.get(&(index, target_field)) {
            Some(slot) => out.copy_from_slice(&slot.w),
            None => {
                for (c, o) in out.iter_mut().enumerate() {
                    *o = self.init_latent_coord(index, target_field, c);
                }
            }
        }
    }

    fn gather(&self, fv: &FeatureVector) -> Gathered {
        let entries = fv.entries();
        let mut fields: Vec<u32> = entries.iter().map(|e| e.field).collect();
        fields.dedup();
        let field_pos = entries
            .iter()
            .map(|e| fields.binary_search(&e.field).unwrap_or_default())
            .collect();
        let k = self.config.k;
        let g = fields.len();
        let mut vecs = vec![0.0; entries.len() * g * k];
        for (a, e) in entries.iter().enumerate() {
            for (s, &f) in fields.iter().enumerate() {
                let start = (a * g + s) * k;
                self.read_latent(e.index, f, &mut vecs[start..start + k]);
            }
        }
        Gathered {
            fields,
            field_pos,
            vecs,
            k,
        }
    }

    fn logit_unchecked(&self, fv: &FeatureVector, gathered: Option<&Gathered>) -> f64 {
        let entries = fv.entries();
        let mut logit = self.bias.w;
        if self.config.kind == ModelKind::Intercept {
            return logit;
        }
        for e in entries {
            logit += self.linear_weight(e.index) * e.value;
        }
        if let Some(gt) = gathered {
            for a in 0..entries.len() {
                for b in (a + 1)..entries.len() {
                    let va = gt.slot(a, gt.field_pos[b]);
                    let vb = gt.slot(b, gt.field_pos[a]);
                    let dot: f64 = va.iter().zip(vb).map(|(x, y)| x * y).sum();
                    logit += dot * entries[a].value * entries[b].value;
                }
            }
        }
        logit
    }

    fn check(&self, fv: &FeatureVector) -> Result<()> {
        fv.validate(&self.schema)
    }

    fn gathered_for(&self, fv: &FeatureVector) -> Option<Gathered> {
        (self.config.kind == ModelKind::Ffm && fv.len() >= 2).then(|| self.gather(fv))
    }

    pub fn predict_logit(&self, fv: &FeatureVector) -> Result<f64> {
        self.check(fv)?;
        let gathered = self.gathered_for(fv);
        Ok(self.logit_unchecked(fv, gathered.as_ref()))
    }

    fn clip(&self, p: f64) -> f64 {
        p.clamp(self.config.clip_eps, 1.0 - self.config.clip_eps)
    }

    /// Sigmoid of the logit, clipped into `[clip_eps, 1 - clip_eps]`.
    pub fn predict_proba(&self, fv: &FeatureVector) -> Result<f64> {
        Ok(self.clip(sigmoid(self.predict_logit(fv)?)))
    }

    /// Loss gradient of one labeled example at the current weights.
    pub fn gradient(&self, fv: &FeatureVector, label: u8) -> Result<Gradient> {
        self.check(fv)?;
        check_label(label)?;
        let gathered = self.gathered_for(fv);
        let p = self.clip(sigmoid(self.logit_unchecked(fv, gathered.as_ref())));
        Ok(self.gradient_at(fv, gathered.as_ref(), p - f64::from(label)))
    }

    fn gradient_at(&self, fv: &FeatureVector, gathered: Option<&Gathered>, g: f64) -> Gradient {
        let mut grad = Gradient {
            bias: g,
            linear: Vec::new(),
            latent: Vec::new(),
        };
        if self.config.kind == ModelKind::Intercept {
            return grad;
        }
        let entries = fv.entries();
        let mut linear: Vec<(u32, f64)> = entries.iter().map(|e| (e.index, g * e.value)).collect();
        merge_sorted(&mut linear, |acc, x| *acc += x);
        grad.linear = linear;

        let Some(gt) = gathered else {
            return grad;
        };
        let k = gt.k;
        let nf = gt.fields.len();
        let mut latent_grad = vec![0.0; entries.len() * nf * k];
        let mut used = vec![false; entries.len() * nf];
        for a in 0..entries.len() {
            for b in (a + 1)..entries.len() {
                let (sa, sb) = (gt.field_pos[b], gt.field_pos[a]);
                let scale = g * entries[a].value * entries[b].value;
                let va = gt.slot(a, sa);
                let vb = gt.slot(b, sb);
                let ga = (a * nf + sa) * k;
                let gb = (b * nf + sb) * k;
                for c in 0..k {
                    latent_grad[ga + c] += scale * vb[c];
                    latent_grad[gb + c] += scale * va[c];
                }
                used[a * nf + sa] = true;
                used[b * nf + sb] = true;
            }
        }
        let mut latent: Vec<(LatentKey, Vec<f64>)> = Vec::new();
        for a in 0..entries.len() {
            for s in 0..nf {
                if used[a * nf + s] {
                    let start = (a * nf + s) * k;
                    latent.push((
                        (entries[a].index, gt.fields[s]),
                        latent_grad[start..start + k].to_vec(),
                    ));
                }
            }
        }
        merge_sorted(&mut latent, |acc, x| {
            for (a, b) in acc.iter_mut().zip(x) {
                *a += b;
            }
        });
        grad.latent = latent;
        grad
    }

    /// Applies one AdaGrad step for a labeled example and returns the
    /// prediction made before any weight changed.
    pub fn update(&mut self, fv: &FeatureVector, label: u8) -> Result<f64> {
        self.check(fv)?;
        check_label(label)?;
        let gathered = self.gathered_for(fv);
        let p = self.clip(sigmoid(self.logit_unchecked(fv, gathered.as_ref())));
        let grad = self.gradient_at(fv, gathered.as_ref(), p - f64::from(label));
        self.apply(&grad);
        self.update_count += 1;
        Ok(p)
    }

    fn apply(&mut self, grad: &Gradient) {
        let lr = self.config.learning_rate;
        let l2 = self.config.l2;
        let step = |w: &mut f64, acc: &mut f64, g: f64| {
            *acc += g * g;
            *w -= lr * g / (*acc + ADAGRAD_EPS).sqrt();
        };

        step(&mut self.bias.w, &mut self.bias.acc, grad.bias);
        for &(index, g) in &grad.linear {
            let slot = self.linear.entry(index).or_default();
            let total = g + l2 * slot.w;
            step(&mut slot.w, &mut slot.acc, total);
        }
        let k = self.config.k;
        for ((index, field), g) in &grad.latent {
            if !self.latent.contains_key(&(*index, *field)) {
                let w = (0..k).map(|c| self.init_latent_coord(*index, *field, c)).collect();
                self.latent.insert(
                    (*index, *field),
                    LatentSlot {
                        w,
                        acc: vec![0.0; k],
                    },
                );
            }
            let slot = self.latent.get_mut(&(*index, *field)).expect("inserted above");
            for c in 0..k {
                let total = g[c] + l2 * slot.w[c];
                step(&mut slot.w[c], &mut slot.acc[c], total);
            }
        }
    }

    /// FLOPs of one prediction with `n_active` features.
    pub fn prediction_flops(&self, n_active: usize) -> u64 {
        let n = n_active as u64;
        match self.config.kind {
            ModelKind::Ffm => flops::count_flops(n, self.config.k as u64),
            ModelKind::Logistic => flops::count_flops_linear(n),
            ModelKind::Intercept => flops::count_flops_linear(0),
        }
    }

    pub fn snapshot(&self) -> ModelSnapshot {
        ModelSnapshot(Arc::new(self.clone()))
    }

    pub(crate) fn restore(
        schema: FieldSchema,
        config: TrainConfig,
        bias: (f64, f64),
        update_count: u64,
        linear: FxHashMap<u32, Weight>,
        latent: FxHashMap<LatentKey, LatentSlot>,
    ) -> Self {
        Self {
            schema,
            config,
            bias: Weight {
                w: bias.0,
                acc: bias.1,
            },
            linear,
            latent,
            update_count,
        }
    }
}

/// Sorts by key and folds entries with equal keys together.
fn merge_sorted<K: Ord + Copy, V>(items: &mut Vec<(K, V)>, mut fold: impl FnMut(&mut V, &V)) {
    items.sort_by_key(|(key, _)| *key);
    let mut out: Vec<(K, V)> = Vec::with_capacity(items.len());
    for (key, value) in items.drain(..) {
        match out.last_mut() {
            Some((last, acc)) if *last == key => fold(acc, &value),
            _ => out.push((key, value)),
        }
    }
    *items = out;
}

fn check_label(label: u8) -> Result<()> {
    if label > 1 {
        return Err(Error::Input(format!("label must be 0 or 1, got {label}")));
    }
    Ok(())
}

/// Immutable, shareable view of a model for concurrent prediction.
#[derive(Debug, Clone)]
pub struct ModelSnapshot(Arc<FfmModel>);

impl Deref for ModelSnapshot {
    type Target = FfmModel;

    fn deref(&self) -> &FfmModel {
        &self.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schema::Entry;

    fn two_field_schema() -> FieldSchema {
        FieldSchema::from_names(&["a"], &["b"], false).unwrap()
    }

    fn config(k: usize) -> TrainConfig {
        TrainConfig {
            k,
            ..TrainConfig::default()
        }
    }

    #[test]
    fn fresh_model_has_zero_bias() {
        let m = FfmModel::new(two_field_schema(), config(4)).unwrap();
        assert_eq!(m.bias(), 0.0);
        assert_eq!(m.update_count(), 0);
        assert_eq!(m.predict_logit(&FeatureVector::empty()).unwrap(), 0.0);
    }

    #[test]
    fn rejects_bad_config() {
        for bad in [
            TrainConfig { learning_rate: 0.0, ..config(4) },
            TrainConfig { l2: -1.0, ..config(4) },
            TrainConfig { init_scale: 0.0, ..config(4) },
            TrainConfig { k: 0, ..config(4) },
            TrainConfig { hash_bits: 7, ..config(4) },
            TrainConfig { hash_bits: 31, ..config(4) },
            TrainConfig { clip_eps: 0.5, ..config(4) },
        ] {
            assert!(matches!(FfmModel::new(two_field_schema(), bad), Err(Error::Config(_))));
        }
    }

    #[test]
    fn zero_latents_give_zero_logit() {
        let mut m = FfmModel::new(two_field_schema(), config(3)).unwrap();
        m.set_latent(1, 1, &[0.0; 3]).unwrap();
        m.set_latent(2, 0, &[0.0; 3]).unwrap();
        let fv = FeatureVector::new(vec![Entry::one_hot(0, 1), Entry::one_hot(1, 2)]).unwrap();
        assert_eq!(m.predict_logit(&fv).unwrap(), 0.0);
    }

    #[test]
    fn hand_evaluated_pair() {
        let mut m = FfmModel::new(two_field_schema(), config(2)).unwrap();
        m.set_linear(10, 0.1);
        m.set_linear(20, -0.2);
        m.set_latent(10, 1, &[0.5, -0.5]).unwrap();
        m.set_latent(20, 0, &[0.2, 0.4]).unwrap();
        let fv = FeatureVector::new(vec![Entry::one_hot(0, 10), Entry::one_hot(1, 20)]).unwrap();
        let logit = m.predict_logit(&fv).unwrap();
        assert!((logit - (-0.2)).abs() < 1e-15, "{logit}");
        let p = m.predict_proba(&fv).unwrap();
        assert!((p - 0.450166).abs() < 1e-6, "{p}");
    }

    #[test]
    fn single_feature_is_bias_plus_weight() {
        let mut m = FfmModel::new(two_field_schema(), config(4)).unwrap();
        m.set_bias(0.3);
        m.set_linear(7, 0.2);
        let fv = FeatureVector::new(vec![Entry::one_hot(0, 7)]).unwrap();
        assert!((m.predict_logit(&fv).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn probability_is_clipped() {
        let mut m = FfmModel::new(two_field_schema(), TrainConfig { clip_eps: 1e-6, ..config(4) }).unwrap();
        m.set_bias(100.0);
        assert_eq!(m.predict_proba(&FeatureVector::empty()).unwrap(), 1.0 - 1e-6);
        m.set_bias(0.0);
        assert_eq!(m.predict_proba(&FeatureVector::empty()).unwrap(), 0.5);
    }

    #[test]
    fn one_adagrad_step_on_bias() {
        let mut m = FfmModel::new(
            two_field_schema(),
            TrainConfig { learning_rate: 0.1, ..config(4) },
        )
        .unwrap();
        let p = m.update(&FeatureVector::empty(), 1).unwrap();
        assert_eq!(p, 0.5);
        assert!((m.bias_accumulator() - 0.25).abs() < 1e-15);
        assert!((m.bias() - 0.1).abs() < 1e-9, "{}", m.bias());
        assert_eq!(m.update_count(), 1);
    }

    #[test]
    fn saturated_prediction_barely_moves() {
        let cfg = TrainConfig { learning_rate: 0.1, clip_eps: 1e-6, ..config(2) };
        let mut m = FfmModel::new(two_field_schema(), cfg).unwrap();
        m.set_bias(50.0);
        let fv = FeatureVector::new(vec![Entry::one_hot(0, 3), Entry::one_hot(1, 4)]).unwrap();
        let grad = m.gradient(&fv, 1).unwrap();
        // 1 - (1 - 1e-6) is 1e-6 up to rounding
        let bound = 1e-6 * (1.0 + 1e-9);
        assert!(grad.bias.abs() <= bound);
        for (_, g) in &grad.linear {
            assert!(g.abs() <= bound);
        }
        for (_, g) in &grad.latent {
            assert!(g.iter().all(|x| x.abs() <= bound));
        }
        let before = m.clone();
        m.update(&fv, 1).unwrap();
        assert!((m.bias() - before.bias()).abs() <= 0.1 + 1e-12);
        for idx in [3, 4] {
            assert!((m.linear_weight(idx) - before.linear_weight(idx)).abs() <= 0.1 + 1e-12);
        }
    }

    #[test]
    fn non_binary_label_is_rejected() {
        let mut m = FfmModel::new(two_field_schema(), config(4)).unwrap();
        assert!(matches!(m.update(&FeatureVector::empty(), 2), Err(Error::Input(_))));
        assert_eq!(m.update_count(), 0);
    }

    #[test]
    fn unknown_field_is_a_schema_mismatch() {
        let m = FfmModel::new(two_field_schema(), config(4)).unwrap();
        let fv = FeatureVector::new(vec![Entry::one_hot(9, 1)]).unwrap();
        assert!(matches!(m.predict_logit(&fv), Err(Error::SchemaMismatch(_))));
    }

    #[test]
    fn seeds_change_initialization() {
        let a = FfmModel::new(two_field_schema(), TrainConfig { seed: 1, ..config(4) }).unwrap();
        let a2 = FfmModel::new(two_field_schema(), TrainConfig { seed: 1, ..config(4) }).unwrap();
        let b = FfmModel::new(two_field_schema(), TrainConfig { seed: 2, ..config(4) }).unwrap();
        assert_eq!(a.latent_vector(5, 1), a2.latent_vector(5, 1));
        assert_ne!(a.latent_vector(5, 1), b.latent_vector(5, 1));
        let bound = 0.1 / 2.0;
        for v in a.latent_vector(5, 1) {
            assert!((0.0..=bound).contains(&v));
        }
    }

    #[test]
    fn first_update_materializes_the_lazily_read_vector() {
        let mut m = FfmModel::new(two_field_schema(), config(4)).unwrap();
        let fv = FeatureVector::new(vec![Entry::one_hot(0, 3), Entry::one_hot(1, 4)]).unwrap();
        let before = m.latent_vector(3, 1);
        let grad = m.gradient(&fv, 0).unwrap();
        m.update(&fv, 0).unwrap();
        assert_eq!(m.touched_latent(), 2);
        let after = m.latent_vector(3, 1);
        let g = &grad.latent.iter().find(|(key, _)| *key == (3, 1)).unwrap().1;
        for c in 0..4 {
            // with zero accumulator the first step is lr * sign(g)
            let total = g[c] + 1e-5 * before[c];
            let expected = before[c] - m.config().learning_rate * total / (total * total + ADAGRAD_EPS).sqrt();
            assert!((after[c] - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn colliding_indices_merge_gradients() {
        // the same hashed index in two fields shares one linear weight
        let schema = FieldSchema::from_names(&["a", "b"], &["c"], false).unwrap();
        let m = FfmModel::new(schema, config(2)).unwrap();
        let fv = FeatureVector::new(vec![
            Entry::one_hot(0, 5),
            Entry::one_hot(1, 5),
            Entry::one_hot(2, 6),
        ])
        .unwrap();
        let grad = m.gradient(&fv, 1).unwrap();
        assert_eq!(grad.linear.len(), 2);
        let g5 = grad.linear.iter().find(|(i, _)| *i == 5).unwrap().1;
        assert!((g5 - 2.0 * grad.bias).abs() < 1e-15);
    }

    #[test]
    fn intercept_model_ignores_features() {
        let cfg = TrainConfig { kind: ModelKind::Intercept, ..config(4) };
        let mut m = FfmModel::new(two_field_schema(), cfg).unwrap();
        let fv = FeatureVector::new(vec![Entry::one_hot(0, 3), Entry::one_hot(1, 4)]).unwrap();
        m.update(&fv, 1).unwrap();
        assert_eq!(m.touched_linear(), 0);
        assert_eq!(m.touched_latent(), 0);
        assert_eq!(m.predict_logit(&fv).unwrap(), m.bias());
        assert_eq!(m.prediction_flops(2), 4);
    }

    #[test]
    fn snapshot_is_send_and_sync() {
        fn assert_send_sync<T: Send + Sync>() {}
        assert_send_sync::<ModelSnapshot>();
    }
}
