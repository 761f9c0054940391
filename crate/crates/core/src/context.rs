//! The auxiliary context model's boundary: projecting impressions onto
//! context fields, turning its probability into a categorical feature, and
//! injecting that feature into the main model's input.

use std::collections::BTreeSet;
use std::fmt;

use crate::error::{Error, Result};
use crate::model::FfmModel;
use crate::schema::{Entry, FeatureVector, FieldKind, FieldSchema};

pub const DEFAULT_BUCKETS: usize = 32;

/// Maps main-schema field ids onto the context model's own schema.
#[derive(Debug, Clone, PartialEq)]
pub struct ContextProjection {
    context_field_ids: Vec<u32>,
    remap: Vec<Option<u32>>,
    context_schema: FieldSchema,
}

impl ContextProjection {
    /// Collects every context-kind field of `schema`.
    pub fn from_schema(schema: &FieldSchema) -> Result<Self> {
        let ids = schema.ids_of_kind(FieldKind::Context);
        Self::with_fields(schema, &ids)
    }

    pub fn with_fields(schema: &FieldSchema, ids: &[u32]) -> Result<Self> {
        let ids: Vec<u32> = ids.iter().copied().collect::<BTreeSet<_>>().into_iter().collect();
        if ids.is_empty() {
            return Err(Error::Config("context projection needs at least one field".into()));
        }
        let mut remap = vec![None; schema.len()];
        let mut names = Vec::with_capacity(ids.len());
        for (pos, &id) in ids.iter().enumerate() {
            match schema.get(id) {
                Some(def) if def.kind == FieldKind::Context => {
                    remap[id as usize] = Some(pos as u32);
                    names.push(def.name.clone());
                }
                Some(def) => {
                    return Err(Error::Config(format!(
                        "field `{}` is {}, not context",
                        def.name, def.kind
                    )))
                }
                None => return Err(Error::SchemaMismatch(format!("unknown field id {id}"))),
            }
        }
        let context_schema = FieldSchema::from_names(&names, &[] as &[String], false)?;
        Ok(Self {
            context_field_ids: ids,
            remap,
            context_schema,
        })
    }

    pub fn context_field_ids(&self) -> &[u32] {
        &self.context_field_ids
    }

    /// The schema of the context model's inputs.
    pub fn context_schema(&self) -> &FieldSchema {
        &self.context_schema
    }

    /// Keeps the context entries of `fv`, renumbered into the context schema.
    pub fn project(&self, fv: &FeatureVector) -> FeatureVector {
        let entries = fv
            .entries()
            .iter()
            .filter_map(|e| {
                let id = self.remap.get(e.field as usize).copied().flatten()?;
                Some(Entry::new(id, e.index, e.value))
            })
            .collect();
        FeatureVector::from_sorted(entries)
    }
}

pub fn project_context(fv: &FeatureVector, proj: &ContextProjection) -> FeatureVector {
    proj.project(fv)
}

/// Predicts context CTR, refusing any input that is not purely contextual.
pub fn predict_context_ctr(ctx_model: &FfmModel, ctx_fv: &FeatureVector) -> Result<f64> {
    check_context_input(ctx_model, ctx_fv)?;
    ctx_model.predict_proba(ctx_fv)
}

pub(crate) fn check_context_input(ctx_model: &FfmModel, ctx_fv: &FeatureVector) -> Result<()> {
    let schema = ctx_model.schema();
    if !schema.is_context_only() {
        return Err(Error::ContractViolation(
            "context model schema contains non-context fields".into(),
        ));
    }
    for e in ctx_fv.entries() {
        if schema.kind(e.field) != Some(FieldKind::Context) {
            return Err(Error::ContractViolation(format!(
                "context model input has non-context field id {}",
                e.field
            )));
        }
    }
    Ok(())
}

/// Probability buckets with left-closed, right-open intervals.
#[derive(Debug, Clone, PartialEq)]
pub struct CtxBucketizer {
    edges: Vec<f64>,
}

impl CtxBucketizer {
    pub fn equal_width(num_buckets: usize) -> Result<Self> {
        if num_buckets == 0 {
            return Err(Error::Config("number of buckets must be positive".into()));
        }
        let b = num_buckets as f64;
        Self::with_edges((1..num_buckets).map(|i| i as f64 / b).collect())
    }

    pub fn with_edges(edges: Vec<f64>) -> Result<Self> {
        if edges.iter().any(|e| !(*e > 0.0 && *e < 1.0)) {
            return Err(Error::Config("bucket edges must lie in (0, 1)".into()));
        }
        if edges.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config("bucket edges must be strictly increasing".into()));
        }
        Ok(Self { edges })
    }

    pub fn num_buckets(&self) -> usize {
        self.edges.len() + 1
    }

    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    /// Number of edges `<= p`.
    pub fn bucket_index(&self, p: f64) -> Result<u32> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::Input(format!("probability {p} is outside (0, 1)")));
        }
        Ok(self.edges.partition_point(|&e| e <= p) as u32)
    }
}

impl Default for CtxBucketizer {
    fn default() -> Self {
        Self::equal_width(DEFAULT_BUCKETS).expect("default bucket count is valid")
    }
}

/// The context prediction expressed as a one-hot feature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedCtxFeature {
    pub field_id: u32,
    pub bucket_index: u32,
    pub raw_p: f64,
}

pub fn bucketize(p: f64, bucketizer: &CtxBucketizer, field_id: u32) -> Result<DerivedCtxFeature> {
    Ok(DerivedCtxFeature {
        field_id,
        bucket_index: bucketizer.bucket_index(p)?,
        raw_p: p,
    })
}

/// How the derived feature enters the main model.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum IntegrationMode {
    /// No derived feature.
    Baseline,
    /// Drop the listed context fields and add the derived feature.
    Replace(BTreeSet<u32>),
    /// Add the derived feature alongside everything else.
    Add,
}

impl IntegrationMode {
    pub fn name(&self) -> &'static str {
        match self {
            IntegrationMode::Baseline => "baseline",
            IntegrationMode::Replace(_) => "replace",
            IntegrationMode::Add => "add",
        }
    }

    /// `Replace` over every context field of `schema`.
    pub fn replace_all(schema: &FieldSchema) -> Self {
        IntegrationMode::Replace(schema.ids_of_kind(FieldKind::Context).into_iter().collect())
    }

    pub fn uses_context(&self) -> bool {
        !matches!(self, IntegrationMode::Baseline)
    }

    pub fn validate(&self, schema: &FieldSchema) -> Result<()> {
        if self.uses_context() && schema.derived_field().is_none() {
            return Err(Error::Config(format!(
                "mode `{}` needs a derived field in the schema",
                self.name()
            )));
        }
        if let IntegrationMode::Replace(ids) = self {
            if ids.is_empty() {
                return Err(Error::Config("replace set is empty".into()));
            }
            for id in ids {
                if schema.kind(*id) != Some(FieldKind::Context) {
                    return Err(Error::Config(format!(
                        "replace set contains non-context field id {id}"
                    )));
                }
            }
        }
        Ok(())
    }
}

impl fmt::Display for IntegrationMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Applies an integration mode to a main-model feature vector.
pub fn augment(
    fv: &FeatureVector,
    derived: &DerivedCtxFeature,
    mode: &IntegrationMode,
) -> Result<FeatureVector> {
    if fv.contains_field(derived.field_id) {
        return Err(Error::DoubleAugmentation {
            field_id: derived.field_id,
        });
    }
    let derived_entry = Entry::one_hot(derived.field_id, derived.bucket_index);
    match mode {
        IntegrationMode::Baseline => Ok(fv.clone()),
        IntegrationMode::Replace(drop) => {
            let mut entries: Vec<Entry> = fv
                .entries()
                .iter()
                .filter(|e| !drop.contains(&e.field))
                .copied()
                .collect();
            entries.push(derived_entry);
            FeatureVector::new(entries)
        }
        IntegrationMode::Add => {
            let mut entries = fv.entries().to_vec();
            entries.push(derived_entry);
            FeatureVector::new(entries)
        }
    }
}
