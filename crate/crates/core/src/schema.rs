//! Field schemas and sparse feature vectors.
//!
//! Every model input is a [`FeatureVector`]: a sorted list of
//! `(field, hashed index, value)` entries validated against a
//! [`FieldSchema`]. The schema's [`FieldKind`] tags are what split a
//! vector into the context part (seen by the auxiliary model) and the
//! item part (seen only by the main model).

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Name of the field that carries the bucketized context-CTR prediction.
pub const DERIVED_FIELD_NAME: &str = "ctx_ctr";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FieldKind {
    Context,
    Item,
    Derived,
}

impl fmt::Display for FieldKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FieldKind::Context => "context",
            FieldKind::Item => "item",
            FieldKind::Derived => "derived",
        })
    }
}

impl FromStr for FieldKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "context" => Ok(FieldKind::Context),
            "item" => Ok(FieldKind::Item),
            "derived" => Ok(FieldKind::Derived),
            other => Err(Error::Config(format!("unknown field kind `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldDef {
    pub field_id: u32,
    pub name: String,
    pub kind: FieldKind,
}

impl FieldDef {
    pub fn new(field_id: u32, name: impl Into<String>, kind: FieldKind) -> Self {
        Self {
            field_id,
            name: name.into(),
            kind,
        }
    }
}

/// Ordered field definitions with dense ids `0..F`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldSchema {
    fields: Vec<FieldDef>,
}

impl FieldSchema {
    pub fn new(fields: Vec<FieldDef>) -> Result<Self> {
        let mut names = HashSet::new();
        let mut derived = 0;
        for (pos, def) in fields.iter().enumerate() {
            if def.field_id as usize != pos {
                return Err(Error::Config(format!(
                    "field ids must be dense and ordered: position {pos} holds id {}",
                    def.field_id
                )));
            }
            if def.name.is_empty() {
                return Err(Error::Config(format!("field {pos} has an empty name")));
            }
            if !names.insert(def.name.as_str()) {
                return Err(Error::Config(format!("duplicate field name `{}`", def.name)));
            }
            if def.kind == FieldKind::Derived {
                derived += 1;
            }
        }
        if fields.is_empty() {
            return Err(Error::Config("schema has no fields".into()));
        }
        if derived > 1 {
            return Err(Error::Config(format!(
                "at most one derived field is allowed, found {derived}"
            )));
        }
        Ok(Self { fields })
    }

    /// Builds a schema from named context and item fields, in that order,
    /// optionally followed by the derived context-CTR field.
    pub fn from_names<S: AsRef<str>>(context: &[S], item: &[S], with_derived: bool) -> Result<Self> {
        let mut defs = Vec::with_capacity(context.len() + item.len() + 1);
        for name in context {
            defs.push(FieldDef::new(defs.len() as u32, name.as_ref(), FieldKind::Context));
        }
        for name in item {
            defs.push(FieldDef::new(defs.len() as u32, name.as_ref(), FieldKind::Item));
        }
        if with_derived {
            defs.push(FieldDef::new(defs.len() as u32, DERIVED_FIELD_NAME, FieldKind::Derived));
        }
        Self::new(defs)
    }

    /// Checks the extra requirements on a main-model schema.
    pub fn validate_main(&self) -> Result<()> {
        if self.ids_of_kind(FieldKind::Context).is_empty() {
            return Err(Error::Config("main schema needs at least one context field".into()));
        }
        if self.ids_of_kind(FieldKind::Item).is_empty() {
            return Err(Error::Config("main schema needs at least one item field".into()));
        }
        Ok(())
    }

    pub fn fields(&self) -> &[FieldDef] {
        &self.fields
    }

    pub fn len(&self) -> usize {
        self.fields.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fields.is_empty()
    }

    pub fn get(&self, field_id: u32) -> Option<&FieldDef> {
        self.fields.get(field_id as usize)
    }

    pub fn kind(&self, field_id: u32) -> Option<FieldKind> {
        self.get(field_id).map(|d| d.kind)
    }

    pub fn by_name(&self, name: &str) -> Option<&FieldDef> {
        self.fields.iter().find(|d| d.name == name)
    }

    pub fn ids_of_kind(&self, kind: FieldKind) -> Vec<u32> {
        self.fields
            .iter()
            .filter(|d| d.kind == kind)
            .map(|d| d.field_id)
            .collect()
    }

    pub fn derived_field(&self) -> Option<u32> {
        self.ids_of_kind(FieldKind::Derived).first().copied()
    }

    pub fn is_context_only(&self) -> bool {
        self.fields.iter().all(|d| d.kind == FieldKind::Context)
    }
}

/// One active feature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Entry {
    pub field: u32,
    pub index: u32,
    pub value: f64,
}

impl Entry {
    pub fn new(field: u32, index: u32, value: f64) -> Self {
        Self { field, index, value }
    }

    /// An indicator feature (value 1.0).
    pub fn one_hot(field: u32, index: u32) -> Self {
        Self::new(field, index, 1.0)
    }
}

/// Sparse input, sorted by `(field, index)` with no duplicate pairs.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FeatureVector {
    entries: Vec<Entry>,
}

impl FeatureVector {
    /// Sorts the entries and rejects duplicates and non-finite values.
    pub fn new(mut entries: Vec<Entry>) -> Result<Self> {
        if let Some(bad) = entries.iter().find(|e| !e.value.is_finite()) {
            return Err(Error::Input(format!(
                "non-finite value {} for feature ({}, {})",
                bad.value, bad.field, bad.index
            )));
        }
        entries.sort_by_key(|e| (e.field, e.index));
        if let Some(w) = entries
            .windows(2)
            .find(|w| (w[0].field, w[0].index) == (w[1].field, w[1].index))
        {
            return Err(Error::Input(format!(
                "duplicate feature ({}, {})",
                w[0].field, w[0].index
            )));
        }
        Ok(Self { entries })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn entries(&self) -> &[Entry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn contains_field(&self, field: u32) -> bool {
        self.entries.iter().any(|e| e.field == field)
    }

    /// Fails with a schema mismatch if any entry names a field the schema lacks.
    pub fn validate(&self, schema: &FieldSchema) -> Result<()> {
        match self.entries.iter().find(|e| schema.get(e.field).is_none()) {
            Some(e) => Err(Error::SchemaMismatch(format!(
                "field id {} is not in the schema ({} fields)",
                e.field,
                schema.len()
            ))),
            None => Ok(()),
        }
    }

    /// Builds a vector from entries that are already sorted and unique.
    pub(crate) fn from_sorted(entries: Vec<Entry>) -> Self {
        debug_assert!(entries
            .windows(2)
            .all(|w| (w[0].field, w[0].index) < (w[1].field, w[1].index)));
        Self { entries }
    }
}
