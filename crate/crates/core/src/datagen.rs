//! Synthetic impression logs with planted effects, the JSONL log format,
//! and hashing of string features into model inputs.
//!
//! Ground truth for a context `c` and item `i`:
//!
//! ```text
//! logit = mu + sum_f a_f(c_f) + sum_g b_g(i_g) + beta_int * <u(c), v(i)>
//! ```
//!
//! `a_f`, `b_g` are per-value effects drawn from `N(0, beta_ctx^2)` and
//! `N(0, beta_item^2)`. Every field value also owns a random unit 4-vector;
//! `u(c)` and `v(i)` are the normalized sums of those vectors over the
//! context and item fields. `mu` is found by bisection so that the mean
//! click probability over a pilot sample matches the requested base CTR.

use std::collections::BTreeMap;
use std::hash::Hasher;
use std::io::{BufRead, Write};

use fnv::FnvHasher;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::sigmoid;
use crate::schema::{Entry, FeatureVector, FieldKind, FieldSchema};

pub const INTERACTION_DIM: usize = 4;
pub const PILOT_SAMPLES: usize = 10_000;
pub const CALIBRATION_TOLERANCE: f64 = 0.005;
pub const MAX_BISECTION_STEPS: usize = 100;

const BASE_TS_MS: i64 = 1_700_000_000_000;
const REQUEST_SPACING_MS: i64 = 250;
const PILOT_SALT: u64 = 0x5eed_0f_9170_7a11;

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticConfig {
    pub n_context_fields: usize,
    pub n_item_fields: usize,
    pub cardinality: usize,
    pub beta_ctx: f64,
    pub beta_item: f64,
    pub beta_int: f64,
    pub base_ctr: f64,
    pub n_requests: usize,
    pub candidates_per_request: usize,
    pub seed: u64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        Self {
            n_context_fields: 4,
            n_item_fields: 4,
            cardinality: 1000,
            beta_ctx: 0.8,
            beta_item: 0.8,
            beta_int: 0.3,
            base_ctr: 0.2,
            n_requests: 200_000,
            candidates_per_request: 4,
            seed: 1,
        }
    }
}

impl SyntheticConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if self.n_context_fields == 0 || self.n_item_fields == 0 {
            return bad("field counts must be positive");
        }
        if self.cardinality == 0 {
            return bad("cardinality must be positive");
        }
        if self.n_requests == 0 || self.candidates_per_request == 0 {
            return bad("n_requests and candidates_per_request must be positive");
        }
        for b in [self.beta_ctx, self.beta_item, self.beta_int] {
            if !(b.is_finite() && b >= 0.0) {
                return bad("effect strengths must be finite and >= 0");
            }
        }
        if !(self.base_ctr > 0.0 && self.base_ctr < 1.0) {
            return bad("base_ctr must lie strictly inside (0, 1)");
        }
        Ok(())
    }

    pub fn context_field_names(&self) -> Vec<String> {
        (0..self.n_context_fields).map(|f| format!("ctx_{f}")).collect()
    }

    pub fn item_field_names(&self) -> Vec<String> {
        (0..self.n_item_fields).map(|f| format!("item_{f}")).collect()
    }

    /// Main-model schema for the generated logs, derived field included.
    pub fn schema(&self) -> Result<FieldSchema> {
        FieldSchema::from_names(&self.context_field_names(), &self.item_field_names(), true)
    }
}

pub type FieldValues = BTreeMap<String, String>;

/// One logged impression, as stored in the JSONL log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImpressionRecord {
    pub ts: i64,
    pub request_id: String,
    pub context: FieldValues,
    pub item: FieldValues,
    pub click: u8,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub true_p: Option<f64>,
}

/// One context and the candidates scored for it.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoringRequest {
    pub request_id: String,
    pub context: FieldValues,
    pub candidates: Vec<FieldValues>,
}

impl ScoringRequest {
    /// Groups consecutive records with the same request id.
    pub fn from_records(records: &[ImpressionRecord]) -> Vec<ScoringRequest> {
        let mut out: Vec<ScoringRequest> = Vec::new();
        for r in records {
            match out.last_mut() {
                Some(last) if last.request_id == r.request_id => last.candidates.push(r.item.clone()),
                _ => out.push(ScoringRequest {
                    request_id: r.request_id.clone(),
                    context: r.context.clone(),
                    candidates: vec![r.item.clone()],
                }),
            }
        }
        out
    }
}

/// Per-value effects of one field.
#[derive(Debug, Clone)]
struct FieldEffects {
    additive: Vec<f64>,
    direction: Vec<[f64; INTERACTION_DIM]>,
}

impl FieldEffects {
    fn draw(rng: &mut ChaCha8Rng, cardinality: usize, std_dev: f64) -> Self {
        let normal = Normal::new(0.0, std_dev).expect("std dev is finite and >= 0");
        let additive = (0..cardinality).map(|_| normal.sample(rng)).collect();
        let direction = (0..cardinality).map(|_| unit_vector(rng)).collect();
        Self { additive, direction }
    }
}

fn unit_vector(rng: &mut ChaCha8Rng) -> [f64; INTERACTION_DIM] {
    loop {
        let mut v = [0.0; INTERACTION_DIM];
        for x in v.iter_mut() {
            *x = StandardNormal.sample(rng);
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-12 {
            return v.map(|x| x / norm);
        }
    }
}

fn normalized_sum<'a>(vs: impl Iterator<Item = &'a [f64; INTERACTION_DIM]>) -> [f64; INTERACTION_DIM] {
    let mut acc = [0.0; INTERACTION_DIM];
    for v in vs {
        for (a, x) in acc.iter_mut().zip(v) {
            *a += x;
        }
    }
    let norm = acc.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 1e-12 {
        acc.map(|x| x / norm)
    } else {
        [0.0; INTERACTION_DIM]
    }
}

/// A drawn ground-truth model plus its calibrated intercept.
#[derive(Debug, Clone)]
pub struct SyntheticWorld {
    config: SyntheticConfig,
    context: Vec<FieldEffects>,
    item: Vec<FieldEffects>,
    intercept: f64,
}

impl SyntheticWorld {
    pub fn new(config: SyntheticConfig) -> Result<Self> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let context = (0..config.n_context_fields)
            .map(|_| FieldEffects::draw(&mut rng, config.cardinality, config.beta_ctx))
            .collect();
        let item = (0..config.n_item_fields)
            .map(|_| FieldEffects::draw(&mut rng, config.cardinality, config.beta_item))
            .collect();
        let mut world = Self {
            config,
            context,
            item,
            intercept: 0.0,
        };
        world.intercept = world.calibrate()?;
        Ok(world)
    }

    pub fn config(&self) -> &SyntheticConfig {
        &self.config
    }

    pub fn intercept(&self) -> f64 {
        self.intercept
    }

    fn draw_values(&self, rng: &mut ChaCha8Rng, n_fields: usize) -> Vec<usize> {
        (0..n_fields)
            .map(|_| rng.random_range(0..self.config.cardinality))
            .collect()
    }

    /// Planted logit without the intercept.
    pub fn effect(&self, ctx: &[usize], item: &[usize]) -> f64 {
        let a: f64 = ctx.iter().zip(&self.context).map(|(&v, f)| f.additive[v]).sum();
        let b: f64 = item.iter().zip(&self.item).map(|(&v, f)| f.additive[v]).sum();
        let mut logit = a + b;
        if self.config.beta_int > 0.0 {
            let u = normalized_sum(ctx.iter().zip(&self.context).map(|(&v, f)| &f.direction[v]));
            let w = normalized_sum(item.iter().zip(&self.item).map(|(&v, f)| &f.direction[v]));
            let dot: f64 = u.iter().zip(&w).map(|(x, y)| x * y).sum();
            logit += self.config.beta_int * dot;
        }
        logit
    }

    pub fn click_probability(&self, ctx: &[usize], item: &[usize]) -> f64 {
        sigmoid(self.intercept + self.effect(ctx, item))
    }

    fn calibrate(&self) -> Result<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.config.seed ^ PILOT_SALT);
        let pilot: Vec<f64> = (0..PILOT_SAMPLES)
            .map(|_| {
                let c = self.draw_values(&mut rng, self.config.n_context_fields);
                let i = self.draw_values(&mut rng, self.config.n_item_fields);
                self.effect(&c, &i)
            })
            .collect();
        let mean_p = |mu: f64| pilot.iter().map(|l| sigmoid(mu + l)).sum::<f64>() / pilot.len() as f64;
        let target = self.config.base_ctr;
        let (mut lo, mut hi) = (-40.0, 40.0);
        let mut mu = 0.0;
        for _ in 0..MAX_BISECTION_STEPS {
            mu = 0.5 * (lo + hi);
            let m = mean_p(mu);
            if (m - target).abs() < 1e-12 {
                break;
            }
            if m < target {
                lo = mu;
            } else {
                hi = mu;
            }
        }
        let achieved = mean_p(mu);
        if (achieved - target).abs() > CALIBRATION_TOLERANCE {
            return Err(Error::Generation(format!(
                "intercept calibration reached mean CTR {achieved:.6}, target {target}"
            )));
        }
        Ok(mu)
    }

    /// Iterator over the generated requests, one `Vec` of impressions each.
    pub fn requests(&self) -> RequestStream<'_> {
        RequestStream {
            world: self,
            rng: ChaCha8Rng::seed_from_u64(self.config.seed.wrapping_add(1)),
            next: 0,
            ctx_names: self.config.context_field_names(),
            item_names: self.config.item_field_names(),
        }
    }

    pub fn records(&self) -> impl Iterator<Item = ImpressionRecord> + '_ {
        self.requests().flatten()
    }
}

pub struct RequestStream<'a> {
    world: &'a SyntheticWorld,
    rng: ChaCha8Rng,
    next: usize,
    ctx_names: Vec<String>,
    item_names: Vec<String>,
}

fn value_name(v: usize) -> String {
    format!("v{v}")
}

impl Iterator for RequestStream<'_> {
    type Item = Vec<ImpressionRecord>;

    fn next(&mut self) -> Option<Self::Item> {
        let cfg = &self.world.config;
        if self.next >= cfg.n_requests {
            return None;
        }
        let r = self.next;
        self.next += 1;
        let ts = BASE_TS_MS + r as i64 * REQUEST_SPACING_MS;
        let request_id = format!("r{r:08}");
        let ctx = self.world.draw_values(&mut self.rng, cfg.n_context_fields);
        let context: FieldValues = self
            .ctx_names
            .iter()
            .zip(&ctx)
            .map(|(n, &v)| (n.clone(), value_name(v)))
            .collect();
        let mut out = Vec::with_capacity(cfg.candidates_per_request);
        for _ in 0..cfg.candidates_per_request {
            let item = self.world.draw_values(&mut self.rng, cfg.n_item_fields);
            let p = self.world.click_probability(&ctx, &item);
            let click = u8::from(self.rng.random::<f64>() < p);
            out.push(ImpressionRecord {
                ts,
                request_id: request_id.clone(),
                context: context.clone(),
                item: self
                    .item_names
                    .iter()
                    .zip(&item)
                    .map(|(n, &v)| (n.clone(), value_name(v)))
                    .collect(),
                click,
                true_p: Some(p),
            });
        }
        Some(out)
    }
}

/// Generates the whole log in memory.
pub fn generate(config: SyntheticConfig) -> Result<Vec<ImpressionRecord>> {
    Ok(SyntheticWorld::new(config)?.records().collect())
}

/// FNV-1a 64 of `field ‖ 0x1F ‖ value`, reduced to `hash_bits` bits.
pub fn feature_index(field: &str, value: &str, hash_bits: u32) -> u32 {
    let mut h = FnvHasher::default();
    h.write(field.as_bytes());
    h.write(&[0x1f]);
    h.write(value.as_bytes());
    (h.finish() & ((1u64 << hash_bits) - 1)) as u32
}

fn push_fields(
    out: &mut Vec<Entry>,
    values: &FieldValues,
    schema: &FieldSchema,
    kind: FieldKind,
    hash_bits: u32,
) -> Result<()> {
    for (name, value) in values {
        let def = schema
            .by_name(name)
            .ok_or_else(|| Error::SchemaMismatch(format!("unknown field `{name}`")))?;
        if def.kind != kind {
            return Err(Error::SchemaMismatch(format!(
                "field `{name}` is {} in the schema but appears as {kind}",
                def.kind
            )));
        }
        out.push(Entry::one_hot(def.field_id, feature_index(name, value, hash_bits)));
    }
    Ok(())
}

pub fn vectorize_context(context: &FieldValues, schema: &FieldSchema, hash_bits: u32) -> Result<FeatureVector> {
    let mut entries = Vec::with_capacity(context.len());
    push_fields(&mut entries, context, schema, FieldKind::Context, hash_bits)?;
    FeatureVector::new(entries)
}

pub fn vectorize_item(item: &FieldValues, schema: &FieldSchema, hash_bits: u32) -> Result<FeatureVector> {
    let mut entries = Vec::with_capacity(item.len());
    push_fields(&mut entries, item, schema, FieldKind::Item, hash_bits)?;
    FeatureVector::new(entries)
}

/// Full main-model input of one impression.
pub fn vectorize(record: &ImpressionRecord, schema: &FieldSchema, hash_bits: u32) -> Result<FeatureVector> {
    let mut entries = Vec::with_capacity(record.context.len() + record.item.len());
    push_fields(&mut entries, &record.context, schema, FieldKind::Context, hash_bits)?;
    push_fields(&mut entries, &record.item, schema, FieldKind::Item, hash_bits)?;
    FeatureVector::new(entries)
}

/// Union of two vectors over disjoint fields.
pub fn concat(a: &FeatureVector, b: &FeatureVector) -> Result<FeatureVector> {
    let mut entries = Vec::with_capacity(a.len() + b.len());
    entries.extend_from_slice(a.entries());
    entries.extend_from_slice(b.entries());
    FeatureVector::new(entries)
}

/// A request after hashing: one shared context, labeled candidates.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodedRequest {
    pub request_id: String,
    pub ts: i64,
    pub context: FeatureVector,
    pub items: Vec<FeatureVector>,
    pub clicks: Vec<u8>,
}

impl EncodedRequest {
    pub fn encode(records: &[ImpressionRecord], schema: &FieldSchema, hash_bits: u32) -> Result<Self> {
        let first = records
            .first()
            .ok_or_else(|| Error::Input("cannot encode an empty request".into()))?;
        if let Some(r) = records.iter().find(|r| r.context != first.context) {
            return Err(Error::Input(format!(
                "request `{}` has impressions with differing contexts",
                r.request_id
            )));
        }
        Ok(Self {
            request_id: first.request_id.clone(),
            ts: first.ts,
            context: vectorize_context(&first.context, schema, hash_bits)?,
            items: records
                .iter()
                .map(|r| vectorize_item(&r.item, schema, hash_bits))
                .collect::<Result<_>>()?,
            clicks: records.iter().map(|r| r.click).collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }
}

/// Groups a record stream into requests (consecutive equal request ids)
/// and hashes them.
pub fn encode_stream<I>(records: I, schema: &FieldSchema, hash_bits: u32) -> Result<Vec<EncodedRequest>>
where
    I: IntoIterator<Item = Result<ImpressionRecord>>,
{
    let mut out = Vec::new();
    let mut pending: Vec<ImpressionRecord> = Vec::new();
    for record in records {
        let record = record?;
        if pending.last().is_some_and(|p| p.request_id != record.request_id) {
            out.push(EncodedRequest::encode(&pending, schema, hash_bits)?);
            pending.clear();
        }
        pending.push(record);
    }
    if !pending.is_empty() {
        out.push(EncodedRequest::encode(&pending, schema, hash_bits)?);
    }
    Ok(out)
}

/// Schema implied by a record's field names (sorted, context first).
pub fn schema_for_record(record: &ImpressionRecord) -> Result<FieldSchema> {
    let ctx: Vec<&String> = record.context.keys().collect();
    let item: Vec<&String> = record.item.keys().collect();
    FieldSchema::from_names(&ctx, &item, true)
}

pub fn write_record<W: Write>(record: &ImpressionRecord, out: &mut W) -> Result<()> {
    serde_json::to_writer(&mut *out, record).map_err(std::io::Error::from)?;
    out.write_all(b"\n")?;
    Ok(())
}

pub fn write_log<'a, W, I>(records: I, mut out: W) -> Result<usize>
where
    W: Write,
    I: IntoIterator<Item = &'a ImpressionRecord>,
{
    let mut n = 0;
    for r in records {
        write_record(r, &mut out)?;
        n += 1;
    }
    out.flush()?;
    Ok(n)
}

/// Streaming JSONL reader with timestamp-order checking.
pub struct LogReader<R> {
    lines: std::io::Lines<R>,
    line_no: usize,
    last_ts: Option<i64>,
    strict: bool,
    failed: bool,
}

impl<R: BufRead> LogReader<R> {
    pub fn new(input: R, strict: bool) -> Self {
        Self {
            lines: input.lines(),
            line_no: 0,
            last_ts: None,
            strict,
            failed: false,
        }
    }
}

pub fn parse_record(line: &str, line_no: usize) -> Result<ImpressionRecord> {
    let record: ImpressionRecord = serde_json::from_str(line).map_err(|e| Error::Parse {
        line: line_no,
        message: e.to_string(),
    })?;
    if record.click > 1 {
        return Err(Error::Parse {
            line: line_no,
            message: format!("click must be 0 or 1, got {}", record.click),
        });
    }
    if let Some(p) = record.true_p {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Parse {
                line: line_no,
                message: format!("true_p {p} is not a probability"),
            });
        }
    }
    Ok(record)
}

impl<R: BufRead> Iterator for LogReader<R> {
    type Item = Result<ImpressionRecord>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.failed {
            return None;
        }
        loop {
            let line = match self.lines.next()? {
                Ok(l) => l,
                Err(e) => {
                    self.failed = true;
                    return Some(Err(e.into()));
                }
            };
            self.line_no += 1;
            if line.trim().is_empty() {
                continue;
            }
            let record = match parse_record(&line, self.line_no) {
                Ok(r) => r,
                Err(e) => {
                    self.failed = true;
                    return Some(Err(e));
                }
            };
            if let Some(prev) = self.last_ts {
                if record.ts < prev {
                    if self.strict {
                        self.failed = true;
                        return Some(Err(Error::TimestampOrder {
                            line: self.line_no,
                            ts: record.ts,
                            previous: prev,
                        }));
                    }
                    log::warn!("line {}: ts {} is earlier than {}", self.line_no, record.ts, prev);
                }
            }
            self.last_ts = Some(self.last_ts.map_or(record.ts, |p| p.max(record.ts)));
            return Some(Ok(record));
        }
    }
}

pub fn read_log<R: BufRead>(input: R, strict: bool) -> Result<Vec<ImpressionRecord>> {
    LogReader::new(input, strict).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(seed: u64) -> SyntheticConfig {
        SyntheticConfig {
            n_requests: 500,
            cardinality: 20,
            seed,
            ..SyntheticConfig::default()
        }
    }

    #[test]
    fn fnv_golden_value() {
        // FNV-1a 64 of b"geo\x1fUS" is 0x5057176c0bf70a7f, masked to 18 bits
        assert_eq!(feature_index("geo", "US", 18), 0x30a7f);
        assert_eq!(feature_index("geo", "US", 18), feature_index("geo", "US", 18));
        assert_ne!(feature_index("ab", "c", 30), feature_index("a", "bc", 30));
    }

    #[test]
    fn small_hash_space_collides_silently() {
        let mut seen = std::collections::HashSet::new();
        for v in 0..10_000 {
            seen.insert(feature_index("f", &v.to_string(), 8));
        }
        assert!(seen.len() <= 256);
    }

    #[test]
    fn no_effects_means_constant_probability() {
        let cfg = SyntheticConfig {
            beta_ctx: 0.0,
            beta_item: 0.0,
            beta_int: 0.0,
            ..small(3)
        };
        for r in generate(cfg).unwrap() {
            let p = r.true_p.unwrap();
            assert!((p - 0.2).abs() <= CALIBRATION_TOLERANCE, "{p}");
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let a = generate(small(7)).unwrap();
        let b = generate(small(7)).unwrap();
        let c = generate(small(8)).unwrap();
        let mut ba = Vec::new();
        let mut bb = Vec::new();
        write_log(&a, &mut ba).unwrap();
        write_log(&b, &mut bb).unwrap();
        assert_eq!(ba, bb);
        assert_ne!(a, c);
    }

    #[test]
    fn requests_share_context_and_size() {
        let recs = generate(small(2)).unwrap();
        assert_eq!(recs.len(), 500 * 4);
        let reqs = ScoringRequest::from_records(&recs);
        assert_eq!(reqs.len(), 500);
        for (chunk, req) in recs.chunks(4).zip(&reqs) {
            assert!(chunk.iter().all(|r| r.request_id == req.request_id && r.context == req.context));
            assert_eq!(req.candidates.len(), 4);
        }
        assert!(recs.windows(2).all(|w| w[0].ts <= w[1].ts));
    }

    #[test]
    fn log_round_trip_and_errors() {
        let recs = generate(small(5)).unwrap();
        let mut buf = Vec::new();
        write_log(&recs[..10], &mut buf).unwrap();
        let back = read_log(buf.as_slice(), true).unwrap();
        assert_eq!(back, recs[..10]);
        assert!(read_log("".as_bytes(), true).unwrap().is_empty());

        let mut lines: Vec<String> = String::from_utf8(buf).unwrap().lines().map(String::from).collect();
        lines[3] = lines[3].replace("\"click\":0", "\"click\":2").replace("\"click\":1", "\"click\":2");
        let err = read_log(lines.join("\n").as_bytes(), false).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 4, .. }), "{err}");

        let extra = r#"{"ts":1,"request_id":"a","context":{},"item":{},"click":0,"bogus":1}"#;
        assert!(matches!(read_log(extra.as_bytes(), false), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn timestamp_order_is_checked_in_strict_mode() {
        let line = |ts: i64| format!(r#"{{"ts":{ts},"request_id":"r","context":{{}},"item":{{}},"click":0}}"#);
        let text = [line(5), line(3)].join("\n");
        assert!(matches!(
            read_log(text.as_bytes(), true),
            Err(Error::TimestampOrder { line: 2, ts: 3, previous: 5 })
        ));
        assert_eq!(read_log(text.as_bytes(), false).unwrap().len(), 2);
    }

    #[test]
    fn vectorize_rejects_unknown_fields() {
        let cfg = small(1);
        let schema = cfg.schema().unwrap();
        let recs = generate(cfg).unwrap();
        let fv = vectorize(&recs[0], &schema, 18).unwrap();
        assert_eq!(fv.len(), 8);
        let mut bad = recs[0].clone();
        bad.context.insert("nope".into(), "x".into());
        assert!(matches!(vectorize(&bad, &schema, 18), Err(Error::SchemaMismatch(_))));
        let mut swapped = recs[0].clone();
        let v = swapped.item.remove("item_0").unwrap();
        swapped.context.insert("item_0".into(), v);
        assert!(matches!(vectorize(&swapped, &schema, 18), Err(Error::SchemaMismatch(_))));
    }

    #[test]
    fn encode_stream_groups_requests() {
        let cfg = SyntheticConfig { candidates_per_request: 3, ..small(4) };
        let schema = cfg.schema().unwrap();
        let recs = generate(cfg).unwrap();
        let enc = encode_stream(recs.iter().cloned().map(Ok), &schema, 18).unwrap();
        assert_eq!(enc.len(), 500);
        assert!(enc.iter().all(|r| r.len() == 3 && r.context.len() == 4));
        assert_eq!(schema_for_record(&recs[0]).unwrap(), schema);
    }
}
