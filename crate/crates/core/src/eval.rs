//! Metric kernels: log-loss, relative information gain, lifts and AUC.
//!
//! RIG is one minus the mean log-loss divided by the entropy of the
//! evaluation slice's own click rate `gamma`:
//!
//! ```text
//! RIG = 1 - mean(-c ln p - (1-c) ln(1-p)) / (-gamma ln gamma - (1-gamma) ln(1-gamma))
//! ```
//!
//! Natural logs throughout; predictions are expected to be clipped already.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::log_loss;

pub use crate::flops::flops_change;

/// Compensated (Neumaier) running sum.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.comp
    }

    fn merge(&mut self, other: &KahanSum) {
        self.add(other.sum);
        self.add(other.comp);
    }
}

/// Streaming log-loss aggregate. Optionally keeps every `(prediction,
/// label)` pair for AUC.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MetricsAccumulator {
    n: u64,
    clicks: u64,
    loss: KahanSum,
    scores: Option<Vec<(f64, u8)>>,
}

impl MetricsAccumulator {
    pub fn new() -> Self {
        Self::default()
    }

    /// An accumulator that also retains predictions for AUC.
    pub fn with_scores() -> Self {
        Self {
            scores: Some(Vec::new()),
            ..Self::default()
        }
    }

    pub fn push(&mut self, label: u8, p: f64) {
        debug_assert!(label <= 1);
        self.n += 1;
        self.clicks += u64::from(label);
        self.loss.add(log_loss(label, p));
        if let Some(s) = self.scores.as_mut() {
            s.push((p, label));
        }
    }

    /// Folds a disjoint shard into this accumulator.
    pub fn merge(&mut self, other: &MetricsAccumulator) {
        self.n += other.n;
        self.clicks += other.clicks;
        self.loss.merge(&other.loss);
        match (self.scores.as_mut(), other.scores.as_ref()) {
            (Some(a), Some(b)) => a.extend_from_slice(b),
            (Some(_), None) => self.scores = None,
            _ => {}
        }
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn clicks(&self) -> u64 {
        self.clicks
    }

    pub fn sum_loss(&self) -> f64 {
        self.loss.value()
    }

    pub fn scores(&self) -> Option<&[(f64, u8)]> {
        self.scores.as_deref()
    }

    pub fn gamma(&self) -> Option<f64> {
        (self.n > 0).then(|| self.clicks as f64 / self.n as f64)
    }

    pub fn mean_log_loss(&self) -> Option<f64> {
        (self.n > 0).then(|| self.sum_loss() / self.n as f64)
    }
}

/// Binary entropy in nats.
pub fn entropy(gamma: f64) -> Result<f64> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::UndefinedEntropy { gamma });
    }
    Ok(-gamma * gamma.ln() - (1.0 - gamma) * (1.0 - gamma).ln())
}

pub fn rig(acc: &MetricsAccumulator) -> Result<f64> {
    let gamma = acc.gamma().ok_or(Error::UndefinedEntropy { gamma: f64::NAN })?;
    let h = entropy(gamma)?;
    Ok(1.0 - acc.sum_loss() / acc.n as f64 / h)
}

/// A lift expressed both ways.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Lift {
    /// Relative change in percent, or the percentage-point change when
    /// `flagged` is set.
    pub pct: f64,
    /// Absolute change in percentage points.
    pub pp: f64,
    /// The baseline was zero so `pct` fell back to percentage points.
    pub flagged: bool,
}

pub fn rig_lift(variant: f64, baseline: f64) -> Lift {
    let pp = 100.0 * (variant - baseline);
    if baseline == 0.0 {
        Lift {
            pct: pp,
            pp,
            flagged: true,
        }
    } else {
        Lift {
            pct: 100.0 * (variant - baseline) / baseline.abs(),
            pp,
            flagged: false,
        }
    }
}

/// Probability that a random positive outranks a random negative, ties
/// counted as one half.
pub fn auc_of(scores: &[(f64, u8)]) -> Result<f64> {
    let positives = scores.iter().filter(|(_, l)| *l == 1).count() as u64;
    let negatives = scores.len() as u64 - positives;
    if positives == 0 || negatives == 0 {
        return Err(Error::UndefinedAuc { positives, negatives });
    }
    let mut sorted = scores.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut wins = 0.0;
    let mut neg_below = 0u64;
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i;
        let (mut pos, mut neg) = (0u64, 0u64);
        while j < sorted.len() && sorted[j].0 == sorted[i].0 {
            if sorted[j].1 == 1 {
                pos += 1;
            } else {
                neg += 1;
            }
            j += 1;
        }
        wins += pos as f64 * neg_below as f64 + 0.5 * pos as f64 * neg as f64;
        neg_below += neg;
        i = j;
    }
    Ok(wins / (positives as f64 * negatives as f64))
}

pub fn auc(acc: &MetricsAccumulator) -> Result<f64> {
    match acc.scores() {
        Some(s) => auc_of(s),
        None => Err(Error::Report("accumulator did not retain predictions".into())),
    }
}

/// Evaluation summary of one model variant.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsReport {
    pub mode: String,
    pub n: u64,
    pub gamma: f64,
    pub log_loss: f64,
    pub rig: f64,
    pub auc: Option<f64>,
    pub flops_per_ad: f64,
    pub flops_per_request: f64,
    pub rig_lift_pct: Option<f64>,
    pub rig_lift_pp: Option<f64>,
    pub flops_change_pct: Option<f64>,
    pub flops_per_request_change_pct: Option<f64>,
}

impl MetricsReport {
    pub fn from_accumulator(
        mode: &str,
        acc: &MetricsAccumulator,
        flops_per_ad: f64,
        flops_per_request: f64,
    ) -> Result<Self> {
        let gamma = acc.gamma().ok_or_else(|| Error::Report("no evaluated impressions".into()))?;
        Ok(Self {
            mode: mode.to_string(),
            n: acc.n(),
            gamma,
            log_loss: acc.mean_log_loss().unwrap_or(f64::NAN),
            rig: rig(acc)?,
            auc: auc(acc).ok(),
            flops_per_ad,
            flops_per_request,
            rig_lift_pct: None,
            rig_lift_pp: None,
            flops_change_pct: None,
            flops_per_request_change_pct: None,
        })
    }

    /// Fills the lift fields relative to `baseline`.
    pub fn with_lifts(mut self, baseline: &MetricsReport) -> Self {
        let lift = rig_lift(self.rig, baseline.rig);
        self.rig_lift_pct = Some(lift.pct);
        self.rig_lift_pp = Some(lift.pp);
        self.flops_change_pct = flops_change(self.flops_per_ad, baseline.flops_per_ad);
        self.flops_per_request_change_pct =
            flops_change(self.flops_per_request, baseline.flops_per_request);
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn acc_of(pairs: &[(u8, f64)]) -> MetricsAccumulator {
        let mut acc = MetricsAccumulator::with_scores();
        for &(l, p) in pairs {
            acc.push(l, p);
        }
        acc
    }

    #[test]
    fn constant_gamma_prediction_has_zero_rig() {
        let labels = [1, 0, 0, 0, 0, 1, 0, 0, 0, 0];
        let acc = acc_of(&labels.map(|l| (l, 0.2)));
        assert!(rig(&acc).unwrap().abs() < 1e-12);
    }

    #[test]
    fn hand_example() {
        let acc = acc_of(&[(1, 0.8), (0, 0.4)]);
        let mean_loss = acc.mean_log_loss().unwrap();
        assert!((mean_loss - 0.366985).abs() < 1e-6);
        // (0.223144 + 0.510826) / 2 / ln 2 = 0.529447
        assert!((rig(&acc).unwrap() - 0.470553).abs() < 1e-6);
    }

    #[test]
    fn degenerate_base_rate() {
        assert!(matches!(rig(&acc_of(&[(1, 0.9), (1, 0.8)])), Err(Error::UndefinedEntropy { .. })));
        assert!(matches!(rig(&acc_of(&[(0, 0.1)])), Err(Error::UndefinedEntropy { .. })));
        assert!(rig(&MetricsAccumulator::new()).is_err());
    }

    #[test]
    fn lifts() {
        let l = rig_lift(0.101, 0.100);
        assert!((l.pct - 1.0).abs() < 1e-9);
        assert!(!l.flagged);
        assert_eq!(rig_lift(0.3, 0.3).pct, 0.0);
        let negative_base = rig_lift(-0.05, -0.1);
        assert!((negative_base.pct - 50.0).abs() < 1e-9);
        let zero = rig_lift(0.01, 0.0);
        assert!(zero.flagged);
        assert!((zero.pct - 1.0).abs() < 1e-12);
    }

    #[test]
    fn auc_cases() {
        assert_eq!(auc(&acc_of(&[(1, 0.9), (0, 0.1)])).unwrap(), 1.0);
        assert_eq!(auc(&acc_of(&[(1, 0.1), (0, 0.9)])).unwrap(), 0.0);
        assert_eq!(auc(&acc_of(&[(1, 0.3), (0, 0.3), (0, 0.3), (1, 0.3)])).unwrap(), 0.5);
        assert!(matches!(auc(&acc_of(&[(1, 0.3)])), Err(Error::UndefinedAuc { .. })));
        // brute force over all positive/negative pairs
        let pairs = [(1, 0.7), (0, 0.2), (0, 0.7), (1, 0.4), (0, 0.5), (1, 0.9)];
        let mut wins = 0.0;
        let mut total = 0.0;
        for (lp, pp) in pairs.iter().filter(|(l, _)| *l == 1) {
            let _ = lp;
            for (_, pn) in pairs.iter().filter(|(l, _)| *l == 0) {
                total += 1.0;
                wins += if pp > pn { 1.0 } else if pp == pn { 0.5 } else { 0.0 };
            }
        }
        assert!((auc(&acc_of(&pairs)).unwrap() - wins / total).abs() < 1e-15);
    }

    #[test]
    fn merge_drops_scores_from_partial_shards() {
        let mut a = acc_of(&[(1, 0.4)]);
        a.merge(&MetricsAccumulator::new());
        assert!(a.scores().is_none());
        assert_eq!(a.n(), 1);
    }
}
