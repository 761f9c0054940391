//! Experiment output files: CSV reports, the lift series, counters and the
//! aligned comparison table.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sim::{DailyLiftReport, ExperimentOutput, PipelineCounters};

/// One `report.csv` row: the cross-seed mean of a variant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub mode: String,
    pub rig: f64,
    pub rig_lift_pct: f64,
    pub flops_per_ad: f64,
    pub flops_per_request: f64,
    pub flops_change_pct: f64,
    pub auc: f64,
    pub n: u64,
    pub rig_lift_pp: f64,
    pub rig_lift_min: f64,
    pub rig_lift_max: f64,
    pub flops_per_request_change_pct: f64,
    pub log_loss: f64,
    pub gamma: f64,
    pub seeds: usize,
}

/// One `report_seeds.csv` row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedRow {
    pub seed: u64,
    pub mode: String,
    pub rig: f64,
    pub rig_lift_pct: f64,
    pub rig_lift_pp: f64,
    pub flops_per_ad: f64,
    pub flops_per_request: f64,
    pub flops_change_pct: f64,
    pub flops_per_request_change_pct: f64,
    pub auc: f64,
    pub log_loss: f64,
    pub gamma: f64,
    pub n: u64,
}

/// One `daily_lifts.csv` row. The trailing rows carry `mean` and
/// `weighted_mean` in the index column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DailyRow {
    pub chunk_index: String,
    pub lift_pct: f64,
    pub n: u64,
}

#[derive(Debug, Clone, Serialize)]
struct CounterEntry<'a> {
    seed: u64,
    mode: &'a str,
    counters: &'a PipelineCounters,
}

pub fn report_rows(output: &ExperimentOutput) -> Vec<ReportRow> {
    output
        .summary
        .iter()
        .map(|s| ReportRow {
            mode: s.mode.clone(),
            rig: s.rig,
            rig_lift_pct: s.rig_lift_pct,
            flops_per_ad: s.flops_per_ad,
            flops_per_request: s.flops_per_request,
            flops_change_pct: s.flops_change_pct,
            auc: s.auc,
            n: s.n,
            rig_lift_pp: s.rig_lift_pp,
            rig_lift_min: s.rig_lift_min,
            rig_lift_max: s.rig_lift_max,
            flops_per_request_change_pct: s.flops_per_request_change_pct,
            log_loss: s.log_loss,
            gamma: s.gamma,
            seeds: output.seeds.len(),
        })
        .collect()
}

pub fn seed_rows(output: &ExperimentOutput) -> Vec<SeedRow> {
    let mut rows = Vec::new();
    for seed in &output.seeds {
        for v in &seed.variants {
            let r = &v.report;
            rows.push(SeedRow {
                seed: seed.seed,
                mode: r.mode.clone(),
                rig: r.rig,
                rig_lift_pct: r.rig_lift_pct.unwrap_or(0.0),
                rig_lift_pp: r.rig_lift_pp.unwrap_or(0.0),
                flops_per_ad: r.flops_per_ad,
                flops_per_request: r.flops_per_request,
                flops_change_pct: r.flops_change_pct.unwrap_or(0.0),
                flops_per_request_change_pct: r.flops_per_request_change_pct.unwrap_or(0.0),
                auc: r.auc.unwrap_or(f64::NAN),
                log_loss: r.log_loss,
                gamma: r.gamma,
                n: r.n,
            });
        }
    }
    rows
}

pub fn daily_rows(daily: &DailyLiftReport) -> Vec<DailyRow> {
    let total = daily.rows.iter().map(|r| r.n).sum();
    let mut rows: Vec<DailyRow> = daily
        .rows
        .iter()
        .map(|r| DailyRow {
            chunk_index: r.chunk_index.to_string(),
            lift_pct: r.lift_pct,
            n: r.n,
        })
        .collect();
    rows.push(DailyRow {
        chunk_index: "mean".into(),
        lift_pct: daily.mean_lift_pct,
        n: total,
    });
    rows.push(DailyRow {
        chunk_index: "weighted_mean".into(),
        lift_pct: daily.weighted_mean_lift_pct,
        n: total,
    });
    rows
}

pub fn to_csv<T: Serialize>(rows: &[T]) -> Result<String> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| Error::Report(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Report(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Report(e.to_string()))
}

pub fn from_csv<T: for<'de> Deserialize<'de>>(text: &str) -> Result<Vec<T>> {
    csv::Reader::from_reader(text.as_bytes())
        .deserialize()
        .map(|r| r.map_err(|e| Error::Report(e.to_string())))
        .collect()
}

pub fn counters_json(output: &ExperimentOutput) -> Result<String> {
    let entries: Vec<CounterEntry> = output
        .seeds
        .iter()
        .flat_map(|s| {
            s.variants.iter().map(move |v| CounterEntry {
                seed: s.seed,
                mode: v.mode.name(),
                counters: &v.counters,
            })
        })
        .collect();
    let mut s = serde_json::to_string_pretty(&entries).map_err(|e| Error::Report(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn label(mode: &str) -> &str {
    match mode {
        "baseline" => "Baseline",
        "replace" => "Replace context fields",
        "add" => "Add alongside context fields",
        other => other,
    }
}

fn signed(x: f64) -> String {
    format!("{:+.2}%", if x == 0.0 { 0.0 } else { x })
}

/// Aligned comparison table: one row per non-baseline variant, or a single
/// baseline row when nothing else ran.
pub fn table_text(rows: &[ReportRow]) -> String {
    let mut shown: Vec<&ReportRow> = rows.iter().filter(|r| r.mode != "baseline").collect();
    if shown.is_empty() {
        shown = rows.iter().filter(|r| r.mode == "baseline").collect();
    }
    let seeds = rows.first().map_or(0, |r| r.seeds);
    let width = shown
        .iter()
        .map(|r| label(&r.mode).len())
        .chain(["Usage of context CTR".len()])
        .max()
        .unwrap_or(0);
    let mut s = String::new();
    let _ = writeln!(s, "Offline evaluation against the baseline (mean of {seeds} seeds)");
    let _ = writeln!(s);
    let _ = writeln!(
        s,
        "{:<width$} | {:>9} | {:>12} | {:>12}",
        "Usage of context CTR", "RIG lift", "FLOPs change", "FLOPs change"
    );
    let _ = writeln!(s, "{:<width$} | {:>9} | {:>12} | {:>12}", "", "", "per ad", "per request");
    let _ = writeln!(
        s,
        "{}-+-{}-+-{}-+-{}",
        "-".repeat(width),
        "-".repeat(9),
        "-".repeat(12),
        "-".repeat(12)
    );
    for r in shown {
        let _ = writeln!(
            s,
            "{:<width$} | {:>9} | {:>12} | {:>12}",
            label(&r.mode),
            signed(r.rig_lift_pct),
            signed(r.flops_change_pct),
            signed(r.flops_per_request_change_pct)
        );
    }
    s
}

/// Text rendering of the per-chunk lift series with its mean.
pub fn lift_series_text(rows: &[DailyRow]) -> String {
    let chunks: Vec<&DailyRow> = rows.iter().filter(|r| r.chunk_index.parse::<usize>().is_ok()).collect();
    let scale = chunks
        .iter()
        .map(|r| r.lift_pct.abs())
        .fold(0.0f64, f64::max)
        .max(1e-12);
    let mut s = String::from("RIG lift per evaluation chunk\n\n");
    for r in &chunks {
        let bar = "#".repeat((r.lift_pct.abs() / scale * 40.0).round() as usize);
        let _ = writeln!(s, "chunk {:>3} {:>9} {}{}", r.chunk_index, signed(r.lift_pct), if r.lift_pct < 0.0 { "-" } else { "" }, bar);
    }
    for r in rows.iter().filter(|r| r.chunk_index.parse::<usize>().is_err()) {
        let _ = writeln!(s, "{:<13} {:>9}", r.chunk_index, signed(r.lift_pct));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(mode: &str, lift: f64, flops: f64) -> ReportRow {
        ReportRow {
            mode: mode.into(),
            rig: 0.3,
            rig_lift_pct: lift,
            flops_per_ad: 100.0,
            flops_per_request: 400.0,
            flops_change_pct: flops,
            auc: f64::NAN,
            n: 10,
            rig_lift_pp: 0.0,
            rig_lift_min: lift,
            rig_lift_max: lift,
            flops_per_request_change_pct: flops,
            log_loss: 0.4,
            gamma: 0.2,
            seeds: 3,
        }
    }

    #[test]
    fn table_rows() {
        let rows = vec![row("baseline", 0.0, 0.0), row("replace", 3.5, -62.0), row("add", 4.25, 27.333)];
        let t = table_text(&rows);
        assert!(t.contains("Replace context fields") && t.contains("+3.50%") && t.contains("-62.00%"));
        assert!(t.contains("+4.25%") && t.contains("+27.33%"));
        assert!(!t.contains("Baseline"));
        let only = table_text(&rows[..1]);
        assert!(only.contains("Baseline") && only.contains("+0.00%"));
        assert!(!only.contains("-0.00%"));
    }

    #[test]
    fn csv_round_trip() {
        let rows = vec![row("baseline", 0.0, 0.0), row("add", 0.1 + 0.2, 1.0 / 3.0)];
        let text = to_csv(&rows).unwrap();
        assert!(text.starts_with("mode,rig,rig_lift_pct,flops_per_ad,flops_per_request,flops_change_pct,auc,n,"));
        assert!(!text.contains('\r'));
        let back: Vec<ReportRow> = from_csv(&text).unwrap();
        assert_eq!(back[1].rig_lift_pct, 0.1 + 0.2);
        assert!(back[0].auc.is_nan());
    }
}
