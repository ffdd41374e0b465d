//! CSV, JSON summary and plot data for an experiment table.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::Serialize;

use crate::experiment::{Aggregate, CellFailure, EmdtReference, Estimate, ExperimentTable, ReportPaths};

pub const CSV_HEADER: [&str; 12] = [
    "strategy",
    "channels",
    "bi_set",
    "emdt_num",
    "emdt_den",
    "emdt_norm",
    "makespan",
    "makespan_norm",
    "switches",
    "switches_norm",
    "active",
    "active_norm",
];

fn ratio(x: f64) -> String {
    format!("{x:.6}")
}

/// One row per successful cell.
pub fn cells_csv(table: &ExperimentTable) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER)?;
    for r in &table.rows {
        w.write_record([
            r.strategy.name().to_string(),
            r.channels.to_string(),
            r.bi_set.to_string(),
            r.emdt.numer().to_string(),
            r.emdt.denom().to_string(),
            ratio(r.emdt_norm),
            r.makespan.to_string(),
            ratio(r.makespan_norm),
            r.switches.to_string(),
            r.switches_norm.map_or("NA".into(), ratio),
            r.active.to_string(),
            ratio(r.active_norm),
        ])?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

#[derive(Serialize)]
struct Summary<'a> {
    sets: &'a [Vec<u64>],
    aggregates: Vec<Aggregate>,
    references: &'a [EmdtReference],
    failures: &'a [CellFailure],
}

pub fn summary_json(table: &ExperimentTable) -> String {
    let summary = Summary {
        sets: &table.sets,
        aggregates: table.aggregate(),
        references: &table.references,
        failures: &table.failures,
    };
    serde_json::to_string_pretty(&summary).expect("summaries always serialize")
}

#[derive(Serialize)]
struct Series {
    strategy: String,
    x: Vec<usize>,
    mean: Vec<Option<f64>>,
    half_width: Vec<Option<f64>>,
}

#[derive(Serialize)]
struct PlotData {
    x: &'static str,
    metrics: Vec<(&'static str, Vec<Series>)>,
}

type MetricOf = fn(&Aggregate) -> Option<Estimate>;

/// Per metric, one series per strategy over the channel counts.
pub fn plot_json(table: &ExperimentTable) -> String {
    let agg = table.aggregate();
    let metrics: [(&str, MetricOf); 4] = [
        ("emdt_norm", |a| a.emdt_norm),
        ("makespan_norm", |a| a.makespan_norm),
        ("switches_norm", |a| a.switches_norm),
        ("active_norm", |a| a.active_norm),
    ];
    let plot = PlotData {
        x: "channels",
        metrics: metrics
            .iter()
            .map(|&(name, get)| {
                let series = table
                    .strategies
                    .iter()
                    .map(|&s| {
                        let points: Vec<&Aggregate> = agg.iter().filter(|a| a.strategy == s).collect();
                        Series {
                            strategy: s.name().to_string(),
                            x: points.iter().map(|a| a.channels).collect(),
                            mean: points.iter().map(|a| get(a).map(|e| e.mean)).collect(),
                            half_width: points.iter().map(|a| get(a).map(|e| e.half_width)).collect(),
                        }
                    })
                    .collect();
                (name, series)
            })
            .collect(),
    };
    serde_json::to_string_pretty(&plot).expect("plot data always serializes")
}

/// Writes the three report files, creating parent directories as needed.
pub fn emit_reports(table: &ExperimentTable, paths: &ReportPaths) -> Result<()> {
    if table.rows.is_empty() {
        bail!("nothing to report: every cell failed");
    }
    write(&paths.csv, &cells_csv(table)?)?;
    write(&paths.summary, &summary_json(table))?;
    write(&paths.plot, &plot_json(table))?;
    Ok(())
}

fn write(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::{run_experiment, ExperimentConfig, SetSource};
    use beaconscan::Strategy;

    fn table() -> ExperimentTable {
        run_experiment(&ExperimentConfig {
            strategies: vec![Strategy::Psv, Strategy::GreedyDtr],
            channels: vec![1, 2],
            source: SetSource::Explicit {
                sets: vec![vec![1, 2], vec![2, 3]],
            },
            iterations: 2,
            ..ExperimentConfig::desk_scale(0)
        })
        .unwrap()
    }

    #[test]
    fn csv_layout() {
        let csv = cells_csv(&table()).unwrap();
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), CSV_HEADER.join(","));
        assert_eq!(lines.next().unwrap(), "psv,1,0,5,4,1.000000,2,1.000000,0,NA,2,1.000000");
        assert_eq!(csv.lines().count(), 1 + 8);
        assert!(csv.contains("psv,2,0,9,4,1.125000,4,1.000000,1,1.000000,4,1.000000"));
    }

    #[test]
    fn plot_has_one_series_per_strategy() {
        let v: serde_json::Value = serde_json::from_str(&plot_json(&table())).unwrap();
        for metric in v["metrics"].as_array().unwrap() {
            let series = metric[1].as_array().unwrap();
            assert_eq!(series.len(), 2);
            assert_eq!(series[0]["x"], serde_json::json!([1, 2]));
        }
    }

    #[test]
    fn writes_files() {
        let dir = tempfile::tempdir().unwrap();
        let paths = ReportPaths::in_dir(dir.path().join("out"));
        let t = table();
        emit_reports(&t, &paths).unwrap();
        let first = fs::read(&paths.csv).unwrap();
        emit_reports(&t, &paths).unwrap();
        assert_eq!(first, fs::read(&paths.csv).unwrap());
        let summary: serde_json::Value = serde_json::from_str(&fs::read_to_string(&paths.summary).unwrap()).unwrap();
        assert_eq!(summary["aggregates"].as_array().unwrap().len(), 4);

        let empty = ExperimentTable { rows: vec![], ..t };
        assert!(emit_reports(&empty, &paths).is_err());
    }
}
