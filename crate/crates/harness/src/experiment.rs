//! Strategy comparisons over grids of channel counts and interval sets.

use std::path::PathBuf;

use beaconscan::genopt::{genopt, GenoptOptions, Status};
use beaconscan::metrics::is_complete;
use beaconscan::sampling::{sample_f1, sample_f2_subset, SampleSpec};
use beaconscan::simulator::trial_seed;
use beaconscan::{BeaconIntervalSet, ChannelSet, Error, Interval, MetricsReport, Rational, Result, Slot, Strategy};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

/// Where the interval sets of an experiment come from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SetSource {
    Explicit { sets: Vec<Vec<Interval>> },
    SampledF1 { spec: SampleSpec },
    SampledF2 { spec: SampleSpec },
}

impl SetSource {
    /// The first `count` sets of the source.
    pub fn resolve(&self, count: usize) -> Result<Vec<BeaconIntervalSet>> {
        match self {
            SetSource::Explicit { sets } => {
                if sets.len() < count {
                    return Err(Error::InvalidArgument(format!(
                        "{count} interval sets requested but only {} given",
                        sets.len()
                    )));
                }
                sets[..count].iter().map(|s| BeaconIntervalSet::classify(s)).collect()
            }
            SetSource::SampledF1 { spec } => sample_f1(spec, count),
            SetSource::SampledF2 { spec } => sample_f2_subset(spec, count),
        }
    }
}

/// Output locations for [`crate::emit_reports`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportPaths {
    pub csv: PathBuf,
    pub summary: PathBuf,
    pub plot: PathBuf,
}

impl ReportPaths {
    /// `cells.csv`, `summary.json` and `plot.json` inside `dir`.
    pub fn in_dir(dir: impl Into<PathBuf>) -> Self {
        let dir = dir.into();
        ReportPaths {
            csv: dir.join("cells.csv"),
            summary: dir.join("summary.json"),
            plot: dir.join("plot.json"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub strategies: Vec<Strategy>,
    pub channels: Vec<usize>,
    pub source: SetSource,
    /// Interval sets per channel count.
    pub iterations: usize,
    pub seed: u64,
    /// Options of the GENOPT run that provides each cell's EMDT reference.
    pub genopt: GenoptOptions,
    /// Size of the worker pool.
    pub workers: usize,
    pub outputs: ReportPaths,
}

impl ExperimentConfig {
    /// Every strategy that accepts arbitrary interval sets, `|C|` from 2 to
    /// 6, 20 F2 sets whose largest interval is at most 64.
    pub fn desk_scale(seed: u64) -> Self {
        ExperimentConfig {
            strategies: Strategy::ALL.into_iter().filter(|s| *s != Strategy::OptB2).collect(),
            channels: (2..=6).collect(),
            source: SetSource::SampledF2 {
                spec: SampleSpec {
                    seed,
                    values: (1, 64),
                    ..SampleSpec::f2()
                },
            },
            iterations: 20,
            seed,
            genopt: GenoptOptions {
                seed,
                ..GenoptOptions::default()
            },
            workers: std::thread::available_parallelism().map_or(1, |n| n.get()),
            outputs: ReportPaths::in_dir("results"),
        }
    }

    /// The full grid: `|C|` from 2 to 12 and 150 F2 sets drawn from every
    /// base number up to 256. Expect hours of GENOPT time.
    pub fn full_scale(seed: u64) -> Self {
        ExperimentConfig {
            channels: (2..=12).collect(),
            source: SetSource::SampledF2 {
                spec: SampleSpec {
                    seed,
                    ..SampleSpec::f2()
                },
            },
            iterations: 150,
            ..Self::desk_scale(seed)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.strategies.is_empty() {
            return Err(Error::InvalidArgument("at least one strategy is required".into()));
        }
        if self.iterations == 0 {
            return Err(Error::InvalidArgument("iterations must be at least 1".into()));
        }
        if self.channels.is_empty() {
            return Err(Error::InvalidArgument("at least one channel count is required".into()));
        }
        for &m in &self.channels {
            ChannelSet::new(m)?;
        }
        if self.workers == 0 {
            return Err(Error::InvalidArgument("workers must be at least 1".into()));
        }
        Ok(())
    }
}

/// The EMDT every strategy of a cell is normalized by.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmdtReference {
    pub channels: usize,
    pub bi_set: usize,
    /// Best EMDT GENOPT found.
    pub value: Rational,
    pub lower_bound: Rational,
    #[serde(flatten)]
    pub status: Status,
}

impl EmdtReference {
    /// Relative distance between the reference and the proven lower bound.
    pub fn gap(&self) -> f64 {
        match self.status {
            Status::BoundGap { gap } => gap,
            _ => 0.0,
        }
    }
}

/// Raw and normalized metrics of one (strategy, `|C|`, interval set) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub strategy: Strategy,
    pub channels: usize,
    pub bi_set: usize,
    pub intervals: Vec<Interval>,
    pub emdt: Rational,
    pub emdt_norm: f64,
    pub makespan: Slot,
    pub makespan_norm: f64,
    pub switches: usize,
    /// `None` for a single channel, where no switch is ever needed.
    pub switches_norm: Option<f64>,
    pub active: u64,
    pub active_norm: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellFailure {
    pub strategy: Option<Strategy>,
    pub channels: usize,
    pub bi_set: usize,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentTable {
    pub strategies: Vec<Strategy>,
    pub channels: Vec<usize>,
    pub sets: Vec<Vec<Interval>>,
    pub rows: Vec<ComparisonRow>,
    pub references: Vec<EmdtReference>,
    pub failures: Vec<CellFailure>,
}

struct CellResult {
    reference: Option<EmdtReference>,
    rows: Vec<ComparisonRow>,
    failures: Vec<CellFailure>,
}

/// Runs every (strategy, `|C|`, interval set) cell. Cells run on a pool of
/// `config.workers` threads; the table does not depend on the pool size.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentTable> {
    config.validate()?;
    let sets = config.source.resolve(config.iterations)?;
    let jobs: Vec<(usize, usize)> = config
        .channels
        .iter()
        .flat_map(|&m| (0..sets.len()).map(move |i| (m, i)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let results: Vec<CellResult> = pool.install(|| jobs.par_iter().map(|&(m, i)| run_cell(config, &sets[i], m, i)).collect());

    let mut table = ExperimentTable {
        strategies: config.strategies.clone(),
        channels: config.channels.clone(),
        sets: sets.iter().map(|s| s.intervals().to_vec()).collect(),
        rows: Vec::new(),
        references: Vec::new(),
        failures: Vec::new(),
    };
    for r in results {
        table.references.extend(r.reference);
        table.rows.extend(r.rows);
        table.failures.extend(r.failures);
    }
    Ok(table)
}

fn run_cell(config: &ExperimentConfig, set: &BeaconIntervalSet, m: usize, bi_set: usize) -> CellResult {
    let channels = ChannelSet::new(m).expect("validated");
    let seed = trial_seed(config.seed, (m as u64) << 32 | bi_set as u64);
    let fail = |strategy, error: String| CellFailure {
        strategy,
        channels: m,
        bi_set,
        error,
    };
    let opts = GenoptOptions {
        seed,
        ..config.genopt.clone()
    };
    let run = match genopt(set, channels, &opts) {
        Ok(run) => run,
        Err(e) => {
            return CellResult {
                reference: None,
                rows: Vec::new(),
                failures: vec![fail(None, format!("no EMDT reference: {e}"))],
            }
        }
    };
    let reference = EmdtReference {
        channels: m,
        bi_set,
        value: run.outcome.objective.expect("genopt keeps an incumbent"),
        lower_bound: run.outcome.lower_bound,
        status: run.outcome.status,
    };
    let optimum_schedule = run.outcome.schedule.clone();

    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for &strategy in &config.strategies {
        let built = match strategy {
            Strategy::Genopt => optimum_schedule
                .clone()
                .ok_or_else(|| Error::Infeasible("genopt returned no schedule".into())),
            s => s.build(set, channels, seed),
        };
        let schedule = match built {
            Ok(s) if is_complete(&s, set, channels) => s,
            Ok(_) => {
                failures.push(fail(Some(strategy), "schedule is incomplete".into()));
                continue;
            }
            Err(e) => {
                failures.push(fail(Some(strategy), e.to_string()));
                continue;
            }
        };
        match MetricsReport::compute(&schedule, set, channels) {
            Ok(report) => rows.push(row(strategy, m, bi_set, set, &report, &reference)),
            Err(e) => failures.push(fail(Some(strategy), e.to_string())),
        }
    }
    CellResult {
        reference: Some(reference),
        rows,
        failures,
    }
}

fn row(
    strategy: Strategy,
    m: usize,
    bi_set: usize,
    set: &BeaconIntervalSet,
    report: &MetricsReport,
    reference: &EmdtReference,
) -> ComparisonRow {
    let span = (set.max() * m as u64) as f64;
    ComparisonRow {
        strategy,
        channels: m,
        bi_set,
        intervals: set.intervals().to_vec(),
        emdt: report.emdt,
        emdt_norm: (report.emdt / reference.value).to_f64(),
        makespan: report.makespan,
        makespan_norm: report.makespan as f64 / span,
        switches: report.channel_switches,
        switches_norm: (m > 1).then(|| report.channel_switches as f64 / (m - 1) as f64),
        active: report.active_slots,
        active_norm: report.active_slots as f64 / span,
    }
}

/// Mean with the half-width of its Student-t 95% confidence interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub half_width: f64,
}

impl Estimate {
    /// `None` for an empty sample; a single value has half-width 0.
    pub fn of(values: &[f64]) -> Option<Estimate> {
        let n = values.len();
        if n == 0 {
            return None;
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        if n == 1 {
            return Some(Estimate { mean, half_width: 0.0 });
        }
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        let t = StudentsT::new(0.0, 1.0, (n - 1) as f64)
            .expect("positive degrees of freedom")
            .inverse_cdf(0.975);
        Some(Estimate {
            mean,
            half_width: t * (var / n as f64).sqrt(),
        })
    }
}

/// Per-(strategy, `|C|`) means over the interval sets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub strategy: Strategy,
    pub channels: usize,
    pub cells: usize,
    pub failures: usize,
    pub emdt_norm: Option<Estimate>,
    pub makespan_norm: Option<Estimate>,
    pub switches_norm: Option<Estimate>,
    pub active_norm: Option<Estimate>,
}

impl ExperimentTable {
    pub fn aggregate(&self) -> Vec<Aggregate> {
        let mut out = Vec::new();
        for &strategy in &self.strategies {
            for &m in &self.channels {
                let rows: Vec<&ComparisonRow> = self
                    .rows
                    .iter()
                    .filter(|r| r.strategy == strategy && r.channels == m)
                    .collect();
                let metric = |f: &dyn Fn(&ComparisonRow) -> f64| Estimate::of(&rows.iter().map(|r| f(r)).collect::<Vec<_>>());
                let switches: Vec<f64> = rows.iter().filter_map(|r| r.switches_norm).collect();
                out.push(Aggregate {
                    strategy,
                    channels: m,
                    cells: rows.len(),
                    failures: self
                        .failures
                        .iter()
                        .filter(|f| f.channels == m && f.strategy.is_none_or(|s| s == strategy))
                        .count(),
                    emdt_norm: metric(&|r| r.emdt_norm),
                    makespan_norm: metric(&|r| r.makespan_norm),
                    switches_norm: Estimate::of(&switches),
                    active_norm: metric(&|r| r.active_norm),
                });
            }
        }
        out
    }

    pub fn reference(&self, channels: usize, bi_set: usize) -> Option<&EmdtReference> {
        self.references.iter().find(|r| r.channels == channels && r.bi_set == bi_set)
    }
}
