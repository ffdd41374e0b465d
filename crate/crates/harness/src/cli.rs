//! The `beaconscan` command line.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use beaconscan::genopt::{build_model, decode, export_lp, genopt, Assignment, GenoptOptions, SolveOptions};
use beaconscan::sampling::{sample_f1, sample_f2, to_json_lines, SampleSpec};
use beaconscan::simulator::{monte_carlo_emdt, simulation_csv};
use beaconscan::strategies::{chan_train_with, TrainLookahead};
use beaconscan::{
    BeaconIntervalSet, ChannelSet, Error, Interval, ListeningSchedule, MetricsReport, Rational, ScheduleDocument, Slot, Strategy,
};
use beaconscan_oracle::{optimal_emdt, optimal_makespan, recursive_exists, OracleBudget};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::experiment::{run_experiment, ExperimentConfig, ReportPaths, SetSource};
use crate::report::{cells_csv, emit_reports, summary_json};

#[derive(Debug, Parser)]
#[command(
    name = "beaconscan",
    version,
    about = "Listening schedules for multi-channel beacon discovery"
)]
pub struct Cli {
    /// Seed for every randomized step.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Write the output here instead of stdout (a directory for `compare`).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Args)]
pub struct Instance {
    /// Beacon intervals, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    pub intervals: Vec<Interval>,
    #[arg(long)]
    pub channels: usize,
}

impl Instance {
    fn parse(&self) -> Result<(BeaconIntervalSet, ChannelSet)> {
        Ok((BeaconIntervalSet::classify(&self.intervals)?, ChannelSet::new(self.channels)?))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Lookahead {
    Evolving,
    Frozen,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OracleQuery {
    Emdt,
    Makespan,
    Recursive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SampleFamily {
    F1,
    F2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Source {
    F1,
    F2,
    Explicit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Profile {
    Desk,
    Full,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a schedule with one strategy.
    Schedule {
        #[arg(long)]
        strategy: Strategy,
        #[command(flatten)]
        instance: Instance,
        /// Lookahead rule of chan-train.
        #[arg(long, value_enum, default_value_t = Lookahead::Evolving)]
        lookahead: Lookahead,
    },
    /// Metrics of a schedule document.
    Metrics {
        #[arg(long)]
        schedule: PathBuf,
    },
    /// EMDT-optimal schedule by iterative branch and bound.
    Genopt {
        #[command(flatten)]
        instance: Instance,
        #[arg(long, default_value_t = 3)]
        phases: u8,
        #[arg(long, default_value_t = 50)]
        warm_runs: usize,
        /// Search nodes per phase.
        #[arg(long)]
        budget: Option<u64>,
        /// Horizon of the model used by --export-lp and --import-sol
        /// (default LCM(B)·|C|).
        #[arg(long)]
        horizon: Option<Slot>,
        /// Write the model in LP format.
        #[arg(long)]
        export_lp: Option<PathBuf>,
        /// Decode an external solver's "name value" solution instead of solving.
        #[arg(long)]
        import_sol: Option<PathBuf>,
        /// Prefer smaller makespan among equal-EMDT schedules.
        #[arg(long)]
        lexicographic: bool,
    },
    /// Brute-force ground truth for small instances.
    Oracle {
        #[command(flatten)]
        instance: Instance,
        #[arg(long, value_enum, default_value_t = OracleQuery::Emdt)]
        query: OracleQuery,
        #[arg(long, default_value_t = OracleBudget::default().max_slots)]
        max_slots: Slot,
        #[arg(long, default_value_t = OracleBudget::default().max_nodes)]
        max_nodes: u64,
    },
    /// Monte Carlo MDT of a schedule over sampled environments.
    Simulate {
        #[arg(long)]
        schedule: PathBuf,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        /// Networks per environment.
        #[arg(long, default_value_t = 10)]
        networks: usize,
    },
    /// Draw interval sets.
    Sample {
        #[arg(long, value_enum)]
        family: SampleFamily,
        /// Sets to draw (F1 only; F2 lists every set).
        #[arg(long, default_value_t = 150)]
        count: usize,
        #[arg(long)]
        min_size: Option<usize>,
        #[arg(long)]
        max_size: Option<usize>,
        #[arg(long)]
        min_value: Option<Interval>,
        #[arg(long)]
        max_value: Option<Interval>,
    },
    /// Compare strategies over a grid of channel counts and interval sets.
    Compare {
        /// Defaults for the grid; explicit flags override them.
        #[arg(long, value_enum, default_value_t = Profile::Desk)]
        profile: Profile,
        #[arg(long, value_delimiter = ',')]
        strategies: Option<Vec<Strategy>>,
        #[arg(long, value_delimiter = ',')]
        channels: Option<Vec<usize>>,
        #[arg(long, value_enum, default_value_t = Source::F2)]
        source: Source,
        /// Explicit sets, e.g. "1,2;2,3,6".
        #[arg(long)]
        sets: Option<String>,
        #[arg(long)]
        iterations: Option<usize>,
        /// Largest interval of sampled sets.
        #[arg(long)]
        max_value: Option<Interval>,
        #[arg(long)]
        workers: Option<usize>,
        /// Search nodes per GENOPT phase.
        #[arg(long)]
        budget: Option<u64>,
    },
}

/// Outcome of a command: text for the output and whether a budget ran out.
pub struct Output {
    pub text: String,
    pub budget_exceeded: bool,
}

impl Output {
    fn done(text: String) -> Self {
        Output {
            text,
            budget_exceeded: false,
        }
    }
}

/// Exit code for an error: 3 when a budget ran out, 2 for invalid input,
/// 1 for anything else.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    match err.chain().find_map(|e| e.downcast_ref::<Error>()) {
        Some(Error::BudgetExceeded(_)) => 3,
        Some(_) => 2,
        None => 1,
    }
}

/// Runs the command and writes its output; returns the process exit code.
pub fn main_with(cli: Cli) -> i32 {
    let out = cli.out.clone();
    let is_compare = matches!(cli.command, Command::Compare { .. });
    match execute(cli) {
        Ok(output) => {
            let written = match &out {
                Some(path) if !is_compare => fs::write(path, &output.text).with_context(|| format!("writing {}", path.display())),
                _ => {
                    print!("{}", output.text);
                    Ok(())
                }
            };
            match written {
                Err(e) => {
                    eprintln!("error: {e:#}");
                    1
                }
                Ok(()) if output.budget_exceeded => 3,
                Ok(()) => 0,
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            exit_code(&e)
        }
    }
}

fn read_schedule(path: &Path) -> Result<(BeaconIntervalSet, ChannelSet, ListeningSchedule)> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(ScheduleDocument::from_json(&text)?.into_parts()?)
}

fn rational_json(r: Rational) -> serde_json::Value {
    json!({ "num": r.numer(), "den": r.denom(), "value": r.to_f64() })
}

fn line(v: serde_json::Value) -> String {
    v.to_string() + "\n"
}

pub fn execute(cli: Cli) -> Result<Output> {
    let Cli {
        seed,
        format,
        out,
        command,
    } = cli;
    match command {
        Command::Schedule {
            strategy,
            instance,
            lookahead,
        } => {
            let (b, c) = instance.parse()?;
            let s = match (strategy, lookahead) {
                (Strategy::ChanTrain, Lookahead::Frozen) => chan_train_with(&b, c, TrainLookahead::Frozen),
                _ => strategy.build(&b, c, seed)?,
            };
            Ok(Output::done(match format {
                Format::Json => ScheduleDocument::new(&b, c, &s).to_json() + "\n",
                Format::Csv => {
                    let mut text = String::from("slot,channel\n");
                    for (t, ch) in s.iter() {
                        text.push_str(&format!("{t},{ch}\n"));
                    }
                    text
                }
            }))
        }
        Command::Metrics { schedule } => {
            let (b, c, s) = read_schedule(&schedule)?;
            let report = MetricsReport::compute(&s, &b, c)?;
            Ok(Output::done(match format {
                Format::Json => report.to_json() + "\n",
                Format::Csv => report.to_csv(),
            }))
        }
        Command::Genopt {
            instance,
            phases,
            warm_runs,
            budget,
            horizon,
            export_lp: lp_path,
            import_sol,
            lexicographic,
        } => {
            let (b, c) = instance.parse()?;
            let horizon = horizon.unwrap_or(b.lcm() * c.count() as u64);
            if lp_path.is_some() || import_sol.is_some() {
                let model = build_model(&b, c, horizon)?;
                if let Some(path) = &lp_path {
                    fs::write(path, export_lp(&model)).with_context(|| format!("writing {}", path.display()))?;
                }
                if let Some(path) = &import_sol {
                    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                    let decoded = decode(&model, &Assignment::parse(&model, &text)?)?;
                    return Ok(Output::done(match format {
                        Format::Json => line(json!({
                            "horizon": horizon,
                            "objective": rational_json(decoded.objective),
                            "redundant_slots": decoded.redundant_slots,
                            "schedule": ScheduleDocument::new(&b, c, &decoded.schedule),
                        })),
                        Format::Csv => format!(
                            "horizon,emdt_num,emdt_den\n{horizon},{},{}\n",
                            decoded.objective.numer(),
                            decoded.objective.denom()
                        ),
                    }));
                }
            }
            let options = GenoptOptions {
                warm_runs,
                phases,
                seed,
                solve: SolveOptions {
                    node_budget: budget.or(SolveOptions::default().node_budget),
                    lexicographic,
                    ..SolveOptions::default()
                },
            };
            let run = genopt(&b, c, &options)?;
            let budget_exceeded = !run.outcome.is_optimal();
            let objective = run.outcome.objective.expect("genopt keeps an incumbent");
            let text = match format {
                Format::Json => line(json!({
                    "warm_start": rational_json(run.warm_start),
                    "objective": rational_json(objective),
                    "lower_bound": rational_json(run.outcome.lower_bound),
                    "outcome": run.outcome,
                    "phases": run.phases,
                    "schedule": run.outcome.schedule.as_ref().map(|s| ScheduleDocument::new(&b, c, s)),
                })),
                Format::Csv => format!(
                    "emdt_num,emdt_den,lower_num,lower_den,proven,nodes\n{},{},{},{},{},{}\n",
                    objective.numer(),
                    objective.denom(),
                    run.outcome.lower_bound.numer(),
                    run.outcome.lower_bound.denom(),
                    !budget_exceeded,
                    run.outcome.nodes
                ),
            };
            Ok(Output { text, budget_exceeded })
        }
        Command::Oracle {
            instance,
            query,
            max_slots,
            max_nodes,
        } => {
            let (b, c) = instance.parse()?;
            let budget = OracleBudget::new(max_slots, max_nodes)?;
            let answer = match query {
                OracleQuery::Emdt => optimal_emdt(&b, c, budget).map(|a| (rational_json(a.value), a.witness, a.nodes)),
                OracleQuery::Makespan => optimal_makespan(&b, c, budget).map(|a| (json!(a.value), a.witness, a.nodes)),
                OracleQuery::Recursive => recursive_exists(&b, c, budget).map(|a| (json!(a.value), a.witness, a.nodes)),
            };
            let (value, witness, nodes, status, exceeded) = match answer {
                Ok((v, w, n)) => (v, w, Some(n), "ok", false),
                Err(Error::BudgetExceeded(_)) => (serde_json::Value::Null, None, None, "budget-exceeded", true),
                Err(e) => return Err(e.into()),
            };
            let text = match format {
                Format::Json => line(json!({ "value": value, "witness": witness, "nodes": nodes, "status": status })),
                Format::Csv => {
                    let v = match &value {
                        serde_json::Value::Object(o) => format!("{}/{}", o["num"], o["den"]),
                        serde_json::Value::Null => "NA".into(),
                        other => other.to_string(),
                    };
                    let n = nodes.map_or("NA".into(), |n| n.to_string());
                    format!("value,nodes,status\n{v},{n},{status}\n")
                }
            };
            Ok(Output {
                text,
                budget_exceeded: exceeded,
            })
        }
        Command::Simulate {
            schedule,
            trials,
            networks,
        } => {
            let (b, c, s) = read_schedule(&schedule)?;
            let mc = monte_carlo_emdt(&s, &b, c, trials, networks, seed)?;
            Ok(Output::done(match format {
                Format::Csv => simulation_csv(&mc.trials),
                Format::Json => line(json!({
                    "mean": rational_json(mc.mean),
                    "half_width": mc.half_width,
                    "trials": mc.trials.iter().map(|t| json!({ "seed": t.seed, "mdt": t.mdt.map(rational_json) })).collect::<Vec<_>>(),
                })),
            }))
        }
        Command::Sample {
            family,
            count,
            min_size,
            max_size,
            min_value,
            max_value,
        } => {
            let base = match family {
                SampleFamily::F1 => SampleSpec::f1(seed),
                SampleFamily::F2 => SampleSpec {
                    seed,
                    ..SampleSpec::f2()
                },
            };
            let spec = SampleSpec {
                cardinality: (min_size.unwrap_or(base.cardinality.0), max_size.unwrap_or(base.cardinality.1)),
                values: (min_value.unwrap_or(base.values.0), max_value.unwrap_or(base.values.1)),
                ..base
            };
            let sets = match family {
                SampleFamily::F1 => sample_f1(&spec, count)?,
                SampleFamily::F2 => sample_f2(&spec)?,
            };
            Ok(Output::done(match format {
                Format::Json => to_json_lines(&sets),
                Format::Csv => {
                    let mut text = String::from("intervals\n");
                    for s in &sets {
                        let v: Vec<String> = s.intervals().iter().map(|b| b.to_string()).collect();
                        text.push_str(&v.join(" "));
                        text.push('\n');
                    }
                    text
                }
            }))
        }
        Command::Compare {
            profile,
            strategies,
            channels,
            source,
            sets,
            iterations,
            max_value,
            workers,
            budget,
        } => {
            let base = match profile {
                Profile::Desk => ExperimentConfig::desk_scale(seed),
                Profile::Full => ExperimentConfig::full_scale(seed),
            };
            let source = match (source, max_value) {
                (Source::Explicit, _) => {
                    let Some(text) = sets else {
                        return Err(Error::InvalidArgument("--source explicit needs --sets".into()).into());
                    };
                    SetSource::Explicit {
                        sets: parse_sets(&text)?,
                    }
                }
                (Source::F1, v) => SetSource::SampledF1 {
                    spec: SampleSpec {
                        values: (1, v.unwrap_or(10)),
                        ..SampleSpec::f1(seed)
                    },
                },
                (Source::F2, None) => base.source.clone(),
                (Source::F2, Some(v)) => SetSource::SampledF2 {
                    spec: SampleSpec {
                        seed,
                        values: (1, v),
                        ..SampleSpec::f2()
                    },
                },
            };
            // Explicit sets are all used unless a smaller count is asked for.
            let iterations = match &source {
                SetSource::Explicit { sets } => iterations.unwrap_or(sets.len()),
                _ => iterations.unwrap_or(base.iterations),
            };
            let config = ExperimentConfig {
                strategies: strategies.unwrap_or(base.strategies.clone()),
                channels: channels.unwrap_or(base.channels.clone()),
                source,
                iterations,
                workers: workers.unwrap_or(base.workers),
                genopt: GenoptOptions {
                    solve: SolveOptions {
                        node_budget: budget.or(SolveOptions::default().node_budget),
                        ..SolveOptions::default()
                    },
                    ..base.genopt.clone()
                },
                outputs: ReportPaths::in_dir(out.unwrap_or_else(|| PathBuf::from("results"))),
                ..base
            };
            let table = run_experiment(&config)?;
            emit_reports(&table, &config.outputs)?;
            Ok(Output::done(match format {
                Format::Json => summary_json(&table) + "\n",
                Format::Csv => cells_csv(&table)?,
            }))
        }
    }
}

/// `"1,2;2,3,6"` into `[[1, 2], [2, 3, 6]]`.
pub fn parse_sets(text: &str) -> Result<Vec<Vec<Interval>>> {
    let sets: Vec<Vec<Interval>> = text
        .split(';')
        .map(|set| {
            set.split(',')
                .map(|v| v.trim().parse::<Interval>().map_err(|e| Error::Parse(format!("{v:?}: {e}"))))
                .collect::<std::result::Result<_, _>>()
        })
        .collect::<std::result::Result<_, _>>()?;
    if sets.iter().any(|s| s.is_empty()) {
        bail!(Error::InvalidArgument("empty interval set".into()));
    }
    Ok(sets)
}
