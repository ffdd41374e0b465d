use serde::{Deserialize, Serialize};

use super::model::{build_model, export_lp};
use super::solver::{lower_bound, solve_exact, SolveOptions, SolveOutcome, Status};
use crate::config::ChannelSet;
use crate::error::{Error, Result};
use crate::intervals::{BeaconIntervalSet, Slot};
use crate::metrics::{emdt, makespan};
use crate::rational::Rational;
use crate::schedule::ListeningSchedule;
use crate::strategies::{greedy, Tiebreak};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenoptOptions {
    /// GREEDY RND runs tried for the warm start.
    pub warm_runs: usize,
    /// How many of the three horizon phases to run.
    pub phases: u8,
    pub seed: u64,
    pub solve: SolveOptions,
}

impl Default for GenoptOptions {
    fn default() -> Self {
        GenoptOptions {
            warm_runs: 50,
            phases: 3,
            seed: 0,
            solve: SolveOptions::default(),
        }
    }
}

/// What happened in one phase.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseReport {
    pub phase: u8,
    pub horizon: Slot,
    /// `None` when the horizon was too large for the built-in search.
    pub outcome: Option<SolveOutcome>,
    /// The model in LP form, for phases handed to an external solver.
    #[serde(skip)]
    pub lp: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenoptRun {
    pub warm_start: Rational,
    pub outcome: SolveOutcome,
    pub phases: Vec<PhaseReport>,
}

impl GenoptRun {
    pub fn into_schedule(self) -> Result<ListeningSchedule> {
        self.outcome.into_schedule()
    }
}

/// Best of `runs` GREEDY RND schedules by EMDT, then makespan.
pub fn best_greedy_rnd(intervals: &BeaconIntervalSet, channels: ChannelSet, runs: usize, seed: u64) -> ListeningSchedule {
    (0..runs.max(1) as u64)
        .map(|i| {
            greedy(
                intervals,
                channels,
                Tiebreak::Rnd {
                    seed: seed.wrapping_add(i),
                },
            )
        })
        .min_by_key(|s| {
            (
                emdt(s, intervals, channels).expect("greedy schedules are complete"),
                makespan(s, intervals, channels).expect("greedy schedules are complete"),
            )
        })
        .unwrap()
}

/// Iterative GENOPT: start from the best GREEDY RND schedule with its
/// makespan as horizon, double the horizon, then solve with the full
/// `LCM(B)·|C|` horizon. Each phase starts from the best schedule so far.
pub fn genopt(intervals: &BeaconIntervalSet, channels: ChannelSet, options: &GenoptOptions) -> Result<GenoptRun> {
    if !(1..=3).contains(&options.phases) {
        return Err(Error::InvalidArgument(format!(
            "phases must be 1, 2 or 3, got {}",
            options.phases
        )));
    }
    let warm = best_greedy_rnd(intervals, channels, options.warm_runs, options.seed);
    let warm_emdt = emdt(&warm, intervals, channels)?;
    let cap = intervals.lcm() * channels.count() as u64;
    let first = makespan(&warm, intervals, channels)?;
    let horizons = [first, (2 * first).min(cap), cap];

    let mut best_objective = warm_emdt;
    let mut best_schedule = warm;
    let mut lower = lower_bound(intervals, channels, first).unwrap_or(warm_emdt);
    let mut final_horizon = first;
    let mut nodes = 0;
    let mut phases = Vec::new();
    for (i, &horizon) in horizons.iter().take(options.phases as usize).enumerate() {
        if horizon == final_horizon && i > 0 {
            continue;
        }
        final_horizon = horizon;
        let phase = i as u8 + 1;
        let model = build_model(intervals, channels, horizon)?;
        match solve_exact(&model, Some(&best_schedule), &options.solve) {
            Ok(outcome) => {
                nodes += outcome.nodes;
                lower = outcome.lower_bound;
                if let (Some(obj), Some(s)) = (outcome.objective, &outcome.schedule) {
                    if obj < best_objective {
                        best_objective = obj;
                        best_schedule = s.clone();
                    }
                }
                phases.push(PhaseReport {
                    phase,
                    horizon,
                    outcome: Some(outcome),
                    lp: None,
                });
            }
            Err(Error::BudgetExceeded(_)) => {
                lower = lower_bound(intervals, channels, horizon).unwrap_or(lower);
                phases.push(PhaseReport {
                    phase,
                    horizon,
                    outcome: None,
                    lp: Some(export_lp(&model)),
                });
            }
            Err(e) => return Err(e),
        }
    }
    // A longer horizon can only lower the optimum, so the last phase's bound
    // holds for every earlier one as well.
    let lower = lower.min(best_objective);
    let status = if lower == best_objective {
        Status::ProvenOptimal
    } else {
        Status::BoundGap {
            gap: (best_objective - lower).to_f64() / best_objective.to_f64(),
        }
    };
    let outcome = SolveOutcome {
        status,
        horizon: final_horizon,
        objective: Some(best_objective),
        lower_bound: lower,
        nodes,
        schedule: Some(best_schedule),
    };
    Ok(GenoptRun {
        warm_start: warm_emdt,
        outcome,
        phases,
    })
}
