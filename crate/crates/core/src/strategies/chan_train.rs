use serde::{Deserialize, Serialize};

use super::DiscoveryState;
use crate::config::{ChannelId, ChannelSet};
use crate::intervals::{BeaconIntervalSet, Slot};
use crate::schedule::ListeningSchedule;

/// How CHAN TRAIN predicts the detections of a candidate train.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TrainLookahead {
    /// Discoveries made by earlier slots of the train count as discovered.
    #[default]
    Evolving,
    /// Every slot of the train is scored against the state at decision time.
    /// Runs are capped at `LCM(B)` slots.
    Frozen,
}

/// CHAN TRAIN with the default [`TrainLookahead::Evolving`] look-ahead.
pub fn chan_train(intervals: &BeaconIntervalSet, channels: ChannelSet) -> ListeningSchedule {
    chan_train_with(intervals, channels, TrainLookahead::Evolving)
}

/// CHAN TRAIN: among the channels with the most new detections in the
/// current slot, pick the one whose train is longest, counting the slots it
/// has already been scanned for just before. A train lasts as long as every
/// slot keeps detecting at least as many configurations as the first one.
/// The whole train is committed before the next decision.
pub fn chan_train_with(intervals: &BeaconIntervalSet, channels: ChannelSet, lookahead: TrainLookahead) -> ListeningSchedule {
    let mut state = DiscoveryState::new(intervals, channels);
    let mut schedule = ListeningSchedule::new();
    let mut t: Slot = 1;
    // The first slot of every train detects something, so this terminates.
    while !state.is_done() {
        let counts = state.counts(t);
        let best = *counts.iter().max().unwrap();
        if best == 0 {
            t += 1;
            continue;
        }
        let mut choice: Option<(u64, ChannelId, u64)> = None;
        for c in (0..counts.len()).filter(|&c| counts[c] == best) {
            let run = train_length(&state, c, t, best, lookahead, intervals.lcm());
            let score = run + preceding_run(&schedule, c, t);
            if choice.is_none_or(|(s, _, _)| score > s) {
                choice = Some((score, c, run));
            }
        }
        let (_, c, run) = choice.unwrap();
        for u in t..t + run {
            state.scan(c, u);
            schedule.set(u, c);
        }
        t += run;
    }
    schedule
}

/// Consecutive slots from `t` on channel `c` detecting at least `m` each.
fn train_length(state: &DiscoveryState, c: ChannelId, t: Slot, m: usize, lookahead: TrainLookahead, lcm: u64) -> u64 {
    match lookahead {
        TrainLookahead::Evolving => {
            let mut sim = state.clone();
            let mut u = t;
            while sim.new_detections(c, u) >= m {
                sim.scan(c, u);
                u += 1;
            }
            u - t
        }
        TrainLookahead::Frozen => (t..t + lcm).take_while(|&u| state.new_detections(c, u) >= m).count() as u64,
    }
}

/// Slots immediately before `t` that already scan `c`.
fn preceding_run(schedule: &ListeningSchedule, c: ChannelId, t: Slot) -> u64 {
    (1..t).rev().take_while(|&u| schedule.channel_at(u) == Some(c)).count() as u64
}
