//! Validity predicates and performance metrics of listening schedules.
//!
//! The discovery time of a configuration is the first slot in which the
//! schedule listens on its channel while it beacons. Metrics that are only
//! meaningful for complete schedules (EMDT, makespan, active/idle counts)
//! return [`Error::IncompleteSchedule`] instead of a partial value; use
//! [`coverage`] to see what is missing.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::config::{ChannelSet, ConfigSpace, Environment, NetworkConfiguration};
use crate::error::{Error, Result};
use crate::intervals::{offset_class, BeaconIntervalSet, Slot};
use crate::rational::Rational;
use crate::schedule::ListeningSchedule;

/// Discovery slot of each configuration, indexed by [`ConfigSpace`].
pub(crate) fn discovery_vector(schedule: &ListeningSchedule, space: &ConfigSpace) -> Vec<Option<Slot>> {
    let mut found = vec![None; space.len()];
    for (t, c) in schedule.iter() {
        if c >= space.channels() {
            continue;
        }
        for i in 0..space.intervals().len() {
            let k = space.heard_at(c, i, t);
            if found[k].is_none() {
                found[k] = Some(t);
            }
        }
    }
    found
}

/// `T_κ` for every configuration the schedule discovers; undiscovered
/// configurations are absent.
pub fn discovery_times(
    schedule: &ListeningSchedule,
    intervals: &BeaconIntervalSet,
    channels: ChannelSet,
) -> BTreeMap<NetworkConfiguration, Slot> {
    let space = ConfigSpace::new(intervals, channels);
    discovery_vector(schedule, &space)
        .into_iter()
        .enumerate()
        .filter_map(|(i, t)| t.map(|t| (space.config(i), t)))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverageReport {
    pub discovered: usize,
    pub undiscovered: Vec<NetworkConfiguration>,
}

impl CoverageReport {
    pub fn is_complete(&self) -> bool {
        self.undiscovered.is_empty()
    }
}

pub fn coverage(schedule: &ListeningSchedule, intervals: &BeaconIntervalSet, channels: ChannelSet) -> CoverageReport {
    let space = ConfigSpace::new(intervals, channels);
    let found = discovery_vector(schedule, &space);
    let undiscovered: Vec<_> = found
        .iter()
        .enumerate()
        .filter(|(_, t)| t.is_none())
        .map(|(i, _)| space.config(i))
        .collect();
    CoverageReport {
        discovered: found.len() - undiscovered.len(),
        undiscovered,
    }
}

pub fn is_complete(schedule: &ListeningSchedule, intervals: &BeaconIntervalSet, channels: ChannelSet) -> bool {
    let space = ConfigSpace::new(intervals, channels);
    discovery_vector(schedule, &space).iter().all(Option::is_some)
}

/// Discovery slots of a complete schedule, in configuration order.
fn complete_times(
    schedule: &ListeningSchedule,
    intervals: &BeaconIntervalSet,
    channels: ChannelSet,
) -> Result<(ConfigSpace, Vec<Slot>)> {
    schedule.validate(channels)?;
    let space = ConfigSpace::new(intervals, channels);
    let found = discovery_vector(schedule, &space);
    let missing = found.iter().filter(|t| t.is_none()).count();
    if missing > 0 {
        return Err(Error::IncompleteSchedule { missing });
    }
    Ok((space, found.into_iter().map(Option::unwrap).collect()))
}

fn emdt_from_times(space: &ConfigSpace, times: &[Slot]) -> Rational {
    let per_channel = space.per_channel();
    let n_intervals = space.intervals().len();
    let mut total = Rational::zero();
    let mut start = 0;
    for &b in space.intervals() {
        let mut sum: i128 = 0;
        for c in 0..space.channels() {
            let base = c * per_channel + start;
            sum += times[base..base + b as usize].iter().map(|&t| t as i128).sum::<i128>();
        }
        total += Rational::new(sum, b as i128).unwrap();
        start += b as usize;
    }
    total / Rational::from_integer((n_intervals * space.channels()) as i128)
}

/// Expected mean discovery time under uniform channel, interval and offset
/// probabilities: `(1 / (|B||C|)) Σ_κ T_κ / b_κ`.
pub fn emdt(schedule: &ListeningSchedule, intervals: &BeaconIntervalSet, channels: ChannelSet) -> Result<Rational> {
    let (space, times) = complete_times(schedule, intervals, channels)?;
    Ok(emdt_from_times(&space, &times))
}

/// Mean discovery time over the networks of `environment`.
pub fn mdt(schedule: &ListeningSchedule, environment: &Environment) -> Result<Rational> {
    if environment.is_empty() {
        return Err(Error::InvalidArgument("MDT of an empty environment is undefined".into()));
    }
    let mut sum: i128 = 0;
    let mut undiscovered = 0;
    for (_, k) in &environment.networks {
        match first_scan_of(schedule, k) {
            Some(t) => sum += t as i128,
            None => undiscovered += 1,
        }
    }
    if undiscovered > 0 {
        return Err(Error::UndiscoveredNetworks { undiscovered });
    }
    Rational::new(sum, environment.len() as i128)
}

/// `min{t ∈ T_κ | (c_κ, t) ∈ L}`.
pub fn first_scan_of(schedule: &ListeningSchedule, k: &NetworkConfiguration) -> Option<Slot> {
    schedule
        .iter()
        .find(|&(t, c)| c == k.channel && offset_class(t, k.interval) == k.offset)
        .map(|(t, _)| t)
}

/// Slot in which the last configuration is discovered.
pub fn makespan(schedule: &ListeningSchedule, intervals: &BeaconIntervalSet, channels: ChannelSet) -> Result<Slot> {
    let (_, times) = complete_times(schedule, intervals, channels)?;
    Ok(times.into_iter().max().unwrap_or(0))
}

/// Number of consecutive scans (skipping idle slots) on different channels.
pub fn channel_switches(schedule: &ListeningSchedule) -> usize {
    let channels: Vec<_> = schedule.iter().map(|(_, c)| c).collect();
    channels.windows(2).filter(|w| w[0] != w[1]).count()
}

/// `(active, idle)` slot counts within `[1, makespan]`.
pub fn active_idle_counts(
    schedule: &ListeningSchedule,
    intervals: &BeaconIntervalSet,
    channels: ChannelSet,
) -> Result<(u64, u64)> {
    let span = makespan(schedule, intervals, channels)?;
    let active = schedule.iter().take_while(|&(t, _)| t <= span).count() as u64;
    Ok((active, span - active))
}

/// Whether the schedule has no idle slot in `[1, max(B)·|C|]` and, for every
/// `b ∈ B`, never scans the same (channel, offset class of `b`) twice within
/// `[1, b·|C|]`.
pub fn is_recursive(schedule: &ListeningSchedule, intervals: &BeaconIntervalSet, channels: ChannelSet) -> bool {
    let m = channels.count() as u64;
    if schedule.validate(channels).is_err() {
        return false;
    }
    if (1..=intervals.max() * m).any(|t| schedule.channel_at(t).is_none()) {
        return false;
    }
    intervals.intervals().iter().all(|&b| {
        let mut seen = vec![false; channels.count() * b as usize];
        schedule.iter().take_while(|&(t, _)| t <= b * m).all(|(t, c)| {
            let k = c * b as usize + (offset_class(t, b) - 1) as usize;
            !std::mem::replace(&mut seen[k], true)
        })
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiscoveryRecord {
    #[serde(flatten)]
    pub config: NetworkConfiguration,
    pub slot: Slot,
}

/// All metrics of a complete schedule.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub makespan: Slot,
    pub emdt: Rational,
    pub channel_switches: usize,
    pub active_slots: u64,
    pub idle_slots: u64,
    pub discovery_times: Vec<DiscoveryRecord>,
}

impl MetricsReport {
    pub fn compute(schedule: &ListeningSchedule, intervals: &BeaconIntervalSet, channels: ChannelSet) -> Result<Self> {
        let (space, times) = complete_times(schedule, intervals, channels)?;
        let makespan = times.iter().copied().max().unwrap_or(0);
        let active_slots = schedule.iter().take_while(|&(t, _)| t <= makespan).count() as u64;
        Ok(MetricsReport {
            makespan,
            emdt: emdt_from_times(&space, &times),
            channel_switches: channel_switches(schedule),
            active_slots,
            idle_slots: makespan - active_slots,
            discovery_times: times
                .iter()
                .enumerate()
                .map(|(i, &slot)| DiscoveryRecord {
                    config: space.config(i),
                    slot,
                })
                .collect(),
        })
    }

    pub const CSV_HEADER: &'static str = "makespan,emdt_num,emdt_den,switches,active,idle";

    /// Header plus one data row.
    pub fn to_csv(&self) -> String {
        format!(
            "{}\n{},{},{},{},{},{}\n",
            Self::CSV_HEADER,
            self.makespan,
            self.emdt.numer(),
            self.emdt.denom(),
            self.channel_switches,
            self.active_slots,
            self.idle_slots
        )
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("metrics always serialize")
    }
}
