//! Listening schedules: at most one scanned channel per slot.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::config::{ChannelId, ChannelSet};
use crate::error::{Error, Result};
use crate::intervals::{BeaconIntervalSet, Slot};

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ListeningSchedule {
    entries: BTreeMap<Slot, ChannelId>,
}

impl ListeningSchedule {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a schedule from `(slot, channel)` pairs, rejecting slot 0 and
    /// slots listed twice.
    pub fn from_entries<I: IntoIterator<Item = (Slot, ChannelId)>>(entries: I) -> Result<Self> {
        let mut s = ListeningSchedule::new();
        for (t, c) in entries {
            s.scan(t, c)?;
        }
        Ok(s)
    }

    /// Scans channel `c` in slot `t`.
    pub fn scan(&mut self, t: Slot, c: ChannelId) -> Result<()> {
        if t == 0 {
            return Err(Error::InvalidSchedule("slots are numbered from 1".into()));
        }
        if let Some(prev) = self.entries.get(&t) {
            return Err(Error::InvalidSchedule(format!("slot {t} already scans channel {prev}")));
        }
        self.entries.insert(t, c);
        Ok(())
    }

    pub fn remove(&mut self, t: Slot) -> Option<ChannelId> {
        self.entries.remove(&t)
    }

    /// Replaces whatever is scanned in slot `t` with channel `c`.
    pub fn set(&mut self, t: Slot, c: ChannelId) {
        assert!(t >= 1, "slots are numbered from 1");
        self.entries.insert(t, c);
    }

    pub fn channel_at(&self, t: Slot) -> Option<ChannelId> {
        self.entries.get(&t).copied()
    }

    /// Entries in slot order.
    pub fn iter(&self) -> impl DoubleEndedIterator<Item = (Slot, ChannelId)> + '_ {
        self.entries.iter().map(|(&t, &c)| (t, c))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Largest scanned slot, 0 for the empty schedule.
    pub fn horizon(&self) -> Slot {
        self.entries.keys().next_back().copied().unwrap_or(0)
    }

    /// Errors if some entry names a channel outside `channels`.
    pub fn validate(&self, channels: ChannelSet) -> Result<()> {
        match self.iter().find(|&(_, c)| !channels.contains(c)) {
            Some((t, c)) => Err(Error::InvalidSchedule(format!(
                "slot {t} scans channel {c}, but only {} channel(s) exist",
                channels.count()
            ))),
            None => Ok(()),
        }
    }

    /// Drops every entry after slot `t`.
    pub fn truncate_after(&mut self, t: Slot) {
        self.entries.split_off(&(t + 1));
    }

    /// Channel per slot in `[1, horizon]`, `None` for idle slots.
    pub fn to_slot_vec(&self) -> Vec<Option<ChannelId>> {
        let mut v = vec![None; self.horizon() as usize];
        for (t, c) in self.iter() {
            v[(t - 1) as usize] = Some(c);
        }
        v
    }
}

impl FromIterator<(Slot, ChannelId)> for ListeningSchedule {
    /// Later entries for the same slot win.
    fn from_iter<I: IntoIterator<Item = (Slot, ChannelId)>>(iter: I) -> Self {
        let mut s = ListeningSchedule::new();
        for (t, c) in iter {
            s.set(t, c);
        }
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScheduleEntry {
    pub slot: Slot,
    pub channel: ChannelId,
}

/// On-disk form of a schedule together with the instance it was built for:
/// `{"channels": m, "intervals": [...], "entries": [{"slot": t, "channel": c}, ...]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScheduleDocument {
    pub channels: ChannelSet,
    pub intervals: Vec<u64>,
    pub entries: Vec<ScheduleEntry>,
}

impl ScheduleDocument {
    pub fn new(intervals: &BeaconIntervalSet, channels: ChannelSet, schedule: &ListeningSchedule) -> Self {
        ScheduleDocument {
            channels,
            intervals: intervals.intervals().to_vec(),
            entries: schedule
                .iter()
                .map(|(slot, channel)| ScheduleEntry { slot, channel })
                .collect(),
        }
    }

    /// Validates the document and splits it into its parts.
    pub fn into_parts(self) -> Result<(BeaconIntervalSet, ChannelSet, ListeningSchedule)> {
        let intervals = BeaconIntervalSet::classify(&self.intervals)?;
        if self.entries.windows(2).any(|w| w[0].slot >= w[1].slot) {
            return Err(Error::InvalidSchedule("slots must be strictly increasing".into()));
        }
        let schedule = ListeningSchedule::from_entries(self.entries.iter().map(|e| (e.slot, e.channel)))?;
        schedule.validate(self.channels)?;
        Ok((intervals, self.channels, schedule))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("schedule documents always serialize")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}
