//! Channels, network configurations and environments.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::intervals::{offset_class, BeaconIntervalSet, Interval, Slot};

pub type ChannelId = usize;

/// The channels `0..count` a scanner may listen on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "usize", into = "usize")]
pub struct ChannelSet(usize);

impl ChannelSet {
    pub fn new(count: usize) -> Result<Self> {
        if count == 0 {
            return Err(Error::InvalidArgument("at least one channel is required".into()));
        }
        Ok(ChannelSet(count))
    }

    pub fn count(self) -> usize {
        self.0
    }

    pub fn contains(self, c: ChannelId) -> bool {
        c < self.0
    }

    pub fn iter(self) -> std::ops::Range<ChannelId> {
        0..self.0
    }
}

impl TryFrom<usize> for ChannelSet {
    type Error = Error;
    fn try_from(n: usize) -> Result<Self> {
        ChannelSet::new(n)
    }
}

impl From<ChannelSet> for usize {
    fn from(c: ChannelSet) -> usize {
        c.0
    }
}

/// A (channel, interval, offset) triple. Ordering is channel-major, then
/// interval, then offset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct NetworkConfiguration {
    pub channel: ChannelId,
    pub interval: Interval,
    pub offset: Interval,
}

impl NetworkConfiguration {
    pub fn new(channel: ChannelId, interval: Interval, offset: Interval) -> Result<Self> {
        if interval == 0 || offset == 0 || offset > interval {
            return Err(Error::InvalidArgument(format!("offset {offset} outside [1, {interval}]")));
        }
        Ok(NetworkConfiguration {
            channel,
            interval,
            offset,
        })
    }

    /// Whether networks with this configuration beacon in slot `t`.
    pub fn beacons_at(&self, t: Slot) -> bool {
        t >= 1 && offset_class(t, self.interval) == self.offset
    }

    pub fn is_valid_for(&self, intervals: &BeaconIntervalSet, channels: ChannelSet) -> bool {
        channels.contains(self.channel) && intervals.contains(self.interval) && (1..=self.interval).contains(&self.offset)
    }
}

impl fmt::Display for NetworkConfiguration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.channel, self.interval, self.offset)
    }
}

/// All configurations for `(B, C)` in channel-major, interval, offset order.
pub fn enumerate_configurations(intervals: &BeaconIntervalSet, channels: ChannelSet) -> Vec<NetworkConfiguration> {
    let mut out = Vec::with_capacity(channels.count() * intervals.offsets_per_channel() as usize);
    for channel in channels.iter() {
        for &interval in intervals.intervals() {
            for offset in 1..=interval {
                out.push(NetworkConfiguration {
                    channel,
                    interval,
                    offset,
                });
            }
        }
    }
    out
}

/// Dense indexing of the configuration space, consistent with
/// [`enumerate_configurations`].
#[derive(Debug, Clone)]
pub struct ConfigSpace {
    intervals: Vec<Interval>,
    /// Start of each interval's offset block within one channel.
    block_start: Vec<usize>,
    per_channel: usize,
    channels: usize,
}

impl ConfigSpace {
    pub fn new(intervals: &BeaconIntervalSet, channels: ChannelSet) -> Self {
        let mut block_start = Vec::with_capacity(intervals.len());
        let mut acc = 0usize;
        for &b in intervals.intervals() {
            block_start.push(acc);
            acc += b as usize;
        }
        ConfigSpace {
            intervals: intervals.intervals().to_vec(),
            block_start,
            per_channel: acc,
            channels: channels.count(),
        }
    }

    pub fn len(&self) -> usize {
        self.per_channel * self.channels
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn per_channel(&self) -> usize {
        self.per_channel
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    /// Index of `(c, B[interval_idx], offset)`.
    #[inline]
    pub fn index(&self, channel: ChannelId, interval_idx: usize, offset: Interval) -> usize {
        channel * self.per_channel + self.block_start[interval_idx] + (offset - 1) as usize
    }

    /// Index of the configuration with interval `B[interval_idx]` that channel
    /// `c` would hear in slot `t`.
    #[inline]
    pub fn heard_at(&self, channel: ChannelId, interval_idx: usize, t: Slot) -> usize {
        self.index(channel, interval_idx, offset_class(t, self.intervals[interval_idx]))
    }

    pub fn index_of(&self, k: &NetworkConfiguration) -> Option<usize> {
        if k.channel >= self.channels || k.offset == 0 || k.offset > k.interval {
            return None;
        }
        let i = self.intervals.binary_search(&k.interval).ok()?;
        Some(self.index(k.channel, i, k.offset))
    }

    pub fn config(&self, idx: usize) -> NetworkConfiguration {
        let channel = idx / self.per_channel;
        let rem = idx % self.per_channel;
        let i = match self.block_start.binary_search(&rem) {
            Ok(i) => i,
            Err(i) => i - 1,
        };
        NetworkConfiguration {
            channel,
            interval: self.intervals[i],
            offset: (rem - self.block_start[i]) as Interval + 1,
        }
    }
}

/// Identifier of a network within an [`Environment`].
pub type NetworkId = usize;

/// The networks around a scanner, each with its configuration.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Environment {
    pub networks: Vec<(NetworkId, NetworkConfiguration)>,
}

impl Environment {
    pub fn len(&self) -> usize {
        self.networks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.networks.is_empty()
    }

    /// Checks every configuration against `(B, C)`.
    pub fn validate(&self, intervals: &BeaconIntervalSet, channels: ChannelSet) -> Result<()> {
        match self.networks.iter().find(|(_, k)| !k.is_valid_for(intervals, channels)) {
            Some((id, k)) => Err(Error::InvalidArgument(format!(
                "network {id} has configuration {k} outside the configuration space"
            ))),
            None => Ok(()),
        }
    }

    /// Whether every configuration of `(B, C)` is used by exactly one network.
    pub fn is_complete(&self, intervals: &BeaconIntervalSet, channels: ChannelSet) -> bool {
        let space = ConfigSpace::new(intervals, channels);
        let mut seen = vec![false; space.len()];
        for (_, k) in &self.networks {
            match space.index_of(k) {
                Some(i) if !seen[i] => seen[i] = true,
                _ => return false,
            }
        }
        seen.iter().all(|&s| s)
    }
}
