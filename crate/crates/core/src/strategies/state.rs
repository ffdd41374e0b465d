use crate::config::{ChannelId, ChannelSet, ConfigSpace};
use crate::intervals::{BeaconIntervalSet, Slot};

/// Which configurations have been discovered so far.
#[derive(Debug, Clone)]
pub struct DiscoveryState {
    space: ConfigSpace,
    discovered: Vec<bool>,
    remaining: usize,
}

impl DiscoveryState {
    pub fn new(intervals: &BeaconIntervalSet, channels: ChannelSet) -> Self {
        let space = ConfigSpace::new(intervals, channels);
        let n = space.len();
        DiscoveryState {
            space,
            discovered: vec![false; n],
            remaining: n,
        }
    }

    pub fn space(&self) -> &ConfigSpace {
        &self.space
    }

    pub fn remaining(&self) -> usize {
        self.remaining
    }

    pub fn is_done(&self) -> bool {
        self.remaining == 0
    }

    pub fn is_discovered(&self, idx: usize) -> bool {
        self.discovered[idx]
    }

    /// `|{b ∈ B : (c, b, δ_b(t)) not yet discovered}|`.
    pub fn new_detections(&self, c: ChannelId, t: Slot) -> usize {
        (0..self.space.intervals().len())
            .filter(|&i| !self.discovered[self.space.heard_at(c, i, t)])
            .count()
    }

    /// Marks everything heard on `c` in slot `t`; returns how many were new.
    pub fn scan(&mut self, c: ChannelId, t: Slot) -> usize {
        let mut fresh = 0;
        for i in 0..self.space.intervals().len() {
            let k = self.space.heard_at(c, i, t);
            if !self.discovered[k] {
                self.discovered[k] = true;
                fresh += 1;
            }
        }
        self.remaining -= fresh;
        fresh
    }

    /// Detection count of every channel in slot `t`.
    pub fn counts(&self, t: Slot) -> Vec<usize> {
        (0..self.space.channels()).map(|c| self.new_detections(c, t)).collect()
    }
}
