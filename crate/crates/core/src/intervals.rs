//! Beacon interval sets and the slot/offset arithmetic built on them.
//!
//! Intervals are unitless multiples of the slot length. Slots are numbered
//! from 1, and a network with interval `b` and offset `δ ∈ [1, b]` beacons in
//! slots `δ, δ + b, δ + 2b, …`.

use std::fmt;

use num_integer::Integer;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub type Interval = u64;
pub type Slot = u64;

/// Largest beacon order permitted by IEEE 802.15.4 (`b = 2^BO`).
pub const IEEE802154_MAX_ORDER: u32 = 14;
/// Largest interval representable in the 16-bit IEEE 802.11 beacon interval field.
pub const IEEE80211_MAX_INTERVAL: Interval = (1 << 16) - 1;

/// The offset class of slot `t` for interval `b`: the unique `δ ∈ [1, b]` such
/// that `t ∈ {δ + i·b}`.
pub fn beacon_offset_at(t: Slot, b: Interval) -> Result<Interval> {
    if t < 1 {
        return Err(Error::InvalidArgument("slots are numbered from 1".into()));
    }
    if b < 1 {
        return Err(Error::InvalidArgument("beacon interval must be positive".into()));
    }
    Ok(offset_class(t, b))
}

/// Unchecked variant of [`beacon_offset_at`]; callers guarantee `t, b ≥ 1`.
#[inline]
pub fn offset_class(t: Slot, b: Interval) -> Interval {
    (t - 1) % b + 1
}

/// First slot `s ≥ t` in which offset `delta` of interval `b` beacons.
#[inline]
pub fn next_beacon_slot(t: Slot, b: Interval, delta: Interval) -> Slot {
    let cur = offset_class(t, b);
    t + (delta + b - cur) % b
}

/// Nested families of interval sets, most specific last.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Family {
    /// Any finite set.
    F1,
    /// `max(B) = LCM(B)`.
    F2,
    /// Every interval divides every larger one.
    F3,
    /// Every interval is `k·c^e` for a common coefficient `k` and base `c`.
    F4,
}

impl Family {
    /// Whether a set classified as `self` also belongs to `other`.
    pub fn is_within(self, other: Family) -> bool {
        self >= other
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Family::F1 => "F1",
            Family::F2 => "F2",
            Family::F3 => "F3",
            Family::F4 => "F4",
        };
        f.write_str(s)
    }
}

/// A validated, strictly increasing set of beacon intervals with its derived
/// GCD, LCM and family classification.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BeaconIntervalSet {
    intervals: Vec<Interval>,
    gcd: Interval,
    lcm: Interval,
    family: Family,
    f4_base: Option<Interval>,
    ieee802154: bool,
    ieee80211: bool,
}

impl BeaconIntervalSet {
    /// Sorts, deduplicates and classifies `intervals`.
    pub fn classify(intervals: &[Interval]) -> Result<Self> {
        if intervals.is_empty() {
            return Err(Error::InvalidIntervals("the set is empty".into()));
        }
        if let Some(bad) = intervals.iter().find(|&&b| b == 0) {
            return Err(Error::InvalidIntervals(format!("interval {bad} is not positive")));
        }
        let mut sorted = intervals.to_vec();
        sorted.sort_unstable();
        sorted.dedup();

        let gcd = sorted.iter().fold(0, |g, &b| g.gcd(&b));
        let mut lcm: Interval = 1;
        for &b in &sorted {
            lcm = (lcm / lcm.gcd(&b))
                .checked_mul(b)
                .ok_or_else(|| Error::InvalidIntervals("LCM overflows 64 bits".into()))?;
        }
        let max = *sorted.last().unwrap();

        let f4_base = power_base(&sorted, gcd);
        let family = if f4_base.is_some() {
            Family::F4
        } else if sorted.windows(2).all(|w| w[1] % w[0] == 0) {
            Family::F3
        } else if lcm == max {
            Family::F2
        } else {
            Family::F1
        };
        let ieee802154 = sorted
            .iter()
            .all(|&b| b.is_power_of_two() && b.trailing_zeros() <= IEEE802154_MAX_ORDER);
        let ieee80211 = sorted.iter().all(|&b| b <= IEEE80211_MAX_INTERVAL);

        Ok(BeaconIntervalSet {
            intervals: sorted,
            gcd,
            lcm,
            family,
            f4_base,
            ieee802154,
            ieee80211,
        })
    }

    /// Divides every interval by the set's GCD. A schedule for the result with
    /// slot length `τ·d` is a schedule for `self` with slot length `τ`.
    pub fn normalize_gcd(&self) -> (BeaconIntervalSet, Interval) {
        let d = self.gcd;
        let scaled: Vec<_> = self.intervals.iter().map(|b| b / d).collect();
        let normalized = BeaconIntervalSet::classify(&scaled).expect("dividing by the GCD keeps the set valid");
        (normalized, d)
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn min(&self) -> Interval {
        self.intervals[0]
    }

    pub fn max(&self) -> Interval {
        *self.intervals.last().unwrap()
    }

    /// `Σ_{b∈B} b`, the number of configurations per channel.
    pub fn offsets_per_channel(&self) -> u64 {
        self.intervals.iter().sum()
    }

    pub fn gcd(&self) -> Interval {
        self.gcd
    }

    pub fn lcm(&self) -> Interval {
        self.lcm
    }

    pub fn family(&self) -> Family {
        self.family
    }

    /// Smallest base `c ≥ 2` such that the normalized set consists of powers of `c`.
    /// `None` for sets outside F4 and for singletons (where every base works).
    pub fn f4_base(&self) -> Option<Interval> {
        self.f4_base.filter(|&c| c >= 2)
    }

    pub fn is_ieee802154(&self) -> bool {
        self.ieee802154
    }

    pub fn is_ieee80211(&self) -> bool {
        self.ieee80211
    }

    pub fn contains(&self, b: Interval) -> bool {
        self.intervals.binary_search(&b).is_ok()
    }

    pub fn index_of(&self, b: Interval) -> Option<usize> {
        self.intervals.binary_search(&b).ok()
    }
}

impl fmt::Debug for BeaconIntervalSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "B{:?}[{}]", self.intervals, self.family)
    }
}

impl fmt::Display for BeaconIntervalSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, b) in self.intervals.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{b}")?;
        }
        f.write_str("}")
    }
}

#[derive(Serialize, Deserialize)]
struct IntervalsWire {
    intervals: Vec<Interval>,
}

// Only the intervals go over the wire; everything else is recomputed on load.
impl Serialize for BeaconIntervalSet {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        IntervalsWire {
            intervals: self.intervals.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for BeaconIntervalSet {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let w = IntervalsWire::deserialize(d)?;
        BeaconIntervalSet::classify(&w.intervals).map_err(serde::de::Error::custom)
    }
}

/// Base `c` such that every `b / gcd` is a power of `c`, if one exists.
///
/// After dividing by the GCD the common coefficient must be 1, so the smallest
/// normalized element above 1 is itself a power of `c`; its integer roots are
/// the only candidates.
fn power_base(sorted: &[Interval], gcd: Interval) -> Option<Interval> {
    let normalized: Vec<_> = sorted.iter().map(|b| b / gcd).collect();
    let Some(&pivot) = normalized.iter().find(|&&b| b > 1) else {
        // {1}: a single element is a power of any base.
        return Some(1);
    };
    let max_exp = 63 - pivot.leading_zeros();
    let mut candidates: Vec<Interval> = (1..=max_exp)
        .filter_map(|k| integer_root(pivot, k))
        .filter(|&c| c >= 2)
        .collect();
    candidates.sort_unstable();
    candidates.dedup();
    candidates
        .into_iter()
        .find(|&c| normalized.iter().all(|&b| is_power_of(b, c)))
}

/// `r` with `r^k = n`, if `n` is a perfect `k`-th power.
fn integer_root(n: u64, k: u32) -> Option<u64> {
    if k == 1 {
        return Some(n);
    }
    let guess = (n as f64).powf(1.0 / k as f64).round() as u64;
    (guess.saturating_sub(1)..=guess + 1).find(|&r| r.checked_pow(k) == Some(n))
}

fn is_power_of(mut n: u64, c: u64) -> bool {
    while n > 1 {
        if !n.is_multiple_of(c) {
            return false;
        }
        n /= c;
    }
    n == 1
}
