//! Pulling late discoveries back within `LCM(B)·|C|` slots.

use crate::config::{ChannelSet, ConfigSpace};
use crate::error::Result;
use crate::intervals::{BeaconIntervalSet, Slot};
use crate::metrics::discovery_vector;
use crate::schedule::ListeningSchedule;

/// Rewrites a complete schedule so that its makespan is at most
/// `LCM(B)·|C|` while no configuration is discovered later than before.
///
/// For a configuration `κ = (c, b, δ)` found after the bound, the slots
/// `δ + i·LCM(B)`, `i < |C|`, are all beaconing slots of `κ` and none of them
/// scans `c`. Either one of them is idle, and `c` is scanned there, or some
/// other channel `c'` is scanned twice among them; the later of those scans
/// repeats the offset vector of the earlier one, discovers nothing, and is
/// handed over to `c`. Scans after the bound discover nothing once every
/// configuration has been pulled in, and are dropped.
pub fn repair_to_lcm_bound(
    schedule: &ListeningSchedule,
    intervals: &BeaconIntervalSet,
    channels: ChannelSet,
) -> Result<ListeningSchedule> {
    schedule.validate(channels)?;
    let space = ConfigSpace::new(intervals, channels);
    let lcm = intervals.lcm();
    let m = channels.count() as u64;
    let bound = lcm * m;

    let mut out = schedule.clone();
    let mut found = discovery_vector(&out, &space);
    let missing = found.iter().filter(|t| t.is_none()).count();
    if missing > 0 {
        return Err(crate::error::Error::IncompleteSchedule { missing });
    }

    loop {
        // Latest late configuration first; ties by configuration order.
        let late = found
            .iter()
            .enumerate()
            .filter_map(|(i, t)| t.filter(|&t| t > bound).map(|t| (t, i)))
            .max_by_key(|&(t, i)| (t, std::cmp::Reverse(i)));
        let Some((_, idx)) = late else { break };
        let k = space.config(idx);
        let window: Vec<Slot> = (0..m).map(|i| k.offset + i * lcm).collect();

        if let Some(&idle) = window.iter().find(|&&t| out.channel_at(t).is_none()) {
            out.set(idle, k.channel);
        } else {
            let mut first_seen = vec![None; channels.count()];
            let mut duplicate = None;
            for &t in &window {
                let c = out.channel_at(t).unwrap();
                debug_assert_ne!(c, k.channel);
                if first_seen[c].is_some() {
                    duplicate = Some(t);
                    break;
                }
                first_seen[c] = Some(t);
            }
            let t = duplicate.expect("pigeonhole: |C| scans over at most |C|-1 other channels");
            out.set(t, k.channel);
        }
        found = discovery_vector(&out, &space);
    }
    out.truncate_after(bound);
    Ok(out)
}
