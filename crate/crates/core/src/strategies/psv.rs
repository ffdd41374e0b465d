use crate::config::ChannelSet;
use crate::intervals::BeaconIntervalSet;
use crate::schedule::ListeningSchedule;

/// Passive scan: listen on each channel in turn for `max(B)` slots.
pub fn psv(intervals: &BeaconIntervalSet, channels: ChannelSet) -> ListeningSchedule {
    let span = intervals.max();
    channels
        .iter()
        .flat_map(|c| {
            let start = c as u64 * span;
            (start + 1..=start + span).map(move |t| (t, c))
        })
        .collect()
}
