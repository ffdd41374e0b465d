//! Schedule constructors: PSV, the GREEDY family, CHAN TRAIN and OPT_B2.

mod chan_train;
mod greedy;
mod opt_b2;
mod psv;
mod state;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use chan_train::{chan_train, chan_train_with, TrainLookahead};
pub use greedy::{greedy, is_greedy, Tiebreak};
pub use opt_b2::opt_b2;
pub use psv::psv;
pub use state::DiscoveryState;

use crate::config::ChannelSet;
use crate::error::{Error, Result};
use crate::genopt::{genopt, GenoptOptions};
use crate::intervals::BeaconIntervalSet;
use crate::schedule::ListeningSchedule;

/// Every strategy the toolkit can build a schedule with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    Psv,
    GreedyRnd,
    GreedyDtr,
    GreedyRndSwt,
    GreedyDtrSwt,
    ChanTrain,
    OptB2,
    Genopt,
}

impl Strategy {
    pub const ALL: [Strategy; 8] = [
        Strategy::Psv,
        Strategy::GreedyRnd,
        Strategy::GreedyDtr,
        Strategy::GreedyRndSwt,
        Strategy::GreedyDtrSwt,
        Strategy::ChanTrain,
        Strategy::OptB2,
        Strategy::Genopt,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::Psv => "psv",
            Strategy::GreedyRnd => "greedy-rnd",
            Strategy::GreedyDtr => "greedy-dtr",
            Strategy::GreedyRndSwt => "greedy-rnd-swt",
            Strategy::GreedyDtrSwt => "greedy-dtr-swt",
            Strategy::ChanTrain => "chan-train",
            Strategy::OptB2 => "opt-b2",
            Strategy::Genopt => "genopt",
        }
    }

    /// The GREEDY tiebreak this strategy stands for, if any.
    pub fn tiebreak(self, seed: u64) -> Option<Tiebreak> {
        match self {
            Strategy::GreedyRnd => Some(Tiebreak::Rnd { seed }),
            Strategy::GreedyDtr => Some(Tiebreak::Dtr),
            Strategy::GreedyRndSwt => Some(Tiebreak::RndSwt { seed }),
            Strategy::GreedyDtrSwt => Some(Tiebreak::DtrSwt),
            _ => None,
        }
    }

    /// Builds a schedule. `opt-b2` needs exactly two intervals; `genopt` runs
    /// with `GenoptOptions::default()` seeded by `seed`.
    pub fn build(self, intervals: &BeaconIntervalSet, channels: ChannelSet, seed: u64) -> Result<ListeningSchedule> {
        if let Some(tb) = self.tiebreak(seed) {
            return Ok(greedy(intervals, channels, tb));
        }
        match self {
            Strategy::Psv => Ok(psv(intervals, channels)),
            Strategy::ChanTrain => Ok(chan_train(intervals, channels)),
            Strategy::OptB2 => match intervals.intervals() {
                &[b1, b2] => opt_b2(b1, b2, channels),
                other => Err(Error::InvalidArgument(format!(
                    "opt-b2 needs exactly two intervals, got {}",
                    other.len()
                ))),
            },
            Strategy::Genopt => {
                let options = GenoptOptions {
                    seed,
                    ..GenoptOptions::default()
                };
                genopt(intervals, channels, &options)?.into_schedule()
            }
            _ => unreachable!(),
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Strategy::ALL
            .into_iter()
            .find(|st| st.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown strategy {s:?}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::is_complete;

    #[test]
    fn names_roundtrip() {
        for st in Strategy::ALL {
            assert_eq!(st.name().parse::<Strategy>().unwrap(), st);
            assert_eq!(serde_json::to_string(&st).unwrap(), format!("\"{}\"", st.name()));
        }
        assert!("greedy".parse::<Strategy>().is_err());
    }

    #[test]
    fn every_strategy_builds_complete_schedules() {
        let set = BeaconIntervalSet::classify(&[1, 2]).unwrap();
        let ch = ChannelSet::new(2).unwrap();
        for st in Strategy::ALL {
            let s = st.build(&set, ch, 1).unwrap();
            assert!(is_complete(&s, &set, ch), "{st}");
        }
        let three = BeaconIntervalSet::classify(&[1, 2, 4]).unwrap();
        assert!(Strategy::OptB2.build(&three, ch, 0).is_err());
    }
}
