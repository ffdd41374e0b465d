//! Listening schedules for passive discovery of beaconing networks spread
//! over several channels.
//!
//! A scanner listens on at most one channel per slot. Networks beacon
//! periodically with an interval from a [`BeaconIntervalSet`] and an
//! unknown offset; the modules here build schedules, measure how fast they
//! discover every (channel, interval, offset) configuration, and search for
//! optimal ones.

pub mod config;
pub mod error;
pub mod genopt;
pub mod intervals;
pub mod metrics;
pub mod rational;
pub mod repair;
pub mod sampling;
pub mod schedule;
pub mod simulator;
pub mod strategies;

pub use config::{enumerate_configurations, ChannelId, ChannelSet, ConfigSpace, Environment, NetworkConfiguration, NetworkId};
pub use error::{Error, Result};
pub use intervals::{beacon_offset_at, BeaconIntervalSet, Family, Interval, Slot};
pub use metrics::MetricsReport;
pub use rational::Rational;
pub use repair::repair_to_lcm_bound;
pub use schedule::{ListeningSchedule, ScheduleDocument};
pub use strategies::Strategy;
