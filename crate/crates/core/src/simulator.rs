//! Slot-by-slot execution of schedules against environments of networks.

use rand::seq::SliceRandom;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::{enumerate_configurations, ChannelSet, Environment, NetworkConfiguration, NetworkId};
use crate::error::{Error, Result};
use crate::intervals::{BeaconIntervalSet, Slot};
use crate::metrics::is_complete;
use crate::rational::Rational;
use crate::schedule::ListeningSchedule;

/// One network per configuration, ids in enumeration order.
pub fn complete_environment(intervals: &BeaconIntervalSet, channels: ChannelSet) -> Environment {
    Environment {
        networks: enumerate_configurations(intervals, channels)
            .into_iter()
            .enumerate()
            .collect(),
    }
}

/// Each configuration `(c, b, δ)` used by `LCM(B)/b` networks, so that
/// configurations appear in proportion to their probability. The MDT of a
/// complete schedule over this environment equals its EMDT.
pub fn proportional_environment(intervals: &BeaconIntervalSet, channels: ChannelSet) -> Environment {
    let lcm = intervals.lcm();
    let networks = enumerate_configurations(intervals, channels)
        .into_iter()
        .flat_map(|k| std::iter::repeat_n(k, (lcm / k.interval) as usize))
        .enumerate()
        .collect();
    Environment { networks }
}

/// `n` networks with channel, interval and offset drawn uniformly and
/// independently.
pub fn sample_environment(intervals: &BeaconIntervalSet, channels: ChannelSet, n: usize, seed: u64) -> Environment {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let networks = (0..n)
        .map(|id| {
            let channel = rng.gen_range(0..channels.count());
            let interval = *intervals.intervals().choose(&mut rng).unwrap();
            let offset = rng.gen_range(1..=interval);
            (
                id,
                NetworkConfiguration {
                    channel,
                    interval,
                    offset,
                },
            )
        })
        .collect();
    Environment { networks }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimulationResult {
    /// Environment seed, if the environment was sampled.
    pub seed: Option<u64>,
    /// Discovery slot per network, `None` if never discovered.
    pub discovered: Vec<(NetworkId, Option<Slot>)>,
    /// Mean discovery time; `None` if the environment is empty or some
    /// network stays undiscovered.
    pub mdt: Option<Rational>,
}

impl SimulationResult {
    pub fn undiscovered(&self) -> usize {
        self.discovered.iter().filter(|(_, t)| t.is_none()).count()
    }
}

/// Steps through the schedule slot by slot; a network is discovered the
/// first time the scanner listens on its channel while it beacons.
pub fn run_discovery(schedule: &ListeningSchedule, environment: &Environment) -> SimulationResult {
    let mut found: Vec<Option<Slot>> = vec![None; environment.len()];
    let mut pending = environment.len();
    for (t, c) in schedule.iter() {
        if pending == 0 {
            break;
        }
        for (slot, (_, k)) in found.iter_mut().zip(&environment.networks) {
            if slot.is_none() && k.channel == c && k.beacons_at(t) {
                *slot = Some(t);
                pending -= 1;
            }
        }
    }
    let mdt = if pending == 0 && !found.is_empty() {
        let sum: i128 = found.iter().map(|t| t.unwrap() as i128).sum();
        Some(Rational::new(sum, found.len() as i128).unwrap())
    } else {
        None
    };
    SimulationResult {
        seed: None,
        discovered: environment.networks.iter().map(|(id, _)| *id).zip(found).collect(),
        mdt,
    }
}

/// Seed of trial `i`: one ChaCha stream per trial.
pub fn trial_seed(seed: u64, trial: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng.next_u64()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonteCarlo {
    pub mean: Rational,
    /// Half-width of the normal-approximation 95% confidence interval.
    pub half_width: f64,
    pub trials: Vec<SimulationResult>,
}

impl MonteCarlo {
    pub fn contains(&self, value: Rational) -> bool {
        (self.mean.to_f64() - value.to_f64()).abs() <= self.half_width
    }
}

/// Mean MDT over `trials` sampled environments of `n` networks each.
pub fn monte_carlo_emdt(
    schedule: &ListeningSchedule,
    intervals: &BeaconIntervalSet,
    channels: ChannelSet,
    trials: usize,
    n: usize,
    seed: u64,
) -> Result<MonteCarlo> {
    if trials < 2 {
        return Err(Error::InvalidArgument("at least two trials are needed".into()));
    }
    if n == 0 {
        return Err(Error::InvalidArgument("each trial needs at least one network".into()));
    }
    if !is_complete(schedule, intervals, channels) {
        return Err(Error::InvalidSchedule(
            "Monte Carlo estimation needs a complete schedule".into(),
        ));
    }
    let results: Vec<SimulationResult> = (0..trials as u64)
        .map(|i| {
            let s = trial_seed(seed, i);
            let env = sample_environment(intervals, channels, n, s);
            SimulationResult {
                seed: Some(s),
                ..run_discovery(schedule, &env)
            }
        })
        .collect();
    let values: Vec<Rational> = results.iter().map(|r| r.mdt.expect("complete schedule")).collect();
    let mean = values.iter().copied().sum::<Rational>() / Rational::from_integer(trials as i128);
    let m = mean.to_f64();
    let var = values.iter().map(|v| (v.to_f64() - m).powi(2)).sum::<f64>() / (trials - 1) as f64;
    Ok(MonteCarlo {
        mean,
        half_width: 1.96 * (var / trials as f64).sqrt(),
        trials: results,
    })
}

/// `trial,seed,mdt_num,mdt_den` with `NA` for undefined MDTs.
pub fn simulation_csv(results: &[SimulationResult]) -> String {
    let mut out = String::from("trial,seed,mdt_num,mdt_den\n");
    for (i, r) in results.iter().enumerate() {
        let seed = r.seed.map_or("NA".to_string(), |s| s.to_string());
        match r.mdt {
            Some(m) => out.push_str(&format!("{i},{seed},{},{}\n", m.numer(), m.denom())),
            None => out.push_str(&format!("{i},{seed},NA,NA\n")),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ConfigSpace;
    use crate::metrics::{discovery_times, emdt, mdt};
    use crate::strategies::psv;

    fn b(v: &[u64]) -> BeaconIntervalSet {
        BeaconIntervalSet::classify(v).unwrap()
    }

    #[test]
    fn complete_environment_sizes() {
        let ch = |n| ChannelSet::new(n).unwrap();
        assert_eq!(complete_environment(&b(&[1, 2]), ch(2)).len(), 6);
        assert_eq!(complete_environment(&b(&[1]), ch(1)).len(), 1);
        let env = complete_environment(&b(&[2, 3, 5]), ch(3));
        assert_eq!(env.len(), 30);
        assert!(env.is_complete(&b(&[2, 3, 5]), ch(3)));
    }

    #[test]
    fn simulation_matches_formulas() {
        let set = b(&[1, 2]);
        let ch = ChannelSet::new(2).unwrap();
        let env = complete_environment(&set, ch);
        let opt = ListeningSchedule::from_entries([(1, 0), (2, 1), (3, 1), (4, 0)]).unwrap();
        let r = run_discovery(&opt, &env);
        assert_eq!(r.mdt, Some(Rational::new(13, 6).unwrap()));
        assert_eq!(r.mdt.unwrap(), mdt(&opt, &env).unwrap());

        let weighted = proportional_environment(&set, ch);
        assert_eq!(weighted.len(), 8);
        let r2 = run_discovery(&opt, &weighted);
        assert_eq!(r2.mdt, Some(Rational::from_integer(2)));
        assert_eq!(r2.mdt.unwrap(), emdt(&opt, &set, ch).unwrap());

        let times = discovery_times(&opt, &set, ch);
        for ((_, k), (_, t)) in env.networks.iter().zip(&r.discovered) {
            assert_eq!(times.get(k).copied(), *t);
        }
    }

    #[test]
    fn undiscovered_and_empty() {
        let set = b(&[1, 2]);
        let ch = ChannelSet::new(2).unwrap();
        let s = ListeningSchedule::from_entries([(1, 0), (2, 0)]).unwrap();
        let r = run_discovery(&s, &complete_environment(&set, ch));
        assert_eq!(r.undiscovered(), 3);
        assert_eq!(r.mdt, None);
        let r = run_discovery(&s, &Environment::default());
        assert_eq!(r.mdt, None);
        assert!(r.discovered.is_empty());
    }

    #[test]
    fn sampling_is_seeded_and_uniform() {
        let set = b(&[1, 2, 4]);
        let ch = ChannelSet::new(3).unwrap();
        assert_eq!(sample_environment(&set, ch, 50, 9), sample_environment(&set, ch, 50, 9));
        assert_ne!(sample_environment(&set, ch, 50, 9), sample_environment(&set, ch, 50, 10));
        assert!(sample_environment(&set, ch, 0, 1).is_empty());

        let n = 100_000;
        let env = sample_environment(&set, ch, n, 123);
        let space = ConfigSpace::new(&set, ch);
        let mut hits = vec![0usize; space.len()];
        for (_, k) in &env.networks {
            hits[space.index_of(k).unwrap()] += 1;
        }
        for (i, &h) in hits.iter().enumerate() {
            let k = space.config(i);
            let p = 1.0 / (k.interval as f64 * 3.0 * 3.0);
            let sd = (n as f64 * p * (1.0 - p)).sqrt();
            assert!((h as f64 - n as f64 * p).abs() <= 3.0 * sd, "{k}: {h}");
        }
    }

    #[test]
    fn monte_carlo_converges() {
        let set = b(&[1, 2]);
        let ch = ChannelSet::new(2).unwrap();
        let s = psv(&set, ch);
        let mc = monte_carlo_emdt(&s, &set, ch, 2000, 10, 5).unwrap();
        assert!((mc.mean.to_f64() - 2.25).abs() < 0.05);
        assert_eq!(mc, monte_carlo_emdt(&s, &set, ch, 2000, 10, 5).unwrap());
        assert!(monte_carlo_emdt(&s, &set, ch, 1, 10, 5).is_err());
        let partial = ListeningSchedule::from_entries([(1, 0)]).unwrap();
        assert!(monte_carlo_emdt(&partial, &set, ch, 10, 10, 5).is_err());
    }

    #[test]
    fn csv_rows() {
        let rows = vec![
            SimulationResult {
                seed: Some(7),
                discovered: vec![],
                mdt: Some(Rational::new(9, 4).unwrap()),
            },
            SimulationResult {
                seed: Some(8),
                discovered: vec![],
                mdt: None,
            },
        ];
        assert_eq!(simulation_csv(&rows), "trial,seed,mdt_num,mdt_den\n0,7,9,4\n1,8,NA,NA\n");
    }
}
