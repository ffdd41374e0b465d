//! Generators for the F1 and F2 interval-set collections used in experiments.

use std::collections::HashSet;

use num_integer::Integer;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::intervals::{BeaconIntervalSet, Family, Interval};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleSpec {
    pub family: Family,
    pub seed: u64,
    /// Inclusive bounds on `|B|`.
    pub cardinality: (usize, usize),
    /// Inclusive bounds on the drawn intervals (F1) or on the base numbers
    /// whose divisors form the sets (F2).
    pub values: (Interval, Interval),
}

impl SampleSpec {
    /// `|B| ∈ [3, 6]`, intervals in `[1, 10]`.
    pub fn f1(seed: u64) -> Self {
        SampleSpec {
            family: Family::F1,
            seed,
            cardinality: (3, 6),
            values: (1, 10),
        }
    }

    /// Base numbers in `[1, 256]`, `|B| ∈ [3, 8]`.
    pub fn f2() -> Self {
        SampleSpec {
            family: Family::F2,
            seed: 0,
            cardinality: (3, 8),
            values: (1, 256),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.cardinality;
        let (vlo, vhi) = self.values;
        if lo == 0 || lo > hi {
            return Err(Error::InvalidArgument(format!("bad cardinality range [{lo}, {hi}]")));
        }
        if vlo == 0 || vlo > vhi {
            return Err(Error::InvalidArgument(format!("bad value range [{vlo}, {vhi}]")));
        }
        match self.family {
            Family::F1 if (vhi - vlo + 1) < hi as u64 => Err(Error::InvalidArgument(format!(
                "cannot draw {hi} distinct intervals from [{vlo}, {vhi}]"
            ))),
            Family::F1 | Family::F2 => Ok(()),
            f => Err(Error::InvalidArgument(format!("no sampler for family {f:?}"))),
        }
    }
}

fn normalized(mut v: Vec<Interval>) -> Vec<Interval> {
    v.sort_unstable();
    let g = v.iter().fold(0, |g, &b| g.gcd(&b));
    v.iter().map(|b| b / g).collect()
}

/// Number of distinct GCD-normalized sets the F1 procedure can produce, if
/// the value range is small enough to enumerate.
pub fn f1_space_size(spec: &SampleSpec) -> Option<usize> {
    let (vlo, vhi) = spec.values;
    let width = (vhi - vlo + 1) as u32;
    if width > 24 {
        return None;
    }
    let (lo, hi) = spec.cardinality;
    let mut seen = HashSet::new();
    for mask in 0u32..(1 << width) {
        let k = mask.count_ones() as usize;
        if k < lo || k > hi {
            continue;
        }
        let v = (0..width).filter(|i| mask >> i & 1 == 1).map(|i| vlo + i as u64).collect();
        seen.insert(normalized(v));
    }
    Some(seen.len())
}

/// Draws until `count` distinct F1 sets have been produced: `|B|` uniform in
/// the cardinality range, then intervals uniform in the value range with
/// repeats redrawn, then division by the GCD.
pub fn sample_f1(spec: &SampleSpec, count: usize) -> Result<Vec<BeaconIntervalSet>> {
    spec.validate()?;
    if spec.family != Family::F1 {
        return Err(Error::InvalidArgument("sample_f1 needs an F1 spec".into()));
    }
    if let Some(available) = f1_space_size(spec) {
        if count > available {
            return Err(Error::SampleSpaceExhausted {
                requested: count,
                available,
            });
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut seen = HashSet::new();
    let mut out = Vec::with_capacity(count);
    let mut stale = 0u64;
    while out.len() < count {
        let k = rng.gen_range(spec.cardinality.0..=spec.cardinality.1);
        let mut v: Vec<Interval> = Vec::with_capacity(k);
        while v.len() < k {
            let b = rng.gen_range(spec.values.0..=spec.values.1);
            if !v.contains(&b) {
                v.push(b);
            }
        }
        let v = normalized(v);
        if seen.insert(v.clone()) {
            out.push(BeaconIntervalSet::classify(&v)?);
            stale = 0;
        } else {
            stale += 1;
            if stale > 1_000_000 {
                return Err(Error::SampleSpaceExhausted {
                    requested: count,
                    available: out.len(),
                });
            }
        }
    }
    Ok(out)
}

/// Every set of divisors of some `n` in the value range that contains `n`,
/// has a size in the cardinality range and has GCD 1. Ordered by `n`, then
/// lexicographically.
pub fn sample_f2(spec: &SampleSpec) -> Result<Vec<BeaconIntervalSet>> {
    spec.validate()?;
    if spec.family != Family::F2 {
        return Err(Error::InvalidArgument("sample_f2 needs an F2 spec".into()));
    }
    let (lo, hi) = spec.cardinality;
    let mut out = Vec::new();
    for n in spec.values.0..=spec.values.1 {
        let divisors: Vec<Interval> = (1..n).filter(|d| n % d == 0).collect();
        let mut pick = Vec::new();
        divisor_subsets(&divisors, 0, n, lo, hi, &mut pick, &mut out)?;
    }
    Ok(out)
}

/// `count` sets drawn without replacement from [`sample_f2`], seeded by
/// `spec.seed` and kept in enumeration order.
pub fn sample_f2_subset(spec: &SampleSpec, count: usize) -> Result<Vec<BeaconIntervalSet>> {
    let all = sample_f2(spec)?;
    if count > all.len() {
        return Err(Error::SampleSpaceExhausted {
            requested: count,
            available: all.len(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut picked = rand::seq::index::sample(&mut rng, all.len(), count).into_vec();
    picked.sort_unstable();
    Ok(picked.into_iter().map(|i| all[i].clone()).collect())
}

/// Extends `pick` (sorted proper divisors of `n`) by divisors from `from` on.
fn divisor_subsets(
    divisors: &[Interval],
    from: usize,
    n: Interval,
    lo: usize,
    hi: usize,
    pick: &mut Vec<Interval>,
    out: &mut Vec<BeaconIntervalSet>,
) -> Result<()> {
    let size = pick.len() + 1;
    if size >= lo && pick.iter().fold(n, |g, &d| g.gcd(&d)) == 1 {
        let mut v = pick.clone();
        v.push(n);
        out.push(BeaconIntervalSet::classify(&v)?);
    }
    if size == hi {
        return Ok(());
    }
    for i in from..divisors.len() {
        pick.push(divisors[i]);
        divisor_subsets(divisors, i + 1, n, lo, hi, pick, out)?;
        pick.pop();
    }
    Ok(())
}

/// One `{"intervals":[...]}` object per line.
pub fn to_json_lines(sets: &[BeaconIntervalSet]) -> String {
    sets.iter()
        .map(|s| serde_json::to_string(s).expect("interval sets always serialize") + "\n")
        .collect()
}
