use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::model::GenoptModel;
use crate::config::{ChannelId, ChannelSet, ConfigSpace};
use crate::error::{Error, Result};
use crate::intervals::{next_beacon_slot, BeaconIntervalSet, Slot};
use crate::metrics::discovery_times;
use crate::rational::Rational;
use crate::schedule::ListeningSchedule;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    /// Search nodes before giving up with a gap; `None` searches to the end.
    pub node_budget: Option<u64>,
    /// Largest `|C|·t_max` the built-in search accepts.
    pub size_budget: u64,
    /// Merge search states that agree up to a relabeling of channels.
    pub transpositions: bool,
    /// Among schedules of equal EMDT prefer the smaller makespan.
    pub lexicographic: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            node_budget: Some(2_000_000),
            size_budget: 4096,
            transpositions: true,
            lexicographic: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "status")]
pub enum Status {
    ProvenOptimal,
    /// Search stopped early; `gap` is `(objective − lower bound) / objective`.
    BoundGap {
        gap: f64,
    },
    Infeasible,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveOutcome {
    pub status: Status,
    pub horizon: Slot,
    pub objective: Option<Rational>,
    pub lower_bound: Rational,
    pub nodes: u64,
    #[serde(skip)]
    pub schedule: Option<ListeningSchedule>,
}

impl SolveOutcome {
    pub fn is_optimal(&self) -> bool {
        self.status == Status::ProvenOptimal
    }

    pub fn into_schedule(self) -> Result<ListeningSchedule> {
        self.schedule
            .ok_or_else(|| Error::Infeasible(format!("no complete schedule within {} slots", self.horizon)))
    }
}

/// Lower bound on the EMDT of any complete schedule with makespan at most
/// `horizon`, or `None` if no such schedule can exist by this bound.
pub fn lower_bound(intervals: &BeaconIntervalSet, channels: ChannelSet, horizon: Slot) -> Option<Rational> {
    let search = Search::new(intervals, channels, horizon, SolveOptions::default());
    search.bound(1).map(|(cost, _)| search.to_rational(cost))
}

/// Exact branch-and-bound over per-slot decisions (scan one channel or stay
/// idle) for the model's horizon, seeded with `warm_start` as incumbent.
pub fn solve_exact(model: &GenoptModel, warm_start: Option<&ListeningSchedule>, options: &SolveOptions) -> Result<SolveOutcome> {
    let intervals = model.intervals();
    let channels = model.channels();
    let horizon = model.horizon();
    let size = channels.count() as u64 * horizon;
    if size > options.size_budget {
        return Err(Error::BudgetExceeded(format!(
            "|C|·t_max = {size} exceeds the exact-search budget {}",
            options.size_budget
        )));
    }

    let mut search = Search::new(intervals, channels, horizon, options.clone());
    let Some((root, _)) = search.bound(1) else {
        return Ok(SolveOutcome {
            status: Status::Infeasible,
            horizon,
            objective: None,
            lower_bound: Rational::zero(),
            nodes: 0,
            schedule: None,
        });
    };
    let lower = search.to_rational(root);

    if let Some(w) = warm_start {
        let truncated: ListeningSchedule = w.iter().filter(|&(t, _)| t <= horizon).collect();
        let times = discovery_times(&truncated, intervals, channels);
        if times.len() == search.space.len() {
            let cost = times.iter().map(|(k, t)| search.scale / k.interval * t).sum();
            let ms = times.values().copied().max().unwrap_or(0);
            search.incumbent = Some(Incumbent {
                cost,
                makespan: ms,
                schedule: truncated,
            });
        }
    }

    search.dfs(1, 0, 0);

    let nodes = search.nodes;
    let exhausted = search.exhausted;
    match search.incumbent {
        None if exhausted => Err(Error::BudgetExceeded(format!("no schedule found within {nodes} nodes"))),
        None => Ok(SolveOutcome {
            status: Status::Infeasible,
            horizon,
            objective: None,
            lower_bound: lower,
            nodes,
            schedule: None,
        }),
        Some(inc) => {
            let objective = search_rational(inc.cost, search.scale_den);
            let status = if exhausted {
                let gap = (objective - lower).to_f64() / objective.to_f64();
                Status::BoundGap { gap }
            } else {
                Status::ProvenOptimal
            };
            let lower_bound = if exhausted { lower } else { objective };
            Ok(SolveOutcome {
                status,
                horizon,
                objective: Some(objective),
                lower_bound,
                nodes,
                schedule: Some(inc.schedule),
            })
        }
    }
}

fn search_rational(cost: u64, den: u64) -> Rational {
    Rational::new(cost as i128, den as i128).expect("positive denominator")
}

struct Incumbent {
    cost: u64,
    makespan: Slot,
    schedule: ListeningSchedule,
}

/// Costs are integers: a configuration with interval `b` found in slot `t`
/// costs `t·LCM(B)/b`, and the EMDT is the total over `LCM(B)·|B|·|C|`.
struct Search {
    space: ConfigSpace,
    intervals: Vec<u64>,
    block_start: Vec<usize>,
    channels: usize,
    horizon: Slot,
    options: SolveOptions,
    /// `LCM(B)`, so `scale / b` is the per-slot weight of interval `b`.
    scale: u64,
    scale_den: u64,
    discovered: Vec<bool>,
    /// Undiscovered channels per (interval, offset), indexed like one
    /// channel's block of the configuration space.
    missing: Vec<usize>,
    remaining: usize,
    path: Vec<(Slot, ChannelId)>,
    incumbent: Option<Incumbent>,
    nodes: u64,
    exhausted: bool,
    seen: HashMap<(Slot, Vec<u64>), (u64, Slot)>,
}

const TABLE_LIMIT: usize = 4_000_000;

impl Search {
    fn new(intervals: &BeaconIntervalSet, channels: ChannelSet, horizon: Slot, options: SolveOptions) -> Self {
        let space = ConfigSpace::new(intervals, channels);
        let mut block_start = Vec::new();
        let mut acc = 0;
        for &b in intervals.intervals() {
            block_start.push(acc);
            acc += b as usize;
        }
        let m = channels.count();
        let scale = intervals.lcm();
        Search {
            discovered: vec![false; space.len()],
            missing: vec![m; space.per_channel()],
            remaining: space.len(),
            space,
            intervals: intervals.intervals().to_vec(),
            block_start,
            channels: m,
            horizon,
            options,
            scale,
            scale_den: scale * intervals.len() as u64 * m as u64,
            path: Vec::new(),
            incumbent: None,
            nodes: 0,
            exhausted: false,
            seen: HashMap::new(),
        }
    }

    fn to_rational(&self, cost: u64) -> Rational {
        search_rational(cost, self.scale_den)
    }

    /// Cheapest completion from slot `t` on and a makespan lower bound,
    /// treating every (interval, offset) class on its own: `k` channels
    /// still missing offset `δ` of `b` need `k` distinct slots of the form
    /// `f + i·b`, the earliest being `f ≥ t`.
    fn bound(&self, t: Slot) -> Option<(u64, Slot)> {
        let mut cost = 0;
        let mut makespan = 0;
        for (i, &b) in self.intervals.iter().enumerate() {
            let w = self.scale / b;
            for d in 1..=b {
                let k = self.missing[self.block_start[i] + (d - 1) as usize] as u64;
                if k == 0 {
                    continue;
                }
                let f = next_beacon_slot(t, b, d);
                let last = f + (k - 1) * b;
                if last > self.horizon {
                    return None;
                }
                cost += w * (k * f + b * k * (k - 1) / 2);
                makespan = makespan.max(last);
            }
        }
        Some((cost, makespan))
    }

    fn fresh(&self, c: ChannelId, t: Slot) -> usize {
        (0..self.intervals.len())
            .filter(|&i| !self.discovered[self.space.heard_at(c, i, t)])
            .count()
    }

    /// Scans `c` in `t`; returns the newly discovered indices and their cost.
    fn apply(&mut self, c: ChannelId, t: Slot) -> (Vec<usize>, u64) {
        let mut fresh = Vec::new();
        let mut cost = 0;
        for i in 0..self.intervals.len() {
            let k = self.space.heard_at(c, i, t);
            if !self.discovered[k] {
                self.discovered[k] = true;
                self.missing[k % self.space.per_channel()] -= 1;
                cost += self.scale / self.intervals[i] * t;
                fresh.push(k);
            }
        }
        self.remaining -= fresh.len();
        (fresh, cost)
    }

    fn undo(&mut self, fresh: &[usize]) {
        for &k in fresh {
            self.discovered[k] = false;
            self.missing[k % self.space.per_channel()] += 1;
        }
        self.remaining += fresh.len();
    }

    fn row(&self, c: ChannelId) -> Vec<u64> {
        let p = self.space.per_channel();
        let mut words = vec![0u64; p.div_ceil(64)];
        for j in 0..p {
            if self.discovered[c * p + j] {
                words[j / 64] |= 1 << (j % 64);
            }
        }
        words
    }

    fn dominated(&self, bound: u64, makespan: Slot) -> bool {
        match &self.incumbent {
            None => false,
            Some(inc) if self.options.lexicographic => (bound, makespan) >= (inc.cost, inc.makespan),
            Some(inc) => bound >= inc.cost,
        }
    }

    fn dfs(&mut self, mut t: Slot, cost: u64, makespan: Slot) {
        if self.exhausted {
            return;
        }
        self.nodes += 1;
        if self.options.node_budget.is_some_and(|n| self.nodes > n) {
            self.exhausted = true;
            return;
        }
        if self.remaining == 0 {
            let better = match &self.incumbent {
                None => true,
                Some(inc) if self.options.lexicographic => (cost, makespan) < (inc.cost, inc.makespan),
                Some(inc) => cost < inc.cost,
            };
            if better {
                self.incumbent = Some(Incumbent {
                    cost,
                    makespan,
                    schedule: self.path.iter().copied().collect(),
                });
            }
            return;
        }

        // Idling is dominated by scanning any channel that detects
        // something, so idle only when nothing can be detected.
        let counts = loop {
            if t > self.horizon {
                return;
            }
            let counts: Vec<usize> = (0..self.channels).map(|c| self.fresh(c, t)).collect();
            if counts.iter().any(|&n| n > 0) {
                break counts;
            }
            t += 1;
        };

        let rows: Vec<Vec<u64>> = (0..self.channels).map(|c| self.row(c)).collect();
        if self.options.transpositions {
            let mut key_rows = rows.clone();
            key_rows.sort_unstable();
            let key = (t, key_rows.concat());
            let ms_key = if self.options.lexicographic { makespan } else { 0 };
            let full = self.seen.len() >= TABLE_LIMIT;
            match self.seen.get_mut(&key) {
                Some(&mut (c0, m0)) if c0 <= cost && m0 <= ms_key => return,
                Some(entry) => *entry = (cost.min(entry.0), ms_key.min(entry.1)),
                None if !full => {
                    self.seen.insert(key, (cost, ms_key));
                }
                None => {}
            }
        }

        // Channels with equal rows lead to isomorphic subtrees.
        let mut children = Vec::new();
        for c in 0..self.channels {
            if counts[c] == 0 || rows[..c].contains(&rows[c]) {
                continue;
            }
            let (fresh, gained) = self.apply(c, t);
            let bound = self.bound(t + 1);
            self.undo(&fresh);
            if let Some((rest, ms_lb)) = bound {
                let total = cost + gained + rest;
                let ms = if self.remaining == fresh.len() { t } else { ms_lb.max(t) };
                children.push((total, ms, c));
            }
        }
        children.sort_unstable();

        for (total, ms_lb, c) in children {
            if self.dominated(total, ms_lb) {
                continue;
            }
            let (fresh, gained) = self.apply(c, t);
            let new_ms = if fresh.is_empty() { makespan } else { t };
            self.path.push((t, c));
            self.dfs(t + 1, cost + gained, new_ms);
            self.path.pop();
            self.undo(&fresh);
            if self.exhausted {
                return;
            }
        }
    }
}
