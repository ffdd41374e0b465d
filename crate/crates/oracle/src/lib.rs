//! Exhaustive ground truth for small instances: optimal EMDT, optimal
//! makespan and existence of recursive schedules.
//!
//! Nothing here reuses the search code of `beaconscan::genopt`; the two are
//! meant to check each other.

use std::collections::HashMap;

use beaconscan::{BeaconIntervalSet, ChannelSet, Error, ListeningSchedule, Rational, Result, Slot};
use serde::{Deserialize, Serialize};

/// Limits on a single oracle query.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleBudget {
    /// Largest search horizon accepted.
    pub max_slots: Slot,
    /// Search nodes before the query gives up.
    pub max_nodes: u64,
}

impl Default for OracleBudget {
    fn default() -> Self {
        OracleBudget {
            max_slots: 64,
            max_nodes: 20_000_000,
        }
    }
}

impl OracleBudget {
    pub fn new(max_slots: Slot, max_nodes: u64) -> Result<Self> {
        if max_slots == 0 || max_nodes == 0 {
            return Err(Error::InvalidArgument("oracle budgets must be positive".into()));
        }
        Ok(OracleBudget { max_slots, max_nodes })
    }
}

/// An answer with its witness and the effort it took.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Answer<T> {
    pub value: T,
    pub witness: Option<ListeningWitness>,
    pub nodes: u64,
}

/// Witness schedule as `(slot, channel)` pairs.
pub type ListeningWitness = Vec<(Slot, usize)>;

fn witness(s: &ListeningSchedule) -> ListeningWitness {
    s.iter().collect()
}

/// The instance as plain tables: for every slot of one LCM period and
/// every interval, which offset beacons.
struct Instance {
    b: Vec<u64>,
    /// First index of each interval's offsets within a channel.
    first: Vec<usize>,
    width: usize,
    channels: usize,
    lcm: u64,
}

impl Instance {
    fn new(intervals: &BeaconIntervalSet, channels: ChannelSet) -> Self {
        let b = intervals.intervals().to_vec();
        let mut first = Vec::with_capacity(b.len());
        let mut width = 0;
        for &x in &b {
            first.push(width);
            width += x as usize;
        }
        Instance {
            b,
            first,
            width,
            channels: channels.count(),
            lcm: intervals.lcm(),
        }
    }

    /// Cell of the configuration heard on `c` in slot `t` for interval `j`.
    fn cell(&self, c: usize, j: usize, t: Slot) -> usize {
        let b = self.b[j];
        c * self.width + self.first[j] + ((t + b - 1) % b) as usize
    }
}

/// Mutable search state shared by the three searches.
struct Board<'a> {
    inst: &'a Instance,
    seen: Vec<bool>,
    left: usize,
}

impl<'a> Board<'a> {
    fn new(inst: &'a Instance) -> Self {
        let n = inst.width * inst.channels;
        Board {
            inst,
            seen: vec![false; n],
            left: n,
        }
    }

    fn gain(&self, c: usize, t: Slot) -> usize {
        (0..self.inst.b.len())
            .filter(|&j| !self.seen[self.inst.cell(c, j, t)])
            .count()
    }

    fn mark(&mut self, c: usize, t: Slot) -> Vec<usize> {
        let mut newly = Vec::new();
        for j in 0..self.inst.b.len() {
            let k = self.inst.cell(c, j, t);
            if !self.seen[k] {
                self.seen[k] = true;
                newly.push(k);
            }
        }
        self.left -= newly.len();
        newly
    }

    fn unmark(&mut self, newly: &[usize]) {
        for &k in newly {
            self.seen[k] = false;
        }
        self.left += newly.len();
    }

    /// Channels still missing offset `d` of interval index `j`.
    fn missing(&self, j: usize, d: u64) -> u64 {
        (0..self.inst.channels)
            .filter(|&c| !self.seen[c * self.inst.width + self.inst.first[j] + (d - 1) as usize])
            .count() as u64
    }

    /// For each still-missing (interval, offset) class, walks its beaconing
    /// slots from `t` on, one per missing channel. Returns the weighted sum
    /// of those slots (weight `LCM/b`) and the latest slot used.
    fn optimistic(&self, t: Slot) -> (u64, Slot) {
        let mut total = 0;
        let mut latest = 0;
        for (j, &b) in self.inst.b.iter().enumerate() {
            for d in 1..=b {
                let need = self.missing(j, d);
                if need == 0 {
                    continue;
                }
                let mut s = t;
                while (s + b - 1) % b + 1 != d {
                    s += 1;
                }
                for _ in 0..need {
                    total += self.inst.lcm / b * s;
                    latest = latest.max(s);
                    s += b;
                }
            }
        }
        (total, latest)
    }

    fn key(&self, t: Slot) -> (Slot, Vec<bool>) {
        (t, self.seen.clone())
    }
}

fn budget_error(nodes: u64) -> Error {
    Error::BudgetExceeded(format!("oracle gave up after {nodes} nodes"))
}

/// Minimum EMDT over all schedules, searched up to `LCM(B)·|C|` slots, with
/// the lexicographically first optimal schedule as witness. Slots in which
/// no channel detects anything are left idle.
pub fn optimal_emdt(intervals: &BeaconIntervalSet, channels: ChannelSet, budget: OracleBudget) -> Result<Answer<Rational>> {
    let inst = Instance::new(intervals, channels);
    let horizon = inst.lcm * inst.channels as u64;
    if horizon > budget.max_slots {
        return Err(Error::BudgetExceeded(format!(
            "horizon {horizon} exceeds the oracle's {} slots",
            budget.max_slots
        )));
    }
    let mut run = EmdtRun {
        board: Board::new(&inst),
        horizon,
        budget,
        nodes: 0,
        path: Vec::new(),
        best: None,
        memo: HashMap::new(),
    };
    run.go(1, 0)?;
    let (cost, path) = run.best.expect("a complete schedule exists within LCM(B)·|C|");
    let den = inst.lcm as i128 * inst.b.len() as i128 * inst.channels as i128;
    let schedule: ListeningSchedule = path.into_iter().collect();
    Ok(Answer {
        value: Rational::new(cost as i128, den)?,
        witness: Some(witness(&schedule)),
        nodes: run.nodes,
    })
}

struct EmdtRun<'a> {
    board: Board<'a>,
    horizon: Slot,
    budget: OracleBudget,
    nodes: u64,
    path: Vec<(Slot, usize)>,
    best: Option<(u64, Vec<(Slot, usize)>)>,
    memo: HashMap<(Slot, Vec<bool>), u64>,
}

impl EmdtRun<'_> {
    fn go(&mut self, t: Slot, cost: u64) -> Result<()> {
        self.nodes += 1;
        if self.nodes > self.budget.max_nodes {
            return Err(budget_error(self.nodes));
        }
        if self.board.left == 0 {
            if self.best.as_ref().is_none_or(|(c, _)| cost < *c) {
                self.best = Some((cost, self.path.clone()));
            }
            return Ok(());
        }
        if t > self.horizon {
            return Ok(());
        }
        let (rest, latest) = self.board.optimistic(t);
        if latest > self.horizon || self.best.as_ref().is_some_and(|(c, _)| cost + rest >= *c) {
            return Ok(());
        }
        let key = self.board.key(t);
        if let Some(&c) = self.memo.get(&key) {
            if c <= cost {
                return Ok(());
            }
        }
        self.memo.insert(key, cost);

        let gains: Vec<usize> = (0..self.board.inst.channels).map(|c| self.board.gain(c, t)).collect();
        if gains.iter().all(|&g| g == 0) {
            return self.go(t + 1, cost);
        }
        for c in 0..gains.len() {
            if gains[c] == 0 {
                continue;
            }
            let newly = self.board.mark(c, t);
            let added: u64 = newly
                .iter()
                .map(|&k| {
                    let j = self.board.inst.first.partition_point(|&f| f <= k % self.board.inst.width) - 1;
                    self.board.inst.lcm / self.board.inst.b[j] * t
                })
                .sum();
            self.path.push((t, c));
            let r = self.go(t + 1, cost + added);
            self.path.pop();
            self.board.unmark(&newly);
            r?;
        }
        Ok(())
    }
}

/// Smallest makespan of any complete schedule, found by trying horizons
/// `max(B)·|C|, max(B)·|C| + 1, …` in turn.
pub fn optimal_makespan(intervals: &BeaconIntervalSet, channels: ChannelSet, budget: OracleBudget) -> Result<Answer<Slot>> {
    let inst = Instance::new(intervals, channels);
    let start = intervals.max() * inst.channels as u64;
    let end = (inst.lcm * inst.channels as u64).min(budget.max_slots);
    let mut nodes = 0;
    for horizon in start..=end {
        let mut board = Board::new(&inst);
        let mut path = Vec::new();
        let mut dead = HashMap::new();
        if fits(&mut board, 1, horizon, &mut path, &mut nodes, budget.max_nodes, &mut dead)? {
            let schedule: ListeningSchedule = path.into_iter().collect();
            return Ok(Answer {
                value: horizon,
                witness: Some(witness(&schedule)),
                nodes,
            });
        }
    }
    Err(Error::BudgetExceeded(format!(
        "no complete schedule within the oracle's {} slots",
        budget.max_slots
    )))
}

fn fits(
    board: &mut Board<'_>,
    t: Slot,
    horizon: Slot,
    path: &mut Vec<(Slot, usize)>,
    nodes: &mut u64,
    max_nodes: u64,
    dead: &mut HashMap<(Slot, Vec<bool>), ()>,
) -> Result<bool> {
    *nodes += 1;
    if *nodes > max_nodes {
        return Err(budget_error(*nodes));
    }
    if board.left == 0 {
        return Ok(true);
    }
    if t > horizon || board.optimistic(t).1 > horizon {
        return Ok(false);
    }
    let key = board.key(t);
    if dead.contains_key(&key) {
        return Ok(false);
    }
    let gains: Vec<usize> = (0..board.inst.channels).map(|c| board.gain(c, t)).collect();
    if gains.iter().all(|&g| g == 0) {
        let ok = fits(board, t + 1, horizon, path, nodes, max_nodes, dead)?;
        if !ok {
            dead.insert(key, ());
        }
        return Ok(ok);
    }
    for c in 0..gains.len() {
        if gains[c] == 0 {
            continue;
        }
        let newly = board.mark(c, t);
        path.push((t, c));
        let ok = fits(board, t + 1, horizon, path, nodes, max_nodes, dead);
        board.unmark(&newly);
        if ok? {
            return Ok(true);
        }
        path.pop();
    }
    dead.insert(key, ());
    Ok(false)
}

/// Whether a recursive schedule exists: every slot up to `max(B)·|C|` is
/// scanned, and no scan within the first `b·|C|` slots repeats a
/// (channel, offset) pair of interval `b`.
pub fn recursive_exists(intervals: &BeaconIntervalSet, channels: ChannelSet, budget: OracleBudget) -> Result<Answer<bool>> {
    let inst = Instance::new(intervals, channels);
    let end = intervals.max() * inst.channels as u64;
    if end > budget.max_slots {
        return Err(Error::BudgetExceeded(format!(
            "{end} slots exceed the oracle's {} slots",
            budget.max_slots
        )));
    }
    let mut board = Board::new(&inst);
    let mut path = Vec::new();
    let mut nodes = 0;
    let found = extend_recursive(&mut board, 1, end, &mut path, &mut nodes, budget.max_nodes)?;
    Ok(Answer {
        value: found,
        witness: found.then(|| path.clone()),
        nodes,
    })
}

fn extend_recursive(
    board: &mut Board<'_>,
    t: Slot,
    end: Slot,
    path: &mut Vec<(Slot, usize)>,
    nodes: &mut u64,
    max_nodes: u64,
) -> Result<bool> {
    *nodes += 1;
    if *nodes > max_nodes {
        return Err(budget_error(*nodes));
    }
    if t > end {
        return Ok(true);
    }
    let inst = board.inst;
    for c in 0..inst.channels {
        // Every interval whose prefix b·|C| still contains t must hear
        // something new on c.
        let allowed = inst
            .b
            .iter()
            .enumerate()
            .filter(|&(_, &b)| t <= b * inst.channels as u64)
            .all(|(j, _)| !board.seen[inst.cell(c, j, t)]);
        if !allowed {
            continue;
        }
        let newly = board.mark(c, t);
        path.push((t, c));
        let ok = extend_recursive(board, t + 1, end, path, nodes, max_nodes);
        board.unmark(&newly);
        if ok? {
            return Ok(true);
        }
        path.pop();
    }
    Ok(false)
}
