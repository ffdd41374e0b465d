use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write as _};
use std::str::FromStr;

use crate::config::NetworkConfiguration;
use crate::config::{ChannelId, ChannelSet};
use crate::error::{Error, Result};
use crate::intervals::{offset_class, BeaconIntervalSet, Interval, Slot};
use crate::metrics::discovery_times;
use crate::rational::Rational;
use crate::schedule::ListeningSchedule;

/// A binary decision variable of the model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Variable {
    /// Configuration `(channel, interval, δ_interval(slot))` is detected in `slot`.
    X {
        channel: ChannelId,
        slot: Slot,
        interval: Interval,
    },
    /// `channel` is scanned in `slot`.
    H { channel: ChannelId, slot: Slot },
}

impl fmt::Display for Variable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Variable::X { channel, slot, interval } => write!(f, "x_{channel}_{slot}_{interval}"),
            Variable::H { channel, slot } => write!(f, "h_{channel}_{slot}"),
        }
    }
}

impl FromStr for Variable {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("not a model variable: {s:?}"));
        let mut parts = s.split('_');
        let kind = parts.next().ok_or_else(bad)?;
        let nums = parts
            .map(|p| p.parse::<u64>().map_err(|_| bad()))
            .collect::<Result<Vec<_>>>()?;
        match (kind, nums.as_slice()) {
            ("x", &[c, t, b]) => Ok(Variable::X {
                channel: c as ChannelId,
                slot: t,
                interval: b,
            }),
            ("h", &[c, t]) => Ok(Variable::H {
                channel: c as ChannelId,
                slot: t,
            }),
            _ => Err(bad()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Eq,
    Le,
}

/// `Σ coef·var (= | ≤) rhs`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Constraint {
    pub name: String,
    pub terms: Vec<(i64, Variable)>,
    pub sense: Sense,
    pub rhs: i64,
}

impl Constraint {
    fn holds(&self, a: &Assignment) -> bool {
        let lhs: i64 = self.terms.iter().map(|&(k, v)| k * a.value(&v)).sum();
        match self.sense {
            Sense::Eq => lhs == self.rhs,
            Sense::Le => lhs <= self.rhs,
        }
    }
}

/// The GENOPT integer program over slots `1..=horizon`.
#[derive(Debug, Clone)]
pub struct GenoptModel {
    intervals: BeaconIntervalSet,
    channels: ChannelSet,
    horizon: Slot,
    /// Each configuration is detected exactly once.
    pub c1: Vec<Constraint>,
    /// A detection needs a scan of its channel in that slot.
    pub c2: Vec<Constraint>,
    /// At most one channel per slot.
    pub c3: Vec<Constraint>,
}

/// Builds the model for horizon `t_max`, which must lie in
/// `[max(B), LCM(B)·|C|]`.
pub fn build_model(intervals: &BeaconIntervalSet, channels: ChannelSet, t_max: Slot) -> Result<GenoptModel> {
    if t_max < intervals.max() {
        return Err(Error::InvalidArgument(format!(
            "horizon {t_max} is shorter than the largest interval {}",
            intervals.max()
        )));
    }
    let cap = intervals.lcm().saturating_mul(channels.count() as u64);
    if t_max > cap {
        return Err(Error::InvalidArgument(format!("horizon {t_max} exceeds LCM(B)·|C| = {cap}")));
    }

    let mut c1 = Vec::new();
    for c in channels.iter() {
        for &b in intervals.intervals() {
            for d in 1..=b {
                let terms = (0..)
                    .map(|m| m * b + d)
                    .take_while(|&t| t <= t_max)
                    .map(|t| {
                        (
                            1,
                            Variable::X {
                                channel: c,
                                slot: t,
                                interval: b,
                            },
                        )
                    })
                    .collect();
                c1.push(Constraint {
                    name: format!("c1_{c}_{b}_{d}"),
                    terms,
                    sense: Sense::Eq,
                    rhs: 1,
                });
            }
        }
    }

    let mut c2 = Vec::new();
    for c in channels.iter() {
        for t in 1..=t_max {
            for &b in intervals.intervals() {
                c2.push(Constraint {
                    name: format!("c2_{c}_{t}_{b}"),
                    terms: vec![
                        (
                            1,
                            Variable::X {
                                channel: c,
                                slot: t,
                                interval: b,
                            },
                        ),
                        (-1, Variable::H { channel: c, slot: t }),
                    ],
                    sense: Sense::Le,
                    rhs: 0,
                });
            }
        }
    }

    let c3 = (1..=t_max)
        .map(|t| Constraint {
            name: format!("c3_{t}"),
            terms: channels.iter().map(|c| (1, Variable::H { channel: c, slot: t })).collect(),
            sense: Sense::Le,
            rhs: 1,
        })
        .collect();

    Ok(GenoptModel {
        intervals: intervals.clone(),
        channels,
        horizon: t_max,
        c1,
        c2,
        c3,
    })
}

impl GenoptModel {
    pub fn intervals(&self) -> &BeaconIntervalSet {
        &self.intervals
    }

    pub fn channels(&self) -> ChannelSet {
        self.channels
    }

    pub fn horizon(&self) -> Slot {
        self.horizon
    }

    /// `x` variables in (channel, slot, interval) order.
    pub fn x_variables(&self) -> impl Iterator<Item = Variable> + '_ {
        self.channels.iter().flat_map(move |c| {
            (1..=self.horizon).flat_map(move |t| {
                self.intervals.intervals().iter().map(move |&b| Variable::X {
                    channel: c,
                    slot: t,
                    interval: b,
                })
            })
        })
    }

    /// `h` variables in (channel, slot) order.
    pub fn h_variables(&self) -> impl Iterator<Item = Variable> + '_ {
        self.channels
            .iter()
            .flat_map(move |c| (1..=self.horizon).map(move |t| Variable::H { channel: c, slot: t }))
    }

    pub fn variable_count(&self) -> usize {
        self.channels.count() * self.horizon as usize * (self.intervals.len() + 1)
    }

    pub fn contains(&self, v: &Variable) -> bool {
        match *v {
            Variable::X { channel, slot, interval } => {
                self.channels.contains(channel) && (1..=self.horizon).contains(&slot) && self.intervals.contains(interval)
            }
            Variable::H { channel, slot } => self.channels.contains(channel) && (1..=self.horizon).contains(&slot),
        }
    }

    /// Objective coefficient `t / (b·|B|·|C|)` of an `x` variable; `h`
    /// variables do not enter the objective.
    pub fn coefficient(&self, v: &Variable) -> Rational {
        match *v {
            Variable::X { slot, interval, .. } => {
                let den = interval as i128 * self.intervals.len() as i128 * self.channels.count() as i128;
                Rational::new(slot as i128, den).expect("positive denominator")
            }
            Variable::H { .. } => Rational::zero(),
        }
    }

    pub fn constraints(&self) -> impl Iterator<Item = &Constraint> {
        self.c1.iter().chain(&self.c2).chain(&self.c3)
    }
}

/// Renders the model in the LP text format. Output is deterministic.
pub fn export_lp(model: &GenoptModel) -> String {
    let mut out = String::new();
    writeln!(
        out,
        "\\ intervals {:?}, channels {}, horizon {}",
        model.intervals.intervals(),
        model.channels.count(),
        model.horizon
    )
    .unwrap();
    out.push_str("Minimize\n obj:");
    let mut line_terms = 0;
    for (i, v) in model.x_variables().enumerate() {
        let coef = model.coefficient(&v).to_f64();
        if line_terms == 8 {
            out.push_str("\n     ");
            line_terms = 0;
        }
        if i > 0 {
            out.push_str(" +");
        }
        write!(out, " {coef} {v}").unwrap();
        line_terms += 1;
    }
    out.push_str("\nSubject To\n");
    for row in model.constraints() {
        write!(out, " {}:", row.name).unwrap();
        for (i, (k, v)) in row.terms.iter().enumerate() {
            if i > 0 && i % 8 == 0 {
                out.push_str("\n   ");
            }
            let sign = if *k < 0 {
                "-"
            } else if i > 0 {
                "+"
            } else {
                ""
            };
            let mag = k.unsigned_abs();
            let sep = if sign.is_empty() { "" } else { " " };
            if mag == 1 {
                write!(out, " {sign}{sep}{v}").unwrap();
            } else {
                write!(out, " {sign}{sep}{mag} {v}").unwrap();
            }
        }
        let op = match row.sense {
            Sense::Eq => "=",
            Sense::Le => "<=",
        };
        writeln!(out, " {op} {}", row.rhs).unwrap();
    }
    out.push_str("Binary\n");
    for v in model.x_variables().chain(model.h_variables()) {
        writeln!(out, " {v}").unwrap();
    }
    out.push_str("End\n");
    out
}

/// A 0/1 assignment; variables not listed are 0.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Assignment {
    ones: BTreeSet<Variable>,
}

impl Assignment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, v: Variable, on: bool) {
        if on {
            self.ones.insert(v);
        } else {
            self.ones.remove(&v);
        }
    }

    pub fn value(&self, v: &Variable) -> i64 {
        self.ones.contains(v) as i64
    }

    pub fn ones(&self) -> impl Iterator<Item = &Variable> {
        self.ones.iter()
    }

    /// The assignment a schedule induces: `h` for every scan and `x` at each
    /// configuration's first discovery.
    pub fn from_schedule(model: &GenoptModel, schedule: &ListeningSchedule) -> Self {
        let mut a = Assignment::new();
        for (t, c) in schedule.iter().filter(|&(t, _)| t <= model.horizon) {
            a.set(Variable::H { channel: c, slot: t }, true);
        }
        let truncated: ListeningSchedule = schedule.iter().filter(|&(t, _)| t <= model.horizon).collect();
        for (k, t) in discovery_times(&truncated, &model.intervals, model.channels) {
            a.set(
                Variable::X {
                    channel: k.channel,
                    slot: t,
                    interval: k.interval,
                },
                true,
            );
        }
        a
    }

    /// Reads a solution file of `name value` lines. Blank lines and lines
    /// starting with `#` or `\` are skipped. Values must be 0 or 1 up to
    /// solver round-off.
    pub fn parse(model: &GenoptModel, text: &str) -> Result<Self> {
        let mut a = Assignment::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with('\\') {
                continue;
            }
            let mut it = line.split_whitespace();
            let (Some(name), Some(value), None) = (it.next(), it.next(), it.next()) else {
                return Err(Error::Parse(format!("line {}: expected `name value`", n + 1)));
            };
            let v: Variable = name.parse()?;
            if !model.contains(&v) {
                return Err(Error::Parse(format!("line {}: {name} is not in the model", n + 1)));
            }
            let x: f64 = value
                .parse()
                .map_err(|_| Error::Parse(format!("line {}: bad value {value:?}", n + 1)))?;
            if (x - x.round()).abs() > 1e-6 || !(x.round() == 0.0 || x.round() == 1.0) {
                return Err(Error::Parse(format!("line {}: {name} = {value} is not binary", n + 1)));
            }
            a.set(v, x.round() == 1.0);
        }
        Ok(a)
    }

    /// `name value` lines for every variable set to 1.
    pub fn to_solution_text(&self) -> String {
        self.ones.iter().map(|v| format!("{v} 1\n")).collect()
    }
}

/// A checked solution of the model.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decoded {
    pub schedule: ListeningSchedule,
    /// Objective value of the assignment's `x` variables.
    pub objective: Rational,
    /// Scanned slots in which no `x` variable is set.
    pub redundant_slots: Vec<Slot>,
}

/// Turns a feasible assignment into a schedule, rejecting any violated
/// constraint.
pub fn decode(model: &GenoptModel, assignment: &Assignment) -> Result<Decoded> {
    if let Some(v) = assignment.ones().find(|v| !model.contains(v)) {
        return Err(Error::ConstraintViolation(format!("{v} is not a model variable")));
    }
    if let Some(row) = model.constraints().find(|row| !row.holds(assignment)) {
        return Err(Error::ConstraintViolation(row.name.clone()));
    }

    let mut schedule = ListeningSchedule::new();
    let mut detecting = BTreeSet::new();
    let mut objective = Rational::zero();
    let mut chosen: BTreeMap<NetworkConfiguration, Slot> = BTreeMap::new();
    for v in assignment.ones() {
        match *v {
            Variable::H { channel, slot } => schedule.set(slot, channel),
            Variable::X { channel, slot, interval } => {
                detecting.insert(slot);
                objective += model.coefficient(v);
                let k = NetworkConfiguration {
                    channel,
                    interval,
                    offset: offset_class(slot, interval),
                };
                chosen.insert(k, slot);
            }
        }
    }

    let found = discovery_times(&schedule, &model.intervals, model.channels);
    for (k, t) in &chosen {
        match found.get(k) {
            Some(first) if first <= t => {}
            _ => {
                return Err(Error::ConstraintViolation(format!(
                    "{k} marked detected in slot {t} but never scanned by then"
                )))
            }
        }
    }
    let redundant_slots = schedule.iter().map(|(t, _)| t).filter(|t| !detecting.contains(t)).collect();
    Ok(Decoded {
        schedule,
        objective,
        redundant_slots,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::emdt;

    fn b(v: &[u64]) -> BeaconIntervalSet {
        BeaconIntervalSet::classify(v).unwrap()
    }

    #[test]
    fn constraint_counts() {
        let m = build_model(&b(&[1, 2]), ChannelSet::new(2).unwrap(), 4).unwrap();
        assert_eq!(m.c1.len(), 6);
        assert_eq!(m.c2.len(), 16);
        assert_eq!(m.c3.len(), 4);
        assert_eq!(m.x_variables().count(), 16);
        assert_eq!(m.variable_count(), 24);
        // Each C1 row for b=2 covers two slots within the horizon.
        assert!(m.c1.iter().filter(|r| r.name.ends_with("_2_1")).all(|r| r.terms.len() == 2));
    }

    #[test]
    fn horizon_limits() {
        let set = b(&[2, 3]);
        let ch = ChannelSet::new(2).unwrap();
        assert!(build_model(&set, ch, 2).is_err());
        assert!(build_model(&set, ch, 3).is_ok());
        assert!(build_model(&set, ch, 12).is_ok());
        assert!(build_model(&set, ch, 13).is_err());
    }

    #[test]
    fn c1_uses_floor_range() {
        let m = build_model(&b(&[2, 3]), ChannelSet::new(2).unwrap(), 7).unwrap();
        let row = m.c1.iter().find(|r| r.name == "c1_0_3_2").unwrap();
        let slots: Vec<_> = row
            .terms
            .iter()
            .map(|(_, v)| match v {
                Variable::X { slot, .. } => *slot,
                _ => unreachable!(),
            })
            .collect();
        assert_eq!(slots, vec![2, 5]);
    }

    #[test]
    fn trivial_model_lp() {
        let m = build_model(&b(&[1]), ChannelSet::new(1).unwrap(), 1).unwrap();
        let lp = export_lp(&m);
        assert_eq!(
            lp,
            "\\ intervals [1], channels 1, horizon 1\n\
             Minimize\n obj: 1 x_0_1_1\n\
             Subject To\n c1_0_1_1: x_0_1_1 = 1\n c2_0_1_1: x_0_1_1 - h_0_1 <= 0\n c3_1: h_0_1 <= 1\n\
             Binary\n x_0_1_1\n h_0_1\nEnd\n"
        );
        let mut a = Assignment::new();
        a.set("x_0_1_1".parse().unwrap(), true);
        a.set("h_0_1".parse().unwrap(), true);
        let d = decode(&m, &a).unwrap();
        assert_eq!(d.schedule.iter().collect::<Vec<_>>(), vec![(1, 0)]);
        assert_eq!(d.objective, Rational::from_integer(1));
    }

    #[test]
    fn lp_is_deterministic_with_decimal_coefficients() {
        let m = build_model(&b(&[1, 2]), ChannelSet::new(2).unwrap(), 4).unwrap();
        let lp = export_lp(&m);
        assert_eq!(lp, export_lp(&m));
        assert!(lp.contains("obj: 0.25 x_0_1_1 + 0.125 x_0_1_2"));
        assert_eq!(lp.lines().filter(|l| l.starts_with(" c1_")).count(), 6);
    }

    #[test]
    fn decode_roundtrip_and_rejections() {
        let set = b(&[1, 2]);
        let ch = ChannelSet::new(2).unwrap();
        let m = build_model(&set, ch, 4).unwrap();
        let s = ListeningSchedule::from_entries([(1, 0), (2, 1), (3, 1), (4, 0)]).unwrap();
        let a = Assignment::from_schedule(&m, &s);
        let text = a.to_solution_text();
        let parsed = Assignment::parse(&m, &text).unwrap();
        assert_eq!(parsed, a);
        let d = decode(&m, &parsed).unwrap();
        assert_eq!(d.schedule, s);
        assert_eq!(d.objective, emdt(&s, &set, ch).unwrap());
        assert!(d.redundant_slots.is_empty());

        // Two channels in one slot.
        let mut bad = a.clone();
        bad.set(Variable::H { channel: 1, slot: 1 }, true);
        assert!(matches!(decode(&m, &bad), Err(Error::ConstraintViolation(_))));

        // Detection without a scan.
        let mut bad = a.clone();
        bad.set(Variable::H { channel: 0, slot: 4 }, false);
        assert!(decode(&m, &bad).is_err());

        assert!(Assignment::parse(&m, "x_0_9_1 1").is_err());
        assert!(Assignment::parse(&m, "h_0_1 0.5").is_err());
        assert!(Assignment::parse(&m, "y_0_1 1").is_err());
    }

    #[test]
    fn scans_without_detections_are_redundant() {
        // Slot 4 repeats offsets already heard in slots 1 and 2.
        let set = b(&[2, 3]);
        let ch = ChannelSet::new(1).unwrap();
        let m = build_model(&set, ch, 4).unwrap();
        let s = ListeningSchedule::from_entries([(1, 0), (2, 0), (3, 0), (4, 0)]).unwrap();
        let d = decode(&m, &Assignment::from_schedule(&m, &s)).unwrap();
        assert_eq!(d.schedule, s);
        assert_eq!(d.redundant_slots, vec![4]);
    }
}
