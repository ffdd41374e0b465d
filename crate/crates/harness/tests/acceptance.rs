//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Run with `cargo test -p beaconscan-harness --test acceptance`. The long
//! sampler counts only run with `BEACONSCAN_LONG_TESTS=1`.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use beaconscan::genopt::{build_model, genopt, solve_exact, GenoptOptions, SolveOptions};
use beaconscan::metrics::{discovery_times, emdt, is_complete, is_recursive, makespan, mdt};
use beaconscan::sampling::{f1_space_size, sample_f1, sample_f2, SampleSpec};
use beaconscan::simulator::{complete_environment, monte_carlo_emdt, proportional_environment};
use beaconscan::strategies::{chan_train, greedy, opt_b2, psv, Tiebreak};
use beaconscan::{repair_to_lcm_bound, BeaconIntervalSet, ChannelSet, Error, Family, ListeningSchedule, Rational};
use beaconscan_harness::{run_experiment, ExperimentConfig};
use beaconscan_oracle::{optimal_emdt, optimal_makespan, recursive_exists, OracleBudget};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Property cases per randomized suite.
const CASES: usize = 200;
/// Monte Carlo: trials per estimate, networks per trial, repeats, required hits.
const MC_TRIALS: usize = 1000;
const MC_NETWORKS: usize = 10;
const MC_REPEATS: u64 = 20;
const MC_HITS: usize = 18;
/// Desk-scale trend thresholds.
const GREEDY_NORM_MAX: f64 = 1.02;
const PSV_NORM_MIN: f64 = 1.5;
/// Slack for comparing normalized EMDTs rounded through `f64`.
const FLOAT_SLACK: f64 = 1e-9;
/// Wall clock allowed for the hardest exact instance.
const EXACT_BUDGET: Duration = Duration::from_secs(300);
/// Seeds tried for the randomized greedy tiebreaks.
const TIE_SEEDS: u64 = 500;

/// The check that compares EMDT with the MDT of the complete environment
/// fails whenever `|B| > 1`: the complete environment holds one network per
/// configuration, while EMDT weights a configuration with interval `b` by
/// `1/(b·|B|·|C|)`. The proportional-environment check next to it is the
/// corrected statement.
const EXPECTED_FAILURES: &[&str] = &["2.emdt-equals-mdt-complete-environment"];

struct Outcome {
    name: &'static str,
    pass: bool,
    detail: String,
}

#[derive(Default)]
struct Report {
    outcomes: Vec<Outcome>,
}

impl Report {
    fn record(&mut self, name: &'static str, pass: bool, detail: impl Into<String>) {
        let detail = detail.into();
        let expected = EXPECTED_FAILURES.contains(&name);
        let tag = match (pass, expected) {
            (true, _) => "PASS",
            (false, true) => "FAIL (expected)",
            (false, false) => "FAIL",
        };
        println!("{tag:<16} {name}: {detail}");
        self.outcomes.push(Outcome { name, pass, detail });
    }

    fn skip(&self, name: &str, why: &str) {
        println!("{:<16} {name}: {why}", "SKIP");
    }

    /// Unexpected failures plus expected failures that started passing.
    fn surprises(&self) -> Vec<String> {
        self.outcomes
            .iter()
            .filter(|o| o.pass == EXPECTED_FAILURES.contains(&o.name))
            .map(|o| format!("{} ({})", o.name, o.detail))
            .collect()
    }
}

fn set(v: &[u64]) -> BeaconIntervalSet {
    BeaconIntervalSet::classify(v).unwrap()
}

fn ch(m: usize) -> ChannelSet {
    ChannelSet::new(m).unwrap()
}

fn r(n: i128, d: i128) -> Rational {
    Rational::new(n, d).unwrap()
}

fn tiebreaks(seed: u64) -> [Tiebreak; 4] {
    [
        Tiebreak::Rnd { seed },
        Tiebreak::Dtr,
        Tiebreak::RndSwt { seed },
        Tiebreak::DtrSwt,
    ]
}

fn witness(w: &[(u64, usize)]) -> ListeningSchedule {
    ListeningSchedule::from_entries(w.iter().copied()).unwrap()
}

fn exact_values(report: &mut Report) {
    let budget = OracleBudget::default();

    let (b, c) = (set(&[1, 2]), ch(2));
    let p = emdt(&psv(&b, c), &b, c).unwrap();
    let o = optimal_emdt(&b, c, budget).unwrap().value;
    let g = genopt(&b, c, &GenoptOptions::default()).unwrap().outcome.objective;
    report.record(
        "1.psv-and-optimum-{1,2}x2",
        p == r(9, 4) && o == r(2, 1) && g == Some(r(2, 1)),
        format!("psv {p}, oracle {o}, genopt {g:?}"),
    );

    let (b, c) = (set(&[1, 2, 4, 5]), ch(2));
    let g = genopt(&b, c, &GenoptOptions::default()).unwrap().outcome;
    let capped = solve_exact(&build_model(&b, c, 10).unwrap(), None, &SolveOptions::default()).unwrap();
    let o = optimal_emdt(&b, c, budget).unwrap().value;
    report.record(
        "1.genopt-{1,2,4,5}x2",
        g.objective == Some(r(15, 4))
            && g.is_optimal()
            && capped.objective == Some(r(31, 8))
            && capped.is_optimal()
            && o == r(15, 4),
        format!(
            "unconstrained {:?}, horizon 10 {:?}, oracle {o}",
            g.objective, capped.objective
        ),
    );

    let (b, c) = (set(&[2, 3, 4, 6, 12]), ch(2));
    let g = genopt(&b, c, &GenoptOptions::default()).unwrap().outcome;
    let o = optimal_emdt(&b, c, budget).unwrap().value;
    let mut seen = BTreeSet::new();
    for seed in 0..TIE_SEEDS {
        for tb in tiebreaks(seed) {
            seen.insert(emdt(&greedy(&b, c, tb), &b, c).unwrap());
        }
    }
    let floor = r(61, 10);
    let figure = r(63, 10);
    let between: Vec<String> = seen
        .iter()
        .filter(|v| **v > floor && **v < figure)
        .map(|v| v.to_string())
        .collect();
    report.record(
        "1.greedy-vs-optimum-{2,3,4,6,12}x2",
        g.objective == Some(floor) && g.is_optimal() && o == floor && seen.iter().all(|v| *v >= floor) && seen.contains(&figure),
        format!(
            "genopt {:?}, oracle {o}, greedy values {:?}; runs between 61/10 and 63/10 to investigate: {:?}",
            g.objective,
            seen.iter().map(|v| v.to_string()).collect::<Vec<_>>(),
            between
        ),
    );

    let (b, c) = (set(&[1, 2, 3, 5]), ch(3));
    // LCM(B)·|C| = 90 slots, past the oracle's default horizon.
    let wide = OracleBudget::new(90, budget.max_nodes).unwrap();
    let start = Instant::now();
    let g = genopt(&b, c, &GenoptOptions::default()).unwrap().outcome;
    let o = optimal_emdt(&b, c, wide).unwrap().value;
    let ms = optimal_makespan(&b, c, wide).unwrap().value;
    let took = start.elapsed();
    report.record(
        "1.optimum-{1,2,3,5}x3",
        g.objective == Some(r(39, 8)) && g.is_optimal() && o == r(39, 8) && ms == 15 && took <= EXACT_BUDGET,
        format!("genopt {:?}, oracle {o}, makespan {ms}, {:.2?}", g.objective, took),
    );

    let (b, c) = (set(&[1, 2, 3]), ch(2));
    let a = recursive_exists(&b, c, budget).unwrap();
    report.record(
        "1.no-recursive-{1,2,3}x2",
        !a.value,
        format!("recursive_exists = {}", a.value),
    );
}

fn f3_set(rng: &mut ChaCha8Rng, max: u64) -> BeaconIntervalSet {
    let mut v = vec![rng.gen_range(1..=4u64)];
    for _ in 0..rng.gen_range(0..5) {
        let next = v.last().unwrap() * rng.gen_range(2..=4u64);
        if next <= max {
            v.push(next);
        }
    }
    set(&v)
}

fn any_set(rng: &mut ChaCha8Rng, max_b: u64, max_len: usize) -> BeaconIntervalSet {
    let len = rng.gen_range(1..=max_len);
    set(&(0..len).map(|_| rng.gen_range(1..=max_b)).collect::<Vec<_>>())
}

/// A random prefix of scans and idle slots followed by a shifted PSV pass.
fn complete_schedule(rng: &mut ChaCha8Rng) -> (BeaconIntervalSet, ChannelSet, ListeningSchedule) {
    let b = any_set(rng, 8, 3);
    let m = rng.gen_range(1..=3);
    let c = ch(m);
    let prefix = rng.gen_range(0..30u64);
    let mut entries: Vec<(u64, usize)> = (1..=prefix)
        .filter_map(|t| rng.gen_bool(0.7).then(|| (t, rng.gen_range(0..m))))
        .collect();
    entries.extend(psv(&b, c).iter().map(|(t, k)| (t + prefix, k)));
    (b, c, ListeningSchedule::from_entries(entries).unwrap())
}

fn property_suites(report: &mut Report) {
    let budget = OracleBudget::default();

    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut bad = Vec::new();
    for _ in 0..CASES {
        let b = f3_set(&mut rng, 16);
        let c = ch(rng.gen_range(1..=4));
        let seed = rng.gen();
        let best = optimal_emdt(&b, c, budget).unwrap().value;
        let span = b.max() * c.count() as u64;
        let mut runs: Vec<(String, ListeningSchedule)> = tiebreaks(seed)
            .into_iter()
            .map(|tb| (tb.to_string(), greedy(&b, c, tb)))
            .collect();
        runs.push(("chan-train".into(), chan_train(&b, c)));
        for (name, s) in runs {
            let ok = is_recursive(&s, &b, c) && makespan(&s, &b, c).unwrap() == span && emdt(&s, &b, c).unwrap() == best;
            if !ok {
                bad.push(format!("{name} on {:?}x{}", b.intervals(), c.count()));
            }
        }
    }
    report.record("2.f3-optimality", bad.is_empty(), format!("{CASES} cases, failures {bad:?}"));

    let f2 = sample_f2(&SampleSpec {
        values: (1, 24),
        cardinality: (1, 8),
        ..SampleSpec::f2()
    })
    .unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut bad = Vec::new();
    for _ in 0..CASES {
        let b = &f2[rng.gen_range(0..f2.len())];
        let c = ch(rng.gen_range(1..=4));
        let seed = rng.gen();
        for tb in tiebreaks(seed) {
            let s = greedy(b, c, tb);
            if makespan(&s, b, c).ok() != Some(b.max() * c.count() as u64) {
                bad.push(format!("{tb} on {:?}x{}", b.intervals(), c.count()));
            }
        }
    }
    report.record(
        "2.f2-greedy-makespan",
        bad.is_empty(),
        format!("{CASES} cases over {} sets, failures {bad:?}", f2.len()),
    );

    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut literal, mut corrected) = (Vec::new(), Vec::new());
    for _ in 0..CASES {
        let (b, c, s) = complete_schedule(&mut rng);
        let e = emdt(&s, &b, c).unwrap();
        let full = mdt(&s, &complete_environment(&b, c)).unwrap();
        let prop = mdt(&s, &proportional_environment(&b, c)).unwrap();
        if e != full {
            literal.push(format!("{:?}x{}: emdt {e}, mdt {full}", b.intervals(), c.count()));
        }
        if e != prop {
            corrected.push(format!("{:?}x{}: emdt {e}, mdt {prop}", b.intervals(), c.count()));
        }
    }
    let s = ListeningSchedule::from_entries([(1, 0), (2, 1), (3, 1), (4, 0)]).unwrap();
    let (b, c) = (set(&[1, 2]), ch(2));
    report.record(
        "2.emdt-equals-mdt-complete-environment",
        literal.is_empty(),
        format!(
            "{} of {CASES} cases differ; e.g. {{1,2}}x2 c0,c1,c1,c0 has emdt {} but complete-environment mdt {}",
            literal.len(),
            emdt(&s, &b, c).unwrap(),
            mdt(&s, &complete_environment(&b, c)).unwrap()
        ),
    );
    report.record(
        "2.emdt-equals-mdt-proportional-environment",
        corrected.is_empty(),
        format!("{CASES} cases, mismatches {corrected:?}"),
    );

    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut bad = Vec::new();
    for _ in 0..CASES {
        let (b, c, s) = complete_schedule(&mut rng);
        let fixed = repair_to_lcm_bound(&s, &b, c).unwrap();
        let before = discovery_times(&s, &b, c);
        let after = discovery_times(&fixed, &b, c);
        let ok = is_complete(&fixed, &b, c)
            && makespan(&fixed, &b, c).unwrap() <= b.lcm() * c.count() as u64
            && before.iter().all(|(k, t)| after.get(k).is_some_and(|u| u <= t));
        if !ok {
            bad.push(format!("{:?}x{}", b.intervals(), c.count()));
        }
    }
    report.record("2.repair", bad.is_empty(), format!("{CASES} cases, failures {bad:?}"));

    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut bad, mut compared) = (Vec::new(), 0);
    for _ in 0..CASES {
        let b2 = rng.gen_range(2..=12u64);
        let b1 = rng.gen_range(1..b2);
        let c = ch(rng.gen_range(1..=5));
        let b = set(&[b1, b2]);
        let s = opt_b2(b1, b2, c).unwrap();
        let mut ok = is_recursive(&s, &b, c);
        if b.lcm() * c.count() as u64 <= 16 {
            compared += 1;
            ok &= emdt(&s, &b, c).unwrap() == optimal_emdt(&b, c, budget).unwrap().value;
        }
        if !ok {
            bad.push(format!("({b1},{b2})x{}", c.count()));
        }
    }
    report.record(
        "2.opt-b2",
        bad.is_empty(),
        format!("{CASES} cases, {compared} compared with the oracle, failures {bad:?}"),
    );

    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut bad = Vec::new();
    let mut done = 0;
    while done < 50 {
        let m = rng.gen_range(1..=3);
        let b = any_set(&mut rng, 8, 4);
        if b.lcm() * m as u64 > 24 {
            continue;
        }
        done += 1;
        let c = ch(m);
        let o = optimal_emdt(&b, c, budget).unwrap();
        let g = genopt(&b, c, &GenoptOptions::default()).unwrap().outcome;
        let w = witness(o.witness.as_ref().unwrap());
        if g.objective != Some(o.value) || emdt(&w, &b, c).unwrap() != o.value {
            bad.push(format!(
                "{:?}x{m}: genopt {:?}, oracle {}",
                b.intervals(),
                g.objective,
                o.value
            ));
        }
    }
    report.record(
        "2.genopt-oracle-cross-validation",
        bad.is_empty(),
        format!("50 instances, disagreements {bad:?}"),
    );
}

fn monte_carlo(report: &mut Report) {
    let (b12, c2) = (set(&[1, 2]), ch(2));
    let fig = set(&[2, 3, 4, 6, 12]);
    let optimal = witness(
        optimal_emdt(&b12, c2, OracleBudget::default())
            .unwrap()
            .witness
            .as_ref()
            .unwrap(),
    );
    let triples = [
        ("psv {1,2}x2", psv(&b12, c2), b12.clone(), c2),
        ("optimal {1,2}x2", optimal, b12.clone(), c2),
        ("greedy-dtr {2,3,4,6,12}x2", greedy(&fig, c2, Tiebreak::Dtr), fig.clone(), c2),
    ];
    let mut lines = Vec::new();
    let mut pass = true;
    for (name, s, b, c) in triples {
        let exact = emdt(&s, &b, c).unwrap();
        let hits = (0..MC_REPEATS)
            .filter(|&rep| {
                monte_carlo_emdt(&s, &b, c, MC_TRIALS, MC_NETWORKS, rep)
                    .unwrap()
                    .contains(exact)
            })
            .count();
        pass &= hits >= MC_HITS;
        lines.push(format!("{name} emdt {exact}: {hits}/{MC_REPEATS}"));
    }
    report.record("3.monte-carlo-coverage", pass, lines.join("; "));
}

fn desk_trend(report: &mut Report) {
    let config = ExperimentConfig::desk_scale(0);
    let start = Instant::now();
    let table = run_experiment(&config).unwrap();
    let took = start.elapsed();

    let aggregates = table.aggregate();
    let mean = |name: &str, m: usize| {
        aggregates
            .iter()
            .find(|a| a.strategy.name() == name && a.channels == m)
            .and_then(|a| a.emdt_norm.as_ref())
            .map(|e| e.mean)
    };
    println!("  desk scale: {} sets, {:.0?}", table.sets.len(), took);
    for a in &aggregates {
        if let Some(e) = &a.emdt_norm {
            println!(
                "  {:<16} |C|={} emdt_norm {:.4} ± {:.4}",
                a.strategy.name(),
                a.channels,
                e.mean,
                e.half_width
            );
        }
    }

    let greedy_names = ["greedy-rnd", "greedy-dtr", "greedy-rnd-swt", "greedy-dtr-swt"];
    let mut worst = (String::new(), 0.0f64);
    let mut complete = table.failures.is_empty();
    for m in &table.channels {
        for name in greedy_names {
            match mean(name, *m) {
                Some(v) if v > worst.1 => worst = (format!("{name} |C|={m}"), v),
                Some(_) => {}
                None => complete = false,
            }
        }
    }
    report.record(
        "4.greedy-near-optimal",
        complete && worst.1 <= GREEDY_NORM_MAX,
        format!("largest greedy mean {:.4} ({})", worst.1, worst.0),
    );

    let psv_means: Vec<f64> = table.channels.iter().filter_map(|m| mean("psv", *m)).collect();
    let increasing = psv_means.windows(2).all(|w| w[1] > w[0]);
    report.record(
        "4.psv-diverges",
        psv_means.len() == table.channels.len() && psv_means.iter().all(|v| *v >= PSV_NORM_MIN) && increasing,
        format!(
            "psv means by |C| {:?}",
            psv_means.iter().map(|v| format!("{v:.3}")).collect::<Vec<_>>()
        ),
    );

    let mut below = Vec::new();
    let mut worst_lb = 0.0f64;
    for row in &table.rows {
        let reference = table.reference(row.channels, row.bi_set).unwrap();
        if row.emdt_norm < 1.0 - reference.gap() - FLOAT_SLACK {
            below.push(format!("{} |C|={} set {}", row.strategy.name(), row.channels, row.bi_set));
        }
        if row.strategy.name().starts_with("greedy") {
            worst_lb = worst_lb.max(row.emdt.to_f64() / reference.lower_bound.to_f64());
        }
    }
    let gaps: Vec<f64> = table.references.iter().map(|r| r.gap()).filter(|g| *g > 0.0).collect();
    report.record(
        "4.normalization-consistent",
        below.is_empty(),
        format!(
            "{} references with a bound gap (max {:.4}); worst greedy EMDT over the lower bound {:.4}; below 1 - gap: {below:?}",
            gaps.len(),
            gaps.iter().copied().fold(0.0, f64::max),
            worst_lb
        ),
    );
}

/// Divisor subsets by bitmask, independent of the sampler's recursion.
fn f2_by_bitmask(lo: u64, hi: u64) -> BTreeSet<Vec<u64>> {
    let mut out = BTreeSet::new();
    for n in lo..=hi {
        let divisors: Vec<u64> = (1..n).filter(|d| n % d == 0).collect();
        for mask in 0u32..(1 << divisors.len()) {
            let mut v: Vec<u64> = (0..divisors.len())
                .filter(|i| mask >> i & 1 == 1)
                .map(|i| divisors[i])
                .collect();
            v.push(n);
            let g = v.iter().fold(0, |g, &x| num_gcd(g, x));
            if g == 1 {
                out.insert(v);
            }
        }
    }
    out
}

fn num_gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        num_gcd(b, a % b)
    }
}

fn sampler(report: &mut Report) {
    let spec = SampleSpec {
        values: (1, 16),
        cardinality: (1, 16),
        ..SampleSpec::f2()
    };
    let sampled = sample_f2(&spec).unwrap();
    let got: BTreeSet<Vec<u64>> = sampled.iter().map(|s| s.intervals().to_vec()).collect();
    let want = f2_by_bitmask(1, 16);
    let families = sampled.iter().all(|s| s.family().is_within(Family::F2));
    report.record(
        "5.f2-small-range",
        got == want && got.len() == sampled.len() && families,
        format!("{} sampled, {} enumerated", sampled.len(), want.len()),
    );

    if std::env::var("BEACONSCAN_LONG_TESTS").as_deref() != Ok("1") {
        report.skip("5.f1-exhaustion", "set BEACONSCAN_LONG_TESTS=1");
        report.skip("5.f2-full-count", "set BEACONSCAN_LONG_TESTS=1");
        return;
    }
    let spec = SampleSpec::f1(0);
    let space = f1_space_size(&spec);
    let all = sample_f1(&spec, 775).map(|v| v.len());
    let over = sample_f1(&spec, 776);
    report.record(
        "5.f1-exhaustion",
        space == Some(775)
            && all.as_ref().ok() == Some(&775)
            && matches!(over, Err(Error::SampleSpaceExhausted { available: 775, .. })),
        format!("space {space:?}, drawn {all:?}"),
    );
    let n = sample_f2(&SampleSpec::f2()).unwrap().len();
    report.record("5.f2-full-count", n == 259_286, format!("{n} sets"));
}

fn main() {
    let mut report = Report::default();
    exact_values(&mut report);
    property_suites(&mut report);
    monte_carlo(&mut report);
    desk_trend(&mut report);
    sampler(&mut report);

    let surprises = report.surprises();
    let passed = report.outcomes.iter().filter(|o| o.pass).count();
    println!("acceptance: {passed}/{} criteria pass", report.outcomes.len());
    if !surprises.is_empty() {
        eprintln!("unexpected results:");
        for s in &surprises {
            eprintln!("  {s}");
        }
        std::process::exit(1);
    }
}
