//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero if any criterion fails.
//!
//! `cargo test -p mms-core --test acceptance`

mod common;

use std::time::{Duration, Instant};

use mms_core::batch;
use mms_core::exact::{self, OracleConfig, Proportion};
use mms_core::gen::{self, GenParams};
use mms_core::model::{int, ratio, Allocation, Category, Instance, Value};
use mms_core::ordered::{recover, to_ordered};
use mms_core::pipeline::{self, bisect_default, half, Prepared, SolveOptions};
use num_traits::{One, ToPrimitive};

use common::*;

const GUARANTEE_PER_N: usize = 2000;
const ORACLE_PER_N: usize = 500;
const STAT_N2: usize = 2000;

struct Outcome {
    id: &'static str,
    pass: bool,
    detail: String,
}

fn check(id: &'static str, pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { id, pass, detail: detail.into() }
}

fn guarantee_corpus() -> Vec<(usize, u64, Instance)> {
    let mut out = Vec::new();
    for n in 2..=10 {
        for (seed, inst) in gen::corpus(n, GUARANTEE_PER_N, 1).unwrap() {
            out.push((n, seed, inst));
        }
    }
    out
}

struct GuaranteeRow {
    ok: bool,
    feasible: bool,
    certified: bool,
    remaining_violations: usize,
    other_violations: usize,
}

/// Criteria 1, 5 (proxy bound) and 7 share one pass over the corpus.
fn criteria_1_5_7(corpus: &[(usize, u64, Instance)]) -> Vec<Outcome> {
    let start = Instant::now();
    let rows = batch::map(corpus, |(_, _, inst)| {
        match pipeline::solve_with(inst, &half(), SolveOptions { check_invariants: true, ..Default::default() }) {
            Ok(sol) => {
                let feasible = sol.allocation.is_feasible(inst).unwrap_or(false);
                let certified = sol.per_agent_value.iter().zip(&sol.units).all(|(v, u)| *v >= half() * u);
                GuaranteeRow {
                    ok: true,
                    feasible,
                    certified,
                    remaining_violations: sol.invariants.remaining_value,
                    other_violations: sol.invariants.total() - sol.invariants.remaining_value,
                }
            }
            Err(_) => GuaranteeRow {
                ok: false,
                feasible: false,
                certified: false,
                remaining_violations: 0,
                other_violations: 0,
            },
        }
    });
    let elapsed = start.elapsed();
    let failed = rows.iter().filter(|r| !r.ok).count();
    let infeasible = rows.iter().filter(|r| r.ok && !r.feasible).count();
    let uncertified = rows.iter().filter(|r| r.ok && !r.certified).count();
    let remaining: usize = rows.iter().map(|r| r.remaining_violations).sum();
    let other: usize = rows.iter().map(|r| r.other_violations).sum();

    let c1 = check(
        "1 guarantee suite",
        failed == 0 && infeasible == 0 && uncertified == 0 && elapsed < Duration::from_secs(30),
        format!(
            "{} instances, failures={failed} infeasible={infeasible} uncertified={uncertified}, {:.1}s (limit 30s)",
            rows.len(),
            elapsed.as_secs_f64()
        ),
    );
    let c7 = check(
        "7 remaining-value assertion",
        remaining == 0 && other == 0,
        format!("remaining-value violations={remaining}, other bag invariant violations={other}"),
    );

    let start = Instant::now();
    let best: Vec<Option<Value>> = batch::map(corpus, |(_, _, inst)| bisect_default(inst).ok().map(|r| r.best_alpha));
    let mut alphas: Vec<Value> = best.iter().flatten().cloned().collect();
    alphas.sort();
    let median = alphas.get(alphas.len() / 2).cloned();
    let all_ok = alphas.len() == corpus.len() && alphas.iter().all(|a| *a >= half());
    let c5 = check(
        "5 proxy bound + bisection median",
        all_ok && uncertified == 0 && median.as_ref().is_some_and(|m| *m >= ratio(55, 100)),
        format!(
            "proxy bound violations={uncertified}, median best_alpha={:.4} (need >= 0.55), {:.1}s",
            median.and_then(|m| m.to_f64()).unwrap_or(f64::NAN),
            start.elapsed().as_secs_f64()
        ),
    );
    vec![c1, c5, c7]
}

fn oracle_ratio(inst: &Instance, alloc: &Allocation) -> Option<Proportion> {
    let mms = exact::all_mms(inst, OracleConfig::default()).ok()?;
    Some(exact::proportion_against(inst, alloc, &mms))
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let mut corpus = Vec::new();
    for n in [2, 3] {
        corpus.extend(gen::corpus(n, ORACLE_PER_N, 7).unwrap().into_iter().map(|(_, i)| i));
    }
    let bad = batch::map(&corpus, |inst| {
        let Ok(mms) = exact::all_mms(inst, OracleConfig::default()) else { return (1, 0) };
        let prep = Prepared::new(inst).unwrap();
        let fixed = prep.solve(&half(), SolveOptions::default()).unwrap();
        let fixed_ok = exact::proportion_against(inst, &fixed.allocation, &mms) >= Proportion::Finite(half());
        let bis = prep.bisect(&half(), &int(2), pipeline::DEFAULT_BISECT_ITERS).unwrap();
        let bis_ok =
            exact::proportion_against(inst, &bis.solution.allocation, &mms) >= Proportion::Finite(bis.best_alpha);
        (usize::from(!fixed_ok), usize::from(!bis_ok))
    });
    let (f, b) = bad.iter().fold((0, 0), |a, x| (a.0 + x.0, a.1 + x.1));
    check(
        "2 oracle ratio suite",
        f == 0 && b == 0 && start.elapsed() < Duration::from_secs(600),
        format!(
            "{} instances, half-ratio violations={f}, bisection-ratio violations={b}, {:.1}s",
            corpus.len(),
            start.elapsed().as_secs_f64()
        ),
    )
}

fn criterion_3() -> Outcome {
    let inst = thirteen();
    let r = exact::exact_mms(&inst, 0).unwrap();
    let min_bundle = r.witness.bundles.iter().map(|b| inst.bundle_value(0, b).unwrap()).min().unwrap();
    let feasible = r.witness.is_feasible(&inst).unwrap();
    check(
        "3 example instance MMS",
        r.mms == int(60) && min_bundle == int(60) && feasible,
        format!("mms={} witness min bundle={min_bundle} feasible={feasible}", r.mms),
    )
}

fn criterion_4() -> Outcome {
    let corpus: Vec<Instance> = gen::corpus(2, STAT_N2, 1).unwrap().into_iter().map(|(_, i)| i).collect();
    let ratios = batch::map(&corpus, |inst| {
        let sol = pipeline::solve(inst, &half()).unwrap();
        oracle_ratio(inst, &sol.allocation).expect("n=2 within budget")
    });
    let finite: Vec<f64> = ratios.iter().map(|r| r.to_f64().min(1e9)).collect();
    // agents with zero MMS cannot occur for values >= 1
    let mean = finite.iter().sum::<f64>() / finite.len() as f64;
    let full = ratios.iter().filter(|r| **r >= Proportion::Finite(Value::one())).count() as f64 / ratios.len() as f64;
    check(
        "4 two-agent statistics",
        (mean - 0.92).abs() <= 0.03 && (full - 0.38).abs() <= 0.04,
        format!(
            "mean ratio={mean:.4} (0.92±0.03), full-MMS fraction={full:.4} (0.38±0.04), {} instances",
            ratios.len()
        ),
    )
}

fn criterion_6() -> Outcome {
    let mut cases = Vec::new();
    for n in 2..=6 {
        let m = 4 * n;
        // every agent values all its items equally; item = μ/4 exactly
        let equal = Instance::from_integers(&vec![vec![1; m]; n], vec![Category::new((0..m).collect(), 4)]);
        let scaled: Vec<Vec<i64>> = (0..n).map(|i| vec![(i as i64 + 1) * 3; m]).collect();
        let scaled = Instance::from_integers(&scaled, vec![Category::new((0..m).collect(), 4)]);
        cases.push(equal);
        cases.push(scaled);
    }
    let mut worst: Option<Value> = None;
    let mut all = true;
    for inst in &cases {
        let res = bisect_default(inst).unwrap();
        all &= res.best_alpha >= ratio(3, 4);
        if worst.as_ref().is_none_or(|w| res.best_alpha < *w) {
            worst = Some(res.best_alpha);
        }
    }
    check(
        "6 quarter-value instances",
        all,
        format!("{} instances, min best_alpha={:.6} (need >= 0.75)", cases.len(), worst.unwrap().to_f64().unwrap()),
    )
}

fn criterion_8() -> Outcome {
    let seeds: Vec<u64> = (0..1000).collect();
    let results = batch::map(&seeds, |&s| {
        let mut r = rng(s);
        let n = 2 + (s % 4) as usize;
        let inst = random_instance(&mut r, n, 10, 30);
        let ord = to_ordered(&inst);
        let a = random_feasible(&ord.instance, &mut r);
        let rec = recover(&ord, &a).unwrap();
        let mut ok = rec.is_feasible(&inst).unwrap();
        let before = a.agent_values(&ord.instance);
        let after = rec.agent_values(&inst);
        ok &= after.iter().zip(&before).all(|(x, y)| x >= y);
        let mms_ok = if n <= 3 {
            (0..n).all(|i| exact::exact_mms(&inst, i).unwrap().mms == exact::exact_mms(&ord.instance, i).unwrap().mms)
        } else {
            true
        };
        (ok, mms_ok)
    });
    let rec_bad = results.iter().filter(|r| !r.0).count();
    let mms_bad = results.iter().filter(|r| !r.1).count();
    check(
        "8 transform properties",
        rec_bad == 0 && mms_bad == 0,
        format!("1000 instances, recovery violations={rec_bad}, MMS mismatches={mms_bad}"),
    )
}

fn criterion_9() -> Outcome {
    let corpus = gen::corpus(2, 200, 99).unwrap();
    let mismatches = batch::map(&corpus, |(_, inst)| {
        assert!(inst.m() <= 8);
        (0..2).filter(|&i| exact::exact_mms(inst, i).unwrap().mms != naive_mms(inst, i)).count()
    });
    let bad: usize = mismatches.iter().sum();
    check("9 oracle equivalence", bad == 0, format!("200 instances (n=2, m<=8), mismatches={bad}"))
}

fn median(mut xs: Vec<Duration>) -> Duration {
    xs.sort();
    xs[xs.len() / 2]
}

fn criterion_10() -> Outcome {
    let mut solve_times = Vec::new();
    for seed in 0..31 {
        let inst = gen::generate(&GenParams { m_range: Some((40, 40)), ..GenParams::new(10, seed) }).unwrap();
        let t = Instant::now();
        pipeline::solve(&inst, &half()).unwrap();
        solve_times.push(t.elapsed());
    }
    let mut oracle_times = Vec::new();
    for seed in 0..11 {
        let inst = gen::generate(&GenParams { m_range: Some((12, 12)), ..GenParams::new(3, seed) }).unwrap();
        let t = Instant::now();
        exact::exact_mms(&inst, 0).unwrap();
        oracle_times.push(t.elapsed());
    }
    let s = median(solve_times);
    let o = median(oracle_times);
    check(
        "10 performance",
        s < Duration::from_millis(10) && o < Duration::from_secs(5),
        format!(
            "solve n=10 m=40 median={:.3}ms (<10ms), exact_mms n=3 m=12 median={:.3}ms (<5s)",
            s.as_secs_f64() * 1e3,
            o.as_secs_f64() * 1e3
        ),
    )
}

fn main() {
    let mut outcomes = vec![criterion_10(), criterion_3(), criterion_9(), criterion_6(), criterion_8()];
    let corpus = guarantee_corpus();
    outcomes.extend(criteria_1_5_7(&corpus));
    outcomes.push(criterion_2());
    outcomes.push(criterion_4());

    outcomes.sort_by_key(|o| o.id.split(' ').next().unwrap().parse::<u32>().unwrap());
    let mut failed = 0;
    for o in &outcomes {
        println!("[{}] criterion {}: {}", if o.pass { "PASS" } else { "FAIL" }, o.id, o.detail);
        failed += usize::from(!o.pass);
    }
    println!("acceptance: {} passed, {} failed", outcomes.len() - failed, failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
