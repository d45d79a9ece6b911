//! Corpus runs: generate, solve, optionally score against the exact oracle.

use std::ops::RangeInclusive;
use std::time::Instant;

use mms_core::batch;
use mms_core::exact::{all_mms, proportion_against, OracleConfig, Proportion, DEFAULT_NODE_BUDGET};
use mms_core::gen::{corpus, GenError};
use mms_core::model::{int, Allocation, Instance, Value};
use mms_core::pipeline::{half, Prepared, SolveOptions, DEFAULT_BISECT_ITERS};
use mms_core::OracleError;

use crate::report::{Mode, Oracle, Ratio, ReportRow};

#[derive(Debug, Clone)]
pub struct BenchParams {
    pub ns: RangeInclusive<usize>,
    pub count: usize,
    pub seed: u64,
    pub mode: Mode,
    pub oracle: bool,
    pub node_budget: u64,
    pub opts: SolveOptions,
}

impl BenchParams {
    pub fn new(ns: RangeInclusive<usize>, count: usize, seed: u64) -> Self {
        BenchParams {
            ns,
            count,
            seed,
            mode: Mode::FixedHalf,
            oracle: false,
            node_budget: DEFAULT_NODE_BUDGET,
            opts: SolveOptions::default(),
        }
    }
}

struct Job {
    id: usize,
    seed: u64,
    inst: Instance,
}

/// Runs every instance of the corpus; rows come back in instance order.
pub fn run_bench(params: &BenchParams) -> Result<Vec<ReportRow>, GenError> {
    let mut jobs = Vec::new();
    for n in params.ns.clone() {
        for (seed, inst) in corpus(n, params.count, params.seed)? {
            jobs.push(Job { id: jobs.len(), seed, inst });
        }
    }
    Ok(batch::map(&jobs, |job| run_one(job, params)))
}

fn solve(inst: &Instance, params: &BenchParams) -> Option<(Value, Allocation)> {
    let prepared = Prepared::new(inst).ok()?;
    match params.mode {
        Mode::FixedHalf => prepared.solve(&half(), params.opts).ok().map(|s| (s.achieved_alpha, s.allocation)),
        Mode::Bisect => prepared
            .bisect_with(&half(), &int(2), DEFAULT_BISECT_ITERS, params.opts)
            .ok()
            .map(|r| (r.best_alpha, r.solution.allocation)),
    }
}

fn run_one(job: &Job, params: &BenchParams) -> ReportRow {
    let inst = &job.inst;
    let start = Instant::now();
    let solved = solve(inst, params);
    let wall_ms = start.elapsed().as_secs_f64() * 1e3;
    let oracle = match (&solved, params.oracle) {
        (Some((_, alloc)), true) => match all_mms(inst, OracleConfig { node_budget: params.node_budget }) {
            Ok(mms) => Oracle::Ok(match proportion_against(inst, alloc, &mms) {
                Proportion::Finite(v) => Ratio::Finite(v),
                Proportion::Unbounded => Ratio::Infinite,
            }),
            Err(OracleError::BudgetExceeded { .. }) => Oracle::BudgetExceeded,
            Err(e) => panic!("generated instances are valid: {e}"),
        },
        _ => Oracle::Off,
    };
    ReportRow {
        id: job.id,
        seed: job.seed,
        n: inst.n(),
        m: inst.m(),
        l: inst.categories().len(),
        mode: params.mode,
        achieved_alpha: solved.map(|(a, _)| a),
        oracle,
        wall_ms,
    }
}
