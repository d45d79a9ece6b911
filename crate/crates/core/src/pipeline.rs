//! End-to-end solver: order the instance, peel off high-valued items through
//! valid reductions, bag-fill the rest, and map the result back onto the
//! original items. Also the bisection search for the largest workable alpha.

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::bagfill::{BagFillFailure, InvariantReport};
use crate::error::{ModelError, SolveError};
use crate::model::{ratio, Allocation, Category, Instance, Value};
use crate::ordered::{recover, to_ordered, OrderedInstance};
use crate::scaled::{
    bag_fill, fits_small, integer_rows, max_row_total, padding, restrict_categories, row_total, small_rows, to_value,
    Int, RawFailure, Threshold,
};

pub const DEFAULT_BISECT_ITERS: usize = 40;

/// The guaranteed threshold, 1/2.
pub fn half() -> Value {
    ratio(1, 2)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepKind {
    /// An agent with no value left for anything takes a minimal bundle.
    ZeroValue,
    /// A reduction anchored on a single item worth at least alpha.
    Reduction { anchor: usize },
    /// A bag handed out by bag filling.
    Bag,
    /// The last agent of bag filling takes the leftovers.
    Leftover,
    /// The only agent left after reductions takes everything remaining.
    Tail,
}

/// One bundle handed out. Item ids refer to slots of the ordered instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Step {
    pub kind: StepKind,
    pub agent: usize,
    pub bundle: Vec<usize>,
    /// `v_i(M_t)/n_t` in the original scale: the bound on the agent's MMS
    /// the bundle was certified against.
    pub unit: Value,
    /// Agent count when the bundle was handed out.
    pub agents_left: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Solution {
    /// Allocation of the original instance.
    pub allocation: Allocation,
    pub per_agent_value: Vec<Value>,
    pub achieved_alpha: Value,
    /// Per agent, the MMS upper bound its bundle was certified against; every
    /// agent has `per_agent_value[i] >= achieved_alpha * units[i]`.
    pub units: Vec<Value>,
    pub trace: Vec<Step>,
    pub invariants: InvariantReport,
}

impl Solution {
    /// Smallest `v_i(A_i) / unit_i` over agents with a positive unit.
    pub fn certified_ratio(&self) -> Option<Value> {
        self.per_agent_value.iter().zip(&self.units).filter(|(_, u)| !u.is_zero()).map(|(v, u)| v / u).min()
    }
}

/// Which `(agent, item)` pair anchors a reduction when several reach alpha.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum AnchorRule {
    /// First qualifying pair scanning categories in order, then slots from
    /// the top, then agents by index.
    #[default]
    FirstInScan,
    /// Pair with the largest normalized value; ties go to the lowest agent,
    /// then the lowest item.
    Largest,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SolveOptions {
    pub check_invariants: bool,
    pub anchor: AnchorRule,
}

/// A validated instance converted to ordered form once, reusable across
/// alpha probes.
#[derive(Debug, Clone)]
pub struct Prepared {
    ordered: OrderedInstance,
    rows: Vec<Vec<BigInt>>,
    /// Per agent, the factor turning `rows` back into original values.
    denoms: Vec<BigInt>,
    wmax: BigInt,
    small: Option<Vec<Vec<i128>>>,
}

impl Prepared {
    pub fn new(inst: &Instance) -> Result<Self, SolveError> {
        let violations = inst.validate();
        if !violations.is_empty() {
            return Err(ModelError::Invalid(violations).into());
        }
        let ordered = to_ordered(inst);
        let (rows, denoms) = integer_rows(ordered.instance.values());
        let wmax = max_row_total(&rows);
        let small = small_rows(&rows, &BigInt::one());
        Ok(Prepared { ordered, rows, denoms, wmax, small })
    }

    pub fn ordered(&self) -> &OrderedInstance {
        &self.ordered
    }

    fn run(&self, alpha: &Value, opts: SolveOptions) -> Result<Run, SolveError> {
        if *alpha <= Value::zero() {
            return Err(SolveError::NonPositiveAlpha(alpha.clone()));
        }
        let cats = self.ordered.instance.categories();
        let part = alpha.numer().max(alpha.denom());
        let run = match &self.small {
            Some(small) if fits_small(&self.wmax, small.len(), part) => {
                let t = Threshold::new(alpha).expect("bounded");
                run_scaled(small.clone(), cats, &t, opts).map(|r| r.widen()).map_err(Failure::widen)
            }
            _ => {
                let t = Threshold::new(alpha).expect("big");
                run_scaled(self.rows.clone(), cats, &t, opts)
            }
        };
        run.map_err(|f| {
            SolveError::Failed(match f {
                Failure::Exhausted(remaining_agents) => BagFillFailure::ExhaustedOperations { remaining_agents },
                Failure::Short { agent, value } => {
                    BagFillFailure::LastAgentShort { agent, value: to_value(&value, self.denoms[agent].clone()) }
                }
            })
        })
    }

    /// Whether solving at `alpha` succeeds, without building the allocation.
    pub fn feasible(&self, alpha: &Value) -> bool {
        self.feasible_with(alpha, SolveOptions::default())
    }

    pub fn feasible_with(&self, alpha: &Value, opts: SolveOptions) -> bool {
        self.run(alpha, SolveOptions { check_invariants: false, ..opts }).is_ok()
    }

    pub fn solve(&self, alpha: &Value, opts: SolveOptions) -> Result<Solution, SolveError> {
        let run = self.run(alpha, opts)?;
        let n0 = self.ordered.instance.n();
        let mut bundles = vec![Vec::new(); n0];
        let mut units = vec![Value::zero(); n0];
        let trace: Vec<Step> = run
            .steps
            .into_iter()
            .map(|s| {
                let (w, k) = s.unit;
                let unit = to_value(&w, &self.denoms[s.agent] * BigInt::from(k));
                bundles[s.agent] = s.bundle.clone();
                units[s.agent] = unit.clone();
                Step { kind: s.kind, agent: s.agent, bundle: s.bundle, unit, agents_left: s.agents_left }
            })
            .collect();
        let ordered_alloc = Allocation::new(bundles);
        let allocation = recover(&self.ordered, &ordered_alloc).expect("pipeline bundles are feasible");
        let per_agent_value = allocation.agent_values(&self.ordered.origin);
        Ok(Solution {
            allocation,
            per_agent_value,
            achieved_alpha: alpha.clone(),
            units,
            trace,
            invariants: run.invariants,
        })
    }

    pub fn bisect(&self, lo: &Value, hi: &Value, iters: usize) -> Result<BisectResult, SolveError> {
        self.bisect_with(lo, hi, iters, SolveOptions::default())
    }

    pub fn bisect_with(
        &self,
        lo: &Value,
        hi: &Value,
        iters: usize,
        opts: SolveOptions,
    ) -> Result<BisectResult, SolveError> {
        self.run(lo, opts)?;
        if self.feasible_with(hi, opts) {
            let solution = self.solve(hi, opts)?;
            return Ok(BisectResult {
                best_alpha: hi.clone(),
                solution,
                iterations: 0,
                bracket: (hi.clone(), hi.clone()),
            });
        }
        let two = BigInt::from(2);
        let (mut lo, mut hi) = (lo.clone(), hi.clone());
        for _ in 0..iters {
            let mid = (&lo + &hi) / &two;
            if self.feasible_with(&mid, opts) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let solution = self.solve(&lo, opts)?;
        Ok(BisectResult { best_alpha: lo.clone(), solution, iterations: iters, bracket: (lo, hi) })
    }
}

/// A handed-out bundle with its unit kept as `(row total, agent count)` in
/// scaled integers.
struct RawStep<I> {
    kind: StepKind,
    agent: usize,
    bundle: Vec<usize>,
    unit: (I, usize),
    agents_left: usize,
}

struct Run<I = BigInt> {
    steps: Vec<RawStep<I>>,
    invariants: InvariantReport,
}

enum Failure<I = BigInt> {
    Exhausted(usize),
    Short { agent: usize, value: I },
}

impl Run<i128> {
    fn widen(self) -> Run {
        let steps = self
            .steps
            .into_iter()
            .map(|s| RawStep {
                kind: s.kind,
                agent: s.agent,
                bundle: s.bundle,
                unit: (s.unit.0.into(), s.unit.1),
                agents_left: s.agents_left,
            })
            .collect();
        Run { steps, invariants: self.invariants }
    }
}

impl Failure<i128> {
    fn widen(self) -> Failure {
        match self {
            Failure::Exhausted(r) => Failure::Exhausted(r),
            Failure::Short { agent, value } => Failure::Short { agent, value: value.into() },
        }
    }
}

/// The remaining sub-instance: rows and categories over local ids, with the
/// original agent index and ordered item id of each.
struct Work<I> {
    rows: Vec<Vec<I>>,
    cats: Vec<Category>,
    agents: Vec<usize>,
    items: Vec<usize>,
}

impl<I: Int> Work<I> {
    fn global(&self, local: &[usize]) -> Vec<usize> {
        let mut out: Vec<usize> = local.iter().map(|&j| self.items[j]).collect();
        out.sort_unstable();
        out
    }

    fn remove(&mut self, agent: usize, bundle: &[usize]) {
        let m = self.items.len();
        let mut taken = vec![false; m];
        bundle.iter().for_each(|&j| taken[j] = true);
        let kept: Vec<usize> = (0..m).filter(|&j| !taken[j]).collect();
        self.cats = restrict_categories(&self.cats, m, &kept);
        self.rows.remove(agent);
        for row in &mut self.rows {
            *row = kept.iter().map(|&j| row[j].clone()).collect();
        }
        self.agents.remove(agent);
        self.items = kept.iter().map(|&j| self.items[j]).collect();
    }

    /// An `(agent, item)` pair whose normalized value reaches alpha.
    fn high_item(&self, totals: &[I], alpha: &Threshold<I>, rule: AnchorRule) -> Option<(usize, usize)> {
        let n = self.agents.len();
        if rule == AnchorRule::FirstInScan {
            let slots = self.cats.iter().flat_map(|c| c.items.iter().copied());
            return slots
                .flat_map(|j| (0..n).map(move |i| (i, j)))
                .find(|&(i, j)| alpha.reached(&self.rows[i][j], n, &totals[i]));
        }
        let mut best: Option<(usize, usize)> = None;
        for (i, row) in self.rows.iter().enumerate() {
            for (j, w) in row.iter().enumerate() {
                if !alpha.reached(w, n, &totals[i]) {
                    continue;
                }
                let better = best.is_none_or(|(bi, bj)| {
                    w.clone() * totals[bi].clone() > self.rows[bi][bj].clone() * totals[i].clone()
                });
                if better {
                    best = Some((i, j));
                }
            }
        }
        best
    }
}

fn run_scaled<I: Int>(
    rows: Vec<Vec<I>>,
    cats: &[Category],
    alpha: &Threshold<I>,
    opts: SolveOptions,
) -> Result<Run<I>, Failure<I>> {
    let n0 = rows.len();
    let m = rows.first().map_or(0, Vec::len);
    let mut work = Work { rows, cats: cats.to_vec(), agents: (0..n0).collect(), items: (0..m).collect() };
    let mut min_unit: Vec<Option<(I, usize)>> = vec![None; n0];
    let mut steps = Vec::new();
    let mut invariants = InvariantReport::default();

    loop {
        let n = work.agents.len();
        let totals: Vec<I> = work.rows.iter().map(|r| row_total(r)).collect();
        for (i, t) in totals.iter().enumerate() {
            let slot = &mut min_unit[work.agents[i]];
            let lower = slot.as_ref().is_none_or(|(w, k)| t.clone() * I::from_usize(*k) < w.clone() * I::from_usize(n));
            if lower {
                *slot = Some((t.clone(), n));
            }
        }

        if n == 1 {
            let agent = work.agents[0];
            let (w, k) = min_unit[agent].clone().expect("set above");
            if !alpha.reached(&totals[0], k, &w) {
                return Err(Failure::Short { agent, value: totals[0].clone() });
            }
            let bundle = work.items.clone();
            steps.push(RawStep { kind: StepKind::Tail, agent, bundle, unit: (w, k), agents_left: 1 });
            break;
        }

        if let Some(z) = totals.iter().position(Zero::is_zero) {
            let pad = padding(&work.cats, n, None);
            let bundle = work.global(&pad);
            steps.push(RawStep {
                kind: StepKind::ZeroValue,
                agent: work.agents[z],
                bundle,
                unit: (I::zero(), 1),
                agents_left: n,
            });
            work.remove(z, &pad);
            continue;
        }

        if let Some((a, j)) = work.high_item(&totals, alpha, opts.anchor) {
            let mut local = vec![j];
            local.extend(padding(&work.cats, n, Some(j)));
            let kind = StepKind::Reduction { anchor: work.items[j] };
            let bundle = work.global(&local);
            steps.push(RawStep { kind, agent: work.agents[a], bundle, unit: (totals[a].clone(), n), agents_left: n });
            work.remove(a, &local);
            continue;
        }

        let bag = bag_fill(&work.rows, &work.cats, alpha, opts.check_invariants);
        invariants = bag.report;
        match bag.failure {
            Some(RawFailure::Exhausted { remaining_agents }) => return Err(Failure::Exhausted(remaining_agents)),
            Some(RawFailure::LastShort { agent }) => {
                let leftover = &bag.steps.last().expect("leftover step").bundle;
                let value = leftover.iter().fold(I::zero(), |mut acc, &j| {
                    acc += &work.rows[agent][j];
                    acc
                });
                return Err(Failure::Short { agent: work.agents[agent], value });
            }
            None => {}
        }
        let last = bag.steps.len() - 1;
        for (s, step) in bag.steps.iter().enumerate() {
            let kind = if s == last { StepKind::Leftover } else { StepKind::Bag };
            steps.push(RawStep {
                kind,
                agent: work.agents[step.agent],
                bundle: work.global(&step.bundle),
                unit: (totals[step.agent].clone(), n),
                agents_left: n - s,
            });
        }
        break;
    }
    Ok(Run { steps, invariants })
}

/// Solves `inst` at threshold `alpha`.
pub fn solve(inst: &Instance, alpha: &Value) -> Result<Solution, SolveError> {
    Prepared::new(inst)?.solve(alpha, SolveOptions::default())
}

pub fn solve_with(inst: &Instance, alpha: &Value, opts: SolveOptions) -> Result<Solution, SolveError> {
    Prepared::new(inst)?.solve(alpha, opts)
}

/// Whether [`solve`] succeeds at `alpha`.
pub fn alpha_feasible(inst: &Instance, alpha: &Value) -> bool {
    Prepared::new(inst).is_ok_and(|p| p.feasible(alpha))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BisectResult {
    pub best_alpha: Value,
    pub solution: Solution,
    pub iterations: usize,
    /// Final `(feasible, infeasible)` probes.
    pub bracket: (Value, Value),
}

/// Largest alpha in `[lo, hi]` found feasible by bisection.
pub fn bisect_alpha(inst: &Instance, lo: &Value, hi: &Value, iters: usize) -> Result<BisectResult, SolveError> {
    Prepared::new(inst)?.bisect(lo, hi, iters)
}

/// Bisection over the default interval `[1/2, 2]` with 40 probes.
pub fn bisect_default(inst: &Instance) -> Result<BisectResult, SolveError> {
    bisect_alpha(inst, &half(), &crate::model::int(2), DEFAULT_BISECT_ITERS)
}
