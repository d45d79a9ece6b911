//! Constrained bag filling on a normalized ordered instance.
//!
//! Each round seeds the bag with the `⌊|C_h|/n⌋` least valuable remaining
//! items of every category, trades them one at a time for the most valuable
//! ones, then adds single items from categories whose size is not a multiple
//! of the remaining agent count. The first agent (lowest index) valuing the
//! bag at `alpha` or more takes it. The last agent keeps whatever is left.

use std::fmt;

use num_bigint::BigInt;
use num_traits::Zero;

use crate::error::BagFillError;
use crate::model::{Allocation, Instance, Value};
use crate::ordered::is_ordered;
use crate::scaled::{bag_fill, integer_rows, small_rows, RawFailure, Threshold};

/// Why a bag-filling run did not produce an `alpha` allocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BagFillFailure {
    /// Every trade and add was performed and no agent reached `alpha`.
    ExhaustedOperations { remaining_agents: usize },
    /// The sole remaining agent values the leftover items below `alpha`.
    LastAgentShort { agent: usize, value: Value },
}

impl fmt::Display for BagFillFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BagFillFailure::ExhaustedOperations { remaining_agents } => {
                write!(f, "bag operations exhausted with {remaining_agents} agents left")
            }
            BagFillFailure::LastAgentShort { agent, value } => {
                write!(f, "last agent {agent} values the leftover items at {value}")
            }
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct BagFillOptions {
    /// Evaluate the runtime invariants after every allocation.
    pub check_invariants: bool,
}

/// Counts of invariant violations observed during a checked run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct InvariantReport {
    pub allocations_checked: usize,
    /// A remaining agent valued the unallocated items below the remaining
    /// agent count.
    pub remaining_value: usize,
    /// A bag that grew past its seed was worth 1 or more to a remaining agent
    /// (only checked for `alpha = 1/2`).
    pub increment: usize,
    /// A category kept more items than the remaining agents can hold.
    pub balance: usize,
    /// An allocated bag took more than `⌈|C_h|/n⌉` or `k_h` items of a category.
    pub bundle_size: usize,
}

impl InvariantReport {
    pub fn total(&self) -> usize {
        self.remaining_value + self.increment + self.balance + self.bundle_size
    }
}

/// One bag handed out (or the leftover, for the last agent).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BagStep {
    pub agent: usize,
    pub bundle: Vec<usize>,
    pub value: Value,
    pub trades: usize,
    pub adds: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BagFillOutcome {
    /// Bundles handed out so far, in order; the last agent's leftover is
    /// included unless operations ran out.
    pub steps: Vec<BagStep>,
    pub failure: Option<BagFillFailure>,
    pub invariants: InvariantReport,
    n: usize,
}

impl BagFillOutcome {
    pub fn is_success(&self) -> bool {
        self.failure.is_none()
    }

    /// The complete allocation, present unless operations ran out.
    pub fn allocation(&self) -> Option<Allocation> {
        if matches!(self.failure, Some(BagFillFailure::ExhaustedOperations { .. })) {
            return None;
        }
        let mut bundles = vec![Vec::new(); self.n];
        for s in &self.steps {
            bundles[s.agent] = s.bundle.clone();
        }
        Some(Allocation::new(bundles))
    }
}

pub fn run_bagfill(inst: &Instance, alpha: &Value) -> Result<BagFillOutcome, BagFillError> {
    run_bagfill_with(inst, alpha, BagFillOptions::default())
}

pub fn run_bagfill_with(inst: &Instance, alpha: &Value, opts: BagFillOptions) -> Result<BagFillOutcome, BagFillError> {
    let n = inst.n();
    if n == 0 {
        return Err(BagFillError::NoAgents);
    }
    if *alpha <= Value::zero() {
        return Err(BagFillError::NonPositiveAlpha);
    }
    let n_value = Value::from_integer(BigInt::from(n));
    if let Some(i) = (0..n).find(|&i| inst.total(i) != n_value) {
        return Err(BagFillError::NotNormalized(i));
    }
    if !is_ordered(inst) {
        return Err(BagFillError::NotOrdered);
    }
    let (rows, _) = integer_rows(inst.values());
    let part = alpha.numer().max(alpha.denom());
    let run = match small_rows(&rows, part) {
        Some(small) => {
            bag_fill(&small, inst.categories(), &Threshold::new(alpha).expect("bounded"), opts.check_invariants)
        }
        None => bag_fill(&rows, inst.categories(), &Threshold::new(alpha).expect("big"), opts.check_invariants),
    };
    let value = |agent, bundle: &[usize]| inst.bundle_value(agent, bundle).expect("engine bundles are in range");
    let steps: Vec<BagStep> = run
        .steps
        .into_iter()
        .map(|s| BagStep {
            value: value(s.agent, &s.bundle),
            agent: s.agent,
            bundle: s.bundle,
            trades: s.trades,
            adds: s.adds,
        })
        .collect();
    let failure = run.failure.map(|f| match f {
        RawFailure::Exhausted { remaining_agents } => BagFillFailure::ExhaustedOperations { remaining_agents },
        RawFailure::LastShort { agent } => {
            let value = steps.last().expect("leftover step").value.clone();
            BagFillFailure::LastAgentShort { agent, value }
        }
    });
    Ok(BagFillOutcome { steps, failure, invariants: run.report, n })
}
