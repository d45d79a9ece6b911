//! Exact maximin shares for small instances, by depth-first branch and bound.
//!
//! Values are scaled to integers (common denominator) before searching; the
//! search runs on `u64` when the scaled total fits and on `BigInt` otherwise.

use std::ops::{Add, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::OracleError;
use crate::model::{Allocation, Instance, Value};

pub const DEFAULT_NODE_BUDGET: u64 = 100_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleConfig {
    pub node_budget: u64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig { node_budget: DEFAULT_NODE_BUDGET }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactResult {
    pub mms: Value,
    /// A feasible allocation whose least valuable bundle (for the agent) is
    /// worth exactly `mms`.
    pub witness: Allocation,
    pub nodes_explored: u64,
}

/// A ratio that may be unbounded (an agent whose MMS is zero).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Proportion {
    Finite(Value),
    Unbounded,
}

impl Proportion {
    pub fn finite(&self) -> Option<&Value> {
        match self {
            Proportion::Finite(v) => Some(v),
            Proportion::Unbounded => None,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Proportion::Finite(v) => v.to_f64().unwrap_or(f64::NAN),
            Proportion::Unbounded => f64::INFINITY,
        }
    }
}

trait Weight: Clone + Ord + Zero + One + Add<Output = Self> + Sub<Output = Self> {}
impl<T: Clone + Ord + Zero + One + Add<Output = T> + Sub<Output = T>> Weight for T {}

/// Exact maximin share of `agent`.
pub fn exact_mms(inst: &Instance, agent: usize) -> Result<ExactResult, OracleError> {
    exact_mms_with(inst, agent, OracleConfig::default())
}

pub fn exact_mms_with(inst: &Instance, agent: usize, cfg: OracleConfig) -> Result<ExactResult, OracleError> {
    let violations = inst.validate();
    if !violations.is_empty() {
        return Err(crate::error::ModelError::Invalid(violations).into());
    }
    if agent >= inst.n() {
        return Err(crate::error::ModelError::UnknownAgent(agent).into());
    }
    let (weights, scale) = integer_weights(&inst.values()[agent]);
    let total: BigInt = weights.iter().sum();
    let (best, assign, nodes) = match total.to_u64() {
        Some(t) => {
            let w: Vec<u64> = weights.iter().map(|w| w.to_u64().expect("bounded by total")).collect();
            let (b, a, n) = MaxMin::new(inst, &[w], cfg, true, Some(t / inst.n() as u64)).run()?;
            (BigInt::from(b), a, n)
        }
        None => {
            let upper = &total / BigInt::from(inst.n());
            MaxMin::new(inst, &[weights], cfg, true, Some(upper)).run()?
        }
    };
    let mut bundles = vec![Vec::new(); inst.n()];
    for (j, &b) in assign.iter().enumerate() {
        bundles[b].push(j);
    }
    Ok(ExactResult { mms: Value::new(best, scale), witness: Allocation::new(bundles), nodes_explored: nodes })
}

/// `min_i v_i(A_i) / μ_i` over all agents, computing each `μ_i` exactly.
pub fn allocation_proportion(inst: &Instance, alloc: &Allocation) -> Result<Proportion, OracleError> {
    let mms = all_mms(inst, OracleConfig::default())?;
    Ok(proportion_against(inst, alloc, &mms))
}

/// Scores an allocation against known maximin shares.
pub fn proportion_against(inst: &Instance, alloc: &Allocation, mms: &[Value]) -> Proportion {
    alloc
        .agent_values(inst)
        .into_iter()
        .zip(mms)
        .map(|(v, mu)| if mu.is_zero() { Proportion::Unbounded } else { Proportion::Finite(v / mu) })
        .min()
        .unwrap_or(Proportion::Unbounded)
}

/// Every agent's exact maximin share.
pub fn all_mms(inst: &Instance, cfg: OracleConfig) -> Result<Vec<Value>, OracleError> {
    (0..inst.n()).map(|i| exact_mms_with(inst, i, cfg).map(|r| r.mms)).collect()
}

/// Best achievable `min_i v_i(A_i) / μ_i` over all feasible allocations.
pub fn optimal_proportion(inst: &Instance) -> Result<Proportion, OracleError> {
    optimal_proportion_with(inst, OracleConfig::default())
}

pub fn optimal_proportion_with(inst: &Instance, cfg: OracleConfig) -> Result<Proportion, OracleError> {
    let mms = all_mms(inst, cfg)?;
    let bounded: Vec<usize> = (0..inst.n()).filter(|&i| !mms[i].is_zero()).collect();
    if bounded.is_empty() {
        return Ok(Proportion::Unbounded);
    }
    // one shared denominator for all v_ij / μ_i
    let rows: Vec<Vec<Value>> = (0..inst.n())
        .map(|i| {
            if mms[i].is_zero() {
                vec![Value::zero(); inst.m()]
            } else {
                inst.values()[i].iter().map(|v| v / &mms[i]).collect()
            }
        })
        .collect();
    let flat: Vec<Value> = rows.iter().flatten().cloned().collect();
    let (flat_w, scale) = integer_weights(&flat);
    let m = inst.m();
    let weights: Vec<Vec<BigInt>> = flat_w.chunks(m.max(1)).take(inst.n()).map(<[BigInt]>::to_vec).collect();
    let weights = if m == 0 { vec![Vec::new(); inst.n()] } else { weights };
    let mut search = MaxMin::new(inst, &weights, cfg, false, None);
    search.ignore = (0..inst.n()).map(|i| mms[i].is_zero()).collect();
    let (best, _, _) = search.run()?;
    Ok(Proportion::Finite(Value::new(best, scale)))
}

/// Integers proportional to `values`, and the common denominator.
fn integer_weights(values: &[Value]) -> (Vec<BigInt>, BigInt) {
    let lcm = values.iter().fold(BigInt::one(), |acc, v| acc.lcm(v.denom()));
    let w = values.iter().map(|v| v.numer() * (&lcm / v.denom())).collect();
    (w, lcm)
}

/// Max-min assignment of items to bundles with per-category capacities.
///
/// With one weight row, bundles are interchangeable (maximin share of that
/// row); with one row per agent, bundle `b` is scored by row `b`.
struct MaxMin<'a, W> {
    weights: &'a [Vec<W>],
    shared: bool,
    n: usize,
    order: Vec<usize>,
    cat: Vec<usize>,
    caps: Vec<usize>,
    /// Per position in `order`, remaining weight from that position on, per row.
    suffix: Vec<Vec<W>>,
    /// Per position, remaining item count per category from that position on.
    cat_left: Vec<Vec<usize>>,
    ignore: Vec<bool>,
    sums: Vec<W>,
    counts: Vec<Vec<usize>>,
    assign: Vec<usize>,
    best: Option<W>,
    best_assign: Vec<usize>,
    upper: Option<W>,
    nodes: u64,
    budget: u64,
}

impl<'a, W: Weight> MaxMin<'a, W> {
    /// `upper` is a known bound on the objective (`⌊total/n⌋` for a shared
    /// row); reaching it ends the search.
    fn new(inst: &Instance, weights: &'a [Vec<W>], cfg: OracleConfig, shared: bool, upper: Option<W>) -> Self {
        let n = inst.n();
        let m = inst.m();
        let cat = inst.category_of();
        let caps: Vec<usize> = inst.categories().iter().map(|c| c.k).collect();
        let key = |j: usize| weights.iter().map(|row| row[j].clone()).max().unwrap_or_else(W::zero);
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&a, &b| key(b).cmp(&key(a)).then(a.cmp(&b)));

        let rows = weights.len();
        let mut suffix = vec![vec![W::zero(); rows]; m + 1];
        let mut cat_left = vec![vec![0usize; caps.len()]; m + 1];
        for pos in (0..m).rev() {
            let j = order[pos];
            for r in 0..rows {
                suffix[pos][r] = suffix[pos + 1][r].clone() + weights[r][j].clone();
            }
            cat_left[pos] = cat_left[pos + 1].clone();
            cat_left[pos][cat[j]] += 1;
        }
        MaxMin {
            weights,
            shared,
            n,
            order,
            cat,
            caps: caps.clone(),
            suffix,
            cat_left,
            ignore: vec![false; n],
            sums: vec![W::zero(); n],
            counts: vec![vec![0; caps.len()]; n],
            assign: vec![0; m],
            best: None,
            best_assign: Vec::new(),
            upper,
            nodes: 0,
            budget: cfg.node_budget,
        }
    }

    fn row(&self, b: usize) -> usize {
        if self.shared {
            0
        } else {
            b
        }
    }

    fn run(mut self) -> Result<(W, Vec<usize>, u64), OracleError> {
        self.dfs(0, 0)?;
        let best = self.best.expect("a valid instance has a feasible allocation");
        Ok((best, self.best_assign, self.nodes))
    }

    fn objective(&self) -> W {
        (0..self.n).filter(|&b| !self.ignore[b]).map(|b| self.sums[b].clone()).min().unwrap_or_else(W::zero)
    }

    fn done(&self) -> bool {
        self.upper.is_some() && self.best == self.upper
    }

    /// `used` counts bundles touched so far (symmetry breaking for shared rows).
    fn dfs(&mut self, pos: usize, used: usize) -> Result<(), OracleError> {
        self.nodes += 1;
        if self.nodes > self.budget {
            return Err(OracleError::BudgetExceeded { budget: self.budget });
        }
        if pos == self.order.len() {
            let obj = self.objective();
            if self.best.as_ref().is_none_or(|b| obj > *b) {
                self.best = Some(obj);
                self.best_assign = self.assign.clone();
            }
            return Ok(());
        }
        if self.prune(pos) {
            return Ok(());
        }
        let j = self.order[pos];
        let h = self.cat[j];
        let limit = if self.shared { (used + 1).min(self.n) } else { self.n };
        let mut cands: Vec<usize> = (0..limit).filter(|&b| self.counts[b][h] < self.caps[h]).collect();
        // poorest bundle first
        cands.sort_by(|&a, &b| self.sums[a].cmp(&self.sums[b]).then(a.cmp(&b)));
        let mut tried: Vec<usize> = Vec::new();
        for b in cands {
            if self.shared && tried.iter().any(|&t| self.sums[t] == self.sums[b] && self.counts[t] == self.counts[b]) {
                continue;
            }
            tried.push(b);
            let w = self.weights[self.row(b)][j].clone();
            self.sums[b] = self.sums[b].clone() + w.clone();
            self.counts[b][h] += 1;
            self.assign[j] = b;
            let res = self.dfs(pos + 1, used.max(b + 1));
            self.sums[b] = self.sums[b].clone() - w;
            self.counts[b][h] -= 1;
            res?;
            if self.done() {
                break;
            }
        }
        Ok(())
    }

    /// Whether the remaining items cannot lift every bundle above the incumbent.
    fn prune(&self, pos: usize) -> bool {
        if self.done() {
            return true;
        }
        let Some(best) = &self.best else { return false };
        let target = best.clone() + W::one();
        let left = &self.cat_left[pos];
        if self.shared {
            let mut deficit = W::zero();
            for b in 0..self.n {
                if self.sums[b] < target {
                    if !self.can_accept(b, left) {
                        return true;
                    }
                    deficit = deficit + (target.clone() - self.sums[b].clone());
                    if deficit > self.suffix[pos][0] {
                        return true;
                    }
                }
            }
            false
        } else {
            (0..self.n).any(|b| {
                !self.ignore[b]
                    && self.sums[b] < target
                    && (self.sums[b].clone() + self.suffix[pos][b].clone() < target || !self.can_accept(b, left))
            })
        }
    }

    fn can_accept(&self, b: usize, left: &[usize]) -> bool {
        left.iter().enumerate().any(|(h, &l)| l > 0 && self.counts[b][h] < self.caps[h])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{int, Category};

    fn twins() -> Instance {
        Instance::from_integers(&[vec![10, 8, 6, 4], vec![10, 8, 6, 4]], vec![Category::new(vec![0, 1, 2, 3], 2)])
    }

    #[test]
    fn twins_mms() {
        let r = exact_mms(&twins(), 0).unwrap();
        assert_eq!(r.mms, int(14));
        assert!(r.witness.is_feasible(&twins()).unwrap());
    }

    #[test]
    fn single_agent_gets_everything() {
        let inst = Instance::from_integers(&[vec![3, 4, 5]], vec![Category::new(vec![0, 1, 2], 3)]);
        assert_eq!(exact_mms(&inst, 0).unwrap().mms, int(12));
        assert_eq!(optimal_proportion(&inst).unwrap(), Proportion::Finite(int(1)));
    }

    #[test]
    fn proportions_twins() {
        let inst = twins();
        let good = Allocation::new(vec![vec![0, 3], vec![1, 2]]);
        let bad = Allocation::new(vec![vec![0, 1], vec![2, 3]]);
        assert_eq!(allocation_proportion(&inst, &good).unwrap(), Proportion::Finite(int(1)));
        assert_eq!(allocation_proportion(&inst, &bad).unwrap(), Proportion::Finite(crate::model::ratio(10, 14)));
        assert_eq!(optimal_proportion(&inst).unwrap(), Proportion::Finite(int(1)));
    }

    #[test]
    fn zero_mms_is_unbounded() {
        let inst = Instance::from_integers(&[vec![1, 0], vec![0, 0]], vec![Category::new(vec![0, 1], 1)]);
        let a = Allocation::new(vec![vec![0], vec![1]]);
        // agent 0's MMS is 0 (one bundle always gets item 1)
        assert_eq!(allocation_proportion(&inst, &a).unwrap(), Proportion::Unbounded);
    }

    #[test]
    fn budget_is_reported() {
        let inst = Instance::from_integers(&vec![vec![5, 4, 3, 3, 2, 1]; 3], vec![Category::new((0..6).collect(), 2)]);
        let err = exact_mms_with(&inst, 0, OracleConfig { node_budget: 3 }).unwrap_err();
        assert_eq!(err, OracleError::BudgetExceeded { budget: 3 });
    }

    #[test]
    fn rational_values_scale_back() {
        let values = vec![vec![crate::model::ratio(1, 3), crate::model::ratio(1, 6), crate::model::ratio(1, 2)]; 2];
        let inst = Instance::new(values, vec![Category::new(vec![0, 1, 2], 2)]);
        assert_eq!(exact_mms(&inst, 0).unwrap().mms, crate::model::ratio(1, 2));
    }
}
