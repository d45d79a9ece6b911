//! Instances, allocations and the valuation arithmetic shared by every solver
//! stage.
//!
//! All values are exact rationals. Item ids and agent ids are 0-based indices
//! into the valuation matrix.

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{AllocationError, ModelError};

/// Exact valuation type.
pub type Value = BigRational;

/// Builds a [`Value`] from an integer.
pub fn int(v: i64) -> Value {
    BigRational::from_integer(BigInt::from(v))
}

/// Builds a [`Value`] from a numerator and denominator.
pub fn ratio(num: i64, den: i64) -> Value {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// A set of items and the number of them any single bundle may hold.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Category {
    pub items: Vec<usize>,
    pub k: usize,
}

impl Category {
    pub fn new(items: Vec<usize>, k: usize) -> Self {
        Category { items, k }
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }
}

/// A fair-allocation problem: `n` agents with additive valuations over `m`
/// items, the items partitioned into capacity-limited categories.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    values: Vec<Vec<Value>>,
    categories: Vec<Category>,
    m: usize,
}

/// A structural problem with an instance, reported by [`Instance::validate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    NoAgents,
    RaggedValues { agent: usize, len: usize, expected: usize },
    UnknownItem { category: usize, item: usize },
    MultiplyAssigned { item: usize },
    Unassigned { item: usize },
    ZeroThreshold { category: usize },
    Overfull { category: usize, size: usize, capacity: usize },
    NegativeValue { agent: usize, item: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NoAgents => write!(f, "instance has no agents"),
            Violation::RaggedValues { agent, len, expected } => {
                write!(f, "agent {agent} has {len} values, expected {expected}")
            }
            Violation::UnknownItem { category, item } => {
                write!(f, "category {category} lists unknown item {item}")
            }
            Violation::MultiplyAssigned { item } => write!(f, "item {item} multiply assigned"),
            Violation::Unassigned { item } => write!(f, "item {item} is in no category"),
            Violation::ZeroThreshold { category } => {
                write!(f, "category {category} has threshold k=0")
            }
            Violation::Overfull { category, size, capacity } => {
                write!(f, "|C_{category}|={size} > n·k={capacity}")
            }
            Violation::NegativeValue { agent, item } => {
                write!(f, "agent {agent} has negative value for item {item}")
            }
        }
    }
}

impl Instance {
    /// Builds an instance without validating it; empty categories are dropped.
    ///
    /// The item count is taken from the first agent's row (zero when there
    /// are no agents). Use [`Instance::validate`] to check the result.
    pub fn new(values: Vec<Vec<Value>>, categories: Vec<Category>) -> Self {
        let m = values.first().map_or(0, Vec::len);
        let categories = categories.into_iter().filter(|c| !c.is_empty()).collect();
        Instance { values, categories, m }
    }

    /// Builds an instance from integer valuations.
    pub fn from_integers(values: &[Vec<i64>], categories: Vec<Category>) -> Self {
        let values = values.iter().map(|row| row.iter().map(|&v| int(v)).collect()).collect();
        Instance::new(values, categories)
    }

    /// Builds an instance and rejects it if any invariant is violated.
    pub fn checked(values: Vec<Vec<Value>>, categories: Vec<Category>) -> Result<Self, ModelError> {
        let inst = Instance::new(values, categories);
        let violations = inst.validate();
        if violations.is_empty() {
            Ok(inst)
        } else {
            Err(ModelError::Invalid(violations))
        }
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn values(&self) -> &[Vec<Value>] {
        &self.values
    }

    pub fn categories(&self) -> &[Category] {
        &self.categories
    }

    pub fn value(&self, agent: usize, item: usize) -> &Value {
        &self.values[agent][item]
    }

    /// Category index of every item. Items outside every category map to
    /// `usize::MAX`; only meaningful on valid instances.
    pub fn category_of(&self) -> Vec<usize> {
        let mut of = vec![usize::MAX; self.m];
        for (h, c) in self.categories.iter().enumerate() {
            for &j in &c.items {
                if j < self.m {
                    of[j] = h;
                }
            }
        }
        of
    }

    /// Reports every violated structural invariant. Never fails.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let n = self.n();
        if n == 0 {
            out.push(Violation::NoAgents);
        }
        for (i, row) in self.values.iter().enumerate() {
            if row.len() != self.m {
                out.push(Violation::RaggedValues { agent: i, len: row.len(), expected: self.m });
            }
        }
        let mut seen = vec![0usize; self.m];
        for (h, c) in self.categories.iter().enumerate() {
            for &j in &c.items {
                if j < self.m {
                    seen[j] += 1;
                } else {
                    out.push(Violation::UnknownItem { category: h, item: j });
                }
            }
            if c.k == 0 {
                out.push(Violation::ZeroThreshold { category: h });
            }
            if c.len() > n * c.k {
                out.push(Violation::Overfull { category: h, size: c.len(), capacity: n * c.k });
            }
        }
        for (j, &count) in seen.iter().enumerate() {
            match count {
                0 => out.push(Violation::Unassigned { item: j }),
                1 => {}
                _ => out.push(Violation::MultiplyAssigned { item: j }),
            }
        }
        for (i, row) in self.values.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                if v.is_negative() {
                    out.push(Violation::NegativeValue { agent: i, item: j });
                }
            }
        }
        out
    }

    /// Total value `v_i(M)` of all items for `agent`.
    pub fn total(&self, agent: usize) -> Value {
        self.values[agent].iter().sum()
    }

    /// Additive value of `items` for `agent`.
    pub fn bundle_value(&self, agent: usize, items: &[usize]) -> Result<Value, ModelError> {
        if agent >= self.n() {
            return Err(ModelError::UnknownAgent(agent));
        }
        let row = &self.values[agent];
        let mut sum = Value::zero();
        for &j in items {
            sum += row.get(j).ok_or(ModelError::UnknownItem(j))?;
        }
        Ok(sum)
    }

    /// Upper bound `v_i(M)/n` on the agent's maximin share.
    pub fn mms_upper_bound(&self, agent: usize) -> Value {
        self.total(agent) / BigInt::from(self.n())
    }

    /// Rescales every agent so that its total value equals the agent count.
    pub fn normalize(&self) -> Result<(Instance, NormalizationRecord), ModelError> {
        let n = Value::from_integer(BigInt::from(self.n()));
        let mut scale = Vec::with_capacity(self.n());
        let mut values = Vec::with_capacity(self.n());
        for (i, row) in self.values.iter().enumerate() {
            let total: Value = row.iter().sum();
            if total.is_zero() {
                return Err(ModelError::ZeroTotal(i));
            }
            let a = &n / total;
            values.push(if a.is_one() { row.clone() } else { row.iter().map(|v| v * &a).collect() });
            scale.push(a);
        }
        let inst = Instance { values, categories: self.categories.clone(), m: self.m };
        Ok((inst, NormalizationRecord { scale }))
    }

    /// Multiplies one agent's valuation row by `factor`.
    pub fn scale_agent(&self, agent: usize, factor: &Value) -> Instance {
        let mut out = self.clone();
        for v in &mut out.values[agent] {
            *v *= factor;
        }
        out
    }

    /// Builds the sub-instance over the given agents and items. Items are
    /// renumbered in the order given by `items`; categories keep their order
    /// and their relative item order, empty ones are dropped.
    pub fn restrict(&self, agents: &[usize], items: &[usize]) -> Instance {
        let mut new_id = vec![usize::MAX; self.m];
        for (new, &old) in items.iter().enumerate() {
            new_id[old] = new;
        }
        let values = agents.iter().map(|&i| items.iter().map(|&j| self.values[i][j].clone()).collect()).collect();
        let categories = self
            .categories
            .iter()
            .map(|c| {
                let kept = c.items.iter().filter(|&&j| new_id[j] != usize::MAX).map(|&j| new_id[j]);
                Category::new(kept.collect(), c.k)
            })
            .filter(|c| !c.is_empty())
            .collect();
        Instance { values, categories, m: items.len() }
    }
}

/// Per-agent factors `a_i` with `a_i · v_i(M) = n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormalizationRecord {
    pub scale: Vec<Value>,
}

/// One bundle per agent; together the bundles partition the items.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Allocation {
    pub bundles: Vec<Vec<usize>>,
}

impl Allocation {
    /// Wraps the bundles, sorting the item ids inside each one.
    pub fn new(mut bundles: Vec<Vec<usize>>) -> Self {
        for b in &mut bundles {
            b.sort_unstable();
        }
        Allocation { bundles }
    }

    pub fn n(&self) -> usize {
        self.bundles.len()
    }

    /// Agent holding each item, or an error if the bundles do not partition
    /// `0..m` into `n` parts.
    pub fn owners(&self, n: usize, m: usize) -> Result<Vec<usize>, AllocationError> {
        if self.bundles.len() != n {
            return Err(AllocationError::BundleCount { found: self.bundles.len(), expected: n });
        }
        let mut owner = vec![usize::MAX; m];
        for (i, b) in self.bundles.iter().enumerate() {
            for &j in b {
                if j >= m {
                    return Err(AllocationError::UnknownItem(j));
                }
                if owner[j] != usize::MAX {
                    return Err(AllocationError::Duplicate(j));
                }
                owner[j] = i;
            }
        }
        if let Some(j) = owner.iter().position(|&o| o == usize::MAX) {
            return Err(AllocationError::Missing(j));
        }
        Ok(owner)
    }

    /// Whether every bundle takes at most `k_h` items from every category.
    /// Fails when the allocation is not a partition of the instance's items.
    pub fn is_feasible(&self, inst: &Instance) -> Result<bool, AllocationError> {
        self.owners(inst.n(), inst.m())?;
        Ok(self.bundles.iter().all(|b| bundle_fits(inst, b)))
    }

    /// Value each agent assigns to its own bundle.
    pub fn agent_values(&self, inst: &Instance) -> Vec<Value> {
        self.bundles.iter().enumerate().map(|(i, b)| b.iter().map(|&j| &inst.values[i][j]).sum()).collect()
    }
}

/// Whether a single bundle respects every category threshold.
pub fn bundle_fits(inst: &Instance, bundle: &[usize]) -> bool {
    let of = inst.category_of();
    let mut counts = vec![0usize; inst.categories().len()];
    for &j in bundle {
        let h = of[j];
        counts[h] += 1;
        if counts[h] > inst.categories()[h].k {
            return false;
        }
    }
    true
}

/// Round-robin category filling: a feasible allocation for any valid instance.
pub fn round_robin(inst: &Instance) -> Allocation {
    let n = inst.n();
    let mut bundles = vec![Vec::new(); n];
    for c in inst.categories() {
        for (pos, &j) in c.items.iter().enumerate() {
            bundles[pos % n].push(j);
        }
    }
    Allocation::new(bundles)
}

/// Distinct-item helper used by tests and diagnostics.
pub fn as_set(items: &[usize]) -> BTreeSet<usize> {
    items.iter().copied().collect()
}
