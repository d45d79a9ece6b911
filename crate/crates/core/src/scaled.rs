//! Integer engine behind bag filling and the solver pipeline.
//!
//! Every decision the solver makes is invariant under scaling one agent's
//! valuation row, so each row is multiplied by the common denominator of its
//! entries and the search runs on integers. A normalized value `v_ij` is then
//! `w_ij · n / W_i`, where `W_i` is the row total over the remaining items.
//! Rows run on `i128` when every product the engine forms provably fits,
//! and on `BigInt` otherwise.

use std::fmt::Debug;
use std::ops::{Add, AddAssign, Mul, Sub, SubAssign};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::bagfill::InvariantReport;
use crate::model::{Category, Value};

pub(crate) trait Int:
    Clone
    + Debug
    + Ord
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + for<'a> AddAssign<&'a Self>
    + for<'a> SubAssign<&'a Self>
    + Into<BigInt>
{
    fn from_usize(n: usize) -> Self;
    fn from_big(b: &BigInt) -> Option<Self>;
}

impl Int for i128 {
    fn from_usize(n: usize) -> Self {
        n as i128
    }
    fn from_big(b: &BigInt) -> Option<Self> {
        b.to_i128()
    }
}

impl Int for BigInt {
    fn from_usize(n: usize) -> Self {
        BigInt::from(n)
    }
    fn from_big(b: &BigInt) -> Option<Self> {
        Some(b.clone())
    }
}

/// Integer rows proportional to `values`, one common denominator per row.
pub(crate) fn integer_rows(values: &[Vec<Value>]) -> (Vec<Vec<BigInt>>, Vec<BigInt>) {
    values
        .iter()
        .map(|row| {
            let lcm = row.iter().fold(BigInt::one(), |acc, v| acc.lcm(v.denom()));
            let w = row.iter().map(|v| v.numer() * (&lcm / v.denom())).collect();
            (w, lcm)
        })
        .unzip()
}

/// Whether products of up to `wmax² · n² · (alpha part)` stay well inside
/// `i128`, where `wmax` bounds every row total.
pub(crate) fn fits_small(wmax: &BigInt, n: usize, alpha_part: &BigInt) -> bool {
    let n = BigInt::from(n.max(1));
    (wmax * &n * &n) * (wmax + alpha_part.abs() + BigInt::one()) < (BigInt::one() << 120)
}

pub(crate) fn max_row_total(rows: &[Vec<BigInt>]) -> BigInt {
    rows.iter().map(|r| r.iter().sum::<BigInt>()).max().unwrap_or_default()
}

pub(crate) fn small_rows(rows: &[Vec<BigInt>], alpha_part: &BigInt) -> Option<Vec<Vec<i128>>> {
    if !fits_small(&max_row_total(rows), rows.len(), alpha_part) {
        return None;
    }
    rows.iter().map(|r| r.iter().map(ToPrimitive::to_i128).collect()).collect()
}

/// `alpha = p / q` with `q > 0`.
#[derive(Debug, Clone)]
pub(crate) struct Threshold<I> {
    pub p: I,
    pub q: I,
}

impl<I: Int> Threshold<I> {
    pub fn new(alpha: &Value) -> Option<Self> {
        Some(Threshold { p: I::from_big(alpha.numer())?, q: I::from_big(alpha.denom())? })
    }

    /// `value · n / total >= p / q`
    pub fn reached(&self, value: &I, n: usize, total: &I) -> bool {
        value.clone() * I::from_usize(n) * self.q.clone() >= self.p.clone() * total.clone()
    }

    pub fn is_half(&self) -> bool {
        self.q.clone() == self.p.clone() + self.p.clone()
    }
}

pub(crate) struct RawStep {
    pub agent: usize,
    pub bundle: Vec<usize>,
    pub trades: usize,
    pub adds: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum RawFailure {
    Exhausted { remaining_agents: usize },
    LastShort { agent: usize },
}

pub(crate) struct BagRun {
    pub steps: Vec<RawStep>,
    pub failure: Option<RawFailure>,
    pub report: InvariantReport,
}

/// Bag filling over integer rows. `cats` lists each category's items in slot
/// order; every agent must rank slots non-increasingly and have a positive
/// total.
pub(crate) fn bag_fill<I: Int>(rows: &[Vec<I>], cats: &[Category], alpha: &Threshold<I>, check: bool) -> BagRun {
    BagFiller::new(rows, cats, alpha, check).run()
}

struct BagFiller<'a, I> {
    rows: &'a [Vec<I>],
    cats: &'a [Category],
    alpha: &'a Threshold<I>,
    check: bool,
    half: bool,
    n0: usize,
    totals: Vec<I>,
    agents: Vec<usize>,
    remaining: Vec<Vec<usize>>,
    remaining_value: Vec<I>,
    report: InvariantReport,
}

struct CategoryBag {
    in_bag: Vec<bool>,
    share: usize,
    count: usize,
}

impl<'a, I: Int> BagFiller<'a, I> {
    fn new(rows: &'a [Vec<I>], cats: &'a [Category], alpha: &'a Threshold<I>, check: bool) -> Self {
        let n0 = rows.len();
        let totals: Vec<I> = rows
            .iter()
            .map(|r| {
                r.iter().fold(I::zero(), |mut acc, w| {
                    acc += w;
                    acc
                })
            })
            .collect();
        BagFiller {
            rows,
            cats,
            alpha,
            check,
            half: alpha.is_half(),
            n0,
            remaining_value: totals.clone(),
            totals,
            agents: (0..n0).collect(),
            remaining: cats.iter().map(|c| c.items.clone()).collect(),
            report: InvariantReport::default(),
        }
    }

    fn run(mut self) -> BagRun {
        let mut steps = Vec::new();
        while self.agents.len() > 1 {
            match self.fill_one() {
                Some(step) => steps.push(step),
                None => {
                    let failure = RawFailure::Exhausted { remaining_agents: self.agents.len() };
                    return BagRun { steps, failure: Some(failure), report: self.report };
                }
            }
        }
        let agent = self.agents[0];
        let mut bundle: Vec<usize> = self.remaining.iter().flatten().copied().collect();
        bundle.sort_unstable();
        let failure = (!self.alpha.reached(&self.remaining_value[agent], self.n0, &self.totals[agent]))
            .then_some(RawFailure::LastShort { agent });
        steps.push(RawStep { agent, bundle, trades: 0, adds: 0 });
        BagRun { steps, failure, report: self.report }
    }

    fn shift(&self, bag: &mut [I], item: usize, add: bool) {
        for &i in &self.agents {
            let w = &self.rows[i][item];
            if add {
                bag[i] += w;
            } else {
                bag[i] -= w;
            }
        }
    }

    fn recipient(&self, bag: &[I]) -> Option<usize> {
        self.agents.iter().copied().find(|&i| self.alpha.reached(&bag[i], self.n0, &self.totals[i]))
    }

    fn fill_one(&mut self) -> Option<RawStep> {
        let n = self.agents.len();
        let mut bags: Vec<CategoryBag> = self
            .remaining
            .iter()
            .map(|items| {
                let s = items.len();
                let share = s / n;
                let mut in_bag = vec![false; s];
                in_bag[s - share..].iter_mut().for_each(|b| *b = true);
                CategoryBag { in_bag, share, count: share }
            })
            .collect();
        let mut bag = vec![I::zero(); self.rows.len()];
        for (h, cb) in bags.iter().enumerate() {
            let s = cb.in_bag.len();
            for pos in s - cb.share..s {
                self.shift(&mut bag, self.remaining[h][pos], true);
            }
        }
        let (mut trades, mut adds) = (0, 0);
        let recipient = loop {
            if let Some(i) = self.recipient(&bag) {
                break i;
            }
            if let Some((h, out, inn)) = next_trade(&bags) {
                bags[h].in_bag[out] = false;
                bags[h].in_bag[inn] = true;
                self.shift(&mut bag, self.remaining[h][out], false);
                self.shift(&mut bag, self.remaining[h][inn], true);
                trades += 1;
            } else {
                let h = next_add(&bags, n)?;
                let pos = bags[h].share;
                bags[h].in_bag[pos] = true;
                bags[h].count += 1;
                self.shift(&mut bag, self.remaining[h][pos], true);
                adds += 1;
            }
        };
        if self.check && self.half && trades + adds > 0 {
            // a grown bag is worth less than 1 (normalized) to everyone
            let n0 = I::from_usize(self.n0);
            if self.agents.iter().any(|&i| bag[i].clone() * n0.clone() >= self.totals[i]) {
                self.report.increment += 1;
            }
        }

        let mut bundle = Vec::new();
        for (h, cb) in bags.iter().enumerate() {
            let items = &mut self.remaining[h];
            if self.check && (cb.count > items.len().div_ceil(n) || cb.count > self.cats[h].k) {
                self.report.bundle_size += 1;
            }
            let mut kept = Vec::with_capacity(items.len());
            for (pos, &j) in items.iter().enumerate() {
                if cb.in_bag[pos] {
                    bundle.push(j);
                } else {
                    kept.push(j);
                }
            }
            *items = kept;
        }
        bundle.sort_unstable();
        self.agents.retain(|&i| i != recipient);
        for &i in &self.agents {
            let b = bag[i].clone();
            self.remaining_value[i] -= &b;
        }
        if self.check {
            self.check_after_allocation();
        }
        Some(RawStep { agent: recipient, bundle, trades, adds })
    }

    fn check_after_allocation(&mut self) {
        let n = self.agents.len();
        self.report.allocations_checked += 1;
        let n0 = I::from_usize(self.n0);
        let nr = I::from_usize(n);
        for &i in &self.agents {
            // remaining value, normalized, is at least the remaining agent count
            if self.remaining_value[i].clone() * n0.clone() < nr.clone() * self.totals[i].clone() {
                self.report.remaining_value += 1;
            }
        }
        for (items, c) in self.remaining.iter().zip(self.cats) {
            if items.len() > n * c.k {
                self.report.balance += 1;
            }
        }
    }
}

/// First category with a seed item still in the bag: its deepest such item
/// goes out, the shallowest top item outside the bag comes in.
fn next_trade(bags: &[CategoryBag]) -> Option<(usize, usize, usize)> {
    for (h, cb) in bags.iter().enumerate() {
        let s = cb.in_bag.len();
        if let Some(out) = (s - cb.share..s).rev().find(|&p| cb.in_bag[p]) {
            let inn = (0..cb.share).find(|&p| !cb.in_bag[p]).expect("top slots outnumber bag seeds");
            return Some((h, out, inn));
        }
    }
    None
}

/// First category not divisible by the agent count whose share has not been
/// topped up yet.
fn next_add(bags: &[CategoryBag], n: usize) -> Option<usize> {
    bags.iter().position(|cb| cb.in_bag.len() % n != 0 && cb.count == cb.share)
}

/// Items each category must shed so that `n - 1` agents can take the rest,
/// taken from the deepest slots and skipping `anchor`.
pub(crate) fn padding(cats: &[Category], n: usize, anchor: Option<usize>) -> Vec<usize> {
    let keep = n.saturating_sub(1);
    let mut out = Vec::new();
    for c in cats {
        let others = c.items.iter().filter(|&&j| Some(j) != anchor).count();
        let need = others.saturating_sub(keep * c.k);
        out.extend(c.items.iter().rev().filter(|&&j| Some(j) != anchor).take(need));
    }
    out
}

/// Categories restricted to `items` (renumbered by position), empty ones dropped.
pub(crate) fn restrict_categories(cats: &[Category], m: usize, items: &[usize]) -> Vec<Category> {
    let mut new_id = vec![usize::MAX; m];
    for (new, &old) in items.iter().enumerate() {
        new_id[old] = new;
    }
    cats.iter()
        .map(|c| {
            let kept = c.items.iter().filter(|&&j| new_id[j] != usize::MAX).map(|&j| new_id[j]);
            Category::new(kept.collect(), c.k)
        })
        .filter(|c| !c.is_empty())
        .collect()
}

pub(crate) fn row_total<I: Int>(row: &[I]) -> I {
    row.iter().fold(I::zero(), |mut acc, w| {
        acc += w;
        acc
    })
}

pub(crate) fn to_value<I: Int>(num: &I, den: BigInt) -> Value {
    Value::new(num.clone().into(), den)
}
