#![allow(dead_code)]

use mms_core::model::{int, ratio, Allocation, Category, Instance, Value};
use num_traits::Zero;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Two identical agents, four items in one category of threshold 2.
pub fn twins() -> Instance {
    Instance::from_integers(&[vec![10, 8, 6, 4], vec![10, 8, 6, 4]], vec![Category::new(vec![0, 1, 2, 3], 2)])
}

pub fn crossed() -> Instance {
    Instance::from_integers(
        &[vec![5, 7, 3, 1], vec![6, 2, 4, 8]],
        vec![Category::new(vec![0, 1], 1), Category::new(vec![2, 3], 1)],
    )
}

/// Three identical agents over 13 items: four categories, thresholds 2,1,1,1.
/// Item values are one concrete completion of the category-level sums
/// (37, 26 and 2 across the three singleton-threshold categories).
pub fn thirteen() -> Instance {
    let row = vec![36, 34, 23, 22, 13, 9, 1, 12, 9, 1, 12, 8, 0];
    Instance::from_integers(
        &[row.clone(), row.clone(), row],
        vec![
            Category::new(vec![0, 1, 2, 3], 2),
            Category::new(vec![4, 5, 6], 1),
            Category::new(vec![7, 8, 9], 1),
            Category::new(vec![10, 11, 12], 1),
        ],
    )
}

pub fn thirteen_witness() -> Allocation {
    Allocation::new(vec![vec![0, 3, 6, 9, 12], vec![1, 5, 8, 11], vec![2, 4, 7, 10]])
}

/// Maximin share by plain enumeration of all `n^m` item-to-bundle maps.
pub fn naive_mms(inst: &Instance, agent: usize) -> Value {
    let n = inst.n();
    let m = inst.m();
    let of = inst.category_of();
    let row = &inst.values()[agent];
    let mut best: Option<Value> = None;
    let mut assign = vec![0usize; m];
    loop {
        let mut counts = vec![vec![0usize; inst.categories().len()]; n];
        let mut ok = true;
        for j in 0..m {
            counts[assign[j]][of[j]] += 1;
            if counts[assign[j]][of[j]] > inst.categories()[of[j]].k {
                ok = false;
                break;
            }
        }
        if ok {
            let mut sums = vec![Value::zero(); n];
            for j in 0..m {
                sums[assign[j]] += &row[j];
            }
            let min = sums.into_iter().min().unwrap();
            if best.as_ref().is_none_or(|b| min > *b) {
                best = Some(min);
            }
        }
        // odometer increment
        let mut pos = 0;
        loop {
            if pos == m {
                return best.expect("valid instance has a feasible allocation");
            }
            assign[pos] += 1;
            if assign[pos] < n {
                break;
            }
            assign[pos] = 0;
            pos += 1;
        }
    }
}

/// A uniformly-ish random feasible allocation: each item goes to a random
/// agent that still has room in its category.
pub fn random_feasible(inst: &Instance, rng: &mut ChaCha8Rng) -> Allocation {
    let n = inst.n();
    let mut bundles = vec![Vec::new(); n];
    for c in inst.categories() {
        let mut room = vec![c.k; n];
        let mut items = c.items.clone();
        items.shuffle(rng);
        for j in items {
            let open: Vec<usize> = (0..n).filter(|&i| room[i] > 0).collect();
            let i = open[rng.random_range(0..open.len())];
            room[i] -= 1;
            bundles[i].push(j);
        }
    }
    Allocation::new(bundles)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random valid instance with up to `max_m` items and small integer values.
pub fn random_instance(rng: &mut ChaCha8Rng, n: usize, max_m: usize, max_v: i64) -> Instance {
    let m = rng.random_range(1..=max_m);
    let values: Vec<Vec<i64>> = (0..n).map(|_| (0..m).map(|_| rng.random_range(0..=max_v)).collect()).collect();
    let ell = rng.random_range(1..=m.min(3));
    let mut members = vec![Vec::new(); ell];
    for j in 0..m {
        members[rng.random_range(0..ell)].push(j);
    }
    let cats = members
        .into_iter()
        .filter(|c| !c.is_empty())
        .map(|items| {
            let lo = items.len().div_ceil(n);
            let k = rng.random_range(lo..=items.len().max(lo));
            Category::new(items, k)
        })
        .collect();
    Instance::from_integers(&values, cats)
}

pub fn half() -> Value {
    ratio(1, 2)
}

pub fn two() -> Value {
    int(2)
}
