//! Conversion to ordered instances and recovery of allocations.
//!
//! An ordered instance keeps the item ids and categories of its origin, but
//! every agent's values inside a category are re-dealt in non-increasing order
//! along the category's item list. Position `j` of a category is its slot `j`.

use crate::error::AllocationError;
use crate::model::{Allocation, Instance, Value};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrderedInstance {
    pub instance: Instance,
    pub origin: Instance,
}

impl OrderedInstance {
    /// Original item ids of each category, in slot order.
    pub fn slot_map(&self) -> Vec<&[usize]> {
        self.origin.categories().iter().map(|c| c.items.as_slice()).collect()
    }
}

/// Whether every agent's values are non-increasing along every category.
pub fn is_ordered(inst: &Instance) -> bool {
    inst.values().iter().all(|row| inst.categories().iter().all(|c| c.items.windows(2).all(|w| row[w[0]] >= row[w[1]])))
}

/// Re-deals each agent's values so that slot `j` of a category carries the
/// agent's `j`th highest value in that category.
pub fn to_ordered(inst: &Instance) -> OrderedInstance {
    let mut values: Vec<Vec<Value>> = inst.values().to_vec();
    for (i, row) in values.iter_mut().enumerate() {
        for c in inst.categories() {
            let mut sorted: Vec<&Value> = c.items.iter().map(|&j| inst.value(i, j)).collect();
            // stable: equal values keep their item order
            sorted.sort_by(|a, b| b.cmp(a));
            let sorted: Vec<Value> = sorted.into_iter().cloned().collect();
            for (&j, v) in c.items.iter().zip(sorted) {
                row[j] = v;
            }
        }
    }
    OrderedInstance { instance: Instance::new(values, inst.categories().to_vec()), origin: inst.clone() }
}

/// Maps an allocation of the ordered instance back onto the origin.
///
/// Category by category, slots are visited in order and the agent holding
/// each slot picks its most valuable unclaimed origin item of that category
/// (lowest id on ties).
pub fn recover(ordered: &OrderedInstance, alloc: &Allocation) -> Result<Allocation, AllocationError> {
    let inst = &ordered.instance;
    let owner = alloc.owners(inst.n(), inst.m())?;
    if !alloc.is_feasible(inst)? {
        return Err(AllocationError::Infeasible);
    }
    let origin = &ordered.origin;
    let mut bundles = vec![Vec::new(); inst.n()];
    for c in origin.categories() {
        let mut claimed = vec![false; c.len()];
        for &slot in &c.items {
            let agent = owner[slot];
            let row = &origin.values()[agent];
            let mut best: Option<usize> = None;
            for (pos, &j) in c.items.iter().enumerate() {
                if claimed[pos] {
                    continue;
                }
                best = match best {
                    None => Some(pos),
                    Some(b) => {
                        let (vb, vj) = (&row[c.items[b]], &row[j]);
                        if vj > vb || (vj == vb && j < c.items[b]) {
                            Some(pos)
                        } else {
                            Some(b)
                        }
                    }
                };
            }
            let pos = best.expect("slot count equals item count");
            claimed[pos] = true;
            bundles[agent].push(c.items[pos]);
        }
    }
    Ok(Allocation::new(bundles))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{int, Category};

    fn crossed() -> Instance {
        Instance::from_integers(
            &[vec![5, 7, 3, 1], vec![6, 2, 4, 8]],
            vec![Category::new(vec![0, 1], 1), Category::new(vec![2, 3], 1)],
        )
    }

    fn ints(v: &[i64]) -> Vec<Value> {
        v.iter().map(|&x| int(x)).collect()
    }

    #[test]
    fn orders_crossed() {
        let ord = to_ordered(&crossed());
        assert_eq!(ord.instance.values()[0], ints(&[7, 5, 3, 1]));
        assert_eq!(ord.instance.values()[1], ints(&[6, 2, 8, 4]));
        assert!(is_ordered(&ord.instance));
        assert_eq!(ord.slot_map(), vec![&[0, 1][..], &[2, 3][..]]);
    }

    #[test]
    fn ordered_input_is_unchanged() {
        let a =
            Instance::from_integers(&[vec![10, 8, 6, 4], vec![10, 8, 6, 4]], vec![Category::new(vec![0, 1, 2, 3], 2)]);
        assert!(is_ordered(&a));
        assert_eq!(to_ordered(&a).instance, a);
    }

    #[test]
    fn is_ordered_cases() {
        assert!(!is_ordered(&crossed()));
        let empty = Instance::new(vec![vec![]], vec![]);
        assert!(is_ordered(&empty));
    }

    #[test]
    fn recovers_crossed() {
        let ord = to_ordered(&crossed());
        let a = Allocation::new(vec![vec![0, 3], vec![1, 2]]);
        let rec = recover(&ord, &a).unwrap();
        assert_eq!(rec, Allocation::new(vec![vec![1, 2], vec![0, 3]]));
        let vals = rec.agent_values(&ord.origin);
        assert_eq!(vals, ints(&[10, 14]));
        assert_eq!(a.agent_values(&ord.instance), ints(&[8, 10]));
    }

    #[test]
    fn identical_agents_recover_same_values() {
        let inst =
            Instance::from_integers(&[vec![3, 9, 1, 4], vec![3, 9, 1, 4]], vec![Category::new(vec![0, 1, 2, 3], 2)]);
        let ord = to_ordered(&inst);
        let a = Allocation::new(vec![vec![0, 3], vec![1, 2]]);
        let rec = recover(&ord, &a).unwrap();
        assert_eq!(rec.agent_values(&inst), a.agent_values(&ord.instance));
    }

    #[test]
    fn single_agent_takes_everything() {
        let inst = Instance::from_integers(&[vec![1, 5, 2]], vec![Category::new(vec![0, 1, 2], 3)]);
        let ord = to_ordered(&inst);
        let rec = recover(&ord, &Allocation::new(vec![vec![0, 1, 2]])).unwrap();
        assert_eq!(rec.agent_values(&inst), vec![int(8)]);
    }

    #[test]
    fn rejects_infeasible() {
        let ord = to_ordered(&crossed());
        let a = Allocation::new(vec![vec![0, 1], vec![2, 3]]);
        assert_eq!(recover(&ord, &a), Err(AllocationError::Infeasible));
    }
}
