//! Single-anchor valid reductions under cardinality constraints.
//!
//! Giving one agent a high-valued item is only safe if the remaining agents
//! can still absorb every category, so the anchor is padded with the least
//! valuable items of each over-full category.

use crate::error::ReductionError;
use crate::model::{bundle_fits, Instance, Value};
use crate::pipeline::AnchorRule;

/// An agent removed together with its bundle, and what is left behind.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Reduction {
    pub agent: usize,
    pub anchor: Option<usize>,
    pub bundle: Vec<usize>,
    pub reduced: Instance,
    /// Parent-instance index of each agent of `reduced`.
    pub agent_map: Vec<usize>,
    /// Parent-instance id of each item of `reduced`.
    pub item_map: Vec<usize>,
}

/// Finds an `(agent, item)` with `v_ij >= alpha` under the default
/// [`AnchorRule`].
pub fn find_high_item(inst: &Instance, alpha: &Value) -> Option<(usize, usize)> {
    find_high_item_by(inst, alpha, AnchorRule::default())
}

pub fn find_high_item_by(inst: &Instance, alpha: &Value, rule: AnchorRule) -> Option<(usize, usize)> {
    let values = inst.values();
    if rule == AnchorRule::FirstInScan {
        let slots = inst.categories().iter().flat_map(|c| c.items.iter().copied());
        return slots.flat_map(|j| (0..inst.n()).map(move |i| (i, j))).find(|&(i, j)| values[i][j] >= *alpha);
    }
    let mut best: Option<(usize, usize, &Value)> = None;
    for (i, row) in inst.values().iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            if v >= alpha && best.is_none_or(|(_, _, b)| v > b) {
                best = Some((i, j, v));
            }
        }
    }
    best.map(|(i, j, _)| (i, j))
}

/// The anchor `item` plus, from every category, its
/// `max(0, |C_h \ {item}| - (n-1)k_h)` deepest slots.
///
/// Expects an ordered instance, where the deepest slots are the least
/// valuable items for every agent.
pub fn reduction_bundle(inst: &Instance, item: usize) -> Vec<usize> {
    let mut bundle = vec![item];
    bundle.extend(padding(inst, Some(item)));
    bundle.sort_unstable();
    bundle
}

/// Deepest-slot padding needed so that `n - 1` agents can take the rest.
pub(crate) fn padding(inst: &Instance, anchor: Option<usize>) -> Vec<usize> {
    crate::scaled::padding(inst.categories(), inst.n(), anchor)
}

/// Removes `agent` and `bundle` from the instance.
pub fn apply_reduction(inst: &Instance, agent: usize, bundle: &[usize]) -> Result<Reduction, ReductionError> {
    let n = inst.n();
    if agent >= n {
        return Err(ReductionError::UnknownAgent(agent));
    }
    if n < 2 {
        return Err(ReductionError::LastAgent);
    }
    let mut taken = vec![false; inst.m()];
    for &j in bundle {
        if j >= inst.m() || taken[j] {
            return Err(ReductionError::BadBundle);
        }
        taken[j] = true;
    }
    if !bundle_fits(inst, bundle) {
        return Err(ReductionError::BadBundle);
    }
    for (h, c) in inst.categories().iter().enumerate() {
        let size = c.items.iter().filter(|&&j| !taken[j]).count();
        let capacity = (n - 1) * c.k;
        if size > capacity {
            return Err(ReductionError::Overfull { category: h, size, capacity });
        }
    }
    let agent_map: Vec<usize> = (0..n).filter(|&i| i != agent).collect();
    let item_map: Vec<usize> = (0..inst.m()).filter(|&j| !taken[j]).collect();
    let mut bundle = bundle.to_vec();
    bundle.sort_unstable();
    Ok(Reduction { agent, anchor: None, bundle, reduced: inst.restrict(&agent_map, &item_map), agent_map, item_map })
}

/// Builds the padded bundle around `item` and gives it to `agent`.
pub fn reduce_on(inst: &Instance, agent: usize, item: usize) -> Result<Reduction, ReductionError> {
    let bundle = reduction_bundle(inst, item);
    let mut red = apply_reduction(inst, agent, &bundle)?;
    red.anchor = Some(item);
    Ok(red)
}
