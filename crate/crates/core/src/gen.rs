//! Seeded random instances with the experimental distribution: `m` uniform in
//! `[2n, 4n]`, values uniform in `[1, 100]`, between 2 and `min(⌊m/2⌋, 10)`
//! categories, and thresholds uniform in `[⌈|C_h|/n⌉, ⌈|C_h|/d⌉]` with
//! `d = log2(n)` (`d = 1.5` for two agents).
//!
//! The generator is ChaCha8 seeded from the 64-bit seed. Every class of
//! random decision reads its own stream of that generator (see [`Stream`]),
//! so adding draws to one class never shifts another.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::model::{Category, Instance};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum GenError {
    #[error("generator needs at least 2 agents, got {0}")]
    TooFewAgents(usize),
    #[error("empty range {0}..={1}")]
    EmptyRange(u64, u64),
}

/// Stream ids of the independent random decision classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    ItemCount = 0,
    Values = 1,
    CategoryCount = 2,
    Assignment = 3,
    Thresholds = 4,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GenParams {
    pub n: usize,
    pub seed: u64,
    /// Inclusive item-count range; `None` means `[2n, 4n]`.
    pub m_range: Option<(usize, usize)>,
    pub value_range: (u64, u64),
    /// Inclusive upper cap on the drawn category count (besides `⌊m/2⌋`).
    pub max_categories: usize,
}

impl GenParams {
    pub fn new(n: usize, seed: u64) -> Self {
        GenParams { n, seed, m_range: None, value_range: (1, 100), max_categories: 10 }
    }
}

fn stream(seed: u64, s: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(s as u64);
    rng
}

/// Upper end of the threshold range, `⌈size/d⌉`.
pub fn threshold_cap(size: usize, n: usize) -> usize {
    if n == 2 {
        // size / 1.5 = 2·size / 3
        (2 * size).div_ceil(3)
    } else {
        (size as f64 / (n as f64).log2()).ceil() as usize
    }
}

pub fn generate(params: &GenParams) -> Result<Instance, GenError> {
    let n = params.n;
    if n < 2 {
        return Err(GenError::TooFewAgents(n));
    }
    let (m_lo, m_hi) = params.m_range.unwrap_or((2 * n, 4 * n));
    if m_lo > m_hi {
        return Err(GenError::EmptyRange(m_lo as u64, m_hi as u64));
    }
    let (v_lo, v_hi) = params.value_range;
    if v_lo > v_hi {
        return Err(GenError::EmptyRange(v_lo, v_hi));
    }
    let seed = params.seed;
    let m = stream(seed, Stream::ItemCount).random_range(m_lo..=m_hi);

    let mut rng = stream(seed, Stream::Values);
    let values: Vec<Vec<i64>> =
        (0..n).map(|_| (0..m).map(|_| rng.random_range(v_lo..=v_hi) as i64).collect()).collect();

    let cat_hi = (m / 2).min(params.max_categories).max(1);
    let cat_lo = 2.min(cat_hi);
    let ell = stream(seed, Stream::CategoryCount).random_range(cat_lo..=cat_hi);

    let mut rng = stream(seed, Stream::Assignment);
    let mut members = vec![Vec::new(); ell];
    for j in 0..m {
        members[rng.random_range(0..ell)].push(j);
    }

    let mut rng = stream(seed, Stream::Thresholds);
    let categories = members
        .into_iter()
        .filter(|items| !items.is_empty())
        .map(|items| {
            let lo = items.len().div_ceil(n);
            let hi = threshold_cap(items.len(), n).max(lo);
            let k = rng.random_range(lo..=hi);
            Category::new(items, k)
        })
        .collect();
    Ok(Instance::from_integers(&values, categories))
}

/// `count` instances with seeds `seed, seed+1, ...`.
pub fn corpus(n: usize, count: usize, seed: u64) -> Result<Vec<(u64, Instance)>, GenError> {
    (0..count as u64)
        .map(|i| {
            let s = seed.wrapping_add(i);
            generate(&GenParams::new(n, s)).map(|inst| (s, inst))
        })
        .collect()
}
