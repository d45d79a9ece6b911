//! Approximate maximin-share (MMS) allocation of indivisible items among
//! agents with additive valuations, when items come in categories and no
//! bundle may hold more than a category's threshold of its items.
//!
//! The solver ([`pipeline::solve`]) guarantees every agent at least half of its
//! maximin share in polynomial time. [`pipeline::bisect_alpha`] searches for a
//! larger threshold that still works on a given instance, and [`exact`]
//! computes true maximin shares on small instances for evaluation.
//!
//! ```
//! use mms_core::model::{Category, Instance};
//! use mms_core::pipeline::{half, solve};
//!
//! let inst = Instance::from_integers(
//!     &[vec![10, 8, 6, 4], vec![10, 8, 6, 4]],
//!     vec![Category::new(vec![0, 1, 2, 3], 2)],
//! );
//! let sol = solve(&inst, &half()).unwrap();
//! assert!(sol.allocation.is_feasible(&inst).unwrap());
//! ```

pub mod bagfill;
pub mod batch;
pub mod error;
pub mod exact;
pub mod gen;
pub mod model;
pub mod ordered;
pub mod pipeline;
pub mod reduction;
mod scaled;

pub use error::{AllocationError, BagFillError, ModelError, OracleError, ReductionError, SolveError};
pub use model::{Allocation, Category, Instance, Value};
