//! Instances, valuations, allocations and the fairness predicates on them.

mod allocation;
mod fairness;
mod instance;
mod validate;
mod valuation;

pub use allocation::Allocation;
pub use fairness::{is_clean, is_ef, is_ef1, is_eq, is_eq1, make_clean, wasted_goods};
pub use instance::Instance;
pub use validate::{validate, ValidationReport};
pub use valuation::Valuation;
