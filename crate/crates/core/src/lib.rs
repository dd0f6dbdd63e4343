//! Demand-linked dynamic pricing for demand response programs.
//!
//! During peak states each customer pays a unit price proportional to their
//! share of the category's demand; outside the peak window each category pays
//! one uniform price. Both are set so that revenue equals purchase cost plus
//! the category's assured profit margin.

pub mod comparator;
pub mod domain;
pub mod error;
pub mod ingest;
pub mod pricing;
pub mod reproduction;
pub mod scenario;
pub mod sensitivity;

pub use domain::{demand_at_state, validate_dataset, Category, CategoryConfig, Customer, Dataset, DayProfile, Scope, SystemState, ValidationReport};
pub use error::{Error, Result};
pub use pricing::{build_schedule, verify_ebe, FinancialSummary, PriceSchedule};

/// Rounds to `decimals` places, halves away from zero.
pub fn round_to(value: f64, decimals: i32) -> f64 {
    let scale = 10f64.powi(decimals);
    (value * scale).round() / scale
}
