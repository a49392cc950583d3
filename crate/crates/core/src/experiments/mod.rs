//! Reproduction harnesses: newsvendor mixtures, two-sample estimation error
//! and the telemonitoring care-plan pipeline.

pub mod newsvendor;
pub mod parkinsons;
pub mod sampling;

pub use newsvendor::{mixture_table, MixtureRow, NewsvendorInstance, TABLE_LAMBDAS};
pub use parkinsons::{care_plan_region, ParkinsonsReport, Record};
pub use sampling::{sample_error_sweep, ErrorSummary, SweepRow};
