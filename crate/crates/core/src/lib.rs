//! Exact proof calculus for alternation-trading time-space lower bounds.

pub mod analytics;
pub mod grover;
pub mod kernel;
pub mod rules;
pub mod search;
