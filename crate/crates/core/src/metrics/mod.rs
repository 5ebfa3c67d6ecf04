//! Statistic-based graph homophily metrics, grouped by the aspect of the
//! graph they measure.

pub mod feature;
pub mod label;
pub mod structural;
