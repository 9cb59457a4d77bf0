//! The three-table example of a two-parameter experiment on {1,2}×{1,2}
//! with two distinct ancillary statistics.

use crate::model::Experiment;
use crate::rational::{rat, Rational};
use crate::statistics::StatisticPartition;

fn labels(xs: &[&str]) -> Vec<String> {
    xs.iter().map(|s| s.to_string()).collect()
}

fn row(xs: &[(i64, i64)]) -> Vec<Rational> {
    xs.iter().map(|&(n, d)| rat(n, d)).collect()
}

/// Unconditional model `E`.
pub fn table1() -> Experiment {
    Experiment::new(
        "E",
        labels(&["1", "2"]),
        labels(&["(1,1)", "(1,2)", "(2,1)", "(2,2)"]),
        vec![
            row(&[(1, 6), (1, 6), (2, 6), (2, 6)]),
            row(&[(1, 12), (3, 12), (5, 12), (3, 12)]),
        ],
    )
    .expect("table 1 is a valid experiment")
}

/// `E` conditioned on U = x₁ = 1, restricted to its support.
pub fn table2() -> Experiment {
    Experiment::new(
        "E_u1",
        labels(&["1", "2"]),
        labels(&["(1,1)", "(1,2)"]),
        vec![row(&[(1, 2), (1, 2)]), row(&[(1, 4), (3, 4)])],
    )
    .expect("table 2 is a valid experiment")
}

/// `E` conditioned on V = x₂ = 1, restricted to its support.
pub fn table3() -> Experiment {
    Experiment::new(
        "E_v1",
        labels(&["1", "2"]),
        labels(&["(1,1)", "(2,1)"]),
        vec![row(&[(1, 3), (2, 3)]), row(&[(1, 6), (5, 6)])],
    )
    .expect("table 3 is a valid experiment")
}

/// U(x₁, x₂) = x₁.
pub fn statistic_u() -> StatisticPartition {
    StatisticPartition::new(
        "U",
        vec![labels(&["(1,1)", "(1,2)"]), labels(&["(2,1)", "(2,2)"])],
    )
}

/// V(x₁, x₂) = x₂.
pub fn statistic_v() -> StatisticPartition {
    StatisticPartition::new(
        "V",
        vec![labels(&["(1,1)", "(2,1)"]), labels(&["(1,2)", "(2,2)"])],
    )
}
