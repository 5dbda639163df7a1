//! Shared instance builders for the criterion benchmarks.

use modalkit_core::linalg::AffineSolutionSpace;
use modalkit_core::nosignal::{NoSignalingSystem, build_system, solve};
use modalkit_core::verifiers::ColoringProblem;
use modalkit_core::{MobitScenario, PossibilityTable, Rational};

pub fn singlet_table() -> PossibilityTable {
    MobitScenario::new(2)
        .expect("2 is prime")
        .table()
        .expect("table builds")
}

pub fn singlet_system() -> (NoSignalingSystem, AffineSolutionSpace<Rational>) {
    let sys = build_system(&singlet_table()).expect("system builds");
    let space = solve(&sys).expect("system is consistent");
    (sys, space)
}

/// A cycle with one green vertex required per edge; even lengths admit
/// exactly two colorings, odd lengths none.
pub fn cycle_problem(n: usize) -> ColoringProblem {
    let vertices: Vec<String> = (0..n).map(|i| format!("v{i}")).collect();
    let edges: Vec<Vec<String>> = (0..n)
        .map(|i| vec![format!("v{i}"), format!("v{}", (i + 1) % n)])
        .collect();
    ColoringProblem::new(vertices, edges, 1).expect("cycle instance is well formed")
}
