use std::collections::BTreeMap;

use serde::ser::SerializeStruct;
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::scenarios::PossibilityTable;

/// Hard limit on coloring instance size.
pub const MAX_COLORING_VERTICES: usize = 64;

/// Instances up to this many vertices are searched exhaustively; larger ones
/// use backtracking.
pub const EXHAUSTIVE_COLORING_CAP: usize = 24;

/// Cap on the number of candidate local models examined.
pub const LOCAL_MODEL_CANDIDATE_CAP: u128 = 1 << 24;

/// A hypergraph coloring instance: mark some vertices green so that every
/// edge contains exactly `green_count` green vertices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColoringProblem {
    pub vertices: Vec<String>,
    pub edges: Vec<Vec<String>>,
    pub green_count: usize,
}

impl ColoringProblem {
    pub fn new(vertices: Vec<String>, edges: Vec<Vec<String>>, green_count: usize) -> Result<Self> {
        let problem = ColoringProblem {
            vertices,
            edges,
            green_count,
        };
        problem.validate()?;
        Ok(problem)
    }

    pub fn validate(&self) -> Result<()> {
        if self.vertices.is_empty() {
            return Err(Error::InvalidInstance("no vertices".into()));
        }
        for (i, v) in self.vertices.iter().enumerate() {
            if self.vertices[..i].contains(v) {
                return Err(Error::InvalidInstance(format!("duplicate vertex {v:?}")));
            }
        }
        if self.edges.is_empty() {
            return Err(Error::InvalidInstance("no edges".into()));
        }
        if self.green_count == 0 {
            return Err(Error::InvalidInstance("green count must be positive".into()));
        }
        for edge in &self.edges {
            if edge.len() < self.green_count {
                return Err(Error::InvalidInstance(format!(
                    "edge {edge:?} is smaller than the green count {}",
                    self.green_count
                )));
            }
            for (i, v) in edge.iter().enumerate() {
                if !self.vertices.contains(v) {
                    return Err(Error::InvalidInstance(format!("undeclared vertex {v:?}")));
                }
                if edge[..i].contains(v) {
                    return Err(Error::InvalidInstance(format!(
                        "edge repeats vertex {v:?}"
                    )));
                }
            }
        }
        Ok(())
    }

    fn edge_masks(&self) -> Vec<u64> {
        self.edges
            .iter()
            .map(|edge| {
                edge.iter()
                    .map(|v| self.vertices.iter().position(|w| w == v).expect("validated"))
                    .fold(0u64, |mask, i| mask | 1 << i)
            })
            .collect()
    }

    pub fn vertex_degrees(&self) -> Vec<usize> {
        self.vertices
            .iter()
            .map(|v| self.edges.iter().filter(|e| e.contains(v)).count())
            .collect()
    }
}

/// The effect hypergraph of the three mobit measurements: vertices a, b, c
/// and one edge per measurement basis, each of which must contain exactly
/// one green ("occurring") effect.
pub fn mobit_triangle() -> ColoringProblem {
    ColoringProblem::new(
        vec!["a".into(), "b".into(), "c".into()],
        vec![
            vec!["a".into(), "b".into()],
            vec!["c".into(), "a".into()],
            vec!["b".into(), "c".into()],
        ],
        1,
    )
    .expect("triangle instance is well formed")
}

/// A valid coloring, as sorted vertex indices of the green set.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Coloring {
    green: Vec<usize>,
}

impl Coloring {
    fn from_mask(mask: u64) -> Self {
        Coloring {
            green: (0..64).filter(|i| mask >> i & 1 == 1).collect(),
        }
    }

    pub fn green_indices(&self) -> &[usize] {
        &self.green
    }

    pub fn green_vertices(&self, problem: &ColoringProblem) -> Vec<String> {
        self.green
            .iter()
            .map(|&i| problem.vertices[i].clone())
            .collect()
    }

    pub fn satisfies(&self, problem: &ColoringProblem) -> bool {
        let mask = self.green.iter().fold(0u64, |m, &i| m | 1 << i);
        problem
            .edge_masks()
            .iter()
            .all(|e| (mask & e).count_ones() as usize == problem.green_count)
    }
}

fn search_exhaustive(n: usize, edge_masks: &[u64], green_count: usize) -> Vec<u64> {
    (0u64..1 << n)
        .filter(|mask| {
            edge_masks
                .iter()
                .all(|e| (mask & e).count_ones() as usize == green_count)
        })
        .collect()
}

fn search_backtracking(n: usize, edge_masks: &[u64], green_count: usize) -> Vec<u64> {
    // Decide vertices in index order; prune an edge as soon as its green
    // quota is overshot or can no longer be reached.
    struct Search<'a> {
        n: usize,
        edge_masks: &'a [u64],
        green_count: usize,
        greens: Vec<usize>,
        undecided: Vec<usize>,
        found: Vec<u64>,
    }

    impl Search<'_> {
        fn recurse(&mut self, v: usize, mask: u64) {
            if v == self.n {
                if self.greens.iter().all(|&g| g == self.green_count) {
                    self.found.push(mask);
                }
                return;
            }
            let touching: Vec<usize> = (0..self.edge_masks.len())
                .filter(|&e| self.edge_masks[e] >> v & 1 == 1)
                .collect();
            for &take in &[false, true] {
                for &e in &touching {
                    self.undecided[e] -= 1;
                    if take {
                        self.greens[e] += 1;
                    }
                }
                let feasible = touching.iter().all(|&e| {
                    self.greens[e] <= self.green_count
                        && self.greens[e] + self.undecided[e] >= self.green_count
                });
                if feasible {
                    self.recurse(v + 1, mask | (take as u64) << v);
                }
                for &e in &touching {
                    self.undecided[e] += 1;
                    if take {
                        self.greens[e] -= 1;
                    }
                }
            }
        }
    }

    let mut search = Search {
        n,
        edge_masks,
        green_count,
        greens: vec![0; edge_masks.len()],
        undecided: edge_masks.iter().map(|e| e.count_ones() as usize).collect(),
        found: Vec::new(),
    };
    search.recurse(0, 0);
    search.found
}

/// All valid colorings, sorted lexicographically by green vertex indices.
/// Errors `InstanceTooLarge` beyond 64 vertices.
pub fn find_colorings(problem: &ColoringProblem) -> Result<Vec<Coloring>> {
    problem.validate()?;
    let n = problem.vertices.len();
    if n > MAX_COLORING_VERTICES {
        return Err(Error::InstanceTooLarge {
            size: n,
            max: MAX_COLORING_VERTICES,
        });
    }
    let edge_masks = problem.edge_masks();
    let masks = if n <= EXHAUSTIVE_COLORING_CAP {
        search_exhaustive(n, &edge_masks, problem.green_count)
    } else {
        search_backtracking(n, &edge_masks, problem.green_count)
    };
    let mut colorings: Vec<Coloring> = masks.into_iter().map(Coloring::from_mask).collect();
    colorings.sort();
    Ok(colorings)
}

#[cfg(test)]
pub(crate) fn find_colorings_both_ways(problem: &ColoringProblem) -> (Vec<Coloring>, Vec<Coloring>) {
    let n = problem.vertices.len();
    let edge_masks = problem.edge_masks();
    let sorted = |masks: Vec<u64>| {
        let mut v: Vec<Coloring> = masks.into_iter().map(Coloring::from_mask).collect();
        v.sort();
        v
    };
    (
        sorted(search_exhaustive(n, &edge_masks, problem.green_count)),
        sorted(search_backtracking(n, &edge_masks, problem.green_count)),
    )
}

/// A counting argument proving an instance has no coloring: if every vertex
/// lies in an even number of edges, the total green count over all edges,
/// `sum over green v of degree(v)`, is even; but a valid coloring needs it
/// to equal `green_count * |edges|`, which is odd.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ParityWitness {
    pub edge_count: usize,
    pub green_count: usize,
    pub degrees: Vec<usize>,
}

impl ParityWitness {
    pub fn explain(&self) -> String {
        format!(
            "summing the green quota {} over all {} edges gives {}, an odd total; \
             but every vertex has even degree ({:?}), so each green vertex contributes \
             an even amount and the total must be even. No coloring exists.",
            self.green_count,
            self.edge_count,
            self.green_count * self.edge_count,
            self.degrees,
        )
    }
}

/// Return the parity certificate when the argument applies to this instance.
pub fn coloring_parity_certificate(problem: &ColoringProblem) -> Result<Option<ParityWitness>> {
    problem.validate()?;
    let degrees = problem.vertex_degrees();
    let all_even = degrees.iter().all(|d| d.is_multiple_of(2));
    let target_odd = !(problem.green_count * problem.edges.len()).is_multiple_of(2);
    Ok((all_even && target_odd).then_some(ParityWitness {
        edge_count: problem.edges.len(),
        green_count: problem.green_count,
        degrees,
    }))
}

/// A deterministic local model: one predetermined outcome per measurement on
/// each side.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct LocalModel {
    side1: Vec<(String, String)>,
    side2: Vec<(String, String)>,
}

impl LocalModel {
    pub fn side1(&self) -> &[(String, String)] {
        &self.side1
    }

    pub fn side2(&self) -> &[(String, String)] {
        &self.side2
    }

    /// The model predicts joint outcome (o1, o2) for every measurement pair;
    /// it is consistent when each prediction is possible in the table.
    pub fn is_consistent_with(&self, table: &PossibilityTable) -> Result<bool> {
        for (m1, o1) in &self.side1 {
            for (m2, o2) in &self.side2 {
                if !table.cell_by_labels(m1, o1, m2, o2)? {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }
}

impl Serialize for LocalModel {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let to_map = |side: &[(String, String)]| -> BTreeMap<String, String> {
            side.iter().cloned().collect()
        };
        let mut s = serializer.serialize_struct("LocalModel", 2)?;
        s.serialize_field("side1", &to_map(&self.side1))?;
        s.serialize_field("side2", &to_map(&self.side2))?;
        s.end()
    }
}

/// Number of candidate deterministic local models of a table.
pub fn local_model_candidates(table: &PossibilityTable) -> u128 {
    let count = |groups: &[crate::scenarios::LabelGroup]| {
        groups
            .iter()
            .fold(1u128, |acc, g| acc.saturating_mul(g.outcomes.len() as u128))
    };
    count(table.rows()).saturating_mul(count(table.cols()))
}

/// Every consistent deterministic local model of the table, in lexicographic
/// order of chosen outcome indices (side 1 varying slowest).
pub fn find_local_models(table: &PossibilityTable) -> Result<Vec<LocalModel>> {
    let candidates = local_model_candidates(table);
    if candidates > LOCAL_MODEL_CANDIDATE_CAP {
        return Err(Error::EnumerationTooLarge {
            size: candidates,
            cap: LOCAL_MODEL_CANDIDATE_CAP,
        });
    }

    let assignments = |groups: &[crate::scenarios::LabelGroup]| -> Vec<Vec<(String, String)>> {
        let mut out = vec![Vec::new()];
        for g in groups {
            out = out
                .into_iter()
                .flat_map(|prefix| {
                    g.outcomes.iter().map(move |o| {
                        let mut next = prefix.clone();
                        next.push((g.label.clone(), o.clone()));
                        next
                    })
                })
                .collect();
        }
        out
    };

    let mut models = Vec::new();
    for side1 in assignments(table.rows()) {
        for side2 in assignments(table.cols()) {
            let model = LocalModel {
                side1: side1.clone(),
                side2,
            };
            if model.is_consistent_with(table)? {
                models.push(model);
            }
        }
    }
    Ok(models)
}
