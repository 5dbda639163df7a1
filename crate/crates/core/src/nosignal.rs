//! Exact analysis of no-signaling probability assignments for a bipartite
//! possibility table.
//!
//! The unknowns are one probability per table cell. The linear equalities
//! say: every block (one measurement per side) sums to 1, one-sided
//! marginals do not depend on the partner's measurement choice, and
//! impossible cells carry probability zero. On top of the resulting affine
//! solution space, exact linear programs over the cell nonnegativity
//! polytope decide which cells are forced to zero, i.e. where a strictly
//! positive assignment is impossible.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{render_block_csv, render_block_grid};
use crate::linalg::{AffineSolutionSpace, Matrix, Vector, solve_affine};
use crate::rational::Rational;
use crate::scalar::Scalar;
use crate::scenarios::{LabelGroup, PossibilityTable, check_axis};
use crate::simplex::{self, SimplexOutcome};

/// Identifies one cell of a bipartite table by measurement and outcome
/// labels on each side.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CellId {
    pub row_measurement: String,
    pub row_outcome: String,
    pub col_measurement: String,
    pub col_outcome: String,
}

impl CellId {
    pub fn new(
        row_measurement: impl Into<String>,
        row_outcome: impl Into<String>,
        col_measurement: impl Into<String>,
        col_outcome: impl Into<String>,
    ) -> Self {
        CellId {
            row_measurement: row_measurement.into(),
            row_outcome: row_outcome.into(),
            col_measurement: col_measurement.into(),
            col_outcome: col_outcome.into(),
        }
    }
}

impl fmt::Display for CellId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({}1{},{}2{})",
            self.row_measurement, self.row_outcome, self.col_measurement, self.col_outcome
        )
    }
}

/// The no-signaling equality system of a possibility table.
#[derive(Debug, Clone)]
pub struct NoSignalingSystem {
    rows: Vec<LabelGroup>,
    cols: Vec<LabelGroup>,
    cells: Vec<CellId>,
    matrix: Matrix<Rational>,
    rhs: Vector<Rational>,
    zero_cells: Vec<CellId>,
    positive_cells: Vec<CellId>,
}

impl NoSignalingSystem {
    pub fn rows(&self) -> &[LabelGroup] {
        &self.rows
    }

    pub fn cols(&self) -> &[LabelGroup] {
        &self.cols
    }

    /// All cells in row-major table order; this is the variable order of
    /// the equality system.
    pub fn cells(&self) -> &[CellId] {
        &self.cells
    }

    pub fn matrix(&self) -> &Matrix<Rational> {
        &self.matrix
    }

    pub fn rhs(&self) -> &Vector<Rational> {
        &self.rhs
    }

    pub fn equation_count(&self) -> usize {
        self.matrix.rows()
    }

    /// Cells that are impossible in the table (probability pinned to zero).
    pub fn zero_cells(&self) -> &[CellId] {
        &self.zero_cells
    }

    /// Cells that are possible in the table.
    pub fn positive_cells(&self) -> &[CellId] {
        &self.positive_cells
    }

    pub fn cell_index(&self, cell: &CellId) -> Result<usize> {
        self.cells
            .iter()
            .position(|c| c == cell)
            .ok_or_else(|| Error::UnknownLabel(cell.to_string()))
    }
}

/// Build the equality system for a table: per-block normalization, marginal
/// agreement against the first measurement on the opposite side, and a zero
/// equation per impossible cell.
pub fn build_system(table: &PossibilityTable) -> Result<NoSignalingSystem> {
    let rows = table.rows().to_vec();
    let cols = table.cols().to_vec();
    let n_rows = table.n_rows();
    let n_cols = table.n_cols();
    let n_vars = n_rows * n_cols;

    let row_offsets: Vec<usize> = rows
        .iter()
        .scan(0, |acc, g| {
            let start = *acc;
            *acc += g.outcomes.len();
            Some(start)
        })
        .collect();
    let col_offsets: Vec<usize> = cols
        .iter()
        .scan(0, |acc, g| {
            let start = *acc;
            *acc += g.outcomes.len();
            Some(start)
        })
        .collect();

    let mut cells = Vec::with_capacity(n_vars);
    for (gi, rg) in rows.iter().enumerate() {
        for ro in &rg.outcomes {
            for (gj, cg) in cols.iter().enumerate() {
                for co in &cg.outcomes {
                    let _ = (gi, gj);
                    cells.push(CellId::new(&rg.label, ro, &cg.label, co));
                }
            }
        }
    }

    let var = |r: usize, c: usize| r * n_cols + c;
    let mut matrix_rows: Vec<Vec<Rational>> = Vec::new();
    let mut rhs = Vec::new();
    let mut push_equation = |coeffs: Vec<(usize, Rational)>, value: Rational| {
        let mut row = vec![Rational::zero(); n_vars];
        for (idx, coef) in coeffs {
            row[idx] = row[idx].clone() + coef;
        }
        matrix_rows.push(row);
        rhs.push(value);
    };

    // Every block is a probability distribution.
    for (gi, rg) in rows.iter().enumerate() {
        for (gj, cg) in cols.iter().enumerate() {
            let mut coeffs = Vec::new();
            for i in 0..rg.outcomes.len() {
                for j in 0..cg.outcomes.len() {
                    coeffs.push((var(row_offsets[gi] + i, col_offsets[gj] + j), Rational::one()));
                }
            }
            push_equation(coeffs, Rational::one());
        }
    }

    // Side-1 marginals agree with the ones taken against the first
    // column measurement.
    for (gi, rg) in rows.iter().enumerate() {
        for i in 0..rg.outcomes.len() {
            let r = row_offsets[gi] + i;
            for (gj, cg) in cols.iter().enumerate().skip(1) {
                let mut coeffs = Vec::new();
                for j in 0..cg.outcomes.len() {
                    coeffs.push((var(r, col_offsets[gj] + j), Rational::one()));
                }
                for j in 0..cols[0].outcomes.len() {
                    coeffs.push((var(r, col_offsets[0] + j), -Rational::one()));
                }
                push_equation(coeffs, Rational::zero());
            }
        }
    }

    // Side-2 marginals agree with the ones taken against the first row
    // measurement.
    for (gj, cg) in cols.iter().enumerate() {
        for j in 0..cg.outcomes.len() {
            let c = col_offsets[gj] + j;
            for (gi, rg) in rows.iter().enumerate().skip(1) {
                let mut coeffs = Vec::new();
                for i in 0..rg.outcomes.len() {
                    coeffs.push((var(row_offsets[gi] + i, c), Rational::one()));
                }
                for i in 0..rows[0].outcomes.len() {
                    coeffs.push((var(row_offsets[0] + i, c), -Rational::one()));
                }
                push_equation(coeffs, Rational::zero());
            }
        }
    }

    // Impossible cells carry probability zero.
    let mut zero_cells = Vec::new();
    let mut positive_cells = Vec::new();
    for r in 0..n_rows {
        for c in 0..n_cols {
            if table.cell(r, c) {
                positive_cells.push(cells[var(r, c)].clone());
            } else {
                zero_cells.push(cells[var(r, c)].clone());
                push_equation(vec![(var(r, c), Rational::one())], Rational::zero());
            }
        }
    }

    Ok(NoSignalingSystem {
        rows,
        cols,
        cells,
        matrix: Matrix::from_rows(matrix_rows)?,
        rhs: Vector::new(rhs)?,
        zero_cells,
        positive_cells,
    })
}

/// Solve the equality system exactly. Errors `Infeasible` when the
/// equalities contradict each other.
pub fn solve(sys: &NoSignalingSystem) -> Result<AffineSolutionSpace<Rational>> {
    solve_affine(sys.matrix(), sys.rhs()).map_err(|e| match e {
        Error::NoSolution => Error::Infeasible,
        other => other,
    })
}

/// An affine expression `constant + coefficients . params` for one cell's
/// probability over some parameter basis.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SymbolicCell {
    pub constant: Rational,
    pub coefficients: Vec<Rational>,
}

impl SymbolicCell {
    pub fn evaluate(&self, params: &[Rational]) -> Result<Rational> {
        if params.len() != self.coefficients.len() {
            return Err(Error::DimensionMismatch(format!(
                "expression over {} parameters evaluated at {}",
                self.coefficients.len(),
                params.len()
            )));
        }
        Ok(self
            .coefficients
            .iter()
            .zip(params)
            .fold(self.constant.clone(), |acc, (g, t)| {
                acc + g.clone() * t.clone()
            }))
    }

    /// Render like `1/2+q`, `-q-r`, `0`, with parameters in order.
    pub fn render(&self, names: &[String]) -> String {
        let mut out = String::new();
        if !self.constant.is_zero() {
            out.push_str(&self.constant.to_string());
        }
        let one = Rational::one();
        for (coef, name) in self.coefficients.iter().zip(names) {
            if coef.is_zero() {
                continue;
            }
            if *coef == one {
                if !out.is_empty() {
                    out.push('+');
                }
            } else if *coef == -one.clone() {
                out.push('-');
            } else {
                if coef.is_positive() && !out.is_empty() {
                    out.push('+');
                }
                out.push_str(&coef.to_string());
            }
            out.push_str(name);
        }
        if out.is_empty() { "0".into() } else { out }
    }
}

/// The probability of every cell as an affine expression over the solution
/// space's free parameters, in cell order.
pub fn cell_forms(
    sys: &NoSignalingSystem,
    space: &AffineSolutionSpace<Rational>,
) -> Result<Vec<SymbolicCell>> {
    if space.particular().dim() != sys.cells().len() {
        return Err(Error::DimensionMismatch(format!(
            "solution space over {} variables, system has {} cells",
            space.particular().dim(),
            sys.cells().len()
        )));
    }
    Ok((0..sys.cells().len())
        .map(|i| SymbolicCell {
            constant: space.particular().get(i).clone(),
            coefficients: space
                .homogeneous_basis()
                .iter()
                .map(|b| b.get(i).clone())
                .collect(),
        })
        .collect())
}

/// A named reparametrization target: the parameter equals the probability
/// of `cell` minus `offset`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Anchor {
    pub cell: CellId,
    pub offset: Rational,
    pub name: String,
}

impl Anchor {
    pub fn new(cell: CellId, offset: Rational, name: impl Into<String>) -> Self {
        Anchor {
            cell,
            offset,
            name: name.into(),
        }
    }
}

/// The standard anchors for the mobit singlet table:
/// q = P(X1+,X2-) - 1/2, r = P(X1-,Y2-) - 1/2, s = P(Z1+,X2+) - 1/2.
pub fn mobit_anchors() -> Vec<Anchor> {
    let half = Rational::new(1, 2).expect("nonzero denominator");
    vec![
        Anchor::new(CellId::new("X", "+", "X", "-"), half.clone(), "q"),
        Anchor::new(CellId::new("X", "-", "Y", "-"), half.clone(), "r"),
        Anchor::new(CellId::new("Z", "+", "X", "+"), half, "s"),
    ]
}

/// All cell probabilities expressed over named anchor parameters.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SymbolicTable {
    rows: Vec<LabelGroup>,
    cols: Vec<LabelGroup>,
    params: Vec<String>,
    cells: Vec<Vec<SymbolicCell>>,
}

impl SymbolicTable {
    pub fn rows(&self) -> &[LabelGroup] {
        &self.rows
    }

    pub fn cols(&self) -> &[LabelGroup] {
        &self.cols
    }

    pub fn params(&self) -> &[String] {
        &self.params
    }

    pub fn cell(&self, r: usize, c: usize) -> &SymbolicCell {
        &self.cells[r][c]
    }

    pub fn cell_text(&self, r: usize, c: usize) -> String {
        self.cells[r][c].render(&self.params)
    }

    pub fn render_text(&self) -> String {
        render_block_grid(&self.rows, &self.cols, |r, c| self.cell_text(r, c))
    }

    pub fn render_csv(&self) -> String {
        render_block_csv(&self.rows, &self.cols, |r, c| self.cell_text(r, c))
    }
}

/// Rewrite the solution space over the anchor parameters. Errors
/// `DegenerateAnchors` unless the anchor cells coordinatize the space.
pub fn symbolic_cells(
    sys: &NoSignalingSystem,
    space: &AffineSolutionSpace<Rational>,
    anchors: &[Anchor],
) -> Result<SymbolicTable> {
    let dim = space.dimension();
    if anchors.len() != dim {
        return Err(Error::DimensionMismatch(format!(
            "{} anchors for a {}-dimensional space",
            anchors.len(),
            dim
        )));
    }
    let forms = cell_forms(sys, space)?;
    let n_cols_table = sys.cols().iter().map(|g| g.outcomes.len()).sum::<usize>();

    let params: Vec<String> = anchors.iter().map(|a| a.name.clone()).collect();
    let reparametrized: Vec<SymbolicCell> = if dim == 0 {
        forms
    } else {
        let anchor_forms: Vec<&SymbolicCell> = anchors
            .iter()
            .map(|a| sys.cell_index(&a.cell).map(|i| &forms[i]))
            .collect::<Result<_>>()?;
        // params = m0 + M t, with M rows the anchor coefficient vectors.
        let m = Matrix::from_rows(
            anchor_forms
                .iter()
                .map(|f| f.coefficients.clone())
                .collect(),
        )?;
        let m0: Vec<Rational> = anchor_forms
            .iter()
            .zip(anchors)
            .map(|(f, a)| f.constant.clone() - a.offset.clone())
            .collect();
        // Invert M column by column; a non-unique solve means the anchors
        // do not coordinatize the space.
        let mut minv_cols = Vec::with_capacity(dim);
        for i in 0..dim {
            let mut e = vec![Rational::zero(); dim];
            e[i] = Rational::one();
            let sol = solve_affine(&m, &Vector::new(e)?).map_err(|_| Error::DegenerateAnchors)?;
            if sol.dimension() != 0 {
                return Err(Error::DegenerateAnchors);
            }
            minv_cols.push(sol.particular().clone());
        }
        forms
            .iter()
            .map(|f| {
                // g_pi[i] = g . Minv e_i ; constant = c - g_pi . m0.
                let g_pi: Vec<Rational> = minv_cols
                    .iter()
                    .map(|col| {
                        f.coefficients
                            .iter()
                            .zip(col.entries())
                            .fold(Rational::zero(), |acc, (a, b)| acc + a.clone() * b.clone())
                    })
                    .collect();
                let shift = g_pi
                    .iter()
                    .zip(&m0)
                    .fold(Rational::zero(), |acc, (a, b)| acc + a.clone() * b.clone());
                SymbolicCell {
                    constant: f.constant.clone() - shift,
                    coefficients: g_pi,
                }
            })
            .collect()
    };

    let cells: Vec<Vec<SymbolicCell>> = reparametrized
        .chunks(n_cols_table)
        .map(|chunk| chunk.to_vec())
        .collect();
    Ok(SymbolicTable {
        rows: sys.rows().to_vec(),
        cols: sys.cols().to_vec(),
        params,
        cells,
    })
}

/// An exactly verified linear-program optimum.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LpOptimum {
    pub value: Rational,
    /// Parameter values attaining the optimum.
    pub point: Vec<Rational>,
    /// One nonnegative multiplier per constraint, certifying optimality:
    /// the objective gradient is minus the dual combination of constraint
    /// gradients, and the dual combination of constants reproduces `value`.
    pub dual: Vec<Rational>,
}

impl LpOptimum {
    /// Re-verify the certificate from scratch: the point is feasible and
    /// attains `value`, and the dual multipliers prove no feasible point
    /// does better.
    pub fn verify(&self, constraints: &[SymbolicCell], objective: &SymbolicCell) -> Result<bool> {
        for c in constraints {
            if c.evaluate(&self.point)?.is_negative() {
                return Ok(false);
            }
        }
        if objective.evaluate(&self.point)? != self.value {
            return Ok(false);
        }
        if self.dual.len() != constraints.len() {
            return Ok(false);
        }
        if self.dual.iter().any(Rational::is_negative) {
            return Ok(false);
        }
        let d = objective.coefficients.len();
        for i in 0..d {
            let mut total = objective.coefficients[i].clone();
            for (y, c) in self.dual.iter().zip(constraints) {
                total = total + y.clone() * c.coefficients[i].clone();
            }
            if !total.is_zero() {
                return Ok(false);
            }
        }
        let mut bound = objective.constant.clone();
        for (y, c) in self.dual.iter().zip(constraints) {
            bound = bound + y.clone() * c.constant.clone();
        }
        Ok(bound == self.value)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LpOutcome {
    Optimal(LpOptimum),
    Unbounded,
}

/// Maximize an affine objective over free parameters subject to
/// `constraint >= 0` for every given form. Errors `InfeasibleRegion` when
/// the constraints admit no point.
pub fn lp_maximize(constraints: &[SymbolicCell], objective: &SymbolicCell) -> Result<LpOutcome> {
    let d = objective.coefficients.len();
    for c in constraints {
        if c.coefficients.len() != d {
            return Err(Error::DimensionMismatch(format!(
                "constraint over {} parameters, objective over {}",
                c.coefficients.len(),
                d
            )));
        }
    }
    // Free parameters t split as u - w with u, w >= 0; each form
    // k + g.t >= 0 becomes -g.u + g.w <= k.
    let a: Vec<Vec<Rational>> = constraints
        .iter()
        .map(|c| {
            let mut row = Vec::with_capacity(2 * d);
            for g in &c.coefficients {
                row.push(-g.clone());
            }
            for g in &c.coefficients {
                row.push(g.clone());
            }
            row
        })
        .collect();
    let b: Vec<Rational> = constraints.iter().map(|c| c.constant.clone()).collect();
    let mut c_std = Vec::with_capacity(2 * d);
    for g in &objective.coefficients {
        c_std.push(g.clone());
    }
    for g in &objective.coefficients {
        c_std.push(-g.clone());
    }

    match simplex::maximize(&a, &b, &c_std)? {
        SimplexOutcome::Infeasible => Err(Error::InfeasibleRegion),
        SimplexOutcome::Unbounded => Ok(LpOutcome::Unbounded),
        SimplexOutcome::Optimal { value, x, dual } => {
            let point: Vec<Rational> = (0..d).map(|i| x[i].clone() - x[d + i].clone()).collect();
            let optimum = LpOptimum {
                value: value + objective.constant.clone(),
                point,
                dual,
            };
            debug_assert!(
                optimum.verify(constraints, objective)?,
                "simplex produced an invalid certificate"
            );
            Ok(LpOutcome::Optimal(optimum))
        }
    }
}

/// Possible cells whose probability is forced to zero over the
/// nonnegativity polytope of the solution space, sorted by cell id.
pub fn forced_zero_cells(
    sys: &NoSignalingSystem,
    space: &AffineSolutionSpace<Rational>,
) -> Result<Vec<CellId>> {
    let forms = cell_forms(sys, space)?;
    let mut forced = Vec::new();
    for (i, cell) in sys.cells().iter().enumerate() {
        if sys.zero_cells().contains(cell) {
            continue;
        }
        match lp_maximize(&forms, &forms[i])? {
            LpOutcome::Unbounded => {}
            LpOutcome::Optimal(opt) => {
                if opt.value.is_zero() {
                    forced.push(cell.clone());
                }
            }
        }
    }
    forced.sort();
    Ok(forced)
}

/// Whether a strictly positive no-signaling assignment exists for every
/// possible cell.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "lowercase")]
pub enum RequirementIvVerdict {
    /// Every possible cell can carry positive probability.
    Satisfiable,
    /// The listed possible cells are forced to probability zero.
    Violated { witnesses: Vec<CellId> },
}

pub fn requirement_iv_verdict(
    sys: &NoSignalingSystem,
    space: &AffineSolutionSpace<Rational>,
) -> Result<RequirementIvVerdict> {
    let witnesses = forced_zero_cells(sys, space)?;
    Ok(if witnesses.is_empty() {
        RequirementIvVerdict::Satisfiable
    } else {
        RequirementIvVerdict::Violated { witnesses }
    })
}

/// A fully determined probability table over the same labels as the
/// possibility table it came from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProbabilityTable {
    rows: Vec<LabelGroup>,
    cols: Vec<LabelGroup>,
    cells: Vec<Vec<Rational>>,
}

impl ProbabilityTable {
    pub fn from_parts(
        rows: Vec<LabelGroup>,
        cols: Vec<LabelGroup>,
        cells: Vec<Vec<Rational>>,
    ) -> Result<Self> {
        let n_rows = check_axis(&rows, "row")?;
        let n_cols = check_axis(&cols, "column")?;
        if cells.len() != n_rows || cells.iter().any(|r| r.len() != n_cols) {
            return Err(Error::MalformedTable(format!(
                "cell grid is not {n_rows}x{n_cols}"
            )));
        }
        Ok(ProbabilityTable { rows, cols, cells })
    }

    pub fn rows(&self) -> &[LabelGroup] {
        &self.rows
    }

    pub fn cols(&self) -> &[LabelGroup] {
        &self.cols
    }

    pub fn cell(&self, r: usize, c: usize) -> &Rational {
        &self.cells[r][c]
    }

    pub fn cell_by_labels(
        &self,
        row_measurement: &str,
        row_outcome: &str,
        col_measurement: &str,
        col_outcome: &str,
    ) -> Result<&Rational> {
        let r = PossibilityTable::axis_index(&self.rows, row_measurement, row_outcome)?;
        let c = PossibilityTable::axis_index(&self.cols, col_measurement, col_outcome)?;
        Ok(&self.cells[r][c])
    }

    pub fn render_text(&self) -> String {
        render_block_grid(&self.rows, &self.cols, |r, c| self.cells[r][c].to_string())
    }

    pub fn render_csv(&self) -> String {
        render_block_csv(&self.rows, &self.cols, |r, c| self.cells[r][c].to_string())
    }

    fn group_ranges(groups: &[LabelGroup]) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        let mut start = 0;
        for g in groups {
            out.push((start, start + g.outcomes.len()));
            start += g.outcomes.len();
        }
        out
    }

    /// Check the probability axioms, the no-signaling marginal equalities,
    /// and agreement of zeros with the impossible cells of `possibility`.
    pub fn check_requirements(&self, possibility: &PossibilityTable) -> Result<()> {
        if possibility.rows() != self.rows.as_slice() || possibility.cols() != self.cols.as_slice()
        {
            return Err(Error::MalformedTable(
                "possibility table labels do not match".into(),
            ));
        }
        let one = Rational::one();
        for row in &self.cells {
            for v in row {
                if v.is_negative() || *v > one {
                    return Err(Error::MalformedTable(format!(
                        "probability {v} outside [0,1]"
                    )));
                }
            }
        }
        let row_ranges = Self::group_ranges(&self.rows);
        let col_ranges = Self::group_ranges(&self.cols);
        for &(r0, r1) in &row_ranges {
            for &(c0, c1) in &col_ranges {
                let mut sum = Rational::zero();
                for r in r0..r1 {
                    for c in c0..c1 {
                        sum = sum + self.cells[r][c].clone();
                    }
                }
                if sum != one {
                    return Err(Error::MalformedTable(format!(
                        "block starting at ({r0},{c0}) sums to {sum}, not 1"
                    )));
                }
            }
        }
        // One-sided marginals must not depend on the partner measurement.
        for r in 0..self.cells.len() {
            let sums: Vec<Rational> = col_ranges
                .iter()
                .map(|&(c0, c1)| {
                    (c0..c1).fold(Rational::zero(), |acc, c| acc + self.cells[r][c].clone())
                })
                .collect();
            if sums.windows(2).any(|w| w[0] != w[1]) {
                return Err(Error::MalformedTable(format!(
                    "row {r} marginal depends on the partner measurement"
                )));
            }
        }
        for c in 0..self.cells[0].len() {
            let sums: Vec<Rational> = row_ranges
                .iter()
                .map(|&(r0, r1)| {
                    (r0..r1).fold(Rational::zero(), |acc, r| acc + self.cells[r][c].clone())
                })
                .collect();
            if sums.windows(2).any(|w| w[0] != w[1]) {
                return Err(Error::MalformedTable(format!(
                    "column {c} marginal depends on the partner measurement"
                )));
            }
        }
        for r in 0..self.cells.len() {
            for c in 0..self.cells[0].len() {
                if !possibility.cell(r, c) && !self.cells[r][c].is_zero() {
                    return Err(Error::MalformedTable(format!(
                        "impossible cell ({r},{c}) has probability {}",
                        self.cells[r][c]
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Set the forced cells to zero and solve; the result must be unique.
/// Errors `NotUnique` when degrees of freedom remain and `Infeasible` when
/// the forced zeros contradict the system.
pub fn relaxed_unique_table(
    sys: &NoSignalingSystem,
    space: &AffineSolutionSpace<Rational>,
    forced: &[CellId],
) -> Result<ProbabilityTable> {
    let n_cols_table = sys.cols().iter().map(|g| g.outcomes.len()).sum::<usize>();
    let values: Vector<Rational> = if space.dimension() == 0 {
        space.particular().clone()
    } else {
        if forced.is_empty() {
            return Err(Error::NotUnique {
                dimension: space.dimension(),
            });
        }
        let forms = cell_forms(sys, space)?;
        let mut rows = Vec::new();
        let mut rhs = Vec::new();
        for cell in forced {
            let form = &forms[sys.cell_index(cell)?];
            rows.push(form.coefficients.clone());
            rhs.push(-form.constant.clone());
        }
        let sub = solve_affine(&Matrix::from_rows(rows)?, &Vector::new(rhs)?).map_err(
            |e| match e {
                Error::NoSolution => Error::Infeasible,
                other => other,
            },
        )?;
        if sub.dimension() != 0 {
            return Err(Error::NotUnique {
                dimension: sub.dimension(),
            });
        }
        space.element_at(sub.particular().entries())?
    };

    let cells: Vec<Vec<Rational>> = values
        .entries()
        .chunks(n_cols_table)
        .map(|chunk| chunk.to_vec())
        .collect();
    ProbabilityTable::from_parts(sys.rows().to_vec(), sys.cols().to_vec(), cells)
}

/// The correlation `E = P(0,0) - P(0,1) - P(1,0) + P(1,1)` of one 2x2
/// block, signs taken positionally over each measurement's outcome order.
fn block_correlation(table: &ProbabilityTable, rm: &str, cm: &str) -> Result<Rational> {
    let row_group = table
        .rows()
        .iter()
        .find(|g| g.label == rm)
        .ok_or_else(|| Error::UnknownLabel(rm.to_string()))?;
    let col_group = table
        .cols()
        .iter()
        .find(|g| g.label == cm)
        .ok_or_else(|| Error::UnknownLabel(cm.to_string()))?;
    if row_group.outcomes.len() != 2 || col_group.outcomes.len() != 2 {
        return Err(Error::IncompleteBlock(format!(
            "correlation of ({rm},{cm}) needs 2x2 outcomes"
        )));
    }
    let mut total = Rational::zero();
    for (i, ro) in row_group.outcomes.iter().enumerate() {
        for (j, co) in col_group.outcomes.iter().enumerate() {
            let v = table.cell_by_labels(rm, ro, cm, co)?.clone();
            total = if (i + j) % 2 == 0 { total + v } else { total - v };
        }
    }
    Ok(total)
}

/// The CHSH combination of four block correlations, subtracting the block
/// named by `negated` and adding the other three.
pub fn chsh(
    table: &ProbabilityTable,
    row_pair: [&str; 2],
    col_pair: [&str; 2],
    negated: (&str, &str),
) -> Result<Rational> {
    if !row_pair.contains(&negated.0) || !col_pair.contains(&negated.1) {
        return Err(Error::UnknownLabel(format!(
            "({},{}) is not one of the selected blocks",
            negated.0, negated.1
        )));
    }
    let mut total = Rational::zero();
    for rm in row_pair {
        for cm in col_pair {
            let e = block_correlation(table, rm, cm)?;
            total = if (rm, cm) == negated { total - e } else { total + e };
        }
    }
    Ok(total)
}

/// A two-measurement-per-side selection whose CHSH value reaches the
/// algebraic maximum of 4.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PrBoxReport {
    pub rows: [String; 2],
    pub cols: [String; 2],
    pub negated: (String, String),
    pub chsh: Rational,
}

/// Search the four sign placements of the CHSH combination for the chosen
/// measurements; report the first reaching |CHSH| = 4.
pub fn pr_box_check(
    table: &ProbabilityTable,
    row_pair: [&str; 2],
    col_pair: [&str; 2],
) -> Result<Option<PrBoxReport>> {
    let four = Rational::from_integer(4);
    for rm in row_pair {
        for cm in col_pair {
            let value = chsh(table, row_pair, col_pair, (rm, cm))?;
            if value.abs() == four {
                return Ok(Some(PrBoxReport {
                    rows: [row_pair[0].to_string(), row_pair[1].to_string()],
                    cols: [col_pair[0].to_string(), col_pair[1].to_string()],
                    negated: (rm.to_string(), cm.to_string()),
                    chsh: value,
                }));
            }
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenarios::MobitScenario;

    fn singlet_pipeline() -> (NoSignalingSystem, AffineSolutionSpace<Rational>) {
        let table = MobitScenario::new(2).unwrap().table().unwrap();
        let sys = build_system(&table).unwrap();
        let space = solve(&sys).unwrap();
        (sys, space)
    }

    fn half() -> Rational {
        Rational::new(1, 2).unwrap()
    }

    #[test]
    fn system_shape_for_the_singlet_table() {
        let (sys, space) = singlet_pipeline();
        assert_eq!(sys.cells().len(), 36);
        // 9 block sums + 12 + 12 marginal equalities + 12 zeros.
        assert_eq!(sys.equation_count(), 45);
        assert_eq!(sys.zero_cells().len(), 12);
        assert_eq!(sys.positive_cells().len(), 24);
        assert_eq!(space.dimension(), 3);
    }

    #[test]
    fn every_space_element_satisfies_the_equalities() {
        let (sys, space) = singlet_pipeline();
        for params in [
            vec![Rational::zero(), Rational::zero(), Rational::zero()],
            vec![
                Rational::new(1, 7).unwrap(),
                Rational::new(-2, 5).unwrap(),
                Rational::from_integer(3),
            ],
        ] {
            let x = space.element_at(&params).unwrap();
            let lhs = sys.matrix().mat_vec(&x).unwrap();
            assert_eq!(lhs.entries(), sys.rhs().entries());
        }
    }

    #[test]
    fn symbolic_table_matches_the_three_parameter_family() {
        let (sys, space) = singlet_pipeline();
        let table = symbolic_cells(&sys, &space, &mobit_anchors()).unwrap();
        assert_eq!(table.params(), &["q", "r", "s"]);
        let expected: [[&str; 6]; 6] = [
            ["0", "1/2+q", "1/2+q", "0", "1/2-s", "q+s"],
            ["1/2-q", "0", "-q-r", "1/2+r", "0", "1/2-q"],
            ["1/2-q", "q+r", "0", "1/2+r", "1/2+r", "0"],
            ["0", "1/2-r", "1/2-r", "0", "-r-s", "1/2+s"],
            ["1/2+s", "0", "1/2-r", "r+s", "0", "1/2+s"],
            ["-q-s", "1/2+q", "0", "1/2-s", "1/2-s", "0"],
        ];
        for (r, row) in expected.iter().enumerate() {
            for (c, want) in row.iter().enumerate() {
                assert_eq!(table.cell_text(r, c), *want, "cell ({r},{c}) mismatch");
            }
        }
    }

    #[test]
    fn reparametrization_preserves_cell_values() {
        let (sys, space) = singlet_pipeline();
        let table = symbolic_cells(&sys, &space, &mobit_anchors()).unwrap();
        let forms = cell_forms(&sys, &space).unwrap();
        let anchors = mobit_anchors();
        let t = vec![
            Rational::new(1, 3).unwrap(),
            Rational::new(-1, 4).unwrap(),
            Rational::new(2, 7).unwrap(),
        ];
        // Evaluate the anchors at t to get the named parameter values.
        let pi: Vec<Rational> = anchors
            .iter()
            .map(|a| {
                let i = sys.cell_index(&a.cell).unwrap();
                forms[i].evaluate(&t).unwrap() - a.offset.clone()
            })
            .collect();
        for (i, form) in forms.iter().enumerate() {
            let direct = form.evaluate(&t).unwrap();
            let via_params = table.cells[i / 6][i % 6].evaluate(&pi).unwrap();
            assert_eq!(direct, via_params, "cell {i}");
        }
    }

    #[test]
    fn degenerate_anchors_are_rejected() {
        let (sys, space) = singlet_pipeline();
        // Two anchors on cells of the same block row carry dependent
        // coordinates; triple duplicates are certainly degenerate.
        let a = Anchor::new(CellId::new("X", "+", "X", "-"), half(), "q");
        let anchors = vec![a.clone(), a.clone(), a];
        assert_eq!(
            symbolic_cells(&sys, &space, &anchors),
            Err(Error::DegenerateAnchors)
        );
    }

    #[test]
    fn nonnegativity_pins_every_parameter_to_zero() {
        let (sys, space) = singlet_pipeline();
        let forms = cell_forms(&sys, &space).unwrap();
        // Maximizing the (X1+,X2-) cell 1/2+q over the polytope yields 1/2:
        // the opposite-sign sum cells force q + r = q + s = r + s = 0.
        let idx = sys.cell_index(&CellId::new("X", "+", "X", "-")).unwrap();
        let LpOutcome::Optimal(opt) = lp_maximize(&forms, &forms[idx]).unwrap() else {
            panic!("bounded program");
        };
        assert_eq!(opt.value, half());
        assert!(opt.verify(&forms, &forms[idx]).unwrap());
        // And the minimum is also 1/2: maximize the negated form.
        let negated = SymbolicCell {
            constant: -forms[idx].constant.clone(),
            coefficients: forms[idx].coefficients.iter().map(|g| -g.clone()).collect(),
        };
        let LpOutcome::Optimal(opt) = lp_maximize(&forms, &negated).unwrap() else {
            panic!("bounded program");
        };
        assert_eq!(opt.value, -half());
    }

    #[test]
    fn lp_reports_unbounded_and_infeasible_regions() {
        let objective = SymbolicCell {
            constant: Rational::zero(),
            coefficients: vec![Rational::one()],
        };
        assert_eq!(lp_maximize(&[], &objective), Ok(LpOutcome::Unbounded));

        let t_nonneg = objective.clone();
        let t_below_minus_one = SymbolicCell {
            constant: -Rational::one(),
            coefficients: vec![-Rational::one()],
        };
        assert_eq!(
            lp_maximize(&[t_nonneg, t_below_minus_one], &objective),
            Err(Error::InfeasibleRegion)
        );
    }

    #[test]
    fn six_cells_are_forced_to_zero() {
        let (sys, space) = singlet_pipeline();
        let forced = forced_zero_cells(&sys, &space).unwrap();
        let expected = vec![
            CellId::new("X", "+", "Z", "-"),
            CellId::new("X", "-", "Y", "+"),
            CellId::new("Y", "+", "X", "-"),
            CellId::new("Y", "-", "Z", "+"),
            CellId::new("Z", "+", "Y", "-"),
            CellId::new("Z", "-", "X", "+"),
        ];
        assert_eq!(forced, expected);
        match requirement_iv_verdict(&sys, &space).unwrap() {
            RequirementIvVerdict::Violated { witnesses } => assert_eq!(witnesses, expected),
            RequirementIvVerdict::Satisfiable => panic!("expected a violation"),
        }
    }

    #[test]
    fn relaxed_table_is_the_all_halves_pattern() {
        let (sys, space) = singlet_pipeline();
        let forced = forced_zero_cells(&sys, &space).unwrap();
        let table = relaxed_unique_table(&sys, &space, &forced).unwrap();
        let h = half();
        let z = Rational::zero();
        let expected = [
            [&z, &h, &h, &z, &h, &z],
            [&h, &z, &z, &h, &z, &h],
            [&h, &z, &z, &h, &h, &z],
            [&z, &h, &h, &z, &z, &h],
            [&h, &z, &h, &z, &z, &h],
            [&z, &h, &z, &h, &h, &z],
        ];
        for (r, row) in expected.iter().enumerate() {
            for (c, want) in row.iter().enumerate() {
                assert_eq!(table.cell(r, c), *want, "cell ({r},{c})");
            }
        }
        let possibility = MobitScenario::new(2).unwrap().table().unwrap();
        table.check_requirements(&possibility).unwrap();
    }

    #[test]
    fn relaxed_table_requires_enough_pins() {
        let (sys, space) = singlet_pipeline();
        assert_eq!(
            relaxed_unique_table(&sys, &space, &[]),
            Err(Error::NotUnique { dimension: 3 })
        );
        let forced = forced_zero_cells(&sys, &space).unwrap();
        assert!(matches!(
            relaxed_unique_table(&sys, &space, &forced[..1]),
            Err(Error::NotUnique { .. })
        ));
    }

    #[test]
    fn pr_box_appears_in_the_relaxed_table() {
        let (sys, space) = singlet_pipeline();
        let forced = forced_zero_cells(&sys, &space).unwrap();
        let table = relaxed_unique_table(&sys, &space, &forced).unwrap();
        let report = pr_box_check(&table, ["X", "Y"], ["X", "Z"]).unwrap().unwrap();
        assert_eq!(report.chsh, Rational::from_integer(4));
        assert_eq!(report.negated, ("X".to_string(), "X".to_string()));
        // The individual correlations are E(X,X) = -1 and +1 elsewhere, so
        // negating any other block yields 0 instead of 4.
        assert_eq!(
            chsh(&table, ["X", "Y"], ["X", "Z"], ("Y", "Z")).unwrap(),
            Rational::zero()
        );
    }

    #[test]
    fn chsh_validates_its_inputs() {
        let (sys, space) = singlet_pipeline();
        let forced = forced_zero_cells(&sys, &space).unwrap();
        let table = relaxed_unique_table(&sys, &space, &forced).unwrap();
        assert!(matches!(
            chsh(&table, ["X", "Y"], ["X", "Z"], ("Z", "X")),
            Err(Error::UnknownLabel(_))
        ));
        assert!(matches!(
            chsh(&table, ["X", "W"], ["X", "Z"], ("X", "X")),
            Err(Error::UnknownLabel(_))
        ));
    }

    #[test]
    fn certificates_catch_tampering() {
        let (sys, space) = singlet_pipeline();
        let forms = cell_forms(&sys, &space).unwrap();
        let idx = sys.cell_index(&CellId::new("X", "+", "X", "-")).unwrap();
        let LpOutcome::Optimal(opt) = lp_maximize(&forms, &forms[idx]).unwrap() else {
            panic!("bounded program");
        };
        let mut bad = opt.clone();
        bad.value = Rational::one();
        assert!(!bad.verify(&forms, &forms[idx]).unwrap());
        // Tamper the multiplier of a constraint with a nonzero gradient.
        let mut bad_dual = opt;
        bad_dual.dual[idx] = bad_dual.dual[idx].clone() + Rational::one();
        assert!(!bad_dual.verify(&forms, &forms[idx]).unwrap());
    }
}
